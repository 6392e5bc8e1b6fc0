#include <doctest.h>

#include <random>

#include "hypertest/circuit.hpp"
#include "hypertest/decompose.hpp"

using namespace hypertest;

namespace {

struct Spec {
  GateKind kind;
  GateParams params;
  std::vector<unsigned> in;
  unsigned out;
};

std::vector<Spec> specs() {
  std::vector<Spec> s;
  for (unsigned w : {1u, 2u, 3u, 5u, 8u, 13u}) {
    s.push_back({GateKind::Not, {}, {w}, w});
    s.push_back({GateKind::And, {}, {w, w}, w});
    s.push_back({GateKind::Or, {}, {w, w, w}, w});
    s.push_back({GateKind::Xor, {}, {w, w, w, w}, w});
    s.push_back({GateKind::Mux2, {}, {1, w, w}, w});
    s.push_back({GateKind::Eq, {}, {w, w}, 1});
    s.push_back({GateKind::Neq, {}, {w, w}, 1});
    s.push_back({GateKind::Lt, {}, {w, w}, 1});
    s.push_back({GateKind::Add, {}, {w, w}, w});
    s.push_back({GateKind::Sub, {}, {w, w}, w});
    s.push_back({GateKind::Mul, {}, {w, w}, w});
    for (unsigned k : {1u, 2u, 3u, 4u}) {
      s.push_back({GateKind::Shl, {}, {w, k}, w});
      s.push_back({GateKind::Shr, {}, {w, k}, w});
    }
    GateParams cp;
    cp.value = 0x1234567890abcdefull;
    s.push_back({GateKind::Const, cp, {}, w});
    if (w >= 3) {
      GateParams sp;
      sp.lo = 1;
      s.push_back({GateKind::Slice, sp, {w}, w - 2});
      s.push_back({GateKind::Concat, {}, {w, 2}, w + 2});
    }
  }
  GateParams c1;
  c1.arms = {1};
  s.push_back({GateKind::Case, c1, {1, 3, 3}, 3});
  GateParams c3;
  c3.arms = {0, 2, 3};
  s.push_back({GateKind::Case, c3, {2, 2, 2, 2, 2}, 2});
  GateParams c5;
  c5.arms = {7, 0, 3, 4, 1};
  s.push_back({GateKind::Case, c5, {3, 4, 4, 4, 4, 4, 4}, 4});
  s.push_back({GateKind::Add, {}, {32, 32}, 32});
  s.push_back({GateKind::Mul, {}, {16, 16}, 16});
  return s;
}

// Evaluates a template network for 64 input assignments. vals[lane][pin].
std::vector<std::uint64_t> eval_template(const GateCircuit& gc, const Spec& sp,
                                         const std::vector<std::vector<std::uint64_t>>& vals) {
  std::vector<std::uint64_t> v(gc.nets().size(), 0);
  std::size_t bit = 0;
  for (std::size_t p = 0; p < sp.in.size(); ++p)
    for (unsigned b = 0; b < sp.in[p]; ++b, ++bit) {
      std::uint64_t word = 0;
      for (std::size_t lane = 0; lane < vals.size(); ++lane) word |= ((vals[lane][p] >> b) & 1) << lane;
      v[gc.inputs()[bit]] = word;
    }
  gc.eval(v);
  std::vector<std::uint64_t> out(vals.size(), 0);
  for (unsigned j = 0; j < sp.out; ++j)
    for (std::size_t lane = 0; lane < vals.size(); ++lane)
      out[lane] |= ((v[gc.sinks()[j].net] >> lane) & 1) << j;
  return out;
}

void check_equivalent(const Spec& sp, Decomp d) {
  GateCircuit gc = build_template(sp.kind, sp.params, sp.in, sp.out, d);
  unsigned total = 0;
  for (unsigned w : sp.in) total += w;
  std::mt19937_64 rng(total * 31 + static_cast<unsigned>(sp.kind));
  const bool exhaustive = total <= 16;
  const std::uint64_t count = exhaustive ? (std::uint64_t{1} << total) : 4096;
  std::vector<std::vector<std::uint64_t>> batch;
  auto flush = [&] {
    auto got = eval_template(gc, sp, batch);
    for (std::size_t lane = 0; lane < batch.size(); ++lane) {
      auto want = eval_primitive(sp.kind, sp.params, sp.in, sp.out, batch[lane]);
      if (got[lane] != want) {
        FAIL_CHECK(kind_name(sp.kind) << " decomp " << decomp_name(d) << " mismatch: got " << got[lane]
                                      << " want " << want);
        return false;
      }
    }
    batch.clear();
    return true;
  };
  for (std::uint64_t x = 0; x < count; ++x) {
    std::vector<std::uint64_t> pins;
    std::uint64_t r = exhaustive ? x : 0;
    for (unsigned w : sp.in) {
      if (exhaustive) {
        pins.push_back(r & width_mask(w));
        r >>= w;
      } else {
        pins.push_back(rng() & width_mask(w));
      }
    }
    batch.push_back(std::move(pins));
    if (batch.size() == 64 && !flush()) return;
  }
  if (!batch.empty()) flush();
}

std::vector<SimpleKind> kind_sequence(const GateCircuit& g) {
  std::vector<SimpleKind> out;
  for (const auto& gt : g.gates()) out.push_back(gt.kind);
  return out;
}

}  // namespace

TEST_CASE("templates match primitive semantics") {
  for (const auto& sp : specs()) {
    CAPTURE(kind_name(sp.kind));
    CAPTURE(sp.out);
    check_equivalent(sp, Decomp::A);
    check_equivalent(sp, Decomp::B);
  }
}

TEST_CASE("template shapes") {
  auto x1 = build_template(GateKind::Xor, {}, {1, 1}, 1, Decomp::A);
  CHECK(x1.gates().size() == 1);
  CHECK(x1.gate_count(SimpleKind::Xor2) == 1);

  auto add2 = build_template(GateKind::Add, {}, {2, 2}, 2, Decomp::A);
  CHECK(add2.gate_count(SimpleKind::Xor2) == 4);
  CHECK(add2.gate_count(SimpleKind::And2) == 4);
  CHECK(add2.gate_count(SimpleKind::Or2) == 2);
  CHECK(add2.gates().size() == 10);
}

TEST_CASE("A and B are structurally distinct") {
  GateParams cp;
  cp.arms = {0, 2, 3};
  std::vector<Spec> s = {{GateKind::Add, {}, {4, 4}, 4},
                         {GateKind::Mul, {}, {4, 4}, 4},
                         {GateKind::Eq, {}, {4, 4}, 1},
                         {GateKind::Eq, {}, {1, 1}, 1},
                         {GateKind::Case, cp, {2, 2, 2, 2, 2}, 2}};
  for (const auto& sp : s) {
    CAPTURE(kind_name(sp.kind));
    auto a = build_template(sp.kind, sp.params, sp.in, sp.out, Decomp::A);
    auto b = build_template(sp.kind, sp.params, sp.in, sp.out, Decomp::B);
    CHECK(kind_sequence(a) != kind_sequence(b));
  }
}

TEST_CASE("expand keeps ports and registers") {
  auto c = parse_circuit(
      "input a:3\ninput ld\noutput y:3\noutput z\nwire t:3\n"
      "reg r:3 init=5 next=t load=ld loaddata=a\n"
      "gate g1 kind=ADD in=(a,r) out=(t)\n"
      "gate g2 kind=XOR in=(t,a) out=(y)\n"
      "gate g3 kind=EQ in=(t,r) out=(z)\n");
  for (Decomp d : {Decomp::A, Decomp::B}) {
    auto g = expand(c, d);
    CHECK(g.inputs().size() == 4);
    CHECK(g.regs().size() == 3);
    CHECK(g.sinks().size() == 3 + 1 + 3);
    CHECK(g.regs()[0].init == true);
    CHECK(g.regs()[1].init == false);
    for (const auto& gt : g.gates()) CHECK(gt.source_gate >= 0);
  }
  auto dup = expand(c, ExpandOptions{Decomp::A, true});
  // t feeds g2, g3 and the load mux, so g1 is emitted three times
  auto single = expand(c, Decomp::A);
  auto add_gates = [&](const GateCircuit& g) {
    std::size_t n = 0;
    for (const auto& gt : g.gates()) n += gt.source_gate == static_cast<std::int32_t>(*c.find_gate("g1"));
    return n;
  };
  CHECK(add_gates(dup) == 3 * add_gates(single));
}

#include "helpers.hpp"

TEST_CASE("corpus expansions are equivalent to the RTL") {
  for (const auto& name : testutil::corpus_names()) {
    auto c = testutil::load(name);
    const auto ins = c.input_ports();
    const unsigned bits = c.controllable_bits();
    const bool exhaustive = bits <= 16;
    const std::uint64_t frames = exhaustive ? (std::uint64_t{1} << bits) : 1024;
    for (auto opt : {ExpandOptions{Decomp::A, false}, ExpandOptions{Decomp::B, false},
                     ExpandOptions{Decomp::A, true}, ExpandOptions{Decomp::B, true}}) {
      CAPTURE(name);
      CAPTURE(decomp_name(opt.decomp));
      CAPTURE(opt.duplicate_shared);
      auto g = expand(c, opt);
      Evaluator ev(c);
      std::mt19937_64 rng(99);
      std::vector<std::uint64_t> v(g.nets().size());
      std::size_t bad = 0;
      for (std::uint64_t base = 0; base < frames; base += 64) {
        std::vector<std::vector<std::uint64_t>> in_vals, reg_vals;
        std::fill(v.begin(), v.end(), 0);
        for (unsigned lane = 0; lane < 64 && base + lane < frames; ++lane) {
          std::uint64_t x = exhaustive ? base + lane : rng();
          std::vector<std::uint64_t> iv, rv;
          for (auto p : ins) {
            unsigned w = c.width(c.ports()[p].net);
            iv.push_back(x & width_mask(w));
            x = w >= 64 ? rng() : x >> w;
            const auto& pb = g.input_ports().at(c.ports()[p].name);
            for (unsigned b = 0; b < w; ++b) v[pb[b]] |= ((iv.back() >> b) & 1) << lane;
          }
          for (const auto& r : c.registers()) {
            unsigned w = c.width(r.q);
            rv.push_back(x & width_mask(w));
            x >>= w;
          }
          in_vals.push_back(iv);
          reg_vals.push_back(rv);
        }
        for (const auto& rb : g.regs()) {
          auto r = *c.find_register(rb.name);
          for (unsigned lane = 0; lane < reg_vals.size(); ++lane) v[rb.q] |= ((reg_vals[lane][r] >> rb.bit) & 1) << lane;
        }
        g.eval(v);
        for (unsigned lane = 0; lane < in_vals.size(); ++lane) {
          ev.eval(in_vals[lane], reg_vals[lane]);
          auto outs = ev.outputs();
          auto next = ev.next_state();
          const auto ops = c.output_ports();
          for (std::size_t o = 0; o < ops.size(); ++o) {
            const auto& pb = g.output_ports().at(c.ports()[ops[o]].name);
            for (unsigned b = 0; b < pb.size(); ++b) bad += ((v[pb[b]] >> lane) & 1) != ((outs[o] >> b) & 1);
          }
          for (const auto& rb : g.regs()) {
            auto r = *c.find_register(rb.name);
            bad += ((v[g.sinks()[rb.sink].net] >> lane) & 1) != ((next[r] >> rb.bit) & 1);
          }
        }
      }
      CHECK(bad == 0);
    }
  }
}
