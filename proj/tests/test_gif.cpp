#include <doctest.h>

#include <map>
#include <random>
#include <set>
#include <tuple>

#include "helpers.hpp"
#include "hypertest/decompose.hpp"
#include "hypertest/gentest.hpp"
#include "hypertest/gif.hpp"
#include "hypertest/saf.hpp"

using namespace hypertest;

namespace {

Circuit one_gate(const std::string& kind, const std::vector<std::string>& ins) {
  std::string t = "circuit g1\n";
  std::string pins;
  for (const auto& i : ins) {
    t += "input " + i + "\n";
    pins += (pins.empty() ? "" : ",") + i;
  }
  t += "output y\ngate g kind=" + kind + " in=(" + pins + ") out=(y) loc=top\nend\n";
  return parse_circuit(t);
}

GifOptions opts(GifMode mode, GifModel model) {
  GifOptions o;
  o.mode = mode;
  o.model = model;
  return o;
}

VectorProgram rows(const std::string& text) { return parse_vectors(text, "t"); }

Bitset simulate_cov(const Circuit& c, const GifUniverse& u, const VectorProgram& p) {
  return gif_fault_sim(c, {p}, u).at(0).covered;
}

// Scalar reference for GIF detection, written against the definitions rather
// than the simulator's data structures.
class GifOracle {
 public:
  GifOracle(const Circuit& c, const GifUniverse& u) : c_(c), u_(u) {
    gc_ = expand(c, ExpandOptions{Decomp::A, false}, &bits_);
    for (GateId g = 0; g < c.gates().size(); ++g) tmpl_.push_back(build_template(c, g, Decomp::A));
  }

  void apply(const std::vector<bool>& frame, Bitset& covered) const {
    const auto good = testutil::naive_nets(gc_, frame);
    const auto good_sinks = testutil::naive_sinks(gc_, frame);
    for (std::size_t k = 0; k < u_.size(); ++k) {
      if (covered.test(k)) continue;
      const GifItem& it = u_.items[k];
      const GifCore& core = u_.cores[it.core];
      const GateInstance& gate = c_.gates()[core.gate];
      const GateCircuit& t = tmpl_[core.gate];
      std::vector<bool> tin;
      for (NetId n : gate.inputs)
        for (BitId b : bits_[n]) tin.push_back(good[b]);
      const auto tnets = testutil::naive_nets(t, tin);
      const auto tgood = testutil::naive_sinks(t, tin);
      std::vector<bool> flip(tgood.size(), false);
      switch (u_.options.mode) {
        case GifMode::Site: {
          const auto bad = testutil::naive_sinks(t, tin, &core.fault);
          for (std::size_t b = 0; b < flip.size(); ++b) flip[b] = bad[b] != tgood[b];
          break;
        }
        case GifMode::Kmap: {
          std::uint64_t m = 0;
          for (std::size_t b = 0; b < tin.size(); ++b) m |= std::uint64_t{tin[b]} << b;
          flip[core.gos[0]] = m == core.minterm;
          break;
        }
        case GifMode::Path: {
          bool on = true;
          for (const auto& [g, pin] : core.path) {
            const SimpleGate& sg = t.gates()[g];
            auto v = [&](unsigned p) { return static_cast<bool>(tnets[sg.in[p]]); };
            if (sg.kind == SimpleKind::And2) on = on && v(1 - pin);
            if (sg.kind == SimpleKind::Or2) on = on && !v(1 - pin);
            if (sg.kind == SimpleKind::Mux2)
              on = on && (pin == 0 ? v(1) != v(2) : pin == 1 ? !v(0) : v(0));
          }
          flip[core.gos[0]] = on;
          break;
        }
      }
      if (!flip[it.go]) continue;
      const Bits& out = bits_[gate.outputs[0]];
      if (it.j < 0) {
        if (u_.options.mode == GifMode::Path && good[out[it.go]] != it.alpha) continue;
        covered.set(k);
        continue;
      }
      std::map<BitId, bool> forced;
      for (std::size_t b = 0; b < flip.size(); ++b)
        if (flip[b]) forced[out[b]] = !good[out[b]];
      const auto bad_sinks = testutil::naive_sinks_forced(gc_, frame, forced);
      const auto j = static_cast<std::size_t>(it.j);
      if (bad_sinks[j] != good_sinks[j] && good_sinks[j] == it.alpha) covered.set(k);
    }
  }

 private:
  const Circuit& c_;
  const GifUniverse& u_;
  GateCircuit gc_;
  std::vector<Bits> bits_;
  std::vector<GateCircuit> tmpl_;
};

}  // namespace

TEST_CASE("GIF universe sizes") {
  SUBCASE("XOR2 site GO has 6 items") {
    Circuit c = one_gate("XOR", {"a", "b"});
    CHECK(enumerate_gifs(c, opts(GifMode::Site, GifModel::GO)).size() == 6);
  }
  SUBCASE("AND2 site GO has 4 items") {
    Circuit c = one_gate("AND", {"a", "b"});
    CHECK(enumerate_gifs(c, opts(GifMode::Site, GifModel::GO)).size() == 4);
  }
  SUBCASE("MUX2 kmap GO has one item per minterm") {
    Circuit c = one_gate("MUX2", {"s", "a", "b"});
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Kmap, GifModel::GO));
    CHECK(u.size() == 8);
    std::size_t ones = 0;
    for (const auto& it : u.items) ones += it.alpha;
    CHECK(ones == 4);
  }
  SUBCASE("PO items pair each GO with both values of a reachable sink") {
    Circuit c = one_gate("AND", {"a", "b"});
    GifUniverse go = enumerate_gifs(c, opts(GifMode::Site, GifModel::GO));
    GifUniverse po = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
    CHECK(po.size() == 2 * go.size());
  }
  SUBCASE("wiring gates carry no items") {
    Circuit c = parse_circuit(
        "circuit w\ninput a:4\noutput y:2\ngate s kind=SLICE lo=1 in=(a) out=(y) loc=top\nend\n");
    CHECK(enumerate_gifs(c, opts(GifMode::Site, GifModel::PO)).size() == 0);
  }
  SUBCASE("item strings are canonical") {
    Circuit c = one_gate("AND", {"a", "b"});
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
    std::set<std::string> seen;
    for (std::size_t k = 0; k < u.size(); ++k) {
      CHECK(u.item_string(k).starts_with("gif g gi="));
      CHECK(u.item_string(k).find(" j=y[0] a=") != std::string::npos);
      seen.insert(u.item_string(k));
    }
    CHECK(seen.size() == u.size());
  }
}

TEST_CASE("GIF universe limits") {
  Circuit c = testutil::load("alu8");
  GifOptions o = opts(GifMode::Path, GifModel::PO);
  o.path_cap = 8;
  CHECK_THROWS_AS(enumerate_gifs(c, o), std::runtime_error);
  CHECK_THROWS_AS(enumerate_gifs(c, opts(GifMode::Kmap, GifModel::GO)), std::runtime_error);
  CHECK_NOTHROW(enumerate_gifs(testutil::load("counter"), opts(GifMode::Kmap, GifModel::PO)));
  CHECK_THROWS_AS(enumerate_gifs(testutil::load("decoder"), opts(GifMode::Kmap, GifModel::PO)), std::runtime_error);
}

TEST_CASE("GIF fault simulation basics") {
  SUBCASE("empty program covers nothing") {
    Circuit c = one_gate("XOR", {"a", "b"});
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::GO));
    CHECK(simulate_cov(c, u, rows("")).none());
  }
  SUBCASE("NOT driven to 0 then 1 is GO-complete") {
    Circuit c = one_gate("NOT", {"a"});
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::GO));
    CHECK(u.size() > 0);
    CHECK(simulate_cov(c, u, rows("set a=0\nset a=1\n")).all());
    CHECK(!simulate_cov(c, u, rows("set a=0\n")).all());
  }
  SUBCASE("an input masked by a constant is uncoverable") {
    Circuit c = parse_circuit(
        "circuit m\ninput a\noutput y\nwire z\ngate k kind=CONST value=0 out=(z) loc=top\n"
        "gate g kind=AND in=(a,z) out=(y) loc=top\nend\n");
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
    GifClassification cls = classify_coverable(c, u);
    CHECK(cls.count(Coverability::Uncoverable) >= 1);
    CHECK(cls.count(Coverability::Coverable) >= 1);
    GateCircuit t = build_template(c, *c.find_gate("g"), Decomp::A);
    std::size_t masked = 0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      const StuckFault& f = u.core_of(k).fault;
      if (u.gates[u.core_of(k).gate].id == "g" && f.loc.net == t.inputs()[0] && f.value) {
        CHECK(cls.status[k] == Coverability::Uncoverable);
        ++masked;
      }
    }
    CHECK(masked > 0);
  }
  SUBCASE("hash mismatch is rejected") {
    Circuit c = one_gate("AND", {"a", "b"});
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::GO));
    Circuit other = one_gate("OR", {"a", "b"});
    CHECK_THROWS_AS(GifSimulator(other, u), std::invalid_argument);
    CoverageSet cs{"deadbeef", "t", 0, Bitset(u.size())};
    CHECK_THROWS_AS(uncovered(u, cs), std::invalid_argument);
  }
}

TEST_CASE("GIF simulation agrees with a scalar reference") {
  const std::pair<const char*, GifMode> cases[] = {
      {"counter", GifMode::Site}, {"decoder", GifMode::Site}, {"dup2po", GifMode::Site},
      {"loopback", GifMode::Site}, {"counter", GifMode::Path}, {"dup2po", GifMode::Path},
      {"counter", GifMode::Kmap},  {"dup2po", GifMode::Kmap}};
  for (const auto& [cname, mode] : cases)
    for (GifModel model : {GifModel::GO, GifModel::PO}) {
      const std::string name = cname;
      CAPTURE(name);
      CAPTURE(gif_mode_name(mode));
      CAPTURE(gif_model_name(model));
      Circuit c = testutil::load(name);
      GifUniverse u = enumerate_gifs(c, opts(mode, model));
      VectorProgram p = testutil::random_program(c, 20, 11);
      Bitset got = simulate_cov(c, u, p);
      GifOracle oracle(c, u);
      FrameSet frames = rtl_frames(c, p);
      Bitset want(u.size());
      for (std::size_t t = 0; t < frames.size(); ++t) oracle.apply(frames.frame(t), want);
      CHECK(got == want);
      CHECK(got.count() > 0);
    }
}

TEST_CASE("GIF coverage properties") {
  for (const auto& name : testutil::corpus_names()) {
    Circuit c = testutil::load(name);
    CAPTURE(name);
    GifUniverse go = enumerate_gifs(c, opts(GifMode::Site, GifModel::GO));
    GifUniverse po = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
    VectorProgram p = testutil::random_program(c, 40, 5);

    SUBCASE("monotone in the program") {
      VectorProgram head = p;
      head.cycles.resize(17);
      CHECK(simulate_cov(c, po, head).subset_of(simulate_cov(c, po, p)));
      CHECK(simulate_cov(c, go, head).subset_of(simulate_cov(c, go, p)));
    }
    SUBCASE("PO coverage implies GO coverage") {
      REQUIRE(go.cores.size() == po.cores.size());
      Bitset cgo = simulate_cov(c, go, p);
      Bitset cpo = simulate_cov(c, po, p);
      std::set<std::pair<std::uint32_t, std::uint32_t>> go_hit;
      for (std::size_t k = 0; k < go.size(); ++k)
        if (cgo.test(k)) go_hit.emplace(go.items[k].core, go.items[k].go);
      for (std::size_t k = 0; k < po.size(); ++k)
        if (cpo.test(k)) CHECK(go_hit.count({po.items[k].core, po.items[k].go}) == 1);
    }
    SUBCASE("deterministic") {
      GifUniverse again = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
      CHECK(again.hash == po.hash);
      REQUIRE(again.size() == po.size());
      for (std::size_t k = 0; k < po.size(); ++k) CHECK(again.item_string(k) == po.item_string(k));
      CHECK(simulate_cov(c, po, p) == simulate_cov(c, again, p));
    }
  }
}

TEST_CASE("kmap GO coverage is complete under exhaustive inputs") {
  for (const char* kind : {"ADD", "XOR", "LT", "MUX2"}) {
    CAPTURE(kind);
    const bool mux = std::string(kind) == "MUX2";
    std::string t = std::string("circuit k\ninput s\ninput a:2\ninput b:2\noutput y:") + (std::string(kind) == "LT" ? "1" : "2") +
                    "\ngate g kind=" + kind + " in=(" + (mux ? "s,a,b" : "a,b") + ") out=(y) loc=top\nend\n";
    Circuit c = parse_circuit(t);
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Kmap, GifModel::GO));
    VectorProgram p;
    for (unsigned m = 0; m < 32; ++m) {
      VectorCycle cy;
      cy.set = {{"s", m & 1}, {"a", (m >> 1) & 3}, {"b", (m >> 3) & 3}};
      p.cycles.push_back(cy);
    }
    CHECK(simulate_cov(c, u, p).all());
  }
}

TEST_CASE("coverability classification") {
  SUBCASE("witnesses cover their items") {
    Circuit c = testutil::load("counter");
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
    GifClassification cls = classify_coverable(c, u);
    GifSimulator sim(c, u);
    const unsigned n = c.controllable_bits();
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (cls.status[k] != Coverability::Coverable) {
        CHECK(cls.witness[k] == -1);
        continue;
      }
      FrameSet f(n);
      f.push(assignment_bits(static_cast<std::uint64_t>(cls.witness[k]), n));
      Bitset cov(u.size());
      sim.run(f, cov);
      CHECK(cov.test(k));
    }
  }
  SUBCASE("uncoverable items stay uncovered") {
    Circuit c = testutil::load("decoder");
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
    GifClassification cls = classify_coverable(c, u);
    Bitset cov = simulate_cov(c, u, testutil::random_program(c, 200, 9));
    for (std::size_t k = 0; k < u.size(); ++k)
      if (cls.status[k] == Coverability::Uncoverable) CHECK(!cov.test(k));
  }
  SUBCASE("too many bits is unclassified") {
    Circuit c = testutil::load("counter");
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::GO));
    CHECK(classify_coverable(c, u, 3).count(Coverability::Unclassified) == u.size());
  }
}

TEST_CASE("alu8 GIF universe") {
  Circuit c = testutil::load("alu8");
  GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
  GifClassification cls = classify_coverable(c, u);
  CHECK(u.size() == 6800);
  CHECK(cls.count(Coverability::Coverable) == 4582);
  CHECK(cls.count(Coverability::Uncoverable) == 2218);
}

TEST_CASE("test generation reaches every coverable PO item") {
  for (const char* name : {"counter", "loopback", "dup2po"}) {
    CAPTURE(name);
    Circuit c = testutil::load(name);
    GifUniverse u = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
    GifClassification cls = classify_coverable(c, u);
    GenResult g = generate_tests(c, u, cls);
    CHECK(g.unreached.empty());
    CHECK(coverable_coverage(cls, g.covered).complete());
    CHECK(simulate_cov(c, u, g.program) == g.covered);
    Trace t = simulate(c, g.program);
    CHECK(t.mismatches.empty());
  }
}

TEST_CASE("duplicated cone: GO-complete is not enough") {
  Circuit c = testutil::load("dup2po");
  VectorProgram go_set = load_vectors(testutil::corpus("tests/dup2po/go_complete.vec"));
  GifUniverse go = enumerate_gifs(c, opts(GifMode::Site, GifModel::GO));
  GifUniverse po = enumerate_gifs(c, opts(GifMode::Site, GifModel::PO));
  GifClassification go_cls = classify_coverable(c, go);
  GifClassification po_cls = classify_coverable(c, po);

  CHECK(coverable_coverage(go_cls, simulate_cov(c, go, go_set)).complete());
  Bitset po_cov = simulate_cov(c, po, go_set);
  CoverableCoverage pc = coverable_coverage(po_cls, po_cov);
  CHECK(pc.covered < pc.coverable);
  for (const auto& item : uncovered(po, po_cov)) {
    if (po_cls.status[item.index] != Coverability::Coverable) continue;
    CAPTURE(item.text);
    CHECK(item.path == "dup.core");
    CHECK(item.text.find(" j=y2[") != std::string::npos);
  }

  GateCircuit dup = expand(c, ExpandOptions{Decomp::A, true});
  SafCoverage miss = saf_fault_sim(dup, {go_set});
  CHECK(miss.missed().size() >= 1);

  GenResult gen = generate_tests(c, po, po_cls);
  REQUIRE(coverable_coverage(po_cls, gen.covered).complete());
  for (Decomp d : {Decomp::A, Decomp::B}) {
    CHECK(saf_fault_sim(expand(c, ExpandOptions{d, true}), {gen.program}).missed().empty());
    CHECK(saf_fault_sim(expand(c, ExpandOptions{d, false}), {gen.program}).missed().empty());
  }
}
