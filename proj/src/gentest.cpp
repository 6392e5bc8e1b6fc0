#include "hypertest/gentest.hpp"

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>

namespace hypertest {

namespace {

using Values = std::vector<std::uint64_t>;

struct Decoded {
  Values inputs, state;
};

Decoded decode(const Circuit& c, std::uint64_t a) {
  Decoded d;
  unsigned shift = 0;
  for (std::uint32_t p : c.input_ports()) {
    unsigned w = c.width(c.ports()[p].net);
    d.inputs.push_back((a >> shift) & width_mask(w));
    shift += w;
  }
  for (const auto& r : c.registers()) {
    unsigned w = c.width(r.q);
    d.state.push_back((a >> shift) & width_mask(w));
    shift += w;
  }
  return d;
}

Values random_inputs(const Circuit& c, std::mt19937_64& rng) {
  Values v;
  for (std::uint32_t p : c.input_ports()) v.push_back(rng() & width_mask(c.width(c.ports()[p].net)));
  return v;
}

std::vector<bool> frame_bits(const Circuit& c, const Values& inputs, const Values& state) {
  std::vector<bool> bits;
  const auto ins = c.input_ports();
  for (std::size_t k = 0; k < ins.size(); ++k)
    for (unsigned b = 0; b < c.width(c.ports()[ins[k]].net); ++b) bits.push_back((inputs[k] >> b) & 1);
  for (std::size_t r = 0; r < c.registers().size(); ++r)
    for (unsigned b = 0; b < c.width(c.registers()[r].q); ++b) bits.push_back((state[r] >> b) & 1);
  return bits;
}

// Shortest input sequence from `from` to `to` over the alphabet.
std::optional<std::vector<Values>> reach(const Circuit& c, const Values& from, const Values& to,
                                         const std::vector<Values>& alphabet, std::size_t max_states) {
  if (from == to) return std::vector<Values>{};
  struct Node {
    Values parent;
    std::size_t input;
  };
  std::map<Values, Node> seen;
  seen.emplace(from, Node{{}, 0});
  std::deque<Values> queue{from};
  while (!queue.empty() && seen.size() < max_states) {
    Values s = std::move(queue.front());
    queue.pop_front();
    for (std::size_t k = 0; k < alphabet.size(); ++k) {
      Values n = step_macro_cycle(c, s, alphabet[k]).state;
      if (!seen.emplace(n, Node{s, k}).second) continue;
      if (n == to) {
        std::vector<Values> path;
        for (Values cur = n; cur != from;) {
          const Node& nd = seen.at(cur);
          path.push_back(alphabet[nd.input]);
          cur = nd.parent;
        }
        return std::vector<Values>(path.rbegin(), path.rend());
      }
      queue.push_back(std::move(n));
    }
  }
  return std::nullopt;
}

}  // namespace

GenResult generate_tests(const Circuit& c, const GifUniverse& u, const GifClassification& cls,
                         const GenOptions& opt) {
  if (cls.status.size() != u.size()) throw std::invalid_argument("classification does not match the universe");
  GifSimulator sim(c, u);
  GenResult res;
  res.program.name = opt.name;
  res.covered = Bitset(u.size());
  std::mt19937_64 rng(opt.seed);

  const auto ins = c.input_ports();
  const auto outs = c.output_ports();
  Values state = initial_state(c);
  FrameSet pending(c.controllable_bits());

  auto append = [&](const Values& inputs) {
    pending.push(frame_bits(c, inputs, state));
    StepResult r = step_macro_cycle(c, state, inputs);
    VectorCycle cyc;
    for (std::size_t k = 0; k < ins.size(); ++k) cyc.set.emplace_back(c.ports()[ins[k]].name, inputs[k]);
    for (std::size_t k = 0; k < outs.size(); ++k) cyc.expect.emplace_back(c.ports()[outs[k]].name, r.outputs[k]);
    res.program.cycles.push_back(std::move(cyc));
    state = std::move(r.state);
  };
  auto flush = [&] {
    sim.run(pending, res.covered);
    pending = FrameSet(c.controllable_bits());
  };

  for (std::size_t k = 0; k < opt.random_cycles; ++k) append(random_inputs(c, rng));
  flush();

  unsigned in_bits = 0;
  for (std::uint32_t p : ins) in_bits += c.width(c.ports()[p].net);
  std::vector<Values> alphabet;
  if (in_bits <= 8) {
    for (std::uint64_t a = 0; a < (std::uint64_t{1} << in_bits); ++a) alphabet.push_back(decode(c, a).inputs);
  } else {
    alphabet.push_back(Values(ins.size(), 0));
    for (int k = 0; k < 127; ++k) alphabet.push_back(random_inputs(c, rng));
  }

  for (std::size_t k = 0; k < u.size(); ++k) {
    if (res.covered.test(k) || cls.status[k] != Coverability::Coverable) continue;
    if (res.program.cycles.size() >= opt.max_cycles) {
      res.unreached.push_back(k);
      continue;
    }
    Decoded w = decode(c, static_cast<std::uint64_t>(cls.witness[k]));
    std::vector<Values> local = alphabet;
    local.push_back(w.inputs);
    auto path = reach(c, state, w.state, local, opt.max_states);
    if (!path) {
      res.unreached.push_back(k);
      continue;
    }
    for (const auto& v : *path) append(v);
    append(w.inputs);
    flush();
    if (!res.covered.test(k)) throw std::logic_error("witness frame did not cover its item");
  }
  return res;
}

}  // namespace hypertest
