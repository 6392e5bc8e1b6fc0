#include "helpers.hpp"

#include <random>

namespace testutil {

hypertest::VectorProgram random_program(const hypertest::Circuit& c, std::size_t cycles, std::uint64_t seed,
                                        const std::string& name) {
  std::mt19937_64 rng(seed);
  hypertest::VectorProgram p;
  p.name = name;
  for (std::size_t k = 0; k < cycles; ++k) {
    hypertest::VectorCycle cy;
    for (auto i : c.input_ports()) {
      const auto& port = c.ports()[i];
      cy.set.emplace_back(port.name, rng() & hypertest::width_mask(c.width(port.net)));
    }
    p.cycles.push_back(std::move(cy));
  }
  return p;
}

namespace {

using hypertest::BitId;
using hypertest::GateCircuit;
using hypertest::StuckFault;

struct Naive {
  std::vector<bool> nets, sinks;
};

Naive naive(const GateCircuit& g, const std::vector<bool>& sources, const StuckFault* f,
            const std::map<BitId, bool>& forced = {}) {
  Naive r;
  r.nets.assign(g.nets().size(), false);
  auto src = g.sources();
  for (std::size_t k = 0; k < src.size(); ++k) r.nets[src[k]] = sources.at(k);
  for (BitId n = 0; n < g.nets().size(); ++n)
    if (g.nets()[n].source == hypertest::BitSource::Tie1) r.nets[n] = true;
  auto stem = [&](BitId n) {
    if (auto it = forced.find(n); it != forced.end()) r.nets[n] = it->second;
    if (f && f->loc.is_stem() && f->loc.net == n) r.nets[n] = f->value;
  };
  for (BitId n = 0; n < g.nets().size(); ++n)
    if (g.nets()[n].source != hypertest::BitSource::Gate) stem(n);
  auto read = [&](BitId n, bool is_sink, std::uint32_t index, std::uint8_t pin) {
    if (f && !f->loc.is_stem() && f->loc.net == n) {
      const auto& u = g.uses()[n][static_cast<std::size_t>(f->loc.use)];
      if (u.is_sink == is_sink && u.index == index && u.pin == pin) return f->value;
    }
    return static_cast<bool>(r.nets[n]);
  };
  for (std::uint32_t k = 0; k < g.gates().size(); ++k) {
    const auto& gt = g.gates()[k];
    bool v[3] = {};
    for (unsigned p = 0; p < gt.arity(); ++p) v[p] = read(gt.in[p], false, k, static_cast<std::uint8_t>(p));
    bool out = false;
    switch (gt.kind) {
      case hypertest::SimpleKind::Not: out = !v[0]; break;
      case hypertest::SimpleKind::And2: out = v[0] && v[1]; break;
      case hypertest::SimpleKind::Or2: out = v[0] || v[1]; break;
      case hypertest::SimpleKind::Xor2: out = v[0] != v[1]; break;
      case hypertest::SimpleKind::Mux2: out = v[0] ? v[2] : v[1]; break;
    }
    r.nets[gt.out] = out;
    stem(gt.out);
  }
  for (std::uint32_t s = 0; s < g.sinks().size(); ++s) r.sinks.push_back(read(g.sinks()[s].net, true, s, 0));
  return r;
}

}  // namespace

std::vector<bool> naive_nets(const GateCircuit& g, const std::vector<bool>& sources, const StuckFault* f) {
  return naive(g, sources, f).nets;
}

std::vector<bool> naive_sinks(const GateCircuit& g, const std::vector<bool>& sources, const StuckFault* f) {
  return naive(g, sources, f).sinks;
}

std::vector<bool> naive_sinks_forced(const GateCircuit& g, const std::vector<bool>& sources,
                                     const std::map<BitId, bool>& forced) {
  return naive(g, sources, nullptr, forced).sinks;
}

}  // namespace testutil
