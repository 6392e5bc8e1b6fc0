#include "hypertest/gate_circuit.hpp"

#include <functional>
#include <queue>
#include <stdexcept>

namespace hypertest {

std::string_view simple_kind_name(SimpleKind k) {
  switch (k) {
    case SimpleKind::Not: return "NOT";
    case SimpleKind::And2: return "AND2";
    case SimpleKind::Or2: return "OR2";
    case SimpleKind::Xor2: return "XOR2";
    case SimpleKind::Mux2: return "MUX2";
  }
  return "?";
}

BitId GateCircuit::add_net(std::string name, BitSource src) {
  BitId id = static_cast<BitId>(nets_.size());
  nets_.push_back({std::move(name), src, 0});
  if (src == BitSource::Input) inputs_.push_back(id);
  return id;
}

BitId GateCircuit::tie(bool value, std::string name) {
  if (name.empty()) name = value ? "tie1" : "tie0";
  BitId t = add_net(std::move(name), value ? BitSource::Tie1 : BitSource::Tie0);
  ties_[value ? 1 : 0].push_back(t);
  return t;
}

BitId GateCircuit::add_gate(SimpleKind kind, std::array<BitId, 3> in, std::string out_name,
                            std::int32_t source_gate, std::uint32_t site, std::uint32_t copy) {
  SimpleGate g;
  g.kind = kind;
  g.in = in;
  for (unsigned p = g.arity(); p < 3; ++p) g.in[p] = in[0];
  for (unsigned p = 0; p < g.arity(); ++p)
    if (g.in[p] >= nets_.size()) throw std::logic_error("add_gate: undriven input");
  g.source_gate = source_gate;
  g.site = site;
  g.copy = copy;
  BitId out = add_net(std::move(out_name), BitSource::Gate);
  nets_[out].driver = static_cast<std::uint32_t>(gates_.size());
  g.out = out;
  gates_.push_back(g);
  return out;
}

std::uint32_t GateCircuit::add_sink(BitId net, SinkKind kind, std::string name) {
  sinks_.push_back({net, kind, std::move(name)});
  return static_cast<std::uint32_t>(sinks_.size() - 1);
}

void GateCircuit::set_port(const std::string& port, std::vector<BitId> bits, bool is_input) {
  (is_input ? in_ports_ : out_ports_)[port] = std::move(bits);
}

void GateCircuit::finalize() {
  uses_.assign(nets_.size(), {});
  for (std::uint32_t k = 0; k < gates_.size(); ++k)
    for (unsigned p = 0; p < gates_[k].arity(); ++p)
      uses_[gates_[k].in[p]].push_back({false, k, static_cast<std::uint8_t>(p)});
  for (std::uint32_t s = 0; s < sinks_.size(); ++s) uses_[sinks_[s].net].push_back({true, s, 0});
}

std::vector<BitId> GateCircuit::sources() const {
  std::vector<BitId> out = inputs_;
  for (const auto& r : regs_) out.push_back(r.q);
  return out;
}

std::size_t GateCircuit::gate_count(SimpleKind k) const {
  std::size_t n = 0;
  for (const auto& g : gates_) n += g.kind == k;
  return n;
}

void GateCircuit::set_ties(std::vector<std::uint64_t>& v) const {
  for (BitId t : ties_[0]) v[t] = 0;
  for (BitId t : ties_[1]) v[t] = ~std::uint64_t{0};
}

void GateCircuit::eval(std::vector<std::uint64_t>& v) const {
  set_ties(v);
  for (const auto& g : gates_) v[g.out] = eval_simple(g.kind, v[g.in[0]], v[g.in[1]], v[g.in[2]]);
}

std::vector<FaultLoc> fault_locations(const GateCircuit& g) {
  std::vector<FaultLoc> out;
  const auto& uses = g.uses();
  for (BitId n = 0; n < g.nets().size(); ++n) {
    out.push_back({n, -1});
    if (uses[n].size() > 1)
      for (std::int32_t u = 0; u < static_cast<std::int32_t>(uses[n].size()); ++u) out.push_back({n, u});
  }
  return out;
}

std::string loc_name(const GateCircuit& g, const FaultLoc& loc) {
  std::string s = g.nets()[loc.net].name;
  if (loc.is_stem()) return s;
  const Use& u = g.uses()[loc.net][static_cast<std::size_t>(loc.use)];
  if (u.is_sink) return s + "->" + g.sinks()[u.index].name;
  return s + "->" + g.nets()[g.gates()[u.index].out].name + "." + std::to_string(u.pin);
}

// ---------------------------------------------------------------------------

FaultEvaluator::FaultEvaluator(const GateCircuit& g)
    : g_(g),
      faulty_(g.nets().size(), 0),
      stamp_(g.nets().size(), 0),
      gate_stamp_(g.gates().size(), 0),
      pin_stamp_(g.nets().size(), 0) {}

void FaultEvaluator::set(BitId n, std::uint64_t v) {
  faulty_[n] = v;
  stamp_[n] = epoch_;
}

std::uint64_t FaultEvaluator::sink_value(std::uint32_t s) const {
  if (static_cast<std::int32_t>(s) == branch_sink_) return branch_sink_value_;
  return value(g_.sinks()[s].net);
}

std::uint64_t FaultEvaluator::detect_mask() const {
  std::uint64_t m = 0;
  for (auto s : touched_sinks_) m |= sink_diff(s);
  return m;
}

void FaultEvaluator::propagate_from(const std::vector<std::uint32_t>& seeds, std::int32_t skip_gate) {
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> pq;
  for (auto k : seeds)
    if (static_cast<std::int32_t>(k) != skip_gate && gate_stamp_[k] != epoch_) {
      gate_stamp_[k] = epoch_;
      pq.push(k);
    }
  const auto& gates = g_.gates();
  const auto& uses = g_.uses();
  while (!pq.empty()) {
    std::uint32_t k = pq.top();
    pq.pop();
    const auto& gt = gates[k];
    if (pin_stamp_[gt.out] == epoch_) continue;
    std::uint64_t nv = eval_simple(gt.kind, value(gt.in[0]), value(gt.in[1]), value(gt.in[2]));
    if (nv == value(gt.out)) continue;
    set(gt.out, nv);
    for (const auto& u : uses[gt.out]) {
      if (u.is_sink) {
        touched_sinks_.push_back(u.index);
      } else if (gate_stamp_[u.index] != epoch_) {
        gate_stamp_[u.index] = epoch_;
        pq.push(u.index);
      }
    }
  }
}

void FaultEvaluator::run_forced(const std::vector<std::uint64_t>& good, BitId net, std::uint64_t forced) {
  good_ = &good;
  ++epoch_;
  touched_sinks_.clear();
  branch_sink_ = -1;
  set(net, forced);
  std::vector<std::uint32_t> seeds;
  for (const auto& u : g_.uses()[net]) {
    if (u.is_sink) touched_sinks_.push_back(u.index);
    else seeds.push_back(u.index);
  }
  propagate_from(seeds, -1);
}

void FaultEvaluator::run_forced(const std::vector<std::uint64_t>& good,
                                const std::vector<std::pair<BitId, std::uint64_t>>& forced) {
  good_ = &good;
  ++epoch_;
  touched_sinks_.clear();
  branch_sink_ = -1;
  std::vector<std::uint32_t> seeds;
  for (const auto& [net, v] : forced) {
    set(net, v);
    pin_stamp_[net] = epoch_;
    for (const auto& u : g_.uses()[net]) {
      if (u.is_sink) touched_sinks_.push_back(u.index);
      else seeds.push_back(u.index);
    }
  }
  propagate_from(seeds, -1);
}

void FaultEvaluator::run(const std::vector<std::uint64_t>& good, const StuckFault& f) {
  const std::uint64_t forced = f.value ? ~std::uint64_t{0} : 0;
  if (f.loc.is_stem()) return run_forced(good, f.loc.net, forced);
  good_ = &good;
  ++epoch_;
  touched_sinks_.clear();
  branch_sink_ = -1;
  const Use& u = g_.uses()[f.loc.net][static_cast<std::size_t>(f.loc.use)];
  if (u.is_sink) {
    branch_sink_ = static_cast<std::int32_t>(u.index);
    branch_sink_value_ = forced;
    touched_sinks_.push_back(u.index);
    return;
  }
  const auto& gt = g_.gates()[u.index];
  std::uint64_t in[3] = {value(gt.in[0]), value(gt.in[1]), value(gt.in[2])};
  in[u.pin] = forced;
  std::uint64_t nv = eval_simple(gt.kind, in[0], in[1], in[2]);
  gate_stamp_[u.index] = epoch_;
  if (nv == value(gt.out)) return;
  set(gt.out, nv);
  std::vector<std::uint32_t> seeds;
  for (const auto& w : g_.uses()[gt.out]) {
    if (w.is_sink) touched_sinks_.push_back(w.index);
    else seeds.push_back(w.index);
  }
  propagate_from(seeds, static_cast<std::int32_t>(u.index));
}

}  // namespace hypertest
