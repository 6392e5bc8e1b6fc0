#include "hypertest/circuit.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

namespace hypertest {

namespace {

constexpr std::array<std::pair<GateKind, std::string_view>, 17> kKindNames{{
    {GateKind::Not, "NOT"},   {GateKind::And, "AND"},       {GateKind::Or, "OR"},
    {GateKind::Xor, "XOR"},   {GateKind::Mux2, "MUX2"},     {GateKind::Eq, "EQ"},
    {GateKind::Neq, "NEQ"},   {GateKind::Lt, "LT"},         {GateKind::Add, "ADD"},
    {GateKind::Sub, "SUB"},   {GateKind::Mul, "MUL"},       {GateKind::Shl, "SHL"},
    {GateKind::Shr, "SHR"},   {GateKind::Case, "CASE"},     {GateKind::Const, "CONST"},
    {GateKind::Slice, "SLICE"}, {GateKind::Concat, "CONCAT"},
}};

}  // namespace

std::string_view kind_name(GateKind k) {
  for (const auto& [kind, name] : kKindNames)
    if (kind == k) return name;
  return "?";
}

std::optional<GateKind> kind_from_name(std::string_view s) {
  for (const auto& [kind, name] : kKindNames)
    if (name == s) return kind;
  return std::nullopt;
}

std::string Diagnostic::str() const {
  std::ostringstream os;
  os << line << ":" << column << ": " << message;
  return os.str();
}

namespace {
std::string join_diags(const std::vector<Diagnostic>& diags) {
  std::string out;
  for (const auto& d : diags) {
    if (!out.empty()) out += "\n";
    out += d.str();
  }
  return out;
}
}  // namespace

DiagnosticError::DiagnosticError(std::vector<Diagnostic> diags)
    : std::runtime_error(join_diags(diags)), diags_(std::move(diags)) {}

// ---------------------------------------------------------------------------
// Circuit

std::optional<NetId> Circuit::find_net(std::string_view name) const {
  auto it = net_by_name_.find(name);
  if (it == net_by_name_.end()) return std::nullopt;
  return it->second;
}

std::optional<GateId> Circuit::find_gate(std::string_view id) const {
  auto it = gate_by_id_.find(id);
  if (it == gate_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> Circuit::find_register(std::string_view name) const {
  for (std::uint32_t i = 0; i < registers_.size(); ++i)
    if (registers_[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::uint32_t> Circuit::input_ports() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < ports_.size(); ++i)
    if (ports_[i].dir == PortDir::Input) out.push_back(i);
  return out;
}

std::vector<std::uint32_t> Circuit::output_ports() const {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < ports_.size(); ++i)
    if (ports_[i].dir == PortDir::Output) out.push_back(i);
  return out;
}

std::vector<std::vector<Driver>> Circuit::drivers() const {
  std::vector<std::vector<Driver>> out(nets_.size());
  for (std::uint32_t i = 0; i < ports_.size(); ++i)
    if (ports_[i].dir == PortDir::Input) out[ports_[i].net].push_back({DriverKind::Input, i});
  for (std::uint32_t i = 0; i < registers_.size(); ++i)
    out[registers_[i].q].push_back({DriverKind::Register, i});
  for (GateId g = 0; g < gates_.size(); ++g)
    for (NetId n : gates_[g].outputs) out[n].push_back({DriverKind::Gate, g});
  return out;
}

Driver Circuit::driver(NetId id) const {
  for (std::uint32_t i = 0; i < ports_.size(); ++i)
    if (ports_[i].dir == PortDir::Input && ports_[i].net == id) return {DriverKind::Input, i};
  for (std::uint32_t i = 0; i < registers_.size(); ++i)
    if (registers_[i].q == id) return {DriverKind::Register, i};
  for (GateId g = 0; g < gates_.size(); ++g)
    for (NetId n : gates_[g].outputs)
      if (n == id) return {DriverKind::Gate, g};
  return {};
}

unsigned Circuit::controllable_bits() const {
  unsigned bits = 0;
  for (const auto& p : ports_)
    if (p.dir == PortDir::Input) bits += nets_[p.net].width;
  for (const auto& r : registers_) bits += nets_[r.q].width;
  return bits;
}

std::string Circuit::hier_path(GateId g) const {
  const auto& loc = gates_.at(g).loc;
  return loc.empty() ? name_ : loc;
}

void Circuit::index() {
  net_by_name_.clear();
  gate_by_id_.clear();
  for (NetId i = 0; i < nets_.size(); ++i) net_by_name_.emplace(nets_[i].name, i);
  for (GateId i = 0; i < gates_.size(); ++i) gate_by_id_.emplace(gates_[i].id, i);
  readers_.assign(nets_.size(), {});
  for (GateId g = 0; g < gates_.size(); ++g) {
    for (NetId n : gates_[g].inputs) {
      if (n >= nets_.size()) continue;
      auto& r = readers_[n];
      if (r.empty() || r.back() != g) r.push_back(g);
    }
  }
}

// ---------------------------------------------------------------------------
// Builder

CircuitBuilder::CircuitBuilder(std::string name) { c_.name_ = std::move(name); }

NetId CircuitBuilder::add_net(std::string name, unsigned width, bool implicit) {
  NetId id = static_cast<NetId>(c_.nets_.size());
  c_.net_by_name_.emplace(name, id);
  c_.nets_.push_back({std::move(name), width, implicit});
  return id;
}

std::optional<NetId> CircuitBuilder::find_net(std::string_view name) const {
  return c_.find_net(name);
}

void CircuitBuilder::add_port(std::string name, PortDir dir, NetId net) {
  c_.ports_.push_back({std::move(name), dir, net});
}

GateId CircuitBuilder::add_gate(GateInstance g) {
  GateId id = static_cast<GateId>(c_.gates_.size());
  c_.gates_.push_back(std::move(g));
  return id;
}

void CircuitBuilder::add_register(StorageElement r) {
  r.d = r.next;
  if (r.load && r.loaddata) {
    unsigned w = c_.nets_.at(r.q).width;
    NetId d = add_net(r.name + "$d", w, /*implicit=*/true);
    GateInstance mux;
    mux.id = r.name + "$load";
    mux.kind = GateKind::Mux2;
    mux.inputs = {*r.load, r.next, *r.loaddata};
    mux.outputs = {d};
    mux.loc = r.loc;
    mux.implicit = true;
    mux.line = r.line;
    add_gate(std::move(mux));
    r.d = d;
  }
  c_.registers_.push_back(std::move(r));
}

Circuit CircuitBuilder::build() && {
  c_.index();
  return std::move(c_);
}

// ---------------------------------------------------------------------------
// Validation

namespace {

struct Checker {
  const Circuit& c;
  std::vector<Diagnostic>& out;

  void error(int line, std::string msg) { out.push_back({line, 1, std::move(msg)}); }

  bool net_ok(NetId n) const { return n < c.nets().size(); }

  void check_gate(const GateInstance& g) {
    auto kname = std::string(kind_name(g.kind));
    auto where = "gate " + g.id + " (" + kname + "): ";
    for (NetId n : g.inputs)
      if (!net_ok(n)) return error(g.line, where + "unknown input net");
    for (NetId n : g.outputs)
      if (!net_ok(n)) return error(g.line, where + "unknown output net");
    if (g.outputs.size() != 1) return error(g.line, where + "expects exactly one output");
    const unsigned wo = c.width(g.outputs[0]);
    std::vector<unsigned> wi;
    for (NetId n : g.inputs) wi.push_back(c.width(n));
    auto need_inputs = [&](std::size_t k) {
      if (g.inputs.size() != k) {
        error(g.line, where + "expects " + std::to_string(k) + " inputs, got " +
                          std::to_string(g.inputs.size()));
        return false;
      }
      return true;
    };
    auto mismatch = [&](const std::string& what) { error(g.line, where + "width mismatch: " + what); };
    switch (g.kind) {
      case GateKind::Not:
        if (need_inputs(1) && wi[0] != wo) mismatch("input and output widths differ");
        break;
      case GateKind::And:
      case GateKind::Or:
      case GateKind::Xor:
        if (g.inputs.size() < 2) return error(g.line, where + "expects at least 2 inputs");
        for (unsigned w : wi)
          if (w != wo) return mismatch("operands must match output width");
        break;
      case GateKind::Mux2:
        if (!need_inputs(3)) return;
        if (wi[0] != 1) mismatch("select must be 1 bit");
        if (wi[1] != wo || wi[2] != wo) mismatch("data inputs must match output width");
        break;
      case GateKind::Eq:
      case GateKind::Neq:
      case GateKind::Lt:
        if (!need_inputs(2)) return;
        if (wi[0] != wi[1]) mismatch("operands differ");
        if (wo != 1) mismatch("comparison output must be 1 bit");
        break;
      case GateKind::Add:
      case GateKind::Sub:
      case GateKind::Mul:
        if (!need_inputs(2)) return;
        if (wi[0] != wo || wi[1] != wo) mismatch("operands must match output width");
        break;
      case GateKind::Shl:
      case GateKind::Shr:
        if (!need_inputs(2)) return;
        if (wi[0] != wo) mismatch("shifted operand must match output width");
        if (wi[1] > 16) mismatch("shift amount wider than 16 bits");
        break;
      case GateKind::Case: {
        if (g.inputs.size() < 3) return error(g.line, where + "expects selector, arms and default");
        const std::size_t arms = g.inputs.size() - 2;
        if (g.params.arms.size() != arms)
          return error(g.line, where + "arms= lists " + std::to_string(g.params.arms.size()) +
                                   " values for " + std::to_string(arms) + " data inputs");
        if (wi[0] > 16) mismatch("selector wider than 16 bits");
        std::set<std::uint64_t> seen;
        for (auto v : g.params.arms) {
          if (v > width_mask(wi[0])) error(g.line, where + "arm value exceeds selector range");
          if (!seen.insert(v).second) error(g.line, where + "duplicate arm value");
        }
        for (std::size_t i = 1; i < wi.size(); ++i)
          if (wi[i] != wo) return mismatch("arm data must match output width");
        break;
      }
      case GateKind::Const:
        if (!need_inputs(0)) return;
        if (g.params.value > width_mask(wo)) error(g.line, where + "constant exceeds output width");
        break;
      case GateKind::Slice:
        if (!need_inputs(1)) return;
        if (g.params.lo + wo > wi[0]) mismatch("slice range exceeds input width");
        break;
      case GateKind::Concat: {
        if (g.inputs.empty()) return error(g.line, where + "expects at least 1 input");
        unsigned sum = 0;
        for (unsigned w : wi) sum += w;
        if (sum != wo) mismatch("concatenation width " + std::to_string(sum) + " != output width");
        break;
      }
    }
  }
};

}  // namespace

std::vector<Diagnostic> validate(const Circuit& c) {
  std::vector<Diagnostic> out;
  Checker chk{c, out};

  for (const auto& n : c.nets())
    if (n.width < 1 || n.width > kMaxWidth)
      chk.error(0, "net " + n.name + ": width must be in 1..64");

  for (const auto& g : c.gates()) chk.check_gate(g);

  for (const auto& r : c.registers()) {
    unsigned w = c.width(r.q);
    if (r.init > width_mask(w)) chk.error(r.line, "register " + r.name + ": init exceeds width");
    if (!chk.net_ok(r.next)) {
      chk.error(r.line, "register " + r.name + ": unknown next-state net");
      continue;
    }
    if (c.width(r.next) != w) chk.error(r.line, "register " + r.name + ": width mismatch on next-state net");
    if (r.load.has_value() != r.loaddata.has_value())
      chk.error(r.line, "register " + r.name + ": load and loaddata must be given together");
    if (r.load && c.width(*r.load) != 1) chk.error(r.line, "register " + r.name + ": width mismatch, load must be 1 bit");
    if (r.loaddata && c.width(*r.loaddata) != w)
      chk.error(r.line, "register " + r.name + ": width mismatch on loaddata");
  }

  const auto drivers = c.drivers();
  for (NetId n = 0; n < c.nets().size(); ++n) {
    if (drivers[n].size() > 1) {
      int line = 0;
      for (const auto& d : drivers[n])
        if (d.kind == DriverKind::Gate) line = std::max(line, c.gates()[d.index].line);
      chk.error(line, "net " + c.net(n).name + ": multiple drivers (" +
                          std::to_string(drivers[n].size()) + ")");
    } else if (drivers[n].empty()) {
      chk.error(0, "net " + c.net(n).name + ": no driver");
    }
  }

  // Combinational cycles: DFS over gate -> reading gate edges.
  if (out.empty()) {
    const auto& gates = c.gates();
    std::vector<int> state(gates.size(), 0);  // 0 new, 1 on stack, 2 done
    std::vector<std::vector<GateId>> succ(gates.size());
    for (GateId g = 0; g < gates.size(); ++g)
      for (NetId o : gates[g].outputs)
        for (GateId r : c.readers()[o]) succ[g].push_back(r);
    for (GateId root = 0; root < gates.size(); ++root) {
      if (state[root]) continue;
      std::vector<std::pair<GateId, std::size_t>> stack{{root, 0}};
      state[root] = 1;
      while (!stack.empty()) {
        auto& [g, idx] = stack.back();
        if (idx < succ[g].size()) {
          GateId s = succ[g][idx++];
          if (state[s] == 1) {
            chk.error(gates[s].line, "combinational cycle through gate " + gates[s].id);
            return out;
          }
          if (state[s] == 0) {
            state[s] = 1;
            stack.emplace_back(s, 0);
          }
        } else {
          state[g] = 2;
          stack.pop_back();
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Levelization

Levelization levelize(const Circuit& c) {
  const auto& gates = c.gates();
  Levelization lv;
  lv.level.assign(gates.size(), 0);
  std::vector<unsigned> pending(gates.size(), 0);
  std::vector<GateId> gate_driver(c.nets().size(), static_cast<GateId>(-1));
  for (GateId g = 0; g < gates.size(); ++g)
    for (NetId o : gates[g].outputs) gate_driver[o] = g;
  std::vector<std::vector<GateId>> succ(gates.size());
  for (GateId g = 0; g < gates.size(); ++g) {
    std::set<GateId> preds;
    for (NetId n : gates[g].inputs)
      if (gate_driver[n] != static_cast<GateId>(-1)) preds.insert(gate_driver[n]);
    pending[g] = static_cast<unsigned>(preds.size());
    for (GateId p : preds) succ[p].push_back(g);
  }
  std::vector<GateId> ready;
  for (GateId g = 0; g < gates.size(); ++g)
    if (pending[g] == 0) {
      lv.level[g] = 1;
      ready.push_back(g);
    }
  std::size_t done = 0;
  while (!ready.empty()) {
    GateId g = ready.back();
    ready.pop_back();
    ++done;
    for (GateId s : succ[g]) {
      lv.level[s] = std::max(lv.level[s], lv.level[g] + 1);
      if (--pending[s] == 0) ready.push_back(s);
    }
  }
  if (done != gates.size()) throw std::runtime_error("levelize: combinational cycle");
  lv.order.resize(gates.size());
  for (GateId g = 0; g < gates.size(); ++g) lv.order[g] = g;
  std::stable_sort(lv.order.begin(), lv.order.end(),
                   [&](GateId a, GateId b) { return lv.level[a] < lv.level[b]; });
  for (unsigned l : lv.level) lv.max_level = std::max(lv.max_level, l);
  return lv;
}

// ---------------------------------------------------------------------------
// Primitive semantics

std::uint64_t eval_primitive(GateKind kind, const GateParams& params,
                             const std::vector<unsigned>& in_widths, unsigned out_width,
                             const std::vector<std::uint64_t>& in) {
  const std::uint64_t m = width_mask(out_width);
  switch (kind) {
    case GateKind::Not:
      return ~in[0] & m;
    case GateKind::And: {
      std::uint64_t v = in[0];
      for (std::size_t i = 1; i < in.size(); ++i) v &= in[i];
      return v & m;
    }
    case GateKind::Or: {
      std::uint64_t v = in[0];
      for (std::size_t i = 1; i < in.size(); ++i) v |= in[i];
      return v & m;
    }
    case GateKind::Xor: {
      std::uint64_t v = in[0];
      for (std::size_t i = 1; i < in.size(); ++i) v ^= in[i];
      return v & m;
    }
    case GateKind::Mux2:
      return ((in[0] & 1) ? in[2] : in[1]) & m;
    case GateKind::Eq:
      return in[0] == in[1] ? 1 : 0;
    case GateKind::Neq:
      return in[0] != in[1] ? 1 : 0;
    case GateKind::Lt:
      return in[0] < in[1] ? 1 : 0;
    case GateKind::Add:
      return (in[0] + in[1]) & m;
    case GateKind::Sub:
      return (in[0] - in[1]) & m;
    case GateKind::Mul:
      return (in[0] * in[1]) & m;
    case GateKind::Shl:
      return in[1] >= out_width ? 0 : (in[0] << in[1]) & m;
    case GateKind::Shr:
      return in[1] >= out_width ? 0 : (in[0] >> in[1]) & m;
    case GateKind::Case: {
      for (std::size_t i = 0; i < params.arms.size(); ++i)
        if (in[0] == params.arms[i]) return in[1 + i] & m;
      return in.back() & m;
    }
    case GateKind::Const:
      return params.value & m;
    case GateKind::Slice:
      return (in[0] >> params.lo) & m;
    case GateKind::Concat: {
      std::uint64_t v = 0;
      for (std::size_t i = 0; i < in.size(); ++i) {
        unsigned w = in_widths[i];
        v = (w >= 64 ? 0 : (v << w)) | (in[i] & width_mask(w));
      }
      return v & m;
    }
  }
  return 0;
}

std::uint64_t eval_gate(const Circuit& c, const GateInstance& g,
                        const std::vector<std::uint64_t>& values) {
  std::vector<std::uint64_t> in;
  std::vector<unsigned> widths;
  in.reserve(g.inputs.size());
  widths.reserve(g.inputs.size());
  for (NetId n : g.inputs) {
    in.push_back(values[n]);
    widths.push_back(c.width(n));
  }
  return eval_primitive(g.kind, g.params, widths, c.width(g.outputs[0]), in);
}

}  // namespace hypertest
