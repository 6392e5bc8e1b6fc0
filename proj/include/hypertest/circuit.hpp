#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hypertest {

using NetId = std::uint32_t;
using GateId = std::uint32_t;

inline constexpr unsigned kMaxWidth = 64;

inline constexpr std::uint64_t width_mask(unsigned w) {
  return w >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << w) - 1);
}

enum class GateKind {
  Not, And, Or, Xor, Mux2, Eq, Neq, Lt, Add, Sub, Mul, Shl, Shr, Case, Const, Slice, Concat
};

std::string_view kind_name(GateKind k);
std::optional<GateKind> kind_from_name(std::string_view s);

enum class PortDir { Input, Output };

struct Net {
  std::string name;
  unsigned width = 1;
  bool implicit = false;  // created by the builder (register load mux), not printed
};

struct Port {
  std::string name;
  PortDir dir = PortDir::Input;
  NetId net = 0;
};

/// A design register. `d` is the effective next-state net: `next` when the
/// register has no load port, otherwise the output of the implicit load mux.
struct StorageElement {
  std::string name;
  NetId q = 0;
  NetId next = 0;
  NetId d = 0;
  std::uint64_t init = 0;
  std::optional<NetId> load;
  std::optional<NetId> loaddata;
  std::string loc;
  int line = 0;
};

struct GateParams {
  std::uint64_t value = 0;            // CONST
  unsigned lo = 0;                    // SLICE
  std::vector<std::uint64_t> arms;    // CASE selector values, one per data input
};

struct GateInstance {
  std::string id;
  GateKind kind = GateKind::Not;
  GateParams params;
  std::vector<NetId> inputs;
  std::vector<NetId> outputs;
  std::string loc;
  bool implicit = false;
  int line = 0;
};

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;

  std::string str() const;
};

class DiagnosticError : public std::runtime_error {
 public:
  explicit DiagnosticError(std::vector<Diagnostic> diags);
  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

enum class DriverKind { None, Input, Register, Gate };

struct Driver {
  DriverKind kind = DriverKind::None;
  std::uint32_t index = 0;  // port, register or gate index
};

/// Flat RTL netlist. Immutable once built; safe to share across readers.
class Circuit {
 public:
  const std::string& name() const { return name_; }
  const std::vector<Net>& nets() const { return nets_; }
  const std::vector<Port>& ports() const { return ports_; }
  const std::vector<StorageElement>& registers() const { return registers_; }
  const std::vector<GateInstance>& gates() const { return gates_; }

  const Net& net(NetId id) const { return nets_.at(id); }
  unsigned width(NetId id) const { return nets_.at(id).width; }
  std::optional<NetId> find_net(std::string_view name) const;
  std::optional<GateId> find_gate(std::string_view id) const;
  std::optional<std::uint32_t> find_register(std::string_view name) const;

  std::vector<std::uint32_t> input_ports() const;
  std::vector<std::uint32_t> output_ports() const;

  /// All drivers of each net (more than one is a validation error).
  std::vector<std::vector<Driver>> drivers() const;
  /// First driver of a net, for validated circuits.
  Driver driver(NetId id) const;
  /// Gates reading each net.
  const std::vector<std::vector<GateId>>& readers() const { return readers_; }

  /// Number of bits the test environment controls: input bits plus register bits.
  unsigned controllable_bits() const;

  /// Reporting path for a gate (its loc tag, or the circuit name when empty).
  std::string hier_path(GateId g) const;

 private:
  friend class CircuitBuilder;
  void index();

  std::string name_;
  std::vector<Net> nets_;
  std::vector<Port> ports_;
  std::vector<StorageElement> registers_;
  std::vector<GateInstance> gates_;
  std::map<std::string, NetId, std::less<>> net_by_name_;
  std::map<std::string, GateId, std::less<>> gate_by_id_;
  std::vector<std::vector<GateId>> readers_;
};

/// Incremental constructor. Performs no semantic checks; call validate().
class CircuitBuilder {
 public:
  explicit CircuitBuilder(std::string name = "top");

  NetId add_net(std::string name, unsigned width, bool implicit = false);
  std::optional<NetId> find_net(std::string_view name) const;
  void add_port(std::string name, PortDir dir, NetId net);
  GateId add_gate(GateInstance g);
  /// Adds a register and, when it has a load port, the implicit load mux.
  void add_register(StorageElement r);
  void set_name(std::string name) { c_.name_ = std::move(name); }

  Circuit build() &&;

 private:
  Circuit c_;
};

std::vector<Diagnostic> validate(const Circuit& c);

/// Per-gate level: 1 + max level of gate predecessors; sources are level 0.
struct Levelization {
  std::vector<unsigned> level;   // indexed by GateId
  std::vector<GateId> order;     // sorted by (level, gate index)
  unsigned max_level = 0;
};

Levelization levelize(const Circuit& c);

/// Word-level semantics of one primitive.
std::uint64_t eval_gate(const Circuit& c, const GateInstance& g,
                        const std::vector<std::uint64_t>& values);

/// Same as above with explicit input values (in pin order).
std::uint64_t eval_primitive(GateKind kind, const GateParams& params,
                             const std::vector<unsigned>& in_widths, unsigned out_width,
                             const std::vector<std::uint64_t>& inputs);

// .ckt text format
Circuit parse_circuit(std::string_view text);
Circuit load_circuit(const std::string& path);
std::string print_circuit(const Circuit& c);

}  // namespace hypertest
