#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace hypertest {

using BitId = std::uint32_t;

enum class SimpleKind : std::uint8_t { Not, And2, Or2, Xor2, Mux2 };

std::string_view simple_kind_name(SimpleKind k);

enum class BitSource : std::uint8_t { Input, RegQ, Tie0, Tie1, Gate };

struct BitNet {
  std::string name;
  BitSource source = BitSource::Gate;
  std::uint32_t driver = 0;  // gate index for BitSource::Gate
};

/// MUX2 pins are (sel, a, b) with out = sel ? b : a.
struct SimpleGate {
  SimpleKind kind = SimpleKind::Not;
  std::array<BitId, 3> in{};
  BitId out = 0;
  std::int32_t source_gate = -1;  // RTL GateInstance index, -1 when not from expansion
  std::uint32_t site = 0;         // index of the gate within its source template
  std::uint32_t copy = 0;         // duplication copy index

  unsigned arity() const { return kind == SimpleKind::Not ? 1u : kind == SimpleKind::Mux2 ? 3u : 2u; }
};

enum class SinkKind : std::uint8_t { Output, RegD };

/// Observation point: output port bit or register data-input bit.
struct Sink {
  BitId net = 0;
  SinkKind kind = SinkKind::Output;
  std::string name;  // "y[3]" for outputs, "d:q[3]" for register data inputs
};

struct GateRegBit {
  std::string name;  // register name
  unsigned bit = 0;
  BitId q = 0;
  std::uint32_t sink = 0;  // index into sinks() for the D input
  bool init = false;
};

/// A net use: a gate input pin or a sink.
struct Use {
  bool is_sink = false;
  std::uint32_t index = 0;  // gate index or sink index
  std::uint8_t pin = 0;
};

/// Bit-level netlist of simple gates. Gates are stored in topological order.
class GateCircuit {
 public:
  BitId add_net(std::string name, BitSource src);
  BitId add_input(std::string name) { return add_net(std::move(name), BitSource::Input); }
  /// Adds a new constant-driven net.
  BitId tie(bool value, std::string name = {});
  /// Appends a gate; its inputs must already be driven.
  BitId add_gate(SimpleKind kind, std::array<BitId, 3> in, std::string out_name,
                 std::int32_t source_gate = -1, std::uint32_t site = 0, std::uint32_t copy = 0);
  std::uint32_t add_sink(BitId net, SinkKind kind, std::string name);
  void add_reg_bit(GateRegBit r) { regs_.push_back(std::move(r)); }
  void set_port(const std::string& port, std::vector<BitId> bits, bool is_input);
  void finalize();

  const std::vector<BitNet>& nets() const { return nets_; }
  const std::vector<SimpleGate>& gates() const { return gates_; }
  const std::vector<Sink>& sinks() const { return sinks_; }
  const std::vector<GateRegBit>& regs() const { return regs_; }
  const std::vector<BitId>& inputs() const { return inputs_; }
  const std::vector<std::vector<Use>>& uses() const { return uses_; }
  const std::map<std::string, std::vector<BitId>>& input_ports() const { return in_ports_; }
  const std::map<std::string, std::vector<BitId>>& output_ports() const { return out_ports_; }

  /// Controllable sources in canonical order: input bits, then register Q bits.
  std::vector<BitId> sources() const;

  std::size_t gate_count(SimpleKind k) const;

  /// Evaluates all gates, 64 patterns per word. Source and tie values must be set.
  void eval(std::vector<std::uint64_t>& v) const;
  void set_ties(std::vector<std::uint64_t>& v) const;

 private:
  std::vector<BitNet> nets_;
  std::vector<SimpleGate> gates_;
  std::vector<Sink> sinks_;
  std::vector<GateRegBit> regs_;
  std::vector<BitId> inputs_;
  std::vector<std::vector<Use>> uses_;
  std::map<std::string, std::vector<BitId>> in_ports_, out_ports_;
  std::vector<BitId> ties_[2];
};

inline std::uint64_t eval_simple(SimpleKind k, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  switch (k) {
    case SimpleKind::Not: return ~a;
    case SimpleKind::And2: return a & b;
    case SimpleKind::Or2: return a | b;
    case SimpleKind::Xor2: return a ^ b;
    case SimpleKind::Mux2: return (a & c) | (~a & b);
  }
  return 0;
}

/// Single stuck-at fault location: a net stem, or one use of a net (fanout branch).
struct FaultLoc {
  BitId net = 0;
  std::int32_t use = -1;  // -1 = stem, otherwise index into uses()[net]

  bool is_stem() const { return use < 0; }
  friend bool operator==(const FaultLoc&, const FaultLoc&) = default;
};

/// Canonical ordered fault locations: for each net, its stem followed by its
/// branches when the net has more than one use.
std::vector<FaultLoc> fault_locations(const GateCircuit& g);
std::string loc_name(const GateCircuit& g, const FaultLoc& loc);

struct StuckFault {
  FaultLoc loc;
  bool value = false;
};

/// Evaluates the effect of a fault on top of a good-machine evaluation.
/// Scratch state is reused across calls; one instance per thread.
class FaultEvaluator {
 public:
  explicit FaultEvaluator(const GateCircuit& g);

  /// Runs the faulty machine for one 64-pattern batch. After the call,
  /// value(n) returns the faulty value of each net and sink_value(s) the
  /// faulty value observed at each sink.
  void run(const std::vector<std::uint64_t>& good, const StuckFault& f);
  /// Same, with an arbitrary per-lane override of a stem (value = forced bits).
  void run_forced(const std::vector<std::uint64_t>& good, BitId net, std::uint64_t forced);
  /// Forces several stems at once. Gates driving a forced net are not re-evaluated.
  void run_forced(const std::vector<std::uint64_t>& good, const std::vector<std::pair<BitId, std::uint64_t>>& forced);

  std::uint64_t value(BitId n) const { return stamp_[n] == epoch_ ? faulty_[n] : (*good_)[n]; }
  std::uint64_t sink_value(std::uint32_t s) const;
  /// Lanes where any sink differs from the good machine.
  std::uint64_t detect_mask() const;
  /// Lanes where the given sink differs.
  std::uint64_t sink_diff(std::uint32_t s) const { return sink_value(s) ^ (*good_)[g_.sinks()[s].net]; }
  /// Sinks whose value may differ from the good machine after the last run.
  const std::vector<std::uint32_t>& touched_sinks() const { return touched_sinks_; }

 private:
  void set(BitId n, std::uint64_t v);
  void propagate_from(const std::vector<std::uint32_t>& seeds, std::int32_t skip_gate);

  const GateCircuit& g_;
  const std::vector<std::uint64_t>* good_ = nullptr;
  std::vector<std::uint64_t> faulty_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> gate_stamp_;
  std::vector<std::uint32_t> pin_stamp_;
  std::uint32_t epoch_ = 0;
  std::vector<std::uint32_t> queue_;
  std::vector<std::uint32_t> touched_sinks_;
  std::int32_t branch_sink_ = -1;
  std::uint64_t branch_sink_value_ = 0;
};

}  // namespace hypertest
