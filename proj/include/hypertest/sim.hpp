#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hypertest/circuit.hpp"

namespace hypertest {

struct VectorCycle {
  std::vector<std::pair<std::string, std::uint64_t>> set;
  std::vector<std::pair<std::string, std::uint64_t>> expect;
  int line = 0;
};

struct VectorProgram {
  std::string name;
  std::vector<VectorCycle> cycles;
};

/// `.vec` format: `set a=0x1F b=2 ; expect y=0x21`, one line per macro-cycle.
VectorProgram parse_vectors(std::string_view text, std::string name = "test");
VectorProgram load_vectors(const std::string& path);
std::string print_vectors(const VectorProgram& p);
/// Loads every *.vec in a directory, sorted by name.
std::vector<VectorProgram> load_vector_dir(const std::string& dir);

/// Full input-port values per cycle (ordered as c.input_ports()). Inputs not
/// assigned in a cycle keep their previous value; all start at 0.
std::vector<std::vector<std::uint64_t>> resolve_inputs(const Circuit& c, const VectorProgram& p);

struct Mismatch {
  std::size_t cycle = 0;
  std::string output;
  std::uint64_t expected = 0;
  std::uint64_t actual = 0;
};

struct TraceCycle {
  std::vector<std::uint64_t> inputs;   // input ports, in port order
  std::vector<std::uint64_t> outputs;  // output ports, in port order
  std::vector<std::uint64_t> state;    // registers at the start of the cycle

  friend bool operator==(const TraceCycle&, const TraceCycle&) = default;
};

struct Trace {
  std::vector<TraceCycle> cycles;
  std::vector<std::uint64_t> final_state;
  std::vector<Mismatch> mismatches;

  /// Cycle data only; mismatches are not compared.
  bool same_signals(const Trace& o) const { return cycles == o.cycles && final_state == o.final_state; }
};

std::string print_trace(const Circuit& c, const Trace& t);

/// Levelized evaluator with reusable scratch space.
class Evaluator {
 public:
  explicit Evaluator(const Circuit& c);

  const Circuit& circuit() const { return c_; }
  const std::vector<GateId>& order() const { return order_; }

  /// Evaluates all nets from input-port values and register values.
  void eval(const std::vector<std::uint64_t>& inputs, const std::vector<std::uint64_t>& regs);
  /// Loads sources without evaluating gates.
  void load_sources(const std::vector<std::uint64_t>& inputs, const std::vector<std::uint64_t>& regs);
  std::uint64_t eval_one(GateId g);
  void eval_gates(const std::vector<GateId>& gates);

  std::vector<std::uint64_t>& values() { return values_; }
  const std::vector<std::uint64_t>& values() const { return values_; }
  std::vector<std::uint64_t> outputs() const;
  std::vector<std::uint64_t> next_state() const;

 private:
  const Circuit& c_;
  std::vector<GateId> order_;
  std::vector<std::uint32_t> in_ports_, out_ports_;
  std::vector<std::vector<unsigned>> widths_;
  std::vector<std::uint64_t> scratch_;
  std::vector<std::uint64_t> values_;
};

std::vector<std::uint64_t> initial_state(const Circuit& c);

struct StepResult {
  std::vector<std::uint64_t> state;
  std::vector<std::uint64_t> outputs;
};

StepResult step_macro_cycle(const Circuit& c, const std::vector<std::uint64_t>& state,
                            const std::vector<std::uint64_t>& inputs);

Trace simulate(const Circuit& c, const VectorProgram& p);
/// Same, from an explicit start state.
Trace simulate_from(const Circuit& c, const VectorProgram& p, std::vector<std::uint64_t> state);

}  // namespace hypertest
