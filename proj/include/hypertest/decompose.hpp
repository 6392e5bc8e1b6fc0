#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypertest/circuit.hpp"
#include "hypertest/gate_circuit.hpp"

namespace hypertest {

/// A: ripple/structural textbook forms. B: alternative forms (trees,
/// carry-select, AND-OR muxes, one-hot decoders).
enum class Decomp { A, B };

std::string_view decomp_name(Decomp d);
Decomp decomp_from_name(std::string_view s);

/// Emits simple gates for one RTL primitive into a GateCircuit. Each emitted
/// gate gets the next site number of this instance; constants become
/// per-instance tie nets.
class TemplateEmitter {
 public:
  TemplateEmitter(GateCircuit& gc, std::string prefix, std::int32_t source_gate, std::uint32_t copy)
      : gc_(gc), prefix_(std::move(prefix)), source_(source_gate), copy_(copy) {}

  BitId op(SimpleKind k, BitId a, BitId b = 0, BitId c = 0);
  BitId NOT(BitId a) { return op(SimpleKind::Not, a); }
  BitId AND(BitId a, BitId b) { return op(SimpleKind::And2, a, b); }
  BitId OR(BitId a, BitId b) { return op(SimpleKind::Or2, a, b); }
  BitId XOR(BitId a, BitId b) { return op(SimpleKind::Xor2, a, b); }
  /// sel ? b : a
  BitId MUX(BitId sel, BitId a, BitId b) { return op(SimpleKind::Mux2, sel, a, b); }
  BitId tie(bool v);
  /// A separate constant net for one output bit.
  BitId bit_tie(bool v, unsigned bit);

  std::uint32_t sites() const { return site_; }

 private:
  GateCircuit& gc_;
  std::string prefix_;
  std::int32_t source_;
  std::uint32_t copy_;
  std::uint32_t site_ = 0;
  BitId tie_[2] = {~0u, ~0u};
};

using Bits = std::vector<BitId>;

/// Emits the decomposition of a primitive. `ins` holds the bits of each input
/// pin, LSB first. Returns the output bits, LSB first.
Bits emit_primitive(TemplateEmitter& e, GateKind kind, const GateParams& params,
                    const std::vector<Bits>& ins, unsigned out_width, Decomp d);

/// Stand-alone network of one primitive. Inputs are the pin bits in pin
/// order ("in<p>[<b>]"), sinks are the output bits ("out[<b>]").
GateCircuit build_template(GateKind kind, const GateParams& params,
                           const std::vector<unsigned>& in_widths, unsigned out_width, Decomp d);
GateCircuit build_template(const Circuit& c, GateId g, Decomp d);

struct ExpandOptions {
  Decomp decomp = Decomp::A;
  /// Gives every consumer of a multiply-used gate output its own copy of the
  /// gate (the duplicated expansion).
  bool duplicate_shared = false;
};

/// Simple-gate netlist equivalent to `c`. Input ports become input bits,
/// registers become Q sources with a D sink per bit, output ports become sinks.
/// `net_bits`, when given, receives the bits of every RTL net (empty for
/// duplicated gate outputs).
GateCircuit expand(const Circuit& c, const ExpandOptions& opt, std::vector<Bits>* net_bits = nullptr);
inline GateCircuit expand(const Circuit& c, Decomp d) { return expand(c, ExpandOptions{d, false}); }

}  // namespace hypertest
