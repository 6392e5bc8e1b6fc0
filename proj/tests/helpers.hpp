#pragma once

#include <map>
#include <string>
#include <vector>

#include "hypertest/circuit.hpp"
#include "hypertest/gate_circuit.hpp"
#include "hypertest/sim.hpp"

namespace testutil {

inline std::string corpus(const std::string& rel) { return std::string(HYPERTEST_CORPUS_DIR) + "/" + rel; }

inline const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names = {"alu8",    "counter", "decoder", "dup2po",
                                                 "loopback", "mac4",    "shifter"};
  return names;
}

inline hypertest::Circuit load(const std::string& name) { return hypertest::load_circuit(corpus(name + ".ckt")); }

/// Deterministic random program touching every input each cycle.
hypertest::VectorProgram random_program(const hypertest::Circuit& c, std::size_t cycles, std::uint64_t seed,
                                        const std::string& name = "rand");

/// Scalar reference evaluation of a gate netlist, one net at a time, with an
/// optional stuck-at fault. `sources` follows GateCircuit::sources() order.
/// Returns every net's value as seen by its stem (after the fault for stems).
std::vector<bool> naive_nets(const hypertest::GateCircuit& g, const std::vector<bool>& sources,
                             const hypertest::StuckFault* f = nullptr);
/// Sink values under the same evaluation.
std::vector<bool> naive_sinks(const hypertest::GateCircuit& g, const std::vector<bool>& sources,
                              const hypertest::StuckFault* f = nullptr);
/// Sink values with the given nets overridden.
std::vector<bool> naive_sinks_forced(const hypertest::GateCircuit& g, const std::vector<bool>& sources,
                                     const std::map<hypertest::BitId, bool>& forced);

}  // namespace testutil
