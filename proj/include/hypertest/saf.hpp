#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypertest/bitset.hpp"
#include "hypertest/frames.hpp"
#include "hypertest/gate_circuit.hpp"
#include "hypertest/rational.hpp"
#include "hypertest/sim.hpp"

namespace hypertest {

struct Saf {
  FaultLoc loc;
  bool value = false;
  std::uint32_t cls = 0;  // equivalence class, numbered in order of representatives
  bool rep = true;
};

/// Pin stuck-at faults in fault_locations() order, both values per location.
/// With `collapse`, only one representative per equivalence class is returned
/// (the member with the highest location index). Classes come from the
/// structural rules NOT in/v = out/!v, AND2 in/0 = out/0, OR2 in/1 = out/1.
std::vector<Saf> enumerate_safs(const GateCircuit& g, bool collapse);

std::string saf_name(const GateCircuit& g, const Saf& f);

enum class Testability { Testable, Untestable, Unclassified };
std::string_view testability_name(Testability t);

inline constexpr unsigned kExhaustiveBits = 20;

/// Exhaustive search over all source assignments (inputs and register
/// outputs). Unclassified when there are more than `max_bits` sources.
std::vector<Testability> classify_testable(const GateCircuit& g, const std::vector<Saf>& faults,
                                           unsigned max_bits = kExhaustiveBits);
Testability classify_testable(const GateCircuit& g, const Saf& f, unsigned max_bits = kExhaustiveBits);

/// Fault-free sequential run of the gate netlist; one frame per cycle.
FrameSet gate_frames(const GateCircuit& g, const VectorProgram& p);

/// Faults detected in any frame: a difference at an output or register D sink.
/// `threads` > 1 splits the fault list; the result does not depend on it.
Bitset saf_detect(const GateCircuit& g, const std::vector<Saf>& faults, const FrameSet& frames,
                  unsigned threads = 1);

struct SafTestResult {
  std::string name;
  std::size_t cycles = 0;
  Bitset detected;
};

struct SafCoverage {
  std::vector<Saf> faults;
  std::vector<Testability> status;
  std::vector<SafTestResult> tests;
  Bitset detected;  // union over tests

  std::size_t count(Testability t) const;
  std::size_t detected_testable() const;
  /// Detected testable faults over testable faults; 1 when nothing is testable.
  Rational coverage() const;
  /// Testable faults no test detects.
  std::vector<std::size_t> missed() const;
};

SafCoverage saf_fault_sim(const GateCircuit& g, const std::vector<VectorProgram>& tests,
                          unsigned threads = 1, bool collapse = true);

struct TcpnReport {
  std::uint64_t cycles = 0;
  std::size_t nets = 0;
  Rational tcpn;
};

/// Test macro-cycles per net of the gate netlist.
TcpnReport compute_tcpn(const std::vector<VectorProgram>& tests, const GateCircuit& g);
TcpnReport compute_tcpn(std::uint64_t cycles, std::size_t nets);

std::string print_saf_report(const GateCircuit& g, const SafCoverage& cov, const TcpnReport& tcpn);

}  // namespace hypertest
