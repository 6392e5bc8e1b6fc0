#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hypertest/bitset.hpp"
#include "hypertest/circuit.hpp"
#include "hypertest/frames.hpp"
#include "hypertest/gate_circuit.hpp"
#include "hypertest/sim.hpp"

namespace hypertest {

inline constexpr const char* kToolVersion = "hypertest 1.0";

enum class GifMode { Site, Path, Kmap };
enum class GifModel { GO, PO };

std::string_view gif_mode_name(GifMode m);
std::string_view gif_model_name(GifModel m);
GifMode gif_mode_from_name(std::string_view s);
GifModel gif_model_from_name(std::string_view s);

struct GifOptions {
  GifMode mode = GifMode::Site;
  GifModel model = GifModel::PO;
  std::size_t path_cap = 4096;  // per gate
  unsigned kmap_max_bits = 12;  // gate input bits
};

/// One local fault of a complex gate, defined on its decomposition-A template.
/// Site: a collapsed stuck-at class. Path: a structural input-to-output path,
/// active when every gate on it is sensitized. Kmap: output bit `go`
/// complemented for one input minterm.
struct GifCore {
  GateId gate = 0;
  std::uint32_t gi = 0;
  std::uint32_t i = 0;
  StuckFault fault;                                   // site
  std::vector<std::pair<std::uint32_t, std::uint8_t>> path;  // path: (template gate, pin)
  std::uint64_t minterm = 0;                          // kmap
  std::vector<unsigned> gos;                          // output bits the fault reaches
};

/// GO items have j = -1. In site mode a GO item's alpha is the fault-free
/// value at the fault site; otherwise alpha is the fault-free value of the
/// observation point (go for GO, j for PO).
struct GifItem {
  std::uint32_t core = 0;
  std::uint32_t go = 0;
  std::int32_t j = -1;
  bool alpha = false;
};

struct GifGateInfo {
  std::string id;
  std::string path;
  GateKind kind = GateKind::Not;
};

struct GifUniverse {
  GifOptions options;
  std::string circuit;
  std::string hash;
  std::vector<GifGateInfo> gates;  // indexed by GateId
  std::vector<std::string> sinks;  // j names: output bits, then register D bits
  std::vector<GifCore> cores;
  std::vector<GifItem> items;

  std::size_t size() const { return items.size(); }
  const GifCore& core_of(std::size_t k) const { return cores[items[k].core]; }
  /// `gif <gate_id> gi=<n> go=<n> i=<n> [j=<portbit>] a=<0|1>`
  std::string item_string(std::size_t k) const;
  const std::string& item_path(std::size_t k) const { return gates[core_of(k).gate].path; }
};

std::string universe_hash(const Circuit& c, const GifOptions& opt);

/// Throws std::runtime_error when a path or kmap cap is exceeded.
GifUniverse enumerate_gifs(const Circuit& c, const GifOptions& opt);

struct CoverageSet {
  std::string universe_hash;
  std::string test;
  std::uint64_t cycles = 0;
  Bitset covered;
};

/// One frame per cycle of the fault-free functional run: input bits in port
/// order, then register bits in register order.
FrameSet rtl_frames(const Circuit& c, const VectorProgram& p);

/// Per-cycle GIF fault simulation over the bit-level expansion A of the circuit.
class GifSimulator {
 public:
  GifSimulator(const Circuit& c, const GifUniverse& u);
  ~GifSimulator();
  GifSimulator(const GifSimulator&) = delete;
  GifSimulator& operator=(const GifSimulator&) = delete;

  const GateCircuit& netlist() const;

  /// Adds the items detected in `frames` to `covered`. Items already covered
  /// are skipped. For newly covered items, `witness` (when given) receives
  /// `base` plus the index of the first detecting frame.
  void run(const FrameSet& frames, Bitset& covered, std::vector<std::int64_t>* witness = nullptr,
           std::int64_t base = 0);
  /// Same for one batch of source words with the given valid lanes.
  void run_batch(const std::vector<std::uint64_t>& sources, std::uint64_t lanes, Bitset& covered,
                 std::vector<std::int64_t>* witness, std::int64_t base);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<CoverageSet> gif_fault_sim(const Circuit& c, const std::vector<VectorProgram>& tests,
                                       const GifUniverse& u);

struct UncoveredItem {
  std::size_t index = 0;
  std::string text;
  std::string path;
  GateKind kind = GateKind::Not;
};

std::vector<UncoveredItem> uncovered(const GifUniverse& u, const Bitset& covered);
std::vector<UncoveredItem> uncovered(const GifUniverse& u, const CoverageSet& cov);

enum class Coverability { Coverable, Uncoverable, Unclassified };
std::string_view coverability_name(Coverability c);

struct GifClassification {
  std::vector<Coverability> status;
  /// Detecting source assignment (bit k drives source k) for coverable items, else -1.
  std::vector<std::int64_t> witness;

  std::size_t count(Coverability c) const;
};

/// Exhaustive search over inputs and register outputs. Everything is
/// unclassified when the circuit has more than `max_bits` controllable bits.
GifClassification classify_coverable(const Circuit& c, const GifUniverse& u, unsigned max_bits = 20);
Coverability classify_item(const Circuit& c, const GifUniverse& u, std::size_t item,
                         unsigned max_bits = 20);

/// Coverage of coverable items: |covered and coverable| / |coverable|.
struct CoverableCoverage {
  std::size_t coverable = 0;
  std::size_t covered = 0;
  bool complete() const { return covered == coverable; }
};
CoverableCoverage coverable_coverage(const GifClassification& cls, const Bitset& covered);

}  // namespace hypertest
