#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hypertest/rational.hpp"
#include "hypertest/shp.hpp"
#include "hypertest/sim.hpp"

namespace hypertest {

inline constexpr int kIdle = -1;

struct Schedule {
  std::vector<int> window;  // thread index or kIdle
  bool repeat = true;
};

/// `.sched` format: `window 0 1 2 - 0 1 2 -` and an optional `repeat` line.
Schedule parse_schedule(std::string_view text);
Schedule load_schedule(const std::string& path);
std::string print_schedule(const Schedule& s);
Schedule round_robin(unsigned threads, unsigned C);

/// Empty when legal; otherwise one message per violation (reissue distance, thread range).
std::vector<std::string> check_schedule(const Schedule& s, unsigned C, unsigned D);

struct FavgReport {
  std::map<int, Rational> per_thread;  // threads present in the window
  Rational idle;
  Rational total() const;
};

/// Favg(t) = issues of t in the window / W * f_micro.
FavgReport favg(const Schedule& s, Rational f_micro);

/// Micro-cycle model of the transformed pipeline. Each stage holds at most
/// one token; only nets in the CR banks survive from one stage to the next.
class Pipeline {
 public:
  struct Token {
    int thread = 0;
    std::size_t macro = 0;  // thread-local macro-cycle index
    std::uint64_t tag = 0;  // caller's bookkeeping
    std::vector<std::uint64_t> inputs;
    std::vector<std::uint64_t> state;
    std::vector<std::uint64_t> values;  // net values visible to the current stage
  };
  struct Completion {
    Token token;
    std::vector<std::uint64_t> outputs;
    std::vector<std::uint64_t> next_state;
  };

  explicit Pipeline(const ShpCircuit& s);

  /// Advances one micro-cycle. `issue` enters stage 0; the token leaving the
  /// last stage, if any, is returned.
  std::optional<Completion> step(std::optional<Token> issue);
  /// Flips a bit of a CR register holding `net` after bank `boundary`.
  /// Returns false when the bank is empty this micro-cycle or does not hold the net.
  bool flip_cr(NetId net, unsigned boundary, unsigned bit);
  /// Discards in-flight tokens matching the predicate.
  template <class F>
  void squash(F&& pred) {
    for (auto& s : slots_)
      if (s && pred(*s)) s.reset();
  }
  bool empty() const;

 private:
  void latch(std::size_t bank, Token& t) const;

  const ShpCircuit& s_;
  Evaluator ev_;
  std::vector<std::vector<GateId>> stage_gates_;
  std::vector<std::vector<bool>> in_bank_;
  std::vector<std::optional<Token>> slots_;  // slot s = token executing stage s next
};

/// Runs per-thread programs through the pipeline under a schedule.
std::map<int, Trace> run_shp(const ShpCircuit& s, const Schedule& sched,
                             const std::map<int, VectorProgram>& programs);

struct TcConfig {
  unsigned R = 3;
  std::vector<int> threads;  // redundant thread ids; default 0..R-1
  unsigned compare_latency = 1;
  bool alternating_banks = false;
};

struct SeuEvent {
  std::uint64_t micro_cycle = 0;
  std::string element;   // register name, or "cr:<net>:<boundary>"
  int thread = 0;
  unsigned bit = 0;
  int line = 0;
};

/// `.seu` format: `inject cycle=<micro> elem=<reg|cr:<net>:<boundary>> thread=<t> bit=<b>`.
std::vector<SeuEvent> parse_seu(std::string_view text);
std::vector<SeuEvent> load_seu(const std::string& path);

struct Detection {
  std::uint64_t micro_cycle = 0;
  std::size_t round = 0;  // macro-cycle index being compared
  int thread = 0;
  bool final_check = false;
};

struct Recovery {
  std::uint64_t micro_cycle = 0;
  std::size_t round = 0;
  int replaced = 0;
  int donor = 0;
};

struct RedundancyReport {
  std::vector<Detection> detections;
  std::vector<Recovery> recoveries;
  std::size_t repeated_cycles = 0;
  bool unrecoverable = false;
  std::size_t unrecoverable_round = 0;
  bool final_equivalent = false;
  std::vector<std::string> notes;  // injections without effect, etc.
  std::uint64_t micro_cycles = 0;
};

struct RedundantResult {
  Trace trace;  // voted outputs and start state of each committed macro-cycle
  RedundancyReport report;
};

RedundantResult run_redundant(const ShpCircuit& s, const TcConfig& tc, const VectorProgram& p,
                              const std::vector<SeuEvent>& injections);

std::string print_report(const RedundancyReport& r);

/// True iff the functional threads' traces are identical with and without
/// the test threads scheduled (test slots become idle when removed).
bool check_noninterference(const ShpCircuit& s, const Schedule& sched, const std::vector<int>& functional,
                           const std::vector<int>& test, const std::map<int, VectorProgram>& programs);

}  // namespace hypertest
