#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hypertest/gif.hpp"

namespace hypertest {

struct GenOptions {
  std::string name = "gen";
  std::size_t random_cycles = 32;
  std::uint64_t seed = 1;
  std::size_t max_cycles = 20000;
  std::size_t max_states = 1u << 16;  // per reachability search
};

struct GenResult {
  VectorProgram program;
  Bitset covered;
  /// Coverable items whose witness state could not be reached from the test.
  std::vector<std::size_t> unreached;
};

/// Builds one functional test: random cycles first, then for each coverable
/// item still uncovered, a shortest input sequence (over a sampled input
/// alphabet) that drives the registers to the item's witness state, followed
/// by the witness inputs. Every cycle carries `expect` lines for all outputs.
GenResult generate_tests(const Circuit& c, const GifUniverse& u, const GifClassification& cls,
                         const GenOptions& opt = {});

}  // namespace hypertest
