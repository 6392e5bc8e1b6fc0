#pragma once

#include <cstdint>
#include <vector>

namespace hypertest {

/// Assignments of controllable source bits, packed 64 frames per batch:
/// batches[b][k] holds source bit k for frames 64b..64b+63.
class FrameSet {
 public:
  explicit FrameSet(std::size_t sources = 0) : sources_(sources) {}

  std::size_t sources() const { return sources_; }
  std::size_t size() const { return count_; }
  std::size_t batches() const { return batches_.size(); }
  const std::vector<std::uint64_t>& batch(std::size_t b) const { return batches_[b]; }
  std::uint64_t lane_mask(std::size_t b) const {
    std::size_t n = count_ - b * 64;
    return n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
  }

  void push(const std::vector<bool>& bits);
  /// Source bits of one frame.
  std::vector<bool> frame(std::size_t i) const;

 private:
  std::size_t sources_;
  std::size_t count_ = 0;
  std::vector<std::vector<std::uint64_t>> batches_;
};

/// Bijection on [0, 2^bits) that spreads consecutive indices over the space.
std::uint64_t scramble(std::uint64_t x, unsigned bits);

/// Source bits of assignment `a`: bit k of a drives source k.
inline std::vector<bool> assignment_bits(std::uint64_t a, std::size_t sources) {
  std::vector<bool> v(sources);
  for (std::size_t k = 0; k < sources; ++k) v[k] = (a >> k) & 1;
  return v;
}

/// Batch of 64 consecutive scrambled assignments starting at index 64*b.
std::vector<std::uint64_t> exhaustive_batch(std::size_t b, unsigned bits);

}  // namespace hypertest
