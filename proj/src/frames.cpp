#include "hypertest/frames.hpp"

namespace hypertest {

void FrameSet::push(const std::vector<bool>& bits) {
  if (count_ % 64 == 0) batches_.emplace_back(sources_, 0);
  auto& w = batches_.back();
  const std::uint64_t lane = std::uint64_t{1} << (count_ % 64);
  for (std::size_t k = 0; k < sources_; ++k)
    if (bits[k]) w[k] |= lane;
  ++count_;
}

std::vector<bool> FrameSet::frame(std::size_t i) const {
  std::vector<bool> v(sources_);
  const auto& w = batches_[i / 64];
  for (std::size_t k = 0; k < sources_; ++k) v[k] = (w[k] >> (i % 64)) & 1;
  return v;
}

std::uint64_t scramble(std::uint64_t x, unsigned bits) {
  if (bits == 0) return 0;
  const std::uint64_t mask = bits >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << bits) - 1);
  const unsigned sh = bits / 2 + 1;
  for (int r = 0; r < 3; ++r) {
    x = (x * 0x9e3779b97f4a7c15ull) & mask;
    x ^= x >> sh;
  }
  return x & mask;
}

std::vector<std::uint64_t> exhaustive_batch(std::size_t b, unsigned bits) {
  std::vector<std::uint64_t> w(bits, 0);
  const std::uint64_t total = std::uint64_t{1} << bits;
  for (unsigned l = 0; l < 64; ++l) {
    std::uint64_t idx = b * 64 + l;
    if (idx >= total) break;
    std::uint64_t a = scramble(idx, bits);
    for (unsigned k = 0; k < bits; ++k)
      if ((a >> k) & 1) w[k] |= std::uint64_t{1} << l;
  }
  return w;
}

}  // namespace hypertest
