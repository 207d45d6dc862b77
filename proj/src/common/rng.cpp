// SPDX-License-Identifier: Apache-2.0

#include "dpp/common/rng.hpp"

#include "dpp/common/errors.hpp"

namespace dpp {

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  require(n > 0, "Rng::uniform_index: empty range");
  if ((n & (n - 1)) == 0) return engine_() & (n - 1);
  // Largest multiple of n representable; values above it are rejected.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = engine_();
  while (x >= limit) x = engine_();
  return x % n;
}

std::vector<int> Rng::sample_without_replacement(std::span<const int> pool, int k) {
  require(k >= 0 && static_cast<std::size_t>(k) <= pool.size(),
          "Rng::sample_without_replacement: k exceeds pool size");
  std::vector<int> work(pool.begin(), pool.end());
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  // Partial Fisher-Yates from the front.
  for (int i = 0; i < k; ++i) {
    std::size_t j = static_cast<std::size_t>(i) + uniform_index(work.size() - static_cast<std::size_t>(i));
    std::swap(work[static_cast<std::size_t>(i)], work[j]);
    out.push_back(work[static_cast<std::size_t>(i)]);
  }
  return out;
}

}  // namespace dpp
