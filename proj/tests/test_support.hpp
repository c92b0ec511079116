#pragma once

#include <random>

#include "bevlift/tensor.hpp"

namespace test_support {

// Deterministic uniform tensors for reproducible randomized tests.
template <typename T>
bevlift::BasicTensor<T> random_tensor(std::mt19937& rng,
                                      std::vector<std::size_t> shape,
                                      double lo = 0.0, double hi = 1.0) {
  bevlift::BasicTensor<T> t(std::move(shape));
  std::uniform_real_distribution<double> dist(lo, hi);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
  return t;
}

inline std::vector<std::uint8_t> random_mask(std::mt19937& rng, std::size_t n,
                                             double p_true = 0.5) {
  std::bernoulli_distribution dist(p_true);
  std::vector<std::uint8_t> mask(n);
  for (auto& m : mask) m = dist(rng) ? 1 : 0;
  return mask;
}

}  // namespace test_support
