#pragma once

#include <cstdint>
#include <vector>

#include "bevlift/tensor.hpp"

namespace bevlift {

// Focal loss weighting and total-loss combination factors.
struct LossWeights {
  double alpha_fg = 3.25;
  double alpha_bg = 0.25;
  double gamma = 2.0;
  double lambda_depth = 3.0;
  double lambda_cls = 1.0;
  double lambda_reg = 2.0;
  double lambda_dir = 0.2;

  void validate() const;
};

// Single focal term -alpha * (1 - p)^gamma * ln(p); p is clamped below at
// 1e-9 before the logarithm.
double focal_term(double p_t, double alpha, double gamma);

// Mean focal loss over all pixels of the probability at each label's hot
// bin. fg selects alpha_fg over alpha_bg per pixel; the overflow bin
// participates like any other bin.
template <typename T>
double depth_loss(const BasicTensor<T>& dist, const BasicTensor<T>& labels,
                  const std::vector<std::uint8_t>& foreground,
                  const LossWeights& weights);

// Analytic derivative of depth_loss w.r.t. every distribution entry; zero at
// non-hot bins.
template <typename T>
BasicTensor<T> depth_loss_backward(const BasicTensor<T>& dist,
                                   const BasicTensor<T>& labels,
                                   const std::vector<std::uint8_t>& foreground,
                                   const LossWeights& weights);

// lambda-weighted combination of the depth loss with externally supplied
// detection losses. Throws NonFiniteInput.
double total_loss(double l_depth, double l_cls, double l_reg, double l_dir,
                  const LossWeights& weights);

}  // namespace bevlift
