#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bevlift/tensor.hpp"

namespace bevlift {

// Shannon entropy in nats of a probability vector; 0 * ln 0 counts as 0.
// Throws NotNormalized when the entries deviate from summing to 1 by > 1e-3.
double shannon_entropy(std::span<const float> p);
double shannon_entropy(std::span<const double> p);

// Per-(ground-truth-bin, foreground) entropy statistics of predicted
// distributions: mean and a normal-approximation 95% confidence interval
// (mean +- 1.96 * stdev / sqrt(n), sample stdev; groups of one report the
// mean for both bounds).
struct EntropyRow {
  int gt_bin = 0;
  bool foreground = false;
  std::size_t count = 0;
  double mean_entropy = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

std::vector<EntropyRow> entropy_report(const Tensor& dist, const Tensor& labels,
                                       const std::vector<std::uint8_t>& foreground);

// Central-difference gradient verification of a scalar map. The step per
// coordinate scales with its magnitude, eps_scale * max(|x_i|, 1e-4); the
// error is |g_num - g_an| / max(|g_num|, |g_an|, 1e-8), maximized over
// coordinates. Throws NonFiniteEvaluation when f produces non-finite values.
struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
};

GradCheckResult gradcheck(const std::function<double(const TensorD&)>& f,
                          const TensorD& analytic_grad, const TensorD& x,
                          double eps_scale = 1e-3);

}  // namespace bevlift
