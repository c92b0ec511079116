#include "bevlift/losses.hpp"

#include <cmath>

#include "bevlift/errors.hpp"
#include "bevlift/parallel.hpp"

namespace bevlift {

namespace {

constexpr double kProbFloor = 1e-9;

template <typename T>
std::size_t hot_bin(const T* label_row, std::size_t K) {
  std::size_t best = 0;
  T best_val = label_row[0];
  for (std::size_t k = 1; k < K; ++k) {
    if (label_row[k] > best_val) {
      best_val = label_row[k];
      best = k;
    }
  }
  return best;
}

template <typename T>
void check_loss_args(const BasicTensor<T>& dist, const BasicTensor<T>& labels,
                     const std::vector<std::uint8_t>& foreground) {
  if (dist.rank() != 3 || !dist.same_shape(labels)) {
    throw ShapeMismatch("depth_loss expects matching W x H x K tensors");
  }
  if (foreground.size() != dist.extent(0) * dist.extent(1)) {
    throw ShapeMismatch("depth_loss mask size does not match the pixel grid");
  }
}

}  // namespace

void LossWeights::validate() const {
  const double vals[] = {alpha_fg,   alpha_bg,   gamma,      lambda_depth,
                         lambda_cls, lambda_reg, lambda_dir};
  for (double v : vals) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError("loss weights must be finite and nonnegative");
    }
  }
}

double focal_term(double p_t, double alpha, double gamma) {
  double p = p_t < kProbFloor ? kProbFloor : p_t;
  if (p > 1.0) p = 1.0;
  return -alpha * std::pow(1.0 - p, gamma) * std::log(p);
}

template <typename T>
double depth_loss(const BasicTensor<T>& dist, const BasicTensor<T>& labels,
                  const std::vector<std::uint8_t>& foreground,
                  const LossWeights& weights) {
  check_loss_args(dist, labels, foreground);
  weights.validate();
  const std::size_t pixels = foreground.size();
  const std::size_t K = dist.extent(2);
  auto pd = dist.data();
  auto pl = labels.data();
  const double sum = pairwise_sum(pixels, [&](std::size_t p) {
    const std::size_t hot = hot_bin(pl.data() + p * K, K);
    const double alpha = foreground[p] ? weights.alpha_fg : weights.alpha_bg;
    return focal_term(static_cast<double>(pd[p * K + hot]), alpha, weights.gamma);
  });
  return sum / static_cast<double>(pixels);
}

template <typename T>
BasicTensor<T> depth_loss_backward(const BasicTensor<T>& dist,
                                   const BasicTensor<T>& labels,
                                   const std::vector<std::uint8_t>& foreground,
                                   const LossWeights& weights) {
  check_loss_args(dist, labels, foreground);
  weights.validate();
  const std::size_t pixels = foreground.size();
  const std::size_t K = dist.extent(2);
  const double inv_n = 1.0 / static_cast<double>(pixels);
  BasicTensor<T> grad(dist.shape());
  auto pd = dist.data();
  auto pl = labels.data();
  auto pg = grad.data();
  const double gamma = weights.gamma;
  parallel_for(pixels, [&](std::size_t p) {
    const std::size_t hot = hot_bin(pl.data() + p * K, K);
    const double alpha = foreground[p] ? weights.alpha_fg : weights.alpha_bg;
    double q = static_cast<double>(pd[p * K + hot]);
    if (q < kProbFloor) q = kProbFloor;
    if (q > 1.0) q = 1.0;
    // d/dp [-a (1-p)^g ln p] = a g (1-p)^(g-1) ln p - a (1-p)^g / p
    const double one_minus = 1.0 - q;
    double g;
    if (one_minus <= 0.0) {
      g = gamma == 0.0 ? -alpha / q : 0.0;
    } else {
      g = -alpha * std::pow(one_minus, gamma) / q;
      if (gamma > 0.0) {
        g += alpha * gamma * std::pow(one_minus, gamma - 1.0) * std::log(q);
      }
    }
    pg[p * K + hot] = static_cast<T>(g * inv_n);
  });
  return grad;
}

double total_loss(double l_depth, double l_cls, double l_reg, double l_dir,
                  const LossWeights& weights) {
  weights.validate();
  const double vals[] = {l_depth, l_cls, l_reg, l_dir};
  for (double v : vals) {
    if (!std::isfinite(v)) throw NonFiniteInput("loss components must be finite");
  }
  return weights.lambda_depth * l_depth + weights.lambda_cls * l_cls +
         weights.lambda_reg * l_reg + weights.lambda_dir * l_dir;
}

template double depth_loss(const BasicTensor<float>&, const BasicTensor<float>&,
                           const std::vector<std::uint8_t>&, const LossWeights&);
template double depth_loss(const BasicTensor<double>&, const BasicTensor<double>&,
                           const std::vector<std::uint8_t>&, const LossWeights&);
template BasicTensor<float> depth_loss_backward(const BasicTensor<float>&,
                                                const BasicTensor<float>&,
                                                const std::vector<std::uint8_t>&,
                                                const LossWeights&);
template BasicTensor<double> depth_loss_backward(const BasicTensor<double>&,
                                                 const BasicTensor<double>&,
                                                 const std::vector<std::uint8_t>&,
                                                 const LossWeights&);

}  // namespace bevlift
