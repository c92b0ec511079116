#include "bevlift/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "bevlift/errors.hpp"
#include "bevlift/parallel.hpp"

namespace bevlift {

namespace {

template <typename T>
double entropy_impl(std::span<const T> p) {
  double sum = 0.0;
  for (T v : p) sum += static_cast<double>(v);
  if (std::abs(sum - 1.0) > 1e-3) {
    throw NotNormalized("entropy input does not sum to 1");
  }
  double h = 0.0;
  for (T v : p) {
    const double q = static_cast<double>(v);
    if (q > 0.0) h -= q * std::log(q);
  }
  return h;
}

}  // namespace

double shannon_entropy(std::span<const float> p) { return entropy_impl(p); }
double shannon_entropy(std::span<const double> p) { return entropy_impl(p); }

std::vector<EntropyRow> entropy_report(const Tensor& dist, const Tensor& labels,
                                       const std::vector<std::uint8_t>& foreground) {
  if (dist.rank() != 3 || !dist.same_shape(labels)) {
    throw ShapeMismatch("entropy_report expects matching W x H x K tensors");
  }
  const std::size_t pixels = dist.extent(0) * dist.extent(1);
  if (foreground.size() != pixels) {
    throw ShapeMismatch("entropy_report mask size does not match the pixel grid");
  }
  const std::size_t K = dist.extent(2);
  auto pd = dist.data();
  auto pl = labels.data();

  struct Acc {
    std::vector<double> entropies;
  };
  std::map<std::pair<int, bool>, Acc> groups;
  for (std::size_t p = 0; p < pixels; ++p) {
    std::size_t hot = 0;
    float best = pl[p * K];
    for (std::size_t k = 1; k < K; ++k) {
      if (pl[p * K + k] > best) {
        best = pl[p * K + k];
        hot = k;
      }
    }
    const double h = shannon_entropy(pd.subspan(p * K, K));
    groups[{static_cast<int>(hot), foreground[p] != 0}].entropies.push_back(h);
  }

  std::vector<EntropyRow> rows;
  rows.reserve(groups.size());
  for (auto& [key, acc] : groups) {
    EntropyRow row;
    row.gt_bin = key.first;
    row.foreground = key.second;
    row.count = acc.entropies.size();
    const double n = static_cast<double>(row.count);
    const double mean =
        pairwise_sum(acc.entropies.size(), [&](std::size_t i) { return acc.entropies[i]; }) / n;
    row.mean_entropy = mean;
    if (row.count < 2) {
      row.ci_low = row.ci_high = mean;
    } else {
      const double ss = pairwise_sum(acc.entropies.size(), [&](std::size_t i) {
        const double d = acc.entropies[i] - mean;
        return d * d;
      });
      const double stdev = std::sqrt(ss / (n - 1.0));
      const double half = 1.96 * stdev / std::sqrt(n);
      row.ci_low = mean - half;
      row.ci_high = mean + half;
    }
    rows.push_back(row);
  }
  return rows;
}

GradCheckResult gradcheck(const std::function<double(const TensorD&)>& f,
                          const TensorD& analytic_grad, const TensorD& x,
                          double eps_scale) {
  if (!analytic_grad.same_shape(x)) {
    throw ShapeMismatch("gradcheck: analytic gradient shape does not match x");
  }
  GradCheckResult result;
  TensorD probe = x;
  auto px = x.data();
  auto pg = analytic_grad.data();
  auto pp = probe.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = px[i];
    const double eps = eps_scale * std::max(std::abs(xi), 1e-4);
    pp[i] = xi + eps;
    const double f_hi = f(probe);
    pp[i] = xi - eps;
    const double f_lo = f(probe);
    pp[i] = xi;
    if (!std::isfinite(f_hi) || !std::isfinite(f_lo)) {
      throw NonFiniteEvaluation("gradcheck: map produced non-finite values");
    }
    const double numeric = (f_hi - f_lo) / (2.0 * eps);
    const double analytic = pg[i];
    const double err = std::abs(numeric - analytic) /
                       std::max({std::abs(numeric), std::abs(analytic), 1e-8});
    if (err > result.max_rel_error) {
      result.max_rel_error = err;
      result.worst_index = i;
    }
  }
  return result;
}

}  // namespace bevlift
