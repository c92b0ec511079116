#include "bevlift/frustum.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "bevlift/errors.hpp"
#include "bevlift/parallel.hpp"

namespace bevlift {

namespace {

void require_rank3(const char* op, const std::vector<std::size_t>& shape) {
  if (shape.size() != 3) {
    throw ShapeMismatch(std::string(op) + " expects a rank-3 W x H x K tensor");
  }
}

}  // namespace

template <typename T>
BasicTensor<T> softmax_normalize(const BasicTensor<T>& logits) {
  require_rank3("softmax_normalize", logits.shape());
  const std::size_t pixels = logits.extent(0) * logits.extent(1);
  const std::size_t K = logits.extent(2);
  BasicTensor<T> out(logits.shape());
  auto src = logits.data();
  auto dst = out.data();
  std::atomic<bool> bad{false};
  parallel_for(pixels, [&](std::size_t p) {
    const std::size_t base = p * K;
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < K; ++k) {
      const double l = static_cast<double>(src[base + k]);
      if (!std::isfinite(l)) {
        bad.store(true, std::memory_order_relaxed);
        return;
      }
      m = std::max(m, l);
    }
    double denom = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      denom += std::exp(static_cast<double>(src[base + k]) - m);
    }
    for (std::size_t k = 0; k < K; ++k) {
      dst[base + k] =
          static_cast<T>(std::exp(static_cast<double>(src[base + k]) - m) / denom);
    }
  });
  if (bad.load()) throw NonFiniteInput("softmax input contains non-finite logits");
  return out;
}

template <typename T>
BasicTensor<T> drop_overflow_bin(const BasicTensor<T>& dist, int num_bins) {
  require_rank3("drop_overflow_bin", dist.shape());
  if (num_bins < 1 || dist.extent(2) != static_cast<std::size_t>(num_bins) + 1) {
    throw WrongBinCount("expected a distribution with num_bins + 1 bins");
  }
  const std::size_t W = dist.extent(0);
  const std::size_t H = dist.extent(1);
  const std::size_t K = dist.extent(2);
  const std::size_t D = K - 1;
  BasicTensor<T> out({W, H, D});
  auto src = dist.data();
  auto dst = out.data();
  parallel_for(W * H, [&](std::size_t p) {
    for (std::size_t d = 0; d < D; ++d) {
      dst[p * D + d] = src[p * K + d];
    }
  });
  return out;
}

template <typename T>
BasicTensor<T> lift(const BasicTensor<T>& dist, const BasicTensor<T>& features) {
  require_rank3("lift", dist.shape());
  require_rank3("lift", features.shape());
  if (dist.extent(0) != features.extent(0) || dist.extent(1) != features.extent(1)) {
    throw ShapeMismatch("lift: distribution and feature pixel grids differ");
  }
  const std::size_t W = dist.extent(0);
  const std::size_t H = dist.extent(1);
  const std::size_t D = dist.extent(2);
  const std::size_t C = features.extent(2);
  BasicTensor<T> out({W, H, D, C});
  auto pd = dist.data();
  auto pf = features.data();
  auto pg = out.data();
  parallel_for(W * H, [&](std::size_t p) {
    const T* dp = pd.data() + p * D;
    const T* fp = pf.data() + p * C;
    T* gp = pg.data() + p * D * C;
    for (std::size_t d = 0; d < D; ++d) {
      const T w = dp[d];
      for (std::size_t c = 0; c < C; ++c) {
        gp[d * C + c] = w * fp[c];
      }
    }
  });
  return out;
}

template <typename T>
std::pair<BasicTensor<T>, BasicTensor<T>> lift_backward(
    const BasicTensor<T>& dist, const BasicTensor<T>& features,
    const BasicTensor<T>& upstream) {
  require_rank3("lift_backward", dist.shape());
  require_rank3("lift_backward", features.shape());
  if (upstream.rank() != 4 || upstream.extent(0) != dist.extent(0) ||
      upstream.extent(1) != dist.extent(1) || upstream.extent(2) != dist.extent(2) ||
      upstream.extent(3) != features.extent(2) ||
      dist.extent(0) != features.extent(0) || dist.extent(1) != features.extent(1)) {
    throw ShapeMismatch("lift_backward: inconsistent shapes");
  }
  const std::size_t W = dist.extent(0);
  const std::size_t H = dist.extent(1);
  const std::size_t D = dist.extent(2);
  const std::size_t C = features.extent(2);
  BasicTensor<T> grad_dist({W, H, D});
  BasicTensor<T> grad_features({W, H, C});
  auto pd = dist.data();
  auto pf = features.data();
  auto pu = upstream.data();
  auto gd = grad_dist.data();
  auto gf = grad_features.data();
  parallel_for(W * H, [&](std::size_t p) {
    const T* dp = pd.data() + p * D;
    const T* fp = pf.data() + p * C;
    const T* up = pu.data() + p * D * C;
    for (std::size_t d = 0; d < D; ++d) {
      double acc = 0.0;
      for (std::size_t c = 0; c < C; ++c) {
        acc += static_cast<double>(up[d * C + c]) * static_cast<double>(fp[c]);
      }
      gd[p * D + d] = static_cast<T>(acc);
    }
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      for (std::size_t d = 0; d < D; ++d) {
        acc += static_cast<double>(up[d * C + c]) * static_cast<double>(dp[d]);
      }
      gf[p * C + c] = static_cast<T>(acc);
    }
  });
  return {std::move(grad_dist), std::move(grad_features)};
}

template <typename T>
BasicTensor<T> softmax_backward(const BasicTensor<T>& dist,
                                const BasicTensor<T>& upstream) {
  require_rank3("softmax_backward", dist.shape());
  if (!dist.same_shape(upstream)) {
    throw ShapeMismatch("softmax_backward: distribution and upstream shapes differ");
  }
  const std::size_t pixels = dist.extent(0) * dist.extent(1);
  const std::size_t K = dist.extent(2);
  BasicTensor<T> grad(dist.shape());
  auto pd = dist.data();
  auto pu = upstream.data();
  auto pg = grad.data();
  parallel_for(pixels, [&](std::size_t p) {
    const T* dp = pd.data() + p * K;
    const T* up = pu.data() + p * K;
    double dot = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      dot += static_cast<double>(up[k]) * static_cast<double>(dp[k]);
    }
    for (std::size_t k = 0; k < K; ++k) {
      pg[p * K + k] =
          static_cast<T>(static_cast<double>(dp[k]) * (static_cast<double>(up[k]) - dot));
    }
  });
  return grad;
}

template <typename T>
void validate_distribution(const BasicTensor<T>& dist, double tol) {
  require_rank3("validate_distribution", dist.shape());
  const std::size_t pixels = dist.extent(0) * dist.extent(1);
  const std::size_t K = dist.extent(2);
  auto pd = dist.data();
  for (std::size_t p = 0; p < pixels; ++p) {
    double sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double v = static_cast<double>(pd[p * K + k]);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw OutOfRange("distribution entry outside [0, 1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw NotNormalized("distribution does not sum to 1 per pixel");
    }
  }
}

template BasicTensor<float> softmax_normalize(const BasicTensor<float>&);
template BasicTensor<double> softmax_normalize(const BasicTensor<double>&);
template BasicTensor<float> drop_overflow_bin(const BasicTensor<float>&, int);
template BasicTensor<double> drop_overflow_bin(const BasicTensor<double>&, int);
template BasicTensor<float> lift(const BasicTensor<float>&, const BasicTensor<float>&);
template BasicTensor<double> lift(const BasicTensor<double>&, const BasicTensor<double>&);
template std::pair<BasicTensor<float>, BasicTensor<float>> lift_backward(
    const BasicTensor<float>&, const BasicTensor<float>&, const BasicTensor<float>&);
template std::pair<BasicTensor<double>, BasicTensor<double>> lift_backward(
    const BasicTensor<double>&, const BasicTensor<double>&, const BasicTensor<double>&);
template BasicTensor<float> softmax_backward(const BasicTensor<float>&,
                                             const BasicTensor<float>&);
template BasicTensor<double> softmax_backward(const BasicTensor<double>&,
                                              const BasicTensor<double>&);
template void validate_distribution(const BasicTensor<float>&, double);
template void validate_distribution(const BasicTensor<double>&, double);

}  // namespace bevlift
