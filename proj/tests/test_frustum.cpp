#include <doctest.h>

#include <cmath>
#include <random>

#include "bevlift/diagnostics.hpp"
#include "bevlift/frustum.hpp"
#include "test_support.hpp"

using namespace bevlift;
using test_support::random_tensor;

TEST_CASE("softmax of zero logits is uniform") {
  Tensor logits({2, 2, 4});
  Tensor dist = softmax_normalize(logits);
  for (auto v : dist.data()) CHECK(v == doctest::Approx(0.25f));
}

TEST_CASE("softmax of log-valued logits recovers the values") {
  Tensor logits({1, 1, 4});
  logits[0] = std::log(1.0f);
  logits[1] = std::log(2.0f);
  logits[2] = std::log(3.0f);
  logits[3] = std::log(4.0f);
  Tensor dist = softmax_normalize(logits);
  CHECK(dist[0] == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(dist[1] == doctest::Approx(0.2).epsilon(1e-6));
  CHECK(dist[2] == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(dist[3] == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("softmax matches an unstabilized 64-bit oracle") {
  std::mt19937 rng(11);
  TensorD logits = random_tensor<double>(rng, {3, 3, 8}, -4.0, 4.0);
  TensorD dist = softmax_normalize(logits);
  for (std::size_t p = 0; p < 9; ++p) {
    double denom = 0.0;
    for (std::size_t k = 0; k < 8; ++k) denom += std::exp(logits[p * 8 + k]);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(dist[p * 8 + k] ==
            doctest::Approx(std::exp(logits[p * 8 + k]) / denom).epsilon(1e-6));
    }
  }
}

TEST_CASE("softmax properties") {
  std::mt19937 rng(12);
  Tensor logits = random_tensor<float>(rng, {4, 3, 6}, -30.0, 30.0);
  Tensor dist = softmax_normalize(logits);
  SUBCASE("sums to one and stays strictly interior") {
    for (std::size_t p = 0; p < 12; ++p) {
      double sum = 0.0;
      for (std::size_t k = 0; k < 6; ++k) {
        const float v = dist[p * 6 + k];
        CHECK(v > 0.0f);
        CHECK(v < 1.0f);
        sum += v;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
  SUBCASE("invariant to per-pixel constant shifts") {
    Tensor shifted = logits;
    for (std::size_t p = 0; p < 12; ++p) {
      const float shift = static_cast<float>(p) * 3.5f - 10.0f;
      for (std::size_t k = 0; k < 6; ++k) shifted[p * 6 + k] += shift;
    }
    Tensor dist2 = softmax_normalize(shifted);
    for (std::size_t i = 0; i < dist.size(); ++i) {
      CHECK(dist2[i] == doctest::Approx(dist[i]).epsilon(1e-6));
    }
  }
  SUBCASE("non-finite logits are rejected") {
    logits[5] = std::numeric_limits<float>::infinity();
    CHECK_THROWS_AS(softmax_normalize(logits), NonFiniteInput);
  }
}

TEST_CASE("drop_overflow_bin") {
  const int D = 4;
  SUBCASE("all mass at the overflow bin leaves zeros") {
    Tensor dist({2, 2, 5});
    for (std::size_t p = 0; p < 4; ++p) dist[p * 5 + 4] = 1.0f;
    Tensor out = drop_overflow_bin(dist, D);
    CHECK(out.shape() == std::vector<std::size_t>{2, 2, 4});
    for (auto v : out.data()) CHECK(v == 0.0f);
  }
  SUBCASE("in-range one-hot is untouched") {
    Tensor dist({1, 1, 5});
    dist[2] = 1.0f;
    Tensor out = drop_overflow_bin(dist, D);
    CHECK(out[2] == 1.0f);
    CHECK(out[0] == 0.0f);
  }
  SUBCASE("uniform mass is sliced, not renormalized") {
    Tensor dist = Tensor::full({2, 1, 5}, 0.2f);
    Tensor out = drop_overflow_bin(dist, D);
    double sum = 0.0;
    for (std::size_t d = 0; d < 4; ++d) sum += out[d];
    CHECK(sum == doctest::Approx(0.8).epsilon(1e-6));
    for (auto v : out.data()) CHECK(v == doctest::Approx(0.2f));
  }
  SUBCASE("wrong bin count throws") {
    Tensor dist({1, 1, 5});
    CHECK_THROWS_AS(drop_overflow_bin(dist, 5), WrongBinCount);
    CHECK_THROWS_AS(drop_overflow_bin(dist, 3), WrongBinCount);
  }
}

TEST_CASE("lift basics") {
  SUBCASE("one-hot distribution places the feature row") {
    Tensor dist({1, 1, 4});
    dist[2] = 1.0f;
    Tensor features({1, 1, 3});
    features[0] = 1.0f;
    features[1] = -2.0f;
    features[2] = 0.5f;
    Tensor g = lift(dist, features);
    CHECK(g.shape() == std::vector<std::size_t>{1, 1, 4, 3});
    for (std::size_t d = 0; d < 4; ++d) {
      for (std::size_t c = 0; c < 3; ++c) {
        CHECK(g.at(0, 0, d, c) == (d == 2 ? features[c] : 0.0f));
      }
    }
  }
  SUBCASE("uniform distribution broadcasts a scaled copy") {
    Tensor dist = Tensor::full({1, 1, 5}, 0.2f);
    Tensor features({1, 1, 2});
    features[0] = 10.0f;
    features[1] = -5.0f;
    Tensor g = lift(dist, features);
    for (std::size_t d = 0; d < 5; ++d) {
      CHECK(g.at(0, 0, d, 0) == doctest::Approx(2.0f));
      CHECK(g.at(0, 0, d, 1) == doctest::Approx(-1.0f));
    }
  }
  SUBCASE("shape mismatch throws") {
    CHECK_THROWS_AS(lift(Tensor({2, 2, 4}), Tensor({2, 3, 2})), ShapeMismatch);
  }
}

TEST_CASE("lift matches a triple-loop 64-bit oracle and conserves marginals") {
  std::mt19937 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor dist = random_tensor<float>(rng, {4, 4, 8}, 0.0, 1.0);
    Tensor features = random_tensor<float>(rng, {4, 4, 3}, -2.0, 2.0);
    Tensor g = lift(dist, features);
    for (std::size_t u = 0; u < 4; ++u) {
      for (std::size_t v = 0; v < 4; ++v) {
        for (std::size_t c = 0; c < 3; ++c) {
          double column = 0.0;
          double mass = 0.0;
          for (std::size_t d = 0; d < 8; ++d) {
            const double expected = static_cast<double>(dist.at(u, v, d)) *
                                    static_cast<double>(features.at(u, v, c));
            CHECK(g.at(u, v, d, c) == doctest::Approx(expected).epsilon(1e-6));
            column += g.at(u, v, d, c);
            mass += dist.at(u, v, d);
          }
          CHECK(column ==
                doctest::Approx(mass * features.at(u, v, c)).epsilon(1e-5));
        }
      }
    }
  }
}

TEST_CASE("lift is bilinear") {
  std::mt19937 rng(22);
  Tensor d1 = random_tensor<float>(rng, {3, 2, 5});
  Tensor d2 = random_tensor<float>(rng, {3, 2, 5});
  Tensor f = random_tensor<float>(rng, {3, 2, 4}, -1.0, 1.0);
  const float a = 0.75f, b = -1.5f;
  Tensor mix({3, 2, 5});
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * d1[i] + b * d2[i];
  Tensor lhs = lift(mix, f);
  Tensor g1 = lift(d1, f);
  Tensor g2 = lift(d2, f);
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    CHECK(lhs[i] == doctest::Approx(a * g1[i] + b * g2[i]).epsilon(2e-5));
  }
}

TEST_CASE("lift_backward formulas") {
  SUBCASE("zero upstream gives zero gradients") {
    Tensor dist({2, 2, 3});
    Tensor features({2, 2, 2});
    Tensor upstream({2, 2, 3, 2});
    auto [gd, gf] = lift_backward(dist, features, upstream);
    for (auto v : gd.data()) CHECK(v == 0.0f);
    for (auto v : gf.data()) CHECK(v == 0.0f);
  }
  SUBCASE("scalar case is the product rule") {
    Tensor dist({1, 1, 1});
    dist[0] = 0.3f;
    Tensor features({1, 1, 1});
    features[0] = 2.0f;
    Tensor upstream({1, 1, 1, 1});
    upstream[0] = 5.0f;
    auto [gd, gf] = lift_backward(dist, features, upstream);
    CHECK(gd[0] == doctest::Approx(10.0f));  // g * f
    CHECK(gf[0] == doctest::Approx(1.5f));   // g * p
  }
  SUBCASE("matches finite differences of a lift functional") {
    std::mt19937 rng(23);
    TensorD dist = random_tensor<double>(rng, {2, 2, 3});
    TensorD features = random_tensor<double>(rng, {2, 2, 2}, -1.0, 1.0);
    TensorD upstream = random_tensor<double>(rng, {2, 2, 3, 2}, -1.0, 1.0);
    auto [gd, gf] = lift_backward(dist, features, upstream);

    // f(dist) = <lift(dist, features), upstream>
    auto f_dist = [&](const TensorD& x) {
      TensorD g = lift(x, features);
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * upstream[i];
      return s;
    };
    CHECK(gradcheck(f_dist, gd, dist).max_rel_error <= 1e-4);

    auto f_feat = [&](const TensorD& x) {
      TensorD g = lift(dist, x);
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * upstream[i];
      return s;
    };
    CHECK(gradcheck(f_feat, gf, features).max_rel_error <= 1e-4);
  }
}

TEST_CASE("softmax_backward") {
  SUBCASE("uniform upstream gives zero gradient") {
    Tensor logits({2, 2, 5});
    Tensor dist = softmax_normalize(logits);
    Tensor upstream = Tensor::full({2, 2, 5}, 3.7f);
    Tensor grad = softmax_backward(dist, upstream);
    for (auto v : grad.data()) CHECK(v == doctest::Approx(0.0f).epsilon(1e-6));
  }
  SUBCASE("saturated distribution has vanishing gradient") {
    Tensor dist({1, 1, 3});
    dist[0] = 1.0f;
    Tensor upstream({1, 1, 3});
    upstream[0] = 0.3f;
    upstream[1] = -0.7f;
    upstream[2] = 2.0f;
    Tensor grad = softmax_backward(dist, upstream);
    for (auto v : grad.data()) CHECK(std::abs(v) < 1e-6f);
  }
  SUBCASE("matches finite differences through softmax") {
    std::mt19937 rng(27);
    TensorD logits = random_tensor<double>(rng, {2, 3, 4}, -2.0, 2.0);
    TensorD upstream = random_tensor<double>(rng, {2, 3, 4}, -1.0, 1.0);
    TensorD dist = softmax_normalize(logits);
    TensorD analytic = softmax_backward(dist, upstream);
    auto f = [&](const TensorD& x) {
      TensorD d = softmax_normalize(x);
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * upstream[i];
      return s;
    };
    CHECK(gradcheck(f, analytic, logits).max_rel_error <= 1e-4);
  }
}

TEST_CASE("distribution validation") {
  Tensor dist = Tensor::full({2, 2, 4}, 0.25f);
  CHECK_NOTHROW(validate_distribution(dist));
  dist[0] = 0.5f;
  CHECK_THROWS_AS(validate_distribution(dist), NotNormalized);
  dist[0] = -0.1f;
  CHECK_THROWS_AS(validate_distribution(dist), OutOfRange);
}
