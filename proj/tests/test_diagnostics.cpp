#include <doctest.h>

#include <cmath>
#include <random>

#include "bevlift/diagnostics.hpp"
#include "bevlift/frustum.hpp"
#include "test_support.hpp"

using namespace bevlift;
using test_support::random_tensor;

TEST_CASE("shannon_entropy") {
  SUBCASE("one-hot is zero") {
    const float p[] = {0.0f, 1.0f, 0.0f, 0.0f};
    CHECK(shannon_entropy(std::span<const float>(p, 4)) == 0.0);
  }
  SUBCASE("uniform is ln K") {
    for (std::size_t K : {2, 5, 17}) {
      std::vector<double> p(K, 1.0 / double(K));
      CHECK(shannon_entropy(std::span<const double>(p)) ==
            doctest::Approx(std::log(double(K))).epsilon(1e-9));
    }
  }
  SUBCASE("closed-form value") {
    const double p[] = {0.5, 0.25, 0.25};
    CHECK(shannon_entropy(std::span<const double>(p, 3)) ==
          doctest::Approx(1.0397207708399179).epsilon(1e-9));
  }
  SUBCASE("unnormalized input throws") {
    const double p[] = {0.5, 0.6};
    CHECK_THROWS_AS(shannon_entropy(std::span<const double>(p, 2)), NotNormalized);
  }
  SUBCASE("permutation invariant") {
    std::vector<double> p = {0.1, 0.2, 0.3, 0.4};
    const double h = shannon_entropy(std::span<const double>(p));
    std::mt19937 rng(71);
    for (int t = 0; t < 10; ++t) {
      std::shuffle(p.begin(), p.end(), rng);
      CHECK(shannon_entropy(std::span<const double>(p)) ==
            doctest::Approx(h).epsilon(1e-12));
    }
  }
  SUBCASE("uniform maximizes entropy") {
    std::mt19937 rng(72);
    const std::size_t K = 8;
    const double uniform = std::log(double(K));
    std::uniform_real_distribution<double> val(0.001, 1.0);
    for (int t = 0; t < 1000; ++t) {
      std::vector<double> p(K);
      double sum = 0.0;
      for (auto& v : p) {
        v = val(rng);
        sum += v;
      }
      for (auto& v : p) v /= sum;
      CHECK(shannon_entropy(std::span<const double>(p)) <= uniform + 1e-12);
    }
  }
}

TEST_CASE("entropy_report") {
  const std::size_t W = 4, H = 3, K = 5;
  SUBCASE("one-hot predictions give zero-mean, zero-width groups") {
    Tensor dist({W, H, K});
    Tensor labels({W, H, K});
    for (std::size_t p = 0; p < W * H; ++p) {
      dist[p * K + p % K] = 1.0f;
      labels[p * K + p % K] = 1.0f;
    }
    std::vector<std::uint8_t> fg(W * H, 0);
    auto rows = entropy_report(dist, labels, fg);
    std::size_t total = 0;
    for (const auto& row : rows) {
      CHECK(row.mean_entropy == 0.0);
      CHECK(row.ci_low == 0.0);
      CHECK(row.ci_high == 0.0);
      total += row.count;
    }
    CHECK(total == W * H);
  }
  SUBCASE("uniform predictions give ln K everywhere") {
    Tensor dist = Tensor::full({W, H, K}, 1.0f / K);
    Tensor labels({W, H, K});
    for (std::size_t p = 0; p < W * H; ++p) labels[p * K + 2] = 1.0f;
    std::vector<std::uint8_t> fg(W * H, 1);
    auto rows = entropy_report(dist, labels, fg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].gt_bin == 2);
    CHECK(rows[0].foreground);
    CHECK(rows[0].count == W * H);
    CHECK(rows[0].mean_entropy == doctest::Approx(std::log(5.0)).epsilon(1e-6));
  }
  SUBCASE("mixed populations match a loop oracle") {
    std::mt19937 rng(73);
    Tensor logits = random_tensor<float>(rng, {W, H, K}, -2.0, 2.0);
    Tensor dist = softmax_normalize(logits);
    Tensor labels({W, H, K});
    std::vector<std::size_t> hot(W * H);
    std::uniform_int_distribution<std::size_t> pick(0, K - 1);
    for (std::size_t p = 0; p < W * H; ++p) {
      hot[p] = pick(rng);
      labels[p * K + hot[p]] = 1.0f;
    }
    auto fg = test_support::random_mask(rng, W * H);
    auto rows = entropy_report(dist, labels, fg);

    std::size_t total = 0;
    for (const auto& row : rows) {
      total += row.count;
      // Oracle: recompute the group mean by scanning all pixels.
      double sum = 0.0;
      std::size_t n = 0;
      for (std::size_t p = 0; p < W * H; ++p) {
        if (int(hot[p]) != row.gt_bin || (fg[p] != 0) != row.foreground) continue;
        double h = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          const double q = double(dist[p * K + k]);
          if (q > 0.0) h -= q * std::log(q);
        }
        sum += h;
        ++n;
      }
      REQUIRE(n == row.count);
      CHECK(row.mean_entropy == doctest::Approx(sum / double(n)).epsilon(1e-6));
      CHECK(row.ci_low <= row.mean_entropy);
      CHECK(row.ci_high >= row.mean_entropy);
    }
    CHECK(total == W * H);
  }
}

TEST_CASE("gradcheck on closed-form maps") {
  std::mt19937 rng(74);
  SUBCASE("sum of entries has an all-ones gradient") {
    TensorD x = random_tensor<double>(rng, {3, 4}, -2.0, 2.0);
    TensorD ones = TensorD::full({3, 4}, 1.0);
    auto f = [](const TensorD& t) {
      double s = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) s += t[i];
      return s;
    };
    CHECK(gradcheck(f, ones, x).max_rel_error <= 1e-10);
  }
  SUBCASE("half squared norm has gradient x") {
    TensorD x = random_tensor<double>(rng, {5}, -3.0, 3.0);
    auto f = [](const TensorD& t) {
      double s = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) s += t[i] * t[i];
      return 0.5 * s;
    };
    CHECK(gradcheck(f, x, x, 1e-5).max_rel_error <= 1e-8);
  }
  SUBCASE("wrong gradients are flagged") {
    TensorD x = random_tensor<double>(rng, {4}, 0.5, 2.0);
    TensorD wrong = TensorD::full({4}, 0.0);
    auto f = [](const TensorD& t) {
      double s = 0.0;
      for (std::size_t i = 0; i < t.size(); ++i) s += t[i];
      return s;
    };
    CHECK(gradcheck(f, wrong, x).max_rel_error > 0.5);
  }
  SUBCASE("non-finite evaluations throw") {
    TensorD x = TensorD::full({2}, 1.0);
    auto f = [](const TensorD&) { return std::nan(""); };
    CHECK_THROWS_AS(gradcheck(f, x, x), NonFiniteEvaluation);
  }
}
