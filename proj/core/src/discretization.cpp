#include "bevlift/discretization.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace bevlift {

DiscretizationMode parse_discretization_mode(const std::string& name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "ud") return DiscretizationMode::UD;
  if (s == "sid") return DiscretizationMode::SID;
  if (s == "lid") return DiscretizationMode::LID;
  throw ConfigError("unknown discretization mode: " + name);
}

const char* to_string(DiscretizationMode mode) {
  switch (mode) {
    case DiscretizationMode::UD: return "ud";
    case DiscretizationMode::SID: return "sid";
    case DiscretizationMode::LID: return "lid";
  }
  return "?";
}

void DiscretizationSpec::validate() const {
  if (!(d_min >= 0.0) || !std::isfinite(d_min) || !std::isfinite(d_max)) {
    throw ConfigError("discretization requires finite d_min >= 0");
  }
  if (mode == DiscretizationMode::SID && !(d_min > 0.0)) {
    throw ConfigError("SID discretization requires d_min > 0");
  }
  if (!(d_min < d_max)) {
    throw ConfigError("discretization requires d_min < d_max");
  }
  if (num_bins < 1) {
    throw ConfigError("discretization requires at least one bin");
  }
  // Strict monotonicity of the edges; cheap at any realistic bin count.
  double prev = bin_edge(*this, 0);
  for (int i = 1; i <= num_bins; ++i) {
    const double e = bin_edge(*this, i);
    if (!(e > prev)) {
      throw ConfigError("bin edges are not strictly increasing");
    }
    prev = e;
  }
}

double bin_edge(const DiscretizationSpec& spec, int i) {
  if (i < 0 || i > spec.num_bins) {
    throw IndexOutOfRange("bin edge index out of range");
  }
  if (i == 0) return spec.d_min;
  if (i == spec.num_bins) return spec.d_max;
  const double lo = spec.d_min;
  const double hi = spec.d_max;
  const double D = static_cast<double>(spec.num_bins);
  const double t = static_cast<double>(i);
  switch (spec.mode) {
    case DiscretizationMode::UD:
      return lo + (hi - lo) * (t / D);
    case DiscretizationMode::SID:
      return std::exp(std::log(lo) + std::log(hi / lo) * (t / D));
    case DiscretizationMode::LID:
      return lo + (hi - lo) * (t * (t + 1.0)) / (D * (D + 1.0));
  }
  return lo;
}

double bin_center(const DiscretizationSpec& spec, int i) {
  if (i < 0 || i >= spec.num_bins) {
    throw IndexOutOfRange("bin center index out of range");
  }
  return 0.5 * (bin_edge(spec, i) + bin_edge(spec, i + 1));
}

double bin_width(const DiscretizationSpec& spec, int i) {
  if (i < 0 || i >= spec.num_bins) {
    throw IndexOutOfRange("bin width index out of range");
  }
  return bin_edge(spec, i + 1) - bin_edge(spec, i);
}

namespace {

// Analytic first guess for the bin of d; fixed up against the exact edges so
// the result always satisfies edge(i) <= d < edge(i+1).
int bin_guess(const DiscretizationSpec& spec, double d) {
  const double lo = spec.d_min;
  const double hi = spec.d_max;
  const double D = static_cast<double>(spec.num_bins);
  double g = 0.0;
  switch (spec.mode) {
    case DiscretizationMode::UD:
      g = (d - lo) / (hi - lo) * D;
      break;
    case DiscretizationMode::SID:
      g = D * std::log(d / lo) / std::log(hi / lo);
      break;
    case DiscretizationMode::LID: {
      const double t = (d - lo) / (hi - lo) * D * (D + 1.0);
      g = 0.5 * (std::sqrt(1.0 + 4.0 * t) - 1.0);
      break;
    }
  }
  const double clamped = std::clamp(g, 0.0, D - 1.0);
  return static_cast<int>(std::floor(clamped));
}

}  // namespace

int depth_to_bin(const DiscretizationSpec& spec, double d) {
  if (!std::isfinite(d)) {
    throw OutOfRange("depth is not finite");
  }
  if (d < spec.d_min || d >= spec.d_max) {
    if (spec.overflow_bin) return spec.num_bins;
    throw OutOfRange("depth outside discretization range");
  }
  int i = bin_guess(spec, d);
  while (i + 1 < spec.num_bins && bin_edge(spec, i + 1) <= d) ++i;
  while (i > 0 && bin_edge(spec, i) > d) --i;
  return i;
}

double depth_to_fractional_bin(const DiscretizationSpec& spec, double d) {
  if (!(d >= spec.d_min && d <= spec.d_max)) {
    throw OutOfRange("depth outside discretization range");
  }
  const int D = spec.num_bins;
  if (D == 1) return 0.0;
  if (d <= bin_center(spec, 0)) return 0.0;
  if (d >= bin_center(spec, D - 1)) return static_cast<double>(D - 1);

  // Locate k with center(k) <= d < center(k+1) starting from the enclosing
  // bin: d below its own bin center interpolates from the previous one.
  int i = bin_guess(spec, d);
  while (i + 1 < D && bin_edge(spec, i + 1) <= d) ++i;
  while (i > 0 && bin_edge(spec, i) > d) --i;
  int k = (d >= bin_center(spec, i)) ? i : i - 1;
  k = std::clamp(k, 0, D - 2);
  const double c0 = bin_center(spec, k);
  const double c1 = bin_center(spec, k + 1);
  return static_cast<double>(k) + (d - c0) / (c1 - c0);
}

}  // namespace bevlift
