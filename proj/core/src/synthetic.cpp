#include "bevlift/synthetic.hpp"

#include <atomic>
#include <cmath>
#include <limits>

#include "bevlift/errors.hpp"
#include "bevlift/parallel.hpp"

namespace bevlift {

namespace {

struct Mat3 {
  std::array<double, 9> m{};
};

Mat3 invert_3x3(const std::array<double, 12>& p) {
  const double a = p[0], b = p[1], c = p[2];
  const double d = p[4], e = p[5], f = p[6];
  const double g = p[8], h = p[9], i = p[10];
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  if (std::abs(det) < 1e-12) {
    throw ConfigError("synthetic rendering needs an invertible 3x3 camera block");
  }
  Mat3 inv;
  inv.m = {(e * i - f * h) / det, (c * h - b * i) / det, (b * f - c * e) / det,
           (f * g - d * i) / det, (a * i - c * g) / det, (c * d - a * f) / det,
           (d * h - e * g) / det, (b * g - a * h) / det, (a * e - b * d) / det};
  return inv;
}

std::array<double, 3> mat_vec(const Mat3& m, const std::array<double, 3>& v) {
  return {m.m[0] * v[0] + m.m[1] * v[1] + m.m[2] * v[2],
          m.m[3] * v[0] + m.m[4] * v[1] + m.m[5] * v[2],
          m.m[6] * v[0] + m.m[7] * v[1] + m.m[8] * v[2]};
}

// Ray through pixel (u, v), parameterized by homogeneous depth w:
// X(w) = w * dir - origin_shift.
struct Ray {
  std::array<double, 3> dir{};
  std::array<double, 3> shift{};
};

Ray pixel_ray(const Mat3& inv, const std::array<double, 12>& p, double u, double v) {
  Ray ray;
  ray.dir = mat_vec(inv, {u, v, 1.0});
  ray.shift = mat_vec(inv, {p[3], p[7], p[11]});
  return ray;
}

// Nearest positive-depth intersection with an axis-aligned box, or +inf.
double box_entry_depth(const Ray& ray, const SceneBox& box) {
  double lo = 1e-6;
  double hi = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < 3; ++axis) {
    const double bmin = box.center[axis] - 0.5 * box.extents[axis];
    const double bmax = box.center[axis] + 0.5 * box.extents[axis];
    const double a = ray.dir[axis];
    const double s = ray.shift[axis];
    if (a == 0.0) {
      const double pos = -s;
      if (pos < bmin || pos > bmax) return std::numeric_limits<double>::infinity();
      continue;
    }
    double w0 = (bmin + s) / a;
    double w1 = (bmax + s) / a;
    if (w0 > w1) std::swap(w0, w1);
    lo = std::max(lo, w0);
    hi = std::min(hi, w1);
    if (lo > hi) return std::numeric_limits<double>::infinity();
  }
  return lo;
}

}  // namespace

double ray_depth(const SyntheticScene& scene, const CameraCalibration& calib,
                 double u, double v, const SceneBox** hit) {
  const Mat3 inv = invert_3x3(calib.projection);
  const Ray ray = pixel_ray(inv, calib.projection, u, v);
  double best = scene.background_depth;
  const SceneBox* best_box = nullptr;
  for (const SceneBox& box : scene.boxes) {
    const double w = box_entry_depth(ray, box);
    if (w < best) {
      best = w;
      best_box = &box;
    }
  }
  if (hit) *hit = best_box;
  return best;
}

SyntheticOutputs synth_scene(const SyntheticScene& scene,
                             const DiscretizationSpec& disc,
                             const CameraCalibration& calib) {
  calib.validate();
  disc.validate();
  if (!disc.overflow_bin) {
    throw ConfigError("synthetic logits require an overflow bin");
  }
  if (!(scene.background_depth > 0.0)) {
    throw ConfigError("background depth must be positive");
  }
  if (!(scene.sigma >= 0.0)) {
    throw ConfigError("sigma must be nonnegative");
  }
  std::size_t channels = 0;
  for (const SceneBox& box : scene.boxes) {
    if (box.signature.empty()) {
      throw ConfigError("scene boxes need a feature signature");
    }
    if (channels == 0) channels = box.signature.size();
    if (box.signature.size() != channels) {
      throw ConfigError("scene boxes must share the signature channel count");
    }
    for (double e : box.extents) {
      if (!(e > 0.0)) throw ConfigError("scene box extents must be positive");
    }
  }
  if (channels == 0) channels = 1;

  const std::size_t W = static_cast<std::size_t>(calib.feature_width());
  const std::size_t H = static_cast<std::size_t>(calib.feature_height());
  const std::size_t K = static_cast<std::size_t>(disc.total_bins());
  const double ds = static_cast<double>(calib.feature_downsample);
  const float peak = static_cast<float>(1.0 / std::max(scene.sigma, 1e-3));

  SyntheticOutputs out;
  out.features = Tensor({W, H, channels});
  out.logits = Tensor({W, H, K});
  out.depth = DepthMap(W, H);
  out.fg_mask.assign(W * H, 0);

  const Mat3 inv = invert_3x3(calib.projection);
  std::atomic<std::size_t> visible{0};
  auto feat = out.features.data();
  auto logit = out.logits.data();
  parallel_for(W, [&](std::size_t i) {
    for (std::size_t j = 0; j < H; ++j) {
      // Feature node (i, j) sits at image coordinates (i * ds, j * ds).
      const SceneBox* hit = nullptr;
      const double d = ray_depth(scene, calib, static_cast<double>(i) * ds,
                                 static_cast<double>(j) * ds, &hit);
      const std::size_t p = i * H + j;
      out.depth.values[p] = static_cast<float>(d);
      out.depth.valid[p] = 1;
      const int bin = depth_to_bin(disc, d);
      logit[p * K + static_cast<std::size_t>(bin)] = peak;
      if (hit) {
        visible.fetch_add(1, std::memory_order_relaxed);
        out.fg_mask[p] = 1;
        for (std::size_t c = 0; c < channels; ++c) {
          feat[p * channels + c] = hit->signature[c];
        }
      }
    }
  });
  if (!scene.boxes.empty() && visible.load() == 0) {
    throw DegenerateScene("no scene box is visible from the camera");
  }

  // Surface samples on the image pixel lattice.
  out.cloud.points.resize(static_cast<std::size_t>(calib.image_width) *
                          static_cast<std::size_t>(calib.image_height));
  parallel_for(static_cast<std::size_t>(calib.image_width), [&](std::size_t ui) {
    for (std::size_t vi = 0; vi < static_cast<std::size_t>(calib.image_height); ++vi) {
      const double u = static_cast<double>(ui);
      const double v = static_cast<double>(vi);
      const double d = ray_depth(scene, calib, u, v, nullptr);
      const Ray ray = pixel_ray(inv, calib.projection, u, v);
      auto& pt = out.cloud.points[ui * static_cast<std::size_t>(calib.image_height) + vi];
      for (int a = 0; a < 3; ++a) {
        pt[static_cast<std::size_t>(a)] =
            static_cast<float>(d * ray.dir[a] - ray.shift[a]);
      }
      pt[3] = 1.0f;
    }
  });
  return out;
}

}  // namespace bevlift
