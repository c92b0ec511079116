#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "bevlift/depth_labels.hpp"
#include "bevlift/discretization.hpp"
#include "bevlift/geometry.hpp"
#include "bevlift/tensor.hpp"

namespace bevlift {

// Axis-aligned box with a constant per-channel feature signature.
struct SceneBox {
  std::array<double, 3> center{};
  std::array<double, 3> extents{};
  std::vector<float> signature;
};

// Desk-scale analytic scene: boxes in front of a constant-depth backdrop.
// sigma controls the sharpness of the generated depth logits: near zero
// yields near-one-hot distributions, large values near-uniform ones.
struct SyntheticScene {
  std::vector<SceneBox> boxes;
  double background_depth = 40.0;
  double sigma = 0.0;
};

struct SyntheticOutputs {
  Tensor features;                   // W_F x H_F x C
  Tensor logits;                     // W_F x H_F x (D+1)
  DepthMap depth;                    // dense, feature resolution
  std::vector<std::uint8_t> fg_mask; // W_F x H_F
  PointCloud cloud;                  // surface samples on the image lattice
};

// Renders box faces by a per-pixel ray depth test. Logits place 1/max(sigma,
// 1e-3) on the true depth bin and zero elsewhere. Throws DegenerateScene
// when no box is visible. The calibration's left 3x3 block must be
// invertible (true for make_pinhole cameras).
SyntheticOutputs synth_scene(const SyntheticScene& scene,
                             const DiscretizationSpec& disc,
                             const CameraCalibration& calib);

// Depth along the pixel ray of the nearest box face, or background_depth if
// no box is hit. Exposed for oracle-style verification of the renderer.
double ray_depth(const SyntheticScene& scene, const CameraCalibration& calib,
                 double u, double v, const SceneBox** hit = nullptr);

}  // namespace bevlift
