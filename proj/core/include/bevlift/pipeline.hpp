#pragma once

#include <optional>

#include "bevlift/discretization.hpp"
#include "bevlift/geometry.hpp"
#include "bevlift/grid_transform.hpp"
#include "bevlift/tensor.hpp"

namespace bevlift {

struct PipelineConfig {
  CameraCalibration calib;
  DiscretizationSpec disc;
  GridSpec grid;
};

// Optional intermediate dumps; the frustum tensor is the memory hot spot, so
// everything is opt-in.
struct PipelineDumps {
  std::optional<Tensor> distribution;  // after softmax, before overflow drop
  std::optional<Tensor> frustum;       // W_F x H_F x D x C
  std::optional<Tensor> voxels;        // X x Y x Z x C
  std::optional<Tensor> bev_raw;       // X x Y x (Z*C), before reduction
  bool want_distribution = false;
  bool want_frustum = false;
  bool want_voxels = false;
  bool want_bev_raw = false;
};

// Image features + depth logits -> BEV grid:
// softmax -> drop overflow bin (when the logits carry one) -> lift ->
// frustum-to-voxel -> collapse -> optional channel reduction.
// reduce_weights / reduce_bias may be null to return the raw Z*C-channel
// collapse.
Tensor run_pipeline(const Tensor& features, const Tensor& logits,
                    const PipelineConfig& config, const Tensor* reduce_weights,
                    const Tensor* reduce_bias, PipelineDumps* dumps = nullptr);

}  // namespace bevlift
