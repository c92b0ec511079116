#include "bevlift/pipeline.hpp"

#include "bevlift/errors.hpp"
#include "bevlift/frustum.hpp"

namespace bevlift {

Tensor run_pipeline(const Tensor& features, const Tensor& logits,
                    const PipelineConfig& config, const Tensor* reduce_weights,
                    const Tensor* reduce_bias, PipelineDumps* dumps) {
  config.calib.validate();
  config.disc.validate();
  config.grid.validate();
  if (logits.rank() != 3 || features.rank() != 3) {
    throw ShapeMismatch("pipeline expects W x H x K logits and W x H x C features");
  }
  const std::size_t expected = static_cast<std::size_t>(config.disc.total_bins());
  if (logits.extent(2) != expected) {
    throw ShapeMismatch("logit bin count does not match the discretization");
  }

  Tensor dist = softmax_normalize(logits);
  if (dumps && dumps->want_distribution) dumps->distribution = dist;
  if (config.disc.overflow_bin) {
    dist = drop_overflow_bin(dist, config.disc.num_bins);
  }

  Tensor frustum = lift(dist, features);
  if (dumps && dumps->want_frustum) dumps->frustum = frustum;

  Tensor voxels = frustum_to_voxel(frustum, config.calib, config.disc, config.grid);
  if (dumps && dumps->want_voxels) dumps->voxels = voxels;

  Tensor bev = collapse_to_bev(voxels);
  if (dumps && dumps->want_bev_raw) dumps->bev_raw = bev;

  if (reduce_weights) {
    if (reduce_weights->rank() != 2) {
      throw ShapeMismatch("reduction weights must be a C_in x C_out matrix");
    }
    Tensor bias;
    if (reduce_bias) {
      bias = *reduce_bias;
    } else {
      bias = Tensor({reduce_weights->extent(1)});
    }
    bev = channel_reduce(bev, *reduce_weights, bias);
  }
  return bev;
}

}  // namespace bevlift
