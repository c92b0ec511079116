#pragma once

#include <cstdint>
#include <vector>

#include "bevlift/discretization.hpp"
#include "bevlift/geometry.hpp"
#include "bevlift/tensor.hpp"

namespace bevlift {

// Continuous frustum coordinates (u_f, v_f, r) for a set of sample points,
// plus a per-point validity flag. Invalid points (behind the camera, outside
// the feature map, or outside the depth range) sample as zero downstream.
struct FrustumCoords {
  Tensor coords;                    // N x 3, or X x Y x Z x 3 from the voxel path
  std::vector<std::uint8_t> valid;  // one flag per point
};

// Projects each voxel center into the frustum: pixel coordinates scaled to
// feature space and continuous depth mapped to a fractional bin coordinate.
FrustumCoords frustum_sample_coords(const CameraCalibration& calib,
                                    const DiscretizationSpec& disc,
                                    const Tensor& centers);

// Trilinear interpolation of the frustum grid (W x H x D x C) at N points.
// Coordinates within half a cell of the border clamp onto it; points masked
// false or farther out yield the zero vector. Returns N x C.
template <typename T>
BasicTensor<T> trilinear_sample(const BasicTensor<T>& frustum,
                                const BasicTensor<T>& coords,
                                const std::vector<std::uint8_t>& valid);

// Adjoint of trilinear_sample w.r.t. the frustum values: scatters each
// upstream row to its 8 corner cells with the same weights. Accumulation is
// ordered by point index per cell, so results are bit-identical for any
// thread count. Gradients w.r.t. the coordinates are not computed; they are
// fixed geometry here.
template <typename T>
BasicTensor<T> trilinear_sample_backward(const BasicTensor<T>& frustum,
                                         const BasicTensor<T>& coords,
                                         const std::vector<std::uint8_t>& valid,
                                         const BasicTensor<T>& upstream);

// Full frustum -> voxel transformation: voxel centers projected into the
// frustum and sampled trilinearly. Returns X x Y x Z x C.
Tensor frustum_to_voxel(const Tensor& frustum, const CameraCalibration& calib,
                        const DiscretizationSpec& disc, const GridSpec& grid);

// Concatenates the vertical axis along channels: out[x,y,k*C+c] = V[x,y,k,c].
template <typename T>
BasicTensor<T> collapse_to_bev(const BasicTensor<T>& voxels);

// Pointwise affine map + rectifier over BEV channels:
// out[x,y,:] = max(0, W^T in[x,y,:] + b). Normalization statistics are
// expected pre-folded into weights/bias.
template <typename T>
BasicTensor<T> channel_reduce(const BasicTensor<T>& bev,
                              const BasicTensor<T>& weights,
                              const BasicTensor<T>& bias);

}  // namespace bevlift
