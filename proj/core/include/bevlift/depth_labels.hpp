#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bevlift/discretization.hpp"
#include "bevlift/geometry.hpp"
#include "bevlift/tensor.hpp"

namespace bevlift {

// LiDAR-style point cloud: x, y, z in meters plus a reflectance value.
struct PointCloud {
  std::vector<std::array<float, 4>> points;
};

// W x H depth image with per-pixel validity, indexed [u][v] row-major in u.
struct DepthMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;

  DepthMap() = default;
  DepthMap(std::size_t w, std::size_t h)
      : width(w), height(h), values(w * h, 0.0f), valid(w * h, 0) {}

  std::size_t index(std::size_t u, std::size_t v) const { return u * height + v; }
};

// Axis-aligned 2D box in image pixels.
struct Box2D {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;
  std::string label;
};

// Projects every point into the image plane; nearest depth wins per pixel
// (z-buffer), points behind the camera or out of bounds are dropped.
DepthMap project_cloud(const CameraCalibration& calib, const PointCloud& cloud);

// Fills invalid pixels by repeated 3x3 min-dilation passes until the map is
// dense. Valid input pixels are left untouched. Throws EmptyDepthMap.
DepthMap complete_depth(const DepthMap& sparse);

// Block-minimum downsampling by an integer factor. Throws
// IndivisibleDimensions when the dimensions do not divide.
DepthMap downsample_depth(const DepthMap& dense, int factor);

// One-hot depth distribution labels (W x H x (D+1)); out-of-range depths
// land in the overflow bin, so the discretization must carry one.
Tensor one_hot_labels(const DepthMap& depth, const DiscretizationSpec& disc);

// Feature-pixel foreground mask: true iff the pixel's image-space block
// center lies inside at least one box (boxes clamped to the image first).
std::vector<std::uint8_t> foreground_mask(const std::vector<Box2D>& boxes,
                                          int image_width, int image_height,
                                          int downsample);

// -- file formats ------------------------------------------------------------

// Little-endian binary stream of float32 (x, y, z, reflectance) quadruplets.
PointCloud read_point_cloud(const std::filesystem::path& path);
void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud);

// 4x4 row-major rigid transform as whitespace-separated text.
std::array<double, 16> read_rigid_transform(const std::filesystem::path& path);
PointCloud apply_rigid_transform(const PointCloud& cloud,
                                 const std::array<double, 16>& transform);

// CSV lines `label,u_min,v_min,u_max,v_max`.
std::vector<Box2D> read_boxes_csv(const std::filesystem::path& path);

}  // namespace bevlift
