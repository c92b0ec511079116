#pragma once

#include <array>
#include <filesystem>
#include <istream>
#include <string>
#include <utility>

#include "bevlift/tensor.hpp"

namespace bevlift {

// Pinhole projection model: a 3x4 matrix P mapping homogeneous 3D points to
// pixel coordinates plus the image/feature geometry of the attached camera.
struct CameraCalibration {
  std::array<double, 12> projection{};  // row-major 3x4
  int image_width = 0;
  int image_height = 0;
  int feature_downsample = 1;

  int feature_width() const { return image_width / feature_downsample; }
  int feature_height() const { return image_height / feature_downsample; }

  double p(int row, int col) const { return projection[row * 4 + col]; }

  void validate() const;
};

// Convenience constructor for an axis-aligned pinhole camera expressed in
// the grid frame (x forward, y lateral, z vertical):
//   u = c_u - f * y / x,  v = c_v - f * z / x,  depth = x.
CameraCalibration make_pinhole(double focal, double c_u, double c_v,
                               int image_width, int image_height,
                               int feature_downsample);

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;  // homogeneous depth of P * [p; 1]
};

// Projects a 3D point through the calibration matrix. Throws
// NonPositiveDepth when the homogeneous depth is <= 1e-6.
Projection project_point(const CameraCalibration& calib,
                         const std::array<double, 3>& point);

// Image pixel coordinates -> continuous feature-map coordinates.
std::pair<double, double> image_to_feature_coords(double u, double v,
                                                  double downsample);

// Axis-aligned metric voxel grid. Dimensions are derived by rounding
// range / voxel_size; combinations that do not reconstruct the range within
// 1e-6 m are rejected as configuration errors.
struct GridSpec {
  std::array<double, 2> x_range{2.0, 46.8};
  std::array<double, 2> y_range{-30.08, 30.08};
  std::array<double, 2> z_range{-3.0, 1.0};
  std::array<double, 3> voxel_size{0.16, 0.16, 0.16};

  std::size_t dim_x() const { return dim(x_range, voxel_size[0]); }
  std::size_t dim_y() const { return dim(y_range, voxel_size[1]); }
  std::size_t dim_z() const { return dim(z_range, voxel_size[2]); }

  void validate() const;

 private:
  static std::size_t dim(const std::array<double, 2>& range, double voxel);
};

// Tensor of shape X x Y x Z x 3 holding the metric center of every voxel.
Tensor voxel_centers(const GridSpec& grid);

// KITTI calibration text: lines of `KEY: v0 v1 ... v11` (12 row-major
// values). Arbitrary keys are accepted; the requested one is selected.
CameraCalibration parse_kitti_calibration(std::istream& in,
                                          const std::string& key,
                                          int image_width, int image_height,
                                          int feature_downsample);
CameraCalibration load_kitti_calibration(const std::filesystem::path& path,
                                         const std::string& key,
                                         int image_width, int image_height,
                                         int feature_downsample);

}  // namespace bevlift
