#include "bevlift/geometry.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "bevlift/errors.hpp"
#include "bevlift/parallel.hpp"

namespace bevlift {

void CameraCalibration::validate() const {
  for (double v : projection) {
    if (!std::isfinite(v)) throw ConfigError("calibration matrix has non-finite entries");
  }
  if (p(2, 0) == 0.0 && p(2, 1) == 0.0 && p(2, 2) == 0.0) {
    throw ConfigError("calibration depth row is degenerate (no point coordinate feeds it)");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw ConfigError("image dimensions must be positive");
  }
  if (feature_downsample < 1) {
    throw ConfigError("feature downsample must be >= 1");
  }
  if (image_width % feature_downsample != 0 || image_height % feature_downsample != 0) {
    throw ConfigError("image dimensions must be divisible by the feature downsample");
  }
}

CameraCalibration make_pinhole(double focal, double c_u, double c_v,
                               int image_width, int image_height,
                               int feature_downsample) {
  CameraCalibration calib;
  calib.projection = {c_u, -focal, 0.0, 0.0,
                      c_v, 0.0, -focal, 0.0,
                      1.0, 0.0, 0.0, 0.0};
  calib.image_width = image_width;
  calib.image_height = image_height;
  calib.feature_downsample = feature_downsample;
  calib.validate();
  return calib;
}

Projection project_point(const CameraCalibration& calib,
                         const std::array<double, 3>& point) {
  const auto& m = calib.projection;
  const double w = m[8] * point[0] + m[9] * point[1] + m[10] * point[2] + m[11];
  if (!(w > 1e-6)) {
    throw NonPositiveDepth("point projects behind or onto the camera plane");
  }
  const double a = m[0] * point[0] + m[1] * point[1] + m[2] * point[2] + m[3];
  const double b = m[4] * point[0] + m[5] * point[1] + m[6] * point[2] + m[7];
  return Projection{a / w, b / w, w};
}

std::pair<double, double> image_to_feature_coords(double u, double v,
                                                  double downsample) {
  if (!(downsample >= 1.0)) {
    throw ConfigError("downsample ratio must be >= 1");
  }
  return {u / downsample, v / downsample};
}

std::size_t GridSpec::dim(const std::array<double, 2>& range, double voxel) {
  if (!(voxel > 0.0)) throw ConfigError("voxel size must be positive");
  if (!(range[1] > range[0])) throw ConfigError("grid range must be nonempty");
  const double extent = range[1] - range[0];
  const double cells = std::round(extent / voxel);
  if (cells < 1.0) throw ConfigError("grid range smaller than one voxel");
  if (std::abs(cells * voxel - extent) > 1e-6) {
    throw ConfigError("grid range is not an integer multiple of the voxel size");
  }
  return static_cast<std::size_t>(cells);
}

void GridSpec::validate() const {
  dim_x();
  dim_y();
  dim_z();
}

Tensor voxel_centers(const GridSpec& grid) {
  grid.validate();
  const std::size_t X = grid.dim_x();
  const std::size_t Y = grid.dim_y();
  const std::size_t Z = grid.dim_z();
  Tensor centers({X, Y, Z, 3});
  auto out = centers.data();
  parallel_for(X, [&](std::size_t i) {
    const double cx = grid.x_range[0] + (static_cast<double>(i) + 0.5) * grid.voxel_size[0];
    for (std::size_t j = 0; j < Y; ++j) {
      const double cy = grid.y_range[0] + (static_cast<double>(j) + 0.5) * grid.voxel_size[1];
      for (std::size_t k = 0; k < Z; ++k) {
        const double cz = grid.z_range[0] + (static_cast<double>(k) + 0.5) * grid.voxel_size[2];
        const std::size_t base = ((i * Y + j) * Z + k) * 3;
        out[base + 0] = static_cast<float>(cx);
        out[base + 1] = static_cast<float>(cy);
        out[base + 2] = static_cast<float>(cz);
      }
    }
  });
  return centers;
}

CameraCalibration parse_kitti_calibration(std::istream& in,
                                          const std::string& key,
                                          int image_width, int image_height,
                                          int feature_downsample) {
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string name;
    if (!(ls >> name)) continue;  // blank line
    if (!name.empty() && name.back() == ':') name.pop_back();
    if (name != key) continue;
    CameraCalibration calib;
    for (int i = 0; i < 12; ++i) {
      if (!(ls >> calib.projection[i])) {
        throw DataError("calibration entry '" + key + "' does not hold 12 values");
      }
    }
    double extra;
    if (ls >> extra) {
      throw DataError("calibration entry '" + key + "' holds more than 12 values");
    }
    calib.image_width = image_width;
    calib.image_height = image_height;
    calib.feature_downsample = feature_downsample;
    calib.validate();
    return calib;
  }
  throw DataError("calibration key '" + key + "' not found");
}

CameraCalibration load_kitti_calibration(const std::filesystem::path& path,
                                         const std::string& key,
                                         int image_width, int image_height,
                                         int feature_downsample) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open calibration file: " + path.string());
  return parse_kitti_calibration(in, key, image_width, image_height, feature_downsample);
}

}  // namespace bevlift
