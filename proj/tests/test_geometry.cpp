#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bevlift/geometry.hpp"
#include "test_support.hpp"

using namespace bevlift;

namespace {

CameraCalibration identity_calib() {
  CameraCalibration c;
  c.projection = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  c.image_width = 16;
  c.image_height = 16;
  c.feature_downsample = 4;
  return c;
}

}  // namespace

TEST_CASE("canonical pinhole on-axis point") {
  auto calib = identity_calib();
  auto p = project_point(calib, {0.0, 0.0, 5.0});
  CHECK(p.u == 0.0);
  CHECK(p.v == 0.0);
  CHECK(p.depth == 5.0);
}

TEST_CASE("principal point symmetry for on-axis points") {
  for (double f : {10.0, 500.0, 721.5}) {
    for (double z : {0.5, 3.0, 40.0}) {
      CameraCalibration c;
      c.projection = {f, 0, 320, 0, 0, f, 240, 0, 0, 0, 1, 0};
      c.image_width = 640;
      c.image_height = 480;
      c.feature_downsample = 4;
      auto p = project_point(c, {0.0, 0.0, z});
      CHECK(p.u == doctest::Approx(320.0).epsilon(1e-12));
      CHECK(p.v == doctest::Approx(240.0).epsilon(1e-12));
      CHECK(p.depth == doctest::Approx(z).epsilon(1e-12));
    }
  }
}

TEST_CASE("projection matches a homogeneous multiply-then-divide oracle") {
  // KITTI-style matrix with a baseline term in the last column.
  CameraCalibration c;
  c.projection = {721.5377, 0.0, 609.5593, 44.85728,
                  0.0, 721.5377, 172.854, 0.2163791,
                  0.0, 0.0, 1.0, 0.002745884};
  c.image_width = 1242;
  c.image_height = 375;
  c.feature_downsample = 3;
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> xy(-20.0, 20.0);
  std::uniform_real_distribution<double> zr(2.0, 46.0);
  for (int t = 0; t < 200; ++t) {
    const std::array<double, 3> p{xy(rng), xy(rng), zr(rng)};
    const auto proj = project_point(c, p);
    double q[3] = {0, 0, 0};
    for (int r = 0; r < 3; ++r) {
      q[r] = c.projection[r * 4 + 0] * p[0] + c.projection[r * 4 + 1] * p[1] +
             c.projection[r * 4 + 2] * p[2] + c.projection[r * 4 + 3];
    }
    CHECK(proj.u == doctest::Approx(q[0] / q[2]).epsilon(1e-5));
    CHECK(proj.v == doctest::Approx(q[1] / q[2]).epsilon(1e-5));
    CHECK(proj.depth == doctest::Approx(q[2]).epsilon(1e-5));
  }
}

TEST_CASE("points behind the camera are rejected") {
  auto calib = identity_calib();
  CHECK_THROWS_AS(project_point(calib, {0.0, 0.0, -1.0}), NonPositiveDepth);
  CHECK_THROWS_AS(project_point(calib, {0.0, 0.0, 0.0}), NonPositiveDepth);
}

TEST_CASE("projection is homogeneous-scale invariant in (u, v)") {
  CameraCalibration c;
  c.projection = {500, 0, 320, 10, 0, 480, 240, -3, 0, 0, 1, 0.01};
  c.image_width = 640;
  c.image_height = 480;
  c.feature_downsample = 2;
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> xy(-5.0, 5.0);
  std::uniform_real_distribution<double> zr(1.0, 30.0);
  for (double s : {0.5, 2.0, 13.7}) {
    CameraCalibration scaled = c;
    for (auto& v : scaled.projection) v *= s;
    for (int t = 0; t < 50; ++t) {
      const std::array<double, 3> p{xy(rng), xy(rng), zr(rng)};
      const auto a = project_point(c, p);
      const auto b = project_point(scaled, p);
      CHECK(b.u == doctest::Approx(a.u).epsilon(1e-6));
      CHECK(b.v == doctest::Approx(a.v).epsilon(1e-6));
      CHECK(b.depth == doctest::Approx(a.depth * s).epsilon(1e-9));
    }
  }
}

TEST_CASE("image to feature coordinates") {
  CHECK(image_to_feature_coords(8.0, 12.0, 4.0) == std::pair{2.0, 3.0});
  CHECK(image_to_feature_coords(0.0, 0.0, 4.0) == std::pair{0.0, 0.0});
  CHECK(image_to_feature_coords(10.0, 6.0, 4.0) == std::pair{2.5, 1.5});
  CHECK_THROWS_AS(image_to_feature_coords(1.0, 1.0, 0.5), ConfigError);

  // Composition with scaling is the identity on feature coordinates.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> coord(0.0, 300.0);
  for (int t = 0; t < 100; ++t) {
    const double uf = coord(rng), vf = coord(rng), ds = 1.0 + coord(rng) / 50.0;
    const auto [u2, v2] = image_to_feature_coords(uf * ds, vf * ds, ds);
    CHECK(u2 == doctest::Approx(uf).epsilon(1e-12));
    CHECK(v2 == doctest::Approx(vf).epsilon(1e-12));
  }
}

TEST_CASE("grid dimensions from ranges and voxel size") {
  GridSpec grid;  // defaults hold the 0.16 m voxel geometry
  CHECK(grid.dim_x() == 280);
  CHECK(grid.dim_y() == 376);
  CHECK(grid.dim_z() == 25);
}

TEST_CASE("mismatched range and voxel size is a configuration error") {
  GridSpec grid;
  grid.x_range = {0.0, 1.0};
  grid.voxel_size = {0.3, 0.16, 0.16};
  CHECK_THROWS_AS(grid.validate(), ConfigError);
  grid.voxel_size = {0.25, 0.16, 0.16};
  CHECK_NOTHROW(grid.validate());
  grid.x_range = {1.0, 1.0};
  CHECK_THROWS_AS(grid.validate(), ConfigError);
}

TEST_CASE("voxel centers") {
  SUBCASE("single cell midpoint") {
    GridSpec grid;
    grid.x_range = {0.0, 1.0};
    grid.y_range = {0.0, 1.0};
    grid.z_range = {0.0, 1.0};
    grid.voxel_size = {1.0, 1.0, 1.0};
    Tensor centers = voxel_centers(grid);
    CHECK(centers.shape() == std::vector<std::size_t>{1, 1, 1, 3});
    CHECK(centers[0] == 0.5f);
    CHECK(centers[1] == 0.5f);
    CHECK(centers[2] == 0.5f);
  }
  SUBCASE("default grid shape and first center") {
    GridSpec grid;
    Tensor centers = voxel_centers(grid);
    CHECK(centers.shape() == std::vector<std::size_t>{280, 376, 25, 3});
    CHECK(centers.at(0, 0, 0, 0) == doctest::Approx(2.08).epsilon(1e-6));
    CHECK(centers.at(0, 0, 0, 1) == doctest::Approx(-30.0).epsilon(1e-6));
    CHECK(centers.at(0, 0, 0, 2) == doctest::Approx(-2.92).epsilon(1e-6));
  }
  SUBCASE("centers lie strictly inside the ranges") {
    GridSpec grid;
    grid.x_range = {2.0, 4.0};
    grid.y_range = {-1.0, 1.0};
    grid.z_range = {0.0, 0.5};
    grid.voxel_size = {0.5, 0.25, 0.25};
    Tensor centers = voxel_centers(grid);
    const std::size_t n = centers.size() / 3;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(centers[i * 3 + 0] > grid.x_range[0]);
      CHECK(centers[i * 3 + 0] < grid.x_range[1]);
      CHECK(centers[i * 3 + 1] > grid.y_range[0]);
      CHECK(centers[i * 3 + 1] < grid.y_range[1]);
      CHECK(centers[i * 3 + 2] > grid.z_range[0]);
      CHECK(centers[i * 3 + 2] < grid.z_range[1]);
    }
  }
}

TEST_CASE("kitti calibration parser") {
  const char* text =
      "P0: 7.215377e+02 0.0 6.095593e+02 0.0 0.0 7.215377e+02 1.728540e+02 0.0 "
      "0.0 0.0 1.0 0.0\n"
      "P1: 7.215377e+02 0.0 6.095593e+02 -3.875744e+02 0.0 7.215377e+02 "
      "1.728540e+02 0.0 0.0 0.0 1.0 0.0\n"
      "P2: 7.215377e+02 0.0 6.095593e+02 4.485728e+01 0.0 7.215377e+02 "
      "1.728540e+02 2.163791e-01 0.0 0.0 1.0 2.745884e-03\n"
      "P3: 7.215377e+02 0.0 6.095593e+02 -3.395242e+02 0.0 7.215377e+02 "
      "1.728540e+02 2.199936e+00 0.0 0.0 1.0 2.729905e-03\n"
      "R0_rect: 9.999239e-01 9.837760e-03 -7.445048e-03 -9.869795e-03 "
      "9.999421e-01 -4.278459e-03 7.402527e-03 4.351614e-03 9.999631e-01\n"
      "Tr_velo_to_cam: 7.533745e-03 -9.999714e-01 -6.166020e-04 -4.069766e-03 "
      "1.480249e-02 7.280733e-04 -9.998902e-01 -7.631618e-02 9.998621e-01 "
      "7.523790e-03 1.480755e-02 -2.717806e-01\n";

  SUBCASE("selects the requested key") {
    std::istringstream in(text);
    auto calib = parse_kitti_calibration(in, "P2", 1242, 375, 3);
    CHECK(calib.p(0, 0) == doctest::Approx(721.5377));
    CHECK(calib.p(0, 3) == doctest::Approx(44.85728));
    CHECK(calib.p(2, 3) == doctest::Approx(2.745884e-03));
    CHECK(calib.feature_width() == 414);
  }
  SUBCASE("other keys are reachable") {
    std::istringstream in(text);
    auto calib = parse_kitti_calibration(in, "P1", 1242, 375, 3);
    CHECK(calib.p(0, 3) == doctest::Approx(-387.5744));
  }
  SUBCASE("missing key is a data error") {
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_kitti_calibration(in, "P9", 1242, 375, 3), DataError);
  }
  SUBCASE("R0_rect has nine values, not twelve") {
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_kitti_calibration(in, "R0_rect", 1242, 375, 3), DataError);
  }
}

TEST_CASE("calibration validation") {
  auto calib = identity_calib();
  CHECK_NOTHROW(calib.validate());
  calib.feature_downsample = 3;  // 16 % 3 != 0
  CHECK_THROWS_AS(calib.validate(), ConfigError);
  calib = identity_calib();
  calib.projection[8] = 0.0;
  calib.projection[9] = 0.0;
  calib.projection[10] = 0.0;
  CHECK_THROWS_AS(calib.validate(), ConfigError);
  calib = identity_calib();
  calib.projection[0] = std::nan("");
  CHECK_THROWS_AS(calib.validate(), ConfigError);
}

TEST_CASE("make_pinhole projects the optical axis to the principal point") {
  auto calib = make_pinhole(64.0, 32.0, 16.0, 64, 32, 4);
  auto p = project_point(calib, {10.0, 0.0, 0.0});
  CHECK(p.u == doctest::Approx(32.0));
  CHECK(p.v == doctest::Approx(16.0));
  CHECK(p.depth == doctest::Approx(10.0));
  // Leftward lateral offset decreases u; upward vertical offset decreases v.
  auto q = project_point(calib, {10.0, 1.0, 0.5});
  CHECK(q.u < p.u);
  CHECK(q.v < p.v);
}
