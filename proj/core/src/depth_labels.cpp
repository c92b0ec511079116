#include "bevlift/depth_labels.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "bevlift/errors.hpp"
#include "bevlift/parallel.hpp"

namespace bevlift {

DepthMap project_cloud(const CameraCalibration& calib, const PointCloud& cloud) {
  calib.validate();
  DepthMap map(static_cast<std::size_t>(calib.image_width),
               static_cast<std::size_t>(calib.image_height));
  const auto& m = calib.projection;
  for (const auto& pt : cloud.points) {
    const double x = pt[0], y = pt[1], z = pt[2];
    const double w = m[8] * x + m[9] * y + m[10] * z + m[11];
    if (!(w > 1e-6)) continue;
    const double u = (m[0] * x + m[1] * y + m[2] * z + m[3]) / w;
    const double v = (m[4] * x + m[5] * y + m[6] * z + m[7]) / w;
    const long ui = std::lround(u);
    const long vi = std::lround(v);
    if (ui < 0 || vi < 0 || ui >= calib.image_width || vi >= calib.image_height) continue;
    const std::size_t idx = map.index(static_cast<std::size_t>(ui), static_cast<std::size_t>(vi));
    const float depth = static_cast<float>(w);
    if (!map.valid[idx] || depth < map.values[idx]) {
      map.values[idx] = depth;
      map.valid[idx] = 1;
    }
  }
  return map;
}

DepthMap complete_depth(const DepthMap& sparse) {
  if (std::find(sparse.valid.begin(), sparse.valid.end(), 1) == sparse.valid.end()) {
    throw EmptyDepthMap("depth completion requires at least one valid pixel");
  }
  DepthMap cur = sparse;
  const std::size_t W = sparse.width;
  const std::size_t H = sparse.height;
  std::size_t remaining = std::count(cur.valid.begin(), cur.valid.end(), 0);
  DepthMap next = cur;
  while (remaining > 0) {
    // Synchronous pass: fill from the previous generation only, so the
    // result is independent of traversal order.
    parallel_for(W, [&](std::size_t u) {
      for (std::size_t v = 0; v < H; ++v) {
        const std::size_t idx = cur.index(u, v);
        if (cur.valid[idx]) continue;
        float best = 0.0f;
        bool found = false;
        const std::size_t u0 = u > 0 ? u - 1 : 0;
        const std::size_t u1 = std::min(u + 1, W - 1);
        const std::size_t v0 = v > 0 ? v - 1 : 0;
        const std::size_t v1 = std::min(v + 1, H - 1);
        for (std::size_t uu = u0; uu <= u1; ++uu) {
          for (std::size_t vv = v0; vv <= v1; ++vv) {
            const std::size_t nb = cur.index(uu, vv);
            if (!cur.valid[nb]) continue;
            if (!found || cur.values[nb] < best) {
              best = cur.values[nb];
              found = true;
            }
          }
        }
        next.values[idx] = found ? best : cur.values[idx];
        next.valid[idx] = found ? 1 : 0;
      }
    });
    std::size_t still = std::count(next.valid.begin(), next.valid.end(), 0);
    cur = next;
    remaining = still;
  }
  return cur;
}

DepthMap downsample_depth(const DepthMap& dense, int factor) {
  if (factor < 1) throw ConfigError("downsample factor must be >= 1");
  if (factor == 1) return dense;
  const std::size_t f = static_cast<std::size_t>(factor);
  if (dense.width % f != 0 || dense.height % f != 0) {
    throw IndivisibleDimensions("depth map dimensions are not divisible by the factor");
  }
  DepthMap out(dense.width / f, dense.height / f);
  parallel_for(out.width, [&](std::size_t u) {
    for (std::size_t v = 0; v < out.height; ++v) {
      float best = 0.0f;
      bool found = false;
      for (std::size_t du = 0; du < f; ++du) {
        for (std::size_t dv = 0; dv < f; ++dv) {
          const std::size_t idx = dense.index(u * f + du, v * f + dv);
          if (!dense.valid[idx]) continue;
          if (!found || dense.values[idx] < best) {
            best = dense.values[idx];
            found = true;
          }
        }
      }
      const std::size_t o = out.index(u, v);
      out.values[o] = best;
      out.valid[o] = found ? 1 : 0;
    }
  });
  return out;
}

Tensor one_hot_labels(const DepthMap& depth, const DiscretizationSpec& disc) {
  disc.validate();
  if (!disc.overflow_bin) {
    throw ConfigError("one_hot_labels requires an overflow bin");
  }
  if (std::find(depth.valid.begin(), depth.valid.end(), 0) != depth.valid.end()) {
    throw DataError("one_hot_labels requires a dense depth map");
  }
  for (float v : depth.values) {
    if (!std::isfinite(v)) throw DataError("depth map holds non-finite values");
  }
  const std::size_t K = static_cast<std::size_t>(disc.total_bins());
  Tensor labels({depth.width, depth.height, K});
  auto out = labels.data();
  parallel_for(depth.width * depth.height, [&](std::size_t p) {
    const int bin = depth_to_bin(disc, static_cast<double>(depth.values[p]));
    out[p * K + static_cast<std::size_t>(bin)] = 1.0f;
  });
  return labels;
}

std::vector<std::uint8_t> foreground_mask(const std::vector<Box2D>& boxes,
                                          int image_width, int image_height,
                                          int downsample) {
  if (downsample < 1 || image_width % downsample != 0 || image_height % downsample != 0) {
    throw ConfigError("foreground_mask: image dimensions must divide by the downsample");
  }
  const std::size_t W = static_cast<std::size_t>(image_width / downsample);
  const std::size_t H = static_cast<std::size_t>(image_height / downsample);
  std::vector<std::uint8_t> mask(W * H, 0);
  std::vector<Box2D> clamped;
  clamped.reserve(boxes.size());
  for (const Box2D& b : boxes) {
    Box2D c = b;
    c.u_min = std::clamp(c.u_min, 0.0, static_cast<double>(image_width));
    c.u_max = std::clamp(c.u_max, 0.0, static_cast<double>(image_width));
    c.v_min = std::clamp(c.v_min, 0.0, static_cast<double>(image_height));
    c.v_max = std::clamp(c.v_max, 0.0, static_cast<double>(image_height));
    if (c.u_min < c.u_max && c.v_min < c.v_max) clamped.push_back(c);
  }
  const double ds = static_cast<double>(downsample);
  for (std::size_t u = 0; u < W; ++u) {
    const double cu = (static_cast<double>(u) + 0.5) * ds;
    for (std::size_t v = 0; v < H; ++v) {
      const double cv = (static_cast<double>(v) + 0.5) * ds;
      for (const Box2D& b : clamped) {
        if (cu >= b.u_min && cu < b.u_max && cv >= b.v_min && cv < b.v_max) {
          mask[u * H + v] = 1;
          break;
        }
      }
    }
  }
  return mask;
}

PointCloud read_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open point cloud: " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff bytes = in.tellg();
  in.seekg(0, std::ios::beg);
  if (bytes % 16 != 0) {
    throw DataError("point cloud size is not a multiple of 16 bytes");
  }
  PointCloud cloud;
  cloud.points.resize(static_cast<std::size_t>(bytes / 16));
  std::vector<unsigned char> raw(static_cast<std::size_t>(bytes));
  if (bytes > 0) in.read(reinterpret_cast<char*>(raw.data()), bytes);
  if (bytes > 0 && !in) throw DataError("short read on point cloud");
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    for (int c = 0; c < 4; ++c) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(raw[i * 16 + c * 4 + b]) << (8 * b);
      }
      cloud.points[i][c] = std::bit_cast<float>(bits);
    }
  }
  return cloud;
}

void write_point_cloud(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write point cloud: " + path.string());
  std::vector<unsigned char> raw(cloud.points.size() * 16);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    for (int c = 0; c < 4; ++c) {
      const std::uint32_t bits = std::bit_cast<std::uint32_t>(cloud.points[i][c]);
      for (int b = 0; b < 4; ++b) {
        raw[i * 16 + c * 4 + b] = static_cast<unsigned char>((bits >> (8 * b)) & 0xff);
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw DataError("short write on point cloud");
}

std::array<double, 16> read_rigid_transform(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open transform file: " + path.string());
  std::array<double, 16> m{};
  for (double& v : m) {
    if (!(in >> v)) throw DataError("transform file must hold 16 values");
  }
  return m;
}

PointCloud apply_rigid_transform(const PointCloud& cloud,
                                 const std::array<double, 16>& t) {
  PointCloud out;
  out.points.resize(cloud.points.size());
  parallel_for(cloud.points.size(), [&](std::size_t i) {
    const auto& p = cloud.points[i];
    const double x = p[0], y = p[1], z = p[2];
    for (int r = 0; r < 3; ++r) {
      out.points[i][r] = static_cast<float>(t[r * 4 + 0] * x + t[r * 4 + 1] * y +
                                            t[r * 4 + 2] * z + t[r * 4 + 3]);
    }
    out.points[i][3] = p[3];
  });
  return out;
}

std::vector<Box2D> read_boxes_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open boxes file: " + path.string());
  std::vector<Box2D> boxes;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    Box2D box;
    std::string field;
    if (!std::getline(ls, box.label, ',')) continue;
    const auto bad = [&]() {
      return DataError("malformed box on line " + std::to_string(lineno) + " of " +
                       path.string());
    };
    double* coords[4] = {&box.u_min, &box.v_min, &box.u_max, &box.v_max};
    for (double* c : coords) {
      if (!std::getline(ls, field, ',')) throw bad();
      try {
        *c = std::stod(field);
      } catch (const std::exception&) {
        throw bad();
      }
    }
    if (!(box.u_min < box.u_max && box.v_min < box.v_max)) throw bad();
    boxes.push_back(std::move(box));
  }
  return boxes;
}

}  // namespace bevlift
