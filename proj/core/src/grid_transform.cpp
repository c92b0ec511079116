#include "bevlift/grid_transform.hpp"

#include <algorithm>
#include <cmath>

#include "bevlift/errors.hpp"
#include "bevlift/parallel.hpp"

namespace bevlift {

FrustumCoords frustum_sample_coords(const CameraCalibration& calib,
                                    const DiscretizationSpec& disc,
                                    const Tensor& centers) {
  calib.validate();
  disc.validate();
  if (centers.rank() < 2 || centers.extent(centers.rank() - 1) != 3) {
    throw ShapeMismatch("frustum_sample_coords expects ... x 3 sample points");
  }
  const std::size_t n = centers.size() / 3;
  const auto& m = calib.projection;
  const double ds = static_cast<double>(calib.feature_downsample);
  const double u_max = static_cast<double>(calib.feature_width() - 1);
  const double v_max = static_cast<double>(calib.feature_height() - 1);

  FrustumCoords out;
  out.coords = Tensor(centers.shape());
  out.valid.assign(n, 0);
  auto src = centers.data();
  auto dst = out.coords.data();
  parallel_for(n, [&](std::size_t i) {
    const double x = static_cast<double>(src[i * 3 + 0]);
    const double y = static_cast<double>(src[i * 3 + 1]);
    const double z = static_cast<double>(src[i * 3 + 2]);
    const double w = m[8] * x + m[9] * y + m[10] * z + m[11];
    double uf = 0.0, vf = 0.0, r = 0.0;
    bool ok = w > 1e-6;
    if (ok) {
      const double u = (m[0] * x + m[1] * y + m[2] * z + m[3]) / w;
      const double v = (m[4] * x + m[5] * y + m[6] * z + m[7]) / w;
      uf = u / ds;
      vf = v / ds;
      ok = uf >= 0.0 && uf <= u_max && vf >= 0.0 && vf <= v_max &&
           w >= disc.d_min && w <= disc.d_max;
      if (ok) r = depth_to_fractional_bin(disc, w);
    }
    dst[i * 3 + 0] = static_cast<float>(uf);
    dst[i * 3 + 1] = static_cast<float>(vf);
    dst[i * 3 + 2] = static_cast<float>(r);
    out.valid[i] = ok ? 1 : 0;
  });
  return out;
}

namespace {

struct CellWeight {
  std::size_t cell;  // flat (u, v, d) index
  double weight;
};

// 8-corner cells and weights for one sample point. Coordinates within half a
// cell of the border clamp onto it; anything farther out gets zero weights.
// Degenerate axes (extent 1) collapse to weight-1 on node 0.
template <typename T>
int corner_weights(const T* coord, std::size_t W, std::size_t H, std::size_t D,
                   CellWeight out[8]) {
  double c[3] = {static_cast<double>(coord[0]), static_cast<double>(coord[1]),
                 static_cast<double>(coord[2])};
  const double ext[3] = {static_cast<double>(W), static_cast<double>(H),
                         static_cast<double>(D)};
  std::size_t i0[3];
  double frac[3];
  for (int a = 0; a < 3; ++a) {
    if (!(c[a] >= -0.5 && c[a] <= ext[a] - 0.5)) return 0;
    const double x = std::clamp(c[a], 0.0, ext[a] - 1.0);
    if (ext[a] == 1.0) {
      i0[a] = 0;
      frac[a] = 0.0;
    } else {
      double f = std::floor(x);
      if (f > ext[a] - 2.0) f = ext[a] - 2.0;
      i0[a] = static_cast<std::size_t>(f);
      frac[a] = x - f;
    }
  }
  const std::size_t step[3] = {H * D, D, 1};
  int count = 0;
  for (int du = 0; du < 2; ++du) {
    const double wu = du ? frac[0] : 1.0 - frac[0];
    for (int dv = 0; dv < 2; ++dv) {
      const double wv = dv ? frac[1] : 1.0 - frac[1];
      for (int dd = 0; dd < 2; ++dd) {
        const double wd = dd ? frac[2] : 1.0 - frac[2];
        const std::size_t off = std::min(i0[0] + du, static_cast<std::size_t>(W - 1)) * step[0] +
                                std::min(i0[1] + dv, static_cast<std::size_t>(H - 1)) * step[1] +
                                std::min(i0[2] + dd, static_cast<std::size_t>(D - 1)) * step[2];
        out[count++] = CellWeight{off, wu * wv * wd};
      }
    }
  }
  return count;
}

void check_sample_args(const std::vector<std::size_t>& frustum_shape,
                       const std::vector<std::size_t>& coord_shape,
                       std::size_t mask_size) {
  if (frustum_shape.size() != 4) {
    throw ShapeMismatch("trilinear_sample expects a W x H x D x C frustum");
  }
  if (coord_shape.empty() || coord_shape.back() != 3) {
    throw ShapeMismatch("trilinear_sample expects ... x 3 coordinates");
  }
  std::size_t n = 1;
  for (std::size_t e : coord_shape) n *= e;
  if (mask_size != n / 3) {
    throw ShapeMismatch("trilinear_sample mask size does not match point count");
  }
}

}  // namespace

template <typename T>
BasicTensor<T> trilinear_sample(const BasicTensor<T>& frustum,
                                const BasicTensor<T>& coords,
                                const std::vector<std::uint8_t>& valid) {
  check_sample_args(frustum.shape(), coords.shape(), valid.size());
  const std::size_t W = frustum.extent(0);
  const std::size_t H = frustum.extent(1);
  const std::size_t D = frustum.extent(2);
  const std::size_t C = frustum.extent(3);
  const std::size_t n = valid.size();
  BasicTensor<T> out({n, C});
  auto pf = frustum.data();
  auto pc = coords.data();
  auto po = out.data();
  parallel_for(n, [&](std::size_t i) {
    T* row = po.data() + i * C;
    for (std::size_t c = 0; c < C; ++c) row[c] = T{};
    if (!valid[i]) return;
    CellWeight cw[8];
    const int m = corner_weights(pc.data() + i * 3, W, H, D, cw);
    if (m == 0) return;
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      for (int k = 0; k < m; ++k) {
        acc += cw[k].weight * static_cast<double>(pf[cw[k].cell * C + c]);
      }
      row[c] = static_cast<T>(acc);
    }
  });
  return out;
}

template <typename T>
BasicTensor<T> trilinear_sample_backward(const BasicTensor<T>& frustum,
                                         const BasicTensor<T>& coords,
                                         const std::vector<std::uint8_t>& valid,
                                         const BasicTensor<T>& upstream) {
  check_sample_args(frustum.shape(), coords.shape(), valid.size());
  const std::size_t W = frustum.extent(0);
  const std::size_t H = frustum.extent(1);
  const std::size_t D = frustum.extent(2);
  const std::size_t C = frustum.extent(3);
  const std::size_t n = valid.size();
  if (upstream.rank() != 2 || upstream.extent(0) != n || upstream.extent(1) != C) {
    throw ShapeMismatch("trilinear_sample_backward expects an N x C upstream");
  }

  // Gather formulation: corner contributions are bucketed by cell with a
  // stable counting sort, then each cell accumulates its own contributions
  // in point order. Deterministic for any thread count.
  struct Entry {
    std::uint32_t point;
    double weight;
  };
  const std::size_t num_cells = W * H * D;
  std::vector<std::uint32_t> cell_of(n * 8, 0);
  std::vector<Entry> entries(n * 8);
  auto pc = coords.data();
  parallel_for(n, [&](std::size_t i) {
    CellWeight cw[8];
    int m = valid[i] ? corner_weights(pc.data() + i * 3, W, H, D, cw) : 0;
    for (int k = 0; k < 8; ++k) {
      const std::size_t e = i * 8 + static_cast<std::size_t>(k);
      if (k < m) {
        cell_of[e] = static_cast<std::uint32_t>(cw[k].cell);
        entries[e] = Entry{static_cast<std::uint32_t>(i), cw[k].weight};
      } else {
        cell_of[e] = 0;
        entries[e] = Entry{static_cast<std::uint32_t>(i), 0.0};
      }
    }
  });

  std::vector<std::size_t> offsets(num_cells + 1, 0);
  for (std::uint32_t cell : cell_of) ++offsets[cell + 1];
  for (std::size_t c = 0; c < num_cells; ++c) offsets[c + 1] += offsets[c];
  std::vector<Entry> sorted(entries.size());
  {
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t e = 0; e < entries.size(); ++e) {
      sorted[cursor[cell_of[e]]++] = entries[e];
    }
  }

  BasicTensor<T> grad(frustum.shape());
  auto pu = upstream.data();
  auto pg = grad.data();
  parallel_for(num_cells, [&](std::size_t cell) {
    const std::size_t lo = offsets[cell];
    const std::size_t hi = offsets[cell + 1];
    if (lo == hi) return;
    for (std::size_t c = 0; c < C; ++c) {
      double acc = 0.0;
      for (std::size_t e = lo; e < hi; ++e) {
        acc += sorted[e].weight *
               static_cast<double>(pu[static_cast<std::size_t>(sorted[e].point) * C + c]);
      }
      pg[cell * C + c] = static_cast<T>(acc);
    }
  });
  return grad;
}

Tensor frustum_to_voxel(const Tensor& frustum, const CameraCalibration& calib,
                        const DiscretizationSpec& disc, const GridSpec& grid) {
  if (frustum.rank() != 4) {
    throw ShapeMismatch("frustum_to_voxel expects a W x H x D x C frustum");
  }
  if (frustum.extent(0) != static_cast<std::size_t>(calib.feature_width()) ||
      frustum.extent(1) != static_cast<std::size_t>(calib.feature_height())) {
    throw ShapeMismatch("frustum pixel grid does not match the calibration");
  }
  if (frustum.extent(2) != static_cast<std::size_t>(disc.num_bins)) {
    throw ShapeMismatch("frustum depth axis does not match the discretization");
  }
  const Tensor centers = voxel_centers(grid);
  const FrustumCoords fc = frustum_sample_coords(calib, disc, centers);
  const std::size_t n = fc.valid.size();
  Tensor sampled =
      trilinear_sample(frustum, fc.coords.reshaped({n, 3}), fc.valid);
  return sampled.reshaped({grid.dim_x(), grid.dim_y(), grid.dim_z(), frustum.extent(3)});
}

template <typename T>
BasicTensor<T> collapse_to_bev(const BasicTensor<T>& voxels) {
  if (voxels.rank() != 4) {
    throw ShapeMismatch("collapse_to_bev expects an X x Y x Z x C grid");
  }
  const std::size_t X = voxels.extent(0);
  const std::size_t Y = voxels.extent(1);
  const std::size_t Z = voxels.extent(2);
  const std::size_t C = voxels.extent(3);
  // z-major channel order: out[x,y,k*C+c] = V[x,y,k,c] is a pure reshape of
  // the row-major layout.
  return voxels.reshaped({X, Y, Z * C});
}

template <typename T>
BasicTensor<T> channel_reduce(const BasicTensor<T>& bev,
                              const BasicTensor<T>& weights,
                              const BasicTensor<T>& bias) {
  if (bev.rank() != 3) {
    throw ShapeMismatch("channel_reduce expects an X x Y x C grid");
  }
  if (weights.rank() != 2 || weights.extent(0) != bev.extent(2)) {
    throw ShapeMismatch("channel_reduce weights must be C_in x C_out");
  }
  const std::size_t c_out = weights.extent(1);
  if (bias.rank() != 1 || bias.extent(0) != c_out) {
    throw ShapeMismatch("channel_reduce bias must hold C_out entries");
  }
  const std::size_t X = bev.extent(0);
  const std::size_t Y = bev.extent(1);
  const std::size_t c_in = bev.extent(2);
  BasicTensor<T> out({X, Y, c_out});
  auto pb = bev.data();
  auto pw = weights.data();
  auto pz = bias.data();
  auto po = out.data();
  parallel_for(X * Y, [&](std::size_t p) {
    const T* in = pb.data() + p * c_in;
    T* row = po.data() + p * c_out;
    for (std::size_t o = 0; o < c_out; ++o) {
      double acc = static_cast<double>(pz[o]);
      for (std::size_t i = 0; i < c_in; ++i) {
        acc += static_cast<double>(pw[i * c_out + o]) * static_cast<double>(in[i]);
      }
      row[o] = static_cast<T>(acc > 0.0 ? acc : 0.0);
    }
  });
  return out;
}

template BasicTensor<float> trilinear_sample(const BasicTensor<float>&,
                                             const BasicTensor<float>&,
                                             const std::vector<std::uint8_t>&);
template BasicTensor<double> trilinear_sample(const BasicTensor<double>&,
                                              const BasicTensor<double>&,
                                              const std::vector<std::uint8_t>&);
template BasicTensor<float> trilinear_sample_backward(const BasicTensor<float>&,
                                                      const BasicTensor<float>&,
                                                      const std::vector<std::uint8_t>&,
                                                      const BasicTensor<float>&);
template BasicTensor<double> trilinear_sample_backward(const BasicTensor<double>&,
                                                       const BasicTensor<double>&,
                                                       const std::vector<std::uint8_t>&,
                                                       const BasicTensor<double>&);
template BasicTensor<float> collapse_to_bev(const BasicTensor<float>&);
template BasicTensor<double> collapse_to_bev(const BasicTensor<double>&);
template BasicTensor<float> channel_reduce(const BasicTensor<float>&,
                                           const BasicTensor<float>&,
                                           const BasicTensor<float>&);
template BasicTensor<double> channel_reduce(const BasicTensor<double>&,
                                            const BasicTensor<double>&,
                                            const BasicTensor<double>&);

}  // namespace bevlift
