// bevlift command line tool: depth discretization tables, frustum lifting,
// grid transforms, label generation, losses, entropy reports, gradient
// checks and the end-to-end image-to-BEV pipeline over CDTN tensor files.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "bevlift/depth_labels.hpp"
#include "bevlift/diagnostics.hpp"
#include "bevlift/discretization.hpp"
#include "bevlift/errors.hpp"
#include "bevlift/frustum.hpp"
#include "bevlift/geometry.hpp"
#include "bevlift/grid_transform.hpp"
#include "bevlift/losses.hpp"
#include "bevlift/parallel.hpp"
#include "bevlift/pipeline.hpp"
#include "bevlift/synthetic.hpp"
#include "bevlift/tensor_io.hpp"

namespace {

using namespace bevlift;

std::string format_scalar(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// -- shared option groups ----------------------------------------------------

struct DiscOptions {
  std::string mode = "lid";
  double d_min = 2.0;
  double d_max = 46.8;
  int bins = 80;
  bool overflow = true;

  void attach(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "Discretization mode: ud, sid or lid")
        ->capture_default_str();
    cmd->add_option("--d-min", d_min, "Lower depth bound (m)")->capture_default_str();
    cmd->add_option("--d-max", d_max, "Upper depth bound (m)")->capture_default_str();
    cmd->add_option("--bins", bins, "Number of depth bins")->capture_default_str();
    cmd->add_flag("--overflow-bin,!--no-overflow-bin", overflow,
                  "Extra bin for out-of-range depths")
        ->capture_default_str();
  }

  DiscretizationSpec spec() const {
    DiscretizationSpec s;
    s.mode = parse_discretization_mode(mode);
    s.d_min = d_min;
    s.d_max = d_max;
    s.num_bins = bins;
    s.overflow_bin = overflow;
    s.validate();
    return s;
  }
};

struct CalibOptions {
  std::string calib_file;
  std::string calib_key = "P2";
  double focal = 0.0;
  double c_u = -1.0;
  double c_v = -1.0;
  int image_width = 256;
  int image_height = 128;
  int downsample = 4;

  void attach(CLI::App* cmd) {
    cmd->add_option("--calib", calib_file, "KITTI calibration text file");
    cmd->add_option("--calib-key", calib_key, "Projection key to select")
        ->capture_default_str();
    cmd->add_option("--focal", focal, "Pinhole focal length (px), grid-frame camera");
    cmd->add_option("--cu", c_u, "Pinhole principal point u (default W/2)");
    cmd->add_option("--cv", c_v, "Pinhole principal point v (default H/2)");
    cmd->add_option("--image-width", image_width, "Image width (px)")
        ->capture_default_str();
    cmd->add_option("--image-height", image_height, "Image height (px)")
        ->capture_default_str();
    cmd->add_option("--downsample", downsample, "Image-to-feature downsample ratio")
        ->capture_default_str();
  }

  CameraCalibration calibration() const {
    if (!calib_file.empty()) {
      return load_kitti_calibration(calib_file, calib_key, image_width,
                                    image_height, downsample);
    }
    if (focal <= 0.0) {
      throw ConfigError("either --calib or a positive --focal is required");
    }
    const double cu = c_u < 0.0 ? image_width / 2.0 : c_u;
    const double cv = c_v < 0.0 ? image_height / 2.0 : c_v;
    return make_pinhole(focal, cu, cv, image_width, image_height, downsample);
  }
};

struct GridOptions {
  std::vector<double> x_range = {2.0, 46.8};
  std::vector<double> y_range = {-30.08, 30.08};
  std::vector<double> z_range = {-3.0, 1.0};
  std::vector<double> voxel = {0.16, 0.16, 0.16};

  void attach(CLI::App* cmd) {
    cmd->add_option("--x-range", x_range, "Grid x range (m): min max")
        ->expected(2)
        ->capture_default_str();
    cmd->add_option("--y-range", y_range, "Grid y range (m): min max")
        ->expected(2)
        ->capture_default_str();
    cmd->add_option("--z-range", z_range, "Grid z range (m): min max")
        ->expected(2)
        ->capture_default_str();
    cmd->add_option("--voxel", voxel, "Voxel size (m): vx vy vz")
        ->expected(3)
        ->capture_default_str();
  }

  GridSpec spec() const {
    GridSpec g;
    g.x_range = {x_range[0], x_range[1]};
    g.y_range = {y_range[0], y_range[1]};
    g.z_range = {z_range[0], z_range[1]};
    g.voxel_size = {voxel[0], voxel[1], voxel[2]};
    g.validate();
    return g;
  }
};

std::vector<std::uint8_t> load_mask(const std::string& path, std::size_t pixels) {
  if (path.empty()) return std::vector<std::uint8_t>(pixels, 0);
  Tensor t = read_tensor_f32(path);
  if (t.size() != pixels) {
    throw ShapeMismatch("mask pixel count does not match the distribution grid");
  }
  std::vector<std::uint8_t> mask(pixels);
  for (std::size_t i = 0; i < pixels; ++i) mask[i] = t[i] != 0.0f ? 1 : 0;
  return mask;
}

Tensor depth_map_tensor(const DepthMap& map) {
  Tensor t({map.width, map.height});
  for (std::size_t i = 0; i < map.values.size(); ++i) t[i] = map.values[i];
  return t;
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw DataError("cannot write output file: " + path);
  return file;
}

// -- subcommands --------------------------------------------------------------

int run_discretize(const DiscOptions& disc_opts, const std::string& output) {
  const DiscretizationSpec spec = disc_opts.spec();
  std::ofstream file;
  std::ostream& out = open_output(file, output);
  out << "index,edge,center,width\n";
  for (int i = 0; i < spec.num_bins; ++i) {
    out << i << ',' << format_scalar(bin_edge(spec, i)) << ','
        << format_scalar(bin_center(spec, i)) << ','
        << format_scalar(bin_width(spec, i)) << '\n';
  }
  return 0;
}

int run_lift(const DiscOptions& disc_opts, const std::string& logits_path,
             const std::string& features_path, const std::string& output) {
  const DiscretizationSpec spec = disc_opts.spec();
  Tensor logits = read_tensor_f32(logits_path);
  Tensor features = read_tensor_f32(features_path);
  if (logits.rank() != 3 ||
      logits.extent(2) != static_cast<std::size_t>(spec.total_bins())) {
    throw ShapeMismatch("logits must be W x H x K with K matching the discretization");
  }
  Tensor dist = softmax_normalize(logits);
  if (spec.overflow_bin) dist = drop_overflow_bin(dist, spec.num_bins);
  write_tensor(output, lift(dist, features));
  return 0;
}

int run_transform(const CalibOptions& calib_opts, const DiscOptions& disc_opts,
                  const GridOptions& grid_opts, const std::string& frustum_path,
                  const std::string& output, bool collapse,
                  const std::string& reduce_path, const std::string& bias_path) {
  const CameraCalibration calib = calib_opts.calibration();
  const DiscretizationSpec disc = disc_opts.spec();
  const GridSpec grid = grid_opts.spec();
  Tensor frustum = read_tensor_f32(frustum_path);
  Tensor voxels = frustum_to_voxel(frustum, calib, disc, grid);
  if (!collapse && reduce_path.empty()) {
    write_tensor(output, voxels);
    return 0;
  }
  Tensor bev = collapse_to_bev(voxels);
  if (!reduce_path.empty()) {
    Tensor weights = read_tensor_f32(reduce_path);
    if (weights.rank() != 2) {
      throw ShapeMismatch("reduction weights must be a C_in x C_out matrix");
    }
    Tensor bias = bias_path.empty() ? Tensor({weights.extent(1)})
                                    : read_tensor_f32(bias_path);
    bev = channel_reduce(bev, weights, bias);
  }
  write_tensor(output, bev);
  return 0;
}

int run_labels(const CalibOptions& calib_opts, const DiscOptions& disc_opts,
               const std::string& cloud_path, const std::string& transform_path,
               const std::string& boxes_path, const std::string& output,
               const std::string& mask_output, const std::string& depth_output) {
  const CameraCalibration calib = calib_opts.calibration();
  DiscretizationSpec disc = disc_opts.spec();
  if (!disc.overflow_bin) {
    throw ConfigError("label generation requires the overflow bin");
  }
  PointCloud cloud = read_point_cloud(cloud_path);
  if (!transform_path.empty()) {
    cloud = apply_rigid_transform(cloud, read_rigid_transform(transform_path));
  }
  DepthMap sparse = project_cloud(calib, cloud);
  DepthMap dense = complete_depth(sparse);
  DepthMap feat = downsample_depth(dense, calib.feature_downsample);
  write_tensor(output, one_hot_labels(feat, disc));
  if (!depth_output.empty()) write_tensor(depth_output, depth_map_tensor(feat));
  if (!mask_output.empty()) {
    std::vector<Box2D> boxes;
    if (!boxes_path.empty()) boxes = read_boxes_csv(boxes_path);
    const auto mask = foreground_mask(boxes, calib.image_width, calib.image_height,
                                      calib.feature_downsample);
    Tensor t({feat.width, feat.height});
    for (std::size_t i = 0; i < mask.size(); ++i) t[i] = mask[i] ? 1.0f : 0.0f;
    write_tensor(mask_output, t);
  }
  return 0;
}

int run_loss(const std::string& dist_path, const std::string& labels_path,
             const std::string& mask_path, const LossWeights& weights,
             bool total, double l_cls, double l_reg, double l_dir) {
  Tensor dist = read_tensor_f32(dist_path);
  Tensor labels = read_tensor_f32(labels_path);
  if (dist.rank() != 3) throw ShapeMismatch("distribution tensor must be W x H x K");
  const auto mask = load_mask(mask_path, dist.extent(0) * dist.extent(1));
  const double l_depth = depth_loss(dist, labels, mask, weights);
  const double value =
      total ? total_loss(l_depth, l_cls, l_reg, l_dir, weights) : l_depth;
  if (!std::isfinite(value)) throw NonFiniteInput("loss evaluated to a non-finite value");
  std::cout << format_scalar(value) << "\n";
  return 0;
}

int run_entropy(const std::string& dist_path, const std::string& labels_path,
                const std::string& mask_path, const std::string& output) {
  Tensor dist = read_tensor_f32(dist_path);
  Tensor labels = read_tensor_f32(labels_path);
  if (dist.rank() != 3) throw ShapeMismatch("distribution tensor must be W x H x K");
  const auto mask = load_mask(mask_path, dist.extent(0) * dist.extent(1));
  const auto rows = entropy_report(dist, labels, mask);
  std::ofstream file;
  std::ostream& out = open_output(file, output);
  out << "gt_bin,group,count,mean_entropy,ci_low,ci_high\n";
  for (const auto& row : rows) {
    out << row.gt_bin << ',' << (row.foreground ? "foreground" : "background")
        << ',' << row.count << ',' << format_scalar(row.mean_entropy) << ','
        << format_scalar(row.ci_low) << ',' << format_scalar(row.ci_high) << '\n';
  }
  return 0;
}

// Randomized verification of every backward operation, in 64-bit.
int run_gradcheck(double tol, double eps_scale, unsigned seed) {
  std::mt19937 rng(seed);
  auto rand_tensor = [&](std::vector<std::size_t> shape, double lo, double hi) {
    TensorD t(std::move(shape));
    std::uniform_real_distribution<double> val(lo, hi);
    for (auto& v : t.data()) v = val(rng);
    return t;
  };
  const std::size_t W = 3, H = 3, D = 4, C = 2, K = D + 1;

  TensorD logits = rand_tensor({W, H, K}, -2.0, 2.0);
  TensorD features = rand_tensor({W, H, C}, -1.0, 1.0);
  TensorD upstream_k = rand_tensor({W, H, K}, -1.0, 1.0);
  TensorD upstream_g = rand_tensor({W, H, D, C}, -1.0, 1.0);
  TensorD labels({W, H, K});
  std::uniform_int_distribution<std::size_t> pick(0, K - 1);
  std::vector<std::uint8_t> fg(W * H);
  std::bernoulli_distribution coin(0.5);
  for (std::size_t p = 0; p < W * H; ++p) {
    labels[p * K + pick(rng)] = 1.0;
    fg[p] = coin(rng) ? 1 : 0;
  }
  LossWeights weights;
  TensorD dist = softmax_normalize(logits);
  TensorD dist_d = drop_overflow_bin(dist, static_cast<int>(D));

  struct Row {
    const char* name;
    double err;
  };
  std::vector<Row> rows;

  {
    auto f = [&](const TensorD& x) {
      TensorD d = softmax_normalize(x);
      double s = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) s += d[i] * upstream_k[i];
      return s;
    };
    rows.push_back({"softmax_backward",
                    gradcheck(f, softmax_backward(dist, upstream_k), logits,
                              eps_scale)
                        .max_rel_error});
  }
  {
    auto [gd, gf] = lift_backward(dist_d, features, upstream_g);
    auto f_dist = [&](const TensorD& x) {
      TensorD g = lift(x, features);
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * upstream_g[i];
      return s;
    };
    rows.push_back(
        {"lift_backward/dist", gradcheck(f_dist, gd, dist_d, eps_scale).max_rel_error});
    auto f_feat = [&](const TensorD& x) {
      TensorD g = lift(dist_d, x);
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * upstream_g[i];
      return s;
    };
    rows.push_back({"lift_backward/features",
                    gradcheck(f_feat, gf, features, eps_scale).max_rel_error});
  }
  {
    TensorD frustum = rand_tensor({4, 4, 4, C}, -1.0, 1.0);
    const std::size_t n = 24;
    TensorD coords = rand_tensor({n, 3}, -0.4, 3.4);
    std::vector<std::uint8_t> mask(n, 1);
    TensorD upstream = rand_tensor({n, C}, -1.0, 1.0);
    TensorD analytic = trilinear_sample_backward(frustum, coords, mask, upstream);
    auto f = [&](const TensorD& x) {
      TensorD s = trilinear_sample(x, coords, mask);
      double acc = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) acc += s[i] * upstream[i];
      return acc;
    };
    rows.push_back({"trilinear_sample_backward",
                    gradcheck(f, analytic, frustum, eps_scale).max_rel_error});
  }
  {
    TensorD analytic = depth_loss_backward(dist, labels, fg, weights);
    auto f = [&](const TensorD& x) { return depth_loss(x, labels, fg, weights); };
    rows.push_back({"depth_loss_backward",
                    gradcheck(f, analytic, dist, eps_scale).max_rel_error});
  }
  {
    // Composed map: depth loss plus a linear functional of the lifted
    // frustum, differentiated back through the softmax.
    auto forward = [&](const TensorD& x) {
      TensorD d = softmax_normalize(x);
      double s = depth_loss(d, labels, fg, weights);
      TensorD g = lift(drop_overflow_bin(d, static_cast<int>(D)), features);
      for (std::size_t i = 0; i < g.size(); ++i) s += g[i] * upstream_g[i];
      return s;
    };
    TensorD grad_dist = depth_loss_backward(dist, labels, fg, weights);
    auto [grad_dist_lift, grad_feat] = lift_backward(dist_d, features, upstream_g);
    for (std::size_t p = 0; p < W * H; ++p) {
      for (std::size_t d = 0; d < D; ++d) {
        grad_dist[p * K + d] += grad_dist_lift[p * D + d];
      }
    }
    TensorD analytic = softmax_backward(dist, grad_dist);
    rows.push_back({"depth_loss(softmax)+lift",
                    gradcheck(forward, analytic, logits, eps_scale).max_rel_error});
  }

  bool ok = true;
  std::printf("%-28s %-14s %s\n", "operation", "max_rel_error", "status");
  for (const auto& row : rows) {
    const bool pass = row.err <= tol;
    ok = ok && pass;
    std::printf("%-28s %-14.3e %s\n", row.name, row.err, pass ? "PASS" : "FAIL");
  }
  return ok ? 0 : 4;
}

int run_synth(const CalibOptions& calib_opts, const DiscOptions& disc_opts,
              const std::vector<double>& box_values, int random_boxes,
              double sigma, double background_depth, int channels, unsigned seed,
              const std::string& out_dir) {
  const CameraCalibration calib = calib_opts.calibration();
  const DiscretizationSpec disc = disc_opts.spec();
  if (box_values.size() % 6 != 0) {
    throw ConfigError("--box takes 6 values per box: cx cy cz ex ey ez");
  }
  if (channels < 1) throw ConfigError("--channels must be positive");
  SyntheticScene scene;
  scene.sigma = sigma;
  scene.background_depth = background_depth;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> sig(0.25f, 1.0f);
  auto make_signature = [&] {
    std::vector<float> s(static_cast<std::size_t>(channels));
    for (auto& v : s) v = sig(rng);
    return s;
  };
  for (std::size_t b = 0; b + 5 < box_values.size(); b += 6) {
    SceneBox box;
    box.center = {box_values[b], box_values[b + 1], box_values[b + 2]};
    box.extents = {box_values[b + 3], box_values[b + 4], box_values[b + 5]};
    box.signature = make_signature();
    scene.boxes.push_back(std::move(box));
  }
  std::uniform_real_distribution<double> depth(disc.d_min * 1.5, disc.d_max * 0.6);
  std::uniform_real_distribution<double> lateral(-0.2, 0.2);
  std::uniform_real_distribution<double> extent(0.8, 2.0);
  for (int b = 0; b < random_boxes; ++b) {
    SceneBox box;
    const double x = depth(rng);
    box.center = {x, lateral(rng) * x, lateral(rng) * x * 0.5};
    box.extents = {extent(rng), extent(rng), extent(rng)};
    box.signature = make_signature();
    scene.boxes.push_back(std::move(box));
  }

  const auto out = synth_scene(scene, disc, calib);
  const std::filesystem::path dir(out_dir.empty() ? "." : out_dir);
  std::filesystem::create_directories(dir);
  write_tensor(dir / "features.tensor", out.features);
  write_tensor(dir / "logits.tensor", out.logits);
  write_tensor(dir / "depth.tensor", depth_map_tensor(out.depth));
  Tensor mask({out.depth.width, out.depth.height});
  for (std::size_t i = 0; i < out.fg_mask.size(); ++i) {
    mask[i] = out.fg_mask[i] ? 1.0f : 0.0f;
  }
  write_tensor(dir / "mask.tensor", mask);
  write_point_cloud(dir / "cloud.bin", out.cloud);
  return 0;
}

int run_pipeline_cmd(const CalibOptions& calib_opts, const DiscOptions& disc_opts,
                     const GridOptions& grid_opts, const std::string& features_path,
                     const std::string& logits_path, const std::string& output,
                     const std::string& reduce_path, const std::string& bias_path,
                     const std::string& dump_dist, const std::string& dump_frustum,
                     const std::string& dump_voxels, const std::string& dump_bev_raw) {
  PipelineConfig cfg;
  cfg.calib = calib_opts.calibration();
  cfg.disc = disc_opts.spec();
  cfg.grid = grid_opts.spec();
  Tensor features = read_tensor_f32(features_path);
  Tensor logits = read_tensor_f32(logits_path);

  Tensor weights, bias;
  const Tensor* weights_ptr = nullptr;
  const Tensor* bias_ptr = nullptr;
  if (!reduce_path.empty()) {
    weights = read_tensor_f32(reduce_path);
    weights_ptr = &weights;
    if (!bias_path.empty()) {
      bias = read_tensor_f32(bias_path);
      bias_ptr = &bias;
    }
  }

  PipelineDumps dumps;
  dumps.want_distribution = !dump_dist.empty();
  dumps.want_frustum = !dump_frustum.empty();
  dumps.want_voxels = !dump_voxels.empty();
  dumps.want_bev_raw = !dump_bev_raw.empty();
  Tensor bev = run_pipeline(features, logits, cfg, weights_ptr, bias_ptr, &dumps);
  write_tensor(output, bev);
  if (dumps.distribution) write_tensor(dump_dist, *dumps.distribution);
  if (dumps.frustum) write_tensor(dump_frustum, *dumps.frustum);
  if (dumps.voxels) write_tensor(dump_voxels, *dumps.voxels);
  if (dumps.bev_raw) write_tensor(dump_bev_raw, *dumps.bev_raw);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Image-to-BEV lifting via categorical depth distributions"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; flags take precedence");

  int threads = 0;
  app.add_option("--threads", threads, "Worker thread cap (0 = hardware)");

  // discretize
  auto* discretize = app.add_subcommand(
      "discretize", "Emit a CSV of bin edges, centers and widths");
  DiscOptions disc_discretize;
  disc_discretize.attach(discretize);
  std::string discretize_output = "-";
  discretize->add_option("--output,-o", discretize_output, "CSV path or - for stdout");

  // lift
  auto* lift_cmd = app.add_subcommand(
      "lift", "Softmax logits, drop the overflow bin and lift features into a frustum");
  DiscOptions disc_lift;
  disc_lift.attach(lift_cmd);
  std::string lift_logits, lift_features, lift_output;
  lift_cmd->add_option("--logits", lift_logits, "Logit tensor (W x H x K)")->required();
  lift_cmd->add_option("--features", lift_features, "Feature tensor (W x H x C)")
      ->required();
  lift_cmd->add_option("--output,-o", lift_output, "Frustum tensor output")->required();

  // transform
  auto* transform = app.add_subcommand(
      "transform", "Resample a frustum tensor onto the voxel grid (optionally to BEV)");
  CalibOptions calib_transform;
  DiscOptions disc_transform;
  GridOptions grid_transform_opts;
  calib_transform.attach(transform);
  disc_transform.attach(transform);
  grid_transform_opts.attach(transform);
  std::string transform_frustum, transform_output, transform_reduce, transform_bias;
  bool transform_collapse = false;
  transform->add_option("--frustum", transform_frustum, "Frustum tensor (W x H x D x C)")
      ->required();
  transform->add_option("--output,-o", transform_output, "Output tensor")->required();
  transform->add_flag("--collapse", transform_collapse,
                      "Collapse the vertical axis into channels");
  transform->add_option("--reduce", transform_reduce,
                        "Channel reduction weights (C_in x C_out); implies --collapse");
  transform->add_option("--reduce-bias", transform_bias, "Reduction bias (C_out)");

  // labels
  auto* labels = app.add_subcommand(
      "labels", "One-hot depth labels from a point cloud (project, complete, downsample)");
  CalibOptions calib_labels;
  DiscOptions disc_labels;
  calib_labels.attach(labels);
  disc_labels.attach(labels);
  std::string labels_cloud, labels_transform, labels_boxes, labels_output;
  std::string labels_mask_output, labels_depth_output;
  labels->add_option("--cloud", labels_cloud, "Point cloud (f32 x,y,z,r quadruplets)")
      ->required();
  labels->add_option("--transform", labels_transform,
                     "4x4 row-major rigid transform applied to the cloud");
  labels->add_option("--boxes", labels_boxes, "2D boxes CSV for the foreground mask");
  labels->add_option("--output,-o", labels_output, "Label tensor output")->required();
  labels->add_option("--mask-output", labels_mask_output, "Foreground mask tensor");
  labels->add_option("--depth-output", labels_depth_output,
                     "Dense feature-resolution depth map tensor");

  // loss
  auto* loss = app.add_subcommand("loss", "Focal depth loss of a distribution tensor");
  std::string loss_dist, loss_labels, loss_mask;
  LossWeights loss_weights;
  bool loss_total = false;
  double loss_cls = 0.0, loss_reg = 0.0, loss_dir = 0.0;
  loss->add_option("--dist", loss_dist, "Distribution tensor (W x H x K)")->required();
  loss->add_option("--labels", loss_labels, "One-hot label tensor")->required();
  loss->add_option("--mask", loss_mask, "Foreground mask tensor (nonzero = foreground)");
  loss->add_option("--alpha-fg", loss_weights.alpha_fg)->capture_default_str();
  loss->add_option("--alpha-bg", loss_weights.alpha_bg)->capture_default_str();
  loss->add_option("--gamma", loss_weights.gamma)->capture_default_str();
  loss->add_option("--lambda-depth", loss_weights.lambda_depth)->capture_default_str();
  loss->add_option("--lambda-cls", loss_weights.lambda_cls)->capture_default_str();
  loss->add_option("--lambda-reg", loss_weights.lambda_reg)->capture_default_str();
  loss->add_option("--lambda-dir", loss_weights.lambda_dir)->capture_default_str();
  loss->add_flag("--total", loss_total,
                 "Print the lambda-weighted total instead of the depth loss");
  loss->add_option("--l-cls", loss_cls, "External classification loss")
      ->capture_default_str();
  loss->add_option("--l-reg", loss_reg, "External regression loss")->capture_default_str();
  loss->add_option("--l-dir", loss_dir, "External direction loss")->capture_default_str();

  // entropy
  auto* entropy = app.add_subcommand(
      "entropy", "Per-(gt bin, group) entropy statistics of a distribution tensor");
  std::string entropy_dist, entropy_labels, entropy_mask, entropy_output = "-";
  entropy->add_option("--dist", entropy_dist, "Distribution tensor")->required();
  entropy->add_option("--labels", entropy_labels, "One-hot label tensor")->required();
  entropy->add_option("--mask", entropy_mask, "Foreground mask tensor");
  entropy->add_option("--output,-o", entropy_output, "CSV path or - for stdout");

  // gradcheck
  auto* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "Finite-difference verification of all backward operations");
  double gc_tol = 1e-4, gc_eps = 1e-3;
  unsigned gc_seed = 7;
  gradcheck_cmd->add_option("--tol", gc_tol, "Max relative error")->capture_default_str();
  gradcheck_cmd->add_option("--eps-scale", gc_eps, "Step scale")->capture_default_str();
  gradcheck_cmd->add_option("--seed", gc_seed, "RNG seed")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Render a synthetic scene: features, logits, depth, mask and cloud");
  CalibOptions calib_synth;
  calib_synth.focal = 128.0;
  DiscOptions disc_synth;
  disc_synth.bins = 16;
  calib_synth.attach(synth);
  disc_synth.attach(synth);
  std::vector<double> synth_boxes;
  int synth_random_boxes = 0, synth_channels = 8;
  double synth_sigma = 0.01, synth_background = 40.0;
  unsigned synth_seed = 1;
  std::string synth_out_dir = ".";
  synth->add_option("--box", synth_boxes,
                    "Box as 6 values: cx cy cz ex ey ez (repeatable)")
      ->expected(-6);
  synth->add_option("--random-boxes", synth_random_boxes, "Add N random boxes")
      ->capture_default_str();
  synth->add_option("--channels", synth_channels, "Feature channels")
      ->capture_default_str();
  synth->add_option("--sigma", synth_sigma, "Distribution sharpness (0 = one-hot)")
      ->capture_default_str();
  synth->add_option("--background-depth", synth_background, "Backdrop depth (m)")
      ->capture_default_str();
  synth->add_option("--seed", synth_seed, "RNG seed for signatures/boxes")
      ->capture_default_str();
  synth->add_option("--out-dir", synth_out_dir, "Output directory")
      ->capture_default_str();

  // pipeline
  auto* pipeline = app.add_subcommand(
      "pipeline", "Full image-to-BEV pipeline over tensor files");
  CalibOptions calib_pipeline;
  DiscOptions disc_pipeline;
  GridOptions grid_pipeline;
  calib_pipeline.attach(pipeline);
  disc_pipeline.attach(pipeline);
  grid_pipeline.attach(pipeline);
  std::string pl_features, pl_logits, pl_output, pl_reduce, pl_bias;
  std::string pl_dump_dist, pl_dump_frustum, pl_dump_voxels, pl_dump_bev;
  pipeline->add_option("--features", pl_features, "Feature tensor")->required();
  pipeline->add_option("--logits", pl_logits, "Logit tensor")->required();
  pipeline->add_option("--output,-o", pl_output, "BEV tensor output")->required();
  pipeline->add_option("--reduce", pl_reduce, "Channel reduction weights");
  pipeline->add_option("--reduce-bias", pl_bias, "Channel reduction bias");
  pipeline->add_option("--dump-dist", pl_dump_dist, "Dump the softmax distribution");
  pipeline->add_option("--dump-frustum", pl_dump_frustum, "Dump the frustum tensor");
  pipeline->add_option("--dump-voxels", pl_dump_voxels, "Dump the voxel tensor");
  pipeline->add_option("--dump-bev-raw", pl_dump_bev, "Dump the pre-reduction BEV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (threads > 0) bevlift::set_max_threads(threads);
    if (discretize->parsed()) return run_discretize(disc_discretize, discretize_output);
    if (lift_cmd->parsed()) {
      return run_lift(disc_lift, lift_logits, lift_features, lift_output);
    }
    if (transform->parsed()) {
      return run_transform(calib_transform, disc_transform, grid_transform_opts,
                           transform_frustum, transform_output, transform_collapse,
                           transform_reduce, transform_bias);
    }
    if (labels->parsed()) {
      return run_labels(calib_labels, disc_labels, labels_cloud, labels_transform,
                        labels_boxes, labels_output, labels_mask_output,
                        labels_depth_output);
    }
    if (loss->parsed()) {
      return run_loss(loss_dist, loss_labels, loss_mask, loss_weights, loss_total,
                      loss_cls, loss_reg, loss_dir);
    }
    if (entropy->parsed()) {
      return run_entropy(entropy_dist, entropy_labels, entropy_mask, entropy_output);
    }
    if (gradcheck_cmd->parsed()) return run_gradcheck(gc_tol, gc_eps, gc_seed);
    if (synth->parsed()) {
      return run_synth(calib_synth, disc_synth, synth_boxes, synth_random_boxes,
                       synth_sigma, synth_background, synth_channels, synth_seed,
                       synth_out_dir);
    }
    if (pipeline->parsed()) {
      return run_pipeline_cmd(calib_pipeline, disc_pipeline, grid_pipeline,
                              pl_features, pl_logits, pl_output, pl_reduce, pl_bias,
                              pl_dump_dist, pl_dump_frustum, pl_dump_voxels,
                              pl_dump_bev);
    }
  } catch (const bevlift::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const bevlift::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const bevlift::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
