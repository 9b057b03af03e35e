#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "regkit/cnn.hpp"
#include "regkit/descriptor.hpp"
#include "regkit/detector.hpp"
#include "regkit/distance.hpp"
#include "regkit/error.hpp"
#include "regkit/eval.hpp"
#include "regkit/geometry.hpp"
#include "regkit/harness.hpp"
#include "regkit/imaging.hpp"
#include "regkit/matcher.hpp"

namespace {

using namespace regkit;

constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::BadOrder:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::WeightSizeMismatch:
      return kExitConfig;
    default:
      return kExitData;
  }
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty() || out_path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + out_path);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt(*v) : "none"; }

struct DetectorFlags {
  DetectorParams params;

  void add_to(CLI::App* app) {
    app->add_option("--base-sigma", params.base_sigma, "Blur of the first scale level")
        ->capture_default_str();
    app->add_option("--scales", params.scales_per_octave, "Scales per octave")
        ->capture_default_str();
    app->add_option("--octaves", params.octaves, "Octave count, 0 = until side < 16")
        ->capture_default_str();
    app->add_option("--contrast", params.contrast_threshold, "Minimum |DoG| response")
        ->capture_default_str();
    app->add_option("--edge-ratio", params.edge_ratio, "Principal curvature ratio limit")
        ->capture_default_str();
    app->add_option("--max-keypoints", params.max_keypoints, "Keep the strongest N, 0 = all")
        ->capture_default_str();
  }
};

struct BackendFlags {
  std::string backend = "raw";
  int raw_side = 16;
  std::string network;
  std::string weights;
  std::string tap;
  double window = 64.0;

  void add_to(CLI::App* app) {
    app->add_option("--backend", backend, "raw or cnn")
        ->check(CLI::IsMember({"raw", "cnn"}))
        ->capture_default_str();
    app->add_option("--raw-side", raw_side, "Raw patch side")->capture_default_str();
    app->add_option("--network", network, "Network config (cnn backend)");
    app->add_option("--weights", weights, "Weights blob (cnn backend)");
    app->add_option("--tap", tap, "Output layer, overrides the network config");
    app->add_option("--window", window, "Patch extent at base sigma")->capture_default_str();
  }

  DescriptorBackend make() const {
    if (backend == "raw") return RawBackend{raw_side};
    if (network.empty() || weights.empty()) {
      throw Error(ErrorCode::ConfigError, "cnn backend needs --network and --weights");
    }
    NetworkConfig cfg = parse_network_config(read_file(network));
    if (!tap.empty()) cfg.tap = tap;
    const std::string blob = read_file(weights);
    return CnnBackend{std::make_shared<const Network>(Network::from_blob(
        std::move(cfg),
        {reinterpret_cast<const std::uint8_t*>(blob.data()), blob.size()}))};
  }
};

struct MatchFlags {
  std::string metric = "euclidean";
  double minkowski_r = 3.0;
  std::string method = "nnr1";
  double threshold = 1.1;

  void add_to(CLI::App* app) {
    app->add_option("--metric", metric,
                    "cityblock, euclidean, cosine, minkowski or correlation")
        ->capture_default_str();
    app->add_option("--minkowski-r", minkowski_r, "Minkowski order")->capture_default_str();
    app->add_option("--method", method, "nn1, nn2, nnr1 or nnr2")->capture_default_str();
    app->add_option("--threshold", threshold, "Acceptance threshold")->capture_default_str();
  }

  std::vector<MatchPair> run(const DescriptorSet& a, const DescriptorSet& b) const {
    const DistanceMatrix d = distance_matrix(a, b, parse_metric(metric, minkowski_r));
    return match(d, {parse_match_method(method), threshold});
  }
};

int run_cli(int argc, char** argv) {
  CLI::App app{"Feature-based image registration toolkit"};
  app.require_subcommand(1);

  // detect
  auto* detect = app.add_subcommand("detect", "Detect DoG keypoints in an image");
  std::string detect_image, detect_out;
  DetectorFlags detect_flags;
  detect->add_option("image", detect_image, "PGM/PPM image")->required();
  detect->add_option("-o,--out", detect_out, "Keypoint dump (default stdout)");
  detect_flags.add_to(detect);

  // describe
  auto* describe = app.add_subcommand("describe", "Describe keypoints as a KPD1 file");
  std::string describe_image_path, describe_kps, describe_out;
  BackendFlags describe_backend;
  double describe_base_sigma = 1.6;
  bool describe_raw_values = false;
  describe->add_option("image", describe_image_path, "PGM/PPM image")->required();
  describe->add_option("keypoints", describe_kps, "Keypoint dump from detect")->required();
  describe->add_option("-o,--out", describe_out, "KPD1 output (default stdout)");
  describe->add_option("--base-sigma", describe_base_sigma, "Sigma at which the window applies")
      ->capture_default_str();
  describe->add_flag("--no-normalize", describe_raw_values, "Keep rows unnormalized");
  describe_backend.add_to(describe);

  // match
  auto* match_cmd = app.add_subcommand("match", "Match two KPD1 descriptor files");
  std::string match_a, match_b, match_out;
  MatchFlags match_flags;
  match_cmd->add_option("a", match_a, "KPD1 file of the first image")->required();
  match_cmd->add_option("b", match_b, "KPD1 file of the second image")->required();
  match_cmd->add_option("-o,--out", match_out, "Match dump (default stdout)");
  match_flags.add_to(match_cmd);

  // register
  auto* reg = app.add_subcommand("register", "Estimate the homography between two images");
  std::string reg_a, reg_b, reg_gt, reg_out;
  DetectorFlags reg_detector;
  BackendFlags reg_backend;
  MatchFlags reg_match;
  RansacParams reg_ransac;
  reg->add_option("a", reg_a, "First image")->required();
  reg->add_option("b", reg_b, "Second image")->required();
  reg->add_option("--gt", reg_gt, "Ground-truth homography file for ke_gh and tp");
  reg->add_option("-o,--out", reg_out, "Write the estimated homography here");
  reg->add_option("--iterations", reg_ransac.max_iterations, "RANSAC iterations")
      ->capture_default_str();
  reg->add_option("--inlier-threshold", reg_ransac.inlier_threshold, "RANSAC inlier radius")
      ->capture_default_str();
  reg->add_option("--seed", reg_ransac.seed, "RANSAC seed")->capture_default_str();
  reg_detector.add_to(reg);
  reg_backend.add_to(reg);
  reg_match.add_to(reg);

  // bench
  auto* bench = app.add_subcommand("bench", "Run the benchmark grid from a config file");
  std::string bench_config, bench_out;
  std::vector<std::string> bench_subsets;
  std::vector<int> bench_pairs;
  bench->add_option("config", bench_config, "JSON run config")->required();
  bench->add_option("--output-dir", bench_out, "Overrides output_dir");
  bench->add_option("--subsets", bench_subsets, "Overrides the subsets filter");
  bench->add_option("--pairs", bench_pairs, "Overrides the pair list");

  // validate-net
  auto* vnet = app.add_subcommand("validate-net", "Print the shape trace of a network config");
  std::string vnet_config, vnet_weights, vnet_tap;
  vnet->add_option("config", vnet_config, "Network config")->required();
  vnet->add_option("--weights", vnet_weights, "Also check a weights blob against the config");
  vnet->add_option("--tap", vnet_tap, "Override the tap layer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*detect) {
    const Image img = to_grayscale(load_image_file(detect_image));
    emit(detect_out, write_keypoints(detect_keypoints(img, detect_flags.params)));
    return 0;
  }

  if (*describe) {
    const Image img = load_image_file(describe_image_path);
    const auto kps = read_keypoints(read_file(describe_kps));
    DescribeOptions opts;
    opts.window = describe_backend.window;
    opts.base_sigma = describe_base_sigma;
    opts.normalize = !describe_raw_values;
    const DescriptorSet set = describe_keypoints(img, kps, describe_backend.make(), opts);
    emit(describe_out, write_descriptors(set));
    std::cerr << "described " << set.size() << " of " << kps.size() << " keypoints ("
              << set.dropped_out_of_bounds << " out of bounds, " << set.dropped_zero
              << " zero)\n";
    return 0;
  }

  if (*match_cmd) {
    const DescriptorSet a = read_descriptors(read_file(match_a));
    const DescriptorSet b = read_descriptors(read_file(match_b));
    emit(match_out, write_matches(match_flags.run(a, b)));
    return 0;
  }

  if (*reg) {
    const Image img_a = load_image_file(reg_a);
    const Image img_b = load_image_file(reg_b);
    const DescriptorBackend backend = reg_backend.make();
    DescribeOptions opts;
    opts.window = reg_backend.window;
    opts.base_sigma = reg_detector.params.base_sigma;
    const auto describe_one = [&](const Image& img) {
      return describe_keypoints(img, detect_keypoints(to_grayscale(img), reg_detector.params),
                                backend, opts);
    };
    const DescriptorSet a = describe_one(img_a);
    const DescriptorSet b = describe_one(img_b);
    const auto matches = reg_match.run(a, b);
    const auto pairs = matched_points(matches, a.keypoints, b.keypoints);
    const RansacResult fit = ransac_homography(pairs, reg_ransac);

    std::string report = "keypoints_a " + std::to_string(a.size()) + "\nkeypoints_b " +
                         std::to_string(b.size()) + "\nmatches " +
                         std::to_string(matches.size()) + "\ninliers " +
                         std::to_string(fit.inlier_count) + "\ninlier_ratio " +
                         fmt(static_cast<double>(fit.inlier_count) / matches.size()) +
                         "\nke_ch " +
                         fmt_opt(keypoint_error(matches, a.keypoints, b.keypoints, fit.h)) +
                         "\n";
    if (!reg_gt.empty()) {
      const Homography gt = parse_homography(read_file(reg_gt));
      report += "ke_gh " + fmt_opt(keypoint_error(matches, a.keypoints, b.keypoints, gt)) +
                "\ntp " + std::to_string(true_positives(matches, a.keypoints, b.keypoints, gt)) +
                "\n";
    }
    if (reg_out.empty()) {
      std::cout << format_homography(fit.h) << report;
    } else {
      emit(reg_out, format_homography(fit.h));
      std::cout << report;
    }
    return 0;
  }

  if (*bench) {
    RunConfig config = load_run_config(bench_config);
    if (!bench_out.empty()) config.output_dir = bench_out;
    if (!bench_subsets.empty()) config.subsets = bench_subsets;
    if (!bench_pairs.empty()) config.pairs = bench_pairs;
    const auto rows = run_benchmark(config);
    std::size_t failed = 0;
    for (const auto& r : rows) failed += r.status != "ok";
    for (const auto& path :
         emit_report(rows, config.output_dir, config.chart_method, config.chart_threshold)) {
      std::cout << path.string() << "\n";
    }
    std::cerr << rows.size() << " cells, " << failed << " with errors\n";
    return 0;
  }

  if (*vnet) {
    NetworkConfig cfg = parse_network_config(read_file(vnet_config));
    if (!vnet_tap.empty()) cfg.tap = vnet_tap;
    const ShapeTrace trace = validate_network(cfg);
    std::cout << "input " << cfg.input_side << "x" << cfg.input_side << "x"
              << cfg.input_channels << "\n";
    for (const auto& [name, shape] : trace) {
      std::cout << name << " " << shape.height << "x" << shape.width << "x" << shape.channels
                << (name == cfg.tap ? "  <- tap" : "") << "\n";
    }
    std::cout << "weights " << expected_weight_count(cfg) << "\n";
    if (!vnet_weights.empty()) {
      const std::string blob = read_file(vnet_weights);
      Network::from_blob(cfg, {reinterpret_cast<const std::uint8_t*>(blob.data()),
                               blob.size()});
      std::cout << "blob ok\n";
    }
    return 0;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const regkit::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
