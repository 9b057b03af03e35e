#include "regkit/harness.hpp"

#include <chrono>
#include <fstream>
#include <iterator>
#include <memory>

#include <json.hpp>

#include "regkit/error.hpp"

namespace regkit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string expand(const std::string& pattern, int index) {
  std::string out = pattern;
  const auto pos = out.find("{}");
  if (pos == std::string::npos) {
    throw Error(ErrorCode::ConfigError, "image_pattern needs a '{}' placeholder");
  }
  out.replace(pos, 2, std::to_string(index));
  return out;
}

fs::path find_image(const fs::path& dir, const std::string& pattern, int index) {
  const std::string name = expand(pattern, index);
  if (fs::path(name).has_extension()) return dir / name;
  for (const char* ext : {".ppm", ".pgm", ".pnm"}) {
    const fs::path candidate = dir / (name + ext);
    if (fs::exists(candidate)) return candidate;
  }
  throw Error(ErrorCode::MissingFile, name);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::ConfigError, where + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw Error(ErrorCode::ConfigError, "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_opt(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ConfigError,
                "bad value for '" + std::string(key) + "' in " + where);
  }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

const std::vector<double>& thresholds_for(const RunConfig& c, MatchMethod m) {
  return is_ratio_method(m) ? c.nnr_thresholds : c.nn_thresholds;
}

std::string backend_name(BackendKind k) {
  switch (k) {
    case BackendKind::Raw: return "raw";
    case BackendKind::Cnn: return "cnn";
    case BackendKind::Import: return "import";
  }
  return "?";
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::MissingFile, path.string());
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

DatasetSubset load_subset(const fs::path& dir, const std::string& image_pattern) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::MissingFile, dir.string());
  }
  DatasetSubset subset;
  subset.name = dir.filename().string();
  if (subset.name.empty()) subset.name = dir.parent_path().filename().string();
  for (int i = 1; i <= 6; ++i) {
    const fs::path path = find_image(dir, image_pattern, i);
    if (!fs::exists(path)) {
      throw Error(ErrorCode::MissingFile, path.filename().string());
    }
    subset.images[i - 1] = load_image_file(path.string());
  }
  for (int k = 2; k <= 6; ++k) {
    const std::string name = "H1to" + std::to_string(k) + "p";
    const fs::path path = dir / name;
    if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, name);
    try {
      subset.homographies[k - 2] = parse_homography(read_file(path));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ": " + e.what());
    }
  }
  return subset;
}

RunConfig default_grid_preset() {
  RunConfig c;
  c.metrics = {Metric::cityblock(), Metric::euclidean(), Metric::cosine(),
               Metric::minkowski(3.0), Metric::correlation()};
  c.methods = {MatchMethod::Nn1, MatchMethod::Nn2, MatchMethod::Nnr1,
               MatchMethod::Nnr2};
  c.nn_thresholds = {0.3, 0.5, 0.7};
  c.nnr_thresholds = {1.1, 1.2, 1.3};
  return c;
}

RunConfig parse_run_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError,
                std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc,
             {"dataset_root", "subsets", "pairs", "image_pattern", "detector",
              "descriptor", "window", "metrics", "minkowski_r", "methods",
              "nn_thresholds", "nnr_thresholds", "ransac", "ke_aggregate",
              "output_dir", "chart"},
             "config");
  RunConfig c = default_grid_preset();
  std::string root, out_dir = c.output_dir.string();
  read_opt(doc, "dataset_root", root, "config");
  c.dataset_root = resolve(root, base_dir);
  read_opt(doc, "subsets", c.subsets, "config");
  read_opt(doc, "pairs", c.pairs, "config");
  read_opt(doc, "image_pattern", c.image_pattern, "config");
  read_opt(doc, "window", c.window, "config");
  read_opt(doc, "output_dir", out_dir, "config");
  c.output_dir = resolve(out_dir, base_dir);

  if (doc.contains("detector")) {
    const json& d = doc["detector"];
    check_keys(d,
               {"base_sigma", "scales_per_octave", "octaves",
                "contrast_threshold", "edge_ratio", "max_keypoints"},
               "detector");
    read_opt(d, "base_sigma", c.detector.base_sigma, "detector");
    read_opt(d, "scales_per_octave", c.detector.scales_per_octave, "detector");
    read_opt(d, "octaves", c.detector.octaves, "detector");
    read_opt(d, "contrast_threshold", c.detector.contrast_threshold, "detector");
    read_opt(d, "edge_ratio", c.detector.edge_ratio, "detector");
    read_opt(d, "max_keypoints", c.detector.max_keypoints, "detector");
  }
  if (doc.contains("descriptor")) {
    const json& d = doc["descriptor"];
    check_keys(d,
               {"backend", "raw_side", "network_config", "weights", "tap",
                "import_dir"},
               "descriptor");
    std::string backend = "raw", net, weights, import_dir;
    read_opt(d, "backend", backend, "descriptor");
    if (backend == "raw") {
      c.descriptor.backend = BackendKind::Raw;
    } else if (backend == "cnn") {
      c.descriptor.backend = BackendKind::Cnn;
    } else if (backend == "import") {
      c.descriptor.backend = BackendKind::Import;
    } else {
      throw Error(ErrorCode::ConfigError, "unknown backend '" + backend + "'");
    }
    read_opt(d, "raw_side", c.descriptor.raw_side, "descriptor");
    read_opt(d, "network_config", net, "descriptor");
    read_opt(d, "weights", weights, "descriptor");
    read_opt(d, "tap", c.descriptor.tap, "descriptor");
    read_opt(d, "import_dir", import_dir, "descriptor");
    c.descriptor.network_config = resolve(net, base_dir);
    c.descriptor.weights = resolve(weights, base_dir);
    c.descriptor.import_dir = resolve(import_dir, base_dir);
  }
  double minkowski_r = 3.0;
  read_opt(doc, "minkowski_r", minkowski_r, "config");
  if (doc.contains("metrics") || doc.contains("minkowski_r")) {
    std::vector<std::string> names;
    for (const auto& m : c.metrics) names.push_back(m.name());
    read_opt(doc, "metrics", names, "config");
    c.metrics.clear();
    for (const auto& n : names) c.metrics.push_back(parse_metric(n, minkowski_r));
  }
  if (doc.contains("methods")) {
    std::vector<std::string> names;
    read_opt(doc, "methods", names, "config");
    c.methods.clear();
    for (const auto& n : names) c.methods.push_back(parse_match_method(n));
  }
  read_opt(doc, "nn_thresholds", c.nn_thresholds, "config");
  read_opt(doc, "nnr_thresholds", c.nnr_thresholds, "config");
  if (doc.contains("ransac")) {
    const json& r = doc["ransac"];
    check_keys(r, {"max_iterations", "inlier_threshold", "min_inliers", "seed"},
               "ransac");
    read_opt(r, "max_iterations", c.ransac.max_iterations, "ransac");
    read_opt(r, "inlier_threshold", c.ransac.inlier_threshold, "ransac");
    read_opt(r, "min_inliers", c.ransac.min_inliers, "ransac");
    read_opt(r, "seed", c.ransac.seed, "ransac");
  }
  if (doc.contains("ke_aggregate")) {
    std::string agg;
    read_opt(doc, "ke_aggregate", agg, "config");
    if (agg == "mean") {
      c.ke_aggregate = ErrorAggregate::Mean;
    } else if (agg == "median") {
      c.ke_aggregate = ErrorAggregate::Median;
    } else {
      throw Error(ErrorCode::ConfigError, "ke_aggregate must be mean or median");
    }
  }
  if (doc.contains("chart")) {
    const json& ch = doc["chart"];
    check_keys(ch, {"method", "threshold"}, "chart");
    std::string method = to_string(c.chart_method);
    read_opt(ch, "method", method, "chart");
    c.chart_method = parse_match_method(method);
    read_opt(ch, "threshold", c.chart_threshold, "chart");
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error&) {
    throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  }
  return parse_run_config(text, path.parent_path());
}

void validate_run_config(const RunConfig& c) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::ConfigError, what);
  };
  if (c.subsets.empty()) fail("subsets filter is empty");
  if (c.pairs.empty()) fail("pairs list is empty");
  for (int k : c.pairs)
    if (k < 2 || k > 6) fail("pair indices must lie in 2..6");
  if (c.metrics.empty()) fail("metrics list is empty");
  if (c.methods.empty()) fail("methods list is empty");
  for (auto m : c.methods) {
    if (thresholds_for(c, m).empty()) {
      fail("no thresholds configured for " + to_string(m));
    }
  }
  for (double t : c.nn_thresholds)
    if (!(t > 0.0 && t <= 1.0)) fail("nn thresholds must lie in (0, 1]");
  for (double t : c.nnr_thresholds)
    if (!(t >= 1.0)) fail("nnr thresholds must be >= 1");
  if (!(c.window > 0.0)) fail("window must be > 0");
  if (c.ransac.max_iterations < 1 || !(c.ransac.inlier_threshold > 0.0) ||
      c.ransac.min_inliers < 4) {
    fail("invalid ransac parameters");
  }
  if (!(c.detector.base_sigma > 0.0) || c.detector.scales_per_octave < 1 ||
      !(c.detector.contrast_threshold > 0.0) || !(c.detector.edge_ratio > 0.0)) {
    fail("invalid detector parameters");
  }
  if (c.image_pattern.find("{}") == std::string::npos) {
    fail("image_pattern needs a '{}' placeholder");
  }
  if (!fs::is_directory(c.dataset_root)) {
    fail("dataset_root does not exist: " + c.dataset_root.string());
  }
  for (const auto& s : c.subsets) {
    if (!fs::is_directory(c.dataset_root / s)) fail("missing subset " + s);
  }
  switch (c.descriptor.backend) {
    case BackendKind::Raw:
      if (c.descriptor.raw_side < 1) fail("raw_side must be positive");
      break;
    case BackendKind::Cnn:
      if (!fs::exists(c.descriptor.network_config)) {
        fail("network config not found: " + c.descriptor.network_config.string());
      }
      if (!fs::exists(c.descriptor.weights)) {
        fail("weights not found: " + c.descriptor.weights.string());
      }
      break;
    case BackendKind::Import:
      if (!fs::is_directory(c.descriptor.import_dir)) {
        fail("import_dir not found: " + c.descriptor.import_dir.string());
      }
      break;
  }
}

std::size_t cells_per_pair(const RunConfig& c) {
  std::size_t per_metric = 0;
  for (auto m : c.methods) per_metric += thresholds_for(c, m).size();
  return c.metrics.size() * per_metric;
}

DescriptorBackend make_backend(const RunConfig& config) {
  if (config.descriptor.backend != BackendKind::Cnn) {
    return RawBackend{config.descriptor.raw_side};
  }
  NetworkConfig net_cfg =
      parse_network_config(read_file(config.descriptor.network_config));
  if (!config.descriptor.tap.empty()) net_cfg.tap = config.descriptor.tap;
  const std::string blob_text = read_file(config.descriptor.weights);
  const std::span<const std::uint8_t> blob(
      reinterpret_cast<const std::uint8_t*>(blob_text.data()), blob_text.size());
  return CnnBackend{
      std::make_shared<const Network>(Network::from_blob(std::move(net_cfg), blob))};
}

DescribedImage describe_image(const Image& img, const RunConfig& config,
                              const DescriptorBackend& backend) {
  DescribedImage out;
  try {
    auto start = Clock::now();
    const auto kps = detect_keypoints(to_grayscale(img), config.detector);
    out.detect_ms = ms_since(start);
    start = Clock::now();
    DescribeOptions opts;
    opts.window = config.window;
    opts.base_sigma = config.detector.base_sigma;
    opts.normalize = true;
    out.descriptors = describe_keypoints(img, kps, backend, opts);
    out.describe_ms = ms_since(start);
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

std::vector<ResultRow> run_pair(const DescribedImage& a, const DescribedImage& b,
                                const Homography& h_gt, const RunConfig& config,
                                const std::string& subset, int pair) {
  std::vector<ResultRow> rows;
  const std::string backend = backend_name(config.descriptor.backend);
  const std::string tap =
      config.descriptor.backend == BackendKind::Raw ? "" : config.descriptor.tap;
  for (const Metric& metric : config.metrics) {
    ResultRow base;
    base.subset = subset;
    base.pair = pair;
    base.backend = backend;
    base.tap = tap;
    base.metric = metric.name();
    base.n_keypoints_a = a.descriptors.size();
    base.n_keypoints_b = b.descriptors.size();
    base.times.detect_ms = a.detect_ms + b.detect_ms;
    base.times.describe_ms = a.describe_ms + b.describe_ms;

    std::optional<DistanceMatrix> dist;
    std::string metric_error = !a.error.empty() ? a.error : b.error;
    if (metric_error.empty()) {
      const auto start = Clock::now();
      try {
        dist = distance_matrix(a.descriptors, b.descriptors, metric);
      } catch (const Error& e) {
        metric_error = e.what();
      }
      base.times.distance_ms = ms_since(start);
    }
    for (MatchMethod method : config.methods) {
      for (double threshold : thresholds_for(config, method)) {
        ResultRow row = base;
        row.method = to_string(method);
        row.threshold = threshold;
        if (!dist) {
          row.status = metric_error;
          rows.push_back(std::move(row));
          continue;
        }
        try {
          auto start = Clock::now();
          const auto matches = match(*dist, {method, threshold});
          row.times.match_ms = ms_since(start);
          start = Clock::now();
          const EvalReport report =
              evaluate_pair(matches, a.descriptors.keypoints,
                            b.descriptors.keypoints, h_gt, config.ransac,
                            config.ke_aggregate);
          row.times.eval_ms = ms_since(start);
          row.n_matches = report.n_matches;
          row.tp = report.tp;
          row.ke_gh = report.ke_gh;
          row.ke_ch = report.ke_ch;
          row.inlier_ratio = report.inlier_ratio;
          row.ransac_failed = report.ransac_failed;
        } catch (const Error& e) {
          row.status = e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

std::vector<ResultRow> run_benchmark(const RunConfig& run_config) {
  validate_run_config(run_config);
  const DescriptorBackend backend = make_backend(run_config);
  RunConfig config = run_config;
  if (const auto* cnn = std::get_if<CnnBackend>(&backend)) {
    config.descriptor.tap = cnn->network->config().tap;
  }
  std::vector<ResultRow> rows;
  for (const auto& name : config.subsets) {
    const fs::path dir = config.dataset_root / name;
    DatasetSubset subset;
    std::string subset_error;
    try {
      subset = load_subset(dir, config.image_pattern);
      subset.name = name;
    } catch (const Error& e) {
      subset_error = e.what();
    }

    auto load_import = [&](int index) {
      DescribedImage d;
      const fs::path path =
          config.descriptor.import_dir / name / ("img" + std::to_string(index) + ".kpd1");
      try {
        d.descriptors = read_descriptors(read_file(path));
      } catch (const Error& e) {
        d.error = path.string() + ": " + e.what();
      }
      return d;
    };
    auto describe = [&](int index) {
      if (config.descriptor.backend == BackendKind::Import) return load_import(index);
      DescribedImage d;
      if (!subset_error.empty()) {
        d.error = subset_error;
        return d;
      }
      return describe_image(subset.images[index - 1], config, backend);
    };

    const DescribedImage first = describe(1);
    for (int k : config.pairs) {
      const DescribedImage other = describe(k);
      if (!subset_error.empty()) {
        // Without ground truth every cell of the pair fails identically.
        DescribedImage failed;
        failed.error = subset_error;
        auto cells = run_pair(failed, failed, Homography(), config, name, k);
        rows.insert(rows.end(), cells.begin(), cells.end());
        continue;
      }
      auto cells = run_pair(first, other, subset.homographies[k - 2], config,
                            name, k);
      rows.insert(rows.end(), cells.begin(), cells.end());
    }
  }
  return rows;
}

}  // namespace regkit
