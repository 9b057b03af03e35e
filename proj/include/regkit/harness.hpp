#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regkit/descriptor.hpp"
#include "regkit/detector.hpp"
#include "regkit/distance.hpp"
#include "regkit/eval.hpp"
#include "regkit/geometry.hpp"
#include "regkit/imaging.hpp"
#include "regkit/matcher.hpp"

namespace regkit {

/// Whole file as bytes. Throws MissingFile.
std::string read_file(const std::filesystem::path& path);

/// One benchmark sextet: image 1 plus five views with H1to{k}p, k = 2..6.
struct DatasetSubset {
  std::string name;
  std::array<Image, 6> images;
  std::array<Homography, 5> homographies;  // [k - 2] maps image 1 -> image k
};

/// `image_pattern` contains "{}" for the 1-based index; without an extension
/// the first of .ppm, .pgm, .pnm that exists is used.
/// Throws MissingFile naming the first absent file.
DatasetSubset load_subset(const std::filesystem::path& dir,
                          const std::string& image_pattern = "img{}");

enum class BackendKind { Raw, Cnn, Import };

struct DescriptorConfig {
  BackendKind backend = BackendKind::Raw;
  int raw_side = 16;
  std::filesystem::path network_config;
  std::filesystem::path weights;
  std::string tap;  // overrides the network config's tap when non-empty
  std::filesystem::path import_dir;  // <import_dir>/<subset>/img<k>.kpd1
};

struct RunConfig {
  std::filesystem::path dataset_root;
  std::vector<std::string> subsets;
  std::vector<int> pairs{2, 3, 4, 5, 6};
  std::string image_pattern = "img{}";
  DetectorParams detector;
  DescriptorConfig descriptor;
  double window = 64.0;
  std::vector<Metric> metrics;
  std::vector<MatchMethod> methods;
  std::vector<double> nn_thresholds;
  std::vector<double> nnr_thresholds;
  RansacParams ransac;
  ErrorAggregate ke_aggregate = ErrorAggregate::Mean;
  std::filesystem::path output_dir = "results";
  MatchMethod chart_method = MatchMethod::Nnr1;
  double chart_threshold = 1.1;
};

/// Five metrics (minkowski r = 3), all four methods, NN {0.3, 0.5, 0.7},
/// NNR {1.1, 1.2, 1.3}.
RunConfig default_grid_preset();

/// JSON config; unknown keys are ConfigError. Relative paths resolve against
/// `base_dir`.
RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws ConfigError when grids are empty, thresholds are out of range or
/// referenced paths are missing.
void validate_run_config(const RunConfig& config);

struct StageTimes {
  double detect_ms = 0.0;
  double describe_ms = 0.0;
  double distance_ms = 0.0;
  double match_ms = 0.0;
  double eval_ms = 0.0;
};

struct ResultRow {
  std::string subset;
  int pair = 0;  // image index k of the (1, k) pair
  std::string backend;
  std::string tap;
  std::string metric;
  std::string method;
  double threshold = 0.0;
  std::size_t n_keypoints_a = 0;
  std::size_t n_keypoints_b = 0;
  std::size_t n_matches = 0;
  std::size_t tp = 0;
  std::optional<double> ke_gh;
  std::optional<double> ke_ch;
  std::optional<double> inlier_ratio;
  bool ransac_failed = false;
  std::string status = "ok";  // error text for failed cells
  StageTimes times;

  friend bool operator==(const ResultRow& a, const ResultRow& b);
};

/// Grid cells per image pair.
std::size_t cells_per_pair(const RunConfig& config);

/// Prepared descriptors for one image, shared across grid cells.
struct DescribedImage {
  DescriptorSet descriptors;
  double detect_ms = 0.0;
  double describe_ms = 0.0;
  std::string error;  // non-empty when detection/description failed
};

/// Resolves the configured backend (loads network and weights once).
DescriptorBackend make_backend(const RunConfig& config);

DescribedImage describe_image(const Image& img, const RunConfig& config,
                              const DescriptorBackend& backend);

/// All grid cells for one described pair, in (metric, method, threshold)
/// order.
std::vector<ResultRow> run_pair(const DescribedImage& a, const DescribedImage& b,
                                const Homography& h_gt, const RunConfig& config,
                                const std::string& subset, int pair);

/// Rows ordered by (subset, pair, metric, method, threshold). Cell-level
/// failures land in ResultRow::status; only config errors throw.
std::vector<ResultRow> run_benchmark(const RunConfig& config);

/// Deterministic columns only; timings go to timings.csv.
std::string write_results_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(std::string_view text);
std::string write_timings_csv(const std::vector<ResultRow>& rows);

enum class Measure { KeGh, Tp, KeCh, InlierRatio };
std::string to_string(Measure m);

/// Grouped bars: one group per image pair, one series per metric, rows
/// filtered to (method, threshold).
std::string render_svg(const std::vector<ResultRow>& rows,
                       const std::string& subset, Measure measure,
                       MatchMethod method, double threshold);

/// Writes results.csv, timings.csv and <subset>_<measure>.svg files.
/// Returns the written paths. Throws IoError.
std::vector<std::filesystem::path> emit_report(
    const std::vector<ResultRow>& rows, const std::filesystem::path& out_dir,
    MatchMethod chart_method = MatchMethod::Nnr1, double chart_threshold = 1.1);

}  // namespace regkit
