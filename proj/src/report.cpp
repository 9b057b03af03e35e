#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "regkit/error.hpp"
#include "regkit/harness.hpp"

namespace regkit {
namespace {

namespace fs = std::filesystem;

const char* const kResultColumns[] = {
    "subset", "pair",      "backend", "tap",        "metric",
    "method", "threshold", "n_keypoints_a", "n_keypoints_b", "n_matches",
    "tp",     "ke_gh",     "ke_ch",   "inlier_ratio", "ransac_failed",
    "status"};
constexpr std::size_t kResultColumnCount = std::size(kResultColumns);

// Shortest text that parses back to the same double.
std::string fmt_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt_double(*v) : std::string();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void append_record(std::string& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += csv_field(fields[i]);
  }
  out += "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, field_started = false;
  std::size_t i = 0;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    records.push_back(std::move(record));
    record.clear();
    field_started = false;
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      ++i;
      continue;
    }
    if (c == '"' && field.empty()) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = true;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      end_record();
      ++i;
    } else if (c == '\n') {
      end_record();
    } else {
      field += c;
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw Error(ErrorCode::ParseError, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  return records;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
  }
  return v;
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return parse_double(s);
}

std::size_t parse_count(const std::string& s) {
  const double v = parse_double(s);
  if (v < 0 || v != std::floor(v)) {
    throw Error(ErrorCode::ParseError, "not a count: '" + s + "'");
  }
  return static_cast<std::size_t>(v);
}

std::optional<double> measure_value(const ResultRow& r, Measure m) {
  switch (m) {
    case Measure::KeGh: return r.ke_gh;
    case Measure::Tp:
      return r.status == "ok" ? std::optional<double>(static_cast<double>(r.tp))
                              : std::nullopt;
    case Measure::KeCh: return r.ke_ch;
    case Measure::InlierRatio: return r.inlier_ratio;
  }
  return std::nullopt;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace

bool operator==(const ResultRow& a, const ResultRow& b) {
  return a.subset == b.subset && a.pair == b.pair && a.backend == b.backend &&
         a.tap == b.tap && a.metric == b.metric && a.method == b.method &&
         a.threshold == b.threshold && a.n_keypoints_a == b.n_keypoints_a &&
         a.n_keypoints_b == b.n_keypoints_b && a.n_matches == b.n_matches &&
         a.tp == b.tp && a.ke_gh == b.ke_gh && a.ke_ch == b.ke_ch &&
         a.inlier_ratio == b.inlier_ratio && a.ransac_failed == b.ransac_failed &&
         a.status == b.status;
}

std::string write_results_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  append_record(out, {std::begin(kResultColumns), std::end(kResultColumns)});
  for (const auto& r : rows) {
    append_record(out, {r.subset, std::to_string(r.pair), r.backend, r.tap,
                        r.metric, r.method, fmt_double(r.threshold),
                        std::to_string(r.n_keypoints_a),
                        std::to_string(r.n_keypoints_b),
                        std::to_string(r.n_matches), std::to_string(r.tp),
                        fmt_opt(r.ke_gh), fmt_opt(r.ke_ch),
                        fmt_opt(r.inlier_ratio), r.ransac_failed ? "1" : "0",
                        r.status});
  }
  return out;
}

std::vector<ResultRow> parse_results_csv(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty() || records[0].size() != kResultColumnCount ||
      !std::equal(records[0].begin(), records[0].end(), std::begin(kResultColumns))) {
    throw Error(ErrorCode::ParseError, "results.csv header mismatch");
  }
  std::vector<ResultRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != kResultColumnCount) {
      throw Error(ErrorCode::ParseError,
                  "record " + std::to_string(i) + " has " +
                      std::to_string(f.size()) + " fields");
    }
    ResultRow r;
    r.subset = f[0];
    r.pair = static_cast<int>(parse_count(f[1]));
    r.backend = f[2];
    r.tap = f[3];
    r.metric = f[4];
    r.method = f[5];
    r.threshold = parse_double(f[6]);
    r.n_keypoints_a = parse_count(f[7]);
    r.n_keypoints_b = parse_count(f[8]);
    r.n_matches = parse_count(f[9]);
    r.tp = parse_count(f[10]);
    r.ke_gh = parse_opt(f[11]);
    r.ke_ch = parse_opt(f[12]);
    r.inlier_ratio = parse_opt(f[13]);
    r.ransac_failed = f[14] == "1";
    r.status = f[15];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string write_timings_csv(const std::vector<ResultRow>& rows) {
  std::string out;
  append_record(out, {"subset", "pair", "metric", "method", "threshold",
                      "detect_ms", "describe_ms", "distance_ms", "match_ms",
                      "eval_ms"});
  for (const auto& r : rows) {
    append_record(out, {r.subset, std::to_string(r.pair), r.metric, r.method,
                        fmt_double(r.threshold), fmt_double(r.times.detect_ms),
                        fmt_double(r.times.describe_ms),
                        fmt_double(r.times.distance_ms),
                        fmt_double(r.times.match_ms), fmt_double(r.times.eval_ms)});
  }
  return out;
}

std::string to_string(Measure m) {
  switch (m) {
    case Measure::KeGh: return "ke_gh";
    case Measure::Tp: return "tp";
    case Measure::KeCh: return "ke_ch";
    case Measure::InlierRatio: return "inlier_ratio";
  }
  return "?";
}

std::string render_svg(const std::vector<ResultRow>& rows,
                       const std::string& subset, Measure measure,
                       MatchMethod method, double threshold) {
  const std::string method_name = to_string(method);
  std::vector<int> pairs;
  std::vector<std::string> metrics;
  std::map<std::pair<int, std::string>, double> values;
  for (const auto& r : rows) {
    if (r.subset != subset || r.method != method_name ||
        std::abs(r.threshold - threshold) > 1e-9) {
      continue;
    }
    if (std::find(pairs.begin(), pairs.end(), r.pair) == pairs.end())
      pairs.push_back(r.pair);
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end())
      metrics.push_back(r.metric);
    if (auto v = measure_value(r, measure)) values[{r.pair, r.metric}] = *v;
  }
  double vmax = 0.0;
  for (const auto& [key, v] : values) vmax = std::max(vmax, v);
  if (!(vmax > 0.0)) vmax = 1.0;

  static const char* const kColors[] = {"#4e79a7", "#f28e2b", "#e15759",
                                        "#76b7b2", "#59a14f", "#edc948",
                                        "#b07aa1", "#ff9da7"};
  const int width = 720, height = 400;
  const int left = 60, right = 150, top = 40, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  const double group_w = pairs.empty() ? plot_w : plot_w / pairs.size();
  const double bar_w =
      metrics.empty() ? 0.0 : group_w * 0.8 / static_cast<double>(metrics.size());

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                "height=\"%d\" viewBox=\"0 0 %d %d\" font-family=\"sans-serif\" "
                "font-size=\"12\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + std::to_string(width / 2) +
         "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
         xml_escape(subset + ": " + to_string(measure) + " (" + method_name +
                    ", threshold " + fmt_double(threshold) + ")") +
         "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n"
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n",
                left, top, left, height - bottom, left, height - bottom,
                width - right, height - bottom);
  svg += buf;
  for (int t = 0; t <= 4; ++t) {
    const double v = vmax * t / 4.0;
    const double y = height - bottom - plot_h * t / 4.0;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%.1f\" text-anchor=\"end\">%s</text>\n",
                  left - 5, y + 4, fmt_double(v).substr(0, 6).c_str());
    svg += buf;
  }
  for (std::size_t g = 0; g < pairs.size(); ++g) {
    const double gx = left + g * group_w + group_w * 0.1;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      const auto it = values.find({pairs[g], metrics[m]});
      if (it == values.end()) continue;
      const double h = plot_h * it->second / vmax;
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.1f\" y=\"%.1f\" width=\"%.1f\" height=\"%.1f\" "
                    "fill=\"%s\"/>\n",
                    gx + m * bar_w, height - bottom - h, bar_w, h,
                    kColors[m % std::size(kColors)]);
      svg += buf;
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.1f\" y=\"%d\" text-anchor=\"middle\">1-%d</text>\n",
                  left + (g + 0.5) * group_w, height - bottom + 18, pairs[g]);
    svg += buf;
  }
  for (std::size_t m = 0; m < metrics.size(); ++m) {
    const int y = top + 10 + static_cast<int>(m) * 18;
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%d\" y=\"%d\" width=\"12\" height=\"12\" fill=\"%s\"/>\n"
                  "<text x=\"%d\" y=\"%d\">",
                  width - right + 15, y, kColors[m % std::size(kColors)],
                  width - right + 32, y + 11);
    svg += buf;
    svg += xml_escape(metrics[m]) + "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<fs::path> emit_report(const std::vector<ResultRow>& rows,
                                  const fs::path& out_dir,
                                  MatchMethod chart_method,
                                  double chart_threshold) {
  if (rows.empty()) throw Error(ErrorCode::IoError, "no rows to report");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir.string());

  std::vector<fs::path> written;
  written.push_back(out_dir / "results.csv");
  write_file(written.back(), write_results_csv(rows));
  written.push_back(out_dir / "timings.csv");
  write_file(written.back(), write_timings_csv(rows));

  std::vector<std::string> subsets;
  for (const auto& r : rows)
    if (std::find(subsets.begin(), subsets.end(), r.subset) == subsets.end())
      subsets.push_back(r.subset);
  for (const auto& s : subsets) {
    for (Measure m : {Measure::KeGh, Measure::Tp, Measure::KeCh,
                      Measure::InlierRatio}) {
      written.push_back(out_dir / (s + "_" + to_string(m) + ".svg"));
      write_file(written.back(),
                 render_svg(rows, s, m, chart_method, chart_threshold));
    }
  }
  return written;
}

}  // namespace regkit
