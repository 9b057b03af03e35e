#include "regkit/cnn.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <set>

#include <json.hpp>

#include "regkit/error.hpp"

namespace regkit {
namespace {

using nlohmann::json;

std::string shape_str(const TensorShape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
         std::to_string(s.channels);
}

[[noreturn]] void mismatch(const LayerSpec& layer, const std::string& what) {
  throw Error(ErrorCode::ShapeMismatch, "layer '" + layer.name + "': " + what);
}

int pooled_side(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

const char* kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Conv: return "conv";
    case LayerKind::Relu: return "relu";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Fc: return "fc";
  }
  return "?";
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorCode::ConfigError, where + " must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      throw Error(ErrorCode::ConfigError,
                  "unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw Error(ErrorCode::ConfigError,
                "missing key '" + std::string(key) + "' in " + where);
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError,
                "bad value for '" + std::string(key) + "' in " + where);
  }
}

}  // namespace

ShapeTrace validate_network(const NetworkConfig& cfg) {
  if (cfg.input_side <= 0 || cfg.input_channels <= 0) {
    throw Error(ErrorCode::ShapeMismatch, "input shape must be positive");
  }
  std::set<std::string> names;
  ShapeTrace trace;
  TensorShape shape{cfg.input_side, cfg.input_side, cfg.input_channels};
  for (const auto& layer : cfg.layers) {
    if (layer.name.empty() || !names.insert(layer.name).second) {
      throw Error(ErrorCode::ConfigError,
                  "layer names must be unique and non-empty: '" + layer.name +
                      "'");
    }
    switch (layer.kind) {
      case LayerKind::Conv: {
        if (layer.in_channels <= 0 || layer.out_channels <= 0 ||
            layer.kernel <= 0 || layer.stride <= 0 || layer.pad < 0) {
          mismatch(layer, "conv dimensions must be positive");
        }
        if (shape.channels != layer.in_channels) {
          mismatch(layer, "expects " + std::to_string(layer.in_channels) +
                              " input channels, got " + shape_str(shape));
        }
        if (shape.height + 2 * layer.pad < layer.kernel ||
            shape.width + 2 * layer.pad < layer.kernel) {
          mismatch(layer, "kernel larger than padded input " + shape_str(shape));
        }
        shape = {pooled_side(shape.height, layer.kernel, layer.stride, layer.pad),
                 pooled_side(shape.width, layer.kernel, layer.stride, layer.pad),
                 layer.out_channels};
        break;
      }
      case LayerKind::Relu:
        break;
      case LayerKind::MaxPool: {
        if (layer.kernel <= 0 || layer.stride <= 0) {
          mismatch(layer, "pool dimensions must be positive");
        }
        if (shape.height < layer.kernel || shape.width < layer.kernel) {
          mismatch(layer, "pool window larger than input " + shape_str(shape));
        }
        shape = {pooled_side(shape.height, layer.kernel, layer.stride, 0),
                 pooled_side(shape.width, layer.kernel, layer.stride, 0),
                 shape.channels};
        break;
      }
      case LayerKind::Fc: {
        if (layer.in_features <= 0 || layer.out_features <= 0) {
          mismatch(layer, "fc dimensions must be positive");
        }
        if (shape.size() != static_cast<std::size_t>(layer.in_features)) {
          mismatch(layer, "expects " + std::to_string(layer.in_features) +
                              " inputs, got " + shape_str(shape) + " = " +
                              std::to_string(shape.size()));
        }
        shape = {1, 1, layer.out_features};
        break;
      }
    }
    trace.emplace_back(layer.name, shape);
  }
  if (!cfg.input_mean.empty() &&
      cfg.input_mean.size() != static_cast<std::size_t>(cfg.input_channels)) {
    throw Error(ErrorCode::ConfigError,
                "input_mean needs one entry per input channel");
  }
  if (!names.contains(cfg.tap)) {
    throw Error(ErrorCode::ConfigError, "tap '" + cfg.tap + "' names no layer");
  }
  return trace;
}

std::size_t expected_weight_count(const NetworkConfig& cfg) {
  std::size_t total = 0;
  for (const auto& l : cfg.layers) {
    if (l.kind == LayerKind::Conv) {
      total += static_cast<std::size_t>(l.out_channels) * l.in_channels *
                   l.kernel * l.kernel +
               l.out_channels;
    } else if (l.kind == LayerKind::Fc) {
      total += static_cast<std::size_t>(l.out_features) * l.in_features +
               l.out_features;
    }
  }
  return total;
}

NetworkConfig parse_network_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError,
                std::string("network config is not valid JSON: ") + e.what());
  }
  check_keys(doc, {"input", "layers", "tap", "input_scale", "input_mean"},
             "network config");
  NetworkConfig cfg;
  const json input = doc.value("input", json::object());
  check_keys(input, {"side", "channels"}, "input");
  cfg.input_side = required<int>(input, "side", "input");
  cfg.input_channels = required<int>(input, "channels", "input");
  cfg.tap = required<std::string>(doc, "tap", "network config");
  cfg.input_scale = doc.value("input_scale", 1.0);
  if (doc.contains("input_mean")) {
    cfg.input_mean = required<std::vector<double>>(doc, "input_mean",
                                                   "network config");
  }
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw Error(ErrorCode::ConfigError, "network config needs a layers list");
  }
  for (const auto& entry : doc["layers"]) {
    LayerSpec l;
    const std::string type = required<std::string>(entry, "type", "layer");
    l.name = required<std::string>(entry, "name", "layer");
    const std::string where = "layer '" + l.name + "'";
    if (type == "conv") {
      check_keys(entry, {"name", "type", "in", "out", "kernel", "stride", "pad"},
                 where);
      l.kind = LayerKind::Conv;
      l.in_channels = required<int>(entry, "in", where);
      l.out_channels = required<int>(entry, "out", where);
      l.kernel = required<int>(entry, "kernel", where);
      l.stride = entry.value("stride", 1);
      l.pad = entry.value("pad", 0);
    } else if (type == "relu") {
      check_keys(entry, {"name", "type"}, where);
      l.kind = LayerKind::Relu;
    } else if (type == "maxpool") {
      check_keys(entry, {"name", "type", "kernel", "stride"}, where);
      l.kind = LayerKind::MaxPool;
      l.kernel = required<int>(entry, "kernel", where);
      l.stride = entry.value("stride", l.kernel);
    } else if (type == "fc") {
      check_keys(entry, {"name", "type", "in", "out"}, where);
      l.kind = LayerKind::Fc;
      l.in_features = required<int>(entry, "in", where);
      l.out_features = required<int>(entry, "out", where);
    } else {
      throw Error(ErrorCode::ConfigError,
                  "unknown layer type '" + type + "' in " + where);
    }
    cfg.layers.push_back(std::move(l));
  }
  return cfg;
}

std::string format_network_config(const NetworkConfig& cfg) {
  json doc;
  doc["input"] = {{"side", cfg.input_side}, {"channels", cfg.input_channels}};
  doc["tap"] = cfg.tap;
  doc["input_scale"] = cfg.input_scale;
  if (!cfg.input_mean.empty()) doc["input_mean"] = cfg.input_mean;
  doc["layers"] = json::array();
  for (const auto& l : cfg.layers) {
    json e{{"name", l.name}, {"type", kind_name(l.kind)}};
    switch (l.kind) {
      case LayerKind::Conv:
        e["in"] = l.in_channels;
        e["out"] = l.out_channels;
        e["kernel"] = l.kernel;
        e["stride"] = l.stride;
        e["pad"] = l.pad;
        break;
      case LayerKind::MaxPool:
        e["kernel"] = l.kernel;
        e["stride"] = l.stride;
        break;
      case LayerKind::Fc:
        e["in"] = l.in_features;
        e["out"] = l.out_features;
        break;
      case LayerKind::Relu:
        break;
    }
    doc["layers"].push_back(std::move(e));
  }
  return doc.dump(2) + "\n";
}

Network::Network(NetworkConfig cfg, std::vector<float> weights)
    : cfg_(std::move(cfg)), trace_(validate_network(cfg_)) {
  const std::size_t expected = expected_weight_count(cfg_);
  if (weights.size() != expected) {
    throw Error(ErrorCode::WeightSizeMismatch,
                "expected " + std::to_string(expected) + " weights, got " +
                    std::to_string(weights.size()));
  }
  std::size_t offset = 0;
  params_.resize(cfg_.layers.size());
  for (std::size_t li = 0; li < cfg_.layers.size(); ++li) {
    const auto& l = cfg_.layers[li];
    if (l.name == cfg_.tap) tap_index_ = li;
    auto& p = params_[li];
    if (l.kind == LayerKind::Conv) {
      const int oc = l.out_channels, ic = l.in_channels, k = l.kernel;
      p.weights.resize(static_cast<std::size_t>(oc) * ic * k * k);
      // [out][in][kh][kw] -> [out][kh][kw][in] so the inner loop walks
      // channel-contiguous input.
      for (int o = 0; o < oc; ++o)
        for (int c = 0; c < ic; ++c)
          for (int ky = 0; ky < k; ++ky)
            for (int kx = 0; kx < k; ++kx) {
              const std::size_t src =
                  offset + ((static_cast<std::size_t>(o) * ic + c) * k + ky) * k + kx;
              const std::size_t dst =
                  ((static_cast<std::size_t>(o) * k + ky) * k + kx) * ic + c;
              p.weights[dst] = weights[src];
            }
      offset += p.weights.size();
      p.bias.assign(weights.begin() + offset, weights.begin() + offset + oc);
      offset += oc;
    } else if (l.kind == LayerKind::Fc) {
      const std::size_t n = static_cast<std::size_t>(l.out_features) * l.in_features;
      p.weights.assign(weights.begin() + offset, weights.begin() + offset + n);
      offset += n;
      p.bias.assign(weights.begin() + offset,
                    weights.begin() + offset + l.out_features);
      offset += l.out_features;
    }
  }
}

Network Network::from_blob(NetworkConfig cfg,
                           std::span<const std::uint8_t> blob) {
  if (blob.size() % 4 != 0) {
    throw Error(ErrorCode::WeightSizeMismatch,
                "blob length " + std::to_string(blob.size()) +
                    " is not a multiple of 4");
  }
  std::vector<float> weights(blob.size() / 4);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(blob[4 * i]) |
                               static_cast<std::uint32_t>(blob[4 * i + 1]) << 8 |
                               static_cast<std::uint32_t>(blob[4 * i + 2]) << 16 |
                               static_cast<std::uint32_t>(blob[4 * i + 3]) << 24;
    weights[i] = std::bit_cast<float>(bits);
  }
  return Network(std::move(cfg), std::move(weights));
}

std::vector<std::uint8_t> weights_to_blob(std::span<const float> weights) {
  std::vector<std::uint8_t> out(weights.size() * 4);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(weights[i]);
    for (int b = 0; b < 4; ++b) out[4 * i + b] = (bits >> (8 * b)) & 0xff;
  }
  return out;
}

TensorShape Network::tap_shape() const { return trace_[tap_index_].second; }

std::vector<float> Network::forward(std::span<const float> input) const {
  TensorShape shape{cfg_.input_side, cfg_.input_side, cfg_.input_channels};
  if (input.size() != shape.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "input has " + std::to_string(input.size()) +
                    " values, network expects " + shape_str(shape));
  }
  std::vector<float> cur(input.begin(), input.end());
  std::vector<float> next;
  for (std::size_t li = 0; li <= tap_index_; ++li) {
    const auto& l = cfg_.layers[li];
    const TensorShape out = trace_[li].second;
    switch (l.kind) {
      case LayerKind::Conv: {
        const auto& p = params_[li];
        const int k = l.kernel, ic = l.in_channels;
        next.assign(out.size(), 0.0f);
        for (int oy = 0; oy < out.height; ++oy)
          for (int ox = 0; ox < out.width; ++ox) {
            const int iy0 = oy * l.stride - l.pad;
            const int ix0 = ox * l.stride - l.pad;
            for (int o = 0; o < out.channels; ++o) {
              double acc = p.bias[o];
              const float* w = &p.weights[static_cast<std::size_t>(o) * k * k * ic];
              for (int ky = 0; ky < k; ++ky) {
                const int iy = iy0 + ky;
                if (iy < 0 || iy >= shape.height) continue;
                for (int kx = 0; kx < k; ++kx) {
                  const int ix = ix0 + kx;
                  if (ix < 0 || ix >= shape.width) continue;
                  const float* x =
                      &cur[(static_cast<std::size_t>(iy) * shape.width + ix) * ic];
                  const float* wk = w + (static_cast<std::size_t>(ky) * k + kx) * ic;
                  double partial = 0.0;
                  for (int c = 0; c < ic; ++c)
                    partial += static_cast<double>(wk[c]) * x[c];
                  acc += partial;
                }
              }
              next[(static_cast<std::size_t>(oy) * out.width + ox) * out.channels + o] =
                  static_cast<float>(acc);
            }
          }
        cur.swap(next);
        break;
      }
      case LayerKind::Relu:
        for (float& v : cur) v = std::max(v, 0.0f);
        break;
      case LayerKind::MaxPool: {
        next.assign(out.size(), 0.0f);
        for (int oy = 0; oy < out.height; ++oy)
          for (int ox = 0; ox < out.width; ++ox)
            for (int c = 0; c < out.channels; ++c) {
              float m = -std::numeric_limits<float>::infinity();
              for (int ky = 0; ky < l.kernel; ++ky)
                for (int kx = 0; kx < l.kernel; ++kx) {
                  const int iy = oy * l.stride + ky, ix = ox * l.stride + kx;
                  m = std::max(m, cur[(static_cast<std::size_t>(iy) * shape.width + ix) *
                                          shape.channels + c]);
                }
              next[(static_cast<std::size_t>(oy) * out.width + ox) * out.channels + c] = m;
            }
        cur.swap(next);
        break;
      }
      case LayerKind::Fc: {
        const auto& p = params_[li];
        next.assign(out.size(), 0.0f);
        const std::size_t n_in = static_cast<std::size_t>(l.in_features);
        for (int o = 0; o < l.out_features; ++o) {
          const float* w = &p.weights[o * n_in];
          double acc = 0.0;
          for (std::size_t i = 0; i < n_in; ++i)
            acc += static_cast<double>(w[i]) * cur[i];
          next[o] = static_cast<float>(acc + p.bias[o]);
        }
        cur.swap(next);
        break;
      }
    }
    shape = out;
  }
  return cur;
}

}  // namespace regkit
