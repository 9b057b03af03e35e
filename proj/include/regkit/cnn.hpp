#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace regkit {

enum class LayerKind { Conv, Relu, MaxPool, Fc };

struct LayerSpec {
  std::string name;
  LayerKind kind = LayerKind::Relu;
  // conv
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;  // conv and maxpool
  int stride = 1;  // conv and maxpool
  int pad = 0;     // conv only
  // fc
  int in_features = 0;
  int out_features = 0;
};

struct NetworkConfig {
  int input_side = 0;
  int input_channels = 0;
  std::vector<LayerSpec> layers;
  std::string tap;
  // Network input = intensity * input_scale - input_mean[channel].
  double input_scale = 1.0;
  std::vector<double> input_mean;
};

/// Activation shape, (row, column, channel) order; fc outputs are 1x1xN.
struct TensorShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(height) * width * channels;
  }
  friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

using ShapeTrace = std::vector<std::pair<std::string, TensorShape>>;

/// Propagates shapes layer by layer. Throws ShapeMismatch naming the first
/// offending layer, ConfigError for duplicate names or an unknown tap.
ShapeTrace validate_network(const NetworkConfig& cfg);

/// Number of 32-bit reals the weights blob must contain.
std::size_t expected_weight_count(const NetworkConfig& cfg);

/// JSON network description; unknown keys are rejected with ConfigError.
NetworkConfig parse_network_config(std::string_view text);
std::string format_network_config(const NetworkConfig& cfg);

/// Validated config plus weights, immutable after construction.
/// Conv weights arrive as [out][in][kh][kw] and fc weights as [out][in],
/// each followed by its bias vector, layers in config order.
class Network {
 public:
  /// Throws WeightSizeMismatch when the count differs from the config.
  Network(NetworkConfig cfg, std::vector<float> weights);

  /// Raw little-endian float32 blob.
  static Network from_blob(NetworkConfig cfg,
                           std::span<const std::uint8_t> blob);

  const NetworkConfig& config() const { return cfg_; }
  const ShapeTrace& trace() const { return trace_; }
  TensorShape tap_shape() const;

  /// Input is side x side x channels in (row, column, channel) order.
  /// Returns the tap activations flattened in the same order.
  /// Throws ShapeMismatch on a wrong input length.
  std::vector<float> forward(std::span<const float> input) const;

 private:
  struct LayerWeights {
    std::vector<float> weights;  // conv: [out][kh][kw][in]; fc: [out][in]
    std::vector<float> bias;
  };

  NetworkConfig cfg_;
  ShapeTrace trace_;
  std::vector<LayerWeights> params_;  // parallel to cfg_.layers
  std::size_t tap_index_ = 0;
};

std::vector<std::uint8_t> weights_to_blob(std::span<const float> weights);

}  // namespace regkit
