#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "chnet/detectors.hpp"
#include "chnet/matrix.hpp"
#include "chnet/neural.hpp"
#include "chnet/rng.hpp"

namespace chnet {

enum class Variant : std::uint32_t { mlp = 0, conv = 1 };
/// Where the convolution stack sits relative to the per-antenna MLP inside
/// each antenna feature processor (Conv variant only).
enum class ConvPlacement : std::uint32_t { before_mlp = 0, after_mlp = 1 };

struct ChannelNetConfig {
  std::size_t iterations = 20;  ///< L
  std::size_t features = 10;    ///< d
  std::size_t hidden = 10;      ///< neurons in the MLP hidden layer
  std::size_t classes = 4;      ///< PAM levels per real dimension
  Variant variant = Variant::mlp;
  std::size_t kernel_size = 3;
  std::size_t filters = 10;
  ConvPlacement placement = ConvPlacement::before_mlp;

  void validate() const;
  friend bool operator==(const ChannelNetConfig&, const ChannelNetConfig&) = default;
};

std::string to_string(Variant v);
std::string to_string(ConvPlacement p);

/// He-uniform gain for the last layer of every processor.
inline constexpr double kOutputInitGain = 0.3;
/// Gain for the final (logit) layer, so an untrained model starts near the
/// uniform class distribution.
inline constexpr double kHeadInitGain = 0.01;

/// All trainable state of a ChannelNet detector. Parameters live in one flat
/// vector, iteration by iteration, receive processor before transmit
/// processor, layers in order, weights before biases.
class ChannelNetModel {
 public:
  explicit ChannelNetModel(ChannelNetConfig config);

  /// He-uniform weights, zero biases; processor output layers use
  /// kOutputInitGain and the logit layer kHeadInitGain.
  void initialize(RngStream& stream);

  const ChannelNetConfig& config() const noexcept { return config_; }
  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::size_t param_count() const noexcept { return params_.size(); }

  /// Receive processor Phi of iteration t (0-based).
  const Sequential& rx(std::size_t t) const { return rx_.at(t); }
  /// Transmit processor Psi of iteration t (0-based).
  const Sequential& tx(std::size_t t) const { return tx_.at(t); }

  /// Named blocks covering params() in storage order, e.g. "rx1.dense2.bias".
  const std::vector<ParamBlock>& blocks() const noexcept { return blocks_; }

  friend bool operator==(const ChannelNetModel& a, const ChannelNetModel& b) {
    return a.config_ == b.config_ && a.params_ == b.params_;
  }

 private:
  ChannelNetConfig config_;
  std::vector<Sequential> rx_, tx_;
  std::vector<ParamBlock> blocks_;
  std::vector<double> params_;
};

/// Activations kept by forward() for backward().
struct ChannelNetCache {
  RealMatrix h_t;  ///< H^T, K x N
  std::vector<SequentialCache> rx, tx;
};

/// Runs the detector on one (H, y). Returns K x classes logits. Throws
/// NumericError naming the iteration if features stop being finite.
RealMatrix forward(const ChannelNetModel& model, const RealMatrix& h,
                   std::span<const double> y, ChannelNetCache* cache = nullptr);

/// Reverse pass matching a cached forward; accumulates into grads.
void backward(const ChannelNetModel& model, const RealMatrix& h,
              const ChannelNetCache& cache, const RealMatrix& dlogits,
              std::span<double> grads);

/// Hard decisions from per-antenna argmax (ties to the lower class).
/// Never reads in.noise_var.
DetectionResult detect(const ChannelNetModel& model, const DetectorInput& in);

/// Multiplications one forward pass performs, in closed form.
std::uint64_t forward_mults(const ChannelNetConfig& config, std::size_t n, std::size_t k);
/// The subset spent in the two channel layers: (2L - 1) d N K.
std::uint64_t channel_layer_mults(const ChannelNetConfig& config, std::size_t n,
                                  std::size_t k);

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize(const ChannelNetModel& model);
/// Throws CheckpointError on bad magic, version, shape or length.
ChannelNetModel deserialize(std::span<const std::uint8_t> bytes);
void save_checkpoint(const ChannelNetModel& model, const std::filesystem::path& path);
ChannelNetModel load_checkpoint(const std::filesystem::path& path);

}  // namespace chnet
