#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "chnet/matrix.hpp"
#include "chnet/rng.hpp"

namespace chnet {

// Layers here are shape descriptors over a flat parameter vector owned by
// the model; each layer knows the offset of its block. Activations are laid
// out channels x positions: one column per antenna (or per sample), so the
// inner loops run along the antenna axis.

/// Named, contiguous slice of a flat parameter vector.
struct ParamBlock {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// y = W x + b 1^T, W out x in (row-major), then b.
class DenseLayer {
 public:
  DenseLayer(std::size_t in, std::size_t out, std::size_t offset = 0);

  std::size_t in() const noexcept { return in_; }
  std::size_t out() const noexcept { return out_; }
  std::size_t offset() const noexcept { return offset_; }
  std::size_t param_count() const noexcept { return out_ * in_ + out_; }
  std::size_t bias_offset() const noexcept { return offset_ + out_ * in_; }

  RealMatrix forward(std::span<const double> params, const RealMatrix& x) const;
  /// Accumulates dW, db into grads; returns dX.
  RealMatrix backward(std::span<const double> params, const RealMatrix& x,
                      const RealMatrix& dy, std::span<double> grads) const;
  /// He-uniform weights scaled by gain, zero bias.
  void initialize(std::span<double> params, RngStream& stream, double gain = 1.0) const;

 private:
  std::size_t in_, out_, offset_;
};

RealMatrix relu_forward(const RealMatrix& x);
/// dX = dY where x > 0, else 0 (subgradient 0 at exactly 0).
RealMatrix relu_backward(const RealMatrix& x, const RealMatrix& dy);

struct ReluLayer {};

/// Zero-padded "same" convolution along the position axis (a
/// cross-correlation, as in most learning frameworks).
/// Kernels stored filters x in_channels x kernel_size, then bias(filters).
class Conv1dLayer {
 public:
  Conv1dLayer(std::size_t in_channels, std::size_t filters, std::size_t kernel_size,
              std::size_t offset = 0);

  std::size_t in_channels() const noexcept { return in_; }
  std::size_t filters() const noexcept { return filters_; }
  std::size_t kernel_size() const noexcept { return kernel_; }
  std::size_t offset() const noexcept { return offset_; }
  std::size_t param_count() const noexcept { return filters_ * in_ * kernel_ + filters_; }
  std::size_t bias_offset() const noexcept { return offset_ + filters_ * in_ * kernel_; }

  RealMatrix forward(std::span<const double> params, const RealMatrix& x) const;
  RealMatrix backward(std::span<const double> params, const RealMatrix& x,
                      const RealMatrix& dy, std::span<double> grads) const;
  void initialize(std::span<double> params, RngStream& stream, double gain = 1.0) const;

 private:
  std::size_t in_, filters_, kernel_, offset_;
};

using Layer = std::variant<DenseLayer, ReluLayer, Conv1dLayer>;

/// Layer inputs recorded by a forward pass, consumed by backward.
struct SequentialCache {
  std::vector<RealMatrix> inputs;
};

/// Straight chain of layers sharing one parameter vector.
class Sequential {
 public:
  Sequential() = default;
  explicit Sequential(std::vector<Layer> layers);

  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t param_count() const noexcept;

  RealMatrix forward(std::span<const double> params, const RealMatrix& x,
                     SequentialCache* cache = nullptr) const;
  RealMatrix backward(std::span<const double> params, const SequentialCache& cache,
                      const RealMatrix& dy, std::span<double> grads) const;

 private:
  std::vector<Layer> layers_;
};

struct XentResult {
  double loss = 0.0;
  RealMatrix dlogits;  ///< same shape as logits
};

/// Mean over rows of -log softmax(logits_row)[label]; logits is batch x C.
XentResult softmax_xent(const RealMatrix& logits, std::span<const std::uint32_t> labels);

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a flat parameter vector.
class AdamState {
 public:
  AdamState(std::size_t n, AdamConfig config = {});

  void step(std::span<double> params, std::span<const double> grads, double lr);

  std::uint64_t steps() const noexcept { return t_; }
  const std::vector<double>& first_moment() const noexcept { return m_; }
  const std::vector<double>& second_moment() const noexcept { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

struct GradCheckEntry {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;  ///< index within the block
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double tolerance = 0.0;
  std::vector<GradCheckEntry> entries;

  bool passed() const noexcept;
  double max_rel_error() const noexcept;
  /// Entries above tolerance.
  std::vector<GradCheckEntry> failures() const;
};

using LossFn = std::function<double(std::span<const double>)>;

/// Compares analytic gradients with central differences, block by block.
/// Relative error is |a - n| / max(|a|, |n|, abs_floor); the floor keeps
/// exactly-zero gradients from amplifying roundoff in the difference quotient.
GradCheckReport grad_check(std::span<const double> params,
                           std::span<const double> analytic,
                           std::span<const ParamBlock> blocks, const LossFn& loss,
                           double tolerance, double step = 1e-5,
                           double abs_floor = 1e-4);

}  // namespace chnet
