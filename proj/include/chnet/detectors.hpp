#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "chnet/matrix.hpp"
#include "chnet/modulation.hpp"

namespace chnet {

/// Problem data for one detection: lifted channel, received vector and,
/// for detectors that need it, the per-real-dimension noise variance.
/// Non-owning; the referenced objects must outlive the call.
struct DetectorInput {
  const RealMatrix& h;
  std::span<const double> y;
  std::optional<double> noise_var;
  const Constellation& constellation;
};

struct DetectionResult {
  SymbolFrame hard;
  /// Pre-slicer estimate; hard == slice(soft) when present.
  std::optional<RealVector> soft;
  /// K x classes class scores (learned detectors only).
  std::optional<RealMatrix> logits;
  /// Multiplications counted while a MultScope was active; else 0.
  std::uint64_t mults = 0;
  /// AMP only: an iterate went non-finite and the last finite one was used.
  bool diverged = false;
};

/// soft = (H^T H)^{-1} H^T y. Throws RankDeficientError.
DetectionResult detect_zf(const DetectorInput& in);
/// soft = (H^T H + sigma^2 I)^{-1} H^T y. Throws ConfigError without noise_var.
DetectionResult detect_mmse(const DetectorInput& in);

inline constexpr std::size_t kAmpIterations = 50;

/// AMP with a per-entry posterior-mean denoiser over the PAM prior.
DetectionResult detect_amp(const DetectorInput& in,
                           std::size_t iterations = kAmpIterations);

/// Ordered ZF successive interference cancellation (V-BLAST).
DetectionResult detect_vblast(const DetectorInput& in);

/// Largest search space detect_ml accepts, in candidate vectors.
inline constexpr std::uint64_t kMlSearchCap = 1'000'000;

/// Exhaustive argmin of ||y - Hx||^2 over the lifted alphabet; ties go to
/// the lexicographically smallest label vector. Throws InstanceTooLargeError.
DetectionResult detect_ml(const DetectorInput& in);

/// Posterior mean and variance of a uniform PAM symbol observed as
/// u = s + N(0, tau2). Exposed for testing.
struct PamPosterior {
  double mean;
  double variance;
};
PamPosterior pam_posterior(std::span<const double> levels, double u, double tau2);

using DetectorFn = std::function<DetectionResult(const DetectorInput&)>;

struct NamedDetector {
  std::string name;
  DetectorFn run;
};

/// "zf", "mmse", "amp", "vblast" or "ml". Throws ConfigError otherwise.
NamedDetector make_classic_detector(std::string_view name);
bool is_classic_detector(std::string_view name);

}  // namespace chnet
