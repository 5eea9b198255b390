#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chnet/matrix.hpp"
#include "chnet/modulation.hpp"
#include "chnet/rng.hpp"

namespace chnet {

enum class FadingModel { rayleigh, kronecker };
enum class NoiseKind { gaussian, student_t, laplace };

struct NoiseModel {
  NoiseKind kind = NoiseKind::gaussian;
  /// Degrees of freedom, Student-t only; must exceed 2.
  double nu = 3.0;
};

struct ChannelScenario {
  std::size_t n_r = 64;
  std::size_t n_t = 32;
  FadingModel model = FadingModel::rayleigh;
  /// Exponential correlation coefficient, Kronecker only.
  double rho = 0.0;
  NoiseModel noise;
  /// Channel-estimation SNR in dB; unset means the receiver knows H exactly.
  std::optional<double> est_snr_db;
  unsigned qam_order = 16;
  std::uint64_t seed = 0;

  /// Real-valued (lifted) dimensions.
  std::size_t rx_dim() const noexcept { return 2 * n_r; }
  std::size_t tx_dim() const noexcept { return 2 * n_t; }

  /// Throws ConfigError on n_t > n_r, rho outside [0,1), nu <= 2, ...
  void validate() const;
  /// Stable, comma-free label such as "nr32-nt16-qam16-rayleigh-gaussian".
  std::string digest() const;
};

std::string to_string(FadingModel m);
std::string to_string(NoiseKind k);

/// R_ij = rho^|i-j|.
RealMatrix exponential_correlation(std::size_t n, double rho);

/// Draws lifted channel matrices for a scenario. Correlation square roots
/// are computed once at construction.
class ChannelGenerator {
 public:
  explicit ChannelGenerator(const ChannelScenario& scenario);

  /// Complex N_r x N_t draw: Rayleigh entries CN(0, 1/N_r), or
  /// R_R^{1/2} H_w R_T^{1/2} for the Kronecker model.
  ComplexMatrix draw_complex(RngStream& stream) const;
  RealMatrix draw(RngStream& stream) const { return lift_complex(draw_complex(stream)); }

  const RealMatrix& rx_root() const noexcept { return rx_root_; }
  const RealMatrix& tx_root() const noexcept { return tx_root_; }

 private:
  ChannelScenario scenario_;
  RealMatrix rx_root_;
  RealMatrix tx_root_;
};

/// E||Hx||^2 for the scenario's channel ensemble and complex symbols of
/// average power x_power: x_power * tr(R_R) tr(R_T) / N_r (= x_power N_t).
double expected_signal_power(const ChannelScenario& scenario, double x_power = 1.0);

/// Per-real-dimension noise variance giving signal_power / (n_real * var)
/// = 10^(snr_db/10). +inf dB yields 0.
double noise_variance(double signal_power, std::size_t n_real, double snr_db);

/// Ensemble-calibrated per-real-dimension noise variance for a scenario.
double calibrate_noise(const ChannelScenario& scenario, double x_power, double snr_db);

/// Calibration against one known lifted channel: uses ||H||_F^2 * x_power / 2
/// as the signal power (x_power is the complex-symbol power).
double calibrate_noise(const RealMatrix& h, double x_power, double snr_db);

/// n i.i.d. draws with variance exactly noise_var.
RealVector draw_noise(const NoiseModel& model, double noise_var, std::size_t n,
                      RngStream& stream);

/// H + E with E i.i.d. N(0, ||H||_F^2 / (N K 10^(snr_h_db/10))).
RealMatrix perturb_channel(const RealMatrix& h, double snr_h_db, RngStream& stream);

struct TransmissionSample {
  RealMatrix h;       ///< true lifted channel
  RealMatrix h_hat;   ///< receiver's channel (h unless estimation error)
  RealVector y;
  RealVector noise;   ///< the exact n in y = h x + n
  SymbolFrame frame;
  double snr_db = 0.0;
  double noise_var = 0.0;
};

/// Per-sample transmission generator. Each sample consumes its own
/// substreams for channel, symbols, noise and estimation error, so variants
/// of a scenario that differ only in the estimation error or noise family
/// share everything else.
class Simulator {
 public:
  Simulator(const ChannelScenario& scenario, const Constellation& constellation);

  TransmissionSample sample(double snr_db, const RngStream& sample_stream) const;
  /// Sample i uses stream.substream(i).
  std::vector<TransmissionSample> batch(double snr_db, std::size_t count,
                                        const RngStream& stream) const;

  const ChannelScenario& scenario() const noexcept { return scenario_; }
  const Constellation& constellation() const noexcept { return constellation_; }

 private:
  ChannelScenario scenario_;
  Constellation constellation_;
  ChannelGenerator generator_;
};

/// Convenience wrapper over Simulator::batch. snr_db = +inf means noiseless.
std::vector<TransmissionSample> simulate(const ChannelScenario& scenario,
                                         const Constellation& constellation,
                                         double snr_db, std::size_t batch,
                                         const RngStream& stream);

}  // namespace chnet
