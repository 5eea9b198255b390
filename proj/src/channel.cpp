#include "chnet/channel.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "chnet/errors.hpp"

namespace chnet {

namespace {

enum Substream : std::uint64_t { kChannel = 0, kSymbols = 1, kNoise = 2, kEstimation = 3 };

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(FadingModel m) {
  return m == FadingModel::rayleigh ? "rayleigh" : "kronecker";
}

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::gaussian: return "gaussian";
    case NoiseKind::student_t: return "student_t";
    case NoiseKind::laplace: return "laplace";
  }
  return "unknown";
}

void ChannelScenario::validate() const {
  if (n_r == 0 || n_t == 0) throw ConfigError("scenario: antenna counts must be >= 1");
  if (n_t > n_r) throw ConfigError("scenario: n_t must not exceed n_r");
  if (model == FadingModel::kronecker && !(rho >= 0.0 && rho < 1.0))
    throw ConfigError("scenario: rho must lie in [0, 1)");
  if (noise.kind == NoiseKind::student_t && !(noise.nu > 2.0))
    throw ConfigError("scenario: Student-t nu must exceed 2");
  if (est_snr_db && std::isnan(*est_snr_db))
    throw ConfigError("scenario: est_snr_db is NaN");
  (void)Constellation(qam_order);
}

std::string ChannelScenario::digest() const {
  std::string s = "nr" + std::to_string(n_r) + "-nt" + std::to_string(n_t) +
                  "-qam" + std::to_string(qam_order) + "-";
  s += model == FadingModel::rayleigh ? "rayleigh" : "kron" + format_number(rho);
  switch (noise.kind) {
    case NoiseKind::gaussian: s += "-gaussian"; break;
    case NoiseKind::student_t: s += "-t" + format_number(noise.nu); break;
    case NoiseKind::laplace: s += "-laplace"; break;
  }
  if (est_snr_db && std::isfinite(*est_snr_db)) s += "-est" + format_number(*est_snr_db);
  return s;
}

RealMatrix exponential_correlation(std::size_t n, double rho) {
  RealMatrix r(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      r(i, j) = std::pow(rho, static_cast<double>(i > j ? i - j : j - i));
  return r;
}

ChannelGenerator::ChannelGenerator(const ChannelScenario& scenario)
    : scenario_(scenario) {
  scenario_.validate();
  if (scenario_.model == FadingModel::kronecker) {
    rx_root_ = symmetric_sqrt(exponential_correlation(scenario_.n_r, scenario_.rho));
    tx_root_ = symmetric_sqrt(exponential_correlation(scenario_.n_t, scenario_.rho));
  }
}

ComplexMatrix ChannelGenerator::draw_complex(RngStream& stream) const {
  const std::size_t nr = scenario_.n_r, nt = scenario_.n_t;
  // CN(0, 1/N_r): real and imaginary parts each carry half the variance
  const double sd = std::sqrt(0.5 / static_cast<double>(nr));
  ComplexMatrix hw(nr, nt);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t j = 0; j < nt; ++j) {
      const double re = stream.normal();
      const double im = stream.normal();
      hw(i, j) = {sd * re, sd * im};
    }
  if (scenario_.model == FadingModel::rayleigh) return hw;

  // R_R^{1/2} Hw R_T^{1/2}; both roots are real symmetric
  ComplexMatrix tmp(nr, nt);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t k = 0; k < nr; ++k) {
      const double a = rx_root_(i, k);
      if (a == 0.0) continue;
      for (std::size_t j = 0; j < nt; ++j) tmp(i, j) += a * hw(k, j);
    }
  ComplexMatrix h(nr, nt);
  for (std::size_t i = 0; i < nr; ++i)
    for (std::size_t k = 0; k < nt; ++k) {
      const Complex v = tmp(i, k);
      for (std::size_t j = 0; j < nt; ++j) h(i, j) += v * tx_root_(k, j);
    }
  return h;
}

double expected_signal_power(const ChannelScenario& scenario, double x_power) {
  // E||H x||^2 = x_power E||H||_F^2 = x_power tr(R_R) tr(R_T) / N_r, and the
  // exponential model has a unit diagonal, so both traces equal the sizes
  return x_power * static_cast<double>(scenario.n_r) *
         static_cast<double>(scenario.n_t) / static_cast<double>(scenario.n_r);
}

double noise_variance(double signal_power, std::size_t n_real, double snr_db) {
  if (std::isnan(snr_db)) throw ContractError("noise_variance: snr_db is NaN");
  if (snr_db == std::numeric_limits<double>::infinity()) return 0.0;
  return signal_power / (static_cast<double>(n_real) * std::pow(10.0, snr_db / 10.0));
}

double calibrate_noise(const ChannelScenario& scenario, double x_power, double snr_db) {
  return noise_variance(expected_signal_power(scenario, x_power), scenario.rx_dim(),
                        snr_db);
}

double calibrate_noise(const RealMatrix& h, double x_power, double snr_db) {
  // each real dimension carries half of the complex-symbol power
  const double signal = frobenius_squared(h) * 0.5 * x_power;
  return noise_variance(signal, h.rows(), snr_db);
}

RealVector draw_noise(const NoiseModel& model, double noise_var, std::size_t n,
                      RngStream& stream) {
  if (!(noise_var > 0.0)) throw ContractError("draw_noise: noise_var must be > 0");
  RealVector out(n);
  switch (model.kind) {
    case NoiseKind::gaussian: {
      const double sd = std::sqrt(noise_var);
      for (auto& v : out) v = sd * stream.normal();
      break;
    }
    case NoiseKind::student_t: {
      const double nu = model.nu;
      if (!(nu > 2.0)) throw ConfigError("draw_noise: Student-t needs nu > 2");
      // standard t has variance nu / (nu - 2)
      const double scale = std::sqrt(noise_var * (nu - 2.0) / nu);
      for (auto& v : out) {
        const double z = stream.normal();
        const double chi2 = 2.0 * stream.gamma(0.5 * nu);
        v = scale * z / std::sqrt(chi2 / nu);
      }
      break;
    }
    case NoiseKind::laplace: {
      // variance 2 b^2
      const double b = std::sqrt(noise_var / 2.0);
      for (auto& v : out) {
        const double u = stream.uniform_open() - 0.5;
        v = -b * std::copysign(1.0, u) * std::log(1.0 - 2.0 * std::abs(u));
      }
      break;
    }
    default:
      throw ConfigError("draw_noise: unsupported noise kind");
  }
  return out;
}

RealMatrix perturb_channel(const RealMatrix& h, double snr_h_db, RngStream& stream) {
  if (std::isnan(snr_h_db)) throw ContractError("perturb_channel: snr_h_db is NaN");
  if (snr_h_db == std::numeric_limits<double>::infinity()) return h;
  const double var = frobenius_squared(h) /
                     (static_cast<double>(h.size()) * std::pow(10.0, snr_h_db / 10.0));
  const double sd = std::sqrt(var);
  RealMatrix out = h;
  for (auto& v : out.data()) v += sd * stream.normal();
  return out;
}

Simulator::Simulator(const ChannelScenario& scenario, const Constellation& constellation)
    : scenario_(scenario), constellation_(constellation), generator_(scenario) {
  if (constellation.qam_order() != scenario.qam_order)
    throw ConfigError("simulator: constellation does not match scenario qam_order");
}

TransmissionSample Simulator::sample(double snr_db, const RngStream& sample_stream) const {
  TransmissionSample s;
  s.snr_db = snr_db;
  RngStream ch = sample_stream.substream(kChannel);
  s.h = generator_.draw(ch);
  RngStream sym = sample_stream.substream(kSymbols);
  s.frame = draw_symbols(constellation_, scenario_.tx_dim(), sym);
  s.noise_var = calibrate_noise(scenario_, 1.0, snr_db);
  s.y = matvec(s.h, s.frame.x);
  if (s.noise_var > 0.0) {
    RngStream nz = sample_stream.substream(kNoise);
    s.noise = draw_noise(scenario_.noise, s.noise_var, s.y.size(), nz);
  } else {
    s.noise.assign(s.y.size(), 0.0);
  }
  for (std::size_t i = 0; i < s.y.size(); ++i) s.y[i] += s.noise[i];
  if (scenario_.est_snr_db && std::isfinite(*scenario_.est_snr_db)) {
    RngStream est = sample_stream.substream(kEstimation);
    s.h_hat = perturb_channel(s.h, *scenario_.est_snr_db, est);
  } else {
    s.h_hat = s.h;
  }
  return s;
}

std::vector<TransmissionSample> Simulator::batch(double snr_db, std::size_t count,
                                                 const RngStream& stream) const {
  if (count == 0) throw ContractError("simulate: batch must be >= 1");
  std::vector<TransmissionSample> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(sample(snr_db, stream.substream(i)));
  return out;
}

std::vector<TransmissionSample> simulate(const ChannelScenario& scenario,
                                         const Constellation& constellation,
                                         double snr_db, std::size_t batch,
                                         const RngStream& stream) {
  return Simulator(scenario, constellation).batch(snr_db, batch, stream);
}

}  // namespace chnet
