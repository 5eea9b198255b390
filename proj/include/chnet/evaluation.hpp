#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chnet/channel.hpp"
#include "chnet/channelnet.hpp"
#include "chnet/detectors.hpp"

namespace chnet {

struct SweepRecord {
  std::string detector;
  std::string scenario;  ///< ChannelScenario::digest()
  double snr_db = 0.0;
  std::uint64_t symbols = 0;
  std::uint64_t errors = 0;
  double ser = 0.0;
  double ci95 = 0.0;
  std::uint64_t mults = 0;  ///< mean multiplications per detection, rounded
  std::uint64_t seed = 0;
  std::uint64_t skipped = 0;  ///< samples the detector failed on (not in CSV)

  friend bool operator==(const SweepRecord&, const SweepRecord&) = default;
};

/// 1.96 sqrt(p (1 - p) / n); 0 when n = 0.
double ci95(double ser, std::uint64_t symbols);

struct SweepOptions {
  std::uint64_t min_errors = 100;
  std::uint64_t max_symbols = 1'000'000;
  /// Floor on samples per SNR point, regardless of errors.
  std::uint64_t min_samples = 0;
  /// Samples simulated between stopping checks.
  std::size_t round = 256;
  std::uint64_t seed = 1;
  std::size_t threads = 1;
};

/// Monte Carlo SER per (detector, SNR). Every detector sees the same samples:
/// rounds continue until each detector has min_errors errors (and at least
/// min_samples samples), or max_symbols symbols have been simulated. A
/// detector that throws on a sample is charged nothing for it and its
/// skipped count grows. Sample s at SNR index j comes from the evaluation
/// stream substream(j).substream(s), so scenario variants share H, x, n.
std::vector<SweepRecord> run_sweep(std::span<const NamedDetector> detectors,
                                   const ChannelScenario& scenario,
                                   std::span<const double> snrs_db,
                                   const SweepOptions& options);

struct RobustnessVariant {
  std::string name;
  std::optional<double> est_snr_db;
  NoiseModel noise;
};

/// clean, est20, est15, student_t3, laplace.
std::vector<RobustnessVariant> default_robustness_variants();

/// Applies a variant to a clean scenario (which must itself be clean).
ChannelScenario apply_variant(const ChannelScenario& clean, const RobustnessVariant& v);

/// run_sweep per variant with the same detectors and options; records carry
/// each variant's scenario digest.
std::vector<SweepRecord> run_robustness(std::span<const NamedDetector> detectors,
                                        const ChannelScenario& clean,
                                        std::span<const RobustnessVariant> variants,
                                        std::span<const double> snrs_db,
                                        const SweepOptions& options);

/// Mean multiplications per detection over `samples` draws at snr_db.
double count_mults(const NamedDetector& detector, const ChannelScenario& scenario,
                   std::size_t samples, double snr_db = 10.0, std::uint64_t seed = 1);

/// Classic names, or "channelnet-mlp" / "channelnet-conv" (which need a model
/// of the matching variant). Throws ConfigError.
NamedDetector make_detector(std::string_view name,
                            std::shared_ptr<const ChannelNetModel> model = nullptr);
bool is_channelnet_detector(std::string_view name);

/// Comma-separated list; empty entries and an empty list are errors.
std::vector<std::string> parse_detector_list(std::string_view list);
/// "LO:HI:STEP" inclusive of HI (within half a step).
std::vector<double> parse_snr_range(std::string_view spec);

inline constexpr std::string_view kCsvHeader =
    "detector,scenario,snr_db,symbols,errors,ser,ci95,mults,seed";

std::string records_to_csv(std::span<const SweepRecord> records);
/// Inverse of records_to_csv (skipped is left 0). Throws ConfigError.
std::vector<SweepRecord> parse_records_csv(std::string_view text);
void write_records_csv(std::span<const SweepRecord> records, const std::filesystem::path& path);

/// Self-contained SVG: SER vs SNR, log-scale y, one polyline per curve
/// (detector, plus scenario when several are present). Zero-SER points are
/// left out. Throws ContractError on empty input.
std::string plot_svg(std::span<const SweepRecord> records, std::string_view title = {});
void write_plot(std::span<const SweepRecord> records, const std::filesystem::path& path);

}  // namespace chnet
