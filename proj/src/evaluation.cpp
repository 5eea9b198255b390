#include "chnet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "chnet/errors.hpp"
#include "chnet/format.hpp"
#include "chnet/mult_counter.hpp"
#include "chnet/parallel.hpp"

namespace chnet {

namespace {

struct CellResult {
  std::uint64_t errors = 0;
  std::uint64_t mults = 0;
  bool ok = false;
};

struct Tally {
  std::uint64_t errors = 0;
  std::uint64_t symbols = 0;
  std::uint64_t mults = 0;
  std::uint64_t samples = 0;
  std::uint64_t skipped = 0;
};

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::string xml_escape(std::string_view s) {
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

}  // namespace

double ci95(double ser, std::uint64_t symbols) {
  if (symbols == 0) return 0.0;
  return 1.96 * std::sqrt(ser * (1.0 - ser) / static_cast<double>(symbols));
}

std::vector<SweepRecord> run_sweep(std::span<const NamedDetector> detectors,
                                   const ChannelScenario& scenario,
                                   std::span<const double> snrs_db,
                                   const SweepOptions& options) {
  if (detectors.empty()) throw ConfigError("sweep: no detectors given");
  if (snrs_db.empty()) throw ConfigError("sweep: no SNR points given");
  if (options.round == 0) throw ConfigError("sweep: round must be >= 1");
  if (options.max_symbols == 0) throw ConfigError("sweep: max_symbols must be >= 1");
  scenario.validate();
  const Constellation constellation(scenario.qam_order);
  const Simulator sim(scenario, constellation);
  const std::size_t n_det = detectors.size();
  const std::uint64_t per_sample = scenario.n_t;
  const std::string digest = scenario.digest();

  std::vector<SweepRecord> records;
  for (std::size_t j = 0; j < snrs_db.size(); ++j) {
    const double snr = snrs_db[j];
    const RngStream base = RngStream(options.seed, kEvalStreams).substream(j);
    std::vector<Tally> tally(n_det);
    std::uint64_t next = 0, simulated = 0;
    std::vector<CellResult> cells;

    while (true) {
      const std::uint64_t remaining = (options.max_symbols - simulated + per_sample - 1) / per_sample;
      const std::size_t count = static_cast<std::size_t>(
          std::min<std::uint64_t>(options.round, std::max<std::uint64_t>(remaining, 1)));
      cells.assign(count * n_det, {});
      parallel_for(count, options.threads, [&](std::size_t i) {
        const TransmissionSample s = sim.sample(snr, base.substream(next + i));
        const DetectorInput in{s.h_hat, s.y, s.noise_var, constellation};
        for (std::size_t d = 0; d < n_det; ++d) {
          CellResult& cell = cells[i * n_det + d];
          MultCounter counter;
          MultScope scope(counter);
          try {
            const DetectionResult r = detectors[d].run(in);
            cell.errors = symbol_errors(s.frame, r.hard);
            cell.mults = counter.value();
            cell.ok = true;
          } catch (const NumericError&) {
          } catch (const InstanceTooLargeError&) {
          }
        }
      });
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t d = 0; d < n_det; ++d) {
          const CellResult& c = cells[i * n_det + d];
          Tally& t = tally[d];
          if (!c.ok) {
            ++t.skipped;
            continue;
          }
          t.errors += c.errors;
          t.symbols += per_sample;
          t.mults += c.mults;
          ++t.samples;
        }
      next += count;
      simulated += count * per_sample;
      if (simulated >= options.max_symbols) break;
      const bool enough = next >= options.min_samples &&
                          std::all_of(tally.begin(), tally.end(), [&](const Tally& t) {
                            return t.errors >= options.min_errors;
                          });
      if (enough) break;
    }

    for (std::size_t d = 0; d < n_det; ++d) {
      const Tally& t = tally[d];
      SweepRecord r;
      r.detector = detectors[d].name;
      r.scenario = digest;
      r.snr_db = snr;
      r.symbols = t.symbols;
      r.errors = t.errors;
      r.ser = t.symbols ? static_cast<double>(t.errors) / static_cast<double>(t.symbols) : 0.0;
      r.ci95 = ci95(r.ser, r.symbols);
      r.mults = t.samples ? static_cast<std::uint64_t>(std::llround(
                                static_cast<double>(t.mults) / static_cast<double>(t.samples)))
                          : 0;
      r.seed = options.seed;
      r.skipped = t.skipped;
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::vector<RobustnessVariant> default_robustness_variants() {
  return {
      {"clean", std::nullopt, {}},
      {"est20", 20.0, {}},
      {"est15", 15.0, {}},
      {"student_t3", std::nullopt, {NoiseKind::student_t, 3.0}},
      {"laplace", std::nullopt, {NoiseKind::laplace, 3.0}},
  };
}

ChannelScenario apply_variant(const ChannelScenario& clean, const RobustnessVariant& v) {
  if (clean.est_snr_db || clean.noise.kind != NoiseKind::gaussian)
    throw ConfigError("robustness: the base scenario must be clean (Gaussian noise, exact H)");
  ChannelScenario s = clean;
  s.est_snr_db = v.est_snr_db;
  s.noise = v.noise;
  return s;
}

std::vector<SweepRecord> run_robustness(std::span<const NamedDetector> detectors,
                                        const ChannelScenario& clean,
                                        std::span<const RobustnessVariant> variants,
                                        std::span<const double> snrs_db,
                                        const SweepOptions& options) {
  if (variants.empty()) throw ConfigError("robustness: no variants given");
  std::vector<SweepRecord> all;
  for (const auto& v : variants) {
    auto recs = run_sweep(detectors, apply_variant(clean, v), snrs_db, options);
    all.insert(all.end(), std::make_move_iterator(recs.begin()),
               std::make_move_iterator(recs.end()));
  }
  return all;
}

double count_mults(const NamedDetector& detector, const ChannelScenario& scenario,
                   std::size_t samples, double snr_db, std::uint64_t seed) {
  if (samples == 0) throw ConfigError("count_mults: samples must be >= 1");
  const Constellation constellation(scenario.qam_order);
  const Simulator sim(scenario, constellation);
  const RngStream base = RngStream(seed, kEvalStreams).substream(~std::uint64_t{0});
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    const TransmissionSample s = sim.sample(snr_db, base.substream(i));
    MultCounter counter;
    {
      MultScope scope(counter);
      detector.run({s.h_hat, s.y, s.noise_var, constellation});
    }
    total += counter.value();
  }
  return static_cast<double>(total) / static_cast<double>(samples);
}

bool is_channelnet_detector(std::string_view name) {
  return name == "channelnet-mlp" || name == "channelnet-conv";
}

NamedDetector make_detector(std::string_view name,
                            std::shared_ptr<const ChannelNetModel> model) {
  if (is_classic_detector(name)) return make_classic_detector(name);
  if (!is_channelnet_detector(name))
    throw ConfigError("unknown detector '" + std::string(name) + "'");
  if (!model) throw ConfigError(std::string(name) + " needs a trained model (--model)");
  const Variant want = name == "channelnet-mlp" ? Variant::mlp : Variant::conv;
  if (model->config().variant != want)
    throw ConfigError(std::string(name) + ": model is a " + to_string(model->config().variant) +
                      " variant");
  return {std::string(name), [model](const DetectorInput& in) { return detect(*model, in); }};
}

std::vector<std::string> parse_detector_list(std::string_view list) {
  std::vector<std::string> out;
  for (auto part : split(list, ',')) {
    part = trim(part);
    if (part.empty()) throw ConfigError("detector list has an empty entry");
    out.emplace_back(part);
  }
  return out;
}

std::vector<double> parse_snr_range(std::string_view spec) {
  const auto parts = split(spec, ':');
  if (parts.size() != 3) throw ConfigError("snr range must be LO:HI:STEP, got '" + std::string(spec) + "'");
  const double lo = parse_double(trim(parts[0]), "snr LO");
  const double hi = parse_double(trim(parts[1]), "snr HI");
  const double step = parse_double(trim(parts[2]), "snr STEP");
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi)
    throw ConfigError("snr range needs finite LO <= HI");
  if (!(step > 0.0) || !std::isfinite(step)) throw ConfigError("snr STEP must be > 0");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double v = lo + static_cast<double>(i) * step;
    if (v > hi + 0.5 * step) break;
    out.push_back(std::min(v, hi));
    if (v >= hi) break;
  }
  return out;
}

std::string records_to_csv(std::span<const SweepRecord> records) {
  if (records.empty()) throw ContractError("no records to write");
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : records) {
    if (r.detector.find(',') != std::string::npos || r.scenario.find(',') != std::string::npos)
      throw ContractError("record names must not contain commas");
    out += r.detector + ',' + r.scenario + ',' + format_double(r.snr_db) + ',' +
           std::to_string(r.symbols) + ',' + std::to_string(r.errors) + ',' +
           format_double(r.ser) + ',' + format_double(r.ci95) + ',' +
           std::to_string(r.mults) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<SweepRecord> parse_records_csv(std::string_view text) {
  auto lines = split(text, '\n');
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty() || trim(lines[0]) != kCsvHeader)
    throw ConfigError("csv: header must be '" + std::string(kCsvHeader) + "'");
  std::vector<SweepRecord> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(trim(lines[i]), ',');
    const std::string where = "csv line " + std::to_string(i + 1);
    if (f.size() != 9) throw ConfigError(where + ": expected 9 fields");
    SweepRecord r;
    r.detector = std::string(f[0]);
    r.scenario = std::string(f[1]);
    r.snr_db = parse_double(f[2], where);
    r.symbols = parse_unsigned(f[3], where);
    r.errors = parse_unsigned(f[4], where);
    r.ser = parse_double(f[5], where);
    r.ci95 = parse_double(f[6], where);
    r.mults = parse_unsigned(f[7], where);
    r.seed = parse_unsigned(f[8], where);
    out.push_back(std::move(r));
  }
  if (out.empty()) throw ConfigError("csv: no records");
  return out;
}

void write_records_csv(std::span<const SweepRecord> records, const std::filesystem::path& path) {
  write_text_file(path, records_to_csv(records));
}

std::string plot_svg(std::span<const SweepRecord> records, std::string_view title) {
  if (records.empty()) throw ContractError("plot: no records");
  bool several_scenarios = false;
  for (const auto& r : records) several_scenarios |= r.scenario != records.front().scenario;

  // curves keep first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  double x_lo = records.front().snr_db, x_hi = x_lo;
  double y_lo = 1.0, y_hi = 0.0;
  for (const auto& r : records) {
    const std::string key = several_scenarios ? r.detector + " (" + r.scenario + ")" : r.detector;
    if (!curves.count(key)) order.push_back(key);
    auto& pts = curves[key];
    x_lo = std::min(x_lo, r.snr_db);
    x_hi = std::max(x_hi, r.snr_db);
    if (r.ser > 0.0) {
      pts.emplace_back(r.snr_db, r.ser);
      y_lo = std::min(y_lo, r.ser);
      y_hi = std::max(y_hi, r.ser);
    }
  }
  if (y_hi < y_lo) y_lo = y_hi = 0.1;
  const double dec_lo = std::floor(std::log10(y_lo));
  const double dec_hi = std::max(std::ceil(std::log10(y_hi)), dec_lo + 1.0);
  if (x_hi == x_lo) {
    x_lo -= 1.0;
    x_hi += 1.0;
  }

  const double w = 720, h = 480, ml = 70, mr = 200, mt = 40, mb = 55;
  const double pw = w - ml - mr, ph = h - mt - mb;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) {
    return mt + (dec_hi - std::log10(y)) / (dec_hi - dec_lo) * ph;
  };
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  std::ostringstream s;
  s.precision(6);
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!title.empty())
    s << "<text x=\"" << ml + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";
  for (double dec = dec_lo; dec <= dec_hi; dec += 1.0) {
    const double y = py(std::pow(10.0, dec));
    s << "<line x1=\"" << ml << "\" y1=\"" << y << "\" x2=\"" << ml + pw << "\" y2=\"" << y
      << "\" stroke=\"#ddd\"/>\n"
      << "<text x=\"" << ml - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e"
      << static_cast<int>(dec) << "</text>\n";
  }
  std::vector<double> ticks;
  for (const auto& r : records)
    if (std::find(ticks.begin(), ticks.end(), r.snr_db) == ticks.end()) ticks.push_back(r.snr_db);
  std::sort(ticks.begin(), ticks.end());
  for (double t : ticks)
    s << "<text x=\"" << px(t) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">"
      << format_double(t) << "</text>\n";
  s << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << ml + pw / 2 << "\" y=\"" << h - 14
    << "\" text-anchor=\"middle\">SNR (dB)</text>\n"
    << "<text transform=\"translate(18 " << mt + ph / 2
    << ") rotate(-90)\" text-anchor=\"middle\">SER</text>\n";

  for (std::size_t c = 0; c < order.size(); ++c) {
    const char* color = kColors[c % std::size(kColors)];
    auto pts = curves[order[c]];
    std::sort(pts.begin(), pts.end());
    if (!pts.empty()) {
      s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (const auto& [x, y] : pts) s << px(x) << ',' << py(y) << ' ';
      s << "\"/>\n";
      for (const auto& [x, y] : pts)
        s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << color
          << "\"/>\n";
    }
    const double ly = mt + 10 + 20.0 * static_cast<double>(c);
    s << "<line x1=\"" << ml + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 36
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << ml + pw + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(order[c])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_plot(std::span<const SweepRecord> records, const std::filesystem::path& path) {
  write_text_file(path, plot_svg(records));
}

}  // namespace chnet
