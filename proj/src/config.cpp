#include "chnet/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>

#include "chnet/errors.hpp"
#include "chnet/evaluation.hpp"
#include "chnet/format.hpp"
#include "chnet/parallel.hpp"

namespace chnet {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

using Setter = std::function<void(RunConfig&, std::string_view value, const std::string& key)>;

std::size_t as_size(std::string_view v, const std::string& key) {
  return static_cast<std::size_t>(parse_unsigned(v, key));
}

double as_real(std::string_view v, const std::string& key) { return parse_double(v, key); }

const std::vector<std::pair<std::string, Setter>>& setters() {
  static const std::vector<std::pair<std::string, Setter>> table = {
      {"scenario.n_r", [](RunConfig& c, auto v, auto& k) { c.scenario.n_r = as_size(v, k); }},
      {"scenario.n_t", [](RunConfig& c, auto v, auto& k) { c.scenario.n_t = as_size(v, k); }},
      {"scenario.channel_model",
       [](RunConfig& c, auto v, auto& k) {
         if (v == "rayleigh") c.scenario.model = FadingModel::rayleigh;
         else if (v == "kronecker") c.scenario.model = FadingModel::kronecker;
         else throw ConfigError(k + ": expected rayleigh or kronecker");
       }},
      {"scenario.rho", [](RunConfig& c, auto v, auto& k) { c.scenario.rho = as_real(v, k); }},
      {"scenario.noise_kind",
       [](RunConfig& c, auto v, auto& k) {
         if (v == "gaussian") c.scenario.noise.kind = NoiseKind::gaussian;
         else if (v == "student_t") c.scenario.noise.kind = NoiseKind::student_t;
         else if (v == "laplace") c.scenario.noise.kind = NoiseKind::laplace;
         else throw ConfigError(k + ": expected gaussian, student_t or laplace");
       }},
      {"scenario.nu", [](RunConfig& c, auto v, auto& k) { c.scenario.noise.nu = as_real(v, k); }},
      {"scenario.est_snr_db",
       [](RunConfig& c, auto v, auto& k) {
         if (v == "none") c.scenario.est_snr_db.reset();
         else c.scenario.est_snr_db = as_real(v, k);
       }},
      {"scenario.qam_order",
       [](RunConfig& c, auto v, auto& k) {
         c.scenario.qam_order = static_cast<unsigned>(parse_unsigned(v, k));
       }},
      {"scenario.seed", [](RunConfig& c, auto v, auto& k) { c.scenario.seed = parse_unsigned(v, k); }},

      {"model.iterations", [](RunConfig& c, auto v, auto& k) { c.model.iterations = as_size(v, k); }},
      {"model.features", [](RunConfig& c, auto v, auto& k) { c.model.features = as_size(v, k); }},
      {"model.hidden", [](RunConfig& c, auto v, auto& k) { c.model.hidden = as_size(v, k); }},
      {"model.variant",
       [](RunConfig& c, auto v, auto& k) {
         if (v == "mlp") c.model.variant = Variant::mlp;
         else if (v == "conv") c.model.variant = Variant::conv;
         else throw ConfigError(k + ": expected mlp or conv");
       }},
      {"model.kernel_size", [](RunConfig& c, auto v, auto& k) { c.model.kernel_size = as_size(v, k); }},
      {"model.filters", [](RunConfig& c, auto v, auto& k) { c.model.filters = as_size(v, k); }},
      {"model.conv_placement",
       [](RunConfig& c, auto v, auto& k) {
         if (v == "before") c.model.placement = ConvPlacement::before_mlp;
         else if (v == "after") c.model.placement = ConvPlacement::after_mlp;
         else throw ConfigError(k + ": expected before or after");
       }},

      {"train.snr_lo", [](RunConfig& c, auto v, auto& k) { c.train.snr_lo_db = as_real(v, k); }},
      {"train.snr_hi", [](RunConfig& c, auto v, auto& k) { c.train.snr_hi_db = as_real(v, k); }},
      {"train.epochs", [](RunConfig& c, auto v, auto& k) { c.train.epochs = as_size(v, k); }},
      {"train.samples_per_epoch",
       [](RunConfig& c, auto v, auto& k) { c.train.samples_per_epoch = as_size(v, k); }},
      {"train.batch", [](RunConfig& c, auto v, auto& k) { c.train.batch = as_size(v, k); }},
      {"train.lr", [](RunConfig& c, auto v, auto& k) { c.train.schedule.lr = as_real(v, k); }},
      {"train.lr_decay_factor",
       [](RunConfig& c, auto v, auto& k) { c.train.schedule.factor = as_real(v, k); }},
      {"train.lr_decay_every",
       [](RunConfig& c, auto v, auto& k) { c.train.schedule.every = as_size(v, k); }},
      {"train.checkpoint_every",
       [](RunConfig& c, auto v, auto& k) { c.train.checkpoint_every = as_size(v, k); }},
      {"train.seed", [](RunConfig& c, auto v, auto& k) { c.train.seed = parse_unsigned(v, k); }},

      {"eval.snr",
       [](RunConfig& c, auto v, auto&) { c.eval.snrs_db = parse_snr_range(v); }},
      {"eval.min_errors", [](RunConfig& c, auto v, auto& k) { c.eval.min_errors = parse_unsigned(v, k); }},
      {"eval.max_symbols", [](RunConfig& c, auto v, auto& k) { c.eval.max_symbols = parse_unsigned(v, k); }},
      {"eval.min_samples", [](RunConfig& c, auto v, auto& k) { c.eval.min_samples = parse_unsigned(v, k); }},
      {"eval.round", [](RunConfig& c, auto v, auto& k) { c.eval.round = as_size(v, k); }},
      {"eval.seed", [](RunConfig& c, auto v, auto& k) { c.eval.seed = parse_unsigned(v, k); }},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : setters()) k.push_back(name);
    return k;
  }();
  return keys;
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    const std::string where = "config line " + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = setters();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const auto& e) { return e.first == key; });
    if (it == table.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + ": repeated key '" + key + "'");
    if (value.empty()) throw ConfigError(where + ": key '" + key + "' has no value");
    it->second(cfg, value, key);
  }
  cfg.scenario.validate();
  cfg.train.scenario = cfg.scenario;
  cfg.model.classes = Constellation(cfg.scenario.qam_order).classes();
  cfg.model.validate();
  cfg.train.validate();
  if (cfg.eval.snrs_db.empty()) throw ConfigError("eval.snr: no SNR points");
  if (cfg.eval.round == 0) throw ConfigError("eval.round must be >= 1");
  if (cfg.eval.max_symbols == 0) throw ConfigError("eval.max_symbols must be >= 1");
  cfg.train.threads = default_threads();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path));
}

std::size_t default_threads() {
  if (const char* env = std::getenv("CHNET_THREADS")) {
    try {
      const auto n = parse_unsigned(env, "CHNET_THREADS");
      if (n > 0) return static_cast<std::size_t>(n);
    } catch (const ConfigError&) {
    }
  }
  return 1;
}

}  // namespace chnet
