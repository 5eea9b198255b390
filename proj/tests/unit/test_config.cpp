#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "chnet/config.hpp"
#include "chnet/errors.hpp"
#include "chnet/format.hpp"

using namespace chnet;

namespace {

std::string error_of(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("full config") {
  const RunConfig c = parse_config(R"(
# a comment
scenario.n_r = 16
scenario.n_t = 8      # trailing comment
scenario.channel_model = kronecker
scenario.rho = 0.6
scenario.noise_kind = student_t
scenario.nu = 4
scenario.est_snr_db = 15
scenario.qam_order = 64
scenario.seed = 9

model.iterations = 5
model.features = 7
model.hidden = 12
model.variant = conv
model.kernel_size = 5
model.filters = 6
model.conv_placement = after

train.snr_lo = 2
train.snr_hi = 18.5
train.epochs = 4
train.samples_per_epoch = 640
train.batch = 32
train.lr = 0.002
train.lr_decay_factor = 0.5
train.lr_decay_every = 3
train.checkpoint_every = 2
train.seed = 77

eval.snr = 0:10:5
eval.min_errors = 50
eval.max_symbols = 1000
eval.min_samples = 10
eval.round = 8
eval.seed = 3
)");
  CHECK(c.scenario.n_r == 16);
  CHECK(c.scenario.n_t == 8);
  CHECK(c.scenario.model == FadingModel::kronecker);
  CHECK(c.scenario.rho == 0.6);
  CHECK(c.scenario.noise.kind == NoiseKind::student_t);
  CHECK(c.scenario.noise.nu == 4.0);
  CHECK(c.scenario.est_snr_db == 15.0);
  CHECK(c.scenario.qam_order == 64);
  CHECK(c.scenario.seed == 9);
  CHECK(c.model.iterations == 5);
  CHECK(c.model.features == 7);
  CHECK(c.model.hidden == 12);
  CHECK(c.model.variant == Variant::conv);
  CHECK(c.model.kernel_size == 5);
  CHECK(c.model.filters == 6);
  CHECK(c.model.placement == ConvPlacement::after_mlp);
  CHECK(c.model.classes == 8);
  CHECK(c.train.snr_lo_db == 2.0);
  CHECK(c.train.snr_hi_db == 18.5);
  CHECK(c.train.epochs == 4);
  CHECK(c.train.samples_per_epoch == 640);
  CHECK(c.train.batch == 32);
  CHECK(c.train.schedule.lr == 0.002);
  CHECK(c.train.schedule.factor == 0.5);
  CHECK(c.train.schedule.every == 3);
  CHECK(c.train.checkpoint_every == 2);
  CHECK(c.train.seed == 77);
  CHECK(c.train.scenario.digest() == c.scenario.digest());
  CHECK(c.eval.snrs_db == std::vector<double>{0, 5, 10});
  CHECK(c.eval.min_errors == 50);
  CHECK(c.eval.max_symbols == 1000);
  CHECK(c.eval.min_samples == 10);
  CHECK(c.eval.round == 8);
  CHECK(c.eval.seed == 3);
}

TEST_CASE("defaults from an empty file") {
  const RunConfig c = parse_config("\n# nothing\n");
  CHECK(c.scenario.n_r == 64);
  CHECK(c.scenario.n_t == 32);
  CHECK(c.model.classes == 4);
  CHECK(c.model.iterations == 20);
  CHECK(c.train.schedule.lr == 1e-3);
  CHECK_FALSE(c.scenario.est_snr_db);
  CHECK_FALSE(parse_config("scenario.est_snr_db = none").scenario.est_snr_db);
}

TEST_CASE("errors name the offending key") {
  CHECK(error_of("scenario.n_r = 8\nscenario.bogus = 1\n").find("scenario.bogus") !=
        std::string::npos);
  CHECK(error_of("scenario.bogus = 1").find("line 1") != std::string::npos);
  CHECK(error_of("train.lr = 1\ntrain.lr = 2").find("repeated key 'train.lr'") !=
        std::string::npos);
  CHECK(error_of("train.lr =").find("train.lr") != std::string::npos);
  CHECK(error_of("train.lr = fast").find("train.lr") != std::string::npos);
  CHECK(error_of("scenario.n_r = -3").find("scenario.n_r") != std::string::npos);
  CHECK(error_of("model.variant = transformer").find("model.variant") != std::string::npos);
  CHECK(error_of("just some words").find("key = value") != std::string::npos);
  CHECK_FALSE(error_of("scenario.qam_order = 8").empty());
  CHECK_FALSE(error_of("scenario.n_r = 4\nscenario.n_t = 8").empty());
}

TEST_CASE("every documented key parses") {
  const auto& keys = config_keys();
  CHECK(keys.size() == 32);
  CHECK(keys.front() == "scenario.n_r");
  CHECK(keys.back() == "eval.seed");
}

TEST_CASE("missing file") {
  CHECK_THROWS_AS(load_config("/nonexistent/run.conf"), IoError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, 1.0, -2.5, 0.1, 1e-300, 6.02214076e23, 0.0765146334745334})
    CHECK(parse_double(format_double(v), "v") == v);
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(8.0) == "8");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::isnan(parse_double("nan", "v")));
  CHECK_THROWS_AS(parse_double("1.5x", "v"), ConfigError);
  CHECK(parse_unsigned("123", "n") == 123);
  CHECK_THROWS_AS(parse_unsigned("-1", "n"), ConfigError);
  CHECK_THROWS_AS(parse_unsigned("", "n"), ConfigError);
}
