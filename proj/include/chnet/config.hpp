#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chnet/channel.hpp"
#include "chnet/channelnet.hpp"
#include "chnet/training.hpp"

namespace chnet {

struct EvalConfig {
  std::vector<double> snrs_db = {0, 5, 10, 15, 20};
  std::uint64_t min_errors = 100;
  std::uint64_t max_symbols = 1'000'000;
  std::uint64_t min_samples = 0;
  std::size_t round = 256;
  std::uint64_t seed = 1;
};

/// One file drives train, sweep and robust. The scenario is shared: after
/// parsing, train.scenario equals scenario and model.classes follows the
/// constellation.
struct RunConfig {
  ChannelScenario scenario;
  ChannelNetConfig model;
  TrainConfig train;
  EvalConfig eval;
};

/// Flat "section.key = value" lines, '#' comments, blank lines ignored.
/// Unknown or repeated keys and bad values throw ConfigError naming the key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Every recognized key, in documentation order.
const std::vector<std::string>& config_keys();

}  // namespace chnet
