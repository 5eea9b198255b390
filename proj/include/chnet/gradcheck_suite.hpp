#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "chnet/neural.hpp"

namespace chnet {

struct GradCheckCase {
  std::string name;
  GradCheckReport report;
};

inline constexpr double kLayerGradTolerance = 1e-6;
inline constexpr double kModelGradTolerance = 1e-4;

/// Central-difference checks of every layer type, the loss, and ChannelNet
/// end to end (MLP and Conv at N=4, K=2, d=3, L=2). `full` adds larger
/// models and the alternate conv placement.
std::vector<GradCheckCase> run_gradcheck_suite(bool full, std::uint64_t seed = 7);

}  // namespace chnet
