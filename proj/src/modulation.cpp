#include "chnet/modulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chnet/errors.hpp"

namespace chnet {

Constellation::Constellation(unsigned qam_order) : qam_order_(qam_order) {
  if (qam_order != 4 && qam_order != 16 && qam_order != 64 && qam_order != 256)
    throw ConfigError("unsupported QAM order " + std::to_string(qam_order) +
                      " (expected 4, 16, 64 or 256)");
  const auto m = static_cast<std::size_t>(std::lround(std::sqrt(qam_order)));
  // mean of the odd squares 1, 9, ..., (m-1)^2 is (m^2 - 1) / 3, and the
  // complex symbol carries two such dimensions
  const double raw_power = 2.0 * (static_cast<double>(m * m) - 1.0) / 3.0;
  scale_ = 1.0 / std::sqrt(raw_power);
  levels_.resize(m);
  for (std::size_t i = 0; i < m; ++i)
    levels_[i] = (2.0 * static_cast<double>(i) - static_cast<double>(m - 1)) * scale_;
}

double Constellation::real_power() const noexcept {
  double s = 0.0;
  for (double l : levels_) s += l * l;
  return s / static_cast<double>(levels_.size());
}

std::uint32_t Constellation::nearest(double u) const noexcept {
  const double m1 = static_cast<double>(levels_.size() - 1);
  // position on the integer grid 0..m-1; ceil(t - 0.5) rounds halves down
  const double t = (u / scale_ + m1) * 0.5;
  const double idx = std::ceil(t - 0.5);
  if (!(idx > 0.0)) return 0;
  if (idx >= m1) return static_cast<std::uint32_t>(m1);
  return static_cast<std::uint32_t>(idx);
}

SymbolFrame draw_symbols(const Constellation& c, std::size_t k, RngStream& stream) {
  if (k == 0) throw ContractError("draw_symbols: K must be >= 1");
  SymbolFrame f;
  f.labels.resize(k);
  f.x.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    f.labels[i] = static_cast<std::uint32_t>(stream.below(c.classes()));
    f.x[i] = c.level(f.labels[i]);
  }
  return f;
}

SymbolFrame frame_from_labels(const Constellation& c,
                              std::span<const std::uint32_t> labels) {
  SymbolFrame f;
  f.labels.assign(labels.begin(), labels.end());
  f.x.resize(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= c.classes()) throw ContractError("label out of range");
    f.x[i] = c.level(labels[i]);
  }
  return f;
}

SymbolFrame slice(const Constellation& c, std::span<const double> u) {
  SymbolFrame f;
  f.labels.resize(u.size());
  f.x.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    f.labels[i] = c.nearest(u[i]);
    f.x[i] = c.level(f.labels[i]);
  }
  return f;
}

std::size_t symbol_errors(const SymbolFrame& truth, const SymbolFrame& est) {
  if (truth.labels.size() != est.labels.size())
    throw ContractError("symbol_errors: frame length mismatch");
  if (truth.labels.size() % 2 != 0)
    throw ContractError("symbol_errors: real frame length must be even");
  const std::size_t half = truth.labels.size() / 2;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < half; ++i)
    if (truth.labels[i] != est.labels[i] ||
        truth.labels[i + half] != est.labels[i + half])
      ++errors;
  return errors;
}

std::size_t real_dimension_errors(const SymbolFrame& truth,
                                  const SymbolFrame& est) {
  if (truth.labels.size() != est.labels.size())
    throw ContractError("real_dimension_errors: frame length mismatch");
  std::size_t errors = 0;
  for (std::size_t i = 0; i < truth.labels.size(); ++i)
    errors += truth.labels[i] != est.labels[i];
  return errors;
}

}  // namespace chnet
