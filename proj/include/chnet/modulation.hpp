#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chnet/matrix.hpp"
#include "chnet/rng.hpp"

namespace chnet {

/// Square QAM seen as two independent PAM dimensions. Levels are
/// (2i - (m-1)) * scale for i in [0, m), m = sqrt(M), with the scale chosen
/// so the average complex-symbol power is 1.
class Constellation {
 public:
  /// Supported orders: 4, 16, 64, 256. Throws ConfigError otherwise.
  explicit Constellation(unsigned qam_order);

  unsigned qam_order() const noexcept { return qam_order_; }
  /// PAM levels per real dimension (= number of classifier classes).
  std::size_t classes() const noexcept { return levels_.size(); }
  double scale() const noexcept { return scale_; }
  std::span<const double> levels() const noexcept { return levels_; }
  double level(std::size_t i) const noexcept { return levels_[i]; }
  /// Mean of the squared PAM levels (per real dimension power).
  double real_power() const noexcept;

  /// Index of the nearest level; exact ties go to the lower level.
  std::uint32_t nearest(double u) const noexcept;

 private:
  unsigned qam_order_;
  double scale_;
  std::vector<double> levels_;
};

inline Constellation build_constellation(unsigned qam_order) {
  return Constellation(qam_order);
}

/// Per-real-dimension symbols; labels[i] indexes the constellation level of x[i].
struct SymbolFrame {
  RealVector x;
  std::vector<std::uint32_t> labels;

  std::size_t size() const noexcept { return x.size(); }
  friend bool operator==(const SymbolFrame&, const SymbolFrame&) = default;
};

SymbolFrame draw_symbols(const Constellation& c, std::size_t k, RngStream& stream);
SymbolFrame frame_from_labels(const Constellation& c,
                              std::span<const std::uint32_t> labels);
SymbolFrame slice(const Constellation& c, std::span<const double> u);

/// Complex-symbol errors: real dims i and i + K/2 form one symbol, wrong if
/// either label differs. K must be even.
std::size_t symbol_errors(const SymbolFrame& truth, const SymbolFrame& est);
/// Diagnostic: number of real dimensions whose label differs.
std::size_t real_dimension_errors(const SymbolFrame& truth,
                                  const SymbolFrame& est);

}  // namespace chnet
