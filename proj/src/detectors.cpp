#include "chnet/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "chnet/errors.hpp"
#include "chnet/mult_counter.hpp"

namespace chnet {

namespace {

void check_shapes(const DetectorInput& in) {
  if (in.h.rows() != in.y.size())
    throw ContractError("detector: H rows must match y length");
  if (in.h.cols() == 0) throw ContractError("detector: H has no columns");
}

DetectionResult finish(const Constellation& c, RealVector soft, const MultProbe& probe) {
  DetectionResult r;
  r.hard = slice(c, soft);
  r.soft = std::move(soft);
  r.mults = probe.delta();
  return r;
}

/// (H^T H + reg I)^{-1} H^T y. SPD failure means H^T H is singular.
RealVector regularized_ls(const RealMatrix& h, std::span<const double> y, double reg) {
  RealMatrix gram = matmul_transposed_a(h, h);
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += reg;
  const RealVector hty = matvec_transposed(h, y);
  try {
    return solve_spd(gram, hty);
  } catch (const NotSpdError&) {
    throw RankDeficientError();
  }
}

}  // namespace

DetectionResult detect_zf(const DetectorInput& in) {
  check_shapes(in);
  MultProbe probe;
  return finish(in.constellation, regularized_ls(in.h, in.y, 0.0), probe);
}

DetectionResult detect_mmse(const DetectorInput& in) {
  check_shapes(in);
  if (!in.noise_var) throw ConfigError("mmse: noise_var is required");
  if (!(*in.noise_var >= 0.0)) throw ContractError("mmse: noise_var must be >= 0");
  MultProbe probe;
  return finish(in.constellation, regularized_ls(in.h, in.y, *in.noise_var), probe);
}

PamPosterior pam_posterior(std::span<const double> levels, double u, double tau2) {
  const double inv = 1.0 / (2.0 * tau2);
  double emax = -std::numeric_limits<double>::infinity();
  for (double s : levels) emax = std::max(emax, -(u - s) * (u - s) * inv);
  double wsum = 0.0, m1 = 0.0, m2 = 0.0;
  for (double s : levels) {
    const double w = std::exp(-(u - s) * (u - s) * inv - emax);
    wsum += w;
    m1 += w * s;
    m2 += w * s * s;
  }
  const double mean = m1 / wsum;
  return {mean, std::max(m2 / wsum - mean * mean, 0.0)};
}

DetectionResult detect_amp(const DetectorInput& in, std::size_t iterations) {
  check_shapes(in);
  if (!in.noise_var) throw ConfigError("amp: noise_var is required");
  MultProbe probe;
  const RealMatrix& h = in.h;
  const std::size_t n = h.rows(), k = h.cols();
  const auto levels = in.constellation.levels();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double floor = std::max(*in.noise_var, std::numeric_limits<double>::min());
  // per entry: 4 multiplies per level plus 5 for normalization, and one for
  // the derivative var / tau2
  const std::uint64_t denoise_cost = 4 * levels.size() + 6;

  RealVector x(k, 0.0), r(in.y.begin(), in.y.end());
  bool diverged = false;
  for (std::size_t t = 0; t < iterations; ++t) {
    const double tau2 = std::max(squared_norm(r) * inv_n, floor);
    count_mults(1);
    RealVector u = matvec_transposed(h, r);
    for (std::size_t i = 0; i < k; ++i) u[i] += x[i];

    RealVector x_next(k);
    double eta_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const PamPosterior p = pam_posterior(levels, u[i], tau2);
      x_next[i] = p.mean;
      eta_sum += p.variance / tau2;
    }
    count_mults(denoise_cost * k);

    // r = y - H x + (r / N) * sum eta'
    const double onsager = eta_sum * inv_n;
    RealVector hx = matvec(h, x_next);
    RealVector r_next(n);
    for (std::size_t j = 0; j < n; ++j) r_next[j] = in.y[j] - hx[j] + onsager * r[j];
    count_mults(n + 1);

    const bool finite =
        std::isfinite(tau2) &&
        std::all_of(x_next.begin(), x_next.end(), [](double v) { return std::isfinite(v); }) &&
        std::all_of(r_next.begin(), r_next.end(), [](double v) { return std::isfinite(v); });
    if (!finite) {
      diverged = true;
      break;
    }
    x = std::move(x_next);
    r = std::move(r_next);
  }
  DetectionResult res = finish(in.constellation, std::move(x), probe);
  res.diverged = diverged;
  return res;
}

DetectionResult detect_vblast(const DetectorInput& in) {
  check_shapes(in);
  MultProbe probe;
  const std::size_t n = in.h.rows(), k = in.h.cols();
  std::vector<std::size_t> active(k);
  std::iota(active.begin(), active.end(), std::size_t{0});
  RealVector residual(in.y.begin(), in.y.end());
  RealVector soft(k, 0.0);
  std::vector<std::uint32_t> labels(k, 0);

  while (!active.empty()) {
    const std::size_t m = active.size();
    RealMatrix hs(n, m);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < m; ++j) hs(i, j) = in.h(i, active[j]);

    const RealMatrix gram = matmul_transposed_a(hs, hs);
    RealMatrix gram_inv;
    try {
      gram_inv = cholesky_solve(cholesky(gram), RealMatrix::identity(m));
    } catch (const NotSpdError&) {
      throw RankDeficientError();
    }
    // the stream with the smallest ZF noise enhancement ||G_j||^2 = [gram^-1]_jj.
    // near-ties go to the lower column
    std::size_t best = 0;
    for (std::size_t j = 1; j < m; ++j)
      if (gram_inv(j, j) < gram_inv(best, best) * (1.0 - 1e-9)) best = j;

    const RealVector hty = matvec_transposed(hs, residual);
    const double estimate = dot(gram_inv.row(best), hty);
    const std::size_t col = active[best];
    const std::uint32_t label = in.constellation.nearest(estimate);
    soft[col] = estimate;
    labels[col] = label;

    const double decided = in.constellation.level(label);
    for (std::size_t i = 0; i < n; ++i) residual[i] -= in.h(i, col) * decided;
    count_mults(n);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(best));
  }

  DetectionResult r;
  r.hard = frame_from_labels(in.constellation, labels);
  r.soft = std::move(soft);
  r.mults = probe.delta();
  return r;
}

DetectionResult detect_ml(const DetectorInput& in) {
  check_shapes(in);
  const std::size_t n = in.h.rows(), k = in.h.cols();
  const std::size_t m = in.constellation.classes();
  double space = std::pow(static_cast<double>(m), static_cast<double>(k));
  if (space > static_cast<double>(kMlSearchCap))
    throw InstanceTooLargeError("ml: search space of " + std::to_string(m) + "^" +
                                std::to_string(k) + " candidates exceeds the cap");
  MultProbe probe;

  // column-major copy so each column is contiguous
  const RealMatrix ht = in.h.transposed();
  // residual[level] = y - sum_{j < level} h_j x_j, one buffer per tree depth
  std::vector<RealVector> residual(k + 1, RealVector(n));
  std::copy(in.y.begin(), in.y.end(), residual[0].begin());
  std::vector<std::uint32_t> current(k, 0), best(k, 0);
  double best_obj = std::numeric_limits<double>::infinity();
  std::uint64_t mults = 0;

  // iterative depth-first enumeration in lexicographic label order
  std::size_t depth = 0;
  std::vector<std::uint32_t> next(k + 1, 0);
  while (true) {
    if (depth == k) {
      const double obj = squared_norm(residual[k]);
      if (obj < best_obj) {
        best_obj = obj;
        best = current;
      }
      --depth;
      continue;
    }
    if (next[depth] == m) {
      next[depth] = 0;
      if (depth == 0) break;
      --depth;
      continue;
    }
    const std::uint32_t label = next[depth]++;
    current[depth] = label;
    const double s = in.constellation.level(label);
    const auto col = ht.row(depth);
    const RealVector& parent = residual[depth];
    RealVector& child = residual[depth + 1];
    for (std::size_t i = 0; i < n; ++i) child[i] = parent[i] - col[i] * s;
    mults += n;
    ++depth;
  }
  count_mults(mults);

  DetectionResult r;
  r.hard = frame_from_labels(in.constellation, best);
  r.mults = probe.delta();
  return r;
}

bool is_classic_detector(std::string_view name) {
  return name == "zf" || name == "mmse" || name == "amp" || name == "vblast" ||
         name == "ml";
}

NamedDetector make_classic_detector(std::string_view name) {
  if (name == "zf") return {"zf", detect_zf};
  if (name == "mmse") return {"mmse", detect_mmse};
  if (name == "amp") return {"amp", [](const DetectorInput& in) { return detect_amp(in); }};
  if (name == "vblast") return {"vblast", detect_vblast};
  if (name == "ml") return {"ml", detect_ml};
  throw ConfigError("unknown detector '" + std::string(name) + "'");
}

}  // namespace chnet
