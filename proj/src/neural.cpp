#include "chnet/neural.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "chnet/errors.hpp"
#include "chnet/mult_counter.hpp"

namespace chnet {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void he_uniform(std::span<double> w, std::size_t fan_in, RngStream& stream, double gain) {
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : w) v = limit * (2.0 * stream.uniform() - 1.0);
}

}  // namespace

DenseLayer::DenseLayer(std::size_t in, std::size_t out, std::size_t offset)
    : in_(in), out_(out), offset_(offset) {
  if (in == 0 || out == 0) throw ContractError("DenseLayer: zero dimension");
}

RealMatrix DenseLayer::forward(std::span<const double> params, const RealMatrix& x) const {
  if (x.rows() != in_) throw ContractError("DenseLayer::forward: input rows != in");
  const std::size_t p = x.cols();
  RealMatrix y(out_, p);
  for (std::size_t o = 0; o < out_; ++o) {
    const double b = params[bias_offset() + o];
    auto yo = y.row(o);
    std::fill(yo.begin(), yo.end(), b);
  }
  gemm_acc(params.subspan(offset_, out_ * in_), x.data(), y.data(), out_, in_, p);
  return y;
}

RealMatrix DenseLayer::backward(std::span<const double> params, const RealMatrix& x,
                                const RealMatrix& dy, std::span<double> grads) const {
  if (x.rows() != in_ || dy.rows() != out_ || dy.cols() != x.cols())
    throw ContractError("DenseLayer::backward: shape mismatch");
  const std::size_t p = x.cols();
  // dW += dY X^T, db += dY 1
  gemm_bt_acc(dy.data(), x.data(), grads.subspan(offset_, out_ * in_), out_, p, in_);
  for (std::size_t o = 0; o < out_; ++o) {
    double s = 0.0;
    for (double v : dy.row(o)) s += v;
    grads[bias_offset() + o] += s;
  }
  // dX = W^T dY
  RealMatrix w_t(in_, out_);
  const auto w = params.subspan(offset_, out_ * in_);
  for (std::size_t o = 0; o < out_; ++o)
    for (std::size_t i = 0; i < in_; ++i) w_t(i, o) = w[o * in_ + i];
  RealMatrix dx(in_, p);
  gemm_acc(w_t.data(), dy.data(), dx.data(), in_, out_, p);
  return dx;
}

void DenseLayer::initialize(std::span<double> params, RngStream& stream, double gain) const {
  he_uniform(params.subspan(offset_, out_ * in_), in_, stream, gain);
  auto b = params.subspan(bias_offset(), out_);
  std::fill(b.begin(), b.end(), 0.0);
}

RealMatrix relu_forward(const RealMatrix& x) {
  RealMatrix y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

RealMatrix relu_backward(const RealMatrix& x, const RealMatrix& dy) {
  if (x.rows() != dy.rows() || x.cols() != dy.cols())
    throw ContractError("relu_backward: shape mismatch");
  RealMatrix dx(x.rows(), x.cols());
  const auto xs = x.data();
  const auto ds = dy.data();
  auto out = dx.data();
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = xs[i] > 0.0 ? ds[i] : 0.0;
  return dx;
}

Conv1dLayer::Conv1dLayer(std::size_t in_channels, std::size_t filters,
                         std::size_t kernel_size, std::size_t offset)
    : in_(in_channels), filters_(filters), kernel_(kernel_size), offset_(offset) {
  if (in_channels == 0 || filters == 0) throw ContractError("Conv1dLayer: zero dimension");
  if (kernel_size % 2 == 0) throw ContractError("Conv1dLayer: kernel_size must be odd");
}

RealMatrix Conv1dLayer::forward(std::span<const double> params, const RealMatrix& x) const {
  if (x.rows() != in_) throw ContractError("Conv1dLayer::forward: input rows != in_channels");
  const std::size_t p = x.cols();
  const auto half = static_cast<std::ptrdiff_t>(kernel_ / 2);
  RealMatrix y(filters_, p);
  std::uint64_t mults = 0;
  for (std::size_t f = 0; f < filters_; ++f) {
    double* __restrict yf = y.row(f).data();
    std::fill(yf, yf + p, params[bias_offset() + f]);
    for (std::size_t c = 0; c < in_; ++c) {
      const double* __restrict xc = x.row(c).data();
      for (std::size_t j = 0; j < kernel_; ++j) {
        const double w = params[offset_ + (f * in_ + c) * kernel_ + j];
        // y[q] += w * x[q + j - half] over the in-range q
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - half;
        const std::size_t lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
        const std::size_t hi =
            shift > 0 ? (p > static_cast<std::size_t>(shift) ? p - shift : 0) : p;
        for (std::size_t q = lo; q < hi; ++q) yf[q] += w * xc[q + shift];
        if (hi > lo) mults += hi - lo;
      }
    }
  }
  count_mults(mults);
  return y;
}

RealMatrix Conv1dLayer::backward(std::span<const double> params, const RealMatrix& x,
                                 const RealMatrix& dy, std::span<double> grads) const {
  if (x.rows() != in_ || dy.rows() != filters_ || dy.cols() != x.cols())
    throw ContractError("Conv1dLayer::backward: shape mismatch");
  const std::size_t p = x.cols();
  const auto half = static_cast<std::ptrdiff_t>(kernel_ / 2);
  RealMatrix dx(in_, p);
  for (std::size_t f = 0; f < filters_; ++f) {
    const double* __restrict dyf = dy.row(f).data();
    double s = 0.0;
    for (std::size_t q = 0; q < p; ++q) s += dyf[q];
    grads[bias_offset() + f] += s;
    for (std::size_t c = 0; c < in_; ++c) {
      const double* __restrict xc = x.row(c).data();
      double* __restrict dxc = dx.row(c).data();
      for (std::size_t j = 0; j < kernel_; ++j) {
        const std::size_t widx = offset_ + (f * in_ + c) * kernel_ + j;
        const double w = params[widx];
        const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - half;
        const std::size_t lo = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
        const std::size_t hi =
            shift > 0 ? (p > static_cast<std::size_t>(shift) ? p - shift : 0) : p;
        double gw = 0.0;
        for (std::size_t q = lo; q < hi; ++q) {
          gw += dyf[q] * xc[q + shift];
          dxc[q + shift] += w * dyf[q];
        }
        grads[widx] += gw;
      }
    }
  }
  return dx;
}

void Conv1dLayer::initialize(std::span<double> params, RngStream& stream, double gain) const {
  he_uniform(params.subspan(offset_, filters_ * in_ * kernel_), in_ * kernel_, stream, gain);
  auto b = params.subspan(bias_offset(), filters_);
  std::fill(b.begin(), b.end(), 0.0);
}

Sequential::Sequential(std::vector<Layer> layers) : layers_(std::move(layers)) {}

std::size_t Sequential::param_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_)
    n += std::visit(Overloaded{[](const ReluLayer&) -> std::size_t { return 0; },
                               [](const auto& layer) { return layer.param_count(); }},
                    l);
  return n;
}

RealMatrix Sequential::forward(std::span<const double> params, const RealMatrix& x,
                               SequentialCache* cache) const {
  if (cache) cache->inputs.clear();
  RealMatrix cur = x;
  for (const auto& l : layers_) {
    RealMatrix next = std::visit(
        Overloaded{[&](const ReluLayer&) { return relu_forward(cur); },
                   [&](const auto& layer) { return layer.forward(params, cur); }},
        l);
    if (cache) cache->inputs.push_back(std::move(cur));
    cur = std::move(next);
  }
  return cur;
}

RealMatrix Sequential::backward(std::span<const double> params, const SequentialCache& cache,
                                const RealMatrix& dy, std::span<double> grads) const {
  if (cache.inputs.size() != layers_.size())
    throw ContractError("Sequential::backward: cache does not match layers");
  RealMatrix grad = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const RealMatrix& in = cache.inputs[i];
    grad = std::visit(
        Overloaded{[&](const ReluLayer&) { return relu_backward(in, grad); },
                   [&](const auto& layer) { return layer.backward(params, in, grad, grads); }},
        layers_[i]);
  }
  return grad;
}

XentResult softmax_xent(const RealMatrix& logits, std::span<const std::uint32_t> labels) {
  const std::size_t b = logits.rows(), c = logits.cols();
  if (labels.size() != b) throw ContractError("softmax_xent: label count != batch");
  if (b == 0 || c == 0) throw ContractError("softmax_xent: empty logits");
  XentResult r;
  r.dlogits = RealMatrix(b, c);
  const double inv_b = 1.0 / static_cast<double>(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i] >= c) throw ContractError("softmax_xent: label out of range");
    const auto z = logits.row(i);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    auto g = r.dlogits.row(i);
    for (std::size_t j = 0; j < c; ++j) {
      g[j] = std::exp(z[j] - zmax);
      sum += g[j];
    }
    total += std::log(sum) - (z[labels[i]] - zmax);
    const double inv = inv_b / sum;
    for (std::size_t j = 0; j < c; ++j) g[j] *= inv;
    g[labels[i]] -= inv_b;
  }
  r.loss = total * inv_b;
  return r;
}

AdamState::AdamState(std::size_t n, AdamConfig config)
    : config_(config), m_(n, 0.0), v_(n, 0.0) {}

void AdamState::step(std::span<double> params, std::span<const double> grads, double lr) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw ContractError("AdamState::step: size mismatch");
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
  }
}

bool GradCheckReport::passed() const noexcept {
  return std::all_of(entries.begin(), entries.end(),
                     [&](const GradCheckEntry& e) { return e.max_rel_error < tolerance; });
}

double GradCheckReport::max_rel_error() const noexcept {
  double m = 0.0;
  for (const auto& e : entries) m = std::max(m, e.max_rel_error);
  return m;
}

std::vector<GradCheckEntry> GradCheckReport::failures() const {
  std::vector<GradCheckEntry> out;
  for (const auto& e : entries)
    if (!(e.max_rel_error < tolerance)) out.push_back(e);
  return out;
}

GradCheckReport grad_check(std::span<const double> params, std::span<const double> analytic,
                           std::span<const ParamBlock> blocks, const LossFn& loss,
                           double tolerance, double step, double abs_floor) {
  if (params.size() != analytic.size())
    throw ContractError("grad_check: gradient size != parameter size");
  GradCheckReport report;
  report.tolerance = tolerance;
  std::vector<double> probe(params.begin(), params.end());
  for (const auto& block : blocks) {
    if (block.offset + block.size > params.size())
      throw ContractError("grad_check: block '" + block.name + "' out of range");
    GradCheckEntry e;
    e.name = block.name;
    for (std::size_t i = 0; i < block.size; ++i) {
      const std::size_t idx = block.offset + i;
      const double orig = probe[idx];
      probe[idx] = orig + step;
      const double up = loss(probe);
      probe[idx] = orig - step;
      const double down = loss(probe);
      probe[idx] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[idx];
      const double denom = std::max({std::abs(a), std::abs(numeric), abs_floor});
      const double rel = std::abs(a - numeric) / denom;
      if (i == 0 || !(rel <= e.max_rel_error)) {
        e.max_rel_error = std::isnan(rel) ? std::numeric_limits<double>::infinity() : rel;
        e.worst_index = i;
        e.analytic = a;
        e.numeric = numeric;
      }
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace chnet
