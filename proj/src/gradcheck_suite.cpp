#include "chnet/gradcheck_suite.hpp"

#include <cmath>

#include "chnet/channelnet.hpp"

namespace chnet {

namespace {

void fill_uniform(std::span<double> v, RngStream& s, double lo, double hi) {
  for (double& x : v) x = lo + (hi - lo) * s.uniform();
}

RealMatrix random_matrix(std::size_t r, std::size_t c, RngStream& s, double lo = -1.0,
                         double hi = 1.0) {
  RealMatrix m(r, c);
  fill_uniform(m.data(), s, lo, hi);
  return m;
}

/// Loss sum(weights .* layer(x)) for a single layer stack; linear in the
/// output, so its gradient is exactly `weights`.
GradCheckCase check_stack(const std::string& name, const Sequential& net, std::size_t in_rows,
                          std::size_t positions, std::vector<ParamBlock> blocks,
                          RngStream& s) {
  std::vector<double> params(net.param_count());
  fill_uniform(params, s, -0.8, 0.8);
  const RealMatrix x = random_matrix(in_rows, positions, s);
  SequentialCache cache;
  const RealMatrix y = net.forward(params, x, &cache);
  const RealMatrix w = random_matrix(y.rows(), y.cols(), s);
  std::vector<double> grads(params.size(), 0.0);
  net.backward(params, cache, w, grads);
  auto loss = [&](std::span<const double> p) {
    const RealMatrix out = net.forward(p, x);
    double total = 0.0;
    for (std::size_t i = 0; i < out.data().size(); ++i) total += out.data()[i] * w.data()[i];
    return total;
  };
  return {name, grad_check(params, grads, blocks, loss, kLayerGradTolerance)};
}

GradCheckCase check_input_gradient(const std::string& name, const Sequential& net,
                                   std::size_t in_rows, std::size_t positions, RngStream& s) {
  std::vector<double> params(net.param_count());
  fill_uniform(params, s, -0.8, 0.8);
  const RealMatrix x = random_matrix(in_rows, positions, s);
  SequentialCache cache;
  const RealMatrix y = net.forward(params, x, &cache);
  const RealMatrix w = random_matrix(y.rows(), y.cols(), s);
  std::vector<double> scratch(params.size(), 0.0);
  const RealMatrix dx = net.backward(params, cache, w, scratch);
  auto loss = [&](std::span<const double> xv) {
    const RealMatrix out = net.forward(params, RealMatrix(in_rows, positions,
                                                          std::vector<double>(xv.begin(), xv.end())));
    double total = 0.0;
    for (std::size_t i = 0; i < out.data().size(); ++i) total += out.data()[i] * w.data()[i];
    return total;
  };
  const std::vector<ParamBlock> blocks = {{"input", 0, in_rows * positions}};
  return {name, grad_check(x.data(), dx.data(), blocks, loss, kLayerGradTolerance)};
}

GradCheckCase check_xent(RngStream& s) {
  const std::size_t b = 6, c = 4;
  const RealMatrix logits = random_matrix(b, c, s, -3.0, 3.0);
  std::vector<std::uint32_t> labels(b);
  for (auto& l : labels) l = static_cast<std::uint32_t>(s.below(c));
  const XentResult r = softmax_xent(logits, labels);
  auto loss = [&](std::span<const double> z) {
    return softmax_xent(RealMatrix(b, c, std::vector<double>(z.begin(), z.end())), labels).loss;
  };
  const std::vector<ParamBlock> blocks = {{"logits", 0, b * c}};
  return {"softmax_xent", grad_check(logits.data(), r.dlogits.data(), blocks, loss,
                                     kLayerGradTolerance)};
}

GradCheckCase check_channelnet(const std::string& name, const ChannelNetConfig& cfg,
                               std::size_t n, std::size_t k, RngStream& s) {
  ChannelNetModel model(cfg);
  fill_uniform(model.params(), s, -0.5, 0.5);
  const RealMatrix h = random_matrix(n, k, s, -0.7, 0.7);
  std::vector<double> y(n);
  fill_uniform(y, s, -1.0, 1.0);
  std::vector<std::uint32_t> labels(k);
  for (auto& l : labels) l = static_cast<std::uint32_t>(s.below(cfg.classes));

  ChannelNetCache cache;
  const RealMatrix logits = forward(model, h, y, &cache);
  const XentResult xent = softmax_xent(logits, labels);
  std::vector<double> grads(model.param_count(), 0.0);
  backward(model, h, cache, xent.dlogits, grads);

  ChannelNetModel probe = model;
  auto loss = [&](std::span<const double> p) {
    std::copy(p.begin(), p.end(), probe.params().begin());
    return softmax_xent(forward(probe, h, y), labels).loss;
  };
  return {name, grad_check(model.params(), grads, model.blocks(), loss, kModelGradTolerance)};
}

}  // namespace

std::vector<GradCheckCase> run_gradcheck_suite(bool full, std::uint64_t seed) {
  RngStream s(seed, kInitStreams + 0x6763);
  std::vector<GradCheckCase> out;

  {
    const DenseLayer d(5, 4);
    out.push_back(check_stack("dense", Sequential({d}), 5, 7,
                              {{"dense.weight", 0, 20}, {"dense.bias", 20, 4}}, s));
    out.push_back(check_input_gradient("dense.input", Sequential({d}), 5, 7, s));
  }
  {
    const DenseLayer d1(3, 6, 0), d2(6, 2, d1.param_count());
    const Sequential net({d1, ReluLayer{}, d2});
    out.push_back(check_stack("mlp_relu", net, 3, 9,
                              {{"dense1.weight", 0, 18},
                               {"dense1.bias", 18, 6},
                               {"dense2.weight", 24, 12},
                               {"dense2.bias", 36, 2}},
                              s));
    out.push_back(check_input_gradient("relu.input", Sequential({ReluLayer{}}), 4, 6, s));
  }
  {
    const Conv1dLayer c(4, 5, 3);
    out.push_back(check_stack("conv1d", Sequential({c}), 4, 7,
                              {{"conv.weight", 0, 60}, {"conv.bias", 60, 5}}, s));
    out.push_back(check_input_gradient("conv1d.input", Sequential({c}), 4, 7, s));
  }
  out.push_back(check_xent(s));

  ChannelNetConfig tiny;
  tiny.iterations = 2;
  tiny.features = 3;
  tiny.hidden = 4;
  tiny.classes = 2;
  out.push_back(check_channelnet("channelnet-mlp", tiny, 4, 2, s));
  ChannelNetConfig tiny_conv = tiny;
  tiny_conv.variant = Variant::conv;
  tiny_conv.filters = 3;
  out.push_back(check_channelnet("channelnet-conv", tiny_conv, 4, 2, s));

  if (full) {
    ChannelNetConfig mid;
    mid.iterations = 4;
    mid.features = 5;
    mid.hidden = 6;
    mid.classes = 4;
    out.push_back(check_channelnet("channelnet-mlp.L4", mid, 8, 4, s));
    ChannelNetConfig after = tiny_conv;
    after.placement = ConvPlacement::after_mlp;
    out.push_back(check_channelnet("channelnet-conv.after", after, 6, 4, s));
    ChannelNetConfig k5 = tiny_conv;
    k5.kernel_size = 5;
    k5.iterations = 3;
    out.push_back(check_channelnet("channelnet-conv.k5", k5, 8, 6, s));
  }
  return out;
}

}  // namespace chnet
