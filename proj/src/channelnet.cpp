#include "chnet/channelnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "chnet/errors.hpp"
#include "chnet/mult_counter.hpp"

namespace chnet {

namespace {

constexpr char kMagic[5] = {'C', 'H', 'N', 'E', 'T'};

/// Appends layers for one antenna feature processor mapping in -> out
/// channels, advancing offset.
Sequential make_processor(const ChannelNetConfig& c, std::size_t in, std::size_t out,
                          std::size_t& offset) {
  std::vector<Layer> layers;
  auto dense = [&](std::size_t i, std::size_t o) {
    DenseLayer l(i, o, offset);
    offset += l.param_count();
    layers.emplace_back(l);
  };
  auto conv = [&](std::size_t i, std::size_t o) {
    Conv1dLayer l(i, o, c.kernel_size, offset);
    offset += l.param_count();
    layers.emplace_back(l);
  };
  auto relu = [&] { layers.emplace_back(ReluLayer{}); };

  if (c.variant == Variant::mlp) {
    dense(in, c.hidden);
    relu();
    dense(c.hidden, out);
  } else if (c.placement == ConvPlacement::before_mlp) {
    conv(in, c.filters);
    relu();
    conv(c.filters, c.filters);
    relu();
    dense(c.filters, c.hidden);
    relu();
    dense(c.hidden, out);
  } else {
    dense(in, c.hidden);
    relu();
    dense(c.hidden, out);
    conv(out, c.filters);
    relu();
    conv(c.filters, out);
  }
  return Sequential(std::move(layers));
}

void append_blocks(const Sequential& s, const std::string& prefix,
                   std::vector<ParamBlock>& blocks) {
  std::size_t dense_n = 0, conv_n = 0;
  for (const auto& layer : s.layers()) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      const std::string name = prefix + ".dense" + std::to_string(++dense_n);
      blocks.push_back({name + ".weight", d->offset(), d->in() * d->out()});
      blocks.push_back({name + ".bias", d->bias_offset(), d->out()});
    } else if (const auto* c = std::get_if<Conv1dLayer>(&layer)) {
      const std::string name = prefix + ".conv" + std::to_string(++conv_n);
      blocks.push_back({name + ".weight", c->offset(),
                        c->filters() * c->in_channels() * c->kernel_size()});
      blocks.push_back({name + ".bias", c->bias_offset(), c->filters()});
    }
  }
}

void check_finite(const RealMatrix& m, std::size_t iteration) {
  if (!m.all_finite())
    throw NumericError("forward diverged at iteration " + std::to_string(iteration));
}

// little-endian byte writers/readers, independent of host order

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n)
      throw CheckpointError(std::string("checkpoint truncated while reading ") + what);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32(const char* what) {
    auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    auto s = take(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
    return v;
  }
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

void ChannelNetConfig::validate() const {
  if (iterations < 1) throw ConfigError("channelnet: iterations must be >= 1");
  if (features < 1) throw ConfigError("channelnet: features must be >= 1");
  if (hidden < 1) throw ConfigError("channelnet: hidden must be >= 1");
  if (classes < 2) throw ConfigError("channelnet: classes must be >= 2");
  if (variant != Variant::mlp && variant != Variant::conv)
    throw ConfigError("channelnet: unknown variant");
  if (variant == Variant::conv) {
    if (kernel_size % 2 == 0) throw ConfigError("channelnet: kernel_size must be odd");
    if (filters < 1) throw ConfigError("channelnet: filters must be >= 1");
    if (placement != ConvPlacement::before_mlp && placement != ConvPlacement::after_mlp)
      throw ConfigError("channelnet: unknown conv placement");
  }
}

std::string to_string(Variant v) { return v == Variant::mlp ? "mlp" : "conv"; }

std::string to_string(ConvPlacement p) {
  return p == ConvPlacement::before_mlp ? "before" : "after";
}

ChannelNetModel::ChannelNetModel(ChannelNetConfig config) : config_(config) {
  config_.validate();
  const std::size_t l = config_.iterations, d = config_.features;
  std::size_t offset = 0;
  for (std::size_t t = 0; t < l; ++t) {
    rx_.push_back(make_processor(config_, t == 0 ? 1 : d, d, offset));
    append_blocks(rx_.back(), "rx" + std::to_string(t + 1), blocks_);
    tx_.push_back(make_processor(config_, d, t + 1 == l ? config_.classes : d, offset));
    append_blocks(tx_.back(), "tx" + std::to_string(t + 1), blocks_);
  }
  params_.assign(offset, 0.0);
}

void ChannelNetModel::initialize(RngStream& stream) {
  for (std::size_t t = 0; t < config_.iterations; ++t) {
    for (const Sequential* s : {&rx_[t], &tx_[t]}) {
      const auto& layers = s->layers();
      // last parametric layer of the last transmit processor emits logits
      std::size_t last_param = 0;
      for (std::size_t i = 0; i < layers.size(); ++i)
        if (!std::holds_alternative<ReluLayer>(layers[i])) last_param = i;
      for (std::size_t i = 0; i < layers.size(); ++i) {
        const bool head = s == &tx_[t] && t + 1 == config_.iterations && i == last_param;
        const double gain =
            head ? kHeadInitGain : (i == last_param ? kOutputInitGain : 1.0);
        if (const auto* dl = std::get_if<DenseLayer>(&layers[i]))
          dl->initialize(params_, stream, gain);
        else if (const auto* cl = std::get_if<Conv1dLayer>(&layers[i]))
          cl->initialize(params_, stream, gain);
      }
    }
  }
}

RealMatrix forward(const ChannelNetModel& model, const RealMatrix& h,
                   std::span<const double> y, ChannelNetCache* cache) {
  const std::size_t n = h.rows(), k = h.cols();
  if (y.size() != n) throw ContractError("channelnet forward: y length != H rows");
  if (k == 0) throw ContractError("channelnet forward: H has no columns");
  const auto& cfg = model.config();
  const std::size_t l = cfg.iterations, d = cfg.features;
  const auto params = model.params();

  RealMatrix h_t = h.transposed();
  if (cache) {
    cache->rx.assign(l, {});
    cache->tx.assign(l, {});
  }

  // feature-major: F_rx is channels x N, F_tx is channels x K
  RealMatrix f_rx = RealMatrix::row_vector(y);
  RealMatrix skip;  // F_tx_old
  RealMatrix out;
  for (std::size_t t = 0; t < l; ++t) {
    const RealMatrix a = model.rx(t).forward(params, f_rx, cache ? &cache->rx[t] : nullptr);
    // channel layer F_tx = H^T F_rx, i.e. (F_rx as rows) * H
    RealMatrix s(d, k);
    gemm_acc(a.data(), h.data(), s.data(), d, n, k);
    if (t > 0) {
      auto sd = s.data();
      const auto kd = skip.data();
      for (std::size_t i = 0; i < sd.size(); ++i) sd[i] += kd[i];
    }
    check_finite(s, t + 1);
    skip = s;
    RealMatrix b = model.tx(t).forward(params, s, cache ? &cache->tx[t] : nullptr);
    if (t + 1 == l) {
      out = std::move(b);
      break;
    }
    // channel layer F_rx = H F_tx, then subtract y from every feature row
    RealMatrix r(d, n);
    gemm_acc(b.data(), h_t.data(), r.data(), d, k, n);
    for (std::size_t f = 0; f < d; ++f) {
      auto row = r.row(f);
      for (std::size_t j = 0; j < n; ++j) row[j] -= y[j];
    }
    check_finite(r, t + 1);
    f_rx = std::move(r);
  }
  check_finite(out, l);
  if (cache) cache->h_t = std::move(h_t);
  return out.transposed();
}

void backward(const ChannelNetModel& model, const RealMatrix& h, const ChannelNetCache& cache,
              const RealMatrix& dlogits, std::span<double> grads) {
  const auto& cfg = model.config();
  const std::size_t l = cfg.iterations, d = cfg.features;
  const std::size_t n = h.rows(), k = h.cols();
  if (grads.size() != model.param_count())
    throw ContractError("channelnet backward: gradient buffer size mismatch");
  if (dlogits.rows() != k || dlogits.cols() != cfg.classes)
    throw ContractError("channelnet backward: dlogits must be K x classes");
  if (cache.rx.size() != l || cache.tx.size() != l || cache.h_t.rows() != k ||
      cache.h_t.cols() != n)
    throw ContractError("channelnet backward: cache does not match this forward");
  const auto params = model.params();

  RealMatrix d_out = dlogits.transposed();
  RealMatrix d_skip(d, k);  // gradient reaching S_t through S_{t+1} = C_{t+1} + S_t
  for (std::size_t t = l; t-- > 0;) {
    RealMatrix ds = model.tx(t).backward(params, cache.tx[t], d_out, grads);
    if (t + 1 < l) {
      auto a = ds.data();
      const auto b = d_skip.data();
      for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    }
    if (t > 0) d_skip = ds;
    // S = A H  =>  dA = dS H^T
    RealMatrix da(d, n);
    gemm_acc(ds.data(), cache.h_t.data(), da.data(), d, k, n);
    RealMatrix dr = model.rx(t).backward(params, cache.rx[t], da, grads);
    if (t > 0) {
      // R = B H^T - y 1^T  =>  dB = dR H; the y term has no parameters
      RealMatrix db(d, k);
      gemm_acc(dr.data(), h.data(), db.data(), d, n, k);
      d_out = std::move(db);
    }
  }
}

DetectionResult detect(const ChannelNetModel& model, const DetectorInput& in) {
  if (in.constellation.classes() != model.config().classes)
    throw ConfigError("channelnet: model classes do not match the constellation");
  MultProbe probe;
  RealMatrix logits = forward(model, in.h, in.y);
  std::vector<std::uint32_t> labels(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.row(i);
    // max_element returns the first maximum: ties go to the lower class
    labels[i] = static_cast<std::uint32_t>(
        std::distance(row.begin(), std::max_element(row.begin(), row.end())));
  }
  DetectionResult r;
  r.hard = frame_from_labels(in.constellation, labels);
  r.logits = std::move(logits);
  r.mults = probe.delta();
  return r;
}

std::uint64_t channel_layer_mults(const ChannelNetConfig& c, std::size_t n, std::size_t k) {
  return static_cast<std::uint64_t>(2 * c.iterations - 1) * c.features * n * k;
}

std::uint64_t forward_mults(const ChannelNetConfig& c, std::size_t n, std::size_t k) {
  // convolution with zero padding skips the out-of-range taps
  auto conv_cost = [&](std::size_t in, std::size_t out, std::size_t p) -> std::uint64_t {
    std::uint64_t taps = 0;
    const auto half = static_cast<std::ptrdiff_t>(c.kernel_size / 2);
    for (std::size_t j = 0; j < c.kernel_size; ++j) {
      const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(j) - half;
      const auto a = static_cast<std::size_t>(shift < 0 ? -shift : shift);
      taps += p > a ? p - a : 0;
    }
    return static_cast<std::uint64_t>(out) * in * taps;
  };
  auto processor = [&](std::size_t in, std::size_t out, std::size_t p) -> std::uint64_t {
    const std::uint64_t h = c.hidden, f = c.filters;
    if (c.variant == Variant::mlp) return p * (in * h + h * out);
    if (c.placement == ConvPlacement::before_mlp)
      return conv_cost(in, f, p) + conv_cost(f, f, p) + p * (f * h + h * out);
    return p * (in * h + h * out) + conv_cost(out, f, p) + conv_cost(f, out, p);
  };
  const std::size_t l = c.iterations, d = c.features;
  std::uint64_t total = channel_layer_mults(c, n, k);
  for (std::size_t t = 0; t < l; ++t) {
    total += processor(t == 0 ? 1 : d, d, n);
    total += processor(d, t + 1 == l ? c.classes : d, k);
  }
  return total;
}

std::vector<std::uint8_t> serialize(const ChannelNetModel& model) {
  const auto& c = model.config();
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_u32(out, kCheckpointVersion);
  for (std::size_t v : {c.iterations, c.features, c.hidden, c.classes})
    put_u32(out, static_cast<std::uint32_t>(v));
  put_u32(out, static_cast<std::uint32_t>(c.variant));
  put_u32(out, static_cast<std::uint32_t>(c.kernel_size));
  put_u32(out, static_cast<std::uint32_t>(c.filters));
  put_u32(out, static_cast<std::uint32_t>(c.placement));
  put_u64(out, model.param_count());
  const auto params = model.params();
  for (const auto& block : model.blocks()) {
    put_u64(out, block.size);
    for (std::size_t i = 0; i < block.size; ++i)
      put_u64(out, std::bit_cast<std::uint64_t>(params[block.offset + i]));
  }
  return out;
}

ChannelNetModel deserialize(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  const auto magic = in.take(sizeof kMagic, "magic");
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic)))
    throw CheckpointError("not a ChannelNet checkpoint (bad magic)");
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  ChannelNetConfig c;
  c.iterations = in.u32("config");
  c.features = in.u32("config");
  c.hidden = in.u32("config");
  c.classes = in.u32("config");
  c.variant = static_cast<Variant>(in.u32("config"));
  c.kernel_size = in.u32("config");
  c.filters = in.u32("config");
  c.placement = static_cast<ConvPlacement>(in.u32("config"));
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("invalid checkpoint config: ") + e.what());
  }
  ChannelNetModel model(c);
  const std::uint64_t count = in.u64("parameter count");
  if (count != model.param_count())
    throw CheckpointError("checkpoint parameter count " + std::to_string(count) +
                          " does not match its config (" +
                          std::to_string(model.param_count()) + ")");
  auto params = model.params();
  for (const auto& block : model.blocks()) {
    const std::uint64_t size = in.u64(block.name.c_str());
    if (size != block.size)
      throw CheckpointError("checkpoint block " + block.name + " has wrong size");
    for (std::size_t i = 0; i < block.size; ++i)
      params[block.offset + i] = std::bit_cast<double>(in.u64(block.name.c_str()));
  }
  if (!in.done()) throw CheckpointError("trailing bytes after checkpoint payload");
  return model;
}

void save_checkpoint(const ChannelNetModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize(model);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("failed writing " + path.string());
}

ChannelNetModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                  std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace chnet
