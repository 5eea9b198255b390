#include "chnet/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "chnet/errors.hpp"
#include "chnet/format.hpp"
#include "chnet/parallel.hpp"

namespace chnet {

namespace {

constexpr std::uint64_t kSnrSubstream = 16;

struct SampleOutcome {
  double loss = 0.0;
  std::size_t errors = 0;
  bool failed = false;
  std::string reason;
};

}  // namespace

double lr_at(const LrSchedule& s, std::size_t epoch) {
  if (s.every == 0) return s.lr;
  return s.lr * std::pow(s.factor, static_cast<double>(epoch / s.every));
}

void TrainConfig::validate() const {
  scenario.validate();
  if (!std::isfinite(snr_lo_db) || !std::isfinite(snr_hi_db) || snr_lo_db > snr_hi_db)
    throw ConfigError("train: need finite snr_lo <= snr_hi");
  if (epochs == 0) throw ConfigError("train: epochs must be >= 1");
  if (batch == 0 || samples_per_epoch == 0 || samples_per_epoch % batch != 0)
    throw ConfigError("train: batch must divide samples_per_epoch");
  if (!(schedule.lr > 0.0) || !std::isfinite(schedule.lr))
    throw ConfigError("train: lr must be > 0");
  if (!(schedule.factor > 0.0) || schedule.factor > 1.0)
    throw ConfigError("train: lr_decay_factor must be in (0, 1]");
  if (threads == 0) throw ConfigError("train: threads must be >= 1");
}

TransmissionSample make_training_sample(const TrainConfig& config, const Simulator& sim,
                                        std::uint64_t index) {
  const RngStream stream = RngStream(config.seed, kTrainStreams).substream(index);
  RngStream snr_stream = stream.substream(kSnrSubstream);
  const double snr =
      config.snr_lo_db + (config.snr_hi_db - config.snr_lo_db) * snr_stream.uniform();
  return sim.sample(snr, stream);
}

TrainingBatch make_batch(const TrainConfig& config, const Simulator& sim,
                         std::uint64_t batch_index) {
  TrainingBatch b;
  b.samples.reserve(config.batch);
  for (std::size_t i = 0; i < config.batch; ++i)
    b.samples.push_back(make_training_sample(config, sim, batch_index * config.batch + i));
  return b;
}

std::string TrainLog::to_csv(bool include_seconds) const {
  std::string out = include_seconds ? "epoch,loss,ser_estimate,lr,seconds\n"
                                    : "epoch,loss,ser_estimate,lr\n";
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + ',' + format_double(e.loss) + ',' +
           format_double(e.ser_estimate) + ',' + format_double(e.lr);
    if (include_seconds) out += ',' + format_double(e.seconds);
    out += '\n';
  }
  return out;
}

void TrainLog::write_csv(const std::filesystem::path& path) const {
  write_text_file(path, to_csv());
}

ChannelNetModel make_initialized_model(const ChannelNetConfig& config, std::uint64_t seed) {
  ChannelNetModel model(config);
  RngStream stream(seed, kInitStreams);
  model.initialize(stream);
  return model;
}

TrainLog train(ChannelNetModel& model, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  const Constellation constellation(config.scenario.qam_order);
  if (constellation.classes() != model.config().classes)
    throw ConfigError("train: model classes do not match the scenario constellation");
  const Simulator sim(config.scenario, constellation);

  const std::size_t n_params = model.param_count();
  const std::size_t batches = config.samples_per_epoch / config.batch;
  AdamState adam(n_params);
  std::vector<double> sample_grads(config.batch * n_params);
  std::vector<double> grads(n_params);
  std::vector<SampleOutcome> outcomes(config.batch);
  std::vector<double> last_good(model.params().begin(), model.params().end());
  TrainLog log;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = lr_at(config.schedule, epoch);
    double loss_sum = 0.0;
    std::size_t errors = 0, symbols = 0;

    for (std::size_t b = 0; b < batches; ++b) {
      const std::uint64_t first = (epoch * batches + b) * config.batch;
      std::fill(sample_grads.begin(), sample_grads.end(), 0.0);
      const ChannelNetModel& frozen = model;
      parallel_for(config.batch, config.threads, [&](std::size_t i) {
        SampleOutcome& out = outcomes[i];
        out = {};
        try {
          const TransmissionSample s = make_training_sample(config, sim, first + i);
          ChannelNetCache cache;
          const RealMatrix logits = forward(frozen, s.h_hat, s.y, &cache);
          const XentResult xent = softmax_xent(logits, s.frame.labels);
          if (!std::isfinite(xent.loss)) throw NumericError("non-finite loss");
          out.loss = xent.loss;
          std::vector<std::uint32_t> labels(logits.rows());
          for (std::size_t r = 0; r < logits.rows(); ++r) {
            const auto row = logits.row(r);
            labels[r] = static_cast<std::uint32_t>(
                std::max_element(row.begin(), row.end()) - row.begin());
          }
          out.errors = symbol_errors(s.frame, frame_from_labels(constellation, labels));
          backward(frozen, s.h_hat, cache, xent.dlogits,
                   std::span<double>(sample_grads).subspan(i * n_params, n_params));
        } catch (const NumericError& e) {
          out.failed = true;
          out.reason = e.what();
        }
      });

      for (std::size_t i = 0; i < config.batch; ++i) {
        if (outcomes[i].failed) {
          std::copy(last_good.begin(), last_good.end(), model.params().begin());
          log.aborted = true;
          log.abort_reason = "epoch " + std::to_string(epoch + 1) + ", sample " +
                             std::to_string(first + i) + ": " + outcomes[i].reason;
          return log;
        }
      }

      // fixed reduction order: sample 0, 1, 2, ...
      std::fill(grads.begin(), grads.end(), 0.0);
      for (std::size_t i = 0; i < config.batch; ++i) {
        const double* g = sample_grads.data() + i * n_params;
        for (std::size_t j = 0; j < n_params; ++j) grads[j] += g[j];
        loss_sum += outcomes[i].loss;
        errors += outcomes[i].errors;
        symbols += config.scenario.n_t;
      }
      const double inv_batch = 1.0 / static_cast<double>(config.batch);
      for (double& g : grads) g *= inv_batch;
      adam.step(model.params(), grads, lr);
    }

    if (!std::all_of(model.params().begin(), model.params().end(),
                     [](double v) { return std::isfinite(v); })) {
      std::copy(last_good.begin(), last_good.end(), model.params().begin());
      log.aborted = true;
      log.abort_reason = "epoch " + std::to_string(epoch + 1) + ": non-finite parameters";
      return log;
    }
    std::copy(model.params().begin(), model.params().end(), last_good.begin());

    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = loss_sum / static_cast<double>(config.samples_per_epoch);
    rec.ser_estimate = static_cast<double>(errors) / static_cast<double>(symbols);
    rec.lr = lr;
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.epochs.push_back(rec);

    if (!hooks.checkpoint_dir.empty() && config.checkpoint_every > 0 &&
        rec.epoch % config.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "model_epoch%03zu.chnet", rec.epoch);
      const auto path = hooks.checkpoint_dir / name;
      std::filesystem::create_directories(hooks.checkpoint_dir);
      save_checkpoint(model, path);
      log.checkpoints.push_back(path);
    }
    if (hooks.on_epoch) hooks.on_epoch(rec);
  }
  return log;
}

std::string model_metadata(const ChannelNetModel& model, const TrainConfig& config,
                           std::size_t epochs_completed) {
  const auto& m = model.config();
  const auto& s = config.scenario;
  std::ostringstream out;
  out << "format_version = " << kCheckpointVersion << '\n'
      << "model.iterations = " << m.iterations << '\n'
      << "model.features = " << m.features << '\n'
      << "model.hidden = " << m.hidden << '\n'
      << "model.classes = " << m.classes << '\n'
      << "model.variant = " << to_string(m.variant) << '\n';
  if (m.variant == Variant::conv)
    out << "model.kernel_size = " << m.kernel_size << '\n'
        << "model.filters = " << m.filters << '\n'
        << "model.conv_placement = " << to_string(m.placement) << '\n';
  out << "model.parameters = " << model.param_count() << '\n'
      << "scenario.digest = " << s.digest() << '\n'
      << "scenario.n_r = " << s.n_r << '\n'
      << "scenario.n_t = " << s.n_t << '\n'
      << "scenario.qam_order = " << s.qam_order << '\n'
      << "scenario.channel_model = " << to_string(s.model) << '\n'
      << "train.seed = " << config.seed << '\n'
      << "train.snr_lo = " << format_double(config.snr_lo_db) << '\n'
      << "train.snr_hi = " << format_double(config.snr_hi_db) << '\n'
      << "train.samples_per_epoch = " << config.samples_per_epoch << '\n'
      << "train.batch = " << config.batch << '\n'
      << "train.epochs_completed = " << epochs_completed << '\n';
  return out.str();
}

}  // namespace chnet
