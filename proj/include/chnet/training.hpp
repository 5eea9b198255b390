#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "chnet/channel.hpp"
#include "chnet/channelnet.hpp"

namespace chnet {

/// Step decay: lr * factor^floor(epoch / every).
struct LrSchedule {
  double lr = 1e-3;
  double factor = 0.1;
  std::size_t every = 20;
};

double lr_at(const LrSchedule& schedule, std::size_t epoch);

struct TrainConfig {
  ChannelScenario scenario;
  double snr_lo_db = 0.0;
  double snr_hi_db = 20.0;
  std::size_t epochs = 30;
  std::size_t samples_per_epoch = 200'000;
  std::size_t batch = 64;
  LrSchedule schedule;
  std::uint64_t seed = 1;
  /// Save a checkpoint every this many epochs; 0 saves none mid-run.
  std::size_t checkpoint_every = 0;
  std::size_t threads = 1;

  /// lo <= hi, batch divides samples_per_epoch, lr > 0, ...
  void validate() const;
};

/// Training sample number `index` (global across epochs), with its SNR drawn
/// uniformly from [snr_lo_db, snr_hi_db].
TransmissionSample make_training_sample(const TrainConfig& config, const Simulator& sim,
                                        std::uint64_t index);

struct TrainingBatch {
  std::vector<TransmissionSample> samples;
};

/// Batch `batch_index` of the run; samples are batch_index * batch + i.
TrainingBatch make_batch(const TrainConfig& config, const Simulator& sim,
                         std::uint64_t batch_index);

struct EpochRecord {
  std::size_t epoch = 0;  ///< 1-based count of completed epochs
  double loss = 0.0;
  double ser_estimate = 0.0;
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::vector<std::filesystem::path> checkpoints;
  bool aborted = false;
  std::string abort_reason;

  /// epoch,loss,ser_estimate,lr,seconds
  std::string to_csv(bool include_seconds = true) const;
  void write_csv(const std::filesystem::path& path) const;
};

struct TrainHooks {
  /// Where periodic checkpoints go (model_epochNNN.chnet); empty disables them.
  std::filesystem::path checkpoint_dir;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Trains in place. A non-finite loss stops the run, restores the parameters
/// of the last completed epoch and sets log.aborted.
TrainLog train(ChannelNetModel& model, const TrainConfig& config, const TrainHooks& hooks = {});

/// Fresh model for a config, initialized from the init stream of `seed`.
ChannelNetModel make_initialized_model(const ChannelNetConfig& config, std::uint64_t seed);

/// key = value sidecar describing how a checkpoint was produced.
std::string model_metadata(const ChannelNetModel& model, const TrainConfig& config,
                           std::size_t epochs_completed);

}  // namespace chnet
