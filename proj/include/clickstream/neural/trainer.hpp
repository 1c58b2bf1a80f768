#pragma once

#include <vector>

namespace clickstream::nn {

struct EarlyStopConfig {
  int patience = 10;
  int max_epochs = 50;
};

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_accuracy = 0.0;
  bool improved = false;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_accuracy = 0.0;
  bool stopped_early = false;
};

/// Tracks the monitored validation accuracy. An epoch improves only if it
/// strictly beats the best so far; `patience` non-improving epochs in a row
/// stop training.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Returns true if this epoch is the new best.
  bool observe(double accuracy) {
    if (!seen_ || accuracy > best_) {
      seen_ = true;
      best_ = accuracy;
      wait_ = 0;
      return true;
    }
    ++wait_;
    return false;
  }

  bool should_stop() const { return wait_ >= patience_; }
  double best() const { return best_; }

 private:
  int patience_;
  int wait_ = 0;
  bool seen_ = false;
  double best_ = 0.0;
};

/// Epoch loop with early stopping on validation accuracy.
///   run_epoch(epoch)   -> mean training loss of that epoch
///   validate()         -> validation accuracy
///   keep_best(epoch)   -> called when an epoch becomes the new best, so the
///                         caller can snapshot parameters
template <typename RunEpoch, typename Validate, typename KeepBest>
TrainLog train_loop(const EarlyStopConfig& cfg, RunEpoch&& run_epoch, Validate&& validate,
                    KeepBest&& keep_best) {
  TrainLog log;
  EarlyStopping stopper(cfg.patience < 1 ? 1 : cfg.patience);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = run_epoch(epoch);
    rec.val_accuracy = validate();
    rec.improved = stopper.observe(rec.val_accuracy);
    if (rec.improved) {
      log.best_epoch = epoch;
      log.best_val_accuracy = rec.val_accuracy;
      keep_best(epoch);
    }
    log.epochs.push_back(rec);
    if (stopper.should_stop()) {
      log.stopped_early = epoch < cfg.max_epochs;
      break;
    }
  }
  return log;
}

}  // namespace clickstream::nn
