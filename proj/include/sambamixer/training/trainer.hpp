// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "sambamixer/evaluation/evaluate.hpp"
#include "sambamixer/model/checkpoint.hpp"
#include "sambamixer/training/adamw.hpp"
#include "sambamixer/training/sampler.hpp"
#include "sambamixer/training/train_config.hpp"

namespace sambamixer::training {

struct TraceRow {
  int epoch{0};  // 1-based, the epoch just completed
  std::int64_t step{0};
  double train_mse{0};
  std::optional<double> eval_mae;
  std::optional<double> eval_rmse;
  std::optional<double> eval_mape;
  double lr{0};
};

inline constexpr const char* kTraceHeader = "epoch,step,train_mse,eval_mae,eval_rmse,eval_mape,lr";
void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace);

struct TrainOptions {
  std::string out_dir;          // trace.csv, best.ckpt, last.ckpt; empty writes nothing
  bool resume{false};           // continue from out_dir/last.ckpt when it exists
  std::int64_t max_steps{-1};   // total optimizer steps cap, -1 for none
  bool evaluate{true};          // per-epoch metrics on the evaluation batteries
  std::function<void(const TraceRow&)> on_epoch;
  std::ostream* log{nullptr};
};

struct TrainResult {
  std::vector<TraceRow> trace;
  std::int64_t steps{0};
  std::optional<double> best_eval_mae;
  int best_epoch{0};
  bool aborted{false};  // a non-finite loss or gradient stopped the run
  std::string abort_reason;
};

// Owns the optimizer and the sampling generator for one model. The constructor fits the
// normalization statistics on the training batteries and sets the head output bias to
// their mean SOH.
class Trainer {
 public:
  Trainer(model::SambaMixerModel& model, const TrainConfig& config, std::vector<dataset::Battery> train,
          std::vector<dataset::Battery> eval = {});

  // One AdamW step on a freshly drawn batch; returns the batch MSE before the update.
  // Throws NumericError on a non-finite loss or gradient, leaving parameters untouched.
  double train_step(double lr);
  TrainResult run(const TrainOptions& options = {});

  // Pooled eval metrics over the evaluation batteries from cycle 0; nullopt without any.
  std::optional<evaluation::PooledMetrics> evaluate() const;

  model::Checkpoint checkpoint() const;
  void restore(const model::Checkpoint& checkpoint);

  int steps_per_epoch() const;
  std::int64_t step() const noexcept { return optimizer_.step; }
  int epoch() const noexcept { return epoch_; }
  double last_grad_norm() const noexcept { return last_grad_norm_; }
  const TrainConfig& config() const noexcept { return config_; }
  dataset::ResampleMode train_resample_mode() const noexcept { return config_.resample_mode_train; }
  dataset::ResampleMode eval_resample_mode() const noexcept { return config_.resample_mode_eval; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  struct Partial {
    std::vector<Tensor> grads;
    long double squared_error{0};
  };
  void accumulate_elements(const std::vector<BatchDraw>& draws, std::size_t begin, std::size_t end,
                           Partial& out) const;

  model::SambaMixerModel& model_;
  TrainConfig config_;
  std::vector<dataset::Battery> train_;
  std::vector<dataset::Battery> eval_;
  std::vector<CycleRef> pool_;
  std::unordered_map<const numerics::Parameter*, std::size_t> param_index_;
  AdamWState optimizer_;
  std::mt19937_64 rng_;
  int epoch_{0};
  double last_grad_norm_{0};
  std::vector<TraceRow> trace_;
  std::optional<double> best_eval_mae_;
  int best_epoch_{0};
  std::vector<std::string> warnings_;
};

}  // namespace sambamixer::training
