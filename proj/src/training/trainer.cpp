// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "sambamixer/dataset/normalize.hpp"
#include "sambamixer/error.hpp"
#include "sambamixer/evaluation/evaluate.hpp"
#include "sambamixer/training/loss.hpp"

namespace sambamixer::training {
namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

std::optional<double> json_opt(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kTraceHeader << '\n';
  for (const TraceRow& r : trace)
    out << r.epoch << ',' << r.step << ',' << fmt(r.train_mse) << ',' << fmt(r.eval_mae) << ',' << fmt(r.eval_rmse)
        << ',' << fmt(r.eval_mape) << ',' << fmt(r.lr) << '\n';
}

Trainer::Trainer(model::SambaMixerModel& model, const TrainConfig& config, std::vector<dataset::Battery> train,
                 std::vector<dataset::Battery> eval)
    : model_(model), config_(config), train_(std::move(train)), eval_(std::move(eval)), rng_(config.seed) {
  config_.validate();
  pool_ = cycle_pool(train_);
  if (pool_.empty()) throw ParameterError("Trainer: the training set has no cycles");
  model_.set_norm_stats(dataset::fit_norm_stats(train_, &warnings_));

  long double soh = 0;
  for (const CycleRef& r : pool_) soh += train_[r.battery].cycles[r.cycle].soh_pct;
  model_.head_output_bias().value.fill(static_cast<Real>(soh / pool_.size()));

  auto& params = model_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) param_index_[&params[i]] = i;
  optimizer_ = make_adamw_state(params);
}

int Trainer::steps_per_epoch() const {
  if (config_.steps_per_epoch > 0) return config_.steps_per_epoch;
  return std::max<int>(1, static_cast<int>(pool_.size()) / config_.batch_size);
}

void Trainer::accumulate_elements(const std::vector<BatchDraw>& draws, std::size_t begin, std::size_t end,
                                  Partial& out) const {
  const auto& params = model_.parameters();
  out.grads.clear();
  for (std::size_t i = 0; i < params.size(); ++i) out.grads.push_back(Tensor::zeros(params[i].value.shape()));
  const Real inv_batch = Real{1} / static_cast<Real>(draws.size());
  for (std::size_t k = begin; k < end; ++k) {
    std::mt19937_64 element_rng(draws[k].seed);
    const dataset::ResampledCycle cycle = materialize(train_, draws[k], static_cast<int>(model_.config().num_samples),
                                                      config_.resample_mode_train, element_rng);
    numerics::Tape tape;
    const mixer::DropPath drop{config_.droppath_rate, true, &element_rng};
    const Var pred = model_.forward(tape, cycle, drop);
    const Real target = cycle.soh_label;
    const Var loss = mse_loss({pred}, std::span<const Real>(&target, 1));
    const Real value = loss.value().item();
    if (!std::isfinite(value)) {
      throw NumericError("non-finite loss on battery " + cycle.battery_id + " cycle " +
                         std::to_string(cycle.cycle_index));
    }
    out.squared_error += value;
    tape.backward(loss);
    for (const auto& [param, node] : tape.parameter_nodes()) {
      Tensor& dst = out.grads[param_index_.at(param)];
      const Tensor g = tape.grad(Var(&tape, node));
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += inv_batch * g[i];
    }
  }
}

double Trainer::train_step(double lr) {
  const auto draws = draw_batch(pool_, config_.batch_size, rng_);
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config_.workers), draws.size());
  std::vector<Partial> partials(workers);
  if (workers == 1) {
    accumulate_elements(draws, 0, draws.size(), partials[0]);
  } else {
    // Fixed contiguous chunks, reduced in chunk order, keep results independent of scheduling.
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = draws.size() * w / workers, end = draws.size() * (w + 1) / workers;
      threads.emplace_back([&, w, begin, end] {
        try {
          accumulate_elements(draws, begin, end, partials[w]);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<Tensor> grads = std::move(partials[0].grads);
  long double squared_error = partials[0].squared_error;
  for (std::size_t w = 1; w < workers; ++w) {
    squared_error += partials[w].squared_error;
    for (std::size_t i = 0; i < grads.size(); ++i)
      for (std::size_t k = 0; k < grads[i].size(); ++k) grads[i][k] += partials[w].grads[i][k];
  }
  last_grad_norm_ = clip_grad_norm(grads, config_.grad_clip_norm);
  if (!std::isfinite(last_grad_norm_)) throw NumericError("non-finite gradient norm");
  const AdamWConfig adam{config_.beta1, config_.beta2, config_.eps, config_.weight_decay};
  adamw_step(model_.parameters(), grads, optimizer_, adam, lr);
  return static_cast<double>(squared_error / draws.size());
}

std::optional<evaluation::PooledMetrics> Trainer::evaluate() const {
  if (eval_.empty()) return std::nullopt;
  std::vector<evaluation::MetricsReport> reports;
  for (const auto& b : eval_) reports.push_back(evaluation::evaluate_battery(model_, b, 0));
  return evaluation::pool(reports);
}

model::Checkpoint Trainer::checkpoint() const {
  model::Checkpoint ckpt = model::make_checkpoint(model_, optimizer_.step);
  const auto& params = model_.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    ckpt.tensors.push_back({"optim.first." + params[i].name, optimizer_.first[i]});
    ckpt.tensors.push_back({"optim.second." + params[i].name, optimizer_.second[i]});
  }
  std::ostringstream rng_state;
  rng_state << rng_;
  nlohmann::json trace = nlohmann::json::array();
  for (const TraceRow& r : trace_)
    trace.push_back({r.epoch, r.step, r.train_mse, opt_json(r.eval_mae), opt_json(r.eval_rmse),
                     opt_json(r.eval_mape), r.lr});
  ckpt.extras["trainer"] = {{"epoch", epoch_},
                            {"rng", rng_state.str()},
                            {"best_eval_mae", opt_json(best_eval_mae_)},
                            {"best_epoch", best_epoch_},
                            {"train_config", to_json(config_)},
                            {"trace", trace}};
  return ckpt;
}

void Trainer::restore(const model::Checkpoint& ckpt) {
  model::load_parameters(model_, ckpt);
  const auto& params = model_.parameters();
  AdamWState state = make_adamw_state(params);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Tensor* m = ckpt.find("optim.first." + params[i].name);
    const Tensor* v = ckpt.find("optim.second." + params[i].name);
    if (!m || !v || !numerics::same_shape(*m, params[i].value) || !numerics::same_shape(*v, params[i].value))
      throw FormatError("checkpoint lacks optimizer moments for '" + params[i].name + "'");
    state.first[i] = *m;
    state.second[i] = *v;
  }
  state.step = ckpt.step;
  try {
    const auto& t = ckpt.extras.at("trainer");
    epoch_ = t.at("epoch").get<int>();
    std::istringstream rng_state(t.at("rng").get<std::string>());
    rng_state >> rng_;
    if (!rng_state) throw FormatError("checkpoint generator state is malformed");
    best_eval_mae_ = json_opt(t.at("best_eval_mae"));
    best_epoch_ = t.at("best_epoch").get<int>();
    trace_.clear();
    for (const auto& r : t.at("trace"))
      trace_.push_back({r.at(0).get<int>(), r.at(1).get<std::int64_t>(), r.at(2).get<double>(), json_opt(r.at(3)),
                        json_opt(r.at(4)), json_opt(r.at(5)), r.at(6).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("checkpoint has no usable training state: ") + e.what());
  }
  optimizer_ = std::move(state);
}

TrainResult Trainer::run(const TrainOptions& options) {
  namespace fs = std::filesystem;
  TrainResult result;
  const bool write = !options.out_dir.empty();
  const fs::path dir(options.out_dir);
  if (write) fs::create_directories(dir);
  if (options.resume && write && fs::exists(dir / "last.ckpt")) {
    restore(model::read_checkpoint((dir / "last.ckpt").string()));
    if (options.log) *options.log << "resumed at epoch " << epoch_ << ", step " << step() << '\n';
  }

  const int steps = steps_per_epoch();
  auto out_of_steps = [&] { return options.max_steps >= 0 && step() >= options.max_steps; };
  for (int e = epoch_; e < config_.epochs && !out_of_steps(); ++e) {
    const double lr = config_.lr_at_epoch(e);
    long double mse_sum = 0;
    int done = 0;
    try {
      for (; done < steps && !out_of_steps(); ++done) mse_sum += train_step(lr);
    } catch (const NumericError& err) {
      result.aborted = true;
      result.abort_reason = "epoch " + std::to_string(e + 1) + ", step " + std::to_string(step() + 1) + ": " +
                            err.what();
      if (options.log) *options.log << "aborting: " << result.abort_reason << '\n';
      break;
    }
    epoch_ = e + 1;
    TraceRow row;
    row.epoch = epoch_;
    row.step = step();
    row.train_mse = done > 0 ? static_cast<double>(mse_sum / done) : 0.0;
    row.lr = lr;
    if (options.evaluate) {
      if (const auto m = evaluate()) {
        row.eval_mae = m->mae;
        row.eval_rmse = m->rmse;
        row.eval_mape = m->mape;
      }
    }
    trace_.push_back(row);
    const bool improved = row.eval_mae && (!best_eval_mae_ || *row.eval_mae < *best_eval_mae_);
    if (improved) {
      best_eval_mae_ = row.eval_mae;
      best_epoch_ = epoch_;
    }
    if (options.log) {
      *options.log << "epoch " << epoch_ << "/" << config_.epochs << " step " << row.step << " lr " << fmt(lr)
                   << " train_mse " << fmt(row.train_mse);
      if (row.eval_mae) *options.log << " eval_mae " << fmt(*row.eval_mae) << " eval_rmse " << fmt(*row.eval_rmse);
      *options.log << '\n';
    }
    if (write) {
      const model::Checkpoint ckpt = checkpoint();
      if (improved || (!row.eval_mae && !best_eval_mae_)) model::write_checkpoint((dir / "best.ckpt").string(), ckpt);
      model::write_checkpoint((dir / "last.ckpt").string(), ckpt);
      write_trace_csv((dir / "trace.csv").string(), trace_);
    }
    if (options.on_epoch) options.on_epoch(row);
  }
  result.trace = trace_;
  result.steps = step();
  result.best_eval_mae = best_eval_mae_;
  result.best_epoch = best_epoch_;
  return result;
}

}  // namespace sambamixer::training
