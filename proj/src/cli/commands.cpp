// SPDX-License-Identifier: Apache-2.0
#include "sambamixer/cli/commands.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <set>
#include <sstream>

#include "sambamixer/cli/manifest.hpp"
#include "sambamixer/dataset/canonical_io.hpp"
#include "sambamixer/dataset/preprocess.hpp"
#include "sambamixer/dataset/splits.hpp"
#include "sambamixer/dataset/synthetic.hpp"
#include "sambamixer/error.hpp"
#include "sambamixer/evaluation/report.hpp"
#include "sambamixer/model/checkpoint.hpp"
#include "sambamixer/training/trainer.hpp"

namespace sambamixer::cli {
namespace {

namespace fs = std::filesystem;
using dataset::Battery;

// Anything wrong with the input data (missing, unparsable, no usable batteries).
class DataFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int guarded(const std::function<int()>& body, std::ostream& err, std::string& message) {
  auto fail = [&](int code, const std::string& what) {
    message = what;
    err << "error: " << what << '\n';
    return code;
  };
  try {
    return body();
  } catch (const DataFailure& e) {
    return fail(kDataFailure, e.what());
  } catch (const NumericAbort& e) {
    return fail(kNumericAbort, e.what());
  } catch (const NumericError& e) {
    return fail(kNumericAbort, e.what());
  } catch (const std::exception& e) {
    return fail(kConfigFailure, e.what());
  }
}

std::optional<std::uint64_t> env_seed() {
  const char* text = std::getenv("SAMBA_SEED");
  if (!text || !*text) return std::nullopt;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(text, &used);
    if (used != std::string(text).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("SAMBA_SEED is not an unsigned integer: '") + text + "'");
  }
}

training::RunConfig load_config(const std::string& path) {
  if (path.empty()) throw ConfigError("no config file given");
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  training::RunConfig cfg = training::load_run_config(path);
  if (const auto s = env_seed()) cfg.train.seed = *s;
  return cfg;
}

std::vector<Battery> load_batteries(const std::string& path, std::ostream& err) {
  if (path.empty()) throw DataFailure("no data path given");
  if (!fs::exists(path)) throw DataFailure("data path not found: " + path);
  std::vector<dataset::DischargeCycle> cycles;
  try {
    cycles = dataset::load_canonical(path);
  } catch (const std::exception& e) {
    throw DataFailure(path + ": " + e.what());
  }
  dataset::PreprocessReport report;
  auto batteries = dataset::preprocess(std::move(cycles), {}, &report);
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (batteries.empty()) throw DataFailure(path + ": no battery with at least 2 usable cycles");
  return batteries;
}

dataset::SplitBatteries split_batteries(const std::vector<Battery>& batteries, const std::string& name,
                                        std::ostream& err) {
  auto split = dataset::apply_split(batteries, dataset::nasa_split(name));
  for (int id : split.missing) err << "warning: battery #" << id << " of " << name << " not found in data\n";
  if (split.train.empty()) throw DataFailure("none of the " + name + " training batteries are present in the data");
  return split;
}

std::uint64_t model_seed(std::uint64_t seed) { return seed ^ 0x5bd1e995ULL; }

training::TrainResult train_once(const training::RunConfig& cfg, const dataset::SplitBatteries& split,
                                 const std::string& out_dir, bool resume, std::int64_t max_steps,
                                 std::ostream& log, std::ostream& err) {
  model::SambaMixerModel model(cfg.model, model_seed(cfg.train.seed));
  log << "model " << model.parameter_count() << " parameters, " << cfg.model.num_layers << " blocks, d_model "
      << cfg.model.d_model << '\n';
  training::Trainer trainer(model, cfg.train, split.train, split.eval);
  for (const auto& w : trainer.warnings()) err << "warning: " << w << '\n';
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "config.json", std::ios::trunc);
    out << training::to_json(cfg).dump(2) << '\n';
  }
  training::TrainOptions options;
  options.out_dir = out_dir;
  options.resume = resume;
  options.max_steps = max_steps;
  options.log = &log;
  return trainer.run(options);
}

void finish(RunManifest& m, int code, const std::string& message) {
  m.exit_code = code;
  m.message = message;
  m.finished_at = utc_now_iso8601();
  if (!m.output_dir.empty()) write_manifest(m.output_dir, m);
}

RunManifest start(const std::string& command, const std::string& config_path, const std::string& out_dir) {
  RunManifest m;
  m.command = command;
  m.config_path = config_path;
  m.output_dir = out_dir;
  m.started_at = utc_now_iso8601();
  return m;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size() || v < 0) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad integer list entry '" + item + "' in '" + text + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty integer list");
  return out;
}

std::vector<std::string> ablation_grid(const std::string& which) {
  if (which == "cls") return {"tail", "middle", "head", "none"};
  if (which == "backbone") return {"vanilla-mamba", "sambamixer"};
  if (which == "resample") return {"linear", "random", "anchor"};
  if (which == "pe") return {"none", "sample-time", "sample-time+cycle-diff"};
  return {};
}

int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err) {
  RunManifest m = start("train", args.config_path, args.out_dir);
  std::string message;
  const int code = guarded(
      [&] {
        if (args.out_dir.empty()) throw ConfigError("no output directory given");
        const training::RunConfig cfg = load_config(args.config_path);
        m.seed = cfg.train.seed;
        m.add_input(args.config_path);
        m.add_input(args.data_path);
        const auto split = split_batteries(load_batteries(args.data_path, err), cfg.split, err);
        const auto result = train_once(cfg, split, args.out_dir, args.resume, args.max_steps, log, err);
        if (result.aborted) throw NumericAbort("training aborted (" + result.abort_reason + "); last good checkpoint kept");
        if (result.best_eval_mae)
          log << "best eval MAE " << fixed(*result.best_eval_mae) << " at epoch " << result.best_epoch << '\n';
        return int{kOk};
      },
      err, message);
  finish(m, code, message);
  return code;
}

int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err) {
  RunManifest m = start("eval", args.checkpoint_path, args.out_dir);
  std::string message;
  const int code = guarded(
      [&] {
        if (args.out_dir.empty()) throw ConfigError("no output directory given");
        if (args.start_cycles.empty()) throw ConfigError("no start cycles given");
        m.add_input(args.checkpoint_path);
        m.add_input(args.data_path);
        const model::Checkpoint ckpt = model::read_checkpoint(args.checkpoint_path);
        const model::SambaMixerModel model = model::model_from_checkpoint(ckpt);
        const auto batteries = load_batteries(args.data_path, err);
        const auto split = dataset::apply_split(batteries, dataset::nasa_split(args.split));
        if (split.eval.empty()) throw DataFailure("none of the evaluation batteries are present in the data");

        std::vector<evaluation::MetricsReport> reports;
        for (const Battery& b : split.eval) {
          for (int s : args.start_cycles) {
            if (s >= static_cast<int>(b.cycles.size())) {
              err << "warning: battery " << b.id << " has " << b.cycles.size() << " cycles, skipping start cycle "
                  << s << '\n';
              continue;
            }
            reports.push_back(evaluation::evaluate_battery(model, b, s, args.eol_threshold));
          }
        }
        evaluation::emit_report(reports, args.out_dir);
        log << "battery  start     MAE    RMSE    MAPE  EOL gt/pred  AEOLE\n";
        for (const auto& r : reports) {
          log << std::left << std::setw(8) << r.battery_id << std::right << std::setw(6) << r.start_cycle << "  "
              << fixed(r.mae, 3) << "  " << fixed(r.rmse, 3) << "  " << fixed(r.mape, 3) << "  "
              << (r.eol_gt ? std::to_string(*r.eol_gt) : "-") << "/" << (r.eol_pred ? std::to_string(*r.eol_pred) : "-")
              << "  " << r.aeole << '\n';
        }
        return int{kOk};
      },
      err, message);
  finish(m, code, message);
  return code;
}

int cmd_ablate(const AblateArgs& args, std::ostream& log, std::ostream& err) {
  RunManifest m = start("ablate " + args.which, args.config_path, args.out_dir);
  std::string message;
  const int code = guarded(
      [&] {
        const auto grid = ablation_grid(args.which);
        if (grid.empty())
          throw ConfigError("unknown ablation '" + args.which + "' (expected cls, backbone, resample or pe)");
        if (args.out_dir.empty()) throw ConfigError("no output directory given");
        const training::RunConfig base = load_config(args.config_path);
        m.seed = base.train.seed;
        m.add_input(args.config_path);
        m.add_input(args.data_path);
        const auto split = split_batteries(load_batteries(args.data_path, err), base.split, err);
        if (split.eval.empty()) throw DataFailure("ablation needs the evaluation batteries in the data");

        fs::create_directories(args.out_dir);
        const fs::path table_path = fs::path(args.out_dir) / ("ablation_" + args.which + ".csv");
        std::ofstream table(table_path, std::ios::trunc);
        table << "ablation,variant,mae,rmse,mape,best_epoch,steps,status\n";
        bool aborted = false;
        for (const std::string& variant : grid) {
          training::RunConfig cfg = base;
          if (args.which == "cls") cfg.model.cls_mode = model::parse_cls_mode(variant);
          if (args.which == "backbone") cfg.model.backbone = model::parse_backbone(variant);
          if (args.which == "resample") cfg.train.resample_mode_train = dataset::parse_resample_mode(variant);
          if (args.which == "pe") cfg.model.pe_mode = model::parse_pe_mode(variant);
          log << "== " << args.which << " = " << variant << '\n';
          const std::string sub = (fs::path(args.out_dir) / args.which / variant).string();
          const auto result = train_once(cfg, split, sub, false, args.max_steps, log, err);
          aborted = aborted || result.aborted;
          const auto best = model::model_from_checkpoint(model::read_checkpoint((fs::path(sub) / "best.ckpt").string()));
          std::vector<evaluation::MetricsReport> reports;
          for (const Battery& b : split.eval) reports.push_back(evaluation::evaluate_battery(best, b, 0));
          const auto pooled = evaluation::pool(reports);
          table << args.which << ',' << variant << ',' << pooled.mae << ',' << pooled.rmse << ',' << pooled.mape << ','
                << result.best_epoch << ',' << result.steps << ',' << (result.aborted ? "aborted" : "ok") << '\n';
          log << args.which << " " << variant << ": MAE " << fixed(pooled.mae, 3) << " RMSE " << fixed(pooled.rmse, 3)
              << " MAPE " << fixed(pooled.mape, 3) << '\n';
        }
        if (aborted) throw NumericAbort("at least one ablation run aborted on a non-finite loss");
        return int{kOk};
      },
      err, message);
  finish(m, code, message);
  return code;
}

int cmd_synth(const SynthArgs& args, std::ostream& log, std::ostream& err) {
  RunManifest m = start("synth", "", args.out_dir);
  std::string message;
  const int code = guarded(
      [&] {
        if (args.out_dir.empty()) throw ConfigError("no output directory given");
        if (args.cycles < 2) throw ConfigError("synth needs at least 2 cycles per battery");
        std::vector<int> ids = args.batteries;
        if (ids.empty()) {
          std::set<int> all;
          for (const auto& name : dataset::split_names()) {
            const auto s = dataset::nasa_split(name);
            all.insert(s.train_ids.begin(), s.train_ids.end());
            all.insert(s.eval_ids.begin(), s.eval_ids.end());
          }
          ids.assign(all.begin(), all.end());
        }
        const std::uint64_t seed = env_seed().value_or(args.seed);
        m.seed = seed;
        dataset::SyntheticOptions options;
        options.num_cycles = args.cycles;
        options.sample_period_s = static_cast<numerics::Real>(args.sample_period_s);
        fs::create_directories(args.out_dir);
        for (int id : ids) {
          const auto cycles = dataset::synthesize_batteries({id}, options, seed);
          const fs::path file = fs::path(args.out_dir) / (dataset::battery_name(id) + ".jsonl");
          dataset::write_canonical(file, cycles);
          log << "wrote " << file.string() << " (" << cycles.size() << " cycles)\n";
        }
        return int{kOk};
      },
      err, message);
  finish(m, code, message);
  return code;
}

}  // namespace sambamixer::cli
