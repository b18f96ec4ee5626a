// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace sambamixer::cli {

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kDataFailure = 2, kNumericAbort = 3 };

struct TrainArgs {
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  bool resume{false};
  std::int64_t max_steps{-1};
};

struct EvalArgs {
  std::string checkpoint_path;
  std::string data_path;
  std::string out_dir;
  std::string split{"NASA-L"};
  std::vector<int> start_cycles{0};
  double eol_threshold{70.0};
};

struct AblateArgs {
  std::string which;  // cls | backbone | resample | pe
  std::string config_path;
  std::string data_path;
  std::string out_dir;
  std::int64_t max_steps{-1};
};

struct SynthArgs {
  std::string out_dir;
  std::vector<int> batteries;  // empty: every battery named by the NASA splits
  int cycles{120};
  std::uint64_t seed{0};
  double sample_period_s{20.0};
};

// Each command writes <out_dir>/run_manifest.json and returns an ExitCode. The config
// seed is replaced by SAMBA_SEED when that variable is set.
int cmd_train(const TrainArgs& args, std::ostream& log, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& log, std::ostream& err);
int cmd_ablate(const AblateArgs& args, std::ostream& log, std::ostream& err);
int cmd_synth(const SynthArgs& args, std::ostream& log, std::ostream& err);

// Values of one ablation grid ("cls" -> tail, middle, head, none). Empty when unknown.
std::vector<std::string> ablation_grid(const std::string& which);

// "0,30,70" -> {0, 30, 70}. Throws ConfigError on malformed lists.
std::vector<int> parse_int_list(const std::string& text);

}  // namespace sambamixer::cli
