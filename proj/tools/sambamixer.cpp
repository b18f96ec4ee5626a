// SPDX-License-Identifier: Apache-2.0
// Command-line driver: train, eval, ablate, synth.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "sambamixer/cli/commands.hpp"
#include "sambamixer/error.hpp"

int main(int argc, char** argv) {
  using namespace sambamixer::cli;
  CLI::App app{"SambaMixer state-of-health estimator for Li-ion batteries"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train a model on canonical cycle data");
  train_cmd->add_option("--config,-c", train.config_path, "Run config (JSON)")->required();
  train_cmd->add_option("--data,-d", train.data_path, "Canonical cycle file or directory")->required();
  train_cmd->add_option("--out,-o", train.out_dir, "Output directory")->required();
  train_cmd->add_flag("--resume", train.resume, "Continue from <out>/last.ckpt");
  train_cmd->add_option("--max-steps", train.max_steps, "Stop after this many optimizer steps");

  EvalArgs eval;
  std::string start_cycles = "0";
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on the evaluation batteries");
  eval_cmd->add_option("--checkpoint,-k", eval.checkpoint_path, "Checkpoint file")->required();
  eval_cmd->add_option("--data,-d", eval.data_path, "Canonical cycle file or directory")->required();
  eval_cmd->add_option("--out,-o", eval.out_dir, "Report directory")->required();
  eval_cmd->add_option("--split", eval.split, "Split whose evaluation batteries are used");
  eval_cmd->add_option("--start-cycles", start_cycles, "Comma-separated start cycles, e.g. 0,30,70,100");
  eval_cmd->add_option("--eol-threshold", eval.eol_threshold, "End-of-life SOH threshold in percent");

  AblateArgs ablate;
  auto* ablate_cmd = app.add_subcommand("ablate", "Train and compare one ablation grid");
  ablate_cmd->add_option("which", ablate.which, "cls | backbone | resample | pe")->required();
  ablate_cmd->add_option("--config,-c", ablate.config_path, "Run config (JSON)")->required();
  ablate_cmd->add_option("--data,-d", ablate.data_path, "Canonical cycle file or directory")->required();
  ablate_cmd->add_option("--out,-o", ablate.out_dir, "Output directory")->required();
  ablate_cmd->add_option("--max-steps", ablate.max_steps, "Optimizer step cap per run");

  SynthArgs synth;
  std::string battery_list;
  auto* synth_cmd = app.add_subcommand("synth", "Write synthetic NASA-like cycle files");
  synth_cmd->add_option("--out,-o", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--batteries", battery_list, "Comma-separated battery numbers");
  synth_cmd->add_option("--cycles", synth.cycles, "Cycles per battery");
  synth_cmd->add_option("--seed", synth.seed, "Generator seed");
  synth_cmd->add_option("--sample-period", synth.sample_period_s, "Seconds between samples");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigFailure;
  }

  try {
    if (*train_cmd) return cmd_train(train, std::cout, std::cerr);
    if (*eval_cmd) {
      eval.start_cycles = parse_int_list(start_cycles);
      return cmd_eval(eval, std::cout, std::cerr);
    }
    if (*ablate_cmd) return cmd_ablate(ablate, std::cout, std::cerr);
    if (*synth_cmd) {
      if (!battery_list.empty()) synth.batteries = parse_int_list(battery_list);
      return cmd_synth(synth, std::cout, std::cerr);
    }
  } catch (const sambamixer::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigFailure;
  }
  return kConfigFailure;
}
