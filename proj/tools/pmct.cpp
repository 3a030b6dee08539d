// tools/pmct.cpp

// Copyright 2026  The pmct Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pmct/commands.hpp"

namespace {

// Flags shared by augment, verify and features, keyed by setting name.
const char* const kRunFlags[][2] = {
    {"manifest", "JSON-lines manifest of utterances"},
    {"rir-list", "RIR pool: one id<TAB>path per line"},
    {"noise-list", "Noise pool: one id<TAB>path per line"},
    {"root", "Directory that relative paths are resolved against"},
    {"out", "Output directory"},
    {"seed", "Global seed (falls back to $PMCT_SEED)"},
    {"epoch", "Epoch index mixed into per-utterance seeds"},
    {"mode", "clean | mct | pmct"},
    {"pi", "Clean-patch probability in [0,1], or 'rand'"},
    {"patch-len", "Patch length in seconds"},
    {"p-reverb", "MCT probability of reverberation"},
    {"p-noise", "MCT probability of additive noise"},
    {"snr-lo", "Lower SNR bound in dB"},
    {"snr-hi", "Upper SNR bound in dB"},
    {"specaugment", "off | high | mid | low"},
    {"output-kind", "wav | features | both"},
    {"workers", "Number of worker threads"},
};

struct RunFlags {
  std::string config;
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  bool fail_fast = false;
  CLI::Option* fail_fast_opt = nullptr;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config, "Flat key = value config file; flags override it");
  for (const auto& [name, help] : kRunFlags)
    flags.options[name] = cmd->add_option(std::string("--") + name, flags.values[name], help);
  flags.fail_fast_opt = cmd->add_flag("--fail-fast", flags.fail_fast, "Stop at the first failing utterance");
}

pmct::RunConfig build_config(const RunFlags& flags) {
  pmct::RunConfig cfg;
  if (!flags.config.empty()) pmct::apply_config_file(cfg, flags.config);
  if (flags.options.at("seed")->count() == 0)
    if (const char* env = std::getenv("PMCT_SEED"); env && *env) pmct::apply_setting(cfg, "seed", env);
  for (const auto& [name, opt] : flags.options)
    if (opt->count() > 0) pmct::apply_setting(cfg, name, flags.values.at(name));
  if (flags.fail_fast_opt->count() > 0) cfg.fail_fast = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Patch-mixed multi-condition audio augmentation toolkit"};
  app.require_subcommand(1);

  RunFlags augment_flags, verify_flags, features_flags;
  auto* augment = app.add_subcommand("augment", "Augment every manifest utterance");
  add_run_flags(augment, augment_flags);
  auto* verify = app.add_subcommand("verify", "Recompute an augment run from its provenance and compare");
  add_run_flags(verify, verify_flags);
  auto* features = app.add_subcommand("features", "Extract log-mel features without augmentation");
  add_run_flags(features, features_flags);

  std::vector<std::string> model_dirs;
  std::string json_out;
  std::string estimator = "g1";
  unsigned attn_workers = 1;
  auto* attn = app.add_subcommand("attn-skew", "Average eigenvalue skewness of covariance attention maps");
  attn->add_option("dirs", model_dirs, "One or two directories of attention tensor files (reference first)")
      ->required()
      ->expected(1, 2);
  attn->add_option("--json", json_out, "Write the JSON report here ('-' for stdout)");
  attn->add_option("--estimator", estimator, "g1 (moment coefficient) or G1 (sample-adjusted)")
      ->check(CLI::IsMember({"g1", "G1"}));
  attn->add_option("--workers", attn_workers, "Number of worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pmct::kExitConfigError;
  }

  const auto run = [](const RunFlags& flags, auto&& command) {
    pmct::RunConfig cfg;
    try {
      cfg = build_config(flags);
    } catch (const pmct::Error& e) {
      std::cerr << "error: " << e.what() << "\n";
      return pmct::kExitConfigError;
    }
    return command(cfg, std::cout, std::cerr);
  };

  if (augment->parsed())
    return run(augment_flags, [](auto&... a) { return pmct::cmd_augment(a...); });
  if (verify->parsed())
    return run(verify_flags, [](auto&... a) { return pmct::cmd_verify(a...); });
  if (features->parsed())
    return run(features_flags, [](auto&... a) { return pmct::cmd_features(a...); });

  pmct::AttnSkewOptions opts;
  for (const auto& d : model_dirs) opts.model_dirs.emplace_back(d);
  if (!json_out.empty()) opts.json_out = json_out;
  opts.estimator = estimator == "G1" ? pmct::SkewnessEstimator::AdjustedG1 : pmct::SkewnessEstimator::MomentG1;
  opts.workers = attn_workers;
  return pmct::cmd_attn_skew(opts, std::cout, std::cerr);
}
