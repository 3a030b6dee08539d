// tests/test_cli.cpp

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

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "corpus_fixture.hpp"
#include "pmct/commands.hpp"
#include "pmct/feature_io.hpp"

using namespace pmct;
using pmct::testing::snapshot;
using pmct::testing::softmax_attention;
using pmct::testing::SyntheticCorpus;
using pmct::testing::TempDir;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Runs the pmct binary through the shell and captures both streams.
CliRun run_cli(const std::string& args, const std::string& env = "") {
  TempDir tmp("pmct-cli");
  const std::string cmd = env + " " + PMCT_CLI + " " + args + " >" + (tmp / "out").string() + " 2>" +
                          (tmp / "err").string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(tmp / "out");
  r.err = slurp(tmp / "err");
  return r;
}

std::string flags(const RunConfig& cfg) {
  return "--manifest " + cfg.manifest.string() + " --rir-list " + cfg.rir_list.string() + " --noise-list " +
         cfg.noise_list.string() + " --root " + cfg.root.string() + " --out " + cfg.out.string();
}

int augment(const RunConfig& cfg, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cmd_augment(cfg, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

void write_attention_dir(const std::filesystem::path& dir, double sharpness, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 gen(seed);
  for (int i = 0; i < 8; ++i) {
    const std::string id = "utt" + std::to_string(i);
    write_attention(softmax_attention(id, 2, 2, 24, sharpness, gen), dir / id);
  }
}

}  // namespace

TEST(Augment, CleanModeCopiesInput) {
  SyntheticCorpus corpus;
  TempDir out;
  RunConfig cfg = corpus.config(out.path());
  cfg.mode = Mode::Clean;
  std::string summary;
  ASSERT_EQ(augment(cfg, &summary), kExitOk);
  EXPECT_NE(summary.find("ok=3 failed=0"), std::string::npos) << summary;
  for (const std::string& id : corpus.ids()) {
    const AudioBuffer in = load_wav(corpus.path() / "wav" / (id + ".wav"));
    const AudioBuffer got = load_wav(out / (id + ".wav"));
    EXPECT_EQ(got.samples, in.samples) << id;
  }
}

TEST(Augment, AllCleanPatchesReproduceInputBitExactly) {
  SyntheticCorpus corpus;
  TempDir out;
  RunConfig cfg = corpus.config(out.path());
  cfg.mamp.pi_clean = 1.0;
  ASSERT_EQ(augment(cfg), kExitOk);
  for (const std::string& id : corpus.ids())
    EXPECT_EQ(read_file(out / (id + ".wav")), read_file(corpus.path() / "wav" / (id + ".wav"))) << id;
}

TEST(Augment, ProvenanceRecords) {
  SyntheticCorpus corpus;
  TempDir out;
  RunConfig cfg = corpus.config(out.path());
  cfg.seed = 9;
  ASSERT_EQ(augment(cfg), kExitOk);
  std::ifstream in(out / kProvenanceFile);
  std::string line;
  std::size_t i = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ASSERT_LT(i, corpus.ids().size());
    EXPECT_EQ(j.at("id"), corpus.ids()[i]);
    EXPECT_EQ(j.at("mode"), "pmct");
    EXPECT_TRUE(j.at("rir_id").get<std::string>().starts_with("rir"));
    EXPECT_TRUE(j.at("noise_id").get<std::string>().starts_with("noise"));
    const double snr = j.at("snr_db");
    EXPECT_GE(snr, 0.0);
    EXPECT_LT(snr, 30.0);
    EXPECT_EQ(j.at("patch_len"), 16000);
    ASSERT_TRUE(j.at("sources").is_array());
    for (const auto& src : j.at("sources")) EXPECT_TRUE(src == "C" || src == "D");
    EXPECT_FALSE(j.at("sources").empty());
    ++i;
  }
  EXPECT_EQ(i, corpus.ids().size());
}

TEST(Augment, DeterministicAcrossRunsAndWorkerCounts) {
  SyntheticCorpus corpus({.utterances = 12});
  std::optional<std::map<std::string, Bytes>> reference;
  for (unsigned workers : {1u, 1u, 4u, 16u}) {
    TempDir out;
    RunConfig cfg = corpus.config(out.path());
    cfg.seed = 1234;
    cfg.workers = workers;
    cfg.output_kind = OutputKind::Both;
    cfg.specaugment = PolicyLevel::High;
    ASSERT_EQ(augment(cfg), kExitOk);
    const auto tree = snapshot(out.path());
    EXPECT_EQ(tree.size(), 12u * 2 + 1);
    if (!reference) reference = tree;
    else EXPECT_TRUE(tree == *reference) << "workers=" << workers;
  }
}

TEST(Augment, SeedAndEpochChangeOutput) {
  SyntheticCorpus corpus;
  TempDir a, b, c;
  RunConfig cfg = corpus.config(a.path());
  ASSERT_EQ(augment(cfg), kExitOk);
  cfg.out = b.path();
  cfg.seed = 1;
  ASSERT_EQ(augment(cfg), kExitOk);
  cfg.out = c.path();
  cfg.seed = 0;
  cfg.epoch = 1;
  ASSERT_EQ(augment(cfg), kExitOk);
  EXPECT_NE(snapshot(a.path()), snapshot(b.path()));
  EXPECT_NE(snapshot(a.path()), snapshot(c.path()));
}

TEST(Augment, FeaturesHaveExpectedShape) {
  SyntheticCorpus corpus;
  TempDir out;
  RunConfig cfg = corpus.config(out.path());
  cfg.output_kind = OutputKind::Features;
  ASSERT_EQ(augment(cfg), kExitOk);
  for (const std::string& id : corpus.ids()) {
    EXPECT_FALSE(std::filesystem::exists(out / (id + ".wav")));
    const FeatureMatrix m = read_features(out / (id + ".feat"));
    const std::size_t n = load_wav(corpus.path() / "wav" / (id + ".wav")).samples.size();
    EXPECT_EQ(m.num_frames, 1 + (n - 400) / 160) << id;
    EXPECT_EQ(m.num_bins, 80u);
  }
}

TEST(Features, MatchesCleanAugmentFeatures) {
  SyntheticCorpus corpus;
  TempDir a, b;
  RunConfig cfg = corpus.config(a.path());
  cfg.output_kind = OutputKind::Features;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_features(cfg, out, err), kExitOk) << err.str();
  cfg.out = b.path();
  cfg.mode = Mode::Clean;
  ASSERT_EQ(augment(cfg), kExitOk);
  for (const std::string& id : corpus.ids())
    EXPECT_EQ(read_file(a / (id + ".feat")), read_file(b / (id + ".feat")));
}

TEST(Augment, UtteranceFailuresAreReported) {
  SyntheticCorpus corpus;
  std::ofstream(corpus.path() / "manifest.jsonl", std::ios::app)
      << R"({"id": "ghost", "audio_path": "wav/ghost.wav"})" << "\n";
  TempDir out;
  RunConfig cfg = corpus.config(out.path());
  std::string summary, errors;
  EXPECT_EQ(augment(cfg, &summary, &errors), kExitOk);
  EXPECT_NE(summary.find("ok=3 failed=1"), std::string::npos) << summary;
  EXPECT_NE(errors.find("ghost"), std::string::npos);
  cfg.fail_fast = true;
  EXPECT_EQ(augment(cfg), kExitDataError);
}

TEST(Verify, PassesOnUntouchedOutput) {
  for (Mode mode : {Mode::Pmct, Mode::Mct}) {
    SyntheticCorpus corpus({.utterances = 6});
    TempDir out;
    RunConfig cfg = corpus.config(out.path());
    cfg.mode = mode;
    cfg.seed = 77;
    cfg.output_kind = OutputKind::Both;
    ASSERT_EQ(augment(cfg), kExitOk);
    std::ostringstream text, err;
    VerifyResult vr;
    EXPECT_EQ(cmd_verify(cfg, text, err, &vr), kExitOk) << text.str() << err.str();
    EXPECT_EQ(vr.checked, 6u);
    EXPECT_TRUE(vr.mismatched.empty());
    EXPECT_NE(text.str().find("verify: PASS, 6 utterances, 0 mismatches"), std::string::npos);

    const std::regex snr_line(R"(snr_recorded=(\S+) snr_measured=(\S+))");
    const std::string s = text.str();
    for (auto it = std::sregex_iterator(s.begin(), s.end(), snr_line); it != std::sregex_iterator(); ++it)
      EXPECT_LE(std::abs(std::stod((*it)[1]) - std::stod((*it)[2])), 1e-6);
  }
}

TEST(Verify, DetectsCorruptedOutput) {
  SyntheticCorpus corpus;
  TempDir out;
  RunConfig cfg = corpus.config(out.path());
  ASSERT_EQ(augment(cfg), kExitOk);
  const std::string victim = corpus.ids()[1];
  Bytes bytes = read_file(out / (victim + ".wav"));
  bytes[bytes.size() - 2] ^= 0x01;
  write_file_atomic(out / (victim + ".wav"), bytes);
  std::ostringstream text, err;
  VerifyResult vr;
  EXPECT_EQ(cmd_verify(cfg, text, err, &vr), kExitDataError);
  EXPECT_EQ(vr.mismatched, std::vector<std::string>{victim});
  EXPECT_NE(err.str().find("MismatchFound: " + victim), std::string::npos) << err.str();
}

TEST(Verify, DetectsWrongSeed) {
  SyntheticCorpus corpus;
  TempDir out;
  RunConfig cfg = corpus.config(out.path());
  ASSERT_EQ(augment(cfg), kExitOk);
  cfg.seed = 5;
  std::ostringstream text, err;
  VerifyResult vr;
  EXPECT_EQ(cmd_verify(cfg, text, err, &vr), kExitDataError);
  EXPECT_EQ(vr.mismatched.size(), 3u);
}

TEST(AttnSkew, IdenticalDirectoriesGiveZeroDrop) {
  TempDir dir;
  write_attention_dir(dir / "m", 1.0, 1);
  AttnSkewOptions opts{{dir / "m", dir / "m"}, SkewnessEstimator::MomentG1, dir / "r.json", 2};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_attn_skew(opts, out, err), kExitOk) << err.str();
  const auto j = nlohmann::json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(j.at("relative_drop").get<double>(), 0.0);
  EXPECT_EQ(j.at("models")[0].at("S"), j.at("models")[1].at("S"));
}

TEST(AttnSkew, FlatterCandidateGivesPositiveDrop) {
  TempDir dir;
  write_attention_dir(dir / "ref", 1.0, 2);
  write_attention_dir(dir / "cand", 2.0, 3);
  AttnSkewOptions opts{{dir / "ref", dir / "cand"}, SkewnessEstimator::MomentG1, std::filesystem::path("-"), 1};
  std::ostringstream out, err;
  ASSERT_EQ(cmd_attn_skew(opts, out, err), kExitOk) << err.str();
  const auto j = nlohmann::json::parse(out.str());
  EXPECT_GT(j.at("relative_drop").get<double>(), 0.0);
  EXPECT_EQ(j.at("models")[0].at("per_utterance").size(), 8u);
}

TEST(AttnSkew, IdentityMapsWarnAndExclude) {
  TempDir dir;
  write_attention_dir(dir / "m", 1.0, 4);
  AttentionTensorSet eye("eye", 2, 2, 24);
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t h = 0; h < 2; ++h)
      for (std::size_t i = 0; i < 24; ++i) eye.map(l, h)[i * 24 + i] = 1.0f;
  write_attention(eye, dir / "m" / "eye");
  AttnSkewOptions opts{{dir / "m"}, SkewnessEstimator::MomentG1, {}, 1};
  std::ostringstream out, err;
  EXPECT_EQ(cmd_attn_skew(opts, out, err), kExitOk);
  EXPECT_NE(err.str().find("DegenerateVector"), std::string::npos);
  EXPECT_NE(out.str().find("utterances=8 excluded=1"), std::string::npos) << out.str();

  TempDir only;
  std::filesystem::create_directories(only / "m");
  write_attention(eye, only / "m" / "eye");
  opts.model_dirs = {only / "m"};
  EXPECT_EQ(cmd_attn_skew(opts, out, err), kExitDataError);
}

TEST(Binary, ExitCodes) {
  SyntheticCorpus corpus;
  TempDir out;
  const RunConfig cfg = corpus.config(out / "o");
  CliRun r = run_cli("augment " + flags(cfg) + " --seed 3");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("augment: mode=pmct utterances=3 ok=3"), std::string::npos) << r.out;
  r = run_cli("verify " + flags(cfg) + " --seed 3");
  EXPECT_EQ(r.code, 0) << r.out << r.err;
  EXPECT_NE(r.out.find("verify: PASS"), std::string::npos);
  r = run_cli("verify " + flags(cfg) + " --seed 4");
  EXPECT_EQ(r.code, 1);

  EXPECT_EQ(run_cli("augment " + flags(cfg) + " --mode loud").code, 2);
  EXPECT_EQ(run_cli("augment " + flags(cfg) + " --snr-lo 40").code, 2);
  EXPECT_EQ(run_cli("augment --manifest /nonexistent/m.jsonl --out " + (out / "x").string()).code, 2);
  EXPECT_EQ(run_cli("augment " + flags(cfg) + " --no-such-flag").code, 2);
  EXPECT_EQ(run_cli("").code, 2);
  EXPECT_EQ(run_cli("--help").code, 0);

  std::ofstream(corpus.path() / "empty.jsonl").close();
  RunConfig empty = cfg;
  empty.manifest = corpus.path() / "empty.jsonl";
  empty.out = out / "e";
  r = run_cli("augment " + flags(empty));
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning"), std::string::npos);

  std::ofstream(corpus.path() / "broken.jsonl") << "{\"id\": \"a\"\n";
  empty.manifest = corpus.path() / "broken.jsonl";
  r = run_cli("augment " + flags(empty));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST(Binary, SeedPrecedence) {
  SyntheticCorpus corpus;
  TempDir out;
  RunConfig cfg = corpus.config(out / "flag");
  ASSERT_EQ(run_cli("augment " + flags(cfg) + " --seed 21").code, 0);
  cfg.out = out / "env";
  ASSERT_EQ(run_cli("augment " + flags(cfg), "PMCT_SEED=21").code, 0);
  cfg.out = out / "both";
  ASSERT_EQ(run_cli("augment " + flags(cfg) + " --seed 21", "PMCT_SEED=99").code, 0);
  std::ofstream(out / "run.conf") << "seed = 99\nsnr_lo = 5\n";
  cfg.out = out / "file";
  ASSERT_EQ(run_cli("augment " + flags(cfg) + " --config " + (out / "run.conf").string() + " --snr-lo 0",
                    "PMCT_SEED=21")
                .code,
            0);
  const auto ref = snapshot(out / "flag");
  EXPECT_EQ(snapshot(out / "env"), ref);
  EXPECT_EQ(snapshot(out / "both"), ref);
  EXPECT_EQ(snapshot(out / "file"), ref);
}

TEST(Binary, AttnSkew) {
  TempDir dir;
  write_attention_dir(dir / "ref", 1.0, 5);
  write_attention_dir(dir / "cand", 2.0, 6);
  CliRun r = run_cli("attn-skew " + (dir / "ref").string() + " " + (dir / "cand").string() + " --workers 4");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("relative_drop"), std::string::npos) << r.out;
  r = run_cli("attn-skew " + (dir / "ref").string() + " --estimator G1 --json -");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.out).at("estimator"), "G1");
  EXPECT_EQ(run_cli("attn-skew " + (dir / "missing").string()).code, 1);
  EXPECT_EQ(run_cli("attn-skew " + (dir / "ref").string() + " --estimator g2").code, 2);
}
