// Copyright 2026 The VOCA-cpp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Drives the command-line tool end to end.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"
#include "voca/audio.h"
#include "voca/binary_io.h"
#include "voca/features.h"

namespace voca {
namespace {

using testing::TempDir;
namespace fs = std::filesystem;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult RunCli(const std::string& args) {
  const std::string cmd = std::string(VOCA_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string Q(const fs::path& p) { return "'" + p.string() + "'"; }

std::string Slurp(const fs::path& p) {
  const std::vector<char> b = ReadFileBytes(p);
  return std::string(b.begin(), b.end());
}

AudioClip Tone(double seconds, int rate, double hz, uint64_t seed) {
  AudioClip c;
  c.sample_rate = rate;
  Rng rng(seed);
  const size_t n = static_cast<size_t>(seconds * rate);
  for (size_t i = 0; i < n; ++i) {
    c.samples.push_back(0.3 * std::sin(2 * std::numbers::pi * hz * i / rate) +
                        0.01 * rng.Normal());
  }
  return c;
}

TEST(Cli, FbankOfThreeSecondsGivesOneEightyFrames) {
  TempDir dir;
  SaveWav(Tone(3.0, 16000, 300, 1), dir / "a.wav");
  const RunResult r = RunCli("features --wav " + Q(dir / "a.wav") + " --out " +
                          Q(dir / "a.vfea"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("rows=180 cols=26 fps=60 kind=fbank"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("windows=180 shape=16x26"), std::string::npos) << r.out;
  const FeatureSequence f = ImportFeatures(dir / "a.vfea");
  EXPECT_EQ(f.n_frames(), 180);
  EXPECT_EQ(f.fps, 60.0);
}

TEST(Cli, MfccKind) {
  TempDir dir;
  SaveWav(Tone(1.0, 22050, 500, 2), dir / "a.wav");
  const RunResult r = RunCli("features --kind mfcc --n-coeffs 13 --wav " +
                          Q(dir / "a.wav") + " --out " + Q(dir / "a.vfea"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("rows=60 cols=13 fps=60 kind=mfcc"), std::string::npos) << r.out;
}

TEST(Cli, ImportedLogitsKeepTheirWidth) {
  TempDir dir;
  FeatureSequence f;
  f.fps = 50;
  f.kind = FeatureKind::kImportedLogits;
  f.frames = FeatureMatrix::Random(150, 29);
  ExportFeatures(f, dir / "in.vfea");
  const RunResult r = RunCli("features --kind import --import " + Q(dir / "in.vfea") +
                          " --out " + Q(dir / "out.vfea"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("rows=180 cols=29 fps=60"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("windows=180 shape=16x29"), std::string::npos) << r.out;
}

TEST(Cli, NoiseMixingReportsTheRequestedGain) {
  TempDir dir;
  SaveWav(Tone(2.0, 16000, 200, 3), dir / "s.wav", WavEncoding::kFloat32);
  AudioClip noise = Tone(0.7, 16000, 1234, 4);
  for (double& x : noise.samples) x *= 0.5;
  SaveWav(noise, dir / "n.wav", WavEncoding::kFloat32);
  for (const char* gain : {"-36", "-24", "-18", "-12"}) {
    const RunResult r = RunCli("features --wav " + Q(dir / "s.wav") + " --noise " +
                            Q(dir / "n.wav") + " --noise-gain-db " + gain +
                            " --out " + Q(dir / "o.vfea"));
    ASSERT_EQ(r.code, 0) << r.out;
    std::smatch m;
    ASSERT_TRUE(std::regex_search(r.out, m, std::regex("measured (-?[0-9.]+) dB")))
        << r.out;
    EXPECT_NEAR(std::stod(m[1]), std::stod(gain), 0.1);
  }
}

TEST(Cli, FeatureArgumentErrorsExitWithTwo) {
  TempDir dir;
  EXPECT_EQ(RunCli("features --kind spectrogram --wav x.wav --out y").code, 2);
  EXPECT_EQ(RunCli("features --kind import --out y").code, 2);
  const RunResult missing = RunCli("features --wav " + Q(dir / "nope.wav") + " --out " +
                                Q(dir / "o.vfea"));
  EXPECT_NE(missing.code, 0);
  EXPECT_NE(missing.out.find("error:"), std::string::npos);
}

TEST(Cli, SynthCountsAndByteIdenticalReruns) {
  TempDir dir;
  const RunResult a = RunCli("--seed 5 synth --out " + Q(dir / "a"));
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_NE(a.out.find("subjects=2 sequences=4 samples=480 window=16x29 "
                       "vertices=100 condition_dim=2"),
            std::string::npos)
      << a.out;
  const RunResult b = RunCli("synth --seed 5 --out " + Q(dir / "b"));
  ASSERT_EQ(b.code, 0) << b.out;
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    EXPECT_EQ(Slurp(e.path()), Slurp(dir / "b" / rel)) << rel;
  }
  EXPECT_GT(files, 10);
}

TEST(Cli, EightSubjectsGiveAnEightWayCondition) {
  TempDir dir;
  const RunResult r = RunCli("synth --subjects 8 --sentences 1 --frames 8 --out " +
                          Q(dir / "d"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("condition_dim=8"), std::string::npos) << r.out;
}

class CliTraining : public ::testing::Test {
 protected:
  void SetUp() override {
    const RunResult s = RunCli("--seed 3 synth --frames 40 --vertices 30 --out " +
                            Q(dir_ / "data"));
    ASSERT_EQ(s.code, 0) << s.out;
  }
  RunResult TrainTo(const std::string& name) {
    return RunCli("--seed 9 train --data " + Q(dir_ / "data") + " --out " +
               Q(dir_ / (name + ".vckp")) + " --epochs 2 --batch-size 32");
  }
  TempDir dir_;
};

TEST_F(CliTraining, LogHeaderAndDeterministicReruns) {
  const RunResult a = TrainTo("a");
  ASSERT_EQ(a.code, 0) << a.out;
  const RunResult b = TrainTo("b");
  ASSERT_EQ(b.code, 0) << b.out;
  const std::string log = Slurp(dir_ / "a.vckp.log");
  EXPECT_EQ(log.rfind("# epochs=2 learning_rate=0.0001 batch_size=32 "
                      "position_weight=1 velocity_weight=10 adam_beta1=0.9 "
                      "adam_beta2=0.999 adam_epsilon=1e-08 seed=9",
                      0),
            0u)
      << log;
  EXPECT_NE(log.find("conv_channels=32,32,64,64 fc1_units=128 latent=50"),
            std::string::npos);
  EXPECT_NE(log.find("\nepoch,step,train_loss,val_loss\n0,0,"), std::string::npos);
  EXPECT_EQ(log, Slurp(dir_ / "b.vckp.log"));
  EXPECT_EQ(Slurp(dir_ / "a.vckp"), Slurp(dir_ / "b.vckp"));
}

TEST_F(CliTraining, AnimateStylesAndLipMetric) {
  ASSERT_EQ(TrainTo("m").code, 0);
  const fs::path feats = dir_ / "data/sequences/subject_00/sentence_01/features.vfea";
  const std::string common = "animate --checkpoint " + Q(dir_ / "m.vckp") +
                             " --template " + Q(dir_ / "data/templates/subject_00.ply") +
                             " --features " + Q(feats) + " --lip 3,20";
  const RunResult a = RunCli(common + " --subject subject_01 --out " + Q(dir_ / "a"));
  ASSERT_EQ(a.code, 0) << a.out;
  EXPECT_NE(a.out.find("frames=40 fps=60"), std::string::npos) << a.out;
  const RunResult b = RunCli(common + " --style 0,1 --out " + Q(dir_ / "b"));
  ASSERT_EQ(b.code, 0) << b.out;
  int n = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    ++n;
    EXPECT_EQ(Slurp(e.path()), Slurp(dir_ / "b" / e.path().filename()));
  }
  EXPECT_EQ(n, 41);  // 40 frames plus lip_distance.csv
  EXPECT_TRUE(fs::exists(dir_ / "a/frame_000039.obj"));
  const RunResult mix = RunCli(common + " --style 0.3,0.7 --format ply --out " + Q(dir_ / "c"));
  ASSERT_EQ(mix.code, 0) << mix.out;
  EXPECT_NE(mix.out.find("chord_bound=ok"), std::string::npos) << mix.out;
  EXPECT_TRUE(fs::exists(dir_ / "c/frame_000000.ply"));

  const RunResult m = RunCli("metrics --meshes " + Q(dir_ / "c") + " --lip 3,20 --out " +
                          Q(dir_ / "lip.csv"));
  ASSERT_EQ(m.code, 0) << m.out;
  EXPECT_EQ(Slurp(dir_ / "lip.csv"), Slurp(dir_ / "c/lip_distance.csv"));

  EXPECT_EQ(RunCli(common + " --subject nobody --out " + Q(dir_ / "d")).code, 2);
  EXPECT_EQ(RunCli(common + " --style 0.5,0.6 --out " + Q(dir_ / "d")).code, 2);
}

TEST_F(CliTraining, AnimateWithIdentityAndPoseEdits) {
  ASSERT_EQ(TrainTo("m").code, 0);
  const fs::path feats = dir_ / "data/sequences/subject_01/sentence_00/features.vfea";
  const RunResult r = RunCli(
      "animate --checkpoint " + Q(dir_ / "m.vckp") + " --template " +
      Q(dir_ / "data/templates/subject_01.ply") + " --features " + Q(feats) +
      " --head-model " + Q(dir_ / "data/head_model.vhed") +
      " --beta 1,0,-1,0.5 --pose 'neck:0,20,0 jaw:8,0,0' --global-translation 0,0,0.1"
      " --out " + Q(dir_ / "e"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_TRUE(fs::exists(dir_ / "e/frame_000039.obj"));
  const RunResult bad = RunCli("animate --checkpoint " + Q(dir_ / "m.vckp") + " --template " +
                            Q(dir_ / "data/templates/subject_01.ply") + " --features " +
                            Q(feats) + " --beta 1 --out " + Q(dir_ / "f"));
  EXPECT_EQ(bad.code, 2);
}

TEST(Cli, EmptyDatasetIsRejected) {
  TempDir dir;
  ASSERT_EQ(RunCli("synth --frames 4 --out " + Q(dir / "d")).code, 0);
  fs::remove_all(dir / "d/sequences");
  const RunResult r = RunCli("train --data " + Q(dir / "d") + " --out " + Q(dir / "x.vckp"));
  EXPECT_EQ(r.code, 2) << r.out;
  EXPECT_NE(r.out.find("error:"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "x.vckp"));
}

TEST(Cli, ConfigFileAndOverrides) {
  TempDir dir;
  std::ofstream(dir / "run.cfg") << "seed = 4\n[synth]\nsubjects = 3\nframes = 6\n";
  const RunResult r = RunCli("--config " + Q(dir / "run.cfg") +
                          " --set synth.subjects=5 synth --out " + Q(dir / "d"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("subjects=5 sequences=10 samples=60"), std::string::npos) << r.out;
}

}  // namespace
}  // namespace voca
