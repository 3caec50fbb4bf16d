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

// voca: command-line front end.
//
//   voca features --wav speech.wav --kind fbank --out speech.vfea
//   voca synth --out data/ --seed 7
//   voca train --data data/ --out model.vckp
//   voca animate --checkpoint model.vckp --template t.ply \
//       --features speech.vfea --style 0.5,0.5 --out frames/
//   voca metrics --meshes frames/ --lip 12,40 --out lips.csv
//
// Every option can also come from a config file (--config) with sections
// [features], [synth], [net], [train], [animate], [metrics]; flags and
// --set section.key=value win over the file.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "voca/animation.h"
#include "voca/audio.h"
#include "voca/binary_io.h"
#include "voca/checkpoint.h"
#include "voca/config.h"
#include "voca/dataset.h"
#include "voca/error.h"
#include "voca/features.h"
#include "voca/head_model.h"
#include "voca/mesh_io.h"
#include "voca/net.h"
#include "voca/parallel.h"
#include "voca/trainer.h"

namespace fs = std::filesystem;

namespace voca {
namespace {

// Flag values land in the config under section.key once parsing is done.
struct FlagBinding {
  std::string section;
  std::string key;
  std::string value;
  CLI::Option* option = nullptr;
};

class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  void Add(const std::string& name, const std::string& section,
           const std::string& key, const std::string& help) {
    bindings_.push_back(std::make_unique<FlagBinding>());
    FlagBinding& b = *bindings_.back();
    b.section = section;
    b.key = key;
    b.option = app_->add_option(name, b.value, help);
  }

  void ApplyTo(KeyValueFile& kv) const {
    for (const auto& b : bindings_) {
      if (b->option->count() > 0) kv.Set(b->section, b->key, b->value);
    }
  }

 private:
  CLI::App* app_;
  std::vector<std::unique_ptr<FlagBinding>> bindings_;
};

struct Global {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<uint64_t> seed;
};

KeyValueFile LoadRunConfig(const Global& g, const Flags& flags) {
  KeyValueFile kv;
  if (!g.config_path.empty()) kv = ReadKeyValueFile(g.config_path);
  flags.ApplyTo(kv);
  for (const auto& o : g.overrides) kv.ApplyOverride(o);
  if (g.seed) kv.Set("", "seed", std::to_string(*g.seed));
  return kv;
}

uint64_t SeedOf(const KeyValueFile& kv) {
  const std::string s = kv.GetOr("", "seed", "0");
  try {
    size_t used = 0;
    const unsigned long long v = std::stoull(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  Fail(ErrorCode::kConfiguration, "seed: expected an unsigned integer");
}

std::string Str(const KeyValueFile& kv, const std::string& section,
                const std::string& key, const std::string& fallback = "") {
  return kv.GetOr(section, key, fallback);
}

int Int(const KeyValueFile& kv, const std::string& section,
        const std::string& key, int fallback) {
  return kv.Has(section, key) ? kv.GetInt(section, key) : fallback;
}

double Real(const KeyValueFile& kv, const std::string& section,
            const std::string& key, double fallback) {
  return kv.Has(section, key) ? kv.GetDouble(section, key) : fallback;
}

fs::path Resolve(const std::string& p) {
  return p.empty() ? fs::path() : fs::absolute(fs::path(p));
}

fs::path RequirePath(const KeyValueFile& kv, const std::string& section,
                     const std::string& key, const std::string& flag) {
  const std::string v = Str(kv, section, key);
  Require(!v.empty(), ErrorCode::kConfiguration, flag + " is required");
  return Resolve(v);
}

fs::path RequireExisting(const KeyValueFile& kv, const std::string& section,
                         const std::string& key, const std::string& flag) {
  fs::path p = RequirePath(kv, section, key, flag);
  Require(fs::exists(p), ErrorCode::kIo, flag + ": " + p.string() +
                                             " does not exist");
  return p;
}

std::pair<int, int> ParseLipPair(const std::string& text) {
  const std::vector<double> v = ParseDoubleList(text, "lip indices");
  Require(v.size() == 2 && v[0] >= 0 && v[1] >= 0 && v[0] == std::floor(v[0]) &&
              v[1] == std::floor(v[1]),
          ErrorCode::kConfiguration,
          "lip indices must be two vertex indices 'upper,lower'");
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

// ---------------------------------------------------------------- features

int RunFeatures(const KeyValueFile& kv) {
  const std::string kind = Str(kv, "features", "kind", "fbank");
  const std::string wav = Str(kv, "features", "wav");
  const std::string imported = Str(kv, "features", "import");
  const std::string noise = Str(kv, "features", "noise_wav");
  const bool has_gain = kv.Has("features", "noise_gain_db");
  Require(kind == "fbank" || kind == "mfcc" || kind == "import",
          ErrorCode::kConfiguration, "--kind must be fbank, mfcc or import");
  if (kind == "import") {
    Require(!imported.empty() && wav.empty(), ErrorCode::kConfiguration,
            "--kind import takes --import and no --wav");
    Require(noise.empty() && !has_gain, ErrorCode::kConfiguration,
            "noise mixing needs raw audio (--wav)");
  } else {
    Require(!wav.empty() && imported.empty(), ErrorCode::kConfiguration,
            "--kind " + kind + " takes --wav and no --import");
  }
  Require(noise.empty() == !has_gain, ErrorCode::kConfiguration,
          "--noise and --noise-gain-db go together");
  const fs::path out = RequirePath(kv, "features", "out", "--out");
  const double resample_to = Real(kv, "features", "resample_to", kNetworkFps);
  const int window = Int(kv, "features", "window", 16);
  Require(resample_to >= 0, ErrorCode::kConfiguration,
          "--resample must be >= 0 (0 keeps the native rate)");
  Require(window >= 1, ErrorCode::kConfiguration, "--window must be >= 1");
  FbankOptions fb;
  fb.n_filters = Int(kv, "features", "n_filters", fb.n_filters);
  fb.frame_length = Real(kv, "features", "frame_length", fb.frame_length);
  fb.frame_step = Real(kv, "features", "frame_step", fb.frame_step);
  const int n_coeffs = Int(kv, "features", "n_coeffs", 26);
  const double gain = Real(kv, "features", "noise_gain_db", 0.0);

  FeatureSequence seq;
  if (kind == "import") {
    seq = ImportFeatures(Resolve(imported));
  } else {
    AudioClip clip = LoadWav(Resolve(wav));
    if (!noise.empty()) {
      const AudioClip mixed = MixNoise(clip, LoadWav(Resolve(noise)), gain);
      std::vector<double> residual(clip.samples.size());
      for (size_t i = 0; i < residual.size(); ++i) {
        residual[i] = mixed.samples[i] - clip.samples[i];
      }
      std::printf("noise: requested %.2f dB, measured %.2f dB\n", gain,
                  20.0 * std::log10(Rms(residual) / Rms(clip.samples)));
      clip = mixed;
    }
    seq = kind == "fbank" ? ComputeFbank(clip, fb)
                          : ComputeMfcc(clip, n_coeffs, fb);
  }
  if (resample_to > 0 && seq.fps != resample_to) {
    seq = ResampleFeatures(seq, resample_to);
  }
  ExportFeatures(seq, out);
  std::printf("rows=%d cols=%d fps=%g kind=%s\n", seq.n_frames(), seq.dim(),
              seq.fps, std::string(FeatureKindName(seq.kind)).c_str());
  if (std::abs(seq.fps - kNetworkFps) < 1e-9) {
    std::printf("windows=%d shape=%dx%d\n", seq.n_frames(), window, seq.dim());
  }
  return 0;
}

// ------------------------------------------------------------------- synth

int RunSynth(const KeyValueFile& kv) {
  SyntheticSpec spec;
  spec.n_subjects = Int(kv, "synth", "subjects", spec.n_subjects);
  spec.n_sentences = Int(kv, "synth", "sentences", spec.n_sentences);
  spec.frames_per_sequence = Int(kv, "synth", "frames", spec.frames_per_sequence);
  spec.n_vertices = Int(kv, "synth", "vertices", spec.n_vertices);
  spec.feature_dim = Int(kv, "synth", "feature_dim", spec.feature_dim);
  spec.window = Int(kv, "synth", "window", spec.window);
  spec.rank = Int(kv, "synth", "rank", spec.rank);
  spec.map_norm = Real(kv, "synth", "map_norm", spec.map_norm);
  spec.smoothing = Int(kv, "synth", "smoothing", spec.smoothing);
  const fs::path out = RequirePath(kv, "synth", "out", "--out");
  const SyntheticData data = GenerateSynthetic(spec, SeedOf(kv));
  SaveDataset(out, data.dataset, data.split, &data.model);
  int samples = 0;
  for (const auto& seq : data.dataset.sequences()) samples += seq.meshes.size();
  std::printf(
      "subjects=%d sequences=%zu samples=%d window=%dx%d vertices=%d "
      "condition_dim=%zu displacement_rms=%.6g\n",
      spec.n_subjects, data.dataset.sequences().size(), samples, spec.window,
      spec.feature_dim, spec.n_vertices, data.split.train.size(),
      data.displacement_scale);
  return 0;
}

// ------------------------------------------------------------------- train

NetConfig NetConfigFrom(const KeyValueFile& kv, const Dataset& dataset,
                        int n_subjects) {
  NetConfig c;
  c.window = dataset.window();
  c.feature_dim = dataset.feature_dim();
  c.n_vertices = dataset.n_vertices();
  c.n_subjects = n_subjects;
  if (kv.Has("net", "conv_channels")) {
    c.conv_channels.clear();
    for (double v : kv.GetDoubles("net", "conv_channels")) {
      c.conv_channels.push_back(static_cast<int>(v));
    }
  }
  c.fc1_units = Int(kv, "net", "fc1_units", c.fc1_units);
  c.latent = Int(kv, "net", "latent", c.latent);
  c.bn_epsilon = Real(kv, "net", "bn_epsilon", c.bn_epsilon);
  return c;
}

TrainConfig TrainConfigFrom(const KeyValueFile& kv) {
  TrainConfig t;
  t.epochs = Int(kv, "train", "epochs", t.epochs);
  t.learning_rate = Real(kv, "train", "learning_rate", t.learning_rate);
  t.batch_size = Int(kv, "train", "batch_size", t.batch_size);
  t.loss_weights.position =
      Real(kv, "train", "position_weight", t.loss_weights.position);
  t.loss_weights.velocity =
      Real(kv, "train", "velocity_weight", t.loss_weights.velocity);
  t.adam.beta1 = Real(kv, "train", "adam_beta1", t.adam.beta1);
  t.adam.beta2 = Real(kv, "train", "adam_beta2", t.adam.beta2);
  t.adam.epsilon = Real(kv, "train", "adam_epsilon", t.adam.epsilon);
  t.bn_momentum = Real(kv, "train", "bn_momentum", t.bn_momentum);
  t.bn_population_stats =
      Int(kv, "train", "bn_population_stats", t.bn_population_stats) != 0;
  t.max_steps = Int(kv, "train", "max_steps", 0);
  t.seed = SeedOf(kv);
  t.Validate();
  return t;
}

int RunTrain(const KeyValueFile& kv) {
  const fs::path data_dir = RequireExisting(kv, "train", "data", "--data");
  const fs::path out = RequirePath(kv, "train", "out", "--out");
  const fs::path log_path = Resolve(Str(kv, "train", "log", out.string() + ".log"));
  const TrainConfig tc = TrainConfigFrom(kv);

  const LoadedDataset loaded = LoadDataset(data_dir);
  Require(!loaded.dataset.sequences().empty(), ErrorCode::kConfiguration,
          "dataset " + data_dir.string() + " has no sequences");
  const DatasetSplit split = SplitDataset(loaded.dataset, loaded.split);
  for (const auto& w : split.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  Require(!split.train.empty(), ErrorCode::kConfiguration,
          "training split is empty");
  const NetConfig nc = NetConfigFrom(
      kv, loaded.dataset, static_cast<int>(split.training_subjects.size()));
  nc.Validate();

  {
    std::ofstream log(log_path, std::ios::trunc);
    Require(static_cast<bool>(log), ErrorCode::kIo,
            "cannot write " + log_path.string());
    log << FormatLogHeader(nc, tc);
  }
  const TrainResult r = Train(
      loaded.dataset, split, nc, tc, [&](const EpochRecord& rec) {
        std::ofstream log(log_path, std::ios::app);
        log << FormatLogLine(rec);
        Require(static_cast<bool>(log), ErrorCode::kIo,
                "cannot append to " + log_path.string());
      });
  SaveCheckpoint(r.best, out);
  const EpochRecord& first = r.history.front();
  const EpochRecord& last = r.history.back();
  std::printf(
      "steps=%lld epochs=%zu best_epoch=%d initial_loss=%.6g "
      "final_train_loss=%.6g final_val_loss=%.6g\n",
      static_cast<long long>(r.steps), r.history.size() - 1, r.best_epoch,
      first.train_loss, last.train_loss, last.val_loss);
  std::printf("checkpoint=%s log=%s\n", out.string().c_str(),
              log_path.string().c_str());
  return 0;
}

// ----------------------------------------------------------------- animate

Condition StyleFrom(const KeyValueFile& kv, const NetworkParams& params) {
  const int s = params.config.n_subjects;
  const std::string subject = Str(kv, "animate", "subject");
  const std::string style = Str(kv, "animate", "style");
  Require(subject.empty() || style.empty(), ErrorCode::kConfiguration,
          "--subject and --style are exclusive");
  if (!subject.empty()) {
    for (int j = 0; j < s; ++j) {
      if (j < static_cast<int>(params.subjects.size()) &&
          params.subjects[j] == subject) {
        return Condition::OneHot(s, j);
      }
    }
    Fail(ErrorCode::kConfiguration,
         "subject " + subject + " is not a training subject of the checkpoint");
  }
  if (style.empty()) return Condition::OneHot(s, 0);
  Condition c{ParseDoubleList(style, "--style")};
  c.Validate(s);
  return c;
}

std::vector<Pose> PoseFrom(const KeyValueFile& kv, const HeadModel& model) {
  Pose p = Pose::Identity(model.n_joints());
  constexpr double kDeg = std::numbers::pi / 180.0;
  auto vec3 = [](const std::string& text, const std::string& what) {
    const std::vector<double> v = ParseDoubleList(text, what);
    Require(v.size() == 3, ErrorCode::kConfiguration,
            what + " needs three components");
    return Eigen::Vector3d(v[0], v[1], v[2]);
  };
  // pose = "neck:0,30,0 jaw:10,0,0" with axis-angle vectors in degrees.
  std::istringstream in(Str(kv, "animate", "pose"));
  for (std::string item; in >> item;) {
    const auto colon = item.find(':');
    Require(colon != std::string::npos, ErrorCode::kConfiguration,
            "--pose entries look like joint:x,y,z (degrees)");
    const int j = model.JointIndex(item.substr(0, colon));
    p.joint_rotations[j] = kDeg * vec3(item.substr(colon + 1), "--pose");
  }
  if (kv.Has("animate", "global_rotation")) {
    p.global_rotation =
        kDeg * vec3(Str(kv, "animate", "global_rotation"), "--global-rotation");
  }
  if (kv.Has("animate", "global_translation")) {
    p.global_translation =
        vec3(Str(kv, "animate", "global_translation"), "--global-translation");
  }
  Require(p.IsFinite(), ErrorCode::kConfiguration, "pose is not finite");
  return {p};
}

int RunAnimate(const KeyValueFile& kv) {
  const fs::path ckpt = RequireExisting(kv, "animate", "checkpoint", "--checkpoint");
  const fs::path templ_path = RequireExisting(kv, "animate", "template", "--template");
  const fs::path feat_path = RequireExisting(kv, "animate", "features", "--features");
  const fs::path out = RequirePath(kv, "animate", "out", "--out");
  const std::string head = Str(kv, "animate", "head_model");
  const std::string beta_text = Str(kv, "animate", "beta");
  const bool wants_pose = kv.Has("animate", "pose") ||
                          kv.Has("animate", "global_rotation") ||
                          kv.Has("animate", "global_translation");
  Require(head.empty() ? beta_text.empty() && !wants_pose : true,
          ErrorCode::kConfiguration,
          "--beta and --pose need --head-model");
  const MeshFormat format = ParseMeshFormat(Str(kv, "animate", "format", "obj"));
  std::optional<std::pair<int, int>> lips;
  if (kv.Has("animate", "lip")) lips = ParseLipPair(Str(kv, "animate", "lip"));
  const double plot_fps = Real(kv, "animate", "plot_fps", 0.0);
  Require(plot_fps >= 0, ErrorCode::kConfiguration, "--plot-fps must be >= 0");

  const NetworkParams params = LoadCheckpoint(ckpt);
  const Condition style = StyleFrom(kv, params);
  const Mesh templ = ReadMesh(templ_path);
  FeatureSequence features = ImportFeatures(feat_path);
  if (features.fps != kNetworkFps) {
    features = ResampleFeatures(features, kNetworkFps);
  }
  const WindowSequence windows =
      WindowFeatures(features, params.config.window);

  std::optional<HeadModel> model;
  if (!head.empty()) {
    model = LoadHeadModel(Resolve(head));
    Require(model->n_vertices() == templ.vertices.rows(),
            ErrorCode::kConfiguration,
            "head model and template vertex counts differ");
  }
  MeshSequence seq =
      InterpolateStyles(params, windows, templ.vertices, style);
  const MeshSequence zero_pose_mix = seq;
  if (!beta_text.empty()) {
    seq = EditIdentity(seq, *model, ParseDoubleList(beta_text, "--beta"));
  }
  if (wants_pose) seq = EditPose(seq, *model, PoseFrom(kv, *model));

  const auto paths = ExportSequence(seq, templ.faces, out, format);
  std::printf("frames=%zu fps=60 out=%s\n", paths.size(), out.string().c_str());

  if (lips) {
    // Measured on the stored float frames so it agrees with `metrics`.
    MeshSequence stored = seq;
    for (Vertices& f : stored.frames) f = RoundToFloat(f);
    const std::vector<double> d = LipDistance(stored, lips->first, lips->second);
    WriteLipMetric(out / "lip_distance.csv", d);
    if (plot_fps > 0 && d.size() >= 2) {
      WritePlotData(out / "lip_distance_plot.csv", d, kNetworkFps, plot_fps);
    }
    if (style.HotIndex() < 0) {
      // Mixed style: the zero-pose lip gap must lie under the chord of the
      // pure-style gaps.
      const std::vector<double> mixed =
          LipDistance(zero_pose_mix, lips->first, lips->second);
      std::vector<double> chord(mixed.size(), 0.0);
      const int s = params.config.n_subjects;
      for (int j = 0; j < s; ++j) {
        if (style.weights[j] == 0.0) continue;
        const std::vector<double> pure = LipDistance(
            Animate(params, templ.vertices, windows, Condition::OneHot(s, j)),
            lips->first, lips->second);
        for (size_t i = 0; i < chord.size(); ++i) {
          chord[i] += style.weights[j] * pure[i];
        }
      }
      double worst = -1e300;
      for (size_t i = 0; i < chord.size(); ++i) {
        worst = std::max(worst, mixed[i] - chord[i]);
      }
      const bool ok = worst <= 1e-6;
      std::printf("chord_bound=%s max_excess=%.3g\n", ok ? "ok" : "violated",
                  worst);
      if (!ok) return 3;
    }
  }
  return 0;
}

// ----------------------------------------------------------------- metrics

MeshSequence LoadMeshesFrom(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      const std::string name = e.path().filename().string();
      const std::string ext = e.path().extension().string();
      if (name.rfind("frame_", 0) == 0 && (ext == ".obj" || ext == ".ply")) {
        files.push_back(e.path());
      }
    }
    std::sort(files.begin(), files.end());
    Require(!files.empty(), ErrorCode::kData,
            "no frame_*.obj/ply files in " + path.string());
    MeshSequence seq;
    for (const auto& f : files) seq.frames.push_back(ReadMesh(f).vertices);
    return seq;
  }
  return LoadMeshSequence(path);
}

int RunMetrics(const KeyValueFile& kv) {
  const fs::path meshes = RequireExisting(kv, "metrics", "meshes", "--meshes");
  Require(kv.Has("metrics", "lip"), ErrorCode::kConfiguration,
          "--lip upper,lower is required");
  const auto lips = ParseLipPair(Str(kv, "metrics", "lip"));
  const fs::path out = RequirePath(kv, "metrics", "out", "--out");
  const std::string plot = Str(kv, "metrics", "plot_out");
  const double plot_fps = Real(kv, "metrics", "plot_fps", 30.0);
  Require(plot_fps > 0, ErrorCode::kConfiguration, "--plot-fps must be > 0");

  const MeshSequence seq = LoadMeshesFrom(meshes);
  const std::vector<double> d = LipDistance(seq, lips.first, lips.second);
  WriteLipMetric(out, d);
  if (!plot.empty()) WritePlotData(Resolve(plot), d, seq.fps, plot_fps);
  double lo = d.front(), hi = d.front(), mean = 0.0;
  for (double v : d) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v / d.size();
  }
  std::printf("frames=%zu min=%.6g max=%.6g mean=%.6g\n", d.size(), lo, hi,
              mean);
  return 0;
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kConfiguration:
    case ErrorCode::kParameter:
      return 2;
    default:
      return 1;
  }
}

int Main(int argc, char** argv) {
  CLI::App app{"Speech-driven 3D facial animation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--set", g.overrides, "override section.key=value");
  app.add_option("--seed", g.seed, "seed for every random choice");

  CLI::App* features = app.add_subcommand("features", "compute or import speech features");
  Flags ff(features);
  ff.Add("--wav", "features", "wav", "input WAV (fbank, mfcc)");
  ff.Add("--import", "features", "import", "input VFEA file (import)");
  ff.Add("--kind", "features", "kind", "fbank | mfcc | import");
  ff.Add("--out", "features", "out", "output VFEA file");
  ff.Add("--resample", "features", "resample_to", "target fps, 0 = keep (default 60)");
  ff.Add("--window", "features", "window", "window length W for the summary");
  ff.Add("--n-filters", "features", "n_filters", "Mel filters (26)");
  ff.Add("--n-coeffs", "features", "n_coeffs", "MFCC coefficients (26)");
  ff.Add("--frame-length", "features", "frame_length", "seconds (0.02)");
  ff.Add("--frame-step", "features", "frame_step", "seconds (0.02)");
  ff.Add("--noise", "features", "noise_wav", "noise WAV to mix in");
  ff.Add("--noise-gain-db", "features", "noise_gain_db", "noise gain relative to the signal, <= 0");

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic dataset");
  Flags sf(synth);
  sf.Add("--out", "synth", "out", "output directory");
  sf.Add("--subjects", "synth", "subjects", "subjects (2)");
  sf.Add("--sentences", "synth", "sentences", "sentences per subject (2)");
  sf.Add("--frames", "synth", "frames", "frames per sentence (120)");
  sf.Add("--vertices", "synth", "vertices", "mesh vertices (100)");
  sf.Add("--feature-dim", "synth", "feature_dim", "feature dimension (29)");
  sf.Add("--window", "synth", "window", "window length (16)");
  sf.Add("--rank", "synth", "rank", "rank of each subject map (4)");
  sf.Add("--map-norm", "synth", "map_norm", "spectral norm of each map (0.05)");
  sf.Add("--smoothing", "synth", "smoothing", "feature low-pass length (8)");

  CLI::App* train = app.add_subcommand("train", "train a network");
  Flags tf(train);
  tf.Add("--data", "train", "data", "dataset directory");
  tf.Add("--out", "train", "out", "output checkpoint (best validation)");
  tf.Add("--log", "train", "log", "training log (default <out>.log)");
  tf.Add("--epochs", "train", "epochs", "epochs (50)");
  tf.Add("--lr", "train", "learning_rate", "learning rate (1e-4)");
  tf.Add("--batch-size", "train", "batch_size", "batch size (64)");
  tf.Add("--max-steps", "train", "max_steps", "stop after this many steps (0 = off)");
  tf.Add("--position-weight", "train", "position_weight", "position loss weight (1.0)");
  tf.Add("--velocity-weight", "train", "velocity_weight", "velocity loss weight (10.0)");

  CLI::App* animate = app.add_subcommand("animate", "animate a template from features");
  Flags af(animate);
  af.Add("--checkpoint", "animate", "checkpoint", "VCKP checkpoint");
  af.Add("--template", "animate", "template", "template mesh (.obj or .ply)");
  af.Add("--features", "animate", "features", "VFEA features");
  af.Add("--style", "animate", "style", "weights over training subjects, e.g. 0.5,0.5");
  af.Add("--subject", "animate", "subject", "condition on one training subject");
  af.Add("--head-model", "animate", "head_model", "VHED head model for edits");
  af.Add("--beta", "animate", "beta", "identity coefficients in sd units");
  af.Add("--pose", "animate", "pose", "joint:x,y,z axis-angle degrees, space separated");
  af.Add("--global-rotation", "animate", "global_rotation", "x,y,z degrees");
  af.Add("--global-translation", "animate", "global_translation", "x,y,z meters");
  af.Add("--out", "animate", "out", "output directory");
  af.Add("--format", "animate", "format", "obj | ply");
  af.Add("--lip", "animate", "lip", "upper,lower vertex indices");
  af.Add("--plot-fps", "animate", "plot_fps", "also write lip plot data at this rate");

  CLI::App* metrics = app.add_subcommand("metrics", "lip distance of a mesh sequence");
  Flags mf(metrics);
  mf.Add("--meshes", "metrics", "meshes", "frame directory or VMSQ file");
  mf.Add("--lip", "metrics", "lip", "upper,lower vertex indices");
  mf.Add("--out", "metrics", "out", "CSV output");
  mf.Add("--plot-out", "metrics", "plot_out", "resampled CSV output");
  mf.Add("--plot-fps", "metrics", "plot_fps", "plot rate (30)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (features->parsed()) return RunFeatures(LoadRunConfig(g, ff));
    if (synth->parsed()) return RunSynth(LoadRunConfig(g, sf));
    if (train->parsed()) return RunTrain(LoadRunConfig(g, tf));
    if (animate->parsed()) return RunAnimate(LoadRunConfig(g, af));
    if (metrics->parsed()) return RunMetrics(LoadRunConfig(g, mf));
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return ExitCodeFor(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace voca

int main(int argc, char** argv) { return voca::Main(argc, argv); }
