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

#include "voca/dataset.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/SVD>

#include "voca/binary_io.h"
#include "voca/config.h"
#include "voca/error.h"
#include "voca/parallel.h"
#include "voca/random.h"

namespace voca {

const Vertices& Dataset::subject_template(const std::string& subject) const {
  auto it = templates_.find(subject);
  Require(it != templates_.end(), ErrorCode::kData,
          "no template for subject " + subject);
  return it->second;
}

std::vector<std::string> Dataset::subjects() const {
  std::set<std::string> s;
  for (const auto& seq : sequences_) s.insert(seq.subject);
  return {s.begin(), s.end()};
}

int Dataset::total_frames() const {
  int n = 0;
  for (const auto& seq : sequences_) n += seq.meshes.size();
  return n;
}

Vertices Dataset::Displacement(int sequence, int frame) const {
  const Sequence& seq = sequences_.at(sequence);
  return seq.meshes.frames.at(frame) - subject_template(seq.subject);
}

Dataset BuildDataset(std::vector<Sequence> sequences,
                     std::map<std::string, Vertices> templates, int window) {
  Require(window >= 1, ErrorCode::kParameter, "window must be >= 1");
  Dataset ds;
  ds.window_ = window;
  for (const auto& seq : sequences) {
    const std::string id = seq.subject + "/" + seq.sentence;
    auto it = templates.find(seq.subject);
    Require(it != templates.end(), ErrorCode::kData,
            "sequence " + id + ": no template for subject " + seq.subject);
    Require(seq.features.n_frames() == seq.meshes.size(), ErrorCode::kData,
            "sequence " + id + ": " + std::to_string(seq.features.n_frames()) +
                " feature frames vs " + std::to_string(seq.meshes.size()) +
                " meshes");
    Require(seq.meshes.size() >= 1, ErrorCode::kData,
            "sequence " + id + " is empty");
    Require(std::abs(seq.features.fps - kNetworkFps) < 1e-6, ErrorCode::kData,
            "sequence " + id + ": features must be at 60 fps");
    if (ds.feature_dim_ == 0) {
      ds.feature_dim_ = seq.features.dim();
      ds.n_vertices_ = static_cast<int>(it->second.rows());
    }
    Require(seq.features.dim() == ds.feature_dim_, ErrorCode::kData,
            "sequence " + id + ": feature dim differs from other sequences");
    Require(it->second.rows() == ds.n_vertices_, ErrorCode::kData,
            "template of " + seq.subject + " has a different vertex count");
    for (const Vertices& frame : seq.meshes.frames) {
      Require(frame.rows() == ds.n_vertices_, ErrorCode::kData,
              "sequence " + id + ": mesh vertex count differs from template");
    }
  }
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& seq : sequences) {
    Require(seen.insert({seq.subject, seq.sentence}).second, ErrorCode::kData,
            "duplicate sequence " + seq.subject + "/" + seq.sentence);
  }
  for (const auto& seq : sequences) {
    ds.windows_.push_back(WindowFeatures(seq.features, window));
  }
  ds.sequences_ = std::move(sequences);
  ds.templates_ = std::move(templates);
  return ds;
}

std::vector<TrainSample> MakeSamples(
    const Dataset& dataset, const std::vector<int>& sequence_indices,
    const std::vector<std::string>& condition_subjects) {
  std::vector<TrainSample> out;
  for (int s : sequence_indices) {
    const Sequence& seq = dataset.sequence(s);
    auto it = std::find(condition_subjects.begin(), condition_subjects.end(),
                        seq.subject);
    const int cond = it == condition_subjects.end()
                         ? -1
                         : static_cast<int>(it - condition_subjects.begin());
    for (int f = 0; f < seq.meshes.size(); ++f) {
      out.push_back({s, f, cond, f > 0});
    }
  }
  return out;
}

SplitSpec ParseSplitSpec(std::string_view text) {
  SplitSpec spec;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto colon = line.find(':');
    Require(colon != std::string::npos, ErrorCode::kConfiguration,
            "split spec line " + std::to_string(line_no) + ": missing ':'");
    std::string key = Trim(line.substr(0, colon));
    std::vector<std::string> items;
    std::istringstream values(line.substr(colon + 1));
    for (std::string v; values >> v;) items.push_back(v);
    auto append = [&](std::vector<std::string>& dst) {
      dst.insert(dst.end(), items.begin(), items.end());
    };
    if (key == "train") {
      append(spec.train);
    } else if (key == "val") {
      append(spec.val);
    } else if (key == "test") {
      append(spec.test);
    } else if (key == "train.exclude" || key == "val.exclude" ||
               key == "test.exclude") {
      append(spec.exclude[key.substr(0, key.find('.'))]);
    } else {
      Fail(ErrorCode::kConfiguration, "split spec line " +
                                          std::to_string(line_no) +
                                          ": unknown section '" + key + "'");
    }
  }
  return spec;
}

std::string FormatSplitSpec(const SplitSpec& spec) {
  std::string out;
  auto line = [&](const std::string& key, const std::vector<std::string>& v) {
    out += key + ":";
    for (const auto& s : v) out += " " + s;
    out += "\n";
  };
  line("train", spec.train);
  line("val", spec.val);
  line("test", spec.test);
  for (const auto& [split, sentences] : spec.exclude) {
    if (!sentences.empty()) line(split + ".exclude", sentences);
  }
  return out;
}

DatasetSplit SplitDataset(const Dataset& dataset, const SplitSpec& spec) {
  const std::vector<std::string> known = dataset.subjects();
  std::map<std::string, std::string> owner;
  auto claim = [&](const std::vector<std::string>& subjects,
                   const std::string& split) {
    for (const auto& s : subjects) {
      Require(std::binary_search(known.begin(), known.end(), s),
              ErrorCode::kConfiguration,
              "split " + split + " names unknown subject " + s);
      auto [it, inserted] = owner.emplace(s, split);
      Require(inserted || it->second == split, ErrorCode::kConfiguration,
              "subject " + s + " appears in both " + it->second + " and " +
                  split);
    }
  };
  claim(spec.train, "train");
  claim(spec.val, "val");
  claim(spec.test, "test");

  DatasetSplit out;
  std::map<std::string, std::set<std::string>> sentences;
  for (int i = 0; i < static_cast<int>(dataset.sequences().size()); ++i) {
    const Sequence& seq = dataset.sequence(i);
    auto it = owner.find(seq.subject);
    if (it == owner.end()) continue;
    const std::string& split = it->second;
    auto ex = spec.exclude.find(split);
    if (ex != spec.exclude.end() &&
        std::find(ex->second.begin(), ex->second.end(), seq.sentence) !=
            ex->second.end()) {
      continue;
    }
    (split == "train" ? out.train : split == "val" ? out.val : out.test)
        .push_back(i);
    sentences[split].insert(seq.sentence);
  }
  for (const std::string held : {"val", "test"}) {
    for (const auto& s : sentences[held]) {
      for (const std::string other : {"train", "val", "test"}) {
        if (other == held) continue;
        Require(!sentences[other].count(s), ErrorCode::kConfiguration,
                "sentence " + s + " appears in both " + held + " and " +
                    other);
      }
    }
  }
  std::set<std::string> train_subjects;
  for (int i : out.train) train_subjects.insert(dataset.sequence(i).subject);
  out.training_subjects.assign(train_subjects.begin(), train_subjects.end());
  if (out.train.empty()) out.warnings.push_back("training split is empty");
  if (out.val.empty()) out.warnings.push_back("validation split is empty");
  if (out.test.empty()) out.warnings.push_back("test split is empty");
  return out;
}

Vertices SyntheticOracle::Displacement(
    int subject, const Eigen::Ref<const FeatureMatrix>& window) const {
  const Eigen::MatrixXd& map = maps.at(subject);
  Eigen::VectorXd x(window.size());
  for (Eigen::Index r = 0, i = 0; r < window.rows(); ++r) {
    for (Eigen::Index c = 0; c < window.cols(); ++c, ++i) x[i] = window(r, c);
  }
  Eigen::VectorXd y = map * x;
  return Eigen::Map<const Vertices>(y.data(), map.rows() / 3, 3);
}

namespace {

// Centered moving average with edge clamping.
std::vector<double> MovingAverage(const std::vector<double>& x, int width) {
  if (width <= 1) return x;
  const int n = static_cast<int>(x.size());
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = 0; k < width; ++k) {
      acc += x[std::clamp(i - width / 2 + k, 0, n - 1)];
    }
    out[i] = acc / width;
  }
  return out;
}

std::string Numbered(const char* prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%02d", prefix, i);
  return buf;
}

}  // namespace

SyntheticData GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed) {
  Require(spec.n_subjects >= 1 && spec.n_sentences >= 1 &&
              spec.frames_per_sequence >= 1 && spec.n_vertices >= 8 &&
              spec.feature_dim >= 1 && spec.window >= 1,
          ErrorCode::kParameter, "synthetic spec counts must be >= 1");
  Require(spec.rank >= 0 && spec.map_norm > 0.0 && spec.smoothing >= 1,
          ErrorCode::kParameter, "invalid synthetic rank/norm/smoothing");
  SyntheticData out;
  out.model = MakeProceduralHeadModel(
      {.n_vertices = spec.n_vertices, .n_shape = 4, .n_expr = 4},
      DeriveSeed(seed, "synthetic.model"));

  Rng rng(DeriveSeed(seed, "synthetic.data"));
  const int in_dim = spec.window * spec.feature_dim;
  const int out_dim = 3 * spec.n_vertices;
  const int max_rank = std::min(in_dim, out_dim);
  const int rank = spec.rank == 0 ? max_rank : std::min(spec.rank, max_rank);

  std::map<std::string, Vertices> templates;
  for (int s = 0; s < spec.n_subjects; ++s) {
    const std::string subject = Numbered("subject_", s);
    out.oracle.subjects.push_back(subject);
    std::vector<double> beta(out.model.n_shape());
    for (double& b : beta) b = rng.Normal();
    templates[subject] = RoundToFloat(out.model.template_vertices +
                                      ShapeOffsets(out.model, beta));
    Eigen::MatrixXd a(out_dim, rank), b(in_dim, rank);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.Normal();
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.Normal();
    Eigen::MatrixXd map = a * b.transpose();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(map);
    map *= spec.map_norm / svd.singularValues()[0];
    out.oracle.maps.push_back(std::move(map));
  }

  std::vector<Sequence> sequences;
  double sum_sq = 0.0;
  size_t count = 0;
  for (int s = 0; s < spec.n_subjects; ++s) {
    for (int t = 0; t < spec.n_sentences; ++t) {
      Sequence seq;
      seq.subject = out.oracle.subjects[s];
      seq.sentence = Numbered("sentence_", t);
      seq.features.fps = kNetworkFps;
      seq.features.kind = FeatureKind::kImportedLogits;
      seq.features.frames.resize(spec.frames_per_sequence, spec.feature_dim);
      for (int d = 0; d < spec.feature_dim; ++d) {
        std::vector<double> noise(spec.frames_per_sequence);
        for (double& v : noise) v = rng.Normal();
        std::vector<double> smooth =
            MovingAverage(MovingAverage(noise, spec.smoothing), spec.smoothing);
        double mean = 0.0, var = 0.0;
        for (double v : smooth) mean += v;
        mean /= smooth.size();
        for (double v : smooth) var += (v - mean) * (v - mean);
        const double sd = std::sqrt(var / smooth.size());
        for (int f = 0; f < spec.frames_per_sequence; ++f) {
          seq.features.frames(f, d) = static_cast<float>(
              sd > 0 ? (smooth[f] - mean) / sd : 0.0);
        }
      }
      const WindowSequence windows =
          WindowFeatures(seq.features, spec.window);
      const Vertices& tmpl = templates[seq.subject];
      for (int f = 0; f < windows.size(); ++f) {
        Vertices d = out.oracle.Displacement(s, windows[f]);
        sum_sq += d.squaredNorm();
        count += d.size();
        seq.meshes.frames.push_back(RoundToFloat(tmpl + d));
      }
      sequences.push_back(std::move(seq));
    }
  }
  out.displacement_scale = std::sqrt(sum_sq / static_cast<double>(count));
  out.dataset = BuildDataset(std::move(sequences), std::move(templates),
                             spec.window);
  out.split.train = out.oracle.subjects;
  return out;
}

void SaveDataset(const std::filesystem::path& dir, const Dataset& dataset,
                 const SplitSpec& split, const HeadModel* model) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "templates", ec);
  fs::create_directories(dir / "sequences", ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir.string());

  const std::vector<std::string> subjects = dataset.subjects();
  std::string meta;
  meta += "window = " + std::to_string(dataset.window()) + "\n";
  meta += "feature_dim = " + std::to_string(dataset.feature_dim()) + "\n";
  meta += "n_vertices = " + std::to_string(dataset.n_vertices()) + "\n";
  meta += "fps = 60\n";
  meta += "sequences = " + std::to_string(dataset.sequences().size()) + "\n";
  meta += "subjects =";
  for (const auto& s : subjects) meta += " " + s;
  meta += "\n";
  std::set<std::string> train(split.train.begin(), split.train.end());
  meta += "condition_dim = " + std::to_string(train.size()) + "\n";
  WriteFileAtomic(dir / "dataset.txt", meta);
  WriteFileAtomic(dir / "split.txt", FormatSplitSpec(split));

  static const std::vector<Face> kNoFaces;
  const std::vector<Face>& faces = model ? model->faces : kNoFaces;
  for (const auto& [subject, tmpl] : dataset.templates()) {
    WritePly(dir / "templates" / (subject + ".ply"), tmpl, faces);
  }
  if (model) SaveHeadModel(*model, dir / "head_model.vhed");

  for (const auto& seq : dataset.sequences()) {
    const fs::path sd = dir / "sequences" / seq.subject / seq.sentence;
    fs::create_directories(sd, ec);
    if (ec) Fail(ErrorCode::kIo, "cannot create " + sd.string());
    ExportFeatures(seq.features, sd / "features.vfea");
    SaveMeshSequence(seq.meshes, sd / "meshes.vmsq");
    WriteFileAtomic(sd / "meta.txt", "subject = " + seq.subject +
                                         "\nsentence = " + seq.sentence +
                                         "\nfps = 60\n");
  }
}

LoadedDataset LoadDataset(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  Require(fs::is_directory(dir), ErrorCode::kIo,
          "dataset directory " + dir.string() + " not found");
  const KeyValueFile meta = ReadKeyValueFile(dir / "dataset.txt");
  const int window = std::stoi(meta.Get("", "window"));

  std::map<std::string, Vertices> templates;
  std::vector<fs::path> template_files;
  for (const auto& e : fs::directory_iterator(dir / "templates")) {
    if (e.path().extension() == ".ply" || e.path().extension() == ".obj") {
      template_files.push_back(e.path());
    }
  }
  std::sort(template_files.begin(), template_files.end());
  for (const auto& p : template_files) {
    templates[p.stem().string()] = ReadMesh(p).vertices;
  }

  std::vector<fs::path> seq_dirs;
  if (fs::is_directory(dir / "sequences")) {
    for (const auto& subj : fs::directory_iterator(dir / "sequences")) {
      if (!subj.is_directory()) continue;
      for (const auto& sent : fs::directory_iterator(subj.path())) {
        if (sent.is_directory()) seq_dirs.push_back(sent.path());
      }
    }
  }
  std::sort(seq_dirs.begin(), seq_dirs.end());
  std::vector<Sequence> sequences;
  for (const auto& sd : seq_dirs) {
    const KeyValueFile m = ReadKeyValueFile(sd / "meta.txt");
    Sequence seq;
    seq.subject = m.Get("", "subject");
    seq.sentence = m.Get("", "sentence");
    seq.features = ImportFeatures(sd / "features.vfea");
    seq.meshes = LoadMeshSequence(sd / "meshes.vmsq");
    sequences.push_back(std::move(seq));
  }
  LoadedDataset out{BuildDataset(std::move(sequences), std::move(templates),
                                 window),
                    {}};
  if (fs::exists(dir / "split.txt")) {
    std::vector<char> bytes = ReadFileBytes(dir / "split.txt");
    out.split = ParseSplitSpec(std::string_view(bytes.data(), bytes.size()));
  } else {
    out.split.train = out.dataset.subjects();
  }
  return out;
}

}  // namespace voca
