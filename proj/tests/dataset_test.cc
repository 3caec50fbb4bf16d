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

#include <cstring>
#include <numeric>
#include <set>

#include <Eigen/QR>
#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "test_util.h"

namespace voca {
namespace {

using testing::CodeOf;
using testing::TempDir;

// One sequence per (subject, sentence) with `frames` frames of constant
// features; meshes are the template plus `offset` per frame index.
struct Corpus {
  std::vector<Sequence> sequences;
  std::map<std::string, Vertices> templates;
};

Corpus MakeCorpus(const std::vector<std::string>& subjects,
                  const std::vector<std::string>& sentences, int frames = 3,
                  int n = 6, int dim = 5) {
  Corpus c;
  for (size_t s = 0; s < subjects.size(); ++s) {
    Vertices t(n, 3);
    for (int v = 0; v < n; ++v) t.row(v) << v, static_cast<double>(s), 0.5;
    c.templates[subjects[s]] = t;
    for (const auto& sentence : sentences) {
      Sequence seq;
      seq.subject = subjects[s];
      seq.sentence = sentence;
      seq.features.fps = 60;
      seq.features.frames = FeatureMatrix::Constant(frames, dim, 0.25f);
      for (int f = 0; f < frames; ++f) {
        seq.meshes.frames.push_back(t.array() + 0.125 * f);
      }
      c.sequences.push_back(seq);
    }
  }
  return c;
}

TEST(Dataset, DisplacementIsMeshMinusTemplate) {
  Corpus c = MakeCorpus({"a"}, {"x"});
  c.sequences[0].meshes.frames[0] = c.templates["a"];
  const Dataset d = BuildDataset(c.sequences, c.templates, 4);
  EXPECT_TRUE(d.Displacement(0, 0).isZero(0.0));
  EXPECT_TRUE((d.Displacement(0, 2).array() == 0.25).all());
  EXPECT_EQ(d.windows(0).size(), 3);
  EXPECT_EQ(d.windows(0).window(), 4);
  EXPECT_EQ(d.total_frames(), 3);
  EXPECT_EQ(CodeOf([&] { d.subject_template("zz"); }), ErrorCode::kData);
}

TEST(Dataset, BuildRejectsInconsistentInput) {
  const Corpus base = MakeCorpus({"a", "b"}, {"x", "y"});
  auto code = [](Corpus c) {
    return CodeOf([&] { BuildDataset(c.sequences, c.templates, 4); });
  };
  Corpus c = base;
  c.templates.erase("b");
  EXPECT_EQ(code(c), ErrorCode::kData);
  c = base;
  c.sequences[1].meshes.frames.pop_back();
  EXPECT_EQ(code(c), ErrorCode::kData);
  c = base;
  c.sequences[2].features.fps = 50;
  EXPECT_EQ(code(c), ErrorCode::kData);
  c = base;
  c.sequences[3].features.frames = FeatureMatrix::Zero(3, 6);
  EXPECT_EQ(code(c), ErrorCode::kData);
  c = base;
  c.sequences[3].sentence = "x";
  EXPECT_EQ(code(c), ErrorCode::kData);
  c = base;
  c.sequences[0].features.frames.resize(0, 5);
  c.sequences[0].meshes.frames.clear();
  EXPECT_EQ(code(c), ErrorCode::kData);
  c = base;
  c.templates["b"] = Vertices::Zero(7, 3);
  EXPECT_EQ(code(c), ErrorCode::kData);
}

TEST(Dataset, SamplesCarryConditionAndPredecessorFlag) {
  const Corpus c = MakeCorpus({"a", "b", "c"}, {"x"}, 4);
  const Dataset d = BuildDataset(c.sequences, c.templates, 4);
  const auto s = MakeSamples(d, {0, 1, 2}, {"a", "c"});
  ASSERT_EQ(s.size(), 12u);
  for (const auto& t : s) {
    EXPECT_EQ(t.has_previous, t.frame > 0);
    const std::string& subj = d.sequence(t.sequence).subject;
    EXPECT_EQ(t.condition, subj == "a" ? 0 : subj == "c" ? 1 : -1);
  }
}

std::vector<std::string> Names(const char* prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(100 + i));
  return out;
}

TEST(Split, ReferenceShapedEightTwoTwo) {
  const auto subjects = Names("FaceTalk_", 12);
  const Corpus c = MakeCorpus(subjects, {"s01", "s02", "s03", "s04"}, 2);
  const Dataset d = BuildDataset(c.sequences, c.templates, 4);
  SplitSpec spec;
  spec.train.assign(subjects.begin(), subjects.begin() + 8);
  spec.val.assign(subjects.begin() + 8, subjects.begin() + 10);
  spec.test.assign(subjects.begin() + 10, subjects.end());
  spec.exclude["train"] = {"s03", "s04"};
  spec.exclude["val"] = {"s01", "s02", "s04"};
  spec.exclude["test"] = {"s01", "s02", "s03"};
  const DatasetSplit s = SplitDataset(d, spec);
  EXPECT_EQ(s.train.size(), 16u);
  EXPECT_EQ(s.val.size(), 2u);
  EXPECT_EQ(s.test.size(), 2u);
  EXPECT_EQ(s.training_subjects.size(), 8u);
  EXPECT_TRUE(std::is_sorted(s.training_subjects.begin(), s.training_subjects.end()));
  EXPECT_TRUE(s.warnings.empty());
  // Subject-disjoint and sentence-disjoint by construction.
  std::set<std::string> train_subj, val_subj, train_sent, val_sent;
  for (int i : s.train) {
    train_subj.insert(d.sequence(i).subject);
    train_sent.insert(d.sequence(i).sentence);
  }
  for (int i : s.val) {
    val_subj.insert(d.sequence(i).subject);
    val_sent.insert(d.sequence(i).sentence);
  }
  for (const auto& v : val_subj) EXPECT_FALSE(train_subj.count(v));
  for (const auto& v : val_sent) EXPECT_FALSE(train_sent.count(v));
}

TEST(Split, Errors) {
  const Corpus c = MakeCorpus({"a", "b", "c"}, {"x", "y"});
  const Dataset d = BuildDataset(c.sequences, c.templates, 4);
  SplitSpec spec;
  spec.train = {"a", "b"};
  spec.val = {"b"};
  EXPECT_EQ(CodeOf([&] { SplitDataset(d, spec); }), ErrorCode::kConfiguration);
  spec.val = {"q"};
  EXPECT_EQ(CodeOf([&] { SplitDataset(d, spec); }), ErrorCode::kConfiguration);
  // Shared sentence ids between train and val.
  spec.val = {"c"};
  EXPECT_EQ(CodeOf([&] { SplitDataset(d, spec); }), ErrorCode::kConfiguration);
  spec.exclude["val"] = {"x"};
  EXPECT_EQ(CodeOf([&] { SplitDataset(d, spec); }), ErrorCode::kConfiguration);
  spec.exclude["train"] = {"y"};
  const DatasetSplit s = SplitDataset(d, spec);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.val.size(), 1u);
}

TEST(Split, EmptySplitsWarn) {
  const Corpus c = MakeCorpus({"a", "b"}, {"x"});
  const Dataset d = BuildDataset(c.sequences, c.templates, 4);
  SplitSpec spec;
  spec.train = {"a", "b"};
  const DatasetSplit s = SplitDataset(d, spec);
  EXPECT_EQ(s.warnings.size(), 2u);
  EXPECT_EQ(s.training_subjects, (std::vector<std::string>{"a", "b"}));
  SplitSpec none;
  EXPECT_EQ(SplitDataset(d, none).warnings.size(), 3u);
}

TEST(SplitSpec, ParseFormatRoundTrip) {
  const SplitSpec s = ParseSplitSpec(
      "# comment\n"
      "train: a b  c\n"
      "\n"
      "val: d   # trailing\n"
      "test: e\n"
      "train: f\n"
      "val.exclude: s1 s2\n");
  EXPECT_EQ(s.train, (std::vector<std::string>{"a", "b", "c", "f"}));
  EXPECT_EQ(s.val, (std::vector<std::string>{"d"}));
  EXPECT_EQ(s.test, (std::vector<std::string>{"e"}));
  EXPECT_EQ(s.exclude.at("val"), (std::vector<std::string>{"s1", "s2"}));
  const SplitSpec again = ParseSplitSpec(FormatSplitSpec(s));
  EXPECT_EQ(again.train, s.train);
  EXPECT_EQ(again.val, s.val);
  EXPECT_EQ(again.test, s.test);
  EXPECT_EQ(again.exclude, s.exclude);
  EXPECT_EQ(CodeOf([] { ParseSplitSpec("holdout: a\n"); }),
            ErrorCode::kConfiguration);
  EXPECT_EQ(CodeOf([] { ParseSplitSpec("train a\n"); }),
            ErrorCode::kConfiguration);
}

TEST(Synthetic, ReferenceCountsAndShapes) {
  SyntheticSpec spec;
  spec.frames_per_sequence = 120;
  const SyntheticData d = GenerateSynthetic(spec, 1);
  const DatasetSplit s = SplitDataset(d.dataset, d.split);
  const auto samples = MakeSamples(d.dataset, s.train, s.training_subjects);
  EXPECT_EQ(samples.size(), 480u);
  EXPECT_EQ(d.dataset.n_vertices(), 100);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(d.dataset.windows(i).size(), 120);
    EXPECT_EQ(d.dataset.windows(i)[0].rows(), 16);
    EXPECT_EQ(d.dataset.windows(i)[0].cols(), 29);
  }
  EXPECT_EQ(s.training_subjects.size(), 2u);
  EXPECT_GT(d.displacement_scale, 0.0);
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticSpec spec;
  spec.frames_per_sequence = 30;
  const SyntheticData a = GenerateSynthetic(spec, 7);
  const SyntheticData b = GenerateSynthetic(spec, 7);
  const SyntheticData c = GenerateSynthetic(spec, 8);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(a.dataset.sequence(i).features.frames,
              b.dataset.sequence(i).features.frames);
    EXPECT_EQ(a.dataset.sequence(i).meshes.frames,
              b.dataset.sequence(i).meshes.frames);
  }
  EXPECT_NE(a.dataset.sequence(0).features.frames,
            c.dataset.sequence(0).features.frames);
  EXPECT_EQ(a.displacement_scale, b.displacement_scale);
}

TEST(Synthetic, MeshesAreTheOracleRoundedToFloat) {
  SyntheticSpec spec;
  spec.frames_per_sequence = 40;
  const SyntheticData d = GenerateSynthetic(spec, 2);
  for (int i = 0; i < 4; ++i) {
    const Sequence& seq = d.dataset.sequence(i);
    const int subj = seq.subject == "subject_00" ? 0 : 1;
    const Vertices& t = d.dataset.subject_template(seq.subject);
    for (int f = 0; f < seq.meshes.size(); ++f) {
      const Vertices want =
          RoundToFloat(t + d.oracle.Displacement(subj, d.dataset.windows(i)[f]));
      EXPECT_EQ(seq.meshes.frames[f], want) << i << "/" << f;
    }
  }
  // Templates are exact 32-bit values.
  for (const auto& [name, t] : d.dataset.templates()) EXPECT_EQ(RoundToFloat(t), t);
}

TEST(Synthetic, OracleIsLinearInTheWindow) {
  SyntheticSpec spec;
  spec.frames_per_sequence = 10;
  const SyntheticData d = GenerateSynthetic(spec, 3);
  Rng rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    FeatureMatrix x(16, 29), y(16, 29);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x.data()[i] = static_cast<float>(rng.Normal());
      y.data()[i] = static_cast<float>(rng.Normal());
    }
    const FeatureMatrix z = x + y;
    const Vertices lhs = d.oracle.Displacement(1, z);
    const Vertices rhs = d.oracle.Displacement(1, x) + d.oracle.Displacement(1, y);
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_TRUE(d.oracle.Displacement(0, FeatureMatrix::Zero(16, 29)).isZero(0.0));
  }
  // Map spectral norm is the requested one.
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(d.oracle.maps[0]);
  EXPECT_NEAR(svd.singularValues()[0], spec.map_norm, 1e-12);
  EXPECT_LT(svd.singularValues()[spec.rank], 1e-12);
}

TEST(Synthetic, LeastSquaresRecoversTheMap) {
  SyntheticSpec spec;
  spec.n_subjects = 1;
  spec.n_sentences = 1;
  spec.frames_per_sequence = 600;
  spec.feature_dim = 4;
  spec.n_vertices = 10;
  spec.rank = 0;
  spec.smoothing = 2;
  const SyntheticData d = GenerateSynthetic(spec, 5);
  const int in = 16 * 4, out = 30;
  Eigen::MatrixXd x(600, in), y(600, out);
  const Vertices& t = d.dataset.subject_template("subject_00");
  for (int f = 0; f < 600; ++f) {
    const auto w = d.dataset.windows(0)[f];
    for (int r = 0, i = 0; r < 16; ++r) {
      for (int c = 0; c < 4; ++c, ++i) x(f, i) = w(r, c);
    }
    const Vertices disp = d.dataset.sequence(0).meshes.frames[f] - t;
    for (int v = 0; v < 10; ++v) {
      for (int k = 0; k < 3; ++k) y(f, 3 * v + k) = disp(v, k);
    }
  }
  const Eigen::MatrixXd fit = x.colPivHouseholderQr().solve(y).transpose();
  EXPECT_LT((fit - d.oracle.maps[0]).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Synthetic, InvalidSpec) {
  SyntheticSpec spec;
  spec.n_vertices = 3;
  EXPECT_EQ(CodeOf([&] { GenerateSynthetic(spec, 1); }), ErrorCode::kParameter);
  spec = SyntheticSpec{};
  spec.map_norm = 0;
  EXPECT_EQ(CodeOf([&] { GenerateSynthetic(spec, 1); }), ErrorCode::kParameter);
}

TEST(DatasetIo, SaveLoadRoundTrip) {
  TempDir dir;
  SyntheticSpec spec;
  spec.n_subjects = 3;
  spec.frames_per_sequence = 15;
  const SyntheticData d = GenerateSynthetic(spec, 9);
  SplitSpec split;
  split.train = {"subject_00", "subject_02"};
  split.val = {"subject_01"};
  split.exclude["val"] = {"sentence_00"};
  split.exclude["train"] = {"sentence_01"};
  SaveDataset(dir.path(), d.dataset, split, &d.model);
  EXPECT_TRUE(std::filesystem::exists(dir / "head_model.vhed"));
  EXPECT_TRUE(std::filesystem::exists(dir / "templates/subject_01.ply"));
  const LoadedDataset l = LoadDataset(dir.path());
  ASSERT_EQ(l.dataset.sequences().size(), d.dataset.sequences().size());
  for (size_t i = 0; i < d.dataset.sequences().size(); ++i) {
    const Sequence& a = d.dataset.sequence(static_cast<int>(i));
    const Sequence& b = l.dataset.sequence(static_cast<int>(i));
    EXPECT_EQ(a.subject, b.subject);
    EXPECT_EQ(a.sentence, b.sentence);
    EXPECT_EQ(a.features.frames, b.features.frames);
    EXPECT_EQ(a.features.fps, b.features.fps);
    EXPECT_EQ(a.meshes.frames, b.meshes.frames);
  }
  EXPECT_EQ(l.dataset.templates(), d.dataset.templates());
  EXPECT_EQ(l.dataset.window(), 16);
  EXPECT_EQ(l.split.train, split.train);
  EXPECT_EQ(l.split.val, split.val);
  EXPECT_EQ(l.split.exclude, split.exclude);
  const DatasetSplit s = SplitDataset(l.dataset, l.split);
  EXPECT_EQ(s.train.size(), 2u);
  EXPECT_EQ(s.val.size(), 1u);
}

TEST(DatasetIo, MissingSplitFileTrainsOnEverything) {
  TempDir dir;
  SyntheticSpec spec;
  spec.frames_per_sequence = 5;
  const SyntheticData d = GenerateSynthetic(spec, 10);
  SaveDataset(dir.path(), d.dataset, d.split);
  std::filesystem::remove(dir / "split.txt");
  const LoadedDataset l = LoadDataset(dir.path());
  EXPECT_EQ(l.split.train, (std::vector<std::string>{"subject_00", "subject_01"}));
  EXPECT_EQ(CodeOf([&] { LoadDataset(dir / "nope"); }), ErrorCode::kIo);
}

}  // namespace
}  // namespace voca
