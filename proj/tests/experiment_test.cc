// Copyright 2026 The MaskAudit Authors. All Rights Reserved.
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

#include "experiment/stages.h"

#include <optional>
#include <string>

#include <gtest/gtest.h>
#include <httplib.h>

#include "core/error.h"
#include "core/file_util.h"
#include "test_util.h"

namespace maskaudit {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

json TinyConfig() {
  return json::parse(R"({
    "name": "tiny",
    "seed": 7,
    "dataset": {
      "source": "synthetic",
      "synthetic": {"n_samples": 150, "image_size": 32, "shortcut_strength": 1.0, "seed": 3},
      "target_size": 32,
      "split": {"k": 3, "test_fraction": 0.3}
    },
    "external": {"source": "synthetic",
                 "synthetic": {"n_samples": 40, "invert_tag": true, "seed": 11}},
    "train": {"input_size": 32, "widths": [4, 8], "max_epochs": 3, "early_stop_patience": 2},
    "strategies": ["FULL", "NO_ROI", "ONLY_ROI"],
    "dilation": {"factors": [0, 4, 32], "subgroups": ["all"]},
    "analysis": {"embeddings": true, "attribution": true, "ood": true, "study": true},
    "embeddings": {"max_images": 30, "perplexity": 5, "iterations": 250},
    "attribution": {"segments": 4, "n_evaluations": 16, "max_images": 3},
    "max_parallel": 2
  })");
}

std::optional<ErrorCode> CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

TEST(ConfigTest, ResolvesDefaultsAndPaths) {
  const ExperimentConfig c = ParseExperimentConfig(TinyConfig(), "/base", "");
  EXPECT_EQ(c.output_root, fs::path("/base/runs/tiny"));
  EXPECT_EQ(c.data_root, fs::path("/base/runs/tiny/data"));
  EXPECT_EQ(c.train.backbone, "small_cnn");  // synthetic default kept
  EXPECT_EQ(c.train.input_size, 32);
  EXPECT_EQ(c.train.max_epochs, 3);
  EXPECT_EQ(c.train.learning_rate, TrainConfig::DeskDefaults().learning_rate);
  ASSERT_TRUE(c.external.has_value());
  EXPECT_EQ(c.external->generator.id_prefix, "ext");
  EXPECT_TRUE(c.external->generator.invert_tag);
  EXPECT_EQ(c.external->generator.image_size, 32);  // inherited from the main generator
  EXPECT_EQ(c.study.seed, 7u);

  const ExperimentConfig o = ParseExperimentConfig(TinyConfig(), "/base", "/data");
  EXPECT_EQ(o.data_root, fs::path("/data"));
  // The resolved snapshot parses back to the same settings.
  const ExperimentConfig again = ParseExperimentConfig(c.ToJson(), "/elsewhere", "");
  EXPECT_EQ(again.ToJson(), c.ToJson());
}

TEST(ConfigTest, ReportsEveryProblemAtOnce) {
  json j = TinyConfig();
  j["name"] = "bad name";
  j["dataset"]["split"]["k"] = 1;
  j["dilation"]["strategies"] = {"FULL"};
  j["alpha"] = 2;
  j["bogus"] = true;
  j["strategies"] = {"NO_ROI", "NO_ROI"};
  try {
    ParseExperimentConfig(j, "/base", "");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    const std::string what = e.what();
    for (const char* key : {"name", "dataset.split.k", "dilation.strategies", "alpha", "bogus",
                            "strategies: contains duplicates", "embeddings need FULL"}) {
      EXPECT_NE(what.find(key), std::string::npos) << key << " missing from\n" << what;
    }
  }
  json mismatch = TinyConfig();
  mismatch["dataset"]["target_size"] = 64;
  EXPECT_EQ(CodeOf([&] { ParseExperimentConfig(mismatch, "/b", ""); }),
            ErrorCode::kConfigError);
  json no_ext = TinyConfig();
  no_ext.erase("external");
  EXPECT_EQ(CodeOf([&] { ParseExperimentConfig(no_ext, "/b", ""); }),
            ErrorCode::kConfigError);
}

TEST(StageTest, NamesRoundTrip) {
  for (const char* n : {"generate", "prepare", "train", "evaluate", "sweep", "embed",
                        "attribute", "report"}) {
    EXPECT_EQ(StageName(ParseStage(n)), n);
  }
  EXPECT_EQ(CodeOf([] { ParseStage("deploy"); }), ErrorCode::kInvalidArgument);
}

TEST(ExperimentTest, EndToEndResumeAndStudyServer) {
  testing_util::TempDir dir("exp");
  const ExperimentConfig config = ParseExperimentConfig(TinyConfig(), dir.path(), "");
  Experiment exp(config);

  EXPECT_EQ(CodeOf([&] { exp.Run(Stage::kPrepare); }), ErrorCode::kNotFound);

  EXPECT_EQ(exp.Run(Stage::kGenerate).units_run, 2);
  EXPECT_EQ(exp.Run(Stage::kGenerate).units_skipped, 2);
  EXPECT_EQ(exp.Run(Stage::kPrepare).units_run, 1);
  EXPECT_EQ(exp.Run(Stage::kPrepare).units_skipped, 1);

  // Evaluating before training names the gap.
  EXPECT_EQ(CodeOf([&] { exp.Run(Stage::kEvaluate); }), ErrorCode::kIncompleteRun);

  const StageResult trained = exp.Run(Stage::kTrain);
  EXPECT_EQ(trained.units_run, 9);
  for (auto s : config.strategies) {
    for (int f = 0; f < 3; ++f) EXPECT_TRUE(fs::exists(exp.CheckpointPath(s, f)));
  }
  const std::string before = ReadTextFile(exp.CheckpointPath(MaskingStrategy::kNoRoi, 1));
  const StageResult again = exp.Run(Stage::kTrain);
  EXPECT_EQ(again.units_run, 0);
  EXPECT_EQ(again.units_skipped, 9);
  EXPECT_EQ(ReadTextFile(exp.CheckpointPath(MaskingStrategy::kNoRoi, 1)), before);

  // A missing checkpoint is retrained alone.
  fs::remove(exp.CheckpointPath(MaskingStrategy::kOnlyRoi, 2));
  EXPECT_EQ(exp.Run(Stage::kTrain).units_run, 1);

  for (Stage s : {Stage::kEvaluate, Stage::kSweep, Stage::kEmbed, Stage::kAttribute,
                  Stage::kReport}) {
    exp.Run(s);
  }
  const fs::path out = config.output_root;
  for (const char* p : {"summary.json", "config.json", "predictions/test.csv",
                        "results/matrices/matrices.json", "results/curves/curves.json",
                        "results/delong/comparisons.json", "results/delong/ood.json",
                        "results/embeddings/cosine.json", "results/embeddings/projection.png",
                        "results/attributions/index.json", "study/main_plan.json",
                        "study/pilot_plan.json"}) {
    EXPECT_TRUE(fs::exists(out / p)) << p;
  }
  const RunRecord record = exp.LoadRecord();
  EXPECT_EQ(record.matrices.size(), 1u);
  EXPECT_EQ(record.matrices[0].cells.size(), 3u);
  EXPECT_EQ(record.curves.size(), 2u);  // NO_ROI and ONLY_ROI, one subgroup
  EXPECT_EQ(record.cosine.size(), 2u);
  EXPECT_EQ(record.silhouettes.size(), 2u);
  EXPECT_EQ(record.projection.size(), 90u);
  EXPECT_EQ(record.attributions.size(), 3u);
  ASSERT_TRUE(record.ood.has_value());
  for (const auto& a : record.attributions) {
    EXPECT_EQ(a.strategy, MaskingStrategy::kNoRoi);
    EXPECT_TRUE(a.map.exact);
    double sum = a.map.base_value;
    for (double v : a.map.values) sum += v;
    EXPECT_NEAR(sum, a.map.full_value, 1e-9);
  }
  // Report is idempotent on an unchanged run.
  const std::string summary = ReadTextFile(out / "summary.json");
  exp.Run(Stage::kReport);
  EXPECT_EQ(ReadTextFile(out / "summary.json"), summary);

  // Retraining into the same root with other hyperparameters is refused.
  json changed = TinyConfig();
  changed["train"]["learning_rate"] = 0.01;
  Experiment other(ParseExperimentConfig(changed, dir.path(), ""));
  EXPECT_EQ(CodeOf([&] { other.Run(Stage::kTrain); }), ErrorCode::kConfigError);

  StudyServer server(&exp);
  const int port = server.Start({});
  httplib::Client cli("127.0.0.1", port);
  const auto classes = cli.Get("/api/classes");
  ASSERT_TRUE(classes);
  EXPECT_EQ(classes->status, 200);
  const auto next = cli.Get("/api/study/pilot/next?annotator=r1");
  ASSERT_TRUE(next);
  EXPECT_EQ(next->status, 200);
  const json item = json::parse(next->body);
  const auto png = cli.Get(item["image_url"].get<std::string>());
  ASSERT_TRUE(png);
  EXPECT_EQ(png->status, 200);
  EXPECT_EQ(png->body.substr(1, 3), "PNG");
  const auto locked = cli.Get("/api/study/main/next?annotator=r1");
  ASSERT_TRUE(locked);
  EXPECT_EQ(locked->status, 409);
  server.Stop();
}

}  // namespace
}  // namespace maskaudit
