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

#include <algorithm>
#include <mutex>

#include "attribution/shap.h"
#include "core/csv.h"
#include "core/error.h"
#include "core/file_util.h"
#include "core/log.h"
#include "core/parallel.h"
#include "data/materialize.h"
#include "data/synthetic.h"
#include "embeddings/embeddings.h"
#include "study/plan.h"
#include "study/store.h"
#include "training/trainer.h"

namespace maskaudit {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr Stage kStages[] = {Stage::kGenerate, Stage::kPrepare,   Stage::kTrain,
                             Stage::kEvaluate, Stage::kSweep,     Stage::kEmbed,
                             Stage::kAttribute, Stage::kReport};

json ReadJsonFile(const fs::path& path) {
  try {
    return json::parse(ReadTextFile(path));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
}

void WriteJsonFile(const fs::path& path, const json& j) {
  WriteTextFile(path, j.dump(2) + "\n");
}

bool Contains(const std::vector<MaskingStrategy>& v, MaskingStrategy s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

std::string_view StageName(Stage stage) {
  switch (stage) {
    case Stage::kGenerate: return "generate";
    case Stage::kPrepare: return "prepare";
    case Stage::kTrain: return "train";
    case Stage::kEvaluate: return "evaluate";
    case Stage::kSweep: return "sweep";
    case Stage::kEmbed: return "embed";
    case Stage::kAttribute: return "attribute";
    case Stage::kReport: return "report";
  }
  return "?";
}

Stage ParseStage(std::string_view name) {
  for (Stage s : kStages) {
    if (StageName(s) == name) return s;
  }
  Fail(ErrorCode::kInvalidArgument, "unknown stage: " + std::string(name));
}

struct Experiment::Data {
  DatasetManifest manifest;
  std::unique_ptr<ImageStore> store;
};

Experiment::Experiment(ExperimentConfig config) : config_(std::move(config)) {}
Experiment::~Experiment() = default;

fs::path Experiment::DatasetDir(const DatasetSource& source) const {
  if (!source.synthetic) return ManifestPath(source).parent_path();
  return config_.data_root / ("synthetic-" + HexDigest(Fnv1a64(source.ToJson().dump())));
}

fs::path Experiment::ManifestPath(const DatasetSource& source) const {
  if (source.synthetic) return DatasetDir(source) / "manifest.csv";
  return source.manifest.is_absolute() ? source.manifest : config_.data_root / source.manifest;
}

fs::path Experiment::CheckpointPath(MaskingStrategy strategy, int fold) const {
  return config_.output_root / "models" / std::string(StrategyName(strategy)) /
         ("fold" + std::to_string(fold) + ".ckpt");
}

fs::path Experiment::SplitsPath() const { return config_.output_root / "splits.json"; }

fs::path Experiment::PlanPath(StudyPhase phase) const {
  return config_.output_root / "study" / (std::string(PhaseName(phase)) + "_plan.json");
}

fs::path Experiment::AnnotationLogPath() const {
  return config_.output_root / "study" / "annotations.jsonl";
}

const DatasetManifest& Experiment::manifest() {
  if (!main_) {
    const fs::path p = ManifestPath(config_.dataset);
    if (!fs::exists(p)) {
      Fail(ErrorCode::kNotFound, "no dataset at " + p.string() + "; run `generate` first");
    }
    main_ = std::make_unique<Data>();
    main_->manifest = ReadManifestCsv(p);
    main_->manifest.Validate();
    if (config_.dataset.synthetic) {
      // Small generated sets are decoded once.
      DiskImageStore disk(main_->manifest.root);
      auto mem = std::make_unique<InMemoryImageStore>();
      for (const auto& s : main_->manifest.samples) {
        mem->Put(s.image_id, disk.LoadImage(s), disk.LoadMask(s));
      }
      main_->store = std::move(mem);
    } else {
      main_->store = std::make_unique<DiskImageStore>(main_->manifest.root);
    }
  }
  return main_->manifest;
}

const ImageStore& Experiment::store() {
  manifest();
  return *main_->store;
}

const FoldAssignment& Experiment::folds() {
  if (!folds_) {
    if (!fs::exists(SplitsPath())) {
      Fail(ErrorCode::kNotFound, "no splits at " + SplitsPath().string() + "; run `prepare` first");
    }
    folds_ = FoldAssignment::Load(SplitsPath());
  }
  return *folds_;
}

ModelSet Experiment::LoadModels(std::span<const MaskingStrategy> strategies) {
  ModelSet set;
  for (MaskingStrategy s : strategies) {
    for (int f = 0; f < config_.split.k; ++f) {
      const fs::path p = CheckpointPath(s, f);
      if (fs::exists(p)) set.Add(std::make_shared<TrainedModel>(LoadCheckpoint(p)));
    }
  }
  set.RequireComplete(strategies, config_.split.k);
  return set;
}

RunRecord Experiment::LoadRecord() {
  RunRecord r;
  if (fs::exists(config_.output_root / "summary.json")) r = LoadRun(config_.output_root);
  r.run_id = config_.name;
  r.config = config_.ToJson();
  r.seed = config_.seed;
  r.manifest_hash = manifest().Fingerprint();
  return r;
}

void Experiment::SaveRecord(const RunRecord& record) {
  WriteSnapshot();
  ExportRun(record, config_.output_root);
}

void Experiment::WriteSnapshot() const {
  WriteJsonFile(config_.output_root / "config.json", config_.ToJson());
}

EvalData Experiment::TestData() {
  EvalData d;
  d.manifest = &manifest();
  d.store = &store();
  d.image_ids = folds().test_ids;
  d.options.target_size = config_.target_size;
  d.max_parallel = config_.max_parallel;
  return d;
}

StageResult Experiment::Run(Stage stage) {
  fs::create_directories(config_.output_root);
  WriteSnapshot();
  LogInfo("stage ", StageName(stage), " in ", config_.output_root.string());
  StageResult r;
  switch (stage) {
    case Stage::kGenerate: r = Generate(); break;
    case Stage::kPrepare: r = Prepare(); break;
    case Stage::kTrain: r = TrainAll(); break;
    case Stage::kEvaluate: r = Evaluate(); break;
    case Stage::kSweep: r = Sweep(); break;
    case Stage::kEmbed: r = Embed(); break;
    case Stage::kAttribute: r = Attribute(); break;
    case Stage::kReport: r = Report(); break;
  }
  for (const auto& note : r.notes) LogInfo("  ", note);
  LogInfo(StageName(stage), ": ", r.units_run, " run, ", r.units_skipped, " skipped");
  return r;
}

StageResult Experiment::Generate() {
  StageResult r;
  r.stage = Stage::kGenerate;
  std::vector<const DatasetSource*> sources = {&config_.dataset};
  if (config_.external && config_.run_ood) sources.push_back(&*config_.external);
  for (const DatasetSource* src : sources) {
    if (!src->synthetic) {
      if (!fs::exists(ManifestPath(*src))) {
        Fail(ErrorCode::kNotFound, "manifest " + ManifestPath(*src).string() + " does not exist");
      }
      r.notes.push_back("using manifest " + ManifestPath(*src).string());
      ++r.units_skipped;
      continue;
    }
    const fs::path dir = DatasetDir(*src);
    const fs::path marker = dir / "generator.json";
    if (fs::exists(marker) && ReadJsonFile(marker) == src->ToJson() &&
        fs::exists(dir / "manifest.csv")) {
      ++r.units_skipped;
      r.notes.push_back("dataset present at " + dir.string());
      continue;
    }
    const SyntheticDataset data = GenerateSynthetic(src->generator);
    WriteSyntheticDataset(data, dir);
    WriteJsonFile(marker, src->ToJson());
    ++r.units_run;
    r.notes.push_back("wrote " + std::to_string(data.images.size()) + " images to " + dir.string());
  }
  main_.reset();
  external_.reset();
  return r;
}

StageResult Experiment::Prepare() {
  StageResult r;
  r.stage = Stage::kPrepare;
  const FoldAssignment fresh = Split(manifest(), config_.split);
  if (fs::exists(SplitsPath())) {
    const FoldAssignment old = FoldAssignment::Load(SplitsPath());
    if (old == fresh) {
      ++r.units_skipped;
      folds_ = old;
      return r;
    }
    if (fs::exists(config_.output_root / "models")) {
      Fail(ErrorCode::kConfigError, "splits changed but models exist in " +
                                        (config_.output_root / "models").string() +
                                        "; use a fresh output_root");
    }
  }
  fresh.Save(SplitsPath());
  folds_ = fresh;
  ++r.units_run;
  r.notes.push_back(std::to_string(fresh.test_ids.size()) + " test images, " +
                    std::to_string(fresh.folds.size()) + " folds");
  return r;
}

StageResult Experiment::TrainAll() {
  StageResult r;
  r.stage = Stage::kTrain;
  const DatasetManifest& m = manifest();
  const FoldAssignment& fa = folds();
  const json fingerprint = {{"train", config_.train.ToJson()},
                            {"manifest", HexDigest(m.Fingerprint())},
                            {"splits", HexDigest(Fnv1a64(fa.ToJson().dump()))},
                            {"target_size", config_.target_size}};
  const fs::path fp_path = config_.output_root / "models" / "fingerprint.json";
  if (fs::exists(fp_path)) {
    if (ReadJsonFile(fp_path) != fingerprint) {
      Fail(ErrorCode::kConfigError, "models in " + fp_path.parent_path().string() +
                                        " were trained with a different configuration");
    }
  } else {
    WriteJsonFile(fp_path, fingerprint);
  }

  std::vector<std::pair<MaskingStrategy, int>> todo;
  for (MaskingStrategy s : config_.strategies) {
    for (int f = 0; f < config_.split.k; ++f) {
      if (fs::exists(CheckpointPath(s, f))) {
        ++r.units_skipped;
      } else {
        todo.emplace_back(s, f);
      }
    }
  }
  const ImageStore& st = store();
  MaterializeOptions opt;
  opt.target_size = config_.target_size;
  std::mutex log_mu;
  ParallelFor(todo.size(), config_.max_parallel, [&](size_t u) {
    const auto [s, f] = todo[u];
    const MaskedView train(m, st, fa.folds[f].train_ids, s, opt);
    const MaskedView val(m, st, fa.folds[f].val_ids, s, opt);
    const TrainedModel model = Train(config_.train, train, val, f);
    const fs::path ckpt = CheckpointPath(s, f);
    WriteHistoryCsv(fs::path(ckpt).replace_extension(".history.csv"), model.history);
    SaveCheckpoint(ckpt, model);
    std::lock_guard lock(log_mu);
    LogInfo("trained ", StrategyName(s), " fold ", f, ": best epoch ", model.best_epoch,
            " val auc ", model.history[model.best_epoch - 1].val_auc);
  });
  r.units_run = static_cast<int>(todo.size());
  return r;
}

StageResult Experiment::Evaluate() {
  StageResult r;
  r.stage = Stage::kEvaluate;
  const auto& strategies = config_.strategies;
  const ModelSet models = LoadModels(strategies);
  const EvalData test = TestData();
  const PredictionGrid grid = PredictGrid(models, strategies, strategies, config_.split.k, test);
  RunRecord record = LoadRecord();
  record.matrices = CrossMaskingMatrix(grid);
  record.comparisons = CompareStrategies(grid, config_.alpha, config_.min_folds);

  CsvTable preds;
  preds.header = {"image_id", "train_strategy", "fold", "eval_strategy", "class_name",
                  "probability"};
  for (size_t row = 0; row < strategies.size(); ++row) {
    for (int f = 0; f < grid.folds; ++f) {
      for (size_t col = 0; col < strategies.size(); ++col) {
        for (size_t c = 0; c < grid.num_classes(); ++c) {
          const auto s = grid.ClassScores(row, f, col, c);
          for (size_t i = 0; i < s.size(); ++i) {
            preds.rows.push_back({grid.image_ids[i], std::string(StrategyName(strategies[row])),
                                  std::to_string(f), std::string(StrategyName(strategies[col])),
                                  grid.class_names[c], FormatDouble(s[i])});
          }
        }
      }
    }
  }
  WriteCsvFile(config_.output_root / "predictions" / "test.csv", preds);
  ++r.units_run;

  record.ood.reset();
  if (config_.run_ood) {
    if (!external_) {
      const fs::path p = ManifestPath(*config_.external);
      if (!fs::exists(p)) {
        Fail(ErrorCode::kNotFound, "no external dataset at " + p.string() +
                                       "; run `generate` first");
      }
      external_ = std::make_unique<Data>();
      external_->manifest = ReadManifestCsv(p);
      external_->manifest.Validate();
      external_->store = std::make_unique<DiskImageStore>(external_->manifest.root);
    }
    EvalData ext;
    ext.manifest = &external_->manifest;
    ext.store = external_->store.get();
    for (const auto& s : external_->manifest.samples) ext.image_ids.push_back(s.image_id);
    ext.options.target_size = config_.target_size;
    ext.max_parallel = config_.max_parallel;
    record.ood = OodEvaluate(models, strategies, config_.split.k, manifest().class_names, ext,
                             config_.alpha, config_.min_folds);
    ++r.units_run;
  }

  if (config_.run_study) {
    const size_t k = grid.num_classes();
    std::vector<StrategyPredictions> per_strategy;
    for (size_t row = 0; row < strategies.size(); ++row) {
      StrategyPredictions p;
      p.strategy = strategies[row];
      p.image_ids = grid.image_ids;
      p.probabilities.assign(grid.image_ids.size() * k, 0.0f);
      for (int f = 0; f < grid.folds; ++f) {
        const auto& s = grid.scores[(row * grid.folds + f) * strategies.size() + row];
        for (size_t i = 0; i < s.size(); ++i) p.probabilities[i] += s[i] / grid.folds;
      }
      per_strategy.push_back(std::move(p));
    }
    const StudyPlan main = SelectStudyImages(per_strategy, manifest(), config_.study.seed);
    std::vector<std::string> pool = folds().folds[0].train_ids;
    const auto& val = folds().folds[0].val_ids;
    pool.insert(pool.end(), val.begin(), val.end());
    const StudyPlan pilot =
        SelectPilotImages(pool, manifest(), config_.study.seed, config_.study.pilot_count);
    for (const StudyPlan* plan : {&pilot, &main}) {
      const fs::path path = PlanPath(plan->phase);
      if (fs::exists(path) && fs::exists(AnnotationLogPath()) &&
          StudyPlan::FromJson(ReadJsonFile(path)) != *plan) {
        Fail(ErrorCode::kConfigError, "study plan changed but annotations exist in " +
                                          AnnotationLogPath().string());
      }
      WriteJsonFile(path, plan->ToJson());
    }
    r.notes.push_back("study plan with " + std::to_string(main.items.size()) + " items");
    ++r.units_run;
  }
  SaveRecord(record);
  return r;
}

StageResult Experiment::Sweep() {
  StageResult r;
  r.stage = Stage::kSweep;
  RunRecord record = LoadRecord();
  record.curves.clear();
  const EvalData test = TestData();
  if (config_.dilation.subgroup_class < 0 ||
      config_.dilation.subgroup_class >= static_cast<int>(manifest().class_names.size())) {
    Fail(ErrorCode::kConfigError, "dilation.class is outside the class list");
  }
  for (MaskingStrategy s : config_.dilation.strategies) {
    if (!Contains(config_.strategies, s)) {
      Fail(ErrorCode::kConfigError, std::string(StrategyName(s)) + " is swept but not trained");
    }
    const MaskingStrategy one[] = {s};
    const ModelSet models = LoadModels(one);
    std::vector<const TrainedModel*> fold_models;
    for (int f = 0; f < config_.split.k; ++f) fold_models.push_back(models.Find(s, f));
    for (DilationSubgroup g : config_.dilation.subgroups) {
      auto curves = DilationSweep(fold_models, test, s, config_.dilation.factors, g,
                                  config_.dilation.subgroup_class);
      record.curves.insert(record.curves.end(), curves.begin(), curves.end());
      ++r.units_run;
    }
  }
  SaveRecord(record);
  return r;
}

StageResult Experiment::Embed() {
  StageResult r;
  r.stage = Stage::kEmbed;
  if (!config_.run_embeddings) {
    r.notes.push_back("disabled by analysis.embeddings");
    return r;
  }
  const auto& e = config_.embeddings;
  if (!Contains(config_.strategies, MaskingStrategy::kFull)) {
    Fail(ErrorCode::kConfigError, "embeddings need FULL among the strategies");
  }
  const fs::path ckpt = CheckpointPath(e.train_strategy, e.fold);
  if (!fs::exists(ckpt)) Fail(ErrorCode::kIncompleteRun, "missing " + ckpt.string());
  const TrainedModel model = LoadCheckpoint(ckpt);
  std::vector<std::string> ids = folds().test_ids;
  std::sort(ids.begin(), ids.end());
  if (ids.size() > static_cast<size_t>(e.max_images)) ids.resize(e.max_images);
  MaterializeOptions opt;
  opt.target_size = config_.target_size;
  const fs::path cache =
      config_.output_root / "cache" / "embeddings" / ("n" + std::to_string(ids.size()));
  const uint64_t hash = ModelHash(model);

  std::vector<EmbeddingSet> sets;
  std::vector<MaskingStrategy> order = {MaskingStrategy::kFull};
  for (MaskingStrategy s : config_.strategies) {
    if (s != MaskingStrategy::kFull) order.push_back(s);
  }
  for (MaskingStrategy s : order) {
    if (auto hit = LoadEmbeddings(cache, hash, s)) {
      sets.push_back(std::move(*hit));
      ++r.units_skipped;
      continue;
    }
    const MaskedView view(manifest(), store(), ids, s, opt);
    sets.push_back(ExtractEmbeddings(model, view));
    SaveEmbeddings(cache, hash, sets.back());
    ++r.units_run;
  }
  RunRecord record = LoadRecord();
  record.cosine.clear();
  for (size_t i = 1; i < sets.size(); ++i) {
    record.cosine.push_back(CosineSimilarityReport(sets[0], sets[i], manifest()));
  }
  record.projection = Project2d(sets, e.tsne);
  record.silhouettes.clear();
  const size_t n = ids.size();
  for (size_t i = 1; i < sets.size(); ++i) {
    std::vector<double> pts;
    std::vector<int> labels;
    for (size_t j = 0; j < n; ++j) {
      for (size_t which : {size_t{0}, i}) {
        const ProjectedPoint& p = record.projection[which * n + j];
        pts.push_back(p.x);
        pts.push_back(p.y);
        labels.push_back(which == 0 ? 0 : 1);
      }
    }
    record.silhouettes[std::string(StrategyName(sets[i].strategy))] = Silhouette(pts, labels);
  }
  SaveRecord(record);
  return r;
}

StageResult Experiment::Attribute() {
  StageResult r;
  r.stage = Stage::kAttribute;
  if (!config_.run_attribution) {
    r.notes.push_back("disabled by analysis.attribution");
    return r;
  }
  const auto& a = config_.attribution;
  const int k = static_cast<int>(manifest().class_names.size());
  if (a.class_index < 0 || a.class_index >= k) {
    Fail(ErrorCode::kConfigError, "attribution.class is outside the class list");
  }
  const fs::path ckpt = CheckpointPath(a.train_strategy, a.fold);
  if (!fs::exists(ckpt)) Fail(ErrorCode::kIncompleteRun, "missing " + ckpt.string());
  const TrainedModel model = LoadCheckpoint(ckpt);
  std::vector<std::string> ids;
  std::vector<std::string> test = folds().test_ids;
  std::sort(test.begin(), test.end());
  for (const auto& id : test) {
    if (a.positives_only && manifest().Find(id)->labels[a.class_index] == 0) continue;
    ids.push_back(id);
    if (ids.size() == static_cast<size_t>(a.max_images)) break;
  }
  if (ids.empty()) Fail(ErrorCode::kInsufficientImages, "no test images to explain");
  MaterializeOptions opt;
  opt.target_size = config_.target_size;
  const MaskedView view(manifest(), store(), ids, model.strategy, opt);
  const SegmentMap segments = GridSegments(config_.target_size, config_.target_size, a.segments);
  const ScoreFunction score = ModelScore(model, a.class_index);
  std::vector<AttributionEntry> entries(view.size());
  ParallelFor(view.size(), config_.max_parallel, [&](size_t i) {
    const Image image = view.GetRaw(i);
    ShapOptions so;
    so.n_evaluations = a.n_evaluations;
    so.seed = config_.seed + i;
    AttributionEntry& e = entries[i];
    e.image_id = view.sample(i).image_id;
    e.strategy = model.strategy;
    e.fold = a.fold;
    e.class_name = manifest().class_names[a.class_index];
    e.height = image.height;
    e.width = image.width;
    e.segments = segments.count;
    e.map = KernelShap(score, image, segments, a.class_index, so);
    WriteOverlayPng(config_.output_root / "attributions" /
                        (e.image_id + "_" + std::string(StrategyName(e.strategy)) + ".png"),
                    image, segments, e.map);
  });
  r.units_run = static_cast<int>(entries.size());
  RunRecord record = LoadRecord();
  record.attributions = std::move(entries);
  SaveRecord(record);
  return r;
}

StageResult Experiment::Report() {
  StageResult r;
  r.stage = Stage::kReport;
  SaveRecord(LoadRecord());
  ++r.units_run;
  return r;
}

struct StudyServer::State {
  Experiment* experiment = nullptr;
  std::unique_ptr<AnnotationStore> store;
  std::unique_ptr<StudySession> session;
  std::unique_ptr<StudyService> service;
};

StudyServer::StudyServer(Experiment* experiment) : state_(std::make_unique<State>()) {
  state_->experiment = experiment;
  const fs::path main_path = experiment->PlanPath(StudyPhase::kMain);
  if (!fs::exists(main_path)) {
    Fail(ErrorCode::kNotFound, "no study plan at " + main_path.string() +
                                   "; run `evaluate` with analysis.study enabled");
  }
  StudyPlan main = StudyPlan::FromJson(ReadJsonFile(main_path));
  std::optional<StudyPlan> pilot;
  if (fs::exists(experiment->PlanPath(StudyPhase::kPilot))) {
    pilot = StudyPlan::FromJson(ReadJsonFile(experiment->PlanPath(StudyPhase::kPilot)));
  }
  const DatasetManifest& m = experiment->manifest();
  state_->store = std::make_unique<AnnotationStore>(experiment->AnnotationLogPath());
  state_->session = std::make_unique<StudySession>(std::move(pilot), std::move(main),
                                                   state_->store.get());
  const ImageStore* images = &experiment->store();
  const int size = experiment->config().target_size;
  const DatasetManifest* manifest = &m;
  state_->service = std::make_unique<StudyService>(
      state_->session.get(), &m, [manifest, images, size](const StudyItem& item) {
        MaterializeOptions opt;
        opt.target_size = size;
        const MaskedView view(*manifest, *images, {item.image_id}, item.strategy, opt);
        return view.GetRaw(0);
      });
}

StudyServer::~StudyServer() { Stop(); }

int StudyServer::Start(const StudyServiceOptions& options) {
  return state_->service->Start(options);
}

void StudyServer::Wait() { state_->service->Wait(); }

void StudyServer::Stop() {
  if (state_ && state_->service) state_->service->Stop();
}

}  // namespace maskaudit
