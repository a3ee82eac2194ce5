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

#include "experiment/config.h"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <sstream>

#include "core/error.h"
#include "core/file_util.h"
#include "evaluation/pipeline.h"

namespace maskaudit {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Collects every problem before failing.
class Diagnostics {
 public:
  void Add(const std::string& path, const std::string& message) {
    errors_.push_back(path + ": " + message);
  }
  bool ok() const { return errors_.empty(); }
  [[noreturn]] void Throw() const {
    std::ostringstream os;
    os << errors_.size() << " config error" << (errors_.size() == 1 ? "" : "s") << ":";
    for (const auto& e : errors_) os << "\n  " << e;
    Fail(ErrorCode::kConfigError, os.str());
  }

 private:
  std::vector<std::string> errors_;
};

// Typed view of one JSON object with a dotted path for messages.
class Section {
 public:
  Section(const json* j, std::string path, Diagnostics* d) : j_(j), path_(std::move(path)), d_(d) {
    if (j_ != nullptr && !j_->is_object()) {
      d_->Add(path_, "must be an object");
      j_ = nullptr;
    }
  }

  bool present() const { return j_ != nullptr; }
  bool has(const char* key) const { return j_ != nullptr && j_->contains(key); }
  std::string Path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  template <typename T>
  void Get(const char* key, T* out) const {
    if (!has(key)) return;
    try {
      *out = (*j_)[key].get<T>();
    } catch (const json::exception&) {
      d_->Add(Path(key), "has the wrong type");
    }
  }

  Section Child(const char* key) const {
    return Section(has(key) ? &(*j_)[key] : nullptr, Path(key), d_);
  }
  const json* raw(const char* key) const { return has(key) ? &(*j_)[key] : nullptr; }

  void Known(std::initializer_list<const char*> keys) const {
    if (j_ == nullptr) return;
    for (const auto& [k, v] : j_->items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* s) { return k == s; })) {
        d_->Add(path_.empty() ? k : path_ + "." + k, "is not a known key");
      }
    }
  }

  Diagnostics* diagnostics() const { return d_; }

 private:
  const json* j_;
  std::string path_;
  Diagnostics* d_;
};

json GeneratorJson(const SyntheticConfig& c) {
  return {{"n_samples", c.n_samples},
          {"image_size", c.image_size},
          {"roi_feature_strength", c.roi_feature_strength},
          {"shortcut_strength", c.shortcut_strength},
          {"size_confound", c.size_confound},
          {"prevalence", c.prevalence},
          {"invert_tag", c.invert_tag},
          {"texture_strokes", c.texture_strokes},
          {"seed", c.seed},
          {"id_prefix", c.id_prefix}};
}

void ReadGenerator(const Section& s, SyntheticConfig* c) {
  s.Known({"n_samples", "image_size", "roi_feature_strength", "shortcut_strength",
           "size_confound", "prevalence", "invert_tag", "texture_strokes", "seed", "id_prefix"});
  s.Get("n_samples", &c->n_samples);
  s.Get("image_size", &c->image_size);
  s.Get("roi_feature_strength", &c->roi_feature_strength);
  s.Get("shortcut_strength", &c->shortcut_strength);
  s.Get("size_confound", &c->size_confound);
  s.Get("prevalence", &c->prevalence);
  s.Get("invert_tag", &c->invert_tag);
  s.Get("texture_strokes", &c->texture_strokes);
  s.Get("seed", &c->seed);
  s.Get("id_prefix", &c->id_prefix);
}

void ReadSource(const Section& s, DatasetSource* src, Diagnostics* d) {
  std::string source = src->synthetic ? "synthetic" : "manifest";
  s.Get("source", &source);
  if (source == "synthetic") {
    src->synthetic = true;
    ReadGenerator(s.Child("synthetic"), &src->generator);
    try {
      src->generator.Validate();
    } catch (const Error& e) {
      d->Add(s.Path("synthetic"), e.what());
    }
  } else if (source == "manifest") {
    src->synthetic = false;
    std::string path;
    s.Get("manifest", &path);
    if (path.empty()) d->Add(s.Path("manifest"), "is required when source is manifest");
    src->manifest = path;
  } else {
    d->Add(s.Path("source"), "must be synthetic or manifest");
  }
}

template <typename T, typename ParseFn>
void ReadEnumList(const Section& s, const char* key, std::vector<T>* out, ParseFn parse) {
  std::vector<std::string> names;
  if (!s.has(key)) return;
  s.Get(key, &names);
  std::vector<T> parsed;
  for (const auto& n : names) {
    try {
      parsed.push_back(parse(n));
    } catch (const Error& e) {
      s.diagnostics()->Add(s.Path(key), e.what());
    }
  }
  *out = parsed;
}

void ReadStrategy(const Section& s, const char* key, MaskingStrategy* out) {
  std::string name;
  if (!s.has(key)) return;
  s.Get(key, &name);
  try {
    *out = ParseStrategy(name);
  } catch (const Error& e) {
    s.diagnostics()->Add(s.Path(key), e.what());
  }
}

std::vector<std::string> StrategyNames(const std::vector<MaskingStrategy>& v) {
  std::vector<std::string> out;
  for (auto s : v) out.emplace_back(StrategyName(s));
  return out;
}

fs::path Resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

json DatasetSource::ToJson() const {
  if (synthetic) return {{"source", "synthetic"}, {"synthetic", GeneratorJson(generator)}};
  return {{"source", "manifest"}, {"manifest", manifest.string()}};
}

json ExperimentConfig::ToJson() const {
  json j;
  j["name"] = name;
  j["seed"] = seed;
  j["output_root"] = output_root.string();
  j["data_root"] = data_root.string();
  j["dataset"] = dataset.ToJson();
  j["dataset"]["target_size"] = target_size;
  j["dataset"]["split"] = {{"k", split.k},
                           {"test_fraction", split.test_fraction},
                           {"group_by_patient", split.group_by_patient}};
  if (external) j["external"] = external->ToJson();
  j["train"] = train.ToJson();
  j["strategies"] = StrategyNames(strategies);
  std::vector<std::string> subgroups;
  for (auto g : dilation.subgroups) subgroups.emplace_back(SubgroupName(g));
  j["dilation"] = {{"factors", dilation.factors},
                   {"strategies", StrategyNames(dilation.strategies)},
                   {"subgroups", subgroups},
                   {"class", dilation.subgroup_class}};
  j["analysis"] = {{"embeddings", run_embeddings},
                   {"attribution", run_attribution},
                   {"ood", run_ood},
                   {"study", run_study}};
  j["embeddings"] = {{"train_strategy", std::string(StrategyName(embeddings.train_strategy))},
                     {"fold", embeddings.fold},
                     {"max_images", embeddings.max_images},
                     {"perplexity", embeddings.tsne.perplexity},
                     {"iterations", embeddings.tsne.iterations},
                     {"seed", embeddings.tsne.seed}};
  j["attribution"] = {{"train_strategy", std::string(StrategyName(attribution.train_strategy))},
                      {"fold", attribution.fold},
                      {"segments", attribution.segments},
                      {"n_evaluations", attribution.n_evaluations},
                      {"max_images", attribution.max_images},
                      {"class", attribution.class_index},
                      {"positives_only", attribution.positives_only}};
  j["study"] = {{"seed", study.seed}, {"pilot_count", study.pilot_count}};
  j["alpha"] = alpha;
  j["min_folds"] = min_folds;
  j["max_parallel"] = max_parallel;
  return j;
}

ExperimentConfig ParseExperimentConfig(const json& j, const fs::path& base_dir,
                                       const std::string& data_root_override) {
  Diagnostics d;
  if (!j.is_object()) {
    d.Add("(root)", "config must be a JSON object");
    d.Throw();
  }
  ExperimentConfig c;
  const Section root(&j, "", &d);
  root.Known({"name", "seed", "output_root", "data_root", "dataset", "external", "train",
              "strategies", "dilation", "analysis", "embeddings", "attribution", "study",
              "alpha", "min_folds", "max_parallel"});
  root.Get("name", &c.name);
  if (c.name.empty()) {
    d.Add("name", "is required");
  } else if (!std::all_of(c.name.begin(), c.name.end(), [](char ch) {
               return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' ||
                      ch == '.';
             })) {
    d.Add("name", "may contain only letters, digits, '_', '-' and '.'");
  }
  root.Get("seed", &c.seed);
  std::string out = "runs/" + c.name, data;
  root.Get("output_root", &out);
  root.Get("data_root", &data);
  c.output_root = Resolve(base_dir, out);
  c.data_root = data.empty() ? c.output_root / "data" : Resolve(base_dir, data);
  if (!data_root_override.empty()) c.data_root = Resolve(fs::current_path(), data_root_override);

  // Dataset.
  const Section ds = root.Child("dataset");
  if (!ds.present()) d.Add("dataset", "is required");
  ds.Known({"source", "synthetic", "manifest", "target_size", "split"});
  c.dataset.generator.seed = c.seed;
  ReadSource(ds, &c.dataset, &d);
  const Section sp = ds.Child("split");
  sp.Known({"k", "test_fraction", "group_by_patient"});
  c.split.seed = c.seed;
  sp.Get("k", &c.split.k);
  sp.Get("test_fraction", &c.split.test_fraction);
  sp.Get("group_by_patient", &c.split.group_by_patient);
  if (c.split.k < 2) d.Add("dataset.split.k", "must be at least 2");
  if (!(c.split.test_fraction > 0.0 && c.split.test_fraction < 1.0)) {
    d.Add("dataset.split.test_fraction", "must lie in (0, 1)");
  }

  // External set: a synthetic block patches the main generator.
  if (root.has("external")) {
    const Section ex = root.Child("external");
    ex.Known({"source", "synthetic", "manifest"});
    DatasetSource ext;
    ext.synthetic = c.dataset.synthetic;
    ext.generator = c.dataset.generator;
    ext.generator.id_prefix = "ext";
    ReadSource(ex, &ext, &d);
    c.external = ext;
  }

  // Training: defaults by data source, then the user's keys.
  TrainConfig base = c.dataset.synthetic ? TrainConfig::DeskDefaults() : TrainConfig::ChestDefaults();
  base.seed = c.seed;
  if (const json* t = root.raw("train")) {
    json merged = base.ToJson();
    if (t->is_object()) {
      merged.merge_patch(*t);
    } else {
      d.Add("train", "must be an object");
    }
    try {
      c.train = TrainConfig::FromJson(merged);
      c.train.Validate();
    } catch (const Error& e) {
      d.Add("train", e.what());
    }
  } else {
    c.train = base;
  }
  c.target_size = c.train.input_size;
  if (ds.has("target_size")) {
    ds.Get("target_size", &c.target_size);
    if (c.target_size != c.train.input_size) {
      d.Add("dataset.target_size", "must equal train.input_size (" +
                                       std::to_string(c.train.input_size) + ")");
    }
  }

  c.strategies.assign(kAllStrategies.begin(), kAllStrategies.end());
  ReadEnumList(root, "strategies", &c.strategies, ParseStrategy);
  if (c.strategies.empty()) d.Add("strategies", "must list at least one strategy");
  if (std::set<MaskingStrategy>(c.strategies.begin(), c.strategies.end()).size() !=
      c.strategies.size()) {
    d.Add("strategies", "contains duplicates");
  }
  const auto trained = [&](MaskingStrategy s) {
    return std::find(c.strategies.begin(), c.strategies.end(), s) != c.strategies.end();
  };

  const Section dil = root.Child("dilation");
  dil.Known({"factors", "strategies", "subgroups", "class"});
  c.dilation.factors.assign(kDefaultDilationFactors.begin(), kDefaultDilationFactors.end());
  dil.Get("factors", &c.dilation.factors);
  for (size_t i = 0; i < c.dilation.factors.size(); ++i) {
    if (c.dilation.factors[i] < 0 || (i > 0 && c.dilation.factors[i] <= c.dilation.factors[i - 1])) {
      d.Add("dilation.factors", "must be non-negative and strictly increasing");
      break;
    }
  }
  ReadEnumList(dil, "strategies", &c.dilation.strategies, ParseStrategy);
  for (auto s : c.dilation.strategies) {
    if (s != MaskingStrategy::kNoRoi && s != MaskingStrategy::kOnlyRoi) {
      d.Add("dilation.strategies", "only NO_ROI and ONLY_ROI can be swept");
    }
  }
  ReadEnumList(dil, "subgroups", &c.dilation.subgroups, ParseSubgroup);
  dil.Get("class", &c.dilation.subgroup_class);

  const Section an = root.Child("analysis");
  an.Known({"embeddings", "attribution", "ood", "study"});
  an.Get("embeddings", &c.run_embeddings);
  an.Get("attribution", &c.run_attribution);
  an.Get("ood", &c.run_ood);
  an.Get("study", &c.run_study);
  if (c.run_ood && !c.external) d.Add("analysis.ood", "needs an external dataset");

  const Section em = root.Child("embeddings");
  em.Known({"train_strategy", "fold", "max_images", "perplexity", "iterations", "seed"});
  c.embeddings.tsne.seed = c.seed;
  ReadStrategy(em, "train_strategy", &c.embeddings.train_strategy);
  em.Get("fold", &c.embeddings.fold);
  em.Get("max_images", &c.embeddings.max_images);
  em.Get("perplexity", &c.embeddings.tsne.perplexity);
  em.Get("iterations", &c.embeddings.tsne.iterations);
  em.Get("seed", &c.embeddings.tsne.seed);
  if (c.run_embeddings) {
    if (!trained(c.embeddings.train_strategy)) {
      d.Add("embeddings.train_strategy", "is not among the trained strategies");
    }
    if (!trained(MaskingStrategy::kFull)) d.Add("strategies", "embeddings need FULL");
  }
  if (c.embeddings.fold < 0 || c.embeddings.fold >= c.split.k) {
    d.Add("embeddings.fold", "is outside 0..k-1");
  }
  if (c.embeddings.max_images < 2) d.Add("embeddings.max_images", "must be at least 2");

  const Section at = root.Child("attribution");
  at.Known({"train_strategy", "fold", "segments", "n_evaluations", "max_images", "class",
            "positives_only"});
  ReadStrategy(at, "train_strategy", &c.attribution.train_strategy);
  at.Get("fold", &c.attribution.fold);
  at.Get("segments", &c.attribution.segments);
  at.Get("n_evaluations", &c.attribution.n_evaluations);
  at.Get("max_images", &c.attribution.max_images);
  at.Get("class", &c.attribution.class_index);
  at.Get("positives_only", &c.attribution.positives_only);
  if (c.run_attribution && !trained(c.attribution.train_strategy)) {
    d.Add("attribution.train_strategy", "is not among the trained strategies");
  }
  if (c.attribution.fold < 0 || c.attribution.fold >= c.split.k) {
    d.Add("attribution.fold", "is outside 0..k-1");
  }
  if (c.attribution.segments < 2) d.Add("attribution.segments", "must be at least 2");
  if (c.attribution.n_evaluations < c.attribution.segments + 2) {
    d.Add("attribution.n_evaluations", "must be at least segments + 2");
  }
  if (c.attribution.max_images < 1) d.Add("attribution.max_images", "must be at least 1");

  const Section st = root.Child("study");
  st.Known({"seed", "pilot_count"});
  c.study.seed = c.seed;
  st.Get("seed", &c.study.seed);
  st.Get("pilot_count", &c.study.pilot_count);
  if (c.study.pilot_count < 1) d.Add("study.pilot_count", "must be at least 1");

  root.Get("alpha", &c.alpha);
  root.Get("min_folds", &c.min_folds);
  root.Get("max_parallel", &c.max_parallel);
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) d.Add("alpha", "must lie in (0, 1)");
  if (c.min_folds < 1 || c.min_folds > c.split.k) d.Add("min_folds", "must lie in 1..k");
  if (c.max_parallel < 0) d.Add("max_parallel", "must be >= 0 (0 uses every core)");

  if (!d.ok()) d.Throw();
  return c;
}

ExperimentConfig LoadExperimentConfig(const fs::path& path) {
  json j;
  try {
    j = json::parse(ReadTextFile(path));
  } catch (const json::exception& e) {
    Fail(ErrorCode::kConfigError, path.string() + " is not valid JSON: " + e.what());
  } catch (const Error& e) {
    Fail(ErrorCode::kConfigError, e.what());
  }
  const char* env = std::getenv("MASKAUDIT_DATA_ROOT");
  return ParseExperimentConfig(j, fs::absolute(path).parent_path(), env ? env : "");
}

}  // namespace maskaudit
