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

#ifndef MASKAUDIT_EMBEDDINGS_EMBEDDINGS_H_
#define MASKAUDIT_EMBEDDINGS_EMBEDDINGS_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "data/manifest.h"
#include "data/materialize.h"
#include "masking/mask_ops.h"
#include "training/trainer.h"

namespace maskaudit {

// Pooled penultimate features, one row per image.
struct EmbeddingSet {
  std::vector<std::string> image_ids;
  MaskingStrategy strategy = MaskingStrategy::kFull;
  int dim = 0;
  std::vector<float> vectors;  // n x dim, row-major

  size_t size() const { return image_ids.size(); }
  std::span<const float> row(size_t i) const {
    return {vectors.data() + i * dim, static_cast<size_t>(dim)};
  }
  bool operator==(const EmbeddingSet&) const = default;
};

// Inputs are normalized with the model's own statistics. Throws
// kUnsupportedBackbone when the model has no pooled tap.
EmbeddingSet ExtractEmbeddings(const TrainedModel& model, const MaskedView& view);

// nullopt when either vector has zero norm.
std::optional<double> CosineSimilarity(std::span<const float> a,
                                       std::span<const float> b);

struct CosineSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  size_t count = 0;
  bool operator==(const CosineSummary&) const = default;
};

struct CosineReport {
  MaskingStrategy strategy = MaskingStrategy::kFull;
  CosineSummary all;
  std::vector<std::string> class_names;
  std::vector<CosineSummary> per_class;  // images positive for that class
  size_t excluded_zero_norm = 0;
  nlohmann::json ToJson() const;
  static CosineReport FromJson(const nlohmann::json& j);
  bool operator==(const CosineReport&) const = default;
};

// Compares each masked embedding to the full-image embedding of the same
// image. Requires identical id order and dimension (kShapeMismatch).
CosineReport CosineSimilarityReport(const EmbeddingSet& full,
                                    const EmbeddingSet& masked,
                                    const DatasetManifest& manifest);

struct TsneOptions {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double learning_rate = 200.0;
  uint64_t seed = 0;
};

// Exact O(n^2) t-SNE of n points in d dimensions. Returns n x 2 row-major.
// Throws kInvalidArgument when n < 3 * perplexity.
std::vector<double> Tsne(std::span<const float> points, size_t n, int d,
                         const TsneOptions& options);

// Mean silhouette coefficient of 2D points (n x 2) under `labels`.
double Silhouette(std::span<const double> points, std::span<const int> labels);

struct ProjectedPoint {
  std::string image_id;
  MaskingStrategy strategy = MaskingStrategy::kFull;
  double x = 0.0;
  double y = 0.0;
  bool operator==(const ProjectedPoint&) const = default;
};

// Concatenates the sets in order and projects them jointly.
std::vector<ProjectedPoint> Project2d(const std::vector<EmbeddingSet>& sets,
                                      const TsneOptions& options);
void WriteProjectionCsv(const std::filesystem::path& path,
                        const std::vector<ProjectedPoint>& points);
std::vector<ProjectedPoint> ReadProjectionCsv(const std::filesystem::path& path);

// Disk cache keyed by (model hash, strategy): `<key>.f32` holds the raw
// float32 matrix, `<key>.json` the ids, strategy and dimension.
std::string EmbeddingCacheKey(uint64_t model_hash, MaskingStrategy strategy);
void SaveEmbeddings(const std::filesystem::path& dir, uint64_t model_hash,
                    const EmbeddingSet& set);
std::optional<EmbeddingSet> LoadEmbeddings(const std::filesystem::path& dir,
                                           uint64_t model_hash,
                                           MaskingStrategy strategy);

}  // namespace maskaudit

#endif  // MASKAUDIT_EMBEDDINGS_EMBEDDINGS_H_
