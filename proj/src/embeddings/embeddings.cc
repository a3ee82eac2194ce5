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

#include "embeddings/embeddings.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstring>
#include <random>

#include "core/csv.h"
#include "core/error.h"
#include "core/file_util.h"

namespace maskaudit {
namespace {

constexpr int kBatch = 64;

CosineSummary SummarizeCosine(const std::vector<double>& v) {
  CosineSummary s;
  s.count = v.size();
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / v.size();
  double sq = 0.0;
  for (double x : v) sq += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(sq / v.size());
  return s;
}

nlohmann::json SummaryJson(const CosineSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
}

// Row i of the affinity matrix for a Gaussian kernel whose entropy matches
// log(perplexity), found by bisection on the precision.
void ConditionalRow(const std::vector<double>& dist, size_t n, size_t i,
                    double perplexity, double* row) {
  const double target = std::log(perplexity);
  double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
  const double* di = dist.data() + i * n;
  for (int iter = 0; iter < 100; ++iter) {
    double sum = 0.0, dot = 0.0;
    for (size_t j = 0; j < n; ++j) {
      row[j] = j == i ? 0.0 : std::exp(-beta * di[j]);
      sum += row[j];
      dot += row[j] * di[j];
    }
    if (sum <= 0.0) sum = std::numeric_limits<double>::min();
    const double entropy = std::log(sum) + beta * dot / sum;
    for (size_t j = 0; j < n; ++j) row[j] /= sum;
    const double diff = entropy - target;
    if (std::fabs(diff) < 1e-5) break;
    if (diff > 0.0) {
      lo = beta;
      beta = std::isinf(hi) ? beta * 2.0 : (beta + hi) / 2.0;
    } else {
      hi = beta;
      beta = (beta + lo) / 2.0;
    }
  }
}

}  // namespace

EmbeddingSet ExtractEmbeddings(const TrainedModel& model, const MaskedView& view) {
  const Network& net = *model.network;
  if (net.embedding_dim() == 0) {
    Fail(ErrorCode::kUnsupportedBackbone,
         "backbone '" + net.spec().backbone + "' has no pooled feature tap");
  }
  EmbeddingSet set;
  set.strategy = view.strategy();
  set.dim = net.embedding_dim();
  const size_t len = net.input_length();
  std::vector<float> batch, logits, emb;
  Workspace ws;
  for (size_t start = 0; start < view.size(); start += kBatch) {
    const size_t end = std::min(view.size(), start + kBatch);
    batch.resize((end - start) * len);
    for (size_t i = start; i < end; ++i) {
      const Image im = Normalize(view.GetRaw(i), model.normalization);
      if (im.data.size() != len) {
        Fail(ErrorCode::kShapeMismatch, "image size differs from the model input");
      }
      std::copy(im.data.begin(), im.data.end(), batch.begin() + (i - start) * len);
      set.image_ids.push_back(view.sample(i).image_id);
    }
    net.Forward(batch.data(), static_cast<int>(end - start), &ws, &logits, &emb);
    set.vectors.insert(set.vectors.end(), emb.begin(), emb.end());
  }
  return set;
}

std::optional<double> CosineSimilarity(std::span<const float> a,
                                       std::span<const float> b) {
  if (a.size() != b.size()) {
    Fail(ErrorCode::kShapeMismatch, "cosine of vectors with different length");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

nlohmann::json CosineReport::ToJson() const {
  nlohmann::json j;
  j["strategy"] = std::string(StrategyName(strategy));
  j["all"] = SummaryJson(all);
  j["excluded_zero_norm"] = excluded_zero_norm;
  j["class_names"] = class_names;
  j["per_class"] = nlohmann::json::object();
  for (size_t c = 0; c < class_names.size(); ++c) {
    j["per_class"][class_names[c]] = SummaryJson(per_class[c]);
  }
  return j;
}

CosineReport CosineReport::FromJson(const nlohmann::json& j) {
  const auto summary = [](const nlohmann::json& js) {
    return CosineSummary{js.at("mean").get<double>(), js.at("std").get<double>(),
                         js.at("count").get<size_t>()};
  };
  CosineReport r;
  try {
    r.strategy = ParseStrategy(j.at("strategy").get<std::string>());
    r.all = summary(j.at("all"));
    r.excluded_zero_norm = j.at("excluded_zero_norm").get<size_t>();
    r.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& name : r.class_names) {
      r.per_class.push_back(summary(j.at("per_class").at(name)));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("cosine report: ") + e.what());
  }
  return r;
}

CosineReport CosineSimilarityReport(const EmbeddingSet& full,
                                    const EmbeddingSet& masked,
                                    const DatasetManifest& manifest) {
  if (full.image_ids != masked.image_ids || full.dim != masked.dim) {
    Fail(ErrorCode::kShapeMismatch,
         "embedding sets must share image order and dimension");
  }
  CosineReport report;
  report.strategy = masked.strategy;
  report.class_names = manifest.class_names;
  std::vector<double> all;
  std::vector<std::vector<double>> by_class(manifest.class_names.size());
  for (size_t i = 0; i < full.size(); ++i) {
    const auto cos = CosineSimilarity(full.row(i), masked.row(i));
    if (!cos) {
      ++report.excluded_zero_norm;
      continue;
    }
    all.push_back(*cos);
    const Sample* s = manifest.Find(full.image_ids[i]);
    if (s == nullptr) continue;
    for (size_t c = 0; c < by_class.size(); ++c) {
      if (s->labels[c]) by_class[c].push_back(*cos);
    }
  }
  report.all = SummarizeCosine(all);
  for (const auto& v : by_class) report.per_class.push_back(SummarizeCosine(v));
  return report;
}

std::vector<double> Tsne(std::span<const float> points, size_t n, int d,
                         const TsneOptions& opt) {
  if (points.size() != n * static_cast<size_t>(d)) {
    Fail(ErrorCode::kShapeMismatch, "t-SNE input is not n x d");
  }
  if (!(opt.perplexity > 0.0) || static_cast<double>(n) < 3.0 * opt.perplexity) {
    Fail(ErrorCode::kInvalidArgument,
         "t-SNE needs at least 3 * perplexity points (" + std::to_string(n) +
             " given)");
  }
  std::vector<double> dist(n * n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < d; ++k) {
        const double diff = static_cast<double>(points[i * d + k]) - points[j * d + k];
        s += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = s;
    }
  }
  std::vector<double> p(n * n);
  for (size_t i = 0; i < n; ++i) {
    ConditionalRow(dist, n, i, opt.perplexity, p.data() + i * n);
  }
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i + 1; j < n; ++j) {
      const double v = std::max((p[i * n + j] + p[j * n + i]) / (2.0 * n), 1e-12);
      p[i * n + j] = p[j * n + i] = v;
    }
  }

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> g(0.0, 1e-4);
  std::vector<double> y(n * 2), update(n * 2, 0.0), gains(n * 2, 1.0),
      grad(n * 2), num(n * n);
  for (double& v : y) v = g(rng);
  for (int iter = 0; iter < opt.iterations; ++iter) {
    const double exaggeration =
        iter < opt.exaggeration_iterations ? opt.early_exaggeration : 1.0;
    const double momentum = iter < opt.exaggeration_iterations ? 0.5 : 0.8;
    double z = 0.0;
    for (size_t i = 0; i < n; ++i) {
      num[i * n + i] = 0.0;
      for (size_t j = i + 1; j < n; ++j) {
        const double dx = y[2 * i] - y[2 * j], dy = y[2 * i + 1] - y[2 * j + 1];
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        num[i * n + j] = num[j * n + i] = q;
        z += 2.0 * q;
      }
    }
    for (size_t i = 0; i < n; ++i) {
      double gx = 0.0, gy = 0.0;
      for (size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double q = num[i * n + j];
        const double m = (exaggeration * p[i * n + j] - q / z) * q;
        gx += m * (y[2 * i] - y[2 * j]);
        gy += m * (y[2 * i + 1] - y[2 * j + 1]);
      }
      grad[2 * i] = 4.0 * gx;
      grad[2 * i + 1] = 4.0 * gy;
    }
    for (size_t k = 0; k < y.size(); ++k) {
      const bool same_sign = (grad[k] > 0.0) == (update[k] > 0.0);
      gains[k] = same_sign ? std::max(gains[k] * 0.8, 0.01) : gains[k] + 0.2;
      update[k] = momentum * update[k] - opt.learning_rate * gains[k] * grad[k];
      y[k] += update[k];
    }
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
      mx += y[2 * i];
      my += y[2 * i + 1];
    }
    mx /= n;
    my /= n;
    for (size_t i = 0; i < n; ++i) {
      y[2 * i] -= mx;
      y[2 * i + 1] -= my;
    }
  }
  return y;
}

double Silhouette(std::span<const double> points, std::span<const int> labels) {
  const size_t n = labels.size();
  if (points.size() != 2 * n) Fail(ErrorCode::kShapeMismatch, "points must be n x 2");
  const int k = n == 0 ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<size_t> sizes(k, 0);
  for (int l : labels) {
    if (l < 0) Fail(ErrorCode::kInvalidArgument, "negative cluster label");
    ++sizes[l];
  }
  const auto used = std::count_if(sizes.begin(), sizes.end(),
                                  [](size_t s) { return s > 0; });
  if (used < 2) Fail(ErrorCode::kInvalidArgument, "silhouette needs two clusters");
  double total = 0.0;
  std::vector<double> sum(k);
  for (size_t i = 0; i < n; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0);
    for (size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      sum[labels[j]] += std::hypot(points[2 * i] - points[2 * j],
                                   points[2 * i + 1] - points[2 * j + 1]);
    }
    const int own = labels[i];
    if (sizes[own] <= 1) continue;  // singleton clusters score 0
    const double a = sum[own] / (sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != own && sizes[c] > 0) b = std::min(b, sum[c] / sizes[c]);
    }
    const double denom = std::max(a, b);
    total += denom > 0.0 ? (b - a) / denom : 0.0;
  }
  return total / n;
}

std::vector<ProjectedPoint> Project2d(const std::vector<EmbeddingSet>& sets,
                                      const TsneOptions& options) {
  if (sets.empty()) Fail(ErrorCode::kInvalidArgument, "nothing to project");
  const int d = sets[0].dim;
  std::vector<float> all;
  std::vector<ProjectedPoint> out;
  for (const auto& s : sets) {
    if (s.dim != d) Fail(ErrorCode::kShapeMismatch, "embedding dimensions differ");
    all.insert(all.end(), s.vectors.begin(), s.vectors.end());
    for (const auto& id : s.image_ids) out.push_back({id, s.strategy, 0.0, 0.0});
  }
  const std::vector<double> y = Tsne(all, out.size(), d, options);
  for (size_t i = 0; i < out.size(); ++i) {
    out[i].x = y[2 * i];
    out[i].y = y[2 * i + 1];
  }
  return out;
}

void WriteProjectionCsv(const std::filesystem::path& path,
                        const std::vector<ProjectedPoint>& points) {
  CsvTable t;
  t.header = {"id", "strategy", "x", "y"};
  for (const auto& p : points) {
    t.rows.push_back({p.image_id, std::string(StrategyName(p.strategy)),
                      FormatDouble(p.x), FormatDouble(p.y)});
  }
  WriteCsvFile(path, t);
}

std::vector<ProjectedPoint> ReadProjectionCsv(const std::filesystem::path& path) {
  const CsvTable t = ReadCsvFile(path);
  const size_t id = t.RequireColumn("id"), st = t.RequireColumn("strategy"),
               x = t.RequireColumn("x"), y = t.RequireColumn("y");
  std::vector<ProjectedPoint> out;
  for (const auto& row : t.rows) {
    out.push_back({row[id], ParseStrategy(row[st]), ParseDouble(row[x]),
                   ParseDouble(row[y])});
  }
  return out;
}

std::string EmbeddingCacheKey(uint64_t model_hash, MaskingStrategy strategy) {
  return HexDigest(model_hash) + "_" + std::string(StrategyName(strategy));
}

void SaveEmbeddings(const std::filesystem::path& dir, uint64_t model_hash,
                    const EmbeddingSet& set) {
  const std::string key = EmbeddingCacheKey(model_hash, set.strategy);
  const auto* bytes = reinterpret_cast<const uint8_t*>(set.vectors.data());
  WriteFileBytes(dir / (key + ".f32"),
                 std::span<const uint8_t>(bytes, set.vectors.size() * sizeof(float)));
  const nlohmann::json sidecar = {{"model_hash", HexDigest(model_hash)},
                                  {"strategy", std::string(StrategyName(set.strategy))},
                                  {"dim", set.dim},
                                  {"rows", set.size()},
                                  {"image_ids", set.image_ids}};
  WriteTextFile(dir / (key + ".json"), sidecar.dump(1) + "\n");
}

std::optional<EmbeddingSet> LoadEmbeddings(const std::filesystem::path& dir,
                                           uint64_t model_hash,
                                           MaskingStrategy strategy) {
  const std::string key = EmbeddingCacheKey(model_hash, strategy);
  const auto json_path = dir / (key + ".json");
  const auto data_path = dir / (key + ".f32");
  if (!std::filesystem::exists(json_path) || !std::filesystem::exists(data_path)) {
    return std::nullopt;
  }
  EmbeddingSet set;
  set.strategy = strategy;
  try {
    const auto j = nlohmann::json::parse(ReadTextFile(json_path));
    set.dim = j.at("dim").get<int>();
    set.image_ids = j.at("image_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, json_path.string() + ": " + e.what());
  }
  const std::vector<uint8_t> bytes = ReadFileBytes(data_path);
  if (bytes.size() != set.image_ids.size() * set.dim * sizeof(float)) {
    Fail(ErrorCode::kSchemaError, data_path.string() + ": size disagrees with sidecar");
  }
  set.vectors.resize(set.image_ids.size() * set.dim);
  std::memcpy(set.vectors.data(), bytes.data(), bytes.size());
  return set;
}

}  // namespace maskaudit
