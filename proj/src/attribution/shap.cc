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

#include "attribution/shap.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "core/error.h"

namespace maskaudit {
namespace {

double Choose(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Calls next(z) for every subset of {0..m-1} with exactly k members.
void ForEachSubset(int m, int k, const std::function<void(std::vector<uint8_t>&)>& next) {
  std::vector<int> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<uint8_t> z(m);
  while (true) {
    std::fill(z.begin(), z.end(), 0);
    for (int i : idx) z[i] = 1;
    next(z);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

struct Design {
  std::vector<std::vector<uint8_t>> coalitions;
  std::vector<double> weights;

  void Add(std::vector<uint8_t> z, double w) {
    coalitions.push_back(std::move(z));
    weights.push_back(w);
  }
};

// Every proper non-empty coalition with its Shapley-kernel weight.
Design EnumeratedDesign(int m) {
  Design d;
  for (int k = 1; k < m; ++k) {
    const double w = (m - 1.0) / (Choose(m, k) * k * (m - k));
    ForEachSubset(m, k, [&](std::vector<uint8_t>& z) { d.Add(z, w); });
  }
  return d;
}

// Sizes whose full enumeration fits the remaining budget are enumerated
// (smallest and largest first); the rest is sampled in complementary pairs
// from the leftover kernel mass.
Design SampledDesign(int m, int budget, std::mt19937_64& rng) {
  Design d;
  const int num_sizes = (m - 1 + 1) / 2;   // ceil((m - 1) / 2)
  const int num_paired = (m - 1) / 2;      // floor((m - 1) / 2)
  std::vector<double> kernel(num_sizes);
  for (int i = 0; i < num_sizes; ++i) {
    const int k = i + 1;
    kernel[i] = (m - 1.0) / (static_cast<double>(k) * (m - k));
    if (i < num_paired) kernel[i] *= 2.0;
  }
  const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& w : kernel) w /= total;

  std::vector<double> remaining_kernel = kernel;
  int left = budget;
  int full_sizes = 0;
  double left_mass = 1.0;
  for (int i = 0; i < num_sizes; ++i) {
    const int k = i + 1;
    const bool paired = i < num_paired;
    const double subsets = Choose(m, k) * (paired ? 2.0 : 1.0);
    const double share = remaining_kernel[i] / left_mass;
    if (share * left < subsets - 1e-9) break;
    // Whole size class fits: enumerate it.
    ++full_sizes;
    left -= static_cast<int>(subsets);
    left_mass -= remaining_kernel[i];
    const double w = kernel[i] / subsets;
    ForEachSubset(m, k, [&](std::vector<uint8_t>& z) {
      d.Add(z, w);
      if (paired) {
        std::vector<uint8_t> c(z.size());
        for (size_t j = 0; j < z.size(); ++j) c[j] = 1 - z[j];
        d.Add(std::move(c), w);
      }
    });
    remaining_kernel[i] = 0.0;
    if (left_mass <= 1e-12) break;
  }
  if (full_sizes < num_sizes && left >= 2) {
    std::vector<double> probs(remaining_kernel.begin() + full_sizes, remaining_kernel.end());
    std::discrete_distribution<int> pick(probs.begin(), probs.end());
    std::vector<int> order(m);
    const int pairs = left / 2;
    const double w = left_mass / (2.0 * pairs);
    for (int p = 0; p < pairs; ++p) {
      const int k = full_sizes + pick(rng) + 1;
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      std::vector<uint8_t> z(m, 0);
      for (int j = 0; j < k; ++j) z[order[j]] = 1;
      std::vector<uint8_t> c(m);
      for (int j = 0; j < m; ++j) c[j] = 1 - z[j];
      d.Add(std::move(z), w);
      d.Add(std::move(c), w);
    }
  }
  return d;
}

// Scores coalitions in batches.
std::vector<double> Evaluate(const ScoreFunction& score, const Image& image,
                             const SegmentMap& segments,
                             const std::vector<std::vector<uint8_t>>& coalitions,
                             int batch_size) {
  std::vector<double> out;
  out.reserve(coalitions.size());
  std::vector<Image> batch;
  for (size_t start = 0; start < coalitions.size(); start += batch_size) {
    const size_t end = std::min(coalitions.size(), start + batch_size);
    batch.clear();
    for (size_t i = start; i < end; ++i) batch.push_back(Occlude(image, segments, coalitions[i]));
    const std::vector<double> s = score(batch);
    if (s.size() != batch.size()) {
      Fail(ErrorCode::kModelOutputError, "score function returned the wrong count");
    }
    for (double v : s) {
      if (!std::isfinite(v)) Fail(ErrorCode::kModelOutputError, "non-finite model output");
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

SegmentMap GridSegments(int height, int width, int target) {
  if (target < 2) Fail(ErrorCode::kInvalidArgument, "need at least two segments");
  if (height < 1 || width < 1 ||
      static_cast<long long>(target) > static_cast<long long>(height) * width) {
    Fail(ErrorCode::kInvalidArgument, "more segments than pixels");
  }
  int best_r = 1, best_c = 1;
  long long best_dev = -1;
  int best_gap = 0;
  for (int r = 1; r <= std::min(height, target); ++r) {
    for (int c : {target / r, (target + r - 1) / r}) {
      c = std::clamp(c, 1, width);
      const long long dev = std::llabs(static_cast<long long>(r) * c - target);
      const int gap = std::abs(r - c);
      const bool better = best_dev < 0 || dev < best_dev ||
                          (dev == best_dev && gap < best_gap) ||
                          (dev == best_dev && gap == best_gap && r < best_r);
      if (better) {
        best_dev = dev;
        best_gap = gap;
        best_r = r;
        best_c = c;
      }
    }
  }
  SegmentMap m;
  m.height = height;
  m.width = width;
  m.grid_rows = best_r;
  m.grid_cols = best_c;
  m.count = best_r * best_c;
  m.ids.resize(static_cast<size_t>(height) * width);
  for (int row = 0; row < height; ++row) {
    const int gr = static_cast<int>(static_cast<long long>(row) * best_r / height);
    for (int col = 0; col < width; ++col) {
      const int gc = static_cast<int>(static_cast<long long>(col) * best_c / width);
      m.ids[static_cast<size_t>(row) * width + col] = gr * best_c + gc;
    }
  }
  return m;
}

ScoreFunction ModelScore(const TrainedModel& model, int class_index) {
  if (class_index < 0 || class_index >= model.network->spec().num_classes) {
    Fail(ErrorCode::kInvalidArgument, "class index out of range");
  }
  return [&model, class_index](std::span<const Image> images) {
    std::vector<Image> norm;
    norm.reserve(images.size());
    for (const Image& im : images) norm.push_back(Normalize(im, model.normalization));
    const std::vector<float> p = Predict(model, norm);
    const int k = model.network->spec().num_classes;
    std::vector<double> out;
    for (size_t i = 0; i < images.size(); ++i) out.push_back(p[i * k + class_index]);
    return out;
  };
}

Image Occlude(const Image& image, const SegmentMap& segments,
              const std::vector<uint8_t>& coalition) {
  if (image.height != segments.height || image.width != segments.width) {
    Fail(ErrorCode::kShapeMismatch, "segment map does not match the image");
  }
  Image out = image;
  for (int c = 0; c < image.channels; ++c) {
    for (int row = 0; row < image.height; ++row) {
      for (int col = 0; col < image.width; ++col) {
        if (!coalition[segments.at(row, col)]) out.at(c, row, col) = kMaskedValue;
      }
    }
  }
  return out;
}

nlohmann::json AttributionMap::ToJson() const {
  return {{"values", values},         {"base_value", base_value},
          {"full_value", full_value}, {"class_index", class_index},
          {"n_evaluations", n_evaluations}, {"exact", exact}};
}

AttributionMap AttributionMap::FromJson(const nlohmann::json& j) {
  AttributionMap a;
  try {
    a.values = j.at("values").get<std::vector<double>>();
    a.base_value = j.at("base_value").get<double>();
    a.full_value = j.at("full_value").get<double>();
    a.class_index = j.at("class_index").get<int>();
    a.n_evaluations = j.at("n_evaluations").get<int>();
    a.exact = j.at("exact").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, std::string("attribution map: ") + e.what());
  }
  return a;
}

AttributionMap KernelShap(const ScoreFunction& score, const Image& image,
                          const SegmentMap& segments, int class_index,
                          const ShapOptions& options) {
  const int m = segments.count;
  if (m < 2) Fail(ErrorCode::kInvalidArgument, "need at least two segments");
  if (options.n_evaluations < m + 2) {
    Fail(ErrorCode::kInvalidArgument,
         "n_evaluations must be at least segments + 2 (" + std::to_string(m + 2) + ")");
  }
  AttributionMap out;
  out.class_index = class_index;
  const bool exact = m < 31 && (1LL << m) <= options.n_evaluations;
  std::mt19937_64 rng(options.seed);
  Design design = exact ? EnumeratedDesign(m) : SampledDesign(m, options.n_evaluations - 2, rng);
  out.exact = exact;

  std::vector<std::vector<uint8_t>> ends = {std::vector<uint8_t>(m, 0),
                                            std::vector<uint8_t>(m, 1)};
  const std::vector<double> fe =
      Evaluate(score, image, segments, ends, options.batch_size);
  out.base_value = fe[0];
  out.full_value = fe[1];
  const std::vector<double> fz =
      Evaluate(score, image, segments, design.coalitions, options.batch_size);
  out.n_evaluations = static_cast<int>(fz.size()) + 2;

  // Eliminate the last value through the efficiency constraint.
  const double delta = out.full_value - out.base_value;
  const Eigen::Index n = static_cast<Eigen::Index>(fz.size());
  Eigen::MatrixXd x(n, m - 1);
  Eigen::VectorXd y(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& z = design.coalitions[i];
    for (int j = 0; j < m - 1; ++j) x(i, j) = static_cast<double>(z[j]) - z[m - 1];
    y(i) = fz[i] - out.base_value - z[m - 1] * delta;
    w(i) = design.weights[i];
  }
  const Eigen::MatrixXd a = x.transpose() * w.asDiagonal() * x;
  const Eigen::VectorXd b = x.transpose() * w.asDiagonal() * y;
  const Eigen::VectorXd phi = a.completeOrthogonalDecomposition().solve(b);
  out.values.assign(phi.data(), phi.data() + m - 1);
  out.values.push_back(delta - phi.sum());
  return out;
}

std::vector<double> ExactShapley(int players,
                                 const std::function<double(uint32_t)>& value) {
  if (players < 1 || players > 20) {
    Fail(ErrorCode::kInvalidArgument, "exact Shapley supports 1..20 players");
  }
  const uint32_t total = 1u << players;
  std::vector<double> v(total);
  for (uint32_t s = 0; s < total; ++s) v[s] = value(s);
  // w[s] = s! (n - s - 1)! / n!
  std::vector<double> w(players);
  for (int s = 0; s < players; ++s) w[s] = 1.0 / (players * Choose(players - 1, s));
  std::vector<double> phi(players, 0.0);
  for (int i = 0; i < players; ++i) {
    const uint32_t bit = 1u << i;
    for (uint32_t s = 0; s < total; ++s) {
      if (s & bit) continue;
      phi[i] += w[std::popcount(s)] * (v[s | bit] - v[s]);
    }
  }
  return phi;
}

RgbRaster RenderOverlay(const Image& image, const SegmentMap& segments,
                        const AttributionMap& attribution) {
  if (image.height != segments.height || image.width != segments.width ||
      attribution.values.size() != static_cast<size_t>(segments.count)) {
    Fail(ErrorCode::kShapeMismatch, "overlay inputs disagree in shape");
  }
  double scale = 0.0;
  for (double v : attribution.values) scale = std::max(scale, std::fabs(v));
  RgbRaster out;
  out.height = image.height;
  out.width = image.width;
  out.pixels.resize(static_cast<size_t>(out.height) * out.width * 3);
  for (int row = 0; row < image.height; ++row) {
    for (int col = 0; col < image.width; ++col) {
      double g = 0.0;
      for (int c = 0; c < image.channels; ++c) g += image.at(c, row, col);
      g = std::clamp(g / image.channels, 0.0, 1.0) * 255.0;
      const double v = attribution.values[segments.at(row, col)];
      const double a = scale > 0.0 ? 0.6 * std::fabs(v) / scale : 0.0;
      const double tint_r = v > 0.0 ? 255.0 : 0.0;
      const double tint_b = v < 0.0 ? 255.0 : 0.0;
      uint8_t* px = &out.pixels[(static_cast<size_t>(row) * out.width + col) * 3];
      px[0] = static_cast<uint8_t>(std::lround((1.0 - a) * g + a * tint_r));
      px[1] = static_cast<uint8_t>(std::lround((1.0 - a) * g));
      px[2] = static_cast<uint8_t>(std::lround((1.0 - a) * g + a * tint_b));
    }
  }
  return out;
}

void WriteOverlayPng(const std::filesystem::path& path, const Image& image,
                     const SegmentMap& segments, const AttributionMap& attribution) {
  WritePngRgb(path, RenderOverlay(image, segments, attribution));
}

}  // namespace maskaudit
