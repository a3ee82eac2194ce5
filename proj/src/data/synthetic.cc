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

#include "data/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "core/error.h"
#include "core/png_io.h"

namespace maskaudit {
namespace {

void RequireUnit(double v, const char* field) {
  if (!(v >= 0.0 && v <= 1.0)) {
    Fail(ErrorCode::kConfigError,
         std::string("synthetic.") + field + " must lie in [0, 1]");
  }
}

// Everything drawn for one sample. Draw order is fixed so that forcing the
// tag leaves the remaining pixels untouched.
struct Draw {
  bool label = false;
  bool tag = false;
  SyntheticTruth truth;
  double center_row = 0.0;
  double center_col = 0.0;
  double background = 0.0;
  double grad_row = 0.0;
  double grad_col = 0.0;
  double disc_level = 0.0;
  double cup_level = 0.0;
  std::vector<float> noise;
  SampleMetadata metadata;
  struct Stroke {
    double row, col, angle, amplitude, period, phase, contrast;
  };
  std::vector<Stroke> strokes;
};

std::vector<uint8_t> AssignLabels(const SyntheticConfig& config) {
  const size_t n = static_cast<size_t>(config.n_samples);
  const size_t positives = static_cast<size_t>(
      std::llround(config.prevalence * static_cast<double>(n)));
  std::vector<uint8_t> labels(n, 0);
  std::fill(labels.begin(), labels.begin() + std::min(positives, n), 1);
  std::mt19937_64 rng(config.seed);
  std::shuffle(labels.begin(), labels.end(), rng);
  return labels;
}

Draw DrawSample(const SyntheticConfig& config, size_t index, bool label) {
  std::seed_seq seq{static_cast<uint32_t>(config.seed),
                    static_cast<uint32_t>(config.seed >> 32),
                    static_cast<uint32_t>(index), 0x5eedu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double s = config.image_size;

  Draw d;
  d.label = label;
  // Cup class follows the label, flipped with probability (1 - strength) / 2.
  bool cup_class = label;
  if (unit(rng) < (1.0 - config.roi_feature_strength) / 2.0) {
    cup_class = !cup_class;
  }
  d.truth.cup_ratio =
      cup_class ? 0.55 + 0.2 * unit(rng) : 0.25 + 0.2 * unit(rng);

  // Tag keeps the label with probability rho, otherwise a fair coin.
  const bool keep = unit(rng) < config.shortcut_strength;
  const bool coin = unit(rng) < 0.5;
  d.tag = keep ? label : coin;
  if (config.invert_tag) d.tag = !d.tag;
  d.truth.tag = d.tag;

  const double shift = 0.05 * s * config.size_confound * (label ? 1.0 : -1.0);
  const double radius = 0.19 * s + shift + 0.04 * s * gauss(rng);
  d.truth.radius = std::clamp(radius, 0.1 * s, 0.28 * s);
  d.center_row = s / 2.0 + (unit(rng) * 2.0 - 1.0) * s / 12.0;
  d.center_col = s / 2.0 + (unit(rng) * 2.0 - 1.0) * s / 12.0;
  d.truth.center_row = static_cast<int>(std::floor(d.center_row));
  d.truth.center_col = static_cast<int>(std::floor(d.center_col));

  d.background = 0.30 + 0.12 * unit(rng);
  d.grad_row = (unit(rng) * 2.0 - 1.0) * 0.08;
  d.grad_col = (unit(rng) * 2.0 - 1.0) * 0.08;
  d.disc_level = 0.58 + 0.10 * unit(rng);
  d.cup_level = 0.88 + 0.07 * unit(rng);

  const size_t pixels = static_cast<size_t>(config.image_size) * config.image_size;
  d.noise.resize(pixels);
  for (float& v : d.noise) v = static_cast<float>(0.035 * gauss(rng));

  d.metadata.birth_year = 1930 + static_cast<int>(unit(rng) * 71.0);
  d.metadata.sex = unit(rng) < 0.5 ? "F" : "M";
  d.metadata.projection = unit(rng) < 0.5 ? Projection::kPA : Projection::kAP;

  // Bright vessel-like background strokes, independent of the label.
  for (int k = 0; k < config.texture_strokes; ++k) {
    Draw::Stroke st;
    st.row = unit(rng) * s;
    st.col = unit(rng) * s;
    st.angle = unit(rng) * 3.14159265358979323846;
    st.amplitude = (0.02 + 0.06 * unit(rng)) * s;
    st.period = (0.3 + 0.5 * unit(rng)) * s;
    st.phase = unit(rng) * 6.28318530717958647692;
    st.contrast = 0.18 + 0.15 * unit(rng);
    d.strokes.push_back(st);
  }
  return d;
}

void Render(const SyntheticConfig& config, const Draw& d, bool tag,
            Image* image, BinaryMask* mask) {
  const int s = config.image_size;
  *image = Image(1, s, s);
  std::vector<uint8_t> region(static_cast<size_t>(s) * s, 0);
  const double r = d.truth.radius;
  const double cup = d.truth.cup_ratio * r;
  for (int row = 0; row < s; ++row) {
    for (int col = 0; col < s; ++col) {
      const double y = row + 0.5 - d.center_row;
      const double x = col + 0.5 - d.center_col;
      const double dist = std::sqrt(x * x + y * y);
      double v = d.background + d.grad_row * (row / static_cast<double>(s) - 0.5) +
                 d.grad_col * (col / static_cast<double>(s) - 0.5);
      for (const auto& st : d.strokes) {
        // Distance to a sinusoid running along the stroke direction.
        const double dy = row + 0.5 - st.row, dx = col + 0.5 - st.col;
        const double along = dx * std::cos(st.angle) + dy * std::sin(st.angle);
        const double across = -dx * std::sin(st.angle) + dy * std::cos(st.angle);
        const double off = across - st.amplitude * std::sin(6.28318530717958647692 *
                                                            along / st.period + st.phase);
        const double half_width = std::max(0.75, s / 48.0);
        if (std::fabs(off) <= half_width) v += st.contrast;
      }
      if (dist <= r) {
        v = d.disc_level;
        region[static_cast<size_t>(row) * s + col] = 1;
      }
      if (dist <= cup) v = d.cup_level;
      v += d.noise[static_cast<size_t>(row) * s + col];
      v = std::clamp(v, 0.0, 1.0);
      image->at(0, row, col) =
          static_cast<float>(std::round(v * 255.0) / 255.0);
    }
  }
  if (tag) {
    const TagGeometry g = SyntheticTagGeometry(s);
    for (int row = g.offset; row < g.offset + g.size; ++row) {
      for (int col = g.offset; col < g.offset + g.size; ++col) {
        image->at(0, row, col) = 1.0f;
      }
    }
  }
  *mask = BinaryMask(s, s, std::move(region));
}

std::string SampleId(const SyntheticConfig& config, size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "-%05zu", index);
  return config.id_prefix + buf;
}

}  // namespace

void SyntheticConfig::Validate() const {
  if (n_samples < 2) {
    Fail(ErrorCode::kConfigError, "synthetic.n_samples must be at least 2");
  }
  if (image_size < 16) {
    Fail(ErrorCode::kConfigError, "synthetic.image_size must be at least 16");
  }
  if (texture_strokes < 0 || texture_strokes > 64) {
    Fail(ErrorCode::kConfigError, "synthetic.texture_strokes must lie in [0, 64]");
  }
  RequireUnit(roi_feature_strength, "roi_feature_strength");
  RequireUnit(shortcut_strength, "shortcut_strength");
  RequireUnit(size_confound, "size_confound");
  if (!(prevalence > 0.0 && prevalence < 1.0)) {
    Fail(ErrorCode::kConfigError, "synthetic.prevalence must lie in (0, 1)");
  }
  if (id_prefix.empty()) {
    Fail(ErrorCode::kConfigError, "synthetic.id_prefix must not be empty");
  }
}

TagGeometry SyntheticTagGeometry(int image_size) {
  return {std::max(1, image_size / 32), std::max(2, image_size / 10)};
}

SyntheticDataset GenerateSynthetic(const SyntheticConfig& config) {
  config.Validate();
  const std::vector<uint8_t> labels = AssignLabels(config);
  SyntheticDataset out;
  out.manifest.name = config.id_prefix;
  out.manifest.class_names = {"finding"};
  out.manifest.task = TaskKind::kBinary;
  const size_t n = labels.size();
  out.images.resize(n);
  out.masks.resize(n);
  out.truth.resize(n);
  out.manifest.samples.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const Draw d = DrawSample(config, i, labels[i] != 0);
    Render(config, d, d.tag, &out.images[i], &out.masks[i]);
    out.truth[i] = d.truth;
    Sample& s = out.manifest.samples[i];
    s.image_id = SampleId(config, i);
    s.image_path = "images/" + s.image_id + ".png";
    s.mask_path = "masks/" + s.image_id + ".png";
    s.mask_quality = 1.0;
    s.labels = {labels[i]};
    s.metadata = d.metadata;
    s.metadata.patient_id = s.image_id;
  }
  return out;
}

Image RenderSyntheticWithTag(const SyntheticConfig& config, size_t index,
                             bool tag) {
  config.Validate();
  const std::vector<uint8_t> labels = AssignLabels(config);
  if (index >= labels.size()) {
    Fail(ErrorCode::kInvalidArgument, "synthetic index out of range");
  }
  const Draw d = DrawSample(config, index, labels[index] != 0);
  Image image;
  BinaryMask mask;
  Render(config, d, tag, &image, &mask);
  return image;
}

void WriteSyntheticDataset(const SyntheticDataset& dataset,
                           const std::filesystem::path& root) {
  for (size_t i = 0; i < dataset.images.size(); ++i) {
    const Sample& s = dataset.manifest.samples[i];
    WritePngImage(root / s.image_path, dataset.images[i]);
    WritePngMask(root / *s.mask_path, dataset.masks[i]);
  }
  WriteManifestCsv(root / "manifest.csv", dataset.manifest);
}

InMemoryImageStore MakeInMemoryStore(const SyntheticDataset& dataset) {
  InMemoryImageStore store;
  for (size_t i = 0; i < dataset.images.size(); ++i) {
    store.Put(dataset.manifest.samples[i].image_id, dataset.images[i],
              dataset.masks[i]);
  }
  return store;
}

}  // namespace maskaudit
