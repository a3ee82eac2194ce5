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

#include "training/trainer.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include <json.hpp>

#include "core/csv.h"
#include "core/error.h"
#include "core/file_util.h"
#include "core/log.h"
#include "evaluation/auc.h"

namespace maskaudit {
namespace {

constexpr char kCheckpointMagic[8] = {'M', 'K', 'A', 'C', 'K', 'P', 'T', '1'};
constexpr int kInferenceBatch = 64;

float Sigmoid(float x) {
  if (x >= 0.0f) return 1.0f / (1.0f + std::exp(-x));
  const float e = std::exp(x);
  return e / (1.0f + e);
}

void CopyImage(const Image& image, float* dst) {
  std::copy(image.data.begin(), image.data.end(), dst);
}

class Adam {
 public:
  Adam(const Network& net, double lr) : lr_(lr) {
    for (const auto& p : net.params()) {
      m_.emplace_back(p.value.size(), 0.0f);
      v_.emplace_back(p.value.size(), 0.0f);
    }
  }

  void Step(Network* net, const std::vector<std::vector<float>>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    const float step = static_cast<float>(lr_ * std::sqrt(c2) / c1);
    auto& params = net->params();
    for (size_t i = 0; i < params.size(); ++i) {
      if (!params[i].trainable) continue;
      auto& value = params[i].value;
      const auto& g = grads[i];
      auto& m = m_[i];
      auto& v = v_[i];
      for (size_t j = 0; j < value.size(); ++j) {
        m[j] = static_cast<float>(kBeta1) * m[j] +
               static_cast<float>(1.0 - kBeta1) * g[j];
        v[j] = static_cast<float>(kBeta2) * v[j] +
               static_cast<float>(1.0 - kBeta2) * g[j] * g[j];
        value[j] -= step * m[j] / (std::sqrt(v[j]) + kEps);
      }
    }
  }

 private:
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr float kEps = 1e-8f;
  double lr_;
  int t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

float SampleBilinear(const float* plane, int h, int w, double y, double x) {
  // (y, x) in pixel-center coordinates; outside samples read as zero.
  const double fy = std::floor(y), fx = std::floor(x);
  const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
  const double ay = y - fy, ax = x - fx;
  auto at = [&](int r, int c) -> double {
    return (r < 0 || r >= h || c < 0 || c >= w) ? 0.0
                                                : plane[static_cast<size_t>(r) * w + c];
  };
  return static_cast<float>((1 - ay) * ((1 - ax) * at(y0, x0) + ax * at(y0, x0 + 1)) +
                            ay * ((1 - ax) * at(y0 + 1, x0) + ax * at(y0 + 1, x0 + 1)));
}

double MeanAuc(const std::vector<float>& probs,
               const std::vector<std::vector<uint8_t>>& labels, int k) {
  double total = 0.0;
  std::vector<double> scores(labels.size());
  std::vector<uint8_t> y(labels.size());
  for (int c = 0; c < k; ++c) {
    for (size_t i = 0; i < labels.size(); ++i) {
      scores[i] = probs[i * k + c];
      y[i] = labels[i][c];
    }
    total += Auc(scores, y);
  }
  return total / k;
}

nlohmann::json SpecToJson(const NetworkSpec& s) {
  return {{"backbone", s.backbone},
          {"channels", s.channels},
          {"input_size", s.input_size},
          {"num_classes", s.num_classes},
          {"widths", s.widths}};
}

}  // namespace

bool EarlyStopping::Update(int epoch, double val_loss) {
  improved_ = best_epoch_ == 0 || val_loss < best_loss_ - delta_;
  if (improved_) {
    best_epoch_ = epoch;
    best_loss_ = val_loss;
    waited_ = 0;
    return false;
  }
  return ++waited_ >= patience_;
}

double BinaryCrossEntropy(std::span<const float> logits,
                          std::span<const uint8_t> labels, int num_classes,
                          std::span<const double> weights,
                          std::vector<float>* grad) {
  if (logits.size() != labels.size() || num_classes < 1 ||
      logits.size() % num_classes != 0) {
    Fail(ErrorCode::kShapeMismatch, "logits and labels disagree in shape");
  }
  if (!weights.empty() && weights.size() != 2 * static_cast<size_t>(num_classes)) {
    Fail(ErrorCode::kShapeMismatch, "need two weights per class");
  }
  const double count = static_cast<double>(logits.size());
  if (grad != nullptr) grad->resize(logits.size());
  double loss = 0.0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const double x = logits[i];
    const double y = labels[i] ? 1.0 : 0.0;
    const int c = static_cast<int>(i % num_classes);
    const double w = weights.empty() ? 1.0 : weights[2 * c + (labels[i] ? 1 : 0)];
    loss += w * (std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::fabs(x))));
    if (grad != nullptr) {
      (*grad)[i] = static_cast<float>(w * (Sigmoid(logits[i]) - y) / count);
    }
  }
  return loss / count;
}

std::vector<double> InverseFrequencyWeights(
    const std::vector<std::vector<uint8_t>>& labels, int num_classes) {
  std::vector<double> w(2 * num_classes, 1.0);
  if (labels.empty()) return w;
  for (int c = 0; c < num_classes; ++c) {
    double pos = 0.0;
    for (const auto& l : labels) pos += l[c];
    const double p = pos / static_cast<double>(labels.size());
    if (p <= 0.0 || p >= 1.0) continue;  // single class: keep uniform
    // (1/q) / mean(1/p, 1/(1-p)) for q in {1-p, p}.
    w[2 * c] = 2.0 * p;
    w[2 * c + 1] = 2.0 * (1.0 - p);
  }
  return w;
}

void Augment(const Augmentations& a, std::mt19937_64& rng, Image* image) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int h = image->height, w = image->width;
  if (a.rotation_degrees && *a.rotation_degrees > 0.0) {
    const double deg = (unit(rng) * 2.0 - 1.0) * *a.rotation_degrees;
    const double th = deg * M_PI / 180.0;
    const double cs = std::cos(th), sn = std::sin(th);
    const double cy = h / 2.0, cx = w / 2.0;
    Image out(image->channels, h, w);
    for (int c = 0; c < image->channels; ++c) {
      const float* src = image->plane(c).data();
      for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
          const double y = r + 0.5 - cy, x = col + 0.5 - cx;
          const double sy = cs * y + sn * x + cy - 0.5;
          const double sx = -sn * y + cs * x + cx - 0.5;
          out.at(c, r, col) = SampleBilinear(src, h, w, sy, sx);
        }
      }
    }
    *image = std::move(out);
  }
  if (a.hflip_probability && unit(rng) < *a.hflip_probability) {
    for (int c = 0; c < image->channels; ++c) {
      for (int r = 0; r < h; ++r) {
        float* row = &image->at(c, r, 0);
        std::reverse(row, row + w);
      }
    }
  }
  if (a.brightness_min) {
    const double f = *a.brightness_min +
                     unit(rng) * (*a.brightness_max - *a.brightness_min);
    for (float& v : image->data) {
      v = static_cast<float>(std::clamp(v * f, 0.0, 1.0));
    }
  }
}

TrainedModel Train(const TrainConfig& config, const MaskedView& train,
                   const MaskedView& val, int fold_index,
                   const EpochCallback& on_epoch) {
  config.Validate();
  if (train.size() == 0 || val.size() == 0) {
    Fail(ErrorCode::kInvalidArgument, "training and validation sets must be nonempty");
  }
  if (train.options().target_size != config.input_size ||
      val.options().target_size != config.input_size) {
    Fail(ErrorCode::kShapeMismatch, "materialized size differs from train.input_size");
  }
  const int k = static_cast<int>(train.sample(0).labels.size());

  // Raw training images are cached and augmented per epoch; validation
  // images are fixed.
  std::vector<Image> raw(train.size());
  std::vector<std::vector<uint8_t>> train_labels(train.size());
  for (size_t i = 0; i < train.size(); ++i) {
    raw[i] = train.GetRaw(i);
    train_labels[i] = train.sample(i).labels;
  }
  const int channels = raw[0].channels;
  const Normalization norm =
      !train.options().normalize
          ? Normalization::Identity(channels)
          : train.options().normalization.value_or(Normalization::ImageNet(channels));

  TrainedModel model;
  model.strategy = train.strategy();
  model.fold_index = fold_index;
  model.normalization = norm;
  std::shared_ptr<Network> net = CreateNetwork(config.Network(channels, k), config.seed);
  if (config.frozen_prefix) net->FreezePrefix();
  model.network = net;
  const size_t len = net->input_length();

  std::vector<float> val_input(val.size() * len);
  std::vector<std::vector<uint8_t>> val_labels(val.size());
  std::vector<uint8_t> val_flat;
  for (size_t i = 0; i < val.size(); ++i) {
    const MaskedSample s = val.Get(i);
    if (s.image.data.size() != len) {
      Fail(ErrorCode::kShapeMismatch, "validation image has the wrong size");
    }
    CopyImage(s.image, val_input.data() + i * len);
    val_labels[i] = s.labels;
    val_flat.insert(val_flat.end(), s.labels.begin(), s.labels.end());
  }

  const std::vector<double> weights =
      config.loss == LossKind::kWeightedCrossEntropy
          ? InverseFrequencyWeights(train_labels, k)
          : std::vector<double>{};

  Adam adam(*net, config.learning_rate);
  std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ull * (fold_index + 1)));
  EarlyStopping stopper(config.early_stop_delta, config.early_stop_patience);
  std::vector<ParamTensor> best = net->params();
  std::vector<std::vector<float>> grads;
  for (const auto& p : net->params()) grads.emplace_back(p.value.size(), 0.0f);

  Workspace ws;
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<float> batch, logits, dlogits;
  std::vector<uint8_t> batch_labels;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (size_t start = 0; start < order.size(); start += config.batch_size) {
      const size_t end = std::min(order.size(), start + config.batch_size);
      const int n = static_cast<int>(end - start);
      batch.resize(n * len);
      batch_labels.clear();
      for (size_t b = start; b < end; ++b) {
        Image img = raw[order[b]];
        if (config.augmentations.any()) Augment(config.augmentations, rng, &img);
        CopyImage(Normalize(img, norm), batch.data() + (b - start) * len);
        const auto& l = train_labels[order[b]];
        batch_labels.insert(batch_labels.end(), l.begin(), l.end());
      }
      net->Forward(batch.data(), n, &ws, &logits, nullptr);
      const double loss =
          BinaryCrossEntropy(logits, batch_labels, k, weights, &dlogits);
      if (!std::isfinite(loss)) {
        Fail(ErrorCode::kTrainingDiverged,
             "non-finite training loss at epoch " + std::to_string(epoch));
      }
      loss_sum += loss * n;
      for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0f);
      net->Backward(ws, dlogits, &grads);
      adam.Step(net.get(), grads);
    }

    std::vector<float> val_logits;
    for (size_t start = 0; start < val.size(); start += kInferenceBatch) {
      const int n = static_cast<int>(std::min<size_t>(kInferenceBatch, val.size() - start));
      net->Forward(val_input.data() + start * len, n, &ws, &logits, nullptr);
      val_logits.insert(val_logits.end(), logits.begin(), logits.end());
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train.size());
    rec.val_loss = BinaryCrossEntropy(val_logits, val_flat, k, weights, nullptr);
    if (!std::isfinite(rec.val_loss)) {
      Fail(ErrorCode::kTrainingDiverged,
           "non-finite validation loss at epoch " + std::to_string(epoch));
    }
    std::vector<float> probs(val_logits.size());
    for (size_t i = 0; i < probs.size(); ++i) probs[i] = Sigmoid(val_logits[i]);
    rec.val_auc = MeanAuc(probs, val_labels, k);
    model.history.push_back(rec);
    if (on_epoch) on_epoch(rec);

    const bool stop = stopper.Update(epoch, rec.val_loss);
    if (stopper.improved()) best = net->params();
    if (stop) {
      model.early_stopped = true;
      break;
    }
  }
  net->params() = std::move(best);
  model.best_epoch = stopper.best_epoch();
  return model;
}

std::vector<float> PredictLogits(const Network& network,
                                 std::span<const Image> images) {
  const NetworkSpec& spec = network.spec();
  const size_t len = network.input_length();
  std::vector<float> out;
  out.reserve(images.size() * spec.num_classes);
  std::vector<float> batch, logits;
  Workspace ws;
  for (size_t start = 0; start < images.size(); start += kInferenceBatch) {
    const size_t end = std::min(images.size(), start + kInferenceBatch);
    batch.resize((end - start) * len);
    for (size_t i = start; i < end; ++i) {
      const Image& im = images[i];
      if (im.channels != spec.channels || im.height != spec.input_size ||
          im.width != spec.input_size) {
        Fail(ErrorCode::kShapeMismatch,
             "image " + std::to_string(i) + " is " + std::to_string(im.channels) +
                 "x" + std::to_string(im.height) + "x" + std::to_string(im.width) +
                 ", model expects " + std::to_string(spec.channels) + "x" +
                 std::to_string(spec.input_size) + "x" +
                 std::to_string(spec.input_size));
      }
      CopyImage(im, batch.data() + (i - start) * len);
    }
    network.Forward(batch.data(), static_cast<int>(end - start), &ws, &logits, nullptr);
    out.insert(out.end(), logits.begin(), logits.end());
  }
  return out;
}

std::vector<float> Predict(const TrainedModel& model,
                           std::span<const Image> images) {
  std::vector<float> out = PredictLogits(*model.network, images);
  for (float& v : out) v = Sigmoid(v);
  return out;
}

std::vector<float> Predict(const TrainedModel& model, const MaskedView& view) {
  std::vector<Image> images;
  images.reserve(view.size());
  for (size_t i = 0; i < view.size(); ++i) images.push_back(view.Get(i).image);
  return Predict(model, images);
}

void SaveCheckpoint(const std::filesystem::path& path, const TrainedModel& model) {
  nlohmann::json header;
  header["spec"] = SpecToJson(model.network->spec());
  header["strategy"] = std::string(StrategyName(model.strategy));
  header["fold"] = model.fold_index;
  header["normalization"] = {{"mean", model.normalization.mean},
                             {"std", model.normalization.stddev}};
  header["best_epoch"] = model.best_epoch;
  header["early_stopped"] = model.early_stopped;
  nlohmann::json frozen = nlohmann::json::array();
  for (const auto& p : model.network->params()) frozen.push_back(!p.trainable);
  header["frozen"] = frozen;
  const std::string text = header.dump();
  std::vector<uint8_t> bytes(kCheckpointMagic, kCheckpointMagic + 8);
  const uint64_t hlen = text.size();
  const auto* hp = reinterpret_cast<const uint8_t*>(&hlen);
  bytes.insert(bytes.end(), hp, hp + sizeof(hlen));
  bytes.insert(bytes.end(), text.begin(), text.end());
  for (const auto& p : model.network->params()) {
    const auto* data = reinterpret_cast<const uint8_t*>(p.value.data());
    bytes.insert(bytes.end(), data, data + p.value.size() * sizeof(float));
  }
  WriteFileBytes(path, bytes);
  WriteHistoryCsv(std::filesystem::path(path).replace_extension(".history.csv"),
                  model.history);
}

TrainedModel LoadCheckpoint(const std::filesystem::path& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
    Fail(ErrorCode::kSchemaError, path.string() + " is not a checkpoint");
  }
  uint64_t hlen = 0;
  std::memcpy(&hlen, bytes.data() + 8, sizeof(hlen));
  if (16 + hlen > bytes.size()) {
    Fail(ErrorCode::kSchemaError, path.string() + ": truncated header");
  }
  TrainedModel model;
  size_t offset = 16 + hlen;
  try {
    const auto header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + offset);
    NetworkSpec spec;
    const auto& s = header.at("spec");
    spec.backbone = s.at("backbone").get<std::string>();
    spec.channels = s.at("channels").get<int>();
    spec.input_size = s.at("input_size").get<int>();
    spec.num_classes = s.at("num_classes").get<int>();
    spec.widths = s.at("widths").get<std::vector<int>>();
    model.network = CreateNetwork(spec, 0);
    model.strategy = ParseStrategy(header.at("strategy").get<std::string>());
    model.fold_index = header.at("fold").get<int>();
    model.normalization.mean =
        header.at("normalization").at("mean").get<std::vector<float>>();
    model.normalization.stddev =
        header.at("normalization").at("std").get<std::vector<float>>();
    model.best_epoch = header.value("best_epoch", 0);
    model.early_stopped = header.value("early_stopped", false);
    const auto frozen = header.value("frozen", std::vector<bool>{});
    auto& params = model.network->params();
    for (size_t i = 0; i < params.size(); ++i) {
      const size_t n = params[i].value.size() * sizeof(float);
      if (offset + n > bytes.size()) {
        Fail(ErrorCode::kSchemaError, path.string() + ": truncated parameters");
      }
      std::memcpy(params[i].value.data(), bytes.data() + offset, n);
      offset += n;
      if (i < frozen.size()) params[i].trainable = !frozen[i];
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kSchemaError, path.string() + ": " + e.what());
  }
  if (offset != bytes.size()) {
    Fail(ErrorCode::kSchemaError, path.string() + ": trailing bytes");
  }
  const auto history = std::filesystem::path(path).replace_extension(".history.csv");
  if (std::filesystem::exists(history)) model.history = ReadHistoryCsv(history);
  return model;
}

uint64_t ModelHash(const TrainedModel& model) {
  uint64_t h = Fnv1a64(SpecToJson(model.network->spec()).dump());
  for (const auto& p : model.network->params()) {
    h = Fnv1a64(std::span<const uint8_t>(
                    reinterpret_cast<const uint8_t*>(p.value.data()),
                    p.value.size() * sizeof(float)),
                h);
  }
  return h;
}

void WriteHistoryCsv(const std::filesystem::path& path,
                     const std::vector<EpochRecord>& history) {
  CsvTable t;
  t.header = {"epoch", "train_loss", "val_loss", "val_auc"};
  for (const auto& r : history) {
    t.rows.push_back({std::to_string(r.epoch), FormatDouble(r.train_loss),
                      FormatDouble(r.val_loss), FormatDouble(r.val_auc)});
  }
  WriteCsvFile(path, t);
}

std::vector<EpochRecord> ReadHistoryCsv(const std::filesystem::path& path) {
  const CsvTable t = ReadCsvFile(path);
  const size_t e = t.RequireColumn("epoch"), tl = t.RequireColumn("train_loss"),
               vl = t.RequireColumn("val_loss"), va = t.RequireColumn("val_auc");
  std::vector<EpochRecord> out;
  for (const auto& row : t.rows) {
    out.push_back({static_cast<int>(ParseInt(row[e])), ParseDouble(row[tl]),
                   ParseDouble(row[vl]), ParseDouble(row[va])});
  }
  return out;
}

}  // namespace maskaudit
