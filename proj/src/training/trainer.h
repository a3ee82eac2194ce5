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

#ifndef MASKAUDIT_TRAINING_TRAINER_H_
#define MASKAUDIT_TRAINING_TRAINER_H_

#include <filesystem>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "core/image.h"
#include "data/materialize.h"
#include "masking/mask_ops.h"
#include "training/network.h"
#include "training/train_config.h"

namespace maskaudit {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_auc = 0.5;  // mean over classes
  bool operator==(const EpochRecord&) const = default;
};

struct TrainedModel {
  std::shared_ptr<Network> network;
  MaskingStrategy strategy = MaskingStrategy::kFull;
  int fold_index = 0;
  Normalization normalization;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  bool early_stopped = false;

  int embedding_dim() const { return network->embedding_dim(); }
};

// Validation-loss early stopping: an epoch improves when its loss is below
// best - delta. Training stops once `patience` consecutive epochs fail to
// improve.
class EarlyStopping {
 public:
  EarlyStopping(double delta, int patience) : delta_(delta), patience_(patience) {}
  // Returns true when training should stop after this epoch.
  bool Update(int epoch, double val_loss);
  bool improved() const { return improved_; }
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_loss_; }

 private:
  double delta_;
  int patience_;
  int best_epoch_ = 0;
  double best_loss_ = 0.0;
  int waited_ = 0;
  bool improved_ = false;
};

// Mean binary cross-entropy over n x k logits. `weights` holds, per class,
// the weight of negatives then positives; empty means uniform. Writes the
// gradient w.r.t. the logits when `grad` is non-null.
double BinaryCrossEntropy(std::span<const float> logits,
                          std::span<const uint8_t> labels, int num_classes,
                          std::span<const double> weights,
                          std::vector<float>* grad);

// Inverse class frequency per (class, label value), normalized so the two
// weights of a class average to 1.
std::vector<double> InverseFrequencyWeights(
    const std::vector<std::vector<uint8_t>>& labels, int num_classes);

// In-place augmentation of a raw image; rotation pads with black.
void Augment(const Augmentations& augmentations, std::mt19937_64& rng,
             Image* image);

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains one model for one (strategy, fold). Validation loss drives early
// stopping and the best-validation weights are restored. Throws
// kTrainingDiverged naming the epoch on a non-finite loss,
// kUnsupportedBackbone for backbones not built here.
TrainedModel Train(const TrainConfig& config, const MaskedView& train,
                   const MaskedView& val, int fold_index,
                   const EpochCallback& on_epoch = nullptr);

// Per-class probabilities, n x k row-major, in input order. Images must be
// normalized and sized like the model input (kShapeMismatch otherwise).
std::vector<float> Predict(const TrainedModel& model,
                           std::span<const Image> images);
std::vector<float> Predict(const TrainedModel& model, const MaskedView& view);
// Raw logits, same layout.
std::vector<float> PredictLogits(const Network& network,
                                 std::span<const Image> images);

// Binary checkpoint: header JSON (spec, strategy, fold, normalization,
// history) followed by float32 parameters.
void SaveCheckpoint(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel LoadCheckpoint(const std::filesystem::path& path);
// FNV-1a over the parameter bytes and spec; identifies a model in caches.
uint64_t ModelHash(const TrainedModel& model);

void WriteHistoryCsv(const std::filesystem::path& path,
                     const std::vector<EpochRecord>& history);
std::vector<EpochRecord> ReadHistoryCsv(const std::filesystem::path& path);

}  // namespace maskaudit

#endif  // MASKAUDIT_TRAINING_TRAINER_H_
