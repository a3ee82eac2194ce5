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

#ifndef MASKAUDIT_TRAINING_NETWORK_H_
#define MASKAUDIT_TRAINING_NETWORK_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace maskaudit {

// Architecture of a classifier. Inputs are square `input_size` images with
// `channels` planes.
struct NetworkSpec {
  std::string backbone = "small_cnn";
  int channels = 1;
  int input_size = 64;
  int num_classes = 1;
  std::vector<int> widths = {8, 16, 32};  // conv block widths (small_cnn)
  bool operator==(const NetworkSpec&) const = default;
};

// Width of the pooled penultimate features for a backbone name, 0 when the
// backbone has no pooled tap. Throws kUnsupportedBackbone for unknown names.
int BackboneEmbeddingDim(const NetworkSpec& spec);

struct ParamTensor {
  std::string name;
  std::vector<float> value;
  bool trainable = true;
};

// Per-call scratch space; one per thread.
struct Workspace {
  int batch = 0;
  std::vector<std::vector<float>> act;
  std::vector<std::vector<int>> index;
};

// Feed-forward classifier with hand-written backward pass. Forward is const
// and thread-safe given distinct workspaces.
class Network {
 public:
  virtual ~Network() = default;

  const NetworkSpec& spec() const { return spec_; }
  size_t input_length() const {
    return static_cast<size_t>(spec_.channels) * spec_.input_size *
           spec_.input_size;
  }
  // 0 when there is no pooled feature tap.
  virtual int embedding_dim() const = 0;

  // `input` holds n images, NCHW. Writes n x num_classes logits (row-major)
  // and, when requested and available, n x embedding_dim pooled features.
  virtual void Forward(const float* input, int n, Workspace* ws,
                       std::vector<float>* logits,
                       std::vector<float>* embeddings) const = 0;
  // Accumulates parameter gradients for the last Forward on `ws`, given the
  // loss gradient w.r.t. the logits. grads[i] aligns with params()[i];
  // frozen tensors are skipped.
  virtual void Backward(const Workspace& ws, const std::vector<float>& dlogits,
                        std::vector<std::vector<float>>* grads) const = 0;

  std::vector<ParamTensor>& params() { return params_; }
  const std::vector<ParamTensor>& params() const { return params_; }
  // Marks every tensor outside the last block and the head as frozen.
  virtual void FreezePrefix() = 0;

 protected:
  explicit Network(NetworkSpec spec) : spec_(std::move(spec)) {}
  NetworkSpec spec_;
  std::vector<ParamTensor> params_;
};

// Builds a network with seeded initialization. Backbones: "small_cnn" (conv
// blocks of 3x3 conv + ReLU + 2x2 max-pool, global average pooling, linear
// head) and "linear_probe" (a single linear layer over raw pixels, no pooled
// tap). "densenet121" is recognized but not built here and raises
// kUnsupportedBackbone.
std::unique_ptr<Network> CreateNetwork(const NetworkSpec& spec, uint64_t seed);

}  // namespace maskaudit

#endif  // MASKAUDIT_TRAINING_NETWORK_H_
