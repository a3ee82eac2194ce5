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

#include "training/network.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "core/error.h"

namespace maskaudit {
namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedMap = Eigen::Map<RowMat, 0, Eigen::OuterStride<>>;
using ConstStridedMap = Eigen::Map<const RowMat, 0, Eigen::OuterStride<>>;
using ConstMap = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

// Upper bound on im2col buffer size, in floats.
constexpr size_t kColBudget = size_t{1} << 23;

// Activations use a channel-major batch layout, (C, N, H, W), so a 3x3
// convolution over the whole batch is one GEMM against the im2col matrix.
void Im2Col(const float* x, int channels, int batch, int h, int w, int n0,
            int n1, float* col) {
  const size_t plane = static_cast<size_t>(h) * w;
  const size_t cols = static_cast<size_t>(n1 - n0) * plane;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        float* dst = col + static_cast<size_t>(c * 9 + ky * 3 + kx) * cols;
        for (int n = n0; n < n1; ++n) {
          const float* src = x + (static_cast<size_t>(c) * batch + n) * plane;
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - 1;
            float* row = dst + static_cast<size_t>(n - n0) * plane +
                         static_cast<size_t>(y) * w;
            if (sy < 0 || sy >= h) {
              std::fill(row, row + w, 0.0f);
              continue;
            }
            const float* srow = src + static_cast<size_t>(sy) * w;
            for (int xx = 0; xx < w; ++xx) {
              const int sx = xx + kx - 1;
              row[xx] = (sx >= 0 && sx < w) ? srow[sx] : 0.0f;
            }
          }
        }
      }
    }
  }
}

void Col2Im(const float* col, int channels, int batch, int h, int w, int n0,
            int n1, float* dx) {
  const size_t plane = static_cast<size_t>(h) * w;
  const size_t cols = static_cast<size_t>(n1 - n0) * plane;
  for (int c = 0; c < channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const float* src = col + static_cast<size_t>(c * 9 + ky * 3 + kx) * cols;
        for (int n = n0; n < n1; ++n) {
          float* dst = dx + (static_cast<size_t>(c) * batch + n) * plane;
          for (int y = 0; y < h; ++y) {
            const int sy = y + ky - 1;
            if (sy < 0 || sy >= h) continue;
            const float* row = src + static_cast<size_t>(n - n0) * plane +
                               static_cast<size_t>(y) * w;
            float* drow = dst + static_cast<size_t>(sy) * w;
            for (int xx = 0; xx < w; ++xx) {
              const int sx = xx + kx - 1;
              if (sx >= 0 && sx < w) drow[sx] += row[xx];
            }
          }
        }
      }
    }
  }
}

int ChunkSize(int channels, int h, int w, int batch) {
  const size_t per = static_cast<size_t>(channels) * 9 * h * w;
  return std::clamp(static_cast<int>(kColBudget / std::max<size_t>(per, 1)), 1,
                    batch);
}

void InitNormal(std::vector<float>* v, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, stddev);
  for (float& x : *v) x = static_cast<float>(g(rng));
}

class SmallCnn : public Network {
 public:
  SmallCnn(NetworkSpec spec, uint64_t seed) : Network(std::move(spec)) {
    if (spec_.widths.empty()) {
      Fail(ErrorCode::kInvalidArgument, "small_cnn needs at least one block");
    }
    int size = spec_.input_size;
    for (size_t b = 0; b < spec_.widths.size(); ++b) {
      if (size < 2) {
        Fail(ErrorCode::kInvalidArgument,
             "input too small for the number of pooling blocks");
      }
      size /= 2;
    }
    std::mt19937_64 rng(seed);
    int in = spec_.channels;
    for (size_t b = 0; b < spec_.widths.size(); ++b) {
      const int out = spec_.widths[b];
      ParamTensor w{"conv" + std::to_string(b) + ".weight",
                    std::vector<float>(static_cast<size_t>(out) * in * 9)};
      InitNormal(&w.value, std::sqrt(2.0 / (in * 9)), rng);
      params_.push_back(std::move(w));
      params_.push_back({"conv" + std::to_string(b) + ".bias",
                         std::vector<float>(out, 0.0f)});
      in = out;
    }
    ParamTensor head{"head.weight",
                     std::vector<float>(static_cast<size_t>(spec_.num_classes) * in)};
    InitNormal(&head.value, std::sqrt(1.0 / in), rng);
    params_.push_back(std::move(head));
    params_.push_back({"head.bias", std::vector<float>(spec_.num_classes, 0.0f)});
  }

  int embedding_dim() const override { return spec_.widths.back(); }

  void FreezePrefix() override {
    const size_t blocks = spec_.widths.size();
    for (size_t b = 0; b + 1 < blocks; ++b) {
      params_[2 * b].trainable = false;
      params_[2 * b + 1].trainable = false;
    }
  }

  // act[0]: input (C,N,H,W); per block b: act[1+2b] post-ReLU conv output,
  // act[2+2b] pooled output; act.back(): pooled embeddings (N x D).
  void Forward(const float* input, int n, Workspace* ws,
               std::vector<float>* logits,
               std::vector<float>* embeddings) const override {
    const int blocks = static_cast<int>(spec_.widths.size());
    ws->batch = n;
    ws->act.resize(2 + 2 * blocks);
    ws->index.resize(blocks);
    const int c0 = spec_.channels;
    const int s0 = spec_.input_size;
    const size_t plane0 = static_cast<size_t>(s0) * s0;
    auto& x0 = ws->act[0];
    x0.resize(static_cast<size_t>(c0) * n * plane0);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < c0; ++c) {
        std::copy_n(input + (static_cast<size_t>(i) * c0 + c) * plane0, plane0,
                    x0.data() + (static_cast<size_t>(c) * n + i) * plane0);
      }
    }
    int in = c0, size = s0;
    std::vector<float> col;
    for (int b = 0; b < blocks; ++b) {
      const int out = spec_.widths[b];
      const size_t plane = static_cast<size_t>(size) * size;
      const size_t total = static_cast<size_t>(n) * plane;
      const auto& x = ws->act[2 * b];
      auto& y = ws->act[1 + 2 * b];
      y.resize(static_cast<size_t>(out) * total);
      const ConstMap weight(params_[2 * b].value.data(), out, in * 9);
      const float* bias = params_[2 * b + 1].value.data();
      const int chunk = ChunkSize(in, size, size, n);
      for (int n0 = 0; n0 < n; n0 += chunk) {
        const int n1 = std::min(n, n0 + chunk);
        const size_t cols = static_cast<size_t>(n1 - n0) * plane;
        col.resize(static_cast<size_t>(in) * 9 * cols);
        Im2Col(x.data(), in, n, size, size, n0, n1, col.data());
        StridedMap out_map(y.data() + static_cast<size_t>(n0) * plane, out,
                           static_cast<Eigen::Index>(cols),
                           Eigen::OuterStride<>(static_cast<Eigen::Index>(total)));
        out_map.noalias() =
            weight * ConstMap(col.data(), in * 9, static_cast<Eigen::Index>(cols));
      }
      for (int c = 0; c < out; ++c) {
        float* row = y.data() + static_cast<size_t>(c) * total;
        for (size_t j = 0; j < total; ++j) row[j] = std::max(0.0f, row[j] + bias[c]);
      }
      // 2x2 max-pool; odd trailing rows/columns are dropped.
      const int half = size / 2;
      const size_t pplane = static_cast<size_t>(half) * half;
      auto& p = ws->act[2 + 2 * b];
      auto& idx = ws->index[b];
      p.resize(static_cast<size_t>(out) * n * pplane);
      idx.resize(p.size());
      for (size_t cn = 0; cn < static_cast<size_t>(out) * n; ++cn) {
        const float* src = y.data() + cn * plane;
        for (int r = 0; r < half; ++r) {
          for (int c = 0; c < half; ++c) {
            int best = (2 * r) * size + 2 * c;
            for (int dy = 0; dy < 2; ++dy) {
              for (int dx = 0; dx < 2; ++dx) {
                const int k = (2 * r + dy) * size + 2 * c + dx;
                if (src[k] > src[best]) best = k;
              }
            }
            const size_t o = cn * pplane + static_cast<size_t>(r) * half + c;
            p[o] = src[best];
            idx[o] = best;
          }
        }
      }
      in = out;
      size = half;
    }
    // Global average pooling.
    const int d = in;
    const size_t plane = static_cast<size_t>(size) * size;
    const auto& last = ws->act[2 * blocks];
    auto& emb = ws->act.back();
    emb.assign(static_cast<size_t>(n) * d, 0.0f);
    for (int c = 0; c < d; ++c) {
      for (int i = 0; i < n; ++i) {
        const float* src = last.data() + (static_cast<size_t>(c) * n + i) * plane;
        double sum = 0.0;
        for (size_t k = 0; k < plane; ++k) sum += src[k];
        emb[static_cast<size_t>(i) * d + c] = static_cast<float>(sum / plane);
      }
    }
    const int k = spec_.num_classes;
    logits->resize(static_cast<size_t>(n) * k);
    Map lg(logits->data(), n, k);
    const ConstMap head(params_[2 * blocks].value.data(), k, d);
    lg.noalias() = ConstMap(emb.data(), n, d) * head.transpose();
    const float* hb = params_[2 * blocks + 1].value.data();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) (*logits)[static_cast<size_t>(i) * k + j] += hb[j];
    }
    if (embeddings != nullptr) *embeddings = emb;
  }

  void Backward(const Workspace& ws, const std::vector<float>& dlogits,
                std::vector<std::vector<float>>* grads) const override {
    const int blocks = static_cast<int>(spec_.widths.size());
    const int n = ws.batch;
    const int k = spec_.num_classes;
    const int d = spec_.widths.back();
    const auto& emb = ws.act.back();
    const ConstMap dl(dlogits.data(), n, k);
    // Head.
    {
      Map gw((*grads)[2 * blocks].data(), k, d);
      gw.noalias() += dl.transpose() * ConstMap(emb.data(), n, d);
      float* gb = (*grads)[2 * blocks + 1].data();
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) gb[j] += dlogits[static_cast<size_t>(i) * k + j];
      }
    }
    RowMat demb = dl * ConstMap(params_[2 * blocks].value.data(), k, d);

    // Sizes per block.
    std::vector<int> sizes(blocks + 1);
    sizes[0] = spec_.input_size;
    for (int b = 0; b < blocks; ++b) sizes[b + 1] = sizes[b] / 2;

    // Gradient w.r.t. the last pooled output: GAP spreads evenly.
    const size_t last_plane = static_cast<size_t>(sizes[blocks]) * sizes[blocks];
    std::vector<float> dp(static_cast<size_t>(d) * n * last_plane);
    for (int c = 0; c < d; ++c) {
      for (int i = 0; i < n; ++i) {
        const float g = demb(i, c) / static_cast<float>(last_plane);
        std::fill_n(dp.data() + (static_cast<size_t>(c) * n + i) * last_plane,
                    last_plane, g);
      }
    }
    std::vector<float> dy, dx, col, dcol;
    for (int b = blocks - 1; b >= 0; --b) {
      if (!params_[2 * b].trainable) break;
      const int out = spec_.widths[b];
      const int in = b == 0 ? spec_.channels : spec_.widths[b - 1];
      const int size = sizes[b];
      const size_t plane = static_cast<size_t>(size) * size;
      const size_t total = static_cast<size_t>(n) * plane;
      const size_t pplane = static_cast<size_t>(sizes[b + 1]) * sizes[b + 1];
      const auto& y = ws.act[1 + 2 * b];
      const auto& idx = ws.index[b];
      dy.assign(y.size(), 0.0f);
      for (size_t cn = 0; cn < static_cast<size_t>(out) * n; ++cn) {
        for (size_t j = 0; j < pplane; ++j) {
          const size_t o = cn * pplane + j;
          dy[cn * plane + idx[o]] += dp[o];
        }
      }
      for (size_t j = 0; j < dy.size(); ++j) {
        if (y[j] <= 0.0f) dy[j] = 0.0f;
      }
      float* gb = (*grads)[2 * b + 1].data();
      for (int c = 0; c < out; ++c) {
        const float* row = dy.data() + static_cast<size_t>(c) * total;
        double sum = 0.0;
        for (size_t j = 0; j < total; ++j) sum += row[j];
        gb[c] += static_cast<float>(sum);
      }
      const bool need_dx = b > 0 && params_[2 * (b - 1)].trainable;
      if (need_dx) dx.assign(static_cast<size_t>(in) * total, 0.0f);
      Map gw((*grads)[2 * b].data(), out, in * 9);
      const ConstMap weight(params_[2 * b].value.data(), out, in * 9);
      const auto& x = ws.act[2 * b];
      const int chunk = ChunkSize(in, size, size, n);
      for (int n0 = 0; n0 < n; n0 += chunk) {
        const int n1 = std::min(n, n0 + chunk);
        const size_t cols = static_cast<size_t>(n1 - n0) * plane;
        col.resize(static_cast<size_t>(in) * 9 * cols);
        Im2Col(x.data(), in, n, size, size, n0, n1, col.data());
        const ConstStridedMap dy_map(
            dy.data() + static_cast<size_t>(n0) * plane, out,
            static_cast<Eigen::Index>(cols),
            Eigen::OuterStride<>(static_cast<Eigen::Index>(total)));
        gw.noalias() +=
            dy_map * ConstMap(col.data(), in * 9, static_cast<Eigen::Index>(cols))
                         .transpose();
        if (need_dx) {
          dcol.resize(col.size());
          Map(dcol.data(), in * 9, static_cast<Eigen::Index>(cols)).noalias() =
              weight.transpose() * dy_map;
          Col2Im(dcol.data(), in, n, size, size, n0, n1, dx.data());
        }
      }
      if (!need_dx) break;
      dp.swap(dx);
    }
  }
};

class LinearProbe : public Network {
 public:
  LinearProbe(NetworkSpec spec, uint64_t seed) : Network(std::move(spec)) {
    std::mt19937_64 rng(seed);
    const size_t len = input_length();
    ParamTensor w{"linear.weight",
                  std::vector<float>(static_cast<size_t>(spec_.num_classes) * len)};
    InitNormal(&w.value, 0.01, rng);
    params_.push_back(std::move(w));
    params_.push_back({"linear.bias", std::vector<float>(spec_.num_classes, 0.0f)});
  }

  int embedding_dim() const override { return 0; }
  void FreezePrefix() override {}

  void Forward(const float* input, int n, Workspace* ws,
               std::vector<float>* logits,
               std::vector<float>* embeddings) const override {
    const auto len = static_cast<Eigen::Index>(input_length());
    const int k = spec_.num_classes;
    ws->batch = n;
    ws->act.assign(1, std::vector<float>(input, input + n * len));
    logits->resize(static_cast<size_t>(n) * k);
    Map(logits->data(), n, k).noalias() =
        ConstMap(input, n, len) *
        ConstMap(params_[0].value.data(), k, len).transpose();
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) {
        (*logits)[static_cast<size_t>(i) * k + j] += params_[1].value[j];
      }
    }
    if (embeddings != nullptr) embeddings->clear();
  }

  void Backward(const Workspace& ws, const std::vector<float>& dlogits,
                std::vector<std::vector<float>>* grads) const override {
    const auto len = static_cast<Eigen::Index>(input_length());
    const int k = spec_.num_classes;
    const int n = ws.batch;
    const ConstMap dl(dlogits.data(), n, k);
    Map((*grads)[0].data(), k, len).noalias() +=
        dl.transpose() * ConstMap(ws.act[0].data(), n, len);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) {
        (*grads)[1][j] += dlogits[static_cast<size_t>(i) * k + j];
      }
    }
  }
};

void ValidateSpec(const NetworkSpec& spec) {
  if (spec.channels < 1 || spec.input_size < 1 || spec.num_classes < 1) {
    Fail(ErrorCode::kInvalidArgument,
         "network needs positive channels, input size and class count");
  }
  for (int w : spec.widths) {
    if (w < 1) Fail(ErrorCode::kInvalidArgument, "block widths must be positive");
  }
}

}  // namespace

int BackboneEmbeddingDim(const NetworkSpec& spec) {
  if (spec.backbone == "densenet121") return 1024;
  if (spec.backbone == "small_cnn") {
    return spec.widths.empty() ? 0 : spec.widths.back();
  }
  if (spec.backbone == "linear_probe") return 0;
  Fail(ErrorCode::kUnsupportedBackbone,
       "unknown backbone '" + spec.backbone + "'");
}

std::unique_ptr<Network> CreateNetwork(const NetworkSpec& spec, uint64_t seed) {
  ValidateSpec(spec);
  if (spec.backbone == "small_cnn") return std::make_unique<SmallCnn>(spec, seed);
  if (spec.backbone == "linear_probe") {
    return std::make_unique<LinearProbe>(spec, seed);
  }
  if (spec.backbone == "densenet121") {
    Fail(ErrorCode::kUnsupportedBackbone,
         "densenet121 weights are not bundled with this build; use small_cnn "
         "or linear_probe");
  }
  Fail(ErrorCode::kUnsupportedBackbone,
       "unknown backbone '" + spec.backbone + "'");
}

}  // namespace maskaudit
