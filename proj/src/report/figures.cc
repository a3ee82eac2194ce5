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

#include "report/figures.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "core/error.h"

namespace maskaudit {
namespace {

constexpr int kHeatLeft = 110;
constexpr int kHeatTop = 50;
constexpr int kHeatCell = 80;

constexpr int kCurveWidth = 720;
constexpr int kCurveHeight = 460;
constexpr PlotArea kCurveArea = {70, 44, 700, 330};

const Rgb kAxis{60, 60, 60};
const Rgb kGrid{225, 225, 225};

Rgb Darken(Rgb c, double f) {
  return {static_cast<uint8_t>(std::lround(c.r * f)), static_cast<uint8_t>(std::lround(c.g * f)),
          static_cast<uint8_t>(std::lround(c.b * f))};
}

void CheckRange(const ColorRange& r) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi)) {
    Fail(ErrorCode::kInvalidArgument, "colour range needs finite lo < hi");
  }
}

double Scale(double v, const ColorRange& r) {
  return r.hi > r.lo ? (v - r.lo) / (r.hi - r.lo) : 1.0;
}

}  // namespace

std::string FormatFixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, value);
  return buf;
}

ColorRange AutoColorRange(const AucMatrix& matrix) {
  ColorRange r{std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity()};
  for (const auto& row : matrix.cells) {
    for (const auto& c : row) {
      r.lo = std::min(r.lo, c.mean);
      r.hi = std::max(r.hi, c.mean);
    }
  }
  return r;
}

CellBox HeatmapCell(int row, int col) {
  return {kHeatLeft + col * kHeatCell, kHeatTop + row * kHeatCell, kHeatCell};
}

RgbRaster RenderHeatmap(const AucMatrix& matrix, std::optional<ColorRange> range) {
  matrix.Validate();
  const int rows = static_cast<int>(matrix.train_strategies.size());
  const int cols = static_cast<int>(matrix.eval_strategies.size());
  if (rows == 0 || cols == 0) Fail(ErrorCode::kIncompleteRun, "empty AUC matrix");
  ColorRange cr = AutoColorRange(matrix);
  if (range) {
    CheckRange(*range);
    cr = *range;
  }
  const int grid_w = cols * kHeatCell, grid_h = rows * kHeatCell;
  const int bar_x = kHeatLeft + grid_w + 24;
  Canvas canvas(bar_x + 20 + 60, kHeatTop + grid_h + 44);

  canvas.Text(8, 10, "AUC " + matrix.class_name, kBlack, 2);
  canvas.Text(8, kHeatTop - 14, "TRAIN / EVAL", kAxis);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const CellBox box = HeatmapCell(r, c);
      const AucCell& cell = matrix.cells[r][c];
      const Rgb fill = Colormap(Scale(cell.mean, cr));
      canvas.FillRect(box.x, box.y, box.x + box.size, box.y + box.size, fill);
      const Rgb ink = Luminance(fill) > 128 ? kBlack : kWhite;
      const int cx = box.x + box.size / 2, cy = box.y + box.size / 2;
      canvas.TextCentered(cx, cy - 6, FormatFixed(cell.mean, 2), ink, 2);
      canvas.TextCentered(cx, cy + 16, "SD " + FormatFixed(cell.std, 2), ink);
    }
    const std::string_view name = StrategyName(matrix.train_strategies[r]);
    canvas.Text(kHeatLeft - 8 - Canvas::TextWidth(name), HeatmapCell(r, 0).y + kHeatCell / 2 - 3,
                name, kBlack);
  }
  for (int c = 0; c < cols; ++c) {
    const CellBox box = HeatmapCell(rows - 1, c);
    canvas.TextCentered(box.x + kHeatCell / 2, box.y + kHeatCell + 14,
                        StrategyName(matrix.eval_strategies[c]), kBlack);
  }
  // Colour bar, top = hi.
  for (int y = 0; y < grid_h; ++y) {
    const double t = 1.0 - static_cast<double>(y) / std::max(1, grid_h - 1);
    canvas.FillRect(bar_x, kHeatTop + y, bar_x + 20, kHeatTop + y + 1, Colormap(t));
  }
  canvas.StrokeRect(bar_x - 1, kHeatTop - 1, bar_x + 21, kHeatTop + grid_h + 1, kAxis);
  canvas.Text(bar_x + 26, kHeatTop, FormatFixed(cr.hi, 2), kBlack);
  canvas.Text(bar_x + 26, kHeatTop + grid_h - 7, FormatFixed(cr.lo, 2), kBlack);
  return canvas.raster();
}

PlotArea CurvePlotArea() { return kCurveArea; }

Rgb SubgroupColor(DilationSubgroup subgroup) {
  switch (subgroup) {
    case DilationSubgroup::kPositivesOnly: return {255, 127, 14};
    case DilationSubgroup::kNegativesOnly: return {31, 119, 180};
    case DilationSubgroup::kAll: break;
  }
  return {44, 160, 44};
}

RgbRaster RenderCurves(std::span<const DilationCurve> curves) {
  if (curves.empty()) Fail(ErrorCode::kInvalidArgument, "no curves to render");
  std::set<int> grid;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    if (c.factors.empty()) Fail(ErrorCode::kInvalidArgument, "empty dilation curve");
    c.Validate();
    grid.insert(c.factors.begin(), c.factors.end());
    for (size_t i = 0; i < c.factors.size(); ++i) {
      if (!std::isfinite(c.auc_mean[i]) || !std::isfinite(c.auc_std[i])) {
        Fail(ErrorCode::kInvalidArgument, "non-finite curve value");
      }
      lo = std::min(lo, c.auc_mean[i] - c.auc_std[i]);
      hi = std::max(hi, c.auc_mean[i] + c.auc_std[i]);
    }
  }
  const double pad = std::max(0.05 * (hi - lo), 0.02);
  lo -= pad;
  hi += pad;
  const std::vector<int> xs(grid.begin(), grid.end());
  const PlotArea a = kCurveArea;
  const auto px = [&](int factor) {
    const int i = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), factor) - xs.begin());
    if (xs.size() == 1) return (a.x0 + a.x1) / 2;
    return a.x0 + 12 + i * (a.x1 - a.x0 - 24) / static_cast<int>(xs.size() - 1);
  };
  const auto py = [&](double v) {
    return a.y1 - 1 - static_cast<int>(std::lround((v - lo) / (hi - lo) * (a.y1 - a.y0 - 1)));
  };

  Canvas canvas(kCurveWidth, kCurveHeight);
  std::string title = curves[0].class_name + " " + std::string(StrategyName(curves[0].strategy));
  canvas.Text(a.x0, 12, title, kBlack, 2);
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    const int y = py(v);
    canvas.FillRect(a.x0, y, a.x1, y + 1, kGrid);
    const std::string label = FormatFixed(v, 2);
    canvas.Text(a.x0 - 6 - Canvas::TextWidth(label), y - 3, label, kBlack);
  }
  for (int f : xs) {
    const std::string label = std::to_string(f);
    canvas.TextCentered(px(f), a.y1 + 12, label, kBlack);
    canvas.FillRect(px(f), a.y1, px(f) + 1, a.y1 + 4, kAxis);
  }
  canvas.TextCentered((a.x0 + a.x1) / 2, a.y1 + 30, "DILATION FACTOR (PX)", kAxis);
  canvas.Text(8, a.y0 - 14, "AUC", kAxis);

  std::vector<Rgb> colors;
  std::vector<int> seen(3, 0);
  for (const auto& c : curves) {
    const int k = seen[static_cast<int>(c.subgroup)]++;
    colors.push_back(Darken(SubgroupColor(c.subgroup), std::pow(0.65, k)));
  }
  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const size_t n = c.factors.size();
    if (n == 1) {
      const int x = px(c.factors[0]);
      canvas.BlendRect(x - 4, py(c.auc_mean[0] + c.auc_std[0]), x + 5,
                       py(c.auc_mean[0] - c.auc_std[0]) + 1, colors[ci], 0.25);
      continue;
    }
    for (size_t i = 0; i + 1 < n; ++i) {
      const int xa = px(c.factors[i]), xb = px(c.factors[i + 1]);
      const int last = i + 2 == n ? xb : xb - 1;
      for (int x = xa; x <= last; ++x) {
        const double f = static_cast<double>(x - xa) / (xb - xa);
        const double m = c.auc_mean[i] + f * (c.auc_mean[i + 1] - c.auc_mean[i]);
        const double s = c.auc_std[i] + f * (c.auc_std[i + 1] - c.auc_std[i]);
        canvas.BlendRect(x, py(m + s), x + 1, py(m - s) + 1, colors[ci], 0.25);
      }
    }
  }
  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    for (size_t i = 0; i + 1 < c.factors.size(); ++i) {
      canvas.Line(px(c.factors[i]), py(c.auc_mean[i]), px(c.factors[i + 1]),
                  py(c.auc_mean[i + 1]), colors[ci], 2);
    }
    if (c.factors.size() == 1) {
      const int x = px(c.factors[0]), y = py(c.auc_mean[0]);
      canvas.FillRect(x - 2, y - 2, x + 3, y + 3, colors[ci]);
    }
  }
  canvas.StrokeRect(a.x0, a.y0, a.x1, a.y1, kAxis);

  int lx = a.x0, ly = a.y1 + 48;
  for (size_t ci = 0; ci < curves.size(); ++ci) {
    const auto& c = curves[ci];
    const std::string label = c.class_name + " " + std::string(StrategyName(c.strategy)) +
                              " " + std::string(SubgroupName(c.subgroup));
    const int w = 16 + Canvas::TextWidth(label) + 18;
    if (lx + w > kCurveWidth - 10) {
      lx = a.x0;
      ly += 14;
    }
    canvas.FillRect(lx, ly, lx + 10, ly + 7, colors[ci]);
    canvas.Text(lx + 16, ly, label, kBlack);
    lx += w;
  }
  return canvas.raster();
}

Rgb StrategyColor(MaskingStrategy strategy) {
  switch (strategy) {
    case MaskingStrategy::kFull: return {80, 80, 80};
    case MaskingStrategy::kNoRoi: return {31, 119, 180};
    case MaskingStrategy::kNoRoiBb: return {140, 190, 225};
    case MaskingStrategy::kOnlyRoi: return {230, 110, 0};
    case MaskingStrategy::kOnlyRoiBb: return {253, 180, 110};
  }
  return kBlack;
}

RgbRaster RenderProjection(std::span<const ProjectedPoint> points) {
  if (points.empty()) Fail(ErrorCode::kInvalidArgument, "no points to render");
  double x_lo = points[0].x, x_hi = points[0].x, y_lo = points[0].y, y_hi = points[0].y;
  for (const auto& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      Fail(ErrorCode::kInvalidArgument, "non-finite projected point");
    }
    x_lo = std::min(x_lo, p.x);
    x_hi = std::max(x_hi, p.x);
    y_lo = std::min(y_lo, p.y);
    y_hi = std::max(y_hi, p.y);
  }
  const double x_pad = std::max(0.05 * (x_hi - x_lo), 1e-9);
  const double y_pad = std::max(0.05 * (y_hi - y_lo), 1e-9);
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;
  const PlotArea a = {30, 40, 570, 480};
  Canvas canvas(600, 530);
  canvas.Text(a.x0, 12, "T-SNE OF EMBEDDINGS", kBlack, 2);
  canvas.StrokeRect(a.x0, a.y0, a.x1, a.y1, kAxis);
  std::set<MaskingStrategy> present;
  for (const auto& p : points) {
    const int x = a.x0 + 2 +
                  static_cast<int>(std::lround((p.x - x_lo) / (x_hi - x_lo) * (a.x1 - a.x0 - 5)));
    const int y = a.y1 - 3 -
                  static_cast<int>(std::lround((p.y - y_lo) / (y_hi - y_lo) * (a.y1 - a.y0 - 5)));
    canvas.FillRect(x - 1, y - 1, x + 2, y + 2, StrategyColor(p.strategy));
    present.insert(p.strategy);
  }
  int lx = a.x0;
  for (MaskingStrategy s : present) {
    canvas.FillRect(lx, a.y1 + 16, lx + 10, a.y1 + 23, StrategyColor(s));
    canvas.Text(lx + 16, a.y1 + 16, StrategyName(s), kBlack);
    lx += 16 + Canvas::TextWidth(StrategyName(s)) + 18;
  }
  return canvas.raster();
}

}  // namespace maskaudit
