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

#ifndef MASKAUDIT_REPORT_FIGURES_H_
#define MASKAUDIT_REPORT_FIGURES_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/png_io.h"
#include "embeddings/embeddings.h"
#include "evaluation/pipeline.h"
#include "report/canvas.h"

namespace maskaudit {

struct ColorRange {
  double lo = 0.0;
  double hi = 1.0;
};

// Smallest and largest cell mean. A constant matrix maps to the top colour.
ColorRange AutoColorRange(const AucMatrix& matrix);

// Fixed-point text with `digits` decimals, for display only.
std::string FormatFixed(double value, int digits);

// Annotated grid: rows are training strategies, columns evaluation
// strategies, colour from the matrix's own range unless one is given.
// Validates the matrix first (kIncompleteRun, kInvalidArgument).
RgbRaster RenderHeatmap(const AucMatrix& matrix,
                        std::optional<ColorRange> range = std::nullopt);

// Top-left pixel of a heatmap cell and the cell side, in pixels.
struct CellBox {
  int x = 0;
  int y = 0;
  int size = 0;
};
CellBox HeatmapCell(int row, int col);

// Mean lines with +/- one std bands on a shared x axis (the union of all
// factor grids, evenly spaced). Positive-subgroup curves are orange,
// negative-subgroup curves blue. Throws kInvalidArgument on an empty list,
// an empty curve or inconsistent lengths.
RgbRaster RenderCurves(std::span<const DilationCurve> curves);

// Plot area of RenderCurves, half-open, in pixels.
struct PlotArea {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
};
PlotArea CurvePlotArea();
Rgb SubgroupColor(DilationSubgroup subgroup);

// Scatter of a joint projection, coloured by strategy.
RgbRaster RenderProjection(std::span<const ProjectedPoint> points);
Rgb StrategyColor(MaskingStrategy strategy);

}  // namespace maskaudit

#endif  // MASKAUDIT_REPORT_FIGURES_H_
