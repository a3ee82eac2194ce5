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

#ifndef MASKAUDIT_REPORT_CANVAS_H_
#define MASKAUDIT_REPORT_CANVAS_H_

#include <cstdint>
#include <string_view>

#include "core/png_io.h"

namespace maskaudit {

struct Rgb {
  uint8_t r = 0;
  uint8_t g = 0;
  uint8_t b = 0;
  bool operator==(const Rgb&) const = default;
};

inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kBlack{0, 0, 0};

// Sequential blue-green-yellow ramp; t is clamped to [0, 1].
Rgb Colormap(double t);

// Perceived brightness in [0, 255].
double Luminance(Rgb c);

// Integer-coordinate raster with clipping. Text uses a built-in 5x7 font;
// lowercase letters draw as capitals.
class Canvas {
 public:
  Canvas(int width, int height, Rgb background = kWhite);

  int width() const { return raster_.width; }
  int height() const { return raster_.height; }
  Rgb Get(int x, int y) const;
  void Set(int x, int y, Rgb c);
  // alpha in [0, 1]; the result is rounded to the nearest byte.
  void Blend(int x, int y, Rgb c, double alpha);

  // Half-open rectangles [x0, x1) x [y0, y1).
  void FillRect(int x0, int y0, int x1, int y1, Rgb c);
  void BlendRect(int x0, int y0, int x1, int y1, Rgb c, double alpha);
  void StrokeRect(int x0, int y0, int x1, int y1, Rgb c);
  // Square brush of side `thickness` centred on each Bresenham step.
  void Line(int x0, int y0, int x1, int y1, Rgb c, int thickness = 1);

  // Top-left anchored. Glyph cells are 6 x 8 pixels times `scale`.
  void Text(int x, int y, std::string_view text, Rgb c, int scale = 1);
  void TextCentered(int cx, int cy, std::string_view text, Rgb c, int scale = 1);
  static int TextWidth(std::string_view text, int scale = 1);
  static int TextHeight(int scale = 1) { return 7 * scale; }

  const RgbRaster& raster() const { return raster_; }

 private:
  RgbRaster raster_;
};

}  // namespace maskaudit

#endif  // MASKAUDIT_REPORT_CANVAS_H_
