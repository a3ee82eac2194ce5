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

#include "report/canvas.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

#include "core/error.h"

namespace maskaudit {
namespace {

using Glyph = std::array<uint8_t, 7>;

// Rows top to bottom, bit 4 is the leftmost column.
const Glyph& GlyphFor(char ch) {
  static const Glyph kDigits[10] = {
      {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E},
      {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E},
      {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E},
      {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},
      {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}};
  static const Glyph kLetters[26] = {
      {0x0E, 0x11, 0x11, 0x11, 0x1F, 0x11, 0x11}, {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E},
      {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}, {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C},
      {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}, {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}, {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11},
      {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}, {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C},
      {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}, {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F},
      {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}, {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},
      {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10},
      {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}, {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11},
      {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}, {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},
      {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}, {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04},
      {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}, {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11},
      {0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04}, {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}};
  static const Glyph kSpace = {0, 0, 0, 0, 0, 0, 0};
  static const Glyph kDot = {0, 0, 0, 0, 0, 0x0C, 0x0C};
  static const Glyph kMinus = {0, 0, 0, 0x1F, 0, 0, 0};
  static const Glyph kUnderscore = {0, 0, 0, 0, 0, 0, 0x1F};
  static const Glyph kSlash = {0, 0x01, 0x02, 0x04, 0x08, 0x10, 0};
  static const Glyph kColon = {0, 0x0C, 0x0C, 0, 0x0C, 0x0C, 0};
  static const Glyph kOpen = {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02};
  static const Glyph kClose = {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08};
  static const Glyph kPercent = {0x18, 0x19, 0x02, 0x04, 0x08, 0x13, 0x03};
  static const Glyph kEquals = {0, 0, 0x1F, 0, 0x1F, 0, 0};
  static const Glyph kPlus = {0, 0x04, 0x04, 0x1F, 0x04, 0x04, 0};
  static const Glyph kComma = {0, 0, 0, 0, 0x0C, 0x04, 0x08};
  static const Glyph kStar = {0, 0x04, 0x15, 0x0E, 0x15, 0x04, 0};
  static const Glyph kUnknown = {0x0E, 0x11, 0x01, 0x02, 0x04, 0, 0x04};
  if (ch >= '0' && ch <= '9') return kDigits[ch - '0'];
  if (ch >= 'A' && ch <= 'Z') return kLetters[ch - 'A'];
  if (ch >= 'a' && ch <= 'z') return kLetters[ch - 'a'];
  switch (ch) {
    case ' ': return kSpace;
    case '.': return kDot;
    case '-': return kMinus;
    case '_': return kUnderscore;
    case '/': return kSlash;
    case ':': return kColon;
    case '(': return kOpen;
    case ')': return kClose;
    case '%': return kPercent;
    case '=': return kEquals;
    case '+': return kPlus;
    case ',': return kComma;
    case '*': return kStar;
    default: return kUnknown;
  }
}

}  // namespace

Rgb Colormap(double t) {
  // Sampled from a viridis-like ramp.
  static const double kStops[][3] = {{68, 1, 84},    {59, 82, 139},  {33, 145, 140},
                                     {94, 201, 98},  {253, 231, 37}};
  constexpr int kLast = 4;
  if (!(t > 0.0)) t = 0.0;
  if (t > 1.0) t = 1.0;
  const double pos = t * kLast;
  const int i = std::min(static_cast<int>(pos), kLast - 1);
  const double f = pos - i;
  const auto lerp = [&](int ch) {
    return static_cast<uint8_t>(std::lround(kStops[i][ch] + f * (kStops[i + 1][ch] - kStops[i][ch])));
  };
  return {lerp(0), lerp(1), lerp(2)};
}

double Luminance(Rgb c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

Canvas::Canvas(int width, int height, Rgb background) {
  if (width <= 0 || height <= 0) Fail(ErrorCode::kInvalidArgument, "empty canvas");
  raster_.width = width;
  raster_.height = height;
  raster_.pixels.resize(static_cast<size_t>(width) * height * 3);
  for (size_t i = 0; i < raster_.pixels.size(); i += 3) {
    raster_.pixels[i] = background.r;
    raster_.pixels[i + 1] = background.g;
    raster_.pixels[i + 2] = background.b;
  }
}

Rgb Canvas::Get(int x, int y) const {
  const size_t i = (static_cast<size_t>(y) * raster_.width + x) * 3;
  return {raster_.pixels[i], raster_.pixels[i + 1], raster_.pixels[i + 2]};
}

void Canvas::Set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= raster_.width || y >= raster_.height) return;
  const size_t i = (static_cast<size_t>(y) * raster_.width + x) * 3;
  raster_.pixels[i] = c.r;
  raster_.pixels[i + 1] = c.g;
  raster_.pixels[i + 2] = c.b;
}

void Canvas::Blend(int x, int y, Rgb c, double alpha) {
  if (x < 0 || y < 0 || x >= raster_.width || y >= raster_.height) return;
  const Rgb o = Get(x, y);
  const auto mix = [alpha](uint8_t a, uint8_t b) {
    return static_cast<uint8_t>(std::lround(a * (1.0 - alpha) + b * alpha));
  };
  Set(x, y, {mix(o.r, c.r), mix(o.g, c.g), mix(o.b, c.b)});
}

void Canvas::FillRect(int x0, int y0, int x1, int y1, Rgb c) {
  for (int y = std::max(0, y0); y < std::min(y1, raster_.height); ++y) {
    for (int x = std::max(0, x0); x < std::min(x1, raster_.width); ++x) Set(x, y, c);
  }
}

void Canvas::BlendRect(int x0, int y0, int x1, int y1, Rgb c, double alpha) {
  for (int y = std::max(0, y0); y < std::min(y1, raster_.height); ++y) {
    for (int x = std::max(0, x0); x < std::min(x1, raster_.width); ++x) Blend(x, y, c, alpha);
  }
}

void Canvas::StrokeRect(int x0, int y0, int x1, int y1, Rgb c) {
  FillRect(x0, y0, x1, y0 + 1, c);
  FillRect(x0, y1 - 1, x1, y1, c);
  FillRect(x0, y0, x0 + 1, y1, c);
  FillRect(x1 - 1, y0, x1, y1, c);
}

void Canvas::Line(int x0, int y0, int x1, int y1, Rgb c, int thickness) {
  const int lo = -(thickness - 1) / 2, hi = thickness / 2;
  const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (true) {
    FillRect(x0 + lo, y0 + lo, x0 + hi + 1, y0 + hi + 1, c);
    if (x0 == x1 && y0 == y1) break;
    const int e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::Text(int x, int y, std::string_view text, Rgb c, int scale) {
  for (char ch : text) {
    const Glyph& g = GlyphFor(ch);
    for (int row = 0; row < 7; ++row) {
      for (int col = 0; col < 5; ++col) {
        if (g[row] & (0x10 >> col)) {
          FillRect(x + col * scale, y + row * scale, x + (col + 1) * scale,
                   y + (row + 1) * scale, c);
        }
      }
    }
    x += 6 * scale;
  }
}

void Canvas::TextCentered(int cx, int cy, std::string_view text, Rgb c, int scale) {
  Text(cx - TextWidth(text, scale) / 2, cy - TextHeight(scale) / 2, text, c, scale);
}

int Canvas::TextWidth(std::string_view text, int scale) {
  return text.empty() ? 0 : (static_cast<int>(text.size()) * 6 - 1) * scale;
}

}  // namespace maskaudit
