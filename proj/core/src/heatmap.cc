/*
 * Copyright 2026 The tsfit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "tsfit/heatmap.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <fmt/format.h>

#include "tsfit/error.h"

namespace tsfit {
namespace {

constexpr int kCellW = 8;
constexpr int kCellH = 22;
constexpr int kLeft = 90;
constexpr int kTop = 40;
constexpr int kLegendW = 200;
constexpr int kLegendH = 12;
constexpr int kLegendSteps = 41;

// Blue (-1) -> white (0) -> red (+1).
std::string Color(double u) {
  u = std::clamp(u, -1.0, 1.0);
  int r = 255, g = 255, b = 255;
  if (u > 0) {
    g = b = static_cast<int>(std::lround(255.0 * (1.0 - u)));
    r = static_cast<int>(std::lround(255.0 - 77.0 * u));
  } else if (u < 0) {
    r = g = static_cast<int>(std::lround(255.0 * (1.0 + u)));
    b = static_cast<int>(std::lround(255.0 + 77.0 * u));
  }
  return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string RenderHeatmapSvg(const ImportanceMatrix& m, const std::string& dataset) {
  const auto rows = m.scores.rows();
  const auto cols = m.scores.cols();
  double scale = rows * cols > 0 ? m.scores.cwiseAbs().maxCoeff() : 0.0;
  if (!std::isfinite(scale)) scale = 0.0;
  const int grid_w = static_cast<int>(cols) * kCellW;
  const int grid_h = static_cast<int>(rows) * kCellH;
  const int width = kLeft + std::max(grid_w, kLegendW) + 20;
  const int height = kTop + grid_h + 70;

  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" "
      "viewBox=\"0 0 {} {}\" font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height, width, height);
  s += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", width, height);
  s += fmt::format("<text x=\"{}\" y=\"20\" font-size=\"14\">{} {} sample {}</text>\n", kLeft,
                   Escape(m.method), Escape(dataset), m.subject);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string label = r < static_cast<Eigen::Index>(m.row_labels.size())
                                  ? m.row_labels[r]
                                  : fmt::format("x{}", r);
    const int y = kTop + static_cast<int>(r) * kCellH;
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", kLeft - 6,
                     y + kCellH / 2 + 4, Escape(label));
    for (Eigen::Index t = 0; t < cols; ++t) {
      const double v = m.scores(r, t);
      const double u = scale > 0 && std::isfinite(v) ? v / scale : 0.0;
      s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                       kLeft + static_cast<int>(t) * kCellW, y, kCellW, kCellH, Color(u));
    }
  }
  s += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444444\"/>\n",
      kLeft, kTop, grid_w, grid_h);
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">time</text>\n",
                   kLeft + grid_w / 2, kTop + grid_h + 16);

  // Legend.
  const int ly = kTop + grid_h + 30;
  const double step_w = static_cast<double>(kLegendW) / kLegendSteps;
  for (int i = 0; i < kLegendSteps; ++i) {
    const double u = -1.0 + 2.0 * i / (kLegendSteps - 1);
    s += fmt::format("<rect x=\"{:.2f}\" y=\"{}\" width=\"{:.2f}\" height=\"{}\" fill=\"{}\"/>\n",
                     kLeft + i * step_w, ly, step_w + 0.01, kLegendH, Color(u));
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"start\">{:.3g}</text>\n", kLeft,
                   ly + kLegendH + 13, -scale);
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">0</text>\n",
                   kLeft + kLegendW / 2, ly + kLegendH + 13);
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3g}</text>\n",
                   kLeft + kLegendW, ly + kLegendH + 13, scale);
  s += "</svg>\n";
  return s;
}

void WriteHeatmapSvg(const ImportanceMatrix& m, const std::string& dataset,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, fmt::format("cannot write {}", path.string()));
  out << RenderHeatmapSvg(m, dataset);
  if (!out) throw Error(ErrorKind::kIo, fmt::format("write failed for {}", path.string()));
}

}  // namespace tsfit
