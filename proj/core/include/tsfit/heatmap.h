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

#ifndef TSFIT_HEATMAP_H_
#define TSFIT_HEATMAP_H_

#include <filesystem>
#include <string>

#include "tsfit/fit.h"

namespace tsfit {

// Feature x time grid with a blue-white-red scale symmetric around 0, a
// legend, and the title "{method} {dataset} sample {id}". Output depends only
// on the inputs.
std::string RenderHeatmapSvg(const ImportanceMatrix& m, const std::string& dataset);

void WriteHeatmapSvg(const ImportanceMatrix& m, const std::string& dataset,
                     const std::filesystem::path& path);

}  // namespace tsfit

#endif  // TSFIT_HEATMAP_H_
