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

#ifndef TSFIT_SRC_CHECKPOINT_IO_H_
#define TSFIT_SRC_CHECKPOINT_IO_H_

#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

namespace tsfit::internal {

// Checkpoint envelope shared by predictors and generators: a one-line JSON
// header, then the flat parameter array, one 17-significant-digit decimal
// per line.
void WriteCheckpoint(const std::filesystem::path& path, const nlohmann::ordered_json& header,
                     const std::vector<double>& params);

struct Checkpoint {
  nlohmann::json header;
  std::vector<double> params;
};

Checkpoint ReadCheckpoint(const std::filesystem::path& path, const char* expected_kind);

}  // namespace tsfit::internal

#endif  // TSFIT_SRC_CHECKPOINT_IO_H_
