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

#include "checkpoint_io.h"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "tsfit/dataset.h"
#include "tsfit/error.h"

namespace tsfit::internal {

void WriteCheckpoint(const std::filesystem::path& path, const nlohmann::ordered_json& header,
                     const std::vector<double>& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot open " + path.string() + " for writing");
  nlohmann::ordered_json h = header;
  h["n_params"] = params.size();
  out << h.dump() << '\n';
  for (double v : params) out << FormatReal(v) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed for " + path.string());
}

Checkpoint ReadCheckpoint(const std::filesystem::path& path, const char* expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::kFormat, "line 1: missing checkpoint header");
  Checkpoint ck;
  size_t n = 0;
  try {
    ck.header = nlohmann::json::parse(line);
    if (ck.header.at("kind").get<std::string>() != expected_kind) {
      throw Error(ErrorKind::kFormat, fmt::format("line 1: expected a {} checkpoint", expected_kind));
    }
    if (ck.header.at("version").get<int>() != 1) {
      throw Error(ErrorKind::kFormat, "line 1: unsupported checkpoint version");
    }
    n = ck.header.at("n_params").get<size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("line 1: ") + e.what());
  }
  ck.params.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw Error(ErrorKind::kFormat,
                  fmt::format("line {}: expected {} parameters, file ends after {}", i + 2, n, i));
    }
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0' || errno == ERANGE) {
      throw Error(ErrorKind::kFormat, fmt::format("line {}: bad parameter value '{}'", i + 2, line));
    }
    ck.params.push_back(v);
  }
  return ck;
}

}  // namespace tsfit::internal
