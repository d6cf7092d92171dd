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

#ifndef TSFIT_CONFIG_H_
#define TSFIT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tsfit {

// Sectioned key = value configuration. Keys are addressed as
// "section.key"; keys before the first section header are top-level.
// Arrays are comma-separated, optionally wrapped in [ ]. Every typed accessor
// throws InvalidConfig naming the field path on a malformed value.
class Config {
 public:
  Config() = default;

  static Config Parse(const std::string& text);
  static Config Load(const std::filesystem::path& path);

  bool Has(const std::string& path) const;
  // Raw string value; InvalidConfig if missing.
  const std::string& Raw(const std::string& path) const;
  void Set(const std::string& path, std::string value);

  std::string GetString(const std::string& path) const;
  std::string GetString(const std::string& path, const std::string& fallback) const;
  int64_t GetInt(const std::string& path) const;
  int64_t GetInt(const std::string& path, int64_t fallback) const;
  double GetDouble(const std::string& path) const;
  double GetDouble(const std::string& path, double fallback) const;
  bool GetBool(const std::string& path) const;
  bool GetBool(const std::string& path, bool fallback) const;

  std::vector<std::string> GetStringList(const std::string& path) const;
  std::vector<std::string> GetStringList(const std::string& path,
                                         const std::vector<std::string>& fallback) const;
  std::vector<int64_t> GetIntList(const std::string& path) const;
  std::vector<double> GetDoubleList(const std::string& path) const;
  std::vector<double> GetDoubleList(const std::string& path,
                                    const std::vector<double>& fallback) const;

  // Canonical text: sorted "path = value" lines. Stable across key order and
  // whitespace in the source file.
  std::string Canonical() const;
  // Same restricted to keys under the given sections ("" = top-level keys).
  std::string Canonical(const std::vector<std::string>& sections) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string Fnv1aHex(const std::string& text);
uint64_t Fnv1a(const std::string& text);

// Hash of the canonical config minus the [output] section, so the same
// experiment written elsewhere hashes the same.
std::string ConfigHash(const Config& cfg);

}  // namespace tsfit

#endif  // TSFIT_CONFIG_H_
