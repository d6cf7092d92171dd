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

#include "tsfit/config.h"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string/trim.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "tsfit/error.h"

namespace tsfit {
namespace {

[[noreturn]] void Bad(const std::string& path, const std::string& what, const std::string& value) {
  throw Error(ErrorKind::kInvalidConfig, fmt::format("{}: expected {}, got '{}'", path, what, value));
}

int64_t ParseInt(const std::string& path, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) Bad(path, "an integer", s);
  return v;
}

double ParseDouble(const std::string& path, const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) Bad(path, "a number", s);
  return v;
}

bool ParseBool(const std::string& path, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  Bad(path, "a boolean", s);
}

std::vector<std::string> SplitList(std::string s) {
  boost::algorithm::trim(s);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  boost::algorithm::trim(s);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    boost::algorithm::trim(item);
    out.push_back(item);
  }
  return out;
}

}  // namespace

Config Config::Parse(const std::string& text) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw Error(ErrorKind::kInvalidConfig,
                fmt::format("line {}: {}", e.line(), e.message()));
  }
  Config cfg;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      cfg.entries_[key] = boost::algorithm::trim_copy(node.data());
      continue;
    }
    for (const auto& [sub, leaf] : node) {
      cfg.entries_[key + "." + sub] = boost::algorithm::trim_copy(leaf.data());
    }
  }
  return cfg;
}

Config Config::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, fmt::format("cannot open config {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return Parse(buf.str());
}

bool Config::Has(const std::string& path) const { return entries_.count(path) > 0; }

const std::string& Config::Raw(const std::string& path) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) {
    throw Error(ErrorKind::kInvalidConfig, fmt::format("{}: required field is missing", path));
  }
  return it->second;
}

void Config::Set(const std::string& path, std::string value) { entries_[path] = std::move(value); }

std::string Config::GetString(const std::string& path) const { return Raw(path); }
std::string Config::GetString(const std::string& path, const std::string& fallback) const {
  return Has(path) ? Raw(path) : fallback;
}
int64_t Config::GetInt(const std::string& path) const { return ParseInt(path, Raw(path)); }
int64_t Config::GetInt(const std::string& path, int64_t fallback) const {
  return Has(path) ? GetInt(path) : fallback;
}
double Config::GetDouble(const std::string& path) const { return ParseDouble(path, Raw(path)); }
double Config::GetDouble(const std::string& path, double fallback) const {
  return Has(path) ? GetDouble(path) : fallback;
}
bool Config::GetBool(const std::string& path) const { return ParseBool(path, Raw(path)); }
bool Config::GetBool(const std::string& path, bool fallback) const {
  return Has(path) ? GetBool(path) : fallback;
}

std::vector<std::string> Config::GetStringList(const std::string& path) const {
  return SplitList(Raw(path));
}
std::vector<std::string> Config::GetStringList(const std::string& path,
                                               const std::vector<std::string>& fallback) const {
  return Has(path) ? GetStringList(path) : fallback;
}

std::vector<int64_t> Config::GetIntList(const std::string& path) const {
  std::vector<int64_t> out;
  for (const auto& s : SplitList(Raw(path))) out.push_back(ParseInt(path, s));
  return out;
}

std::vector<double> Config::GetDoubleList(const std::string& path) const {
  std::vector<double> out;
  for (const auto& s : SplitList(Raw(path))) out.push_back(ParseDouble(path, s));
  return out;
}
std::vector<double> Config::GetDoubleList(const std::string& path,
                                          const std::vector<double>& fallback) const {
  return Has(path) ? GetDoubleList(path) : fallback;
}

std::string Config::Canonical() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += fmt::format("{} = {}\n", k, v);
  return out;
}

std::string Config::Canonical(const std::vector<std::string>& sections) const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    const auto dot = k.find('.');
    const std::string section = dot == std::string::npos ? "" : k.substr(0, dot);
    for (const auto& s : sections) {
      if (s == section) {
        out += fmt::format("{} = {}\n", k, v);
        break;
      }
    }
  }
  return out;
}

uint64_t Fnv1a(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string Fnv1aHex(const std::string& text) { return fmt::format("{:016x}", Fnv1a(text)); }

std::string ConfigHash(const Config& cfg) {
  std::string text;
  for (const auto& [k, v] : cfg.entries()) {
    if (k.rfind("output.", 0) == 0) continue;
    text += fmt::format("{} = {}\n", k, v);
  }
  return Fnv1aHex(text);
}

}  // namespace tsfit
