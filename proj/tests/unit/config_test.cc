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

#include <fstream>

#include <gtest/gtest.h>

#include "tsfit/error.h"
#include "unit/test_util.h"

namespace tsfit {
namespace {

constexpr const char* kText = R"(seed = 7

[dataset]
type = spike
n_samples = 100
noise_std = 0.03
trend = [0, 0.003, 0.065]

[explain]
methods = FIT, FO
heatmap = yes
)";

std::string MessageOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidConfig);
    return e.what();
  }
  ADD_FAILURE() << "no error thrown";
  return "";
}

TEST(ConfigTest, TypedAccess) {
  const auto cfg = Config::Parse(kText);
  EXPECT_EQ(cfg.GetInt("seed"), 7);
  EXPECT_EQ(cfg.GetString("dataset.type"), "spike");
  EXPECT_DOUBLE_EQ(cfg.GetDouble("dataset.noise_std"), 0.03);
  EXPECT_TRUE(cfg.GetBool("explain.heatmap"));
  EXPECT_EQ(cfg.GetDoubleList("dataset.trend"), (std::vector<double>{0, 0.003, 0.065}));
  EXPECT_EQ(cfg.GetStringList("explain.methods"), (std::vector<std::string>{"FIT", "FO"}));
  EXPECT_EQ(cfg.GetIntList("dataset.n_samples"), (std::vector<int64_t>{100}));
}

TEST(ConfigTest, Fallbacks) {
  const auto cfg = Config::Parse(kText);
  EXPECT_EQ(cfg.GetInt("dataset.t", 80), 80);
  EXPECT_EQ(cfg.GetInt("dataset.n_samples", 5), 100);
  EXPECT_FALSE(cfg.GetBool("evaluate.window", false));
  EXPECT_EQ(cfg.GetString("output.dir", "out"), "out");
  EXPECT_EQ(cfg.GetDoubleList("x.y", {1.0}), (std::vector<double>{1.0}));
}

TEST(ConfigTest, ErrorsNameThePath) {
  const auto cfg = Config::Parse(kText);
  EXPECT_EQ(MessageOf([&] { cfg.GetInt("dataset.type"); }),
            "InvalidConfig: dataset.type: expected an integer, got 'spike'");
  EXPECT_NE(MessageOf([&] { cfg.GetDouble("dataset.t"); }).find("dataset.t: required field is missing"),
            std::string::npos);
  EXPECT_NE(MessageOf([&] { cfg.GetBool("dataset.type"); }).find("a boolean"), std::string::npos);
  EXPECT_NE(MessageOf([&] { cfg.GetDoubleList("explain.methods"); }).find("explain.methods"),
            std::string::npos);
  EXPECT_NE(MessageOf([] { Config::Parse("[broken\nx = 1\n"); }).find("line 1"), std::string::npos);
}

TEST(ConfigTest, EmptyListParses) {
  const auto cfg = Config::Parse("[a]\nv = []\nw =\n");
  EXPECT_TRUE(cfg.GetDoubleList("a.v").empty());
  EXPECT_TRUE(cfg.GetStringList("a.w").empty());
}

TEST(ConfigTest, CanonicalIgnoresLayout) {
  const auto a = Config::Parse("[b]\ny = 2\nx = 1\n[a]\nz = 3\n");
  const auto b = Config::Parse("[a]\n  z=3\n\n[b]\nx = 1\ny = 2\n");
  EXPECT_EQ(a.Canonical(), b.Canonical());
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  EXPECT_EQ(a.Canonical({"a"}), "a.z = 3\n");
}

TEST(ConfigTest, HashIgnoresOutputSection) {
  auto a = Config::Parse(kText);
  auto b = a;
  b.Set("output.dir", "/elsewhere");
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  b.Set("seed", "8");
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
  EXPECT_EQ(ConfigHash(a).size(), 16u);
}

TEST(ConfigTest, Fnv1aReferenceValues) {
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1aHex("foobar"), "85944171f73967e8");
}

TEST(ConfigTest, LoadFromFile) {
  const auto dir = testing::TempDir("config_load");
  std::ofstream(dir / "c.ini") << kText;
  EXPECT_EQ(Config::Load(dir / "c.ini").GetInt("seed"), 7);
  try {
    Config::Load(dir / "missing.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kIo);
  }
}

}  // namespace
}  // namespace tsfit
