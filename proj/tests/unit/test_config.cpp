// Copyright 2026 The rctc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rctc/config.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "rctc/error.hpp"

namespace rctc {
namespace {

KeyValueConfig parse(const std::string& text) {
  std::istringstream in(text);
  return KeyValueConfig::parse(in, "test");
}

TEST(KeyValueConfig, ParsesValuesAndComments) {
  const auto cfg = parse("# header\nrate = 5   # trailing\n\nname=  plt , rc_tc\nF = 1, 0.1; 0, 1\nn = 1e6\n");
  EXPECT_EQ(cfg.get_double("rate"), 5.0);
  EXPECT_EQ(cfg.get_strings("name"), (std::vector<std::string>{"plt", "rc_tc"}));
  EXPECT_EQ(cfg.get_int("n"), 1000000);
  const Matrix f = cfg.get_matrix("F");
  ASSERT_EQ(f.rows(), 2);
  EXPECT_EQ(f(0, 1), 0.1);
  EXPECT_EQ(f(1, 1), 1.0);
  EXPECT_EQ(cfg.get_double("missing", 2.5), 2.5);
}

TEST(KeyValueConfig, ErrorsNameTheField) {
  const auto cfg = parse("rate = fast\nn = 1.5\nF = 1, 2; 3\n");
  try {
    cfg.get_double("rate");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "rate");
    EXPECT_NE(std::string(e.what()).find("rate"), std::string::npos);
  }
  EXPECT_THROW(cfg.get_int("n"), ConfigError);
  EXPECT_THROW(cfg.get_matrix("F"), ConfigError);
  EXPECT_THROW(cfg.get_string("absent"), ConfigError);
}

TEST(KeyValueConfig, MalformedLines) {
  EXPECT_THROW(parse("just words\n"), ConfigError);
  EXPECT_THROW(parse("a = 1\na = 2\n"), ConfigError);
  EXPECT_THROW(parse(" = 2\n"), ConfigError);
}

TEST(KeyValueConfig, MissingFileMentionsPath) {
  try {
    KeyValueConfig::load("/no/such/dir/file.conf");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("/no/such/dir/file.conf"), std::string::npos);
  }
}

TEST(KeyValueConfig, Booleans) {
  const auto cfg = parse("a = yes\nb = off\nc = maybe\n");
  EXPECT_TRUE(cfg.get_bool("a", false));
  EXPECT_FALSE(cfg.get_bool("b", true));
  EXPECT_THROW(cfg.get_bool("c", true), ConfigError);
}

}  // namespace
}  // namespace rctc
