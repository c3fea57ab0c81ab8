// Copyright 2026 The LML-DAP Authors
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

#include "lmldap/chunker.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace lmldap {
namespace {

using ::lmldap::testing::data_path;

TEST(TokenCountTest, CeilOfCodePointsOverFour) {
  EXPECT_EQ(count_tokens(""), 0u);
  EXPECT_EQ(count_tokens("a"), 1u);
  EXPECT_EQ(count_tokens("abcd"), 1u);
  EXPECT_EQ(count_tokens("abcde"), 2u);
  // Four two-byte code points are still one token.
  EXPECT_EQ(count_tokens("\xC3\xA9\xC3\xA9\xC3\xA9\xC3\xA9"), 1u);
}

TEST(TokenCountTest, CustomCounter) {
  TokenCounter words{"words", [](std::string_view s) {
                       std::size_t n = 0;
                       bool in = false;
                       for (char c : s) {
                         const bool sp = c == ' ' || c == '\n' || c == ',';
                         if (!sp && !in) ++n;
                         in = !sp;
                       }
                       return n;
                     }};
  EXPECT_EQ(count_tokens("a b,c\nd", words), 4u);
}

TEST(PackChunksTest, IrisFitsOneDefaultChunk) {
  const Table t = load_csv_file(data_path("iris.csv"), "species");
  const auto chunks = pack_chunks(t);
  ASSERT_EQ(chunks.size(), 1u);
  EXPECT_EQ(chunks[0].rows, (RowRange{0, 150}));
  EXPECT_EQ(chunks[0].token_count, count_tokens(to_csv_text(t)));
}

TEST(PackChunksTest, SmallBudgetProducesContiguousMaximalChunks) {
  const Table t = load_csv_file(data_path("iris.csv"), "species");
  const std::size_t budget = 100;
  const auto chunks = pack_chunks(t, budget);
  ASSERT_GT(chunks.size(), 1u);
  std::size_t next = 0;
  for (const auto& c : chunks) {
    EXPECT_EQ(c.rows.begin, next);
    EXPECT_LE(c.token_count, budget);
    EXPECT_EQ(c.token_count, count_tokens(to_csv_text(t, c.rows)));
    if (c.rows.end < t.row_count()) {
      EXPECT_GT(count_tokens(to_csv_text(t, RowRange{c.rows.begin, c.rows.end + 1})), budget);
    }
    next = c.rows.end;
  }
  EXPECT_EQ(next, t.row_count());
}

TEST(PackChunksTest, Errors) {
  const Table t = load_csv_text("a,label\n1,A\n2,B\n", "label");
  try {
    pack_chunks(t, 2);
    FAIL();
  } catch (const ChunkError& e) {
    EXPECT_EQ(e.kind(), ChunkError::Kind::kRowExceedsBudget);
    EXPECT_EQ(e.row(), 0u);
  }
  try {
    pack_chunks(Table::from_rows({"a", "label"}, "label", {}));
    FAIL();
  } catch (const ChunkError& e) {
    EXPECT_EQ(e.kind(), ChunkError::Kind::kEmptyTable);
  }
}

TEST(PackChunksTest, ExactBudgetBoundary) {
  const Table t = load_csv_text("a,label\n1,A\n2,B\n3,C\n", "label");
  // "a,label\n1,A\n2,B\n" is 16 chars = 4 tokens.
  const auto chunks = pack_chunks(t, 4);
  ASSERT_EQ(chunks.size(), 2u);
  EXPECT_EQ(chunks[0].rows, (RowRange{0, 2}));
  EXPECT_EQ(chunks[1].rows, (RowRange{2, 3}));
}

}  // namespace
}  // namespace lmldap
