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

#include "lmldap/table.hpp"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace lmldap {
namespace {

using ::lmldap::testing::data_path;

TEST(ParseDecimalTest, AcceptsPlainDecimals) {
  EXPECT_EQ(parse_decimal("5.1"), 5.1);
  EXPECT_EQ(parse_decimal(" -0.25 "), -0.25);
  EXPECT_EQ(parse_decimal("+3"), 3.0);
  EXPECT_EQ(parse_decimal(".5"), 0.5);
  EXPECT_EQ(parse_decimal("1e3"), 1000.0);
  EXPECT_EQ(parse_decimal("2.5E-1"), 0.25);
}

TEST(ParseDecimalTest, RejectsEverythingElse) {
  for (const char* bad : {"", " ", "abc", "1.2.3", "inf", "nan", "0x10", "1e", "--1", "1,5",
                          "5 1", "."}) {
    EXPECT_FALSE(parse_decimal(bad).has_value()) << bad;
  }
}

TEST(FormatDecimalTest, ShortestRoundTrip) {
  EXPECT_EQ(format_decimal(5.0), "5.0");
  EXPECT_EQ(format_decimal(5.006), "5.006");
  EXPECT_EQ(format_decimal(0.1 + 0.2), "0.30000000000000004");
  EXPECT_EQ(format_decimal(-0.0), "0.0");
  EXPECT_EQ(format_decimal(-2.5), "-2.5");
  for (double v : {1e-7, 123456789.125, 3.14159, -1e22}) {
    EXPECT_EQ(parse_decimal(format_decimal(v)), v) << v;
  }
}

TEST(SchemaTest, RejectsDuplicatesAndMissingLabel) {
  EXPECT_THROW(Schema({{"a", ColumnKind::kNumeric}, {"a", ColumnKind::kNumeric}}, "a"),
               TableError);
  try {
    Schema({{"a", ColumnKind::kNumeric}}, "label");
    FAIL();
  } catch (const TableError& e) {
    EXPECT_EQ(e.kind(), TableError::Kind::kMissingLabelColumn);
  }
}

TEST(SchemaTest, LabelIsCategoricalAndExcludedFromFeatures) {
  Schema s({{"x", ColumnKind::kNumeric}, {"y", ColumnKind::kNumeric}, {"z", ColumnKind::kNumeric}},
           "y");
  EXPECT_EQ(s.column(1).kind, ColumnKind::kCategorical);
  EXPECT_EQ(s.label_index(), 1u);
  EXPECT_EQ(s.feature_indices(), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(s.find("z"), 2u);
  EXPECT_FALSE(s.find("w"));
}

TEST(CsvTest, QuotedFieldsCrlfAndBlankLines) {
  const auto recs = parse_csv_records("a,b\r\n\"x, y\",\"he said \"\"hi\"\"\"\r\n\r\n1,\"multi\nline\"\n");
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_EQ(recs[1].second, (std::vector<std::string>{"x, y", "he said \"hi\""}));
  EXPECT_EQ(recs[2].first, 4u);
  EXPECT_EQ(recs[2].second[1], "multi\nline");
}

TEST(CsvTest, UnterminatedQuote) {
  try {
    parse_csv_records("a,b\n1,\"oops\n");
    FAIL();
  } catch (const TableError& e) {
    EXPECT_EQ(e.kind(), TableError::Kind::kUnterminatedQuote);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(CsvTest, SkipInitialSpace) {
  const auto recs = parse_csv_records("a, \"b, c\"", CsvOptions{true});
  EXPECT_EQ(recs[0].second, (std::vector<std::string>{"a", "b, c"}));
}

TEST(LoadCsvTest, InfersKindsAndKeepsText) {
  const Table t = load_csv_text("n,c,m,label\n1.50,x,,A\n2,y,3,B\n", "label");
  EXPECT_EQ(t.row_count(), 2u);
  EXPECT_EQ(t.schema().column(0).kind, ColumnKind::kNumeric);
  EXPECT_EQ(t.schema().column(1).kind, ColumnKind::kCategorical);
  EXPECT_EQ(t.schema().column(2).kind, ColumnKind::kNumeric);
  EXPECT_EQ(t.cell(0, 0), "1.50");
  EXPECT_EQ(t.number(0, 0), 1.5);
  EXPECT_TRUE(t.missing(0, 2));
  EXPECT_TRUE(std::isnan(t.number(0, 2)));
  EXPECT_TRUE(std::isnan(t.number(0, 1)));
  EXPECT_EQ(t.label(1), "B");
}

TEST(LoadCsvTest, ErrorsCarryKindAndLine) {
  auto kind_of = [](const char* text, const char* label) {
    try {
      load_csv_text(text, label);
    } catch (const TableError& e) {
      return std::make_pair(e.kind(), e.line());
    }
    return std::make_pair(TableError::Kind::kOutOfRange, std::size_t{999});
  };
  EXPECT_EQ(kind_of("", "label").first, TableError::Kind::kEmptyInput);
  EXPECT_EQ(kind_of("a,b\n1,2\n", "label").first, TableError::Kind::kMissingLabelColumn);
  EXPECT_EQ(kind_of("a,label\n1,A\n1,2,3\n", "label"),
            std::make_pair(TableError::Kind::kRaggedRow, std::size_t{3}));
  EXPECT_EQ(kind_of("a,label\n1,\n", "label").first, TableError::Kind::kEmptyLabel);
  EXPECT_EQ(kind_of("a,a,label\n1,2,A\n", "label").first, TableError::Kind::kDuplicateColumn);
}

TEST(LoadCsvTest, MissingFileIsIoFailure) {
  EXPECT_THROW(load_csv_file("/nonexistent/data.csv", "label"), std::ios_base::failure);
}

TEST(LoadCsvTest, IrisFixture) {
  const Table t = load_csv_file(data_path("iris.csv"), "species");
  EXPECT_EQ(t.row_count(), 150u);
  EXPECT_EQ(t.column_count(), 5u);
  const auto counts = class_counts(t);
  ASSERT_EQ(counts.size(), 3u);
  EXPECT_EQ(counts[0], std::make_pair(std::string("Iris-setosa"), std::size_t{50}));
  EXPECT_EQ(counts[2].first, "Iris-virginica");
  for (auto c : t.schema().feature_indices()) {
    EXPECT_EQ(t.schema().column(c).kind, ColumnKind::kNumeric);
  }
}

TEST(LoadCsvTest, WineFixtureKeepsSlashInColumnName) {
  const Table t = load_csv_file(data_path("wine.csv"), "class");
  EXPECT_EQ(t.row_count(), 178u);
  EXPECT_TRUE(t.schema().find("od280/od315_of_diluted_wines"));
  const auto counts = class_counts(t);
  ASSERT_EQ(counts.size(), 3u);
  EXPECT_EQ(counts[0].second + counts[1].second + counts[2].second, 178u);
}

TEST(TableTest, RenderRoundTrips) {
  const std::string text = "a,b,label\n1.0,\"x, y\",A\n,\"\"\"q\"\"\",B\n";
  const Table t = load_csv_text(text, "label");
  EXPECT_EQ(to_csv_text(t), text);
  EXPECT_EQ(load_csv_text(to_csv_text(t), "label"), t);
}

TEST(TableTest, SliceAndSubsetRendering) {
  const Table t = load_csv_text("a,b,label\n1,2,A\n3,4,B\n5,6,C\n", "label");
  const Table s = t.slice({1, 3});
  EXPECT_EQ(s.row_count(), 2u);
  EXPECT_EQ(s.label(0), "B");
  EXPECT_EQ(to_csv_text(t, RowRange{1, 2}), "a,b,label\n3,4,B\n");
  EXPECT_EQ(to_csv_text(t, {2, 0}, {2, 0}), "label,a\nC,5\nA,1\n");
  EXPECT_THROW(t.slice({2, 4}), TableError);
  EXPECT_THROW(t.row(3), TableError);
}

TEST(TableTest, SingleEmptyColumnRendersQuoted) {
  const Table t = Table::from_rows({"label", "x"}, "label", {{"A", ""}});
  EXPECT_EQ(to_csv_text(t, {0}, {1}), "x\n\"\"\n");
}

TEST(TableTest, CsvEscape) {
  EXPECT_EQ(csv_escape("plain"), "plain");
  EXPECT_EQ(csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_escape("line\nbreak"), "\"line\nbreak\"");
}

TEST(TableTest, RandomTablesRoundTripThroughCsv) {
  ::lmldap::testing::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const Table t = ::lmldap::testing::random_table(rng);
    const Table back = load_csv_text(to_csv_text(t), "label");
    ASSERT_EQ(back, t) << "case " << i;
  }
}

}  // namespace
}  // namespace lmldap
