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

#include "lmldap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

namespace lmldap {
namespace {

struct NumericAccumulator {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  std::size_t count = 0;

  void add(double v) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += v;
    ++count;
  }
};

std::string backticked(const std::string& name) {
  std::string out = "`";
  for (char c : name) {
    if (c == '`') out += '`';
    out += c;
  }
  return out + "`";
}

std::string format_distance(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", d);
  return buf;
}

// Global [min, max] of a summary column across all labels.
std::optional<std::pair<double, double>> global_extent(const PatternSummary& summary,
                                                       std::size_t col) {
  std::optional<std::pair<double, double>> out;
  for (const auto& row : summary.rows) {
    if (col >= row.patterns.size() || !row.patterns[col]) continue;
    const auto* r = std::get_if<NumericRange>(&*row.patterns[col]);
    if (!r) continue;
    if (!out) {
      out = {r->min, r->max};
    } else {
      out->first = std::min(out->first, r->min);
      out->second = std::max(out->second, r->max);
    }
  }
  return out;
}

}  // namespace

PatternSummary oracle_summarize(const Table& table, RowRange rows) {
  if (rows.begin > rows.end || rows.end > table.row_count()) {
    throw TableError(TableError::Kind::kOutOfRange, "chunk range out of bounds");
  }
  const auto features = table.schema().feature_indices();
  PatternSummary out;
  out.label_column = table.schema().label_column();
  for (auto c : features) out.columns.push_back(table.schema().column(c).name);

  std::unordered_map<std::string, std::size_t> slot;
  std::vector<std::vector<NumericAccumulator>> numeric;
  std::vector<std::vector<std::set<std::string>>> categories;
  for (std::size_t r = rows.begin; r < rows.end; ++r) {
    auto [it, inserted] = slot.try_emplace(table.label(r), out.rows.size());
    if (inserted) {
      LabelPattern lp;
      lp.label = table.label(r);
      out.rows.push_back(std::move(lp));
      numeric.emplace_back(features.size());
      categories.emplace_back(features.size());
    }
    const std::size_t k = it->second;
    ++out.rows[k].num_rows;
    for (std::size_t f = 0; f < features.size(); ++f) {
      const auto c = features[f];
      if (table.missing(r, c)) continue;
      if (table.schema().column(c).kind == ColumnKind::kNumeric) {
        numeric[k][f].add(table.number(r, c));
      } else {
        categories[k][f].insert(table.cell(r, c));
      }
    }
  }

  for (std::size_t k = 0; k < out.rows.size(); ++k) {
    auto& patterns = out.rows[k].patterns;
    patterns.resize(features.size());
    for (std::size_t f = 0; f < features.size(); ++f) {
      if (table.schema().column(features[f]).kind == ColumnKind::kNumeric) {
        const auto& acc = numeric[k][f];
        if (acc.count) {
          const double avg = std::clamp(acc.sum / static_cast<double>(acc.count), acc.min, acc.max);
          patterns[f] = NumericRange{acc.min, acc.max, avg};
        }
      } else if (!categories[k][f].empty()) {
        patterns[f] = CategorySet{{categories[k][f].begin(), categories[k][f].end()}};
      }
    }
  }
  return out;
}

PatternSummary oracle_summarize(const Table& table) {
  return oracle_summarize(table, RowRange{0, table.row_count()});
}

PatternSummary oracle_merge(const std::vector<PatternSummary>& parts) {
  if (parts.empty()) throw OracleError(OracleError::Kind::kEmptyInput, "nothing to merge");
  for (const auto& p : parts) {
    if (p.columns != parts.front().columns || p.label_column != parts.front().label_column) {
      throw OracleError(OracleError::Kind::kIncompatibleParts,
                        "summaries disagree on column structure");
    }
  }
  if (parts.size() == 1) return parts.front();

  const std::size_t width = parts.front().columns.size();
  struct Acc {
    std::size_t num_rows = 0;
    std::vector<std::string> comments;
    std::vector<std::optional<NumericRange>> range;
    std::vector<double> weighted_sum;
    std::vector<std::size_t> weight;
    std::vector<std::optional<std::set<std::string>>> values;
  };
  std::vector<std::string> order;
  std::map<std::string, Acc> acc;

  for (const auto& part : parts) {
    for (const auto& row : part.rows) {
      auto [it, inserted] = acc.try_emplace(row.label);
      Acc& a = it->second;
      if (inserted) {
        order.push_back(row.label);
        a.range.resize(width);
        a.weighted_sum.assign(width, 0.0);
        a.weight.assign(width, 0);
        a.values.resize(width);
      }
      a.num_rows += row.num_rows;
      if (!row.comments.empty()) a.comments.push_back(row.comments);
      for (std::size_t f = 0; f < width && f < row.patterns.size(); ++f) {
        if (!row.patterns[f]) continue;
        if (const auto* r = std::get_if<NumericRange>(&*row.patterns[f])) {
          if (a.values[f]) {
            throw OracleError(OracleError::Kind::kIncompatibleParts,
                              "column '" + part.columns[f] + "' mixes ranges and categories");
          }
          if (!a.range[f]) {
            a.range[f] = *r;
          } else {
            a.range[f]->min = std::min(a.range[f]->min, r->min);
            a.range[f]->max = std::max(a.range[f]->max, r->max);
          }
          a.weighted_sum[f] += r->avg * static_cast<double>(row.num_rows);
          a.weight[f] += row.num_rows;
        } else {
          if (a.range[f]) {
            throw OracleError(OracleError::Kind::kIncompatibleParts,
                              "column '" + part.columns[f] + "' mixes ranges and categories");
          }
          const auto& vals = std::get<CategorySet>(*row.patterns[f]).values;
          if (!a.values[f]) a.values[f].emplace();
          a.values[f]->insert(vals.begin(), vals.end());
        }
      }
    }
  }

  PatternSummary out;
  out.label_column = parts.front().label_column;
  out.columns = parts.front().columns;
  for (const auto& label : order) {
    Acc& a = acc.at(label);
    LabelPattern lp;
    lp.label = label;
    lp.num_rows = a.num_rows;
    for (std::size_t i = 0; i < a.comments.size(); ++i) {
      if (i) lp.comments += " ";
      lp.comments += a.comments[i];
    }
    lp.patterns.resize(width);
    for (std::size_t f = 0; f < width; ++f) {
      if (a.range[f]) {
        NumericRange r = *a.range[f];
        r.avg = std::clamp(a.weighted_sum[f] / static_cast<double>(a.weight[f]), r.min, r.max);
        lp.patterns[f] = r;
      } else if (a.values[f]) {
        lp.patterns[f] = CategorySet{{a.values[f]->begin(), a.values[f]->end()}};
      }
    }
    out.rows.push_back(std::move(lp));
  }
  return out;
}

std::string oracle_query(const Row& test_row, const PatternSummary& summary,
                         const Schema& schema, OracleQueryOptions options) {
  std::string out;
  bool any_numeric = false;
  for (auto c : schema.feature_indices()) {
    const auto& spec = schema.column(c);
    if (spec.kind != ColumnKind::kNumeric) continue;
    auto sc = summary.column_index(spec.name);
    if (!sc) continue;
    auto extent = global_extent(summary, *sc);
    if (!extent) continue;
    any_numeric = true;
    const double v = c < test_row.numbers.size() ? test_row.numbers[c] : std::nan("");
    if (std::isnan(v)) continue;

    const double s = (extent->second - extent->first) * options.span_fraction;
    double lo = std::floor((v - s) * 1e4) / 1e4;
    double hi = std::ceil((v + s) * 1e4) / 1e4;
    if (lo > v - s) lo -= 1e-4;
    if (hi < v + s) hi += 1e-4;

    const std::string col = backticked(spec.name);
    std::string conjunct = col + " >= " + format_decimal(lo) + " and " + col +
                           " <= " + format_decimal(hi);
    const std::size_t extra = out.empty() ? conjunct.size() : conjunct.size() + 5;
    if (out.size() + extra > options.max_chars) break;
    if (!out.empty()) out += " and ";
    out += conjunct;
  }
  if (!any_numeric) {
    throw OracleError(OracleError::Kind::kNoNumericColumns,
                      "oracle queries need at least one numeric feature column");
  }
  return out;
}

OraclePrediction oracle_predict(const Row& test_row, const PatternSummary& summary,
                                const Schema& schema) {
  struct Term {
    std::size_t schema_col;
    std::size_t summary_col;
    double span;
  };
  std::vector<Term> terms;
  for (auto c : schema.feature_indices()) {
    if (schema.column(c).kind != ColumnKind::kNumeric) continue;
    auto sc = summary.column_index(schema.column(c).name);
    if (!sc) continue;
    auto extent = global_extent(summary, *sc);
    if (!extent) continue;
    const double span = extent->second - extent->first;
    if (span <= 0.0) continue;
    terms.push_back({c, *sc, span});
  }
  if (summary.rows.empty()) {
    throw OracleError(OracleError::Kind::kEmptyInput, "summary has no labels");
  }

  OraclePrediction out;
  for (const auto& row : summary.rows) {
    double d = 0.0;
    for (const auto& t : terms) {
      const double v = t.schema_col < test_row.numbers.size() ? test_row.numbers[t.schema_col]
                                                              : std::nan("");
      if (std::isnan(v) || t.summary_col >= row.patterns.size() ||
          !row.patterns[t.summary_col]) {
        continue;
      }
      const auto* r = std::get_if<NumericRange>(&*row.patterns[t.summary_col]);
      if (!r) continue;
      const double z = (v - r->avg) / t.span;
      d += z * z;
    }
    out.ranking.emplace_back(row.label, d);
  }
  std::sort(out.ranking.begin(), out.ranking.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second < b.second : a.first < b.first;
  });
  out.label = out.ranking.front().first;
  out.reason = "Nearest label by span-normalized distance to the summary averages: " +
               out.label + " (" + format_distance(out.ranking.front().second) + ")";
  if (out.ranking.size() > 1) {
    out.reason += "; runner-up " + out.ranking[1].first + " (" +
                  format_distance(out.ranking[1].second) + ")";
  }
  out.reason += ".";
  return out;
}

std::string OracleBackend::summarize_chunk(const SummarizeChunkInput& input) {
  return "<patterns>\n" +
         render_pattern_table(oracle_summarize(input.chunk), AvgPrecision::kExact) +
         "</patterns>\n";
}

std::string OracleBackend::merge_summaries(const MergeSummariesInput& input) {
  return "<patterns>\n" + render_pattern_table(oracle_merge(input.parts), AvgPrecision::kExact) +
         "</patterns>\n";
}

std::string OracleBackend::generate_query(const GenerateQueryInput& input) {
  OracleQueryOptions options;
  options.span_fraction = 0.1 * std::ldexp(1.0, std::max(0, input.attempt - 1));
  return "<dfquery>\n" + oracle_query(input.test_row, input.summary, input.schema, options) +
         "\n</dfquery>\n";
}

std::string OracleBackend::predict(const PredictInput& input) {
  auto p = oracle_predict(input.test_row, input.summary, input.table.schema());
  return "<prediction> " + p.label + " </prediction>\n<reason>\n" + p.reason + "\n</reason>\n";
}

}  // namespace lmldap
