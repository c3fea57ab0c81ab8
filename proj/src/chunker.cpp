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

#include <algorithm>

namespace lmldap {

TokenCounter default_token_counter() {
  return TokenCounter{"chars/4", [](std::string_view text) -> std::size_t {
                        std::size_t chars = 0;
                        for (unsigned char c : text) {
                          if ((c & 0xC0) != 0x80) ++chars;
                        }
                        return (chars + 3) / 4;
                      }};
}

std::size_t count_tokens(std::string_view text, const TokenCounter& counter) {
  return counter.count(text);
}

std::size_t count_tokens(std::string_view text) {
  static const TokenCounter counter = default_token_counter();
  return counter.count(text);
}

std::vector<Chunk> pack_chunks(const Table& table, std::size_t budget,
                               const TokenCounter& counter) {
  const std::size_t n = table.row_count();
  if (n == 0) throw ChunkError(ChunkError::Kind::kEmptyTable, "table has no rows");

  auto cost = [&](std::size_t begin, std::size_t end) {
    return counter.count(to_csv_text(table, RowRange{begin, end}));
  };

  std::vector<Chunk> chunks;
  std::size_t begin = 0;
  while (begin < n) {
    std::size_t first_cost = cost(begin, begin + 1);
    if (first_cost > budget) {
      throw ChunkError(ChunkError::Kind::kRowExceedsBudget,
                       "header plus row " + std::to_string(begin) +
                           " needs " + std::to_string(first_cost) +
                           " tokens, budget is " + std::to_string(budget),
                       begin);
    }
    // Cost is monotone in the end index, so gallop then bisect for the
    // largest end that fits.
    std::size_t good = begin + 1, good_cost = first_cost;
    std::size_t step = 1;
    std::size_t bad = n + 1;
    while (good < n) {
      std::size_t probe = std::min(n, good + step);
      std::size_t c = cost(begin, probe);
      if (c <= budget) {
        good = probe;
        good_cost = c;
        step *= 2;
      } else {
        bad = probe;
        break;
      }
    }
    while (bad - good > 1 && good < n) {
      std::size_t mid = good + (bad - good) / 2;
      std::size_t c = cost(begin, mid);
      if (c <= budget) {
        good = mid;
        good_cost = c;
      } else {
        bad = mid;
      }
    }
    chunks.push_back(Chunk{RowRange{begin, good}, good_cost});
    begin = good;
  }
  return chunks;
}

}  // namespace lmldap
