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

#ifndef LMLDAP_CHUNKER_HPP_
#define LMLDAP_CHUNKER_HPP_

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lmldap/table.hpp"

namespace lmldap {

inline constexpr std::size_t kDefaultChunkBudget = 15000;

// Pluggable token counter. Implementations must return 0 for the empty string
// and be monotone under concatenation.
struct TokenCounter {
  std::string name;
  std::function<std::size_t(std::string_view)> count;
};

// ceil(characters / 4), counting UTF-8 code points.
TokenCounter default_token_counter();

std::size_t count_tokens(std::string_view text, const TokenCounter& counter);
std::size_t count_tokens(std::string_view text);

struct Chunk {
  RowRange rows;
  std::size_t token_count = 0;  // of the chunk's CSV, header included

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

class ChunkError : public std::runtime_error {
 public:
  enum class Kind { kEmptyTable, kRowExceedsBudget };

  ChunkError(Kind kind, std::string message, std::size_t row = 0)
      : std::runtime_error(std::move(message)), kind_(kind), row_(row) {}

  Kind kind() const { return kind_; }
  std::size_t row() const { return row_; }

 private:
  Kind kind_;
  std::size_t row_;
};

// Greedy forward packing: each chunk takes as many following rows as keep its
// CSV rendering (with header) within `budget` tokens.
std::vector<Chunk> pack_chunks(const Table& table,
                               std::size_t budget = kDefaultChunkBudget,
                               const TokenCounter& counter = default_token_counter());

}  // namespace lmldap

#endif  // LMLDAP_CHUNKER_HPP_
