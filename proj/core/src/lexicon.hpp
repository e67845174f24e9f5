// Copyright 2026 The deid Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Word-list lookups shared by the gazetteer tagger and perceptron features.

#ifndef DEID_SRC_LEXICON_HPP_
#define DEID_SRC_LEXICON_HPP_

#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace deid::internal {

struct Lexicon {
  std::unordered_set<std::string> first_names;
  std::unordered_set<std::string> last_names;
  std::unordered_set<std::string> streets;
  std::unordered_set<std::string> street_types;
  std::unordered_set<std::string> suburb_words;
  std::unordered_set<std::string> eponym_words;
  // Suburbs as token sequences, longest first.
  std::vector<std::vector<std::string>> suburbs;

  // Number of tokens of the suburb starting at tokens[i], 0 if none.
  std::size_t match_suburb(std::span<const std::string> tokens, std::size_t i) const;
};

const Lexicon& lexicon();

bool is_digits(std::string_view s);
std::string ascii_lower(std::string_view s);

}  // namespace deid::internal

#endif  // DEID_SRC_LEXICON_HPP_
