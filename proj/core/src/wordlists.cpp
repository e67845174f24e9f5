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

#include "deid/wordlists.hpp"

#include <string_view>
#include <vector>

#include "wordlists_data.hpp"

namespace deid::wordlists {

namespace {

std::vector<std::string> split_lines(std::string_view blob) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < blob.size()) {
    std::size_t nl = blob.find('\n', pos);
    if (nl == std::string_view::npos) nl = blob.size();
    std::string_view line = blob.substr(pos, nl - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.remove_suffix(1);
    }
    if (!line.empty()) out.emplace_back(line);
    pos = nl + 1;
  }
  return out;
}

}  // namespace

#define DEID_WORDLIST(fn, blob)                              \
  std::span<const std::string> fn() {                        \
    static const std::vector<std::string> list = split_lines(blob); \
    return list;                                             \
  }

DEID_WORDLIST(first_names, data::kFirstNames)
DEID_WORDLIST(last_names, data::kLastNames)
DEID_WORDLIST(streets, data::kStreets)
DEID_WORDLIST(street_types, data::kStreetTypes)
DEID_WORDLIST(suburbs, data::kSuburbs)
DEID_WORDLIST(eponyms, data::kEponyms)

#undef DEID_WORDLIST

}  // namespace deid::wordlists
