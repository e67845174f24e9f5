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


#include <algorithm>
#include <cctype>

#include "deid/taggers.hpp"
#include "deid/wordlists.hpp"
#include "lexicon.hpp"

namespace deid {

namespace internal {

namespace {

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  for (const TokenLine& line : tokenize(s)) {
    for (const Token& t : line) out.push_back(t.surface);
  }
  return out;
}

Lexicon build_lexicon() {
  Lexicon lex;
  auto fill = [](std::unordered_set<std::string>& set, std::span<const std::string> words) {
    for (const auto& w : words) {
      for (auto& part : split_words(w)) set.insert(std::move(part));
    }
  };
  fill(lex.first_names, wordlists::first_names());
  fill(lex.last_names, wordlists::last_names());
  fill(lex.streets, wordlists::streets());
  fill(lex.street_types, wordlists::street_types());
  fill(lex.suburb_words, wordlists::suburbs());
  fill(lex.eponym_words, wordlists::eponyms());
  for (const auto& s : wordlists::suburbs()) lex.suburbs.push_back(split_words(s));
  std::stable_sort(lex.suburbs.begin(), lex.suburbs.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return lex;
}

}  // namespace

std::size_t Lexicon::match_suburb(std::span<const std::string> tokens,
                                  std::size_t i) const {
  if (i >= tokens.size() || !suburb_words.count(tokens[i])) return 0;
  for (const auto& s : suburbs) {
    if (i + s.size() <= tokens.size() &&
        std::equal(s.begin(), s.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
      return s.size();
    }
  }
  return 0;
}

const Lexicon& lexicon() {
  static const Lexicon lex = build_lexicon();
  return lex;
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
    return c >= '0' && c <= '9';
  });
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace internal

namespace {

using internal::ascii_lower;
using internal::is_digits;

bool digit_group(std::span<const std::string> t, std::size_t i, std::size_t len) {
  return i < t.size() && t[i].size() == len && is_digits(t[i]);
}

bool is(std::span<const std::string> t, std::size_t i, std::string_view s) {
  return i < t.size() && t[i] == s;
}

// Marks tokens [i, i + len) as one entity unless any is already tagged.
bool mark(TagSequence& tags, std::size_t i, std::size_t len, PiiCategory c) {
  for (std::size_t j = i; j < i + len; ++j) {
    if (!is_outside(tags[j])) return false;
  }
  tags[i] = begin_tag(c);
  for (std::size_t j = i + 1; j < i + len; ++j) tags[j] = inside_tag(c);
  return true;
}

std::size_t skip_colon(std::span<const std::string> t, std::size_t j) {
  return is(t, j, ":") ? j + 1 : j;
}

// dd-mm-yyyy or dd/mm/yyyy as five tokens.
bool match_date(std::span<const std::string> t, std::size_t j) {
  if (j + 5 > t.size()) return false;
  const bool d = is_digits(t[j]) && t[j].size() <= 2;
  const bool m = is_digits(t[j + 2]) && t[j + 2].size() <= 2;
  const bool sep = (t[j + 1] == "-" || t[j + 1] == "/") && t[j + 3] == t[j + 1];
  return d && sep && m && digit_group(t, j + 4, 4);
}

// Token count of a phone number starting at i, 0 if none. Shapes:
// (dd) dddd dddd, dd dddd dddd, dddd ddd ddd, dddd-dddd, dddd dddd.
std::size_t match_phone(std::span<const std::string> t, std::size_t i) {
  if (is(t, i, "(") && digit_group(t, i + 1, 2) && is(t, i + 2, ")") &&
      digit_group(t, i + 3, 4) && digit_group(t, i + 4, 4)) {
    return 5;
  }
  if (digit_group(t, i, 2) && digit_group(t, i + 1, 4) && digit_group(t, i + 2, 4)) return 3;
  if (digit_group(t, i, 4) && digit_group(t, i + 1, 3) && digit_group(t, i + 2, 3)) return 3;
  if (digit_group(t, i, 4) && is(t, i + 1, "-") && digit_group(t, i + 2, 4)) return 3;
  if (digit_group(t, i, 4) && digit_group(t, i + 1, 4)) return 2;
  return 0;
}

}  // namespace

TagSequence PatternTagger::tag_tokens(std::span<const std::string> t) const {
  TagSequence tags(t.size(), BioTag::kO);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::string w = ascii_lower(t[i]);
    std::size_t j = 0;
    if (w == "dob") {
      j = i + 1;
    } else if (w == "date" && is(t, i + 1, "of") && ascii_lower(i + 2 < t.size() ? t[i + 2] : "") == "birth") {
      j = i + 3;
    } else {
      continue;
    }
    j = skip_colon(t, j);
    if (match_date(t, j)) mark(tags, j, 5, PiiCategory::kDob);
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::string w = ascii_lower(t[i]);
    if (w != "mrn" && w != "fin" && w != "urn" && w != "pager") continue;
    const std::size_t j = skip_colon(t, i + 1);
    if (j < t.size() && is_digits(t[j]) && t[j].size() >= 6 && t[j].size() <= 8) {
      mark(tags, j, 1, PiiCategory::kIdn);
    }
  }
  for (std::size_t i = 0; i < t.size();) {
    const std::size_t len = match_phone(t, i);
    if (len > 0 && mark(tags, i, len, PiiCategory::kPhone)) {
      i += len;
    } else {
      ++i;
    }
  }
  return tags;
}

Json PatternTagger::parameters() const {
  return Json{{"rules", Json::array({"dob_after_cue", "idn_after_cue", "phone_digit_groups"})}};
}

TagSequence GazetteerTagger::tag_tokens(std::span<const std::string> t) const {
  const internal::Lexicon& lex = internal::lexicon();
  TagSequence tags(t.size(), BioTag::kO);
  auto name = [&](std::size_t i) {
    return i < t.size() && (lex.first_names.count(t[i]) || lex.last_names.count(t[i]));
  };
  for (std::size_t i = 0; i < t.size();) {
    // [Unit n /] number street type [,] [suburb] [NSW dddd]
    std::size_t k = i;
    if (is(t, k, "Unit") && k + 2 < t.size() && is_digits(t[k + 1]) && t[k + 2] == "/") k += 3;
    if (k + 2 < t.size() && is_digits(t[k]) && t[k].size() <= 3 &&
        lex.streets.count(t[k + 1]) && lex.street_types.count(t[k + 2])) {
      std::size_t end = k + 3;
      const std::size_t after_comma = is(t, end, ",") ? end + 1 : end;
      if (const std::size_t s = lex.match_suburb(t, after_comma); s > 0) end = after_comma + s;
      if (is(t, end, "NSW") && digit_group(t, end + 1, 4)) end += 2;
      mark(tags, i, end - i, PiiCategory::kAddress);
      i = end;
      continue;
    }
    if (name(i)) {
      std::size_t end = i + 1;
      while (name(end)) ++end;
      mark(tags, i, end - i, PiiCategory::kPerson);
      i = end;
      continue;
    }
    ++i;
  }
  return tags;
}

Json GazetteerTagger::parameters() const {
  return Json{{"lists", Json::array({"first_names", "last_names", "streets",
                                     "street_types", "suburbs"})}};
}

}  // namespace deid
