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

#include "deid/text.hpp"

#include <algorithm>
#include <tuple>

#include "deid/errors.hpp"
#include "deid/utf8.hpp"

namespace deid {

namespace {

constexpr std::array<std::string_view, kNumCategories> kCategoryNames = {
    "PERSON", "ADDRESS", "DOB", "IDN", "PHONE"};

constexpr std::array<std::string_view, kNumTags> kTagNames = {
    "O",         "B-PERSON", "I-PERSON", "B-ADDRESS", "I-ADDRESS", "B-DOB",
    "I-DOB",     "B-IDN",    "I-IDN",    "B-PHONE",   "I-PHONE"};

// Token index range [first, last] of `line` touched by [start, end).
std::pair<std::size_t, std::size_t> covering_tokens(const TokenLine& line,
                                                    std::size_t start,
                                                    std::size_t end) {
  std::size_t first = line.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i].end > start && line[i].start < end) {
      first = std::min(first, i);
      last = i;
    }
  }
  return {first, last};
}

}  // namespace

std::string_view to_string(PiiCategory category) {
  return kCategoryNames[static_cast<std::size_t>(category)];
}

std::optional<PiiCategory> parse_category(std::string_view name) {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (kCategoryNames[i] == name) return static_cast<PiiCategory>(i);
  }
  return std::nullopt;
}

std::string_view to_string(BioTag tag) { return kTagNames[index(tag)]; }

std::optional<BioTag> parse_tag(std::string_view name) {
  for (std::size_t i = 0; i < kNumTags; ++i) {
    if (kTagNames[i] == name) return tag_at(i);
  }
  return std::nullopt;
}

std::string_view to_string(SpanSource source) {
  return source == SpanSource::kHuman ? "human" : "machine";
}

std::optional<SpanSource> parse_source(std::string_view name) {
  if (name == "human") return SpanSource::kHuman;
  if (name == "machine") return SpanSource::kMachine;
  return std::nullopt;
}

bool is_legal_transition(std::optional<BioTag> prev, BioTag next) {
  if (!is_inside(next)) return true;
  if (!prev || is_outside(*prev)) return false;
  return category_of(*prev) == category_of(next);
}

bool is_legal(std::span<const BioTag> tags) {
  std::optional<BioTag> prev;
  for (BioTag t : tags) {
    if (!is_legal_transition(prev, t)) return false;
    prev = t;
  }
  return true;
}

std::vector<TokenLine> tokenize(std::string_view utf8_text) {
  std::vector<TokenLine> lines;
  if (utf8_text.empty()) return lines;
  const auto scalars = utf8::decode(utf8_text);
  auto byte_at = [&](std::size_t i) {
    return i < scalars.size() ? scalars[i].byte_offset : utf8_text.size();
  };
  lines.emplace_back();
  std::size_t i = 0;
  while (i < scalars.size()) {
    const char32_t c = scalars[i].value;
    if (c == '\n') {
      lines.emplace_back();
      ++i;
      continue;
    }
    if (utf8::is_space(c)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (utf8::is_alnum(c)) {
      while (j < scalars.size() && utf8::is_alnum(scalars[j].value)) ++j;
    }
    const std::size_t b0 = byte_at(i);
    lines.back().push_back(
        Token{i, j, std::string(utf8_text.substr(b0, byte_at(j) - b0))});
    i = j;
  }
  return lines;
}

Document::Document(std::string doc_id, std::string utf8_text)
    : id_(std::move(doc_id)), text_(std::move(utf8_text)) {
  const auto scalars = utf8::decode(text_);
  byte_offsets_.clear();
  byte_offsets_.reserve(scalars.size() + 1);
  for (const auto& s : scalars) byte_offsets_.push_back(s.byte_offset);
  byte_offsets_.push_back(text_.size());

  tokens_ = tokenize(text_);
  if (!scalars.empty()) {
    std::size_t start = 0;
    for (std::size_t i = 0; i < scalars.size(); ++i) {
      if (scalars[i].value == '\n') {
        lines_.push_back({start, i});
        start = i + 1;
      }
    }
    lines_.push_back({start, scalars.size()});
  }
}

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& line : tokens_) n += line.size();
  return n;
}

std::string Document::slice(std::size_t start, std::size_t end) const {
  const std::size_t b0 = byte_offsets_[start];
  return text_.substr(b0, byte_offsets_[end] - b0);
}

std::size_t Document::line_of(std::size_t pos) const {
  auto it = std::upper_bound(
      lines_.begin(), lines_.end(), pos,
      [](std::size_t p, const LineRange& l) { return p < l.start; });
  return it == lines_.begin() ? 0
                              : static_cast<std::size_t>(it - lines_.begin()) - 1;
}

bool span_less(const PiiSpan& a, const PiiSpan& b) {
  return std::tie(a.start, a.end, a.category) <
         std::tie(b.start, b.end, b.category);
}

bool same_extent(const PiiSpan& a, const PiiSpan& b) {
  return a.start == b.start && a.end == b.end;
}

bool overlaps(const PiiSpan& a, const PiiSpan& b) {
  return a.start < b.end && b.start < a.end;
}

void sort_spans(std::vector<PiiSpan>& spans) {
  std::sort(spans.begin(), spans.end(), span_less);
}

void validate_spans(const Document& doc, std::span<const PiiSpan> spans) {
  struct Extent {
    std::size_t line, first, last;
  };
  std::vector<PiiSpan> sorted(spans.begin(), spans.end());
  sort_spans(sorted);
  std::vector<Extent> extents;
  extents.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const PiiSpan& s = sorted[i];
    if (s.end <= s.start || s.end > doc.length()) {
      throw InvalidSpan("span [" + std::to_string(s.start) + "," +
                        std::to_string(s.end) + ") is empty or out of range");
    }
    if (i > 0 && overlaps(sorted[i - 1], s)) {
      throw OverlapError("spans [" + std::to_string(sorted[i - 1].start) +
                         "," + std::to_string(sorted[i - 1].end) + ") and [" +
                         std::to_string(s.start) + "," +
                         std::to_string(s.end) + ") overlap");
    }
    const std::size_t line = doc.line_of(s.start);
    if (s.end > doc.lines()[line].end) {
      throw CrossLineError("span [" + std::to_string(s.start) + "," +
                           std::to_string(s.end) + ") crosses a line break");
    }
    const auto [first, last] = covering_tokens(doc.tokens()[line], s.start, s.end);
    if (first > last) {
      throw InvalidSpan("span [" + std::to_string(s.start) + "," +
                        std::to_string(s.end) + ") covers no token");
    }
    if (!extents.empty() && extents.back().line == line &&
        extents.back().last >= first) {
      throw OverlapError("spans [" + std::to_string(sorted[i - 1].start) +
                         "," + std::to_string(sorted[i - 1].end) + ") and [" +
                         std::to_string(s.start) + "," +
                         std::to_string(s.end) + ") share a token");
    }
    extents.push_back({line, first, last});
  }
}

std::vector<TagSequence> spans_to_bio(const Document& doc,
                                      std::span<const PiiSpan> spans) {
  validate_spans(doc, spans);
  std::vector<TagSequence> out;
  out.reserve(doc.tokens().size());
  for (const auto& line : doc.tokens()) out.emplace_back(line.size(), BioTag::kO);
  for (const PiiSpan& s : spans) {
    const std::size_t line = doc.line_of(s.start);
    const auto [first, last] = covering_tokens(doc.tokens()[line], s.start, s.end);
    out[line][first] = begin_tag(s.category);
    for (std::size_t t = first + 1; t <= last; ++t) {
      out[line][t] = inside_tag(s.category);
    }
  }
  return out;
}

TagSequence repair_bio(std::span<const BioTag> tags) {
  TagSequence out(tags.begin(), tags.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!is_inside(out[i])) continue;
    const bool continues = i > 0 && !is_outside(out[i - 1]) &&
                           category_of(out[i - 1]) == category_of(out[i]);
    if (!continues) out[i] = begin_tag(category_of(out[i]));
  }
  return out;
}

std::vector<PiiSpan> bio_to_spans(const Document& doc,
                                  std::span<const TagSequence> tags,
                                  SpanSource source,
                                  const std::string& annotator_id) {
  const auto lines = doc.tokens();
  if (tags.size() != lines.size()) {
    throw ShapeError("expected " + std::to_string(lines.size()) +
                     " tag lines, got " + std::to_string(tags.size()));
  }
  std::vector<PiiSpan> spans;
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (tags[l].size() != lines[l].size()) {
      throw ShapeError("line " + std::to_string(l) + ": expected " +
                       std::to_string(lines[l].size()) + " tags, got " +
                       std::to_string(tags[l].size()));
    }
    const TagSequence fixed = repair_bio(tags[l]);
    for (std::size_t i = 0; i < fixed.size();) {
      if (!is_begin(fixed[i])) {
        ++i;
        continue;
      }
      const PiiCategory c = category_of(fixed[i]);
      std::size_t j = i + 1;
      while (j < fixed.size() && fixed[j] == inside_tag(c)) ++j;
      spans.push_back({lines[l][i].start, lines[l][j - 1].end, c, source,
                       annotator_id});
      i = j;
    }
  }
  return spans;
}

std::vector<BioSequence> to_bio_sequences(const Document& doc,
                                          std::span<const TagSequence> tags) {
  const auto lines = doc.tokens();
  if (tags.size() != lines.size()) {
    throw ShapeError("tag lines do not match document lines");
  }
  std::vector<BioSequence> out;
  out.reserve(lines.size());
  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (tags[l].size() != lines[l].size()) {
      throw ShapeError("tag count does not match token count on line " +
                       std::to_string(l));
    }
    BioSequence seq;
    seq.tokens.reserve(lines[l].size());
    for (const Token& t : lines[l]) seq.tokens.push_back(t.surface);
    seq.tags = tags[l];
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace deid
