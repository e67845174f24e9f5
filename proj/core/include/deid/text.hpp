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

// Documents, tokenization, the PII tag set and the BIO codec.
//
// All offsets are half-open [start, end) ranges counted in Unicode scalar
// values, never bytes. A document is split into lines at '\n'; a line is the
// labeling unit and no span may cross a line boundary.

#ifndef DEID_TEXT_HPP_
#define DEID_TEXT_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deid {

enum class PiiCategory : std::uint8_t { kPerson, kAddress, kDob, kIdn, kPhone };

inline constexpr std::size_t kNumCategories = 5;
inline constexpr std::array<PiiCategory, kNumCategories> kAllCategories = {
    PiiCategory::kPerson, PiiCategory::kAddress, PiiCategory::kDob,
    PiiCategory::kIdn, PiiCategory::kPhone};

std::string_view to_string(PiiCategory category);
std::optional<PiiCategory> parse_category(std::string_view name);

// O, then B-X/I-X for each category in kAllCategories order. The numeric
// value is the fixed enumeration order used for every tie-break.
enum class BioTag : std::uint8_t {
  kO = 0,
  kBPerson, kIPerson,
  kBAddress, kIAddress,
  kBDob, kIDob,
  kBIdn, kIIdn,
  kBPhone, kIPhone,
};

inline constexpr std::size_t kNumTags = 11;

constexpr std::size_t index(BioTag tag) { return static_cast<std::size_t>(tag); }
constexpr BioTag tag_at(std::size_t i) { return static_cast<BioTag>(i); }

constexpr BioTag begin_tag(PiiCategory c) {
  return static_cast<BioTag>(1 + 2 * static_cast<int>(c));
}
constexpr BioTag inside_tag(PiiCategory c) {
  return static_cast<BioTag>(2 + 2 * static_cast<int>(c));
}
constexpr bool is_outside(BioTag t) { return t == BioTag::kO; }
constexpr bool is_begin(BioTag t) { return t != BioTag::kO && index(t) % 2 == 1; }
constexpr bool is_inside(BioTag t) { return t != BioTag::kO && index(t) % 2 == 0; }
// Precondition: t != O.
constexpr PiiCategory category_of(BioTag t) {
  return static_cast<PiiCategory>((index(t) - 1) / 2);
}

std::string_view to_string(BioTag tag);
std::optional<BioTag> parse_tag(std::string_view name);

// True if `next` may follow `prev` inside one line. `prev` is nullopt at the
// start of a line.
bool is_legal_transition(std::optional<BioTag> prev, BioTag next);

using TagSequence = std::vector<BioTag>;

bool is_legal(std::span<const BioTag> tags);

struct Token {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenLine = std::vector<Token>;

// Splits at '\n'; per line, tokens are maximal alphanumeric runs or single
// non-whitespace symbol characters. Empty text yields no lines.
std::vector<TokenLine> tokenize(std::string_view utf8_text);

struct LineRange {
  std::size_t start = 0;
  std::size_t end = 0;
};

class Document {
 public:
  Document() = default;
  Document(std::string doc_id, std::string utf8_text);

  const std::string& id() const { return id_; }
  const std::string& text() const { return text_; }
  // Length in scalar values.
  std::size_t length() const { return byte_offsets_.size() - 1; }

  std::span<const LineRange> lines() const { return lines_; }
  std::span<const TokenLine> tokens() const { return tokens_; }
  std::size_t token_count() const;

  // UTF-8 text of [start, end). Precondition: start <= end <= length().
  std::string slice(std::size_t start, std::size_t end) const;

  // Index of the line containing scalar offset `pos` (a '\n' belongs to the
  // line it terminates).
  std::size_t line_of(std::size_t pos) const;

 private:
  std::string id_;
  std::string text_;
  std::vector<std::size_t> byte_offsets_ = {0};
  std::vector<LineRange> lines_;
  std::vector<TokenLine> tokens_;
};

enum class SpanSource : std::uint8_t { kHuman, kMachine };

std::string_view to_string(SpanSource source);
std::optional<SpanSource> parse_source(std::string_view name);

struct PiiSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  PiiCategory category = PiiCategory::kPerson;
  SpanSource source = SpanSource::kHuman;
  std::string annotator_id;

  friend bool operator==(const PiiSpan&, const PiiSpan&) = default;
};

// Orders by (start, end, category); the canonical ordering of span sets.
bool span_less(const PiiSpan& a, const PiiSpan& b);
bool same_extent(const PiiSpan& a, const PiiSpan& b);
bool overlaps(const PiiSpan& a, const PiiSpan& b);
void sort_spans(std::vector<PiiSpan>& spans);

// Checks range, overlap and line containment; throws InvalidSpan,
// OverlapError or CrossLineError. Also rejects spans that cover no token or
// whose token-expanded extents collide.
void validate_spans(const Document& doc, std::span<const PiiSpan> spans);

// One tag sequence per document line. Spans that do not align to token
// boundaries are widened to the tokens they touch.
std::vector<TagSequence> spans_to_bio(const Document& doc,
                                      std::span<const PiiSpan> spans);

// Inverse of spans_to_bio. Tags are repaired first; returned spans are in
// canonical order.
std::vector<PiiSpan> bio_to_spans(const Document& doc,
                                  std::span<const TagSequence> tags,
                                  SpanSource source = SpanSource::kHuman,
                                  const std::string& annotator_id = {});

// I-X after O, after a different category or at line start becomes B-X.
TagSequence repair_bio(std::span<const BioTag> tags);

// Token surfaces paired with tags for one line.
struct BioSequence {
  std::vector<std::string> tokens;
  TagSequence tags;

  friend bool operator==(const BioSequence&, const BioSequence&) = default;
};

// Per document line (empty lines included) tokens + tags.
std::vector<BioSequence> to_bio_sequences(const Document& doc,
                                          std::span<const TagSequence> tags);

}  // namespace deid

#endif  // DEID_TEXT_HPP_
