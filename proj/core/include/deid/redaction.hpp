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


// Surrogate replacement of PII spans and leakage audit against gold.

#ifndef DEID_REDACTION_HPP_
#define DEID_REDACTION_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deid/io.hpp"
#include "deid/text.hpp"

namespace deid {

// kCompact renders "<***PERSON***>"; kTemplate renders "<*** [PERSON] ***>".
enum class SurrogateStyle { kCompact, kTemplate };

std::string surrogate(PiiCategory category, SurrogateStyle style = SurrogateStyle::kCompact);

// Original -> redacted correspondence for text outside the applied spans.
// Offsets are scalar values on both sides.
class OffsetMap {
 public:
  struct Segment {
    std::size_t original_start = 0;
    std::size_t original_end = 0;
    std::size_t redacted_start = 0;
  };

  void add(const Segment& s) { segments_.push_back(s); }
  std::span<const Segment> segments() const { return segments_; }

  // Empty when `original` lies inside a replaced span.
  std::optional<std::size_t> map(std::size_t original) const;

 private:
  std::vector<Segment> segments_;  // ascending, disjoint
};

struct RedactedDocument {
  std::string doc_id;
  std::string text;
  std::size_t length = 0;        // scalar values
  std::vector<PiiSpan> applied;  // original offsets, sorted
  OffsetMap offset_map;
};

// Replaces spans right to left. Throws OverlapError on overlapping spans and
// InvalidSpan on spans outside the text.
RedactedDocument redact(const Document& doc, std::span<const PiiSpan> spans,
                        SurrogateStyle style = SurrogateStyle::kCompact);

struct Leak {
  PiiSpan span;
  std::string surface;
};

// Gold spans whose surface still stands, unreplaced, at the mapped position
// in the redacted text.
std::vector<Leak> audit_leakage(const RedactedDocument& redacted,
                                std::span<const PiiSpan> gold, const Document& original);

// Sidecar JSON of a redacted file: {"doc_id", "surrogate_style", "spans"}.
Json sidecar_json(const RedactedDocument& redacted, SurrogateStyle style);

}  // namespace deid

#endif  // DEID_REDACTION_HPP_
