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


#include "deid/redaction.hpp"

#include <algorithm>

#include "deid/errors.hpp"
#include "deid/utf8.hpp"

namespace deid {

std::string surrogate(PiiCategory category, SurrogateStyle style) {
  const std::string name(to_string(category));
  return style == SurrogateStyle::kCompact ? "<***" + name + "***>" : "<*** [" + name + "] ***>";
}

std::optional<std::size_t> OffsetMap::map(std::size_t original) const {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), original,
                             [](std::size_t pos, const Segment& s) { return pos < s.original_start; });
  if (it == segments_.begin()) return std::nullopt;
  --it;
  if (original >= it->original_end) return std::nullopt;
  return it->redacted_start + (original - it->original_start);
}

RedactedDocument redact(const Document& doc, std::span<const PiiSpan> spans,
                        SurrogateStyle style) {
  std::vector<PiiSpan> sorted(spans.begin(), spans.end());
  sort_spans(sorted);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].end <= sorted[i].start || sorted[i].end > doc.length()) {
      throw InvalidSpan("span [" + std::to_string(sorted[i].start) + ", " +
                        std::to_string(sorted[i].end) + ") outside document '" + doc.id() + "'");
    }
    if (i > 0 && sorted[i].start < sorted[i - 1].end) {
      throw OverlapError("overlapping spans in document '" + doc.id() + "'");
    }
  }

  std::vector<std::size_t> bytes;
  for (const auto& sv : utf8::decode(doc.text())) bytes.push_back(sv.byte_offset);
  bytes.push_back(doc.text().size());

  RedactedDocument out;
  out.doc_id = doc.id();
  out.text = doc.text();
  for (auto it = sorted.rbegin(); it != sorted.rend(); ++it) {
    const std::size_t b = bytes[it->start], e = bytes[it->end];
    out.text.replace(b, e - b, surrogate(it->category, style));
  }

  std::size_t orig = 0, shift_pos = 0;
  for (const PiiSpan& s : sorted) {
    if (s.start > orig) out.offset_map.add({orig, s.start, shift_pos});
    shift_pos += s.start - orig + surrogate(s.category, style).size();
    orig = s.end;
  }
  if (doc.length() > orig) out.offset_map.add({orig, doc.length(), shift_pos});
  out.length = shift_pos + (doc.length() - orig);
  out.applied = std::move(sorted);
  return out;
}

std::vector<Leak> audit_leakage(const RedactedDocument& redacted,
                                std::span<const PiiSpan> gold, const Document& original) {
  std::vector<std::size_t> bytes;
  for (const auto& sv : utf8::decode(redacted.text)) bytes.push_back(sv.byte_offset);
  bytes.push_back(redacted.text.size());

  std::vector<Leak> leaks;
  for (const PiiSpan& g : gold) {
    const bool touched = std::any_of(redacted.applied.begin(), redacted.applied.end(),
                                     [&](const PiiSpan& a) { return overlaps(a, g); });
    const auto first = redacted.offset_map.map(g.start);
    const auto last = redacted.offset_map.map(g.end - 1);
    if (touched || !first || !last) continue;
    const std::string surface = original.slice(g.start, g.end);
    const std::size_t rb = bytes[*first], re = bytes[*last + 1];
    if (redacted.text.compare(rb, re - rb, surface) == 0) leaks.push_back({g, surface});
  }
  return leaks;
}

Json sidecar_json(const RedactedDocument& redacted, SurrogateStyle style) {
  Json spans = Json::array();
  for (const auto& s : redacted.applied) {
    spans.push_back({{"start", s.start},
                     {"end", s.end},
                     {"category", to_string(s.category)},
                     {"surrogate", surrogate(s.category, style)}});
  }
  return Json{{"doc_id", redacted.doc_id},
              {"surrogate_style", style == SurrogateStyle::kCompact ? "compact" : "template"},
              {"spans", std::move(spans)}};
}

}  // namespace deid
