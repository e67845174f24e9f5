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

#include "deid/annotation.hpp"

#include <algorithm>

#include "deid/errors.hpp"

namespace deid {

namespace {

// 0 for O, 1 + category otherwise, per token in document order.
std::vector<int> project_labels(const Document& doc,
                                std::span<const PiiSpan> spans) {
  std::vector<int> labels;
  labels.reserve(doc.token_count());
  for (const auto& line : doc.tokens()) {
    for (const Token& t : line) {
      int label = 0;
      for (const PiiSpan& s : spans) {
        if (t.start < s.end && s.start < t.end) {
          label = 1 + static_cast<int>(s.category);
          break;
        }
      }
      labels.push_back(label);
    }
  }
  return labels;
}

const std::vector<PiiSpan>& lookup(const SpanSet& set, const std::string& id) {
  static const std::vector<PiiSpan> kEmpty;
  auto it = set.find(id);
  return it == set.end() ? kEmpty : it->second;
}

bool triples_equal(std::span<const PiiSpan> a, std::span<const PiiSpan> b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_extent(a[i], b[i]) || a[i].category != b[i].category) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(RecordStatus status) {
  return status == RecordStatus::kConfirmed ? "confirmed" : "in_progress";
}

std::optional<RecordStatus> parse_status(std::string_view name) {
  if (name == "confirmed") return RecordStatus::kConfirmed;
  if (name == "in_progress") return RecordStatus::kInProgress;
  return std::nullopt;
}

double cohen_kappa(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) {
    throw ShapeError("label sequences differ in length");
  }
  if (a.empty()) throw EmptyDomain("no tokens to compare");
  std::map<int, std::pair<double, double>> marginals;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == b[i]) ++agree;
    marginals[a[i]].first += 1;
    marginals[b[i]].second += 1;
  }
  const double n = static_cast<double>(a.size());
  const double p_o = static_cast<double>(agree) / n;
  double p_e = 0;
  for (const auto& [_, m] : marginals) p_e += (m.first / n) * (m.second / n);
  if (p_e >= 1.0) return 1.0;
  return (p_o - p_e) / (1.0 - p_e);
}

double token_kappa(std::span<const Document> docs, const SpanSet& a,
                   const SpanSet& b, KappaMode mode) {
  std::vector<int> la, lb;
  for (const Document& doc : docs) {
    const auto pa = project_labels(doc, lookup(a, doc.id()));
    const auto pb = project_labels(doc, lookup(b, doc.id()));
    for (std::size_t i = 0; i < pa.size(); ++i) {
      if (mode == KappaMode::kAnnotatedOnly && pa[i] == 0 && pb[i] == 0) {
        continue;
      }
      la.push_back(pa[i]);
      lb.push_back(pb[i]);
    }
  }
  if (la.empty()) {
    throw EmptyDomain(mode == KappaMode::kAnnotatedOnly
                          ? "no token is annotated by either side"
                          : "documents contain no tokens");
  }
  return cohen_kappa(la, lb);
}

double token_kappa(const Document& doc, const AnnotationRecord& a,
                   const AnnotationRecord& b, KappaMode mode) {
  const SpanSet sa{{doc.id(), a.spans}};
  const SpanSet sb{{doc.id(), b.spans}};
  return token_kappa(std::span(&doc, 1), sa, sb, mode);
}

double iaa_f1(const SpanSet& a, const SpanSet& b) {
  return strict_entity_metrics(a, b).f1();
}

double iaa_f1(const AnnotationRecord& a, const AnnotationRecord& b) {
  return strict_entity_metrics(a.spans, b.spans).f1();
}

IaaReport iaa_report(std::span<const Document> docs, const SpanSet& a,
                     const SpanSet& b) {
  IaaReport r;
  r.documents = docs.size();
  r.kappa_all_tokens = token_kappa(docs, a, b, KappaMode::kAllTokens);
  r.kappa_annotated_only = token_kappa(docs, a, b, KappaMode::kAnnotatedOnly);
  const MetricsReport m = strict_entity_metrics(a, b);
  r.f1_strict = m.f1();
  for (PiiCategory c : kAllCategories) r.per_category_f1[c] = m.category(c).f1();
  return r;
}

std::vector<Disagreement> find_disagreements(const AnnotationRecord& a,
                                             const AnnotationRecord& b) {
  struct Tagged {
    PiiSpan span;
    bool from_a;
  };
  std::vector<Tagged> all;
  for (const auto& s : a.spans) all.push_back({s, true});
  for (const auto& s : b.spans) all.push_back({s, false});
  std::sort(all.begin(), all.end(), [](const Tagged& x, const Tagged& y) {
    if (x.span.start != y.span.start) return x.span.start < y.span.start;
    return x.from_a && !y.from_a;
  });

  std::vector<Disagreement> out;
  std::size_t i = 0;
  while (i < all.size()) {
    Disagreement group{all[i].span.start, all[i].span.end, {}, {}};
    std::size_t j = i;
    while (j < all.size() && all[j].span.start < group.end) {
      group.end = std::max(group.end, all[j].span.end);
      (all[j].from_a ? group.a_spans : group.b_spans).push_back(all[j].span);
      ++j;
    }
    sort_spans(group.a_spans);
    sort_spans(group.b_spans);
    if (!triples_equal(group.a_spans, group.b_spans)) out.push_back(std::move(group));
    i = j;
  }
  return out;
}

AnnotationRecord adjudicate(const AnnotationRecord& a, const AnnotationRecord& b,
                            std::span<const Decision> decisions,
                            const std::string& adjudicator_id) {
  const auto conflicts = find_disagreements(a, b);
  std::vector<PiiSpan> merged;
  // Agreements: spans of `a` outside every conflict extent.
  for (const PiiSpan& s : a.spans) {
    const bool in_conflict = std::any_of(
        conflicts.begin(), conflicts.end(),
        [&](const Disagreement& d) { return s.start < d.end && d.start < s.end; });
    if (!in_conflict) merged.push_back(s);
  }
  std::string unresolved;
  for (const Disagreement& d : conflicts) {
    auto it = std::find_if(decisions.begin(), decisions.end(),
                           [&](const Decision& x) {
                             return x.start == d.start && x.end == d.end;
                           });
    if (it == decisions.end()) {
      if (!unresolved.empty()) unresolved += ", ";
      unresolved += "[" + std::to_string(d.start) + "," + std::to_string(d.end) + ")";
      continue;
    }
    merged.insert(merged.end(), it->spans.begin(), it->spans.end());
  }
  if (!unresolved.empty()) {
    throw UnresolvedDisagreement("no decision for " + unresolved);
  }
  for (PiiSpan& s : merged) {
    s.source = SpanSource::kHuman;
    s.annotator_id = adjudicator_id;
  }
  sort_spans(merged);
  for (std::size_t i = 1; i < merged.size(); ++i) {
    if (overlaps(merged[i - 1], merged[i])) {
      throw OverlapError("adjudicated spans overlap at offset " +
                         std::to_string(merged[i].start));
    }
  }
  AnnotationRecord out;
  out.doc_id = a.doc_id;
  out.annotator_id = adjudicator_id;
  out.spans = std::move(merged);
  out.status = RecordStatus::kConfirmed;
  return out;
}

}  // namespace deid
