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

// Annotation records, inter-annotator agreement and adjudication.

#ifndef DEID_ANNOTATION_HPP_
#define DEID_ANNOTATION_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deid/metrics.hpp"
#include "deid/text.hpp"

namespace deid {

enum class RecordStatus : std::uint8_t { kInProgress, kConfirmed };

std::string_view to_string(RecordStatus status);
std::optional<RecordStatus> parse_status(std::string_view name);

struct AnnotationRecord {
  std::string doc_id;
  std::string annotator_id;
  std::vector<PiiSpan> spans;  // canonical order, non-overlapping
  std::uint64_t revision = 0;
  RecordStatus status = RecordStatus::kInProgress;

  friend bool operator==(const AnnotationRecord&,
                         const AnnotationRecord&) = default;
};

enum class KappaMode { kAllTokens, kAnnotatedOnly };

// Token-level Cohen's kappa over per-token category labels (B/I collapsed,
// O for untagged). kAnnotatedOnly restricts to tokens labeled by at least
// one side. Throws EmptyDomain if no token remains.
double token_kappa(std::span<const Document> docs, const SpanSet& a,
                   const SpanSet& b, KappaMode mode);
double token_kappa(const Document& doc, const AnnotationRecord& a,
                   const AnnotationRecord& b, KappaMode mode);

// Kappa on already projected labels (0 = O). Exposed for testing.
double cohen_kappa(std::span<const int> a, std::span<const int> b);

// Strict micro-F1 with `a` as gold.
double iaa_f1(const SpanSet& a, const SpanSet& b);
double iaa_f1(const AnnotationRecord& a, const AnnotationRecord& b);

struct IaaReport {
  std::size_t documents = 0;
  double kappa_all_tokens = 0;
  double kappa_annotated_only = 0;
  double f1_strict = 0;
  std::map<PiiCategory, double> per_category_f1;
};

IaaReport iaa_report(std::span<const Document> docs, const SpanSet& a,
                     const SpanSet& b);

// A maximal group of mutually overlapping spans from either side on which
// the two records differ. [start, end) is the group's extent.
struct Disagreement {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<PiiSpan> a_spans;
  std::vector<PiiSpan> b_spans;
};

// Replacement spans for the disagreement with the same extent.
struct Decision {
  std::size_t start = 0;
  std::size_t end = 0;
  std::vector<PiiSpan> spans;

  static Decision take_a(const Disagreement& d) {
    return {d.start, d.end, d.a_spans};
  }
  static Decision take_b(const Disagreement& d) {
    return {d.start, d.end, d.b_spans};
  }
};

std::vector<Disagreement> find_disagreements(const AnnotationRecord& a,
                                             const AnnotationRecord& b);

// Agreements carry over; every disagreement needs a decision or
// UnresolvedDisagreement is thrown. The result is confirmed, human-sourced
// and attributed to `adjudicator_id`.
AnnotationRecord adjudicate(const AnnotationRecord& a, const AnnotationRecord& b,
                            std::span<const Decision> decisions,
                            const std::string& adjudicator_id = "gold");

}  // namespace deid

#endif  // DEID_ANNOTATION_HPP_
