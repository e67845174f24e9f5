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

// Evaluation: strict entity matching, binary PII-token matching, the
// BM/CM/WT/NT error taxonomy and cross-validation summaries.
//
// Zero-denominator convention: precision with no predictions and recall with
// no gold entities are 1.0. F1 is 0 when precision + recall is 0.

#ifndef DEID_METRICS_HPP_
#define DEID_METRICS_HPP_

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "deid/text.hpp"

namespace deid {

// doc_id -> spans of that document.
using SpanSet = std::map<std::string, std::vector<PiiSpan>>;

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;

  Counts& operator+=(const Counts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const Counts&, const Counts&) = default;
};

enum class MetricsMode { kStrictEntity, kBinaryToken };

struct MetricsReport {
  MetricsMode mode = MetricsMode::kStrictEntity;
  Counts micro;
  // Strict mode only; sums to `micro`.
  std::array<Counts, kNumCategories> per_category{};

  double precision() const { return micro.precision(); }
  double recall() const { return micro.recall(); }
  double f1() const { return micro.f1(); }
  const Counts& category(PiiCategory c) const {
    return per_category[static_cast<std::size_t>(c)];
  }
};

MetricsReport strict_entity_metrics(const SpanSet& gold, const SpanSet& pred);
MetricsReport strict_entity_metrics(std::span<const PiiSpan> gold,
                                    std::span<const PiiSpan> pred);

// Tokens of `docs` covered by any span are PII, category ignored. Spans of
// documents not in `docs` are ignored.
MetricsReport binary_token_metrics(std::span<const Document> docs,
                                   const SpanSet& gold, const SpanSet& pred);

struct TaxonomyCounts {
  std::size_t fp_bm = 0, fp_cm = 0, fp_wt = 0;
  std::size_t fn_bm = 0, fn_cm = 0, fn_nt = 0;

  std::size_t fp() const { return fp_bm + fp_cm + fp_wt; }
  std::size_t fn() const { return fn_bm + fn_cm + fn_nt; }
  friend bool operator==(const TaxonomyCounts&, const TaxonomyCounts&) = default;
};

struct ErrorTaxonomy {
  std::array<TaxonomyCounts, kNumCategories> per_category{};

  const TaxonomyCounts& category(PiiCategory c) const {
    return per_category[static_cast<std::size_t>(c)];
  }
  TaxonomyCounts total() const;
};

// Each false positive is filed under its own category as BM (overlaps a
// same-category gold span), else CM (overlaps other-category gold), else WT.
// False negatives likewise as BM, CM or NT. Overlap means one shared
// character.
ErrorTaxonomy error_taxonomy(const SpanSet& gold, const SpanSet& pred);

struct FoldScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MeanSd {
  double mean = 0;
  double sd = 0;
};

struct CrossValSummary {
  MeanSd precision;
  MeanSd recall;
  MeanSd f1;
};

// Mean and sample standard deviation (n - 1). Throws TooFewFolds below two.
CrossValSummary crossval_report(std::span<const FoldScores> folds);
CrossValSummary crossval_report(std::span<const MetricsReport> folds);

}  // namespace deid

#endif  // DEID_METRICS_HPP_
