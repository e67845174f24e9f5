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

#include "deid/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "deid/errors.hpp"

namespace deid {

namespace {

std::size_t cat(PiiCategory c) { return static_cast<std::size_t>(c); }

bool triple_equal(const PiiSpan& a, const PiiSpan& b) {
  return a.start == b.start && a.end == b.end && a.category == b.category;
}

std::vector<PiiSpan> sorted(std::span<const PiiSpan> spans) {
  std::vector<PiiSpan> out(spans.begin(), spans.end());
  sort_spans(out);
  return out;
}

void accumulate_strict(std::span<const PiiSpan> gold_in,
                       std::span<const PiiSpan> pred_in, MetricsReport& r) {
  const auto gold = sorted(gold_in);
  const auto pred = sorted(pred_in);
  std::size_t i = 0, j = 0;
  while (i < gold.size() || j < pred.size()) {
    if (j == pred.size() || (i < gold.size() && span_less(gold[i], pred[j]))) {
      ++r.per_category[cat(gold[i++].category)].fn;
    } else if (i == gold.size() || span_less(pred[j], gold[i])) {
      ++r.per_category[cat(pred[j++].category)].fp;
    } else {
      ++r.per_category[cat(gold[i].category)].tp;
      ++i;
      ++j;
    }
  }
}

const std::vector<PiiSpan>& spans_of(const SpanSet& set, const std::string& id) {
  static const std::vector<PiiSpan> kEmpty;
  auto it = set.find(id);
  return it == set.end() ? kEmpty : it->second;
}

// Every doc id present in either set.
std::vector<std::string> doc_ids(const SpanSet& a, const SpanSet& b) {
  std::vector<std::string> ids;
  for (const auto& [id, _] : a) ids.push_back(id);
  for (const auto& [id, _] : b) {
    if (!a.contains(id)) ids.push_back(id);
  }
  return ids;
}

void classify(std::span<const PiiSpan> candidates,
              std::span<const PiiSpan> others, bool false_positive,
              ErrorTaxonomy& tax) {
  for (const PiiSpan& e : candidates) {
    bool same = false, cross = false, matched = false;
    for (const PiiSpan& o : others) {
      if (triple_equal(e, o)) matched = true;
      if (!overlaps(e, o)) continue;
      if (o.category == e.category) {
        same = true;
      } else {
        cross = true;
      }
    }
    // Strict matches are not errors.
    if (matched) continue;
    TaxonomyCounts& t = tax.per_category[cat(e.category)];
    if (false_positive) {
      (same ? t.fp_bm : cross ? t.fp_cm : t.fp_wt)++;
    } else {
      (same ? t.fn_bm : cross ? t.fn_cm : t.fn_nt)++;
    }
  }
}

MeanSd mean_sd(const std::vector<double>& xs) {
  double sum = 0;
  for (double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  double ss = 0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

}  // namespace

double Counts::precision() const {
  return tp + fp == 0 ? 1.0
                      : static_cast<double>(tp) / static_cast<double>(tp + fp);
}

double Counts::recall() const {
  return tp + fn == 0 ? 1.0
                      : static_cast<double>(tp) / static_cast<double>(tp + fn);
}

double Counts::f1() const {
  const double p = precision();
  const double r = recall();
  return p + r == 0 ? 0.0 : 2 * p * r / (p + r);
}

MetricsReport strict_entity_metrics(std::span<const PiiSpan> gold,
                                    std::span<const PiiSpan> pred) {
  MetricsReport r;
  accumulate_strict(gold, pred, r);
  for (const Counts& c : r.per_category) r.micro += c;
  return r;
}

MetricsReport strict_entity_metrics(const SpanSet& gold, const SpanSet& pred) {
  MetricsReport r;
  for (const auto& id : doc_ids(gold, pred)) {
    accumulate_strict(spans_of(gold, id), spans_of(pred, id), r);
  }
  for (const Counts& c : r.per_category) r.micro += c;
  return r;
}

MetricsReport binary_token_metrics(std::span<const Document> docs,
                                   const SpanSet& gold, const SpanSet& pred) {
  MetricsReport r;
  r.mode = MetricsMode::kBinaryToken;
  auto covered = [](const Token& t, const std::vector<PiiSpan>& spans) {
    for (const PiiSpan& s : spans) {
      if (t.start < s.end && s.start < t.end) return true;
    }
    return false;
  };
  for (const Document& doc : docs) {
    const auto& g = spans_of(gold, doc.id());
    const auto& p = spans_of(pred, doc.id());
    for (const auto& line : doc.tokens()) {
      for (const Token& t : line) {
        const bool in_gold = covered(t, g);
        const bool in_pred = covered(t, p);
        if (in_gold && in_pred) {
          ++r.micro.tp;
        } else if (in_pred) {
          ++r.micro.fp;
        } else if (in_gold) {
          ++r.micro.fn;
        }
      }
    }
  }
  return r;
}

TaxonomyCounts ErrorTaxonomy::total() const {
  TaxonomyCounts t;
  for (const auto& c : per_category) {
    t.fp_bm += c.fp_bm;
    t.fp_cm += c.fp_cm;
    t.fp_wt += c.fp_wt;
    t.fn_bm += c.fn_bm;
    t.fn_cm += c.fn_cm;
    t.fn_nt += c.fn_nt;
  }
  return t;
}

ErrorTaxonomy error_taxonomy(const SpanSet& gold, const SpanSet& pred) {
  ErrorTaxonomy tax;
  for (const auto& id : doc_ids(gold, pred)) {
    const auto& g = spans_of(gold, id);
    const auto& p = spans_of(pred, id);
    classify(p, g, /*false_positive=*/true, tax);
    classify(g, p, /*false_positive=*/false, tax);
  }
  return tax;
}

CrossValSummary crossval_report(std::span<const FoldScores> folds) {
  if (folds.size() < 2) {
    throw TooFewFolds("cross-validation needs at least 2 folds, got " +
                      std::to_string(folds.size()));
  }
  std::vector<double> p, r, f;
  for (const FoldScores& s : folds) {
    p.push_back(s.precision);
    r.push_back(s.recall);
    f.push_back(s.f1);
  }
  return {mean_sd(p), mean_sd(r), mean_sd(f)};
}

CrossValSummary crossval_report(std::span<const MetricsReport> folds) {
  std::vector<FoldScores> scores;
  scores.reserve(folds.size());
  for (const auto& r : folds) scores.push_back({r.precision(), r.recall(), r.f1()});
  return crossval_report(scores);
}

}  // namespace deid
