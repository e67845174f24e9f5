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

#include "deid/datasets.hpp"

#include <algorithm>

#include "deid/errors.hpp"
#include "deid/rng.hpp"

namespace deid {

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kBalanced: return "balanced";
    case Provenance::kImbalanced: return "imbalanced";
    case Provenance::kSynthetic: return "synthetic";
  }
  return "original";
}

std::string_view to_string(TrainingMode m) {
  return m == TrainingMode::kBalanced ? "balanced" : "imbalanced";
}

bool CorpusEntry::has_pii() const {
  return std::any_of(sequence.tags.begin(), sequence.tags.end(),
                     [](BioTag t) { return !is_outside(t); });
}

std::size_t LabeledCorpus::pii_lines() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(),
                    [](const CorpusEntry& e) { return e.has_pii(); }));
}

LabeledCorpus make_labeled_corpus(std::string name,
                                  std::span<const Document> docs,
                                  const SpanSet& gold, Provenance provenance) {
  LabeledCorpus out{std::move(name), {}, provenance};
  for (const Document& doc : docs) {
    auto it = gold.find(doc.id());
    const std::vector<PiiSpan> none;
    const auto tags = spans_to_bio(doc, it == gold.end() ? none : it->second);
    auto seqs = to_bio_sequences(doc, tags);
    for (std::size_t l = 0; l < seqs.size(); ++l) {
      if (seqs[l].tokens.empty()) continue;
      out.entries.push_back({doc.id(), l, std::move(seqs[l])});
    }
  }
  return out;
}

LabeledCorpus make_labeled_corpus(std::string name,
                                  std::span<const BioDocument> docs) {
  LabeledCorpus out{std::move(name), {}, Provenance::kOriginal};
  for (const BioDocument& doc : docs) {
    for (std::size_t l = 0; l < doc.lines.size(); ++l) {
      out.entries.push_back({doc.doc_id, l, doc.lines[l]});
    }
  }
  return out;
}

LabeledCorpus build_training_set(const LabeledCorpus& corpus, TrainingMode mode,
                                 std::uint64_t seed) {
  const std::size_t pii = corpus.pii_lines();
  if (pii == 0) {
    throw EmptyCorpus("corpus '" + corpus.name + "' has no line with PII");
  }
  if (mode == TrainingMode::kImbalanced) {
    LabeledCorpus out = corpus;
    out.provenance = Provenance::kImbalanced;
    return out;
  }
  std::vector<std::size_t> no_pii;
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    if (!corpus.entries[i].has_pii()) no_pii.push_back(i);
  }
  std::vector<bool> keep(corpus.entries.size(), false);
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    keep[i] = corpus.entries[i].has_pii();
  }
  Rng rng(seed);
  rng.shuffle(std::span(no_pii));
  const std::size_t take = std::min(pii, no_pii.size());
  for (std::size_t i = 0; i < take; ++i) keep[no_pii[i]] = true;

  LabeledCorpus out{corpus.name, {}, Provenance::kBalanced};
  for (std::size_t i = 0; i < corpus.entries.size(); ++i) {
    if (keep[i]) out.entries.push_back(corpus.entries[i]);
  }
  return out;
}

SplitPlan make_split_plan(std::span<const std::string> doc_ids,
                          std::size_t n_train, std::size_t n_dev,
                          std::uint64_t seed) {
  if (n_train + n_dev > doc_ids.size()) {
    throw BadConfig("split " + std::to_string(n_train) + "/" +
                    std::to_string(n_dev) + " exceeds " +
                    std::to_string(doc_ids.size()) + " documents");
  }
  std::vector<std::string> ids(doc_ids.begin(), doc_ids.end());
  std::sort(ids.begin(), ids.end());
  Rng rng(seed);
  rng.shuffle(std::span(ids));
  SplitPlan plan;
  plan.seed = seed;
  auto first = ids.begin();
  plan.train.assign(first, first + static_cast<std::ptrdiff_t>(n_train));
  plan.dev.assign(first + static_cast<std::ptrdiff_t>(n_train),
                  first + static_cast<std::ptrdiff_t>(n_train + n_dev));
  plan.test.assign(first + static_cast<std::ptrdiff_t>(n_train + n_dev), ids.end());
  return plan;
}

std::vector<std::vector<std::string>> kfold_split(
    std::span<const std::string> doc_ids, std::size_t k, std::uint64_t seed) {
  if (k < 2 || k > doc_ids.size()) {
    throw BadK("k=" + std::to_string(k) + " is invalid for " +
               std::to_string(doc_ids.size()) + " documents");
  }
  std::vector<std::string> ids(doc_ids.begin(), doc_ids.end());
  Rng rng(seed);
  rng.shuffle(std::span(ids));
  std::vector<std::vector<std::string>> folds(k);
  const std::size_t base = ids.size() / k;
  const std::size_t extra = ids.size() % k;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t n = base + (f < extra ? 1 : 0);
    folds[f].assign(ids.begin() + static_cast<std::ptrdiff_t>(pos),
                    ids.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  }
  return folds;
}

}  // namespace deid
