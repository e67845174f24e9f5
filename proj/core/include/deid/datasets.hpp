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

// Line-level labeled corpora, train/dev/test plans, balanced sampling and
// k-fold splitting.

#ifndef DEID_DATASETS_HPP_
#define DEID_DATASETS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deid/bio_io.hpp"
#include "deid/metrics.hpp"
#include "deid/text.hpp"

namespace deid {

enum class Provenance { kOriginal, kBalanced, kImbalanced, kSynthetic };

std::string_view to_string(Provenance p);

struct CorpusEntry {
  std::string doc_id;
  std::size_t line_index = 0;  // document line number
  BioSequence sequence;

  bool has_pii() const;

  friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
};

struct LabeledCorpus {
  std::string name;
  std::vector<CorpusEntry> entries;
  Provenance provenance = Provenance::kOriginal;

  std::size_t pii_lines() const;
};

// One entry per document line that has at least one token. Throws the
// text-core errors when gold spans are invalid.
LabeledCorpus make_labeled_corpus(std::string name,
                                  std::span<const Document> docs,
                                  const SpanSet& gold,
                                  Provenance provenance = Provenance::kOriginal);

// Entries from BIO documents; line_index counts non-empty lines.
LabeledCorpus make_labeled_corpus(std::string name,
                                  std::span<const BioDocument> docs);

enum class TrainingMode { kBalanced, kImbalanced };

std::string_view to_string(TrainingMode m);

// Balanced: every PII line plus an equal number of no-PII lines drawn
// without replacement (all of them if fewer exist), kept in corpus order.
// Imbalanced: the corpus unchanged. Throws EmptyCorpus when there is no PII
// line.
LabeledCorpus build_training_set(const LabeledCorpus& corpus, TrainingMode mode,
                                 std::uint64_t seed);

struct SplitPlan {
  std::uint64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;
};

// Seeded shuffle, then the first n_train ids to train, the next n_dev to
// dev and the rest to test. Throws BadConfig when the counts exceed the
// corpus.
SplitPlan make_split_plan(std::span<const std::string> doc_ids,
                          std::size_t n_train, std::size_t n_dev,
                          std::uint64_t seed);

// Seeded shuffle then contiguous partition; fold sizes differ by at most
// one. Throws BadK unless 2 <= k <= doc_ids.size().
std::vector<std::vector<std::string>> kfold_split(
    std::span<const std::string> doc_ids, std::size_t k, std::uint64_t seed);

}  // namespace deid

#endif  // DEID_DATASETS_HPP_
