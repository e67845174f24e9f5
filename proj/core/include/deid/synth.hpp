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

// Synthetic discharge summaries with exact gold spans.
//
// Documents mix semi-structured header lines ("Patient: ... MRN: ..."),
// narrative lines with contextual cues ("Dr", "Thank you for the care of",
// "Ph:") and filler prose. Filler carries untagged admission/discharge dates,
// lab values and eponymous medical terms so that taggers meet realistic
// distractors. A small fraction of doctor mentions is misspelled ("DrSmith",
// "Pro Smith").

#ifndef DEID_SYNTH_HPP_
#define DEID_SYNTH_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "deid/metrics.hpp"
#include "deid/text.hpp"

namespace deid {

struct SynthConfig {
  std::size_t n_docs = 600;
  std::uint64_t seed = 1;
  // Fraction of lines carrying PII.
  double pii_line_density = 0.114;
  // Target entity share per category, kAllCategories order. Must sum to 1
  // within 0.01; normalized before use.
  std::array<double, kNumCategories> category_mix = {0.54, 0.114, 0.045, 0.155,
                                                     0.145};
  double noise_rate = 0.01;
  // Share of person names invented from syllables instead of drawn from the
  // word lists, so taggers meet names no gazetteer knows.
  double oov_name_rate = 0.3;
  std::size_t min_lines = 40;
  std::size_t max_lines = 80;
};

// Throws BadConfig.
void validate(const SynthConfig& config);

struct SynthCorpus {
  std::vector<Document> docs;
  SpanSet gold;
};

// Deterministic under config.seed; document i depends only on (seed, i).
SynthCorpus generate_synthetic(const SynthConfig& config);

// Document i alone, with its gold spans.
std::pair<Document, std::vector<PiiSpan>> generate_document(
    const SynthConfig& config, std::size_t index);

}  // namespace deid

#endif  // DEID_SYNTH_HPP_
