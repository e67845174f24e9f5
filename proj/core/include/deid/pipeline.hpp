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


// End-to-end runs: synth -> datasets -> train -> select -> eval -> redact,
// plus the k-fold cross-validation protocol. Every artifact lands under one
// output directory and is listed with its SHA-256 in manifest.json.

#ifndef DEID_PIPELINE_HPP_
#define DEID_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deid/datasets.hpp"
#include "deid/ensemble.hpp"
#include "deid/io.hpp"
#include "deid/metrics.hpp"
#include "deid/redaction.hpp"
#include "deid/synth.hpp"
#include "deid/taggers.hpp"

namespace deid {

std::string sha256_hex(std::string_view data);

// Every stochastic stage draws its seed from (run seed, stage), so running the
// stages one by one from the CLI reproduces a full pipeline run.
enum class SeedStage : std::uint64_t {
  kSplit = 1,
  kSampling = 2,
  kBank = 3,
  kStacker = 4,
  kFolds = 5,
  kFoldBank = 6,
};

std::uint64_t stage_seed(std::uint64_t seed, SeedStage stage);

Json to_json(const SplitPlan& plan);
SplitPlan split_from_json(const Json& j);

// BIO text of training lines regrouped per document, in corpus order.
std::string labeled_bio_text(const LabeledCorpus& corpus);
// BIO text of whole documents under `spans`.
std::string documents_bio_text(std::span<const Document> docs, const SpanSet& spans);

// Model directory layout: bank.json lists the members, <tagger_id>.json holds
// each one, ensemble.json the selected ensemble.
std::vector<TaggerPtr> load_bank(const std::filesystem::path& model_dir);
// A serialized ensemble, or a single tagger wrapped as a one-model ensemble.
EnsembleModel load_model(const std::filesystem::path& file);
Json bank_to_json(std::span<const TaggerPtr> bank);

Json to_json(const Selection& selection, bool selected_on_test);

// Writes files under a root and remembers their digests.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  void write(const std::filesystem::path& relative, std::string_view content);
  void record_input(const std::string& name, std::string_view content);

  // {"inputs": {name: sha256}, "outputs": {path: sha256}, "config": ...}
  Json manifest(const Json& config) const;

 private:
  std::filesystem::path root_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
};

// Documents with the given ids, in id order given. Throws NotFound.
std::vector<Document> select_docs(std::span<const Document> docs,
                                  std::span<const std::string> ids);

struct TrainedSystem {
  std::vector<TaggerPtr> bank;
  Selection selection;
};

// Balanced and imbalanced training sets from `train`, the model bank scored
// on `dev`, and ensemble selection on `selection` (dev unless the caller
// passes test).
TrainedSystem train_system(std::span<const Document> train, std::span<const Document> dev,
                           std::span<const Document> selection, const SpanSet& gold,
                           const BankOptions& bank, const StackerOptions& stacker,
                           std::uint64_t seed, std::size_t jobs);

struct CrossValOptions {
  std::size_t folds = 10;
  std::uint64_t seed = 1;
  BankOptions bank;
  StackerOptions stacker;
  std::size_t jobs = 1;
};

struct FoldResult {
  std::size_t fold = 0;
  std::string model_id;
  std::size_t train_docs = 0, dev_docs = 0, test_docs = 0;
  MetricsReport test;
};

struct CrossValResult {
  std::vector<FoldResult> folds;
  CrossValSummary summary;
};

// Seeded shuffle into k folds. Fold i is the test set, fold (i + 1) mod k
// the dev set for scoring and selection, the rest train.
CrossValResult run_crossval(std::span<const Document> docs, const SpanSet& gold,
                            const CrossValOptions& options);
Json to_json(const CrossValResult& result);

struct PipelineConfig {
  std::uint64_t seed = 1;
  SynthConfig synth;
  std::size_t n_train = 400;
  std::size_t n_dev = 100;
  BankOptions bank;
  StackerOptions stacker;
  bool select_on_test = false;
  SurrogateStyle surrogate = SurrogateStyle::kCompact;
  bool crossval = true;
  std::size_t folds = 10;
  std::size_t jobs = 1;

  Json to_json() const;
};

struct PipelineResult {
  SplitPlan split;
  std::vector<TaggerPtr> bank;
  Selection selection;
  MetricsReport test_strict;
  MetricsReport test_binary;
  ErrorTaxonomy taxonomy;
  std::size_t gold_redaction_leaks = 0;
  std::size_t predicted_redaction_leaks = 0;
  std::optional<CrossValResult> crossval;
};

// Called with the stage name before each stage starts.
using StageObserver = std::function<void(std::string_view stage)>;

PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir,
                            const StageObserver& observer = {});

}  // namespace deid

#endif  // DEID_PIPELINE_HPP_
