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


// Base taggers. Every tagger maps a Document to one BIO-legal tag sequence
// per line and carries the metadata the ensemble layer ranks on.
//
//   pattern      shipped rules for PHONE, IDN and DOB
//   gazetteer    word-list lookup for PERSON and ADDRESS
//   perceptron   averaged structured perceptron, exact constrained Viterbi
//   imported     replays predictions from a BIO file

#ifndef DEID_TAGGERS_HPP_
#define DEID_TAGGERS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deid/bio_io.hpp"
#include "deid/datasets.hpp"
#include "deid/io.hpp"
#include "deid/metrics.hpp"
#include "deid/text.hpp"
#include "deid/viterbi.hpp"

namespace deid {

enum class TaggerKind { kPattern, kGazetteer, kPerceptron, kImported };

std::string_view to_string(TaggerKind kind);
std::optional<TaggerKind> parse_tagger_kind(std::string_view name);

struct DevScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

class Tagger {
 public:
  Tagger(std::string id, TaggerKind kind) : id_(std::move(id)), kind_(kind) {}
  virtual ~Tagger() = default;

  const std::string& id() const { return id_; }
  TaggerKind kind() const { return kind_; }

  // Empty for taggers that are not trained.
  const std::optional<TrainingMode>& training_mode() const { return training_mode_; }
  void set_training_mode(std::optional<TrainingMode> m) { training_mode_ = m; }

  const std::optional<DevScores>& dev_scores() const { return dev_scores_; }
  void set_dev_scores(const DevScores& s) { dev_scores_ = s; }

  // One repaired tag sequence per document line.
  std::vector<TagSequence> tag(const Document& doc) const;
  std::vector<PiiSpan> predict(const Document& doc) const;

  // Kind-specific payload of the model file.
  virtual Json parameters() const = 0;

 protected:
  virtual std::vector<TagSequence> tag_raw(const Document& doc) const = 0;

 private:
  std::string id_;
  TaggerKind kind_;
  std::optional<TrainingMode> training_mode_;
  std::optional<DevScores> dev_scores_;
};

using TaggerPtr = std::shared_ptr<const Tagger>;

// Taggers that look only at the token surfaces of one line.
class LineTagger : public Tagger {
 public:
  using Tagger::Tagger;
  virtual TagSequence tag_tokens(std::span<const std::string> tokens) const = 0;

 protected:
  std::vector<TagSequence> tag_raw(const Document& doc) const override;
};

class PatternTagger final : public LineTagger {
 public:
  explicit PatternTagger(std::string id = "pattern")
      : LineTagger(std::move(id), TaggerKind::kPattern) {}
  TagSequence tag_tokens(std::span<const std::string> tokens) const override;
  Json parameters() const override;
};

class GazetteerTagger final : public LineTagger {
 public:
  explicit GazetteerTagger(std::string id = "gazetteer")
      : LineTagger(std::move(id), TaggerKind::kGazetteer) {}
  TagSequence tag_tokens(std::span<const std::string> tokens) const override;
  Json parameters() const override;
};

// Feature templates. kRich is the full set; kCompact drops affixes longer
// than three characters, the outer context window and the bigram features.
enum class FeatureSet { kRich, kCompact };

std::string_view to_string(FeatureSet fs);
std::optional<FeatureSet> parse_feature_set(std::string_view name);

// Feature names for position i of a line.
std::vector<std::string> extract_features(std::span<const std::string> tokens,
                                          std::size_t i, FeatureSet fs);

// Word shape with runs collapsed: "Smith" -> "Xx", "123456" -> "d", "02-9" -> "d-d".
std::string word_shape(std::string_view token);

class PerceptronTagger final : public LineTagger {
 public:
  PerceptronTagger(std::string id, FeatureSet fs);

  FeatureSet feature_set() const { return feature_set_; }
  bool trained() const { return trained_; }

  TagSequence tag_tokens(std::span<const std::string> tokens) const override;
  Json parameters() const override;
  static std::shared_ptr<PerceptronTagger> from_parameters(std::string id,
                                                           const Json& params);

  // Lattice for one line under the current (averaged) weights.
  Lattice lattice(std::span<const std::string> tokens) const;

  std::size_t num_features() const { return feature_index_.size(); }

 private:
  friend class PerceptronTrainer;

  FeatureSet feature_set_;
  bool trained_ = false;
  std::unordered_map<std::string, std::uint32_t> feature_index_;
  std::vector<double> emission_;    // feature * kNumTags + tag
  std::vector<double> transition_;  // prev * kNumTags + tag
  std::vector<double> start_;       // kNumTags
};

struct PerceptronOptions {
  FeatureSet feature_set = FeatureSet::kRich;
  std::size_t epochs = 8;
  std::uint64_t seed = 1;
};

// Throws EmptyTrainingSet. Zero epochs yields zero weights (all-O output).
std::shared_ptr<PerceptronTagger> train_perceptron(std::string id,
                                                   const LabeledCorpus& train,
                                                   const PerceptronOptions& options);

// Transition and start scores enforcing BIO legality (-infinity when illegal).
void apply_bio_constraints(Lattice& lattice);

class ImportedTagger final : public Tagger {
 public:
  ImportedTagger(std::string id, std::vector<BioDocument> predictions);

  Json parameters() const override;

 protected:
  // Throws MissingPrediction for a document not in the file.
  std::vector<TagSequence> tag_raw(const Document& doc) const override;

 private:
  std::vector<BioDocument> predictions_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

// Throws FormatError / NotFound.
std::shared_ptr<ImportedTagger> load_imported(std::string id,
                                              const std::filesystem::path& bio_file);

// Strict-entity metrics of a tagger on documents with gold spans.
MetricsReport evaluate(const Tagger& tagger, std::span<const Document> docs,
                       const SpanSet& gold);
void score_on_dev(Tagger& tagger, std::span<const Document> docs, const SpanSet& gold);

// Model file: {"format_version", "tagger_id", "kind", "training_mode",
// "dev_scores", "parameters"}.
Json to_json(const Tagger& tagger);
TaggerPtr tagger_from_json(const Json& j);

struct BankOptions {
  std::size_t epochs = 8;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
  std::vector<FeatureSet> feature_sets = {FeatureSet::kRich, FeatureSet::kCompact};
  bool include_pattern = true;
  bool include_gazetteer = true;
};

// Every trainable kind twice (balanced, imbalanced), static taggers once,
// all scored on dev. Ordered: perceptrons by feature set then mode, then
// pattern, gazetteer.
std::vector<TaggerPtr> build_model_bank(const LabeledCorpus& train_balanced,
                                        const LabeledCorpus& train_imbalanced,
                                        std::span<const Document> dev_docs,
                                        const SpanSet& dev_gold,
                                        const BankOptions& options = {});

}  // namespace deid

#endif  // DEID_TAGGERS_HPP_
