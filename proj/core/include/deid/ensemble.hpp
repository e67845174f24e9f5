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


// Ensembles over a bank of base taggers: token-level plurality voting and
// stacking meta-models (logistic regression, linear SVM, boosted trees)
// trained on the members' dev-set predictions.

#ifndef DEID_ENSEMBLE_HPP_
#define DEID_ENSEMBLE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deid/io.hpp"
#include "deid/metrics.hpp"
#include "deid/taggers.hpp"
#include "deid/text.hpp"

namespace deid {

// ---- Voting ----

// Plurality tag among `votes`. When two or more distinct tags share the top
// count, the tag of the model named first in `ranking` is returned, whatever
// its count. `ranking` holds indices into `votes`, best model first.
BioTag vote_token(std::span<const BioTag> votes, std::span<const std::size_t> ranking);

// Token-wise vote over one line followed by repair_bio. Throws ShapeMismatch
// when the sequences differ in length.
TagSequence vote(std::span<const TagSequence> predictions,
                 std::span<const std::size_t> ranking);

// ---- Stacking ----

enum class StackAlgorithm { kLogisticRegression, kLinearSvm, kGradientBoostedTrees };

std::string_view to_string(StackAlgorithm a);
std::optional<StackAlgorithm> parse_stack_algorithm(std::string_view name);

struct StackerOptions {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::size_t rounds = 50;
  double shrinkage = 0.1;
  std::size_t max_depth = 3;
  std::uint64_t seed = 1;
  // Adds a four-way token shape one-hot (capitalized, digits, lowercase, other).
  bool word_shape_feature = false;
};

inline constexpr std::size_t kShapeClasses = 4;
std::size_t shape_class(std::string_view token);

// One dev token: member predictions in group order, token shape, gold tag.
struct StackSample {
  std::vector<BioTag> votes;
  std::uint8_t shape = 0;
  BioTag gold = BioTag::kO;
};

struct RegressionTree {
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    std::int32_t left = -1;     // feature absent
    std::int32_t right = -1;    // feature present
    double value = 0;
  };
  std::vector<Node> nodes;

  double eval(std::span<const std::uint32_t> active) const;
};

class StackingModel {
 public:
  StackingModel() = default;
  StackingModel(StackAlgorithm algorithm, std::size_t num_members, bool word_shape);

  StackAlgorithm algorithm() const { return algorithm_; }
  std::size_t num_members() const { return num_members_; }
  bool word_shape() const { return word_shape_; }
  // kNumTags per member, plus the shape classes when enabled.
  std::size_t feature_dim() const {
    return kNumTags * num_members_ + (word_shape_ ? kShapeClasses : 0);
  }

  // Sorted indices of the active one-hot features.
  std::vector<std::uint32_t> active_features(std::span<const BioTag> votes,
                                             std::size_t shape) const;

  // Highest-scoring tag; ties go to the lower tag index.
  BioTag predict(std::span<const BioTag> votes, std::size_t shape) const;
  std::array<double, kNumTags> scores(std::span<const BioTag> votes, std::size_t shape) const;

  Json to_json() const;
  static StackingModel from_json(const Json& j);

 private:
  friend StackingModel train_stacker(std::span<const StackSample>, std::size_t,
                                     StackAlgorithm, const StackerOptions&);

  StackAlgorithm algorithm_ = StackAlgorithm::kLogisticRegression;
  std::size_t num_members_ = 0;
  bool word_shape_ = false;
  // Linear models: kNumTags rows of (feature_dim + 1), bias last.
  std::vector<double> weights_;
  // Boosted trees: per tag a base score and its trees.
  std::array<double, kNumTags> base_{};
  std::array<std::vector<RegressionTree>, kNumTags> trees_;
};

// LR: multinomial softmax, per-sample SGD in seeded shuffled order with L2 on
// the weights touched by each sample. SVM: one-vs-rest hinge loss,
// per-sample subgradient steps. GBT: one-vs-rest logistic boosting of
// depth-limited trees with Newton leaf values. Throws EmptyDev.
StackingModel train_stacker(std::span<const StackSample> samples, std::size_t num_members,
                            StackAlgorithm algorithm, const StackerOptions& options = {});

// ---- Groups and ensembles ----

enum class GroupSelector { kAll, kTop3F1, kTop3Recall, kSingle };
enum class EnsembleMethod { kMajorityVote, kStackLr, kStackSvm, kStackGbt };

std::string_view to_string(GroupSelector g);
std::optional<GroupSelector> parse_group_selector(std::string_view name);
std::string_view to_string(EnsembleMethod m);
std::optional<EnsembleMethod> parse_ensemble_method(std::string_view name);

inline constexpr GroupSelector kGroupOrder[] = {GroupSelector::kAll, GroupSelector::kTop3F1,
                                                GroupSelector::kTop3Recall};
inline constexpr EnsembleMethod kMethodOrder[] = {
    EnsembleMethod::kMajorityVote, EnsembleMethod::kStackLr, EnsembleMethod::kStackSvm,
    EnsembleMethod::kStackGbt};

struct ModelGroup {
  GroupSelector selector = GroupSelector::kAll;
  // Ranked by dev F1, descending; ties by tagger_id.
  std::vector<std::string> members;
};

// Bank ids ranked by dev F1 (descending, then id).
std::vector<std::string> rank_by_f1(std::span<const TaggerPtr> bank);

// kTop3F1 / kTop3Recall take min(3, bank size) members by that score (ties by
// id); members are then listed in F1 order. Throws ShapeMismatch on an empty
// bank and for kSingle.
ModelGroup make_group(std::span<const TaggerPtr> bank, GroupSelector selector);

struct EnsembleModel {
  EnsembleMethod method = EnsembleMethod::kMajorityVote;
  ModelGroup group;
  std::vector<TaggerPtr> members;  // group order
  std::optional<StackingModel> stacker;

  std::string id() const;  // "vote/all", "stack-lr/top3-f1", "base/<tagger_id>"
};

// Member predictions per document in group order: member -> line -> tags.
using MemberTags = std::vector<std::vector<TagSequence>>;

MemberTags member_predictions(std::span<const TaggerPtr> members, const Document& doc);

std::vector<StackSample> stack_samples(std::span<const TaggerPtr> members,
                                       std::span<const Document> docs, const SpanSet& gold);

// Builds the ensemble; stacking methods train on (dev_docs, dev_gold).
EnsembleModel make_ensemble(std::span<const TaggerPtr> bank, EnsembleMethod method,
                            GroupSelector selector, std::span<const Document> dev_docs,
                            const SpanSet& dev_gold, const StackerOptions& options = {});

EnsembleModel single_model_ensemble(const TaggerPtr& model);

// Combines precomputed member predictions (group order) for one document.
std::vector<TagSequence> combine(const EnsembleModel& ensemble, const MemberTags& member_tags,
                                 const Document& doc);

std::vector<TagSequence> apply_ensemble_tags(const EnsembleModel& ensemble,
                                             const Document& doc);
std::vector<PiiSpan> apply_ensemble(const EnsembleModel& ensemble, const Document& doc);

MetricsReport evaluate(const EnsembleModel& ensemble, std::span<const Document> docs,
                       const SpanSet& gold);

struct Candidate {
  std::string id;
  MetricsReport report;
};

struct Selection {
  EnsembleModel best;
  // In evaluation order: 12 ensembles (method-major), then base models by rank.
  std::vector<Candidate> candidates;
};

// Scores every ensemble and base model on the selection set by strict
// micro-F1 and returns the first maximum. A bank of one is returned as a
// single-member vote ensemble.
Selection select_best(std::span<const TaggerPtr> bank, std::span<const Document> dev_docs,
                      const SpanSet& dev_gold, std::span<const Document> selection_docs,
                      const SpanSet& selection_gold, const StackerOptions& options = {},
                      std::size_t jobs = 1);

// Ensemble file: {"format_version", "method", "group": {"selector", "members"},
// "ranking", "members": [{"tagger_id", "file"}], "stacker"}. Member files are
// "<tagger_id>.json" relative to the model directory.
Json to_json(const EnsembleModel& ensemble);
EnsembleModel ensemble_from_json(const Json& j, const std::filesystem::path& model_dir);

}  // namespace deid

#endif  // DEID_ENSEMBLE_HPP_
