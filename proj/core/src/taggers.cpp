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


#include "deid/taggers.hpp"

#include "deid/errors.hpp"
#include "deid/parallel.hpp"
#include "deid/rng.hpp"

namespace deid {

std::string_view to_string(TaggerKind kind) {
  switch (kind) {
    case TaggerKind::kPattern: return "pattern";
    case TaggerKind::kGazetteer: return "gazetteer";
    case TaggerKind::kPerceptron: return "perceptron";
    case TaggerKind::kImported: return "imported";
  }
  return "pattern";
}

std::optional<TaggerKind> parse_tagger_kind(std::string_view name) {
  for (auto k : {TaggerKind::kPattern, TaggerKind::kGazetteer, TaggerKind::kPerceptron,
                 TaggerKind::kImported}) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<TagSequence> Tagger::tag(const Document& doc) const {
  std::vector<TagSequence> raw = tag_raw(doc);
  const auto lines = doc.tokens();
  if (raw.size() != lines.size()) {
    throw ShapeError("tagger '" + id_ + "' returned " + std::to_string(raw.size()) +
                     " lines for " + std::to_string(lines.size()));
  }
  for (std::size_t l = 0; l < raw.size(); ++l) {
    if (raw[l].size() != lines[l].size()) {
      throw ShapeError("tagger '" + id_ + "' tag count mismatch on line " + std::to_string(l));
    }
    raw[l] = repair_bio(raw[l]);
  }
  return raw;
}

std::vector<PiiSpan> Tagger::predict(const Document& doc) const {
  return bio_to_spans(doc, tag(doc), SpanSource::kMachine, id_);
}

std::vector<TagSequence> LineTagger::tag_raw(const Document& doc) const {
  std::vector<TagSequence> out;
  out.reserve(doc.tokens().size());
  std::vector<std::string> surfaces;
  for (const TokenLine& line : doc.tokens()) {
    surfaces.clear();
    for (const Token& t : line) surfaces.push_back(t.surface);
    out.push_back(tag_tokens(surfaces));
  }
  return out;
}

ImportedTagger::ImportedTagger(std::string id, std::vector<BioDocument> predictions)
    : Tagger(std::move(id), TaggerKind::kImported), predictions_(std::move(predictions)) {
  for (std::size_t i = 0; i < predictions_.size(); ++i) by_id_[predictions_[i].doc_id] = i;
}

std::vector<TagSequence> ImportedTagger::tag_raw(const Document& doc) const {
  auto it = by_id_.find(doc.id());
  if (it == by_id_.end()) {
    throw MissingPrediction("imported tagger '" + id() + "' has no prediction for '" +
                            doc.id() + "'");
  }
  return align_to_document(predictions_[it->second], doc);
}

Json ImportedTagger::parameters() const { return Json{{"bio", write_bio(predictions_)}}; }

std::shared_ptr<ImportedTagger> load_imported(std::string id,
                                              const std::filesystem::path& bio_file) {
  return std::make_shared<ImportedTagger>(std::move(id), read_bio(read_file(bio_file)));
}

MetricsReport evaluate(const Tagger& tagger, std::span<const Document> docs,
                       const SpanSet& gold) {
  SpanSet gold_sub, pred;
  for (const Document& doc : docs) {
    auto it = gold.find(doc.id());
    gold_sub[doc.id()] = it == gold.end() ? std::vector<PiiSpan>{} : it->second;
    pred[doc.id()] = tagger.predict(doc);
  }
  return strict_entity_metrics(gold_sub, pred);
}

void score_on_dev(Tagger& tagger, std::span<const Document> docs, const SpanSet& gold) {
  const MetricsReport r = evaluate(tagger, docs, gold);
  tagger.set_dev_scores({r.precision(), r.recall(), r.f1()});
}

Json to_json(const Tagger& tagger) {
  Json scores = nullptr;
  if (const auto& s = tagger.dev_scores()) {
    scores = Json{{"precision", s->precision}, {"recall", s->recall}, {"f1", s->f1}};
  }
  const auto& mode = tagger.training_mode();
  return Json{{"format_version", 1},
              {"tagger_id", tagger.id()},
              {"kind", to_string(tagger.kind())},
              {"training_mode", mode ? std::string(to_string(*mode)) : "n/a"},
              {"dev_scores", std::move(scores)},
              {"parameters", tagger.parameters()}};
}

TaggerPtr tagger_from_json(const Json& j) {
  if (j.value("format_version", 0) != 1) throw FormatError("unsupported model format_version");
  const std::string id = j.at("tagger_id").get<std::string>();
  const auto kind = parse_tagger_kind(j.at("kind").get<std::string>());
  if (!kind) throw FormatError("unknown tagger kind in model '" + id + "'");
  const Json& params = j.at("parameters");
  std::shared_ptr<Tagger> model;
  switch (*kind) {
    case TaggerKind::kPattern: model = std::make_shared<PatternTagger>(id); break;
    case TaggerKind::kGazetteer: model = std::make_shared<GazetteerTagger>(id); break;
    case TaggerKind::kPerceptron: model = PerceptronTagger::from_parameters(id, params); break;
    case TaggerKind::kImported:
      model = std::make_shared<ImportedTagger>(id, read_bio(params.at("bio").get<std::string>()));
      break;
  }
  const std::string mode = j.value("training_mode", "n/a");
  if (mode == "balanced") model->set_training_mode(TrainingMode::kBalanced);
  if (mode == "imbalanced") model->set_training_mode(TrainingMode::kImbalanced);
  if (const auto& s = j.at("dev_scores"); !s.is_null()) {
    model->set_dev_scores({s.at("precision").get<double>(), s.at("recall").get<double>(),
                           s.at("f1").get<double>()});
  }
  return model;
}

std::vector<TaggerPtr> build_model_bank(const LabeledCorpus& train_balanced,
                                        const LabeledCorpus& train_imbalanced,
                                        std::span<const Document> dev_docs,
                                        const SpanSet& dev_gold, const BankOptions& options) {
  struct Job {
    FeatureSet fs;
    TrainingMode mode;
  };
  std::vector<Job> jobs;
  for (FeatureSet fs : options.feature_sets) {
    jobs.push_back({fs, TrainingMode::kBalanced});
    jobs.push_back({fs, TrainingMode::kImbalanced});
  }
  std::vector<std::shared_ptr<Tagger>> bank(jobs.size());
  parallel_for(jobs.size(), options.jobs, [&](std::size_t i) {
    const Job& job = jobs[i];
    PerceptronOptions po{job.fs, options.epochs, mix_seed(options.seed, i)};
    const std::string id = "perceptron-" + std::string(to_string(job.fs)) + "-" +
                           std::string(to_string(job.mode));
    auto model = train_perceptron(
        id, job.mode == TrainingMode::kBalanced ? train_balanced : train_imbalanced, po);
    model->set_training_mode(job.mode);
    bank[i] = std::move(model);
  });
  if (options.include_pattern) bank.push_back(std::make_shared<PatternTagger>());
  if (options.include_gazetteer) bank.push_back(std::make_shared<GazetteerTagger>());
  parallel_for(bank.size(), options.jobs,
               [&](std::size_t i) { score_on_dev(*bank[i], dev_docs, dev_gold); });
  return {bank.begin(), bank.end()};
}

}  // namespace deid
