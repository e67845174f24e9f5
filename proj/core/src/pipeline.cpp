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


#include "deid/pipeline.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <sstream>

#include "deid/errors.hpp"
#include "deid/parallel.hpp"
#include "deid/rng.hpp"
#include "deid/store.hpp"

namespace deid {

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("InternalError", "SHA-256 digest failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", md[i]);
    hex += buf;
  }
  return hex;
}

void ArtifactWriter::write(const std::filesystem::path& relative, std::string_view content) {
  write_file(root_ / relative, content);
  outputs_[relative.generic_string()] = sha256_hex(content);
}

void ArtifactWriter::record_input(const std::string& name, std::string_view content) {
  inputs_[name] = sha256_hex(content);
}

Json ArtifactWriter::manifest(const Json& config) const {
  return Json{{"config", config}, {"inputs", inputs_}, {"outputs", outputs_}};
}

std::vector<Document> select_docs(std::span<const Document> docs,
                                  std::span<const std::string> ids) {
  std::map<std::string_view, const Document*> by_id;
  for (const Document& d : docs) by_id[d.id()] = &d;
  std::vector<Document> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw NotFound("document '" + id + "' is not in the corpus");
    out.push_back(*it->second);
  }
  return out;
}

TrainedSystem train_system(std::span<const Document> train, std::span<const Document> dev,
                           std::span<const Document> selection, const SpanSet& gold,
                           const BankOptions& bank_options, const StackerOptions& stacker,
                           std::uint64_t seed, std::size_t jobs) {
  const LabeledCorpus labeled = make_labeled_corpus("train", train, gold);
  const LabeledCorpus balanced = build_training_set(labeled, TrainingMode::kBalanced, seed);
  const LabeledCorpus imbalanced = build_training_set(labeled, TrainingMode::kImbalanced, seed);
  BankOptions bo = bank_options;
  bo.jobs = jobs;
  TrainedSystem out;
  out.bank = build_model_bank(balanced, imbalanced, dev, gold, bo);
  out.selection = select_best(out.bank, dev, gold, selection, gold, stacker, jobs);
  return out;
}

CrossValResult run_crossval(std::span<const Document> docs, const SpanSet& gold,
                            const CrossValOptions& options) {
  std::vector<std::string> ids;
  for (const Document& d : docs) ids.push_back(d.id());
  const auto folds = kfold_split(ids, options.folds, options.seed);
  const std::size_t k = folds.size();
  CrossValResult out;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t dev_fold = (i + 1) % k;
    std::vector<std::string> train_ids;
    for (std::size_t f = 0; f < k; ++f) {
      if (f != i && f != dev_fold) train_ids.insert(train_ids.end(), folds[f].begin(), folds[f].end());
    }
    const auto train = select_docs(docs, train_ids);
    const auto dev = select_docs(docs, folds[dev_fold]);
    const auto test = select_docs(docs, folds[i]);
    BankOptions bank = options.bank;
    bank.seed = mix_seed(options.bank.seed, i);
    const TrainedSystem sys = train_system(train, dev, dev, gold, bank, options.stacker,
                                           mix_seed(options.seed, 100 + i), options.jobs);
    out.folds.push_back({i, sys.selection.best.id(), train.size(), dev.size(), test.size(),
                         evaluate(sys.selection.best, test, gold)});
  }
  std::vector<MetricsReport> reports;
  for (const auto& f : out.folds) reports.push_back(f.test);
  out.summary = crossval_report(reports);
  return out;
}

Json to_json(const CrossValResult& result) {
  Json folds = Json::array();
  for (const auto& f : result.folds) {
    folds.push_back({{"fold", f.fold},
                     {"model", f.model_id},
                     {"train_docs", f.train_docs},
                     {"dev_docs", f.dev_docs},
                     {"test_docs", f.test_docs},
                     {"test", to_json(f.test)}});
  }
  return Json{{"folds", std::move(folds)}, {"summary", to_json(result.summary)}};
}

Json PipelineConfig::to_json() const {
  Json fs = Json::array();
  for (auto f : bank.feature_sets) fs.push_back(to_string(f));
  return Json{
      {"seed", seed},
      {"synth",
       {{"n_docs", synth.n_docs},
        {"pii_line_density", synth.pii_line_density},
        {"category_mix", synth.category_mix},
        {"noise_rate", synth.noise_rate},
        {"oov_name_rate", synth.oov_name_rate},
        {"min_lines", synth.min_lines},
        {"max_lines", synth.max_lines}}},
      {"split", {{"train", n_train}, {"dev", n_dev}}},
      {"bank", {{"epochs", bank.epochs}, {"feature_sets", fs},
                {"pattern", bank.include_pattern}, {"gazetteer", bank.include_gazetteer}}},
      {"stacker",
       {{"learning_rate", stacker.learning_rate}, {"epochs", stacker.epochs},
        {"l2", stacker.l2}, {"rounds", stacker.rounds}, {"shrinkage", stacker.shrinkage},
        {"max_depth", stacker.max_depth}, {"word_shape_feature", stacker.word_shape_feature}}},
      {"select_on", select_on_test ? "test" : "dev"},
      {"surrogate", surrogate == SurrogateStyle::kCompact ? "compact" : "template"},
      {"crossval", crossval},
      {"folds", folds}};
}

std::uint64_t stage_seed(std::uint64_t seed, SeedStage stage) {
  return mix_seed(seed, static_cast<std::uint64_t>(stage));
}

Json to_json(const SplitPlan& plan) {
  return Json{{"seed", plan.seed}, {"train", plan.train}, {"dev", plan.dev}, {"test", plan.test}};
}

SplitPlan split_from_json(const Json& j) {
  SplitPlan plan;
  plan.seed = j.at("seed").get<std::uint64_t>();
  plan.train = j.at("train").get<std::vector<std::string>>();
  plan.dev = j.at("dev").get<std::vector<std::string>>();
  plan.test = j.at("test").get<std::vector<std::string>>();
  return plan;
}

std::string documents_bio_text(std::span<const Document> docs, const SpanSet& spans) {
  const std::vector<PiiSpan> none;
  std::vector<BioDocument> bio;
  for (const Document& d : docs) {
    auto it = spans.find(d.id());
    bio.push_back(make_bio_document(d, spans_to_bio(d, it == spans.end() ? none : it->second)));
  }
  return write_bio(bio);
}

std::string labeled_bio_text(const LabeledCorpus& corpus) {
  std::vector<BioDocument> bio;
  for (const auto& e : corpus.entries) {
    if (bio.empty() || bio.back().doc_id != e.doc_id) bio.push_back(BioDocument{e.doc_id, {}});
    bio.back().lines.push_back(e.sequence);
  }
  return write_bio(bio);
}

std::vector<TaggerPtr> load_bank(const std::filesystem::path& model_dir) {
  const Json bank = Json::parse(read_file(model_dir / "bank.json"));
  std::vector<TaggerPtr> out;
  for (const auto& entry : bank) {
    const auto id = entry.at("tagger_id").get<std::string>();
    out.push_back(tagger_from_json(Json::parse(read_file(model_dir / (id + ".json")))));
  }
  return out;
}

EnsembleModel load_model(const std::filesystem::path& file) {
  const Json j = Json::parse(read_file(file));
  if (j.contains("method")) return ensemble_from_json(j, file.parent_path());
  return single_model_ensemble(tagger_from_json(j));
}

Json bank_to_json(std::span<const TaggerPtr> bank) {
  Json out = Json::array();
  for (const auto& m : bank) {
    const Json j = to_json(*m);
    out.push_back({{"tagger_id", j["tagger_id"]}, {"kind", j["kind"]},
                   {"training_mode", j["training_mode"]}, {"dev_scores", j["dev_scores"]}});
  }
  return out;
}

Json to_json(const Selection& s, bool on_test) {
  Json candidates = Json::array();
  for (const auto& c : s.candidates) {
    candidates.push_back({{"id", c.id},
                          {"precision", c.report.precision()},
                          {"recall", c.report.recall()},
                          {"f1", c.report.f1()},
                          {"tp", c.report.micro.tp},
                          {"fp", c.report.micro.fp},
                          {"fn", c.report.micro.fn}});
  }
  return Json{{"selection_set", on_test ? "test" : "dev"},
              {"best", s.best.id()},
              {"candidates", std::move(candidates)}};
}

namespace {

std::string corpus_text(std::span<const Document> docs) {
  std::ostringstream out;
  write_corpus(out, docs);
  return out.str();
}

std::string records_text(const SpanSet& set, const std::string& annotator, RecordStatus status) {
  std::ostringstream out;
  write_records(out, from_span_set(set, annotator, status));
  return out.str();
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config, const std::filesystem::path& out_dir,
                            const StageObserver& observer) {
  auto stage = [&](std::string_view name) {
    if (observer) observer(name);
  };
  ArtifactWriter out(out_dir);
  PipelineResult result;

  stage("synth");
  SynthConfig sc = config.synth;
  sc.seed = config.seed;
  const SynthCorpus corpus = generate_synthetic(sc);
  out.write("corpus.jsonl", corpus_text(corpus.docs));
  out.write("gold.jsonl", records_text(corpus.gold, std::string(kGoldAnnotator), RecordStatus::kConfirmed));

  stage("datasets");
  std::vector<std::string> ids;
  for (const auto& d : corpus.docs) ids.push_back(d.id());
  result.split = make_split_plan(ids, config.n_train, config.n_dev, stage_seed(config.seed, SeedStage::kSplit));
  const auto train = select_docs(corpus.docs, result.split.train);
  const auto dev = select_docs(corpus.docs, result.split.dev);
  const auto test = select_docs(corpus.docs, result.split.test);
  out.write("datasets/split.json", dump(to_json(result.split)));
  const LabeledCorpus labeled = make_labeled_corpus("train", train, corpus.gold);
  const std::uint64_t sample_seed = stage_seed(config.seed, SeedStage::kSampling);
  const auto balanced = build_training_set(labeled, TrainingMode::kBalanced, sample_seed);
  const auto imbalanced = build_training_set(labeled, TrainingMode::kImbalanced, sample_seed);
  out.write("datasets/train_balanced.bio", labeled_bio_text(balanced));
  out.write("datasets/train_imbalanced.bio", labeled_bio_text(imbalanced));
  out.write("datasets/dev.bio", documents_bio_text(dev, corpus.gold));
  out.write("datasets/test.bio", documents_bio_text(test, corpus.gold));

  stage("train");
  BankOptions bank = config.bank;
  bank.seed = stage_seed(config.seed, SeedStage::kBank);
  bank.jobs = config.jobs;
  result.bank = build_model_bank(balanced, imbalanced, dev, corpus.gold, bank);
  for (const auto& m : result.bank) out.write("models/" + m->id() + ".json", dump(to_json(*m)));
  out.write("models/bank.json", dump(bank_to_json(result.bank)));

  stage("select");
  StackerOptions stacker = config.stacker;
  stacker.seed = stage_seed(config.seed, SeedStage::kStacker);
  const auto& sel_docs = config.select_on_test ? test : dev;
  result.selection = select_best(result.bank, dev, corpus.gold, sel_docs, corpus.gold,
                                 stacker, config.jobs);
  out.write("models/ensemble.json", dump(to_json(result.selection.best)));
  out.write("reports/selection.json", dump(to_json(result.selection, config.select_on_test)));

  stage("eval");
  SpanSet test_gold, test_pred;
  std::vector<std::vector<PiiSpan>> preds(test.size());
  parallel_for(test.size(), config.jobs,
               [&](std::size_t d) { preds[d] = apply_ensemble(result.selection.best, test[d]); });
  for (std::size_t d = 0; d < test.size(); ++d) {
    auto it = corpus.gold.find(test[d].id());
    test_gold[test[d].id()] = it == corpus.gold.end() ? std::vector<PiiSpan>{} : it->second;
    test_pred[test[d].id()] = preds[d];
  }
  result.test_strict = strict_entity_metrics(test_gold, test_pred);
  result.test_binary = binary_token_metrics(test, test_gold, test_pred);
  result.taxonomy = error_taxonomy(test_gold, test_pred);
  out.write("predictions/test.jsonl",
            records_text(test_pred, result.selection.best.id(), RecordStatus::kInProgress));
  out.write("reports/test_metrics.json", dump(Json{{"model", result.selection.best.id()},
                                                    {"strict", to_json(result.test_strict)},
                                                    {"binary", to_json(result.test_binary)},
                                                    {"taxonomy", to_json(result.taxonomy)}}));

  stage("redact");
  Json leaks = Json::array();
  for (const Document& doc : corpus.docs) {
    const auto& g = corpus.gold.at(doc.id());
    result.gold_redaction_leaks += audit_leakage(redact(doc, g, config.surrogate), g, doc).size();
  }
  for (const Document& doc : test) {
    const RedactedDocument r = redact(doc, test_pred.at(doc.id()), config.surrogate);
    out.write("redacted/" + doc.id() + ".deid", r.text);
    out.write("redacted/" + doc.id() + ".deid.json", dump(sidecar_json(r, config.surrogate)));
    for (const Leak& l : audit_leakage(r, test_gold.at(doc.id()), doc)) {
      leaks.push_back({{"doc_id", doc.id()}, {"start", l.span.start}, {"end", l.span.end},
                       {"category", to_string(l.span.category)}});
      ++result.predicted_redaction_leaks;
    }
  }
  out.write("reports/leakage.json", dump(Json{{"gold_redaction_leaks", result.gold_redaction_leaks},
                                               {"predicted_redaction_leaks", result.predicted_redaction_leaks},
                                               {"leaks", std::move(leaks)}}));

  if (config.crossval) {
    stage("crossval");
    std::vector<Document> pool = train;
    pool.insert(pool.end(), dev.begin(), dev.end());
    CrossValOptions cv;
    cv.folds = config.folds;
    cv.seed = stage_seed(config.seed, SeedStage::kFolds);
    cv.bank = config.bank;
    cv.bank.seed = stage_seed(config.seed, SeedStage::kFoldBank);
    cv.stacker = stacker;
    cv.jobs = config.jobs;
    result.crossval = run_crossval(pool, corpus.gold, cv);
    out.write("reports/crossval.json", dump(to_json(*result.crossval)));
  }

  stage("manifest");
  out.write("manifest.json", dump(out.manifest(config.to_json())));
  return result;
}

}  // namespace deid
