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


// deid: command line entry point. Each subcommand reads and writes the file
// formats of the library; `pipeline` runs every stage in one go.
//
// Exit codes: 0 ok, 1 internal error, 2 usage or input error. Failures are
// reported on stderr as {"error", "stage", "message"}.

#include <CLI11.hpp>

#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "deid/datasets.hpp"
#include "deid/ensemble.hpp"
#include "deid/errors.hpp"
#include "deid/io.hpp"
#include "deid/parallel.hpp"
#include "deid/pipeline.hpp"
#include "deid/redaction.hpp"
#include "deid/service.hpp"
#include "deid/store.hpp"
#include "deid/synth.hpp"
#include "deid/taggers.hpp"

namespace fs = std::filesystem;

namespace deid::cli {
namespace {

// Bad flag values and missing inputs detected by the tool itself.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string g_stage = "cli";

int report(const std::string& kind, const std::string& message, int code) {
  std::cerr << Json{{"error", kind}, {"stage", g_stage}, {"message", message}}.dump() << '\n';
  return code;
}

bool is_input_error(const std::string& kind) {
  static const std::set<std::string> kinds = {
      "NotFound",   "FormatError", "BadConfig", "InvalidSpan", "OverlapError", "CrossLineError",
      "ShapeError", "EmptyCorpus", "BadK",      "TooFewFolds", "EmptyDev",     "EmptyTrainingSet",
      "ShapeMismatch", "EmptyDomain"};
  return kinds.contains(kind);
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw NotFound(what + " '" + p.string() + "' does not exist");
}

SurrogateStyle parse_style(const std::string& s) {
  if (s == "compact") return SurrogateStyle::kCompact;
  if (s == "template") return SurrogateStyle::kTemplate;
  throw UsageError("unknown surrogate style '" + s + "' (compact|template)");
}

std::vector<FeatureSet> parse_feature_sets(const std::vector<std::string>& names) {
  std::vector<FeatureSet> out;
  for (const auto& n : names) {
    const auto fs = parse_feature_set(n);
    if (!fs) throw UsageError("unknown feature set '" + n + "' (rich|compact)");
    out.push_back(*fs);
  }
  return out;
}

// Inputs shared by most subcommands.
struct Inputs {
  fs::path corpus;
  fs::path gold;
  fs::path datasets;

  std::vector<Document> docs() const {
    require_file(corpus, "corpus");
    return load_corpus(corpus);
  }
  SpanSet gold_spans() const {
    require_file(gold, "gold annotations");
    return to_span_set(load_records(gold));
  }
  SplitPlan split() const {
    require_file(datasets / "split.json", "split plan");
    return split_from_json(Json::parse(read_file(datasets / "split.json")));
  }
  std::vector<std::string> set_ids(const std::string& set, std::span<const Document> all) const {
    if (set == "all") {
      std::vector<std::string> ids;
      for (const auto& d : all) ids.push_back(d.id());
      return ids;
    }
    const SplitPlan plan = split();
    if (set == "train") return plan.train;
    if (set == "dev") return plan.dev;
    if (set == "test") return plan.test;
    throw UsageError("unknown set '" + set + "' (train|dev|test|all)");
  }
};

void add_corpus(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--corpus", in.corpus, "Corpus file (JSON lines)")->required();
}
void add_gold(CLI::App* cmd, Inputs& in) {
  cmd->add_option("--gold", in.gold, "Gold annotation records (JSON lines)")->required();
}
void add_datasets(CLI::App* cmd, Inputs& in, bool required = true) {
  auto* o = cmd->add_option("--datasets", in.datasets, "Directory written by `deid datasets`");
  if (required) o->required();
}

std::string records_text(const std::vector<AnnotationRecord>& records) {
  std::ostringstream out;
  write_records(out, records);
  return out.str();
}

void emit(const fs::path& out, const Json& j) {
  if (out.empty()) {
    std::cout << dump(j);
  } else {
    write_file(out, dump(j));
  }
}

void write_manifest(const ArtifactWriter& w, const std::string& name, const Json& config) {
  write_file(w.root() / ("manifest-" + name + ".json"), dump(w.manifest(config)));
}

struct Common {
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

// ---------------------------------------------------------------------------

struct SynthArgs {
  fs::path out;
  SynthConfig config;
};

void run_synth(const SynthArgs& a, const Common& c) {
  SynthConfig cfg = a.config;
  cfg.seed = c.seed;
  const SynthCorpus corpus = generate_synthetic(cfg);
  ArtifactWriter w(a.out);
  std::ostringstream docs;
  write_corpus(docs, corpus.docs);
  w.write("corpus.jsonl", docs.str());
  w.write("gold.jsonl",
          records_text(from_span_set(corpus.gold, std::string(kGoldAnnotator), RecordStatus::kConfirmed)));
  write_manifest(w, "synth", {{"seed", c.seed}, {"n_docs", cfg.n_docs}});
}

struct DatasetsArgs {
  Inputs in;
  fs::path out;
  std::size_t n_train = 400;
  std::size_t n_dev = 100;
};

void run_datasets(const DatasetsArgs& a, const Common& c) {
  const auto docs = a.in.docs();
  const auto gold = a.in.gold_spans();
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.id());
  const SplitPlan plan =
      make_split_plan(ids, a.n_train, a.n_dev, stage_seed(c.seed, SeedStage::kSplit));
  const auto train = select_docs(docs, plan.train);
  const LabeledCorpus labeled = make_labeled_corpus("train", train, gold);
  const auto sample_seed = stage_seed(c.seed, SeedStage::kSampling);
  ArtifactWriter w(a.out);
  w.record_input("corpus", read_file(a.in.corpus));
  w.record_input("gold", read_file(a.in.gold));
  w.write("split.json", dump(to_json(plan)));
  w.write("train_balanced.bio",
          labeled_bio_text(build_training_set(labeled, TrainingMode::kBalanced, sample_seed)));
  w.write("train_imbalanced.bio",
          labeled_bio_text(build_training_set(labeled, TrainingMode::kImbalanced, sample_seed)));
  w.write("dev.bio", documents_bio_text(select_docs(docs, plan.dev), gold));
  w.write("test.bio", documents_bio_text(select_docs(docs, plan.test), gold));
  write_manifest(w, "datasets", {{"seed", c.seed}, {"n_train", a.n_train}, {"n_dev", a.n_dev}});
}

struct TrainArgs {
  Inputs in;
  fs::path out;
  std::size_t epochs = 8;
  std::vector<std::string> feature_sets = {"rich", "compact"};
  bool no_pattern = false;
  bool no_gazetteer = false;
};

void run_train(const TrainArgs& a, const Common& c) {
  const auto docs = a.in.docs();
  const auto gold = a.in.gold_spans();
  const auto dev = select_docs(docs, a.in.split().dev);
  auto load_set = [&](const std::string& name, Provenance p) {
    const fs::path path = a.in.datasets / name;
    require_file(path, "training set");
    LabeledCorpus lc = make_labeled_corpus(name, read_bio(read_file(path)));
    lc.provenance = p;
    return lc;
  };
  const auto balanced = load_set("train_balanced.bio", Provenance::kBalanced);
  const auto imbalanced = load_set("train_imbalanced.bio", Provenance::kImbalanced);
  BankOptions bo;
  bo.epochs = a.epochs;
  bo.seed = stage_seed(c.seed, SeedStage::kBank);
  bo.jobs = c.jobs;
  bo.feature_sets = parse_feature_sets(a.feature_sets);
  bo.include_pattern = !a.no_pattern;
  bo.include_gazetteer = !a.no_gazetteer;
  const auto bank = build_model_bank(balanced, imbalanced, dev, gold, bo);
  ArtifactWriter w(a.out);
  w.record_input("train_balanced", read_file(a.in.datasets / "train_balanced.bio"));
  w.record_input("train_imbalanced", read_file(a.in.datasets / "train_imbalanced.bio"));
  for (const auto& m : bank) w.write(m->id() + ".json", dump(to_json(*m)));
  w.write("bank.json", dump(bank_to_json(bank)));
  write_manifest(w, "train", {{"seed", c.seed}, {"epochs", a.epochs}, {"feature_sets", a.feature_sets}});
}

struct StackArgs {
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double l2 = 1e-4;
  std::size_t rounds = 50;
  double shrinkage = 0.1;
  std::size_t max_depth = 3;
  bool word_shape = false;

  StackerOptions options(std::uint64_t seed) const {
    StackerOptions o;
    o.learning_rate = learning_rate;
    o.epochs = epochs;
    o.l2 = l2;
    o.rounds = rounds;
    o.shrinkage = shrinkage;
    o.max_depth = max_depth;
    o.word_shape_feature = word_shape;
    o.seed = stage_seed(seed, SeedStage::kStacker);
    return o;
  }
};

void add_stack_options(CLI::App* cmd, StackArgs& s) {
  cmd->add_option("--stack-lr", s.learning_rate, "Stacker learning rate")->capture_default_str();
  cmd->add_option("--stack-epochs", s.epochs, "Stacker epochs (LR, SVM)")->capture_default_str();
  cmd->add_option("--stack-l2", s.l2, "Stacker L2 penalty")->capture_default_str();
  cmd->add_option("--gbt-rounds", s.rounds, "Boosting rounds")->capture_default_str();
  cmd->add_option("--gbt-shrinkage", s.shrinkage, "Boosting shrinkage")->capture_default_str();
  cmd->add_option("--gbt-depth", s.max_depth, "Boosting tree depth")->capture_default_str();
  cmd->add_flag("--word-shape", s.word_shape, "Add the word-shape feature to stackers");
}

struct EnsembleArgs {
  Inputs in;
  fs::path models;
  fs::path out;
  std::string method = "vote";
  std::string group = "all";
  StackArgs stack;
};

void run_ensemble(const EnsembleArgs& a, const Common& c) {
  const auto method = parse_ensemble_method(a.method);
  if (!method) throw UsageError("unknown method '" + a.method + "'");
  const auto group = parse_group_selector(a.group);
  if (!group || *group == GroupSelector::kSingle) throw UsageError("unknown group '" + a.group + "'");
  const auto docs = a.in.docs();
  const auto gold = a.in.gold_spans();
  const auto dev = select_docs(docs, a.in.split().dev);
  const auto bank = load_bank(a.models);
  const EnsembleModel model = make_ensemble(bank, *method, *group, dev, gold, a.stack.options(c.seed));
  const fs::path out = a.out.empty() ? a.models / "ensemble.json" : a.out;
  write_file(out, dump(to_json(model)));
}

struct SelectArgs {
  Inputs in;
  fs::path models;
  fs::path report;
  std::string on = "dev";
  StackArgs stack;
};

void run_select(const SelectArgs& a, const Common& c) {
  if (a.on != "dev" && a.on != "test") throw UsageError("--on must be dev or test");
  const auto docs = a.in.docs();
  const auto gold = a.in.gold_spans();
  const SplitPlan plan = a.in.split();
  const auto dev = select_docs(docs, plan.dev);
  const auto sel = a.on == "test" ? select_docs(docs, plan.test) : dev;
  const auto bank = load_bank(a.models);
  const Selection s = select_best(bank, dev, gold, sel, gold, a.stack.options(c.seed), c.jobs);
  write_file(a.models / "ensemble.json", dump(to_json(s.best)));
  emit(a.report, to_json(s, a.on == "test"));
}

struct EvalArgs {
  Inputs in;
  fs::path model;
  fs::path pred;
  fs::path out;
  std::string set = "test";
  std::string mode;
  bool taxonomy = false;
};

// Gold restricted to `ids`, empty for documents without a record.
SpanSet restrict(const SpanSet& spans, std::span<const std::string> ids) {
  SpanSet out;
  for (const auto& id : ids) {
    auto it = spans.find(id);
    out[id] = it == spans.end() ? std::vector<PiiSpan>{} : it->second;
  }
  return out;
}

void run_eval(const EvalArgs& a, const Common&) {
  if (a.model.empty() == a.pred.empty()) throw UsageError("give exactly one of --model and --pred");
  if (!a.mode.empty() && a.mode != "strict" && a.mode != "binary") {
    throw UsageError("unknown mode '" + a.mode + "' (strict|binary)");
  }
  const auto gold = a.in.gold_spans();
  std::vector<Document> subset;
  SpanSet g, p;
  std::string model_id;
  if (!a.pred.empty()) {
    // Scores a predictions file; the corpus is only needed for binary mode.
    require_file(a.pred, "predictions");
    p = to_span_set(load_records(a.pred));
    std::vector<std::string> ids;
    for (const auto& [id, _] : p) ids.push_back(id);
    if (!a.in.corpus.empty()) {
      subset = select_docs(a.in.docs(), ids);
    } else if (a.mode != "strict") {
      throw UsageError("--corpus is required for binary metrics");
    }
    g = restrict(gold, ids);
    model_id = a.pred.filename().string();
  } else {
    require_file(a.model, "model");
    if (a.in.corpus.empty()) throw UsageError("--corpus is required with --model");
    const auto docs = a.in.docs();
    subset = select_docs(docs, a.in.set_ids(a.set, docs));
    const EnsembleModel model = load_model(a.model);
    std::vector<std::string> ids;
    for (const auto& d : subset) {
      ids.push_back(d.id());
      p[d.id()] = apply_ensemble(model, d);
    }
    g = restrict(gold, ids);
    model_id = model.id();
  }
  Json report;
  if (a.mode.empty()) {
    report = {{"strict", to_json(strict_entity_metrics(g, p))},
              {"binary", to_json(binary_token_metrics(subset, g, p))},
              {"taxonomy", to_json(error_taxonomy(g, p))}};
  } else {
    report = to_json(a.mode == "strict" ? strict_entity_metrics(g, p)
                                        : binary_token_metrics(subset, g, p));
    if (a.taxonomy) report["taxonomy"] = to_json(error_taxonomy(g, p));
  }
  report["model"] = model_id;
  if (a.pred.empty()) report["set"] = a.set;
  emit(a.out, report);
}

struct PredictArgs {
  Inputs in;
  fs::path model;
  fs::path out;
  std::string set = "all";
};

void run_predict(const PredictArgs& a, const Common& c) {
  require_file(a.model, "model");
  const auto docs = a.in.docs();
  const auto subset = select_docs(docs, a.in.set_ids(a.set, docs));
  const EnsembleModel model = load_model(a.model);
  std::vector<std::vector<PiiSpan>> preds(subset.size());
  parallel_for(subset.size(), c.jobs,
               [&](std::size_t i) { preds[i] = apply_ensemble(model, subset[i]); });
  SpanSet p;
  for (std::size_t i = 0; i < subset.size(); ++i) p[subset[i].id()] = preds[i];
  const std::string text = records_text(from_span_set(p, model.id(), RecordStatus::kInProgress));
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_file(a.out, text);
  }
}

struct RedactArgs {
  Inputs in;
  fs::path spans;
  fs::path model;
  fs::path in_dir;
  fs::path out;
  std::string style = "compact";
};

// Every regular file of `dir` as a document named by its file stem, in name
// order. Outputs keep the input name plus ".deid".
std::vector<std::pair<std::string, Document>> read_text_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw NotFound("input directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::pair<std::string, Document>> out;
  for (const auto& f : files) {
    out.emplace_back(f.filename().string(), Document(f.stem().string(), read_file(f)));
  }
  return out;
}

void run_redact(const RedactArgs& a, const Common& c) {
  const SurrogateStyle style = parse_style(a.style);
  if (a.model.empty() == a.spans.empty()) throw UsageError("give exactly one of --model and --spans");
  if (a.in.corpus.empty() == a.in_dir.empty()) throw UsageError("give exactly one of --corpus and --in");

  std::vector<std::pair<std::string, Document>> inputs;
  ArtifactWriter w(a.out);
  if (!a.in_dir.empty()) {
    inputs = read_text_dir(a.in_dir);
    for (const auto& [name, doc] : inputs) w.record_input(name, doc.text());
  } else {
    for (auto& d : a.in.docs()) inputs.emplace_back(d.id(), std::move(d));
    w.record_input("corpus", read_file(a.in.corpus));
  }

  std::vector<std::optional<std::vector<PiiSpan>>> spans(inputs.size());
  if (!a.model.empty()) {
    require_file(a.model, "model");
    const EnsembleModel model = load_model(a.model);
    w.record_input("model", read_file(a.model));
    parallel_for(inputs.size(), c.jobs,
                 [&](std::size_t i) { spans[i] = apply_ensemble(model, inputs[i].second); });
  } else {
    require_file(a.spans, "span records");
    const SpanSet set = to_span_set(load_records(a.spans));
    w.record_input("spans", read_file(a.spans));
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      auto it = set.find(inputs[i].second.id());
      if (it != set.end()) spans[i] = it->second;
    }
  }

  std::optional<SpanSet> gold;
  if (!a.in.gold.empty()) gold = a.in.gold_spans();
  Json leaks = Json::array();
  const std::vector<PiiSpan> none;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!spans[i]) continue;
    const auto& [name, doc] = inputs[i];
    const RedactedDocument r = redact(doc, *spans[i], style);
    w.write(name + ".deid", r.text);
    w.write(name + ".deid.json", dump(sidecar_json(r, style)));
    if (gold) {
      auto g = gold->find(doc.id());
      for (const Leak& l : audit_leakage(r, g == gold->end() ? none : g->second, doc)) {
        leaks.push_back({{"doc_id", doc.id()}, {"start", l.span.start}, {"end", l.span.end},
                         {"category", to_string(l.span.category)}, {"surface", l.surface}});
      }
    }
  }
  if (gold) w.write("leakage.json", dump({{"leaks", leaks}, {"count", leaks.size()}}));
  write_manifest(w, "redact", {{"style", a.style}});
}

struct IaaArgs {
  fs::path corpus;
  fs::path a1;
  fs::path a2;
  fs::path out;
};

void run_iaa(const IaaArgs& a, const Common&) {
  require_file(a.corpus, "corpus");
  require_file(a.a1, "annotation file");
  require_file(a.a2, "annotation file");
  const auto docs = load_corpus(a.corpus);
  const SpanSet s1 = to_span_set(load_records(a.a1));
  const SpanSet s2 = to_span_set(load_records(a.a2));
  std::vector<Document> shared;
  for (const auto& d : docs) {
    if (s1.contains(d.id()) && s2.contains(d.id())) shared.push_back(d);
  }
  SpanSet b1, b2;
  for (const auto& d : shared) {
    b1[d.id()] = s1.at(d.id());
    b2[d.id()] = s2.at(d.id());
  }
  emit(a.out, to_json(iaa_report(shared, b1, b2)));
}

struct CrossvalArgs {
  Inputs in;
  fs::path fold_scores;
  fs::path out;
  std::size_t folds = 10;
  std::size_t epochs = 8;
  std::string set = "train+dev";
  StackArgs stack;
};

void run_crossval_cmd(const CrossvalArgs& a, const Common& c) {
  if (!a.fold_scores.empty()) {
    // Summary of externally produced per-fold scores.
    require_file(a.fold_scores, "fold scores");
    const Json j = Json::parse(read_file(a.fold_scores));
    std::vector<FoldScores> folds;
    for (const auto& f : j) {
      folds.push_back({f.at("precision").get<double>(), f.at("recall").get<double>(),
                       f.at("f1").get<double>()});
    }
    emit(a.out, {{"folds", j}, {"summary", to_json(crossval_report(folds))}});
    return;
  }
  if (a.in.corpus.empty() || a.in.gold.empty()) {
    throw UsageError("crossval needs --fold-scores or --corpus and --gold");
  }
  const auto docs = a.in.docs();
  const auto gold = a.in.gold_spans();
  std::vector<Document> pool;
  if (a.set == "all") {
    pool = docs;
  } else if (a.set == "train+dev") {
    const SplitPlan plan = a.in.split();
    pool = select_docs(docs, plan.train);
    const auto dev = select_docs(docs, plan.dev);
    pool.insert(pool.end(), dev.begin(), dev.end());
  } else {
    throw UsageError("--set must be train+dev or all");
  }
  CrossValOptions cv;
  cv.folds = a.folds;
  cv.seed = stage_seed(c.seed, SeedStage::kFolds);
  cv.bank.epochs = a.epochs;
  cv.bank.seed = stage_seed(c.seed, SeedStage::kFoldBank);
  cv.stacker = a.stack.options(c.seed);
  cv.jobs = c.jobs;
  emit(a.out, to_json(run_crossval(pool, gold, cv)));
}

struct ServeArgs {
  Inputs in;
  fs::path store;
  fs::path models;
  fs::path static_dir;
  std::string host = "127.0.0.1";
  int port = 8080;
};

Service* g_service = nullptr;

void run_serve(const ServeArgs& a, const Common&) {
  AnnotationStore store(a.store);
  for (auto& d : a.in.docs()) {
    if (!store.has_document(d.id())) store.add_document(std::move(d));
  }
  if (!a.in.gold.empty()) {
    for (const auto& r : load_records(a.in.gold)) {
      if (!store.get(r.doc_id, r.annotator_id)) {
        store.save_annotation(r.doc_id, r.annotator_id, r.spans, 0, r.status);
      }
    }
  }
  ServiceOptions opts;
  opts.static_dir = a.static_dir;
  Service service(store, opts);
  if (!a.models.empty()) {
    std::vector<EnsembleModel> models;
    load_ensembles(a.models, models);
    for (auto& m : models) service.add_ensemble(std::move(m));
  }
  if (!a.in.datasets.empty()) {
    const SplitPlan plan = a.in.split();
    service.add_set("train", plan.train);
    service.add_set("dev", plan.dev);
    service.add_set("test", plan.test);
  }
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  std::cerr << "listening on http://" << a.host << ':' << a.port << '\n';
  const bool ok = service.listen(a.host, a.port);
  g_service = nullptr;
  if (!ok) throw UsageError("cannot listen on " + a.host + ":" + std::to_string(a.port));
}

struct PipelineArgs {
  fs::path out;
  PipelineConfig config;
  std::string style = "compact";
  std::string select_on = "dev";
  std::vector<std::string> feature_sets = {"rich", "compact"};
  bool no_crossval = false;
  StackArgs stack;
};

void run_pipeline_cmd(const PipelineArgs& a, const Common& c) {
  PipelineConfig cfg = a.config;
  cfg.seed = c.seed;
  cfg.jobs = c.jobs;
  cfg.surrogate = parse_style(a.style);
  if (a.select_on != "dev" && a.select_on != "test") throw UsageError("--select-on must be dev or test");
  cfg.select_on_test = a.select_on == "test";
  cfg.bank.feature_sets = parse_feature_sets(a.feature_sets);
  cfg.crossval = !a.no_crossval;
  cfg.stacker = a.stack.options(c.seed);
  const PipelineResult r = run_pipeline(cfg, a.out, [](std::string_view stage) {
    g_stage = "pipeline/" + std::string(stage);
    std::cerr << "[" << stage << "]\n";
  });
  g_stage = "pipeline";
  Json summary = {{"model", r.selection.best.id()},
                  {"test_f1", r.test_strict.f1()},
                  {"test_precision", r.test_strict.precision()},
                  {"test_recall", r.test_strict.recall()},
                  {"gold_redaction_leaks", r.gold_redaction_leaks},
                  {"predicted_redaction_leaks", r.predicted_redaction_leaks}};
  if (r.crossval) summary["crossval"] = to_json(r.crossval->summary);
  std::cout << dump(summary);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"De-identification of clinical discharge summaries"};
  app.set_config("--config", "", "Config file (TOML or INI); flags override it");
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--seed", common.seed, "Run seed")->capture_default_str();
  app.add_option("--jobs", common.jobs, "Worker threads per stage")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "Generate a synthetic corpus with gold spans");
  c_synth->add_option("--out", synth.out, "Output directory")->required();
  c_synth->add_option("--n-docs,--docs", synth.config.n_docs, "Documents")->capture_default_str();
  c_synth->add_option("--pii-line-density,--density", synth.config.pii_line_density)->capture_default_str();
  c_synth->add_option("--noise-rate", synth.config.noise_rate)->capture_default_str();
  c_synth->add_option("--oov-name-rate", synth.config.oov_name_rate)->capture_default_str();

  DatasetsArgs datasets;
  auto* c_datasets = app.add_subcommand("datasets", "Split a corpus and write BIO training sets");
  add_corpus(c_datasets, datasets.in);
  add_gold(c_datasets, datasets.in);
  c_datasets->add_option("--out", datasets.out, "Output directory")->required();
  c_datasets->add_option("--n-train", datasets.n_train)->capture_default_str();
  c_datasets->add_option("--n-dev", datasets.n_dev)->capture_default_str();

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train the model bank");
  add_corpus(c_train, train.in);
  add_gold(c_train, train.in);
  add_datasets(c_train, train.in);
  c_train->add_option("--out", train.out, "Model directory")->required();
  c_train->add_option("--epochs", train.epochs, "Perceptron epochs")->capture_default_str();
  c_train->add_option("--feature-sets", train.feature_sets, "rich, compact")->capture_default_str();
  c_train->add_flag("--no-pattern", train.no_pattern, "Leave out the pattern tagger");
  c_train->add_flag("--no-gazetteer", train.no_gazetteer, "Leave out the gazetteer tagger");

  EnsembleArgs ensemble;
  auto* c_ensemble = app.add_subcommand("ensemble", "Build one ensemble from a model bank");
  add_corpus(c_ensemble, ensemble.in);
  add_gold(c_ensemble, ensemble.in);
  add_datasets(c_ensemble, ensemble.in);
  c_ensemble->add_option("--models", ensemble.models, "Model directory")->required();
  c_ensemble->add_option("--method", ensemble.method, "vote|stack-lr|stack-svm|stack-gbt")
      ->capture_default_str();
  c_ensemble->add_option("--group", ensemble.group, "all|top3-f1|top3-recall")->capture_default_str();
  c_ensemble->add_option("--out", ensemble.out, "Output file (default <models>/ensemble.json)");
  add_stack_options(c_ensemble, ensemble.stack);

  SelectArgs select;
  auto* c_select = app.add_subcommand("select", "Pick the best ensemble or base model");
  add_corpus(c_select, select.in);
  add_gold(c_select, select.in);
  add_datasets(c_select, select.in);
  c_select->add_option("--models", select.models, "Model directory")->required();
  c_select->add_option("--on", select.on, "Selection set: dev|test")->capture_default_str();
  c_select->add_option("--report", select.report, "Selection report (default stdout)");
  add_stack_options(c_select, select.stack);

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Strict and binary metrics of a model");
  c_eval->add_option("--corpus", eval.in.corpus, "Corpus file (JSON lines)");
  add_gold(c_eval, eval.in);
  add_datasets(c_eval, eval.in, false);
  c_eval->add_option("--model", eval.model, "Ensemble or tagger JSON");
  c_eval->add_option("--pred", eval.pred, "Predicted span records");
  c_eval->add_option("--set", eval.set, "train|dev|test|all (with --model)")->capture_default_str();
  c_eval->add_option("--mode", eval.mode, "strict|binary (default: both plus taxonomy)");
  c_eval->add_flag("--taxonomy", eval.taxonomy, "Add the error taxonomy to a --mode report");
  c_eval->add_option("--out", eval.out, "Report file (default stdout)");

  PredictArgs predict;
  auto* c_predict = app.add_subcommand("predict", "Tag documents with a model");
  add_corpus(c_predict, predict.in);
  add_datasets(c_predict, predict.in, false);
  c_predict->add_option("--model", predict.model, "Ensemble or tagger JSON")->required();
  c_predict->add_option("--set", predict.set, "train|dev|test|all")->capture_default_str();
  c_predict->add_option("--out", predict.out, "Records file (default stdout)");

  RedactArgs redact_args;
  auto* c_redact = app.add_subcommand("redact", "Replace spans with category surrogates");
  c_redact->add_option("--corpus", redact_args.in.corpus, "Corpus file (JSON lines)");
  c_redact->add_option("--in", redact_args.in_dir, "Directory of plain-text notes");
  c_redact->add_option("--spans", redact_args.spans, "Span records to redact");
  c_redact->add_option("--model", redact_args.model, "Ensemble or tagger JSON to predict spans");
  c_redact->add_option("--gold", redact_args.in.gold, "Gold records for the leakage audit");
  c_redact->add_option("--out", redact_args.out, "Output directory")->required();
  c_redact->add_option("--style", redact_args.style, "compact|template")->capture_default_str();

  IaaArgs iaa;
  auto* c_iaa = app.add_subcommand("iaa", "Agreement between two annotation files");
  c_iaa->add_option("--corpus", iaa.corpus, "Corpus file")->required();
  c_iaa->add_option("--a1", iaa.a1, "First annotator's records")->required();
  c_iaa->add_option("--a2", iaa.a2, "Second annotator's records")->required();
  c_iaa->add_option("--out", iaa.out, "Report file (default stdout)");

  CrossvalArgs crossval;
  auto* c_crossval = app.add_subcommand("crossval", "k-fold cross-validation");
  c_crossval->add_option("--corpus", crossval.in.corpus, "Corpus file");
  c_crossval->add_option("--gold", crossval.in.gold, "Gold records");
  add_datasets(c_crossval, crossval.in, false);
  c_crossval->add_option("--set", crossval.set, "Documents to fold: train+dev|all")
      ->capture_default_str();
  c_crossval->add_option("--folds", crossval.folds)->capture_default_str();
  c_crossval->add_option("--epochs", crossval.epochs, "Perceptron epochs")->capture_default_str();
  c_crossval->add_option("--fold-scores", crossval.fold_scores,
                         "Summarize a JSON list of {precision, recall, f1} instead");
  c_crossval->add_option("--out", crossval.out, "Report file (default stdout)");
  add_stack_options(c_crossval, crossval.stack);

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the annotation HTTP service");
  add_corpus(c_serve, serve.in);
  c_serve->add_option("--gold", serve.in.gold, "Records to import on start");
  add_datasets(c_serve, serve.in, false);
  c_serve->add_option("--store", serve.store, "Annotation log (empty keeps it in memory)");
  c_serve->add_option("--models", serve.models, "Model directory for pre-tagging");
  c_serve->add_option("--static", serve.static_dir, "Static UI directory");
  c_serve->add_option("--host", serve.host)->capture_default_str();
  c_serve->add_option("--port", serve.port)->capture_default_str();

  PipelineArgs pipeline;
  auto* c_pipeline = app.add_subcommand("pipeline", "Run every stage end to end");
  c_pipeline->add_option("--out", pipeline.out, "Output directory")->required();
  c_pipeline->add_option("--n-docs", pipeline.config.synth.n_docs)->capture_default_str();
  c_pipeline->add_option("--n-train", pipeline.config.n_train)->capture_default_str();
  c_pipeline->add_option("--n-dev", pipeline.config.n_dev)->capture_default_str();
  c_pipeline->add_option("--epochs", pipeline.config.bank.epochs)->capture_default_str();
  c_pipeline->add_option("--feature-sets", pipeline.feature_sets)->capture_default_str();
  c_pipeline->add_option("--folds", pipeline.config.folds)->capture_default_str();
  c_pipeline->add_flag("--no-crossval", pipeline.no_crossval, "Skip cross-validation");
  c_pipeline->add_option("--select-on", pipeline.select_on, "dev|test")->capture_default_str();
  c_pipeline->add_option("--style", pipeline.style, "Surrogate style: compact|template")
      ->capture_default_str();
  add_stack_options(c_pipeline, pipeline.stack);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("UsageError", e.what(), 2);
  }

  CLI::App* cmd = app.get_subcommands().front();
  g_stage = cmd->get_name();
  try {
    if (cmd == c_synth) run_synth(synth, common);
    else if (cmd == c_datasets) run_datasets(datasets, common);
    else if (cmd == c_train) run_train(train, common);
    else if (cmd == c_ensemble) run_ensemble(ensemble, common);
    else if (cmd == c_select) run_select(select, common);
    else if (cmd == c_eval) run_eval(eval, common);
    else if (cmd == c_predict) run_predict(predict, common);
    else if (cmd == c_redact) run_redact(redact_args, common);
    else if (cmd == c_iaa) run_iaa(iaa, common);
    else if (cmd == c_crossval) run_crossval_cmd(crossval, common);
    else if (cmd == c_serve) run_serve(serve, common);
    else if (cmd == c_pipeline) run_pipeline_cmd(pipeline, common);
  } catch (const UsageError& e) {
    return report("UsageError", e.what(), 2);
  } catch (const Error& e) {
    return report(e.kind(), e.what(), is_input_error(e.kind()) ? 2 : 1);
  } catch (const Json::exception& e) {
    return report("FormatError", e.what(), 2);
  } catch (const std::exception& e) {
    return report("InternalError", e.what(), 1);
  }
  return 0;
}

}  // namespace deid::cli

int main(int argc, char** argv) { return deid::cli::run_cli(argc, argv); }
