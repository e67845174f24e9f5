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


// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. The end-to-end pipeline run is shared by the criteria
// that need trained models.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "deid/annotation.hpp"
#include "deid/bio_io.hpp"
#include "deid/ensemble.hpp"
#include "deid/pipeline.hpp"
#include "deid/redaction.hpp"
#include "support/oracles.hpp"

namespace deid::acceptance {
namespace {

namespace fs = std::filesystem;
using testing::Engine;
using testing::uniform;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---- Shared end-to-end run ----

struct EndToEnd {
  fs::path dir;
  PipelineConfig config;
  PipelineResult result;
  double seconds = 0;
  std::vector<Document> docs;
  SpanSet gold;
  std::vector<Document> dev, test;
};

EndToEnd run_end_to_end() {
  EndToEnd e;
  e.dir = fs::temp_directory_path() / "deid_acceptance";
  fs::remove_all(e.dir);
  e.config.seed = 1;
  e.config.synth.seed = 1;
  e.config.synth.n_docs = 600;
  e.config.n_train = 400;
  e.config.n_dev = 100;
  e.config.crossval = true;
  e.config.folds = 10;
  e.config.jobs = std::max(1u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  e.result = run_pipeline(e.config, e.dir, [](std::string_view stage) {
    std::fprintf(stderr, "  [pipeline] %.*s\n", static_cast<int>(stage.size()), stage.data());
  });
  e.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  e.docs = load_corpus(e.dir / "corpus.jsonl");
  e.gold = to_span_set(load_records(e.dir / "gold.jsonl"));
  e.dev = select_docs(e.docs, e.result.split.dev);
  e.test = select_docs(e.docs, e.result.split.test);
  return e;
}

// ---- Criteria ----

Outcome metric_oracle() {
  Engine rng(101);
  constexpr int kCases = 1000;
  for (int i = 0; i < kCases; ++i) {
    SpanSet gold, pred;
    for (int d = 0; d < 3; ++d) {
      const Document doc = testing::random_document(rng, "d" + std::to_string(d));
      gold[doc.id()] = testing::random_aligned_spans(rng, doc);
      pred[doc.id()] = i % 2 ? testing::random_aligned_spans(rng, doc)
                             : testing::random_raw_spans(rng, doc.length(), 5);
      // Copy some gold so matches are common.
      for (const auto& s : gold[doc.id()]) {
        if (uniform(rng, 0, 1)) pred[doc.id()].push_back(s);
      }
    }
    const auto got = strict_entity_metrics(gold, pred);
    const auto want = testing::oracle_strict(gold, pred);
    if (got.micro.tp != want.total_tp || got.micro.fp != want.total_fp ||
        got.micro.fn != want.total_fn) {
      return {false, "micro counts differ at case " + std::to_string(i)};
    }
    for (PiiCategory c : kAllCategories) {
      const auto& k = got.category(c);
      auto at = [c](const std::map<PiiCategory, std::size_t>& m) {
        auto it = m.find(c);
        return it == m.end() ? std::size_t{0} : it->second;
      };
      if (k.tp != at(want.tp) || k.fp != at(want.fp) || k.fn != at(want.fn)) {
        return {false, "per-category counts differ at case " + std::to_string(i)};
      }
    }
  }
  return {true, std::to_string(kCases) + " random cases, all counts equal"};
}

Lattice random_lattice(Engine& rng, std::size_t n, std::size_t k, bool integer_weights) {
  Lattice lat{n, k, std::vector<double>(n * k), std::vector<double>(k * k), std::vector<double>(k)};
  std::uniform_real_distribution<double> real(-3, 3);
  auto draw = [&] { return integer_weights ? static_cast<double>(uniform(rng, 0, 4)) : real(rng); };
  for (auto& v : lat.emissions) v = draw();
  for (auto& v : lat.transitions) {
    v = uniform(rng, 0, 5) == 0 ? -std::numeric_limits<double>::infinity() : draw();
  }
  for (auto& v : lat.start) v = draw();
  return lat;
}

Outcome viterbi_oracle() {
  Engine rng(202);
  constexpr int kCases = 600;
  for (int i = 0; i < kCases; ++i) {
    const Lattice lat = random_lattice(rng, uniform(rng, 1, 6), uniform(rng, 1, 5), i % 2 == 0);
    const auto r = viterbi(lat);
    if (r.score != testing::oracle_best_score(lat) || r.path.size() != lat.n ||
        testing::oracle_path_score(lat, r.path) != r.score) {
      return {false, "score mismatch at lattice " + std::to_string(i)};
    }
  }
  return {true, std::to_string(kCases) + " lattices, exact maximum"};
}

Outcome kappa_fixtures() {
  const Document doc("d", "t0 t1 t2 t3 t4 t5 t6 t7 t8 t9");
  auto tok = [](std::size_t i) { return PiiSpan{3 * i, 3 * i + 2, PiiCategory::kPerson}; };
  AnnotationRecord a{"d", "a", {tok(1), tok(2)}};
  AnnotationRecord b{"d", "b", {tok(1), tok(3)}};
  const double fixture = token_kappa(doc, a, b, KappaMode::kAllTokens);
  const double same = token_kappa(doc, a, a, KappaMode::kAllTokens);
  Engine rng(303);
  std::vector<int> x(10000), y(10000);
  for (auto& v : x) v = static_cast<int>(uniform(rng, 0, 5));
  for (auto& v : y) v = static_cast<int>(uniform(rng, 0, 5));
  const double random = cohen_kappa(x, y);
  const bool ok = std::abs(fixture - 0.375) <= 1e-9 && same == 1.0 && std::abs(random) < 0.05;
  return {ok, fmt("fixture %.12f, identical %.1f, random N=10000 %.4f", fixture, same, random)};
}

Outcome iaa_symmetry() {
  Engine rng(404);
  constexpr int kPairs = 300;
  for (int i = 0; i < kPairs; ++i) {
    SpanSet a, b;
    for (int d = 0; d < 2; ++d) {
      const Document doc = testing::random_document(rng, "d" + std::to_string(d));
      a[doc.id()] = testing::random_aligned_spans(rng, doc);
      b[doc.id()] = testing::random_aligned_spans(rng, doc);
      if (i % 3 == 0) b[doc.id()].insert(b[doc.id()].end(), a[doc.id()].begin(), a[doc.id()].end());
    }
    if (iaa_f1(a, b) != iaa_f1(b, a)) return {false, "asymmetric at pair " + std::to_string(i)};
  }
  return {true, std::to_string(kPairs) + " pairs, exact equality"};
}

Outcome codec_round_trip() {
  Engine rng(505);
  constexpr int kDocs = 1500;
  for (int i = 0; i < kDocs; ++i) {
    const Document doc = testing::random_document(rng, "d", 6);
    const auto spans = testing::random_aligned_spans(rng, doc, 0.3 + 0.4 * (i % 2));
    if (bio_to_spans(doc, spans_to_bio(doc, spans)) != spans) {
      return {false, "round trip differs at doc " + std::to_string(i)};
    }
  }
  constexpr int kSequences = 5000;
  for (int i = 0; i < kSequences; ++i) {
    TagSequence t(uniform(rng, 0, 12));
    for (auto& x : t) x = static_cast<BioTag>(uniform(rng, 0, kNumTags - 1));
    const auto once = repair_bio(t);
    if (repair_bio(once) != once || !is_legal(once)) {
      return {false, "repair not idempotent at sequence " + std::to_string(i)};
    }
  }
  return {true, std::to_string(kDocs) + " span sets round-trip; " + std::to_string(kSequences) +
                    " sequences repair idempotently"};
}

Outcome voting(const EndToEnd& e) {
  const std::vector<BioTag> tags = {BioTag::kO, BioTag::kBPerson, BioTag::kIPerson, BioTag::kBIdn};
  std::vector<std::size_t> ranking = {0, 1, 2};
  std::size_t checked = 0;
  do {
    for (BioTag a : tags) {
      for (BioTag b : tags) {
        for (BioTag c : tags) {
          const std::vector<BioTag> votes = {a, b, c};
          if (vote_token(votes, ranking) != testing::oracle_vote(votes, ranking)) {
            return {false, "vote differs from the counting oracle"};
          }
          ++checked;
        }
      }
    }
  } while (std::next_permutation(ranking.begin(), ranking.end()));

  // Single-model ensembles over every trained bank member.
  std::size_t docs = 0;
  for (const auto& m : e.result.bank) {
    const EnsembleModel single = single_model_ensemble(m);
    for (const auto& doc : e.test) {
      const std::vector<BioDocument> mine = {make_bio_document(doc, apply_ensemble_tags(single, doc))};
      const std::vector<BioDocument> base = {make_bio_document(doc, m->tag(doc))};
      if (write_bio(mine) != write_bio(base)) return {false, "single-model output differs for " + m->id()};
      ++docs;
    }
  }
  return {true, std::to_string(checked) + " vote combinations; " + std::to_string(docs) +
                    " single-model documents byte-identical"};
}

Outcome stacking_sanity(const EndToEnd& e) {
  std::vector<TaggerPtr> members(e.result.bank.begin(), e.result.bank.end());
  auto samples = stack_samples(members, e.dev, e.gold);
  for (auto& s : samples) s.gold = s.votes[0];
  StackerOptions opts;
  opts.seed = stage_seed(e.config.seed, SeedStage::kStacker);
  const auto model = train_stacker(samples, members.size(), StackAlgorithm::kLogisticRegression, opts);
  std::size_t right = 0;
  for (const auto& s : samples) right += model.predict(s.votes, s.shape) == s.gold;
  const double acc = static_cast<double>(right) / static_cast<double>(samples.size());
  return {acc == 1.0, fmt("LR dev token accuracy %.6f over %.0f tokens, %.0f epochs", acc,
                          static_cast<double>(samples.size()), static_cast<double>(opts.epochs))};
}

struct Tendency {
  std::size_t seeds = 0;
  std::size_t holding = 0;
};

// Per seed, the balanced perceptrons must out-recall and the imbalanced ones
// out-precise their counterpart for every feature set.
Tendency balance_tendency(std::size_t n_seeds) {
  Tendency t;
  for (std::uint64_t seed = 1; seed <= n_seeds; ++seed) {
    SynthConfig sc;
    sc.seed = seed;
    sc.n_docs = 600;
    const auto corpus = generate_synthetic(sc);
    std::vector<std::string> ids;
    for (const auto& d : corpus.docs) ids.push_back(d.id());
    const auto plan = make_split_plan(ids, 400, 100, stage_seed(seed, SeedStage::kSplit));
    const auto train = select_docs(corpus.docs, plan.train);
    const auto dev = select_docs(corpus.docs, plan.dev);
    const auto test = select_docs(corpus.docs, plan.test);
    const auto labeled = make_labeled_corpus("train", train, corpus.gold);
    const auto balanced =
        build_training_set(labeled, TrainingMode::kBalanced, stage_seed(seed, SeedStage::kSampling));
    BankOptions o;
    o.seed = stage_seed(seed, SeedStage::kBank);
    o.include_pattern = o.include_gazetteer = false;
    const auto bank = build_model_bank(balanced, labeled, dev, corpus.gold, o);
    bool holds = true;
    for (std::size_t i = 0; i + 1 < bank.size(); i += 2) {
      const auto bal = evaluate(*bank[i], test, corpus.gold);
      const auto imb = evaluate(*bank[i + 1], test, corpus.gold);
      std::fprintf(stderr, "  [tendency] seed %lu %s R %.4f/%.4f P %.4f/%.4f\n",
                   static_cast<unsigned long>(seed), bank[i]->id().c_str(), bal.recall(),
                   imb.recall(), bal.precision(), imb.precision());
      holds = holds && bal.recall() > imb.recall() && imb.precision() > bal.precision();
    }
    ++t.seeds;
    t.holding += holds;
  }
  return t;
}

Outcome end_to_end(const EndToEnd& e) {
  const double f1 = e.result.test_strict.f1();
  const Tendency t = balance_tendency(5);
  const bool ok = f1 >= 0.95 && t.seeds >= 5 && 2 * t.holding > t.seeds;
  std::ostringstream d;
  d << "test strict F1 " << fmt("%.4f", f1) << " (" << e.result.selection.best.id()
    << "); balanced recall / imbalanced precision tendency on " << t.holding << "/" << t.seeds
    << " seeds";
  return {ok, d.str()};
}

Outcome crossval_table() {
  const double f1[] = {97.78, 96.47, 96.92, 96.5, 98.39, 98.03, 97.92, 97.21, 98.03, 97.58};
  std::vector<FoldScores> folds;
  for (double v : f1) folds.push_back({0, 0, v});
  const auto s = crossval_report(folds);
  const bool ok = std::round(s.f1.mean * 100) == 9748 && std::round(s.f1.sd * 100) == 67;
  return {ok, fmt("mean %.2f, SD %.2f", s.f1.mean, s.f1.sd)};
}

Outcome redaction_completeness(const EndToEnd& e) {
  std::size_t leaks = 0;
  for (const auto& doc : e.docs) {
    const auto& g = e.gold.at(doc.id());
    leaks += audit_leakage(redact(doc, g), g, doc).size();
  }
  const std::string prefix = "...Thank you for the care of ";
  const std::string text = prefix + "Firstname Lastname, a 30-year-old man from...";
  const Document doc("example", text);
  const PiiSpan person{prefix.size(), prefix.size() + 18, PiiCategory::kPerson};
  const std::string out = redact(doc, std::vector<PiiSpan>{person}).text;
  const bool example = out == "...Thank you for the care of <***PERSON***>, a 30-year-old man from...";
  return {leaks == 0 && example, std::to_string(leaks) + " leaks over " + std::to_string(e.docs.size()) +
                                     " documents; example sentence \"" + out + "\""};
}

Outcome taxonomy_reconciliation() {
  Engine rng(606);
  constexpr int kCases = 1500;
  for (int i = 0; i < kCases; ++i) {
    SpanSet gold, pred;
    for (int d = 0; d < 3; ++d) {
      const Document doc = testing::random_document(rng, "d" + std::to_string(d));
      gold[doc.id()] = testing::random_aligned_spans(rng, doc);
      pred[doc.id()] = i % 2 ? testing::random_aligned_spans(rng, doc)
                             : testing::random_raw_spans(rng, doc.length(), 6);
    }
    const auto m = strict_entity_metrics(gold, pred);
    const auto t = error_taxonomy(gold, pred);
    if (t.total().fp() != m.micro.fp || t.total().fn() != m.micro.fn) {
      return {false, "totals differ at case " + std::to_string(i)};
    }
    for (PiiCategory c : kAllCategories) {
      if (t.category(c).fp() != m.category(c).fp || t.category(c).fn() != m.category(c).fn) {
        return {false, "category sums differ at case " + std::to_string(i)};
      }
    }
  }
  return {true, std::to_string(kCases) + " cases, buckets sum to FP and FN per category"};
}

Outcome runtime(const EndToEnd& e) {
  return {e.seconds < 600.0,
          fmt("full pipeline incl. %.0f-fold cross-validation: %.1f s on %.0f thread(s)",
              static_cast<double>(e.config.folds), e.seconds, static_cast<double>(e.config.jobs))};
}

}  // namespace

int run() {
  std::fprintf(stderr, "running the 600-document pipeline...\n");
  const EndToEnd e = run_end_to_end();

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"metric oracle equivalence", metric_oracle},
      {"viterbi oracle", viterbi_oracle},
      {"kappa fixtures", kappa_fixtures},
      {"iaa symmetry", iaa_symmetry},
      {"codec round trip", codec_round_trip},
      {"voting", [&] { return voting(e); }},
      {"stacking sanity", [&] { return stacking_sanity(e); }},
      {"end-to-end synthetic run", [&] { return end_to_end(e); }},
      {"cross-validation summary", crossval_table},
      {"redaction completeness", [&] { return redaction_completeness(e); }},
      {"taxonomy reconciliation", taxonomy_reconciliation},
      {"runtime", [&] { return runtime(e); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    failed += !o.pass;
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  fs::remove_all(e.dir);
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}

}  // namespace deid::acceptance

int main() { return deid::acceptance::run(); }
