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


#include <benchmark/benchmark.h>

#include <random>

#include "deid/datasets.hpp"
#include "deid/ensemble.hpp"
#include "deid/metrics.hpp"
#include "deid/redaction.hpp"
#include "deid/synth.hpp"
#include "deid/taggers.hpp"
#include "deid/viterbi.hpp"

namespace deid {
namespace {

const SynthCorpus& corpus() {
  static const SynthCorpus c = [] {
    SynthConfig sc;
    sc.n_docs = 60;
    return generate_synthetic(sc);
  }();
  return c;
}

const std::shared_ptr<PerceptronTagger>& tagger(FeatureSet fs) {
  static std::map<FeatureSet, std::shared_ptr<PerceptronTagger>> cache;
  auto& t = cache[fs];
  if (!t) {
    const std::vector<Document> train(corpus().docs.begin(), corpus().docs.begin() + 40);
    PerceptronOptions o;
    o.feature_set = fs;
    o.epochs = 3;
    t = train_perceptron("bench", make_labeled_corpus("train", train, corpus().gold), o);
  }
  return t;
}

void BM_Viterbi(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  Lattice lat{n, kNumTags, std::vector<double>(n * kNumTags), std::vector<double>(kNumTags * kNumTags),
              std::vector<double>(kNumTags)};
  for (auto& v : lat.emissions) v = u(rng);
  for (auto& v : lat.transitions) v = u(rng);
  apply_bio_constraints(lat);
  for (auto _ : state) benchmark::DoNotOptimize(viterbi(lat));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Viterbi)->Arg(8)->Arg(32)->Arg(128);

void BM_Tokenize(benchmark::State& state) {
  const std::string& text = corpus().docs[0].text();
  for (auto _ : state) benchmark::DoNotOptimize(Document("d", text));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_Tokenize);

void BM_PerceptronTagDocument(benchmark::State& state) {
  const auto& t = tagger(state.range(0) == 0 ? FeatureSet::kRich : FeatureSet::kCompact);
  const Document& doc = corpus().docs[50];
  for (auto _ : state) benchmark::DoNotOptimize(t->tag(doc));
}
BENCHMARK(BM_PerceptronTagDocument)->Arg(0)->Arg(1);

void BM_PerceptronTrainEpoch(benchmark::State& state) {
  const std::vector<Document> train(corpus().docs.begin(), corpus().docs.begin() + 20);
  const auto labeled = make_labeled_corpus("train", train, corpus().gold);
  PerceptronOptions o;
  o.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train_perceptron("bench", labeled, o));
}
BENCHMARK(BM_PerceptronTrainEpoch)->Unit(benchmark::kMillisecond);

void BM_PatternTagDocument(benchmark::State& state) {
  const PatternTagger t;
  const Document& doc = corpus().docs[50];
  for (auto _ : state) benchmark::DoNotOptimize(t.tag(doc));
}
BENCHMARK(BM_PatternTagDocument);

void BM_VoteLine(benchmark::State& state) {
  const auto members = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::vector<TagSequence> preds(members, TagSequence(24));
  for (auto& p : preds) {
    for (auto& t : p) t = static_cast<BioTag>(rng() % kNumTags);
  }
  std::vector<std::size_t> ranking(members);
  for (std::size_t i = 0; i < members; ++i) ranking[i] = i;
  for (auto _ : state) benchmark::DoNotOptimize(vote(preds, ranking));
}
BENCHMARK(BM_VoteLine)->Arg(3)->Arg(6);

void BM_StrictMetrics(benchmark::State& state) {
  const auto& t = tagger(FeatureSet::kRich);
  SpanSet pred;
  for (std::size_t i = 40; i < 60; ++i) pred[corpus().docs[i].id()] = t->predict(corpus().docs[i]);
  SpanSet gold;
  for (const auto& [id, _] : pred) gold[id] = corpus().gold.at(id);
  for (auto _ : state) benchmark::DoNotOptimize(strict_entity_metrics(gold, pred));
}
BENCHMARK(BM_StrictMetrics);

void BM_RedactDocument(benchmark::State& state) {
  const Document& doc = corpus().docs[3];
  const auto& spans = corpus().gold.at(doc.id());
  for (auto _ : state) benchmark::DoNotOptimize(redact(doc, spans));
}
BENCHMARK(BM_RedactDocument);

void BM_SynthDocument(benchmark::State& state) {
  SynthConfig sc;
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_document(sc, i++));
}
BENCHMARK(BM_SynthDocument);

}  // namespace
}  // namespace deid

BENCHMARK_MAIN();
