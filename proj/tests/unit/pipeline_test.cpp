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


#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "deid/errors.hpp"
#include "deid/pipeline.hpp"

namespace deid {
namespace {

namespace fs = std::filesystem;

PipelineConfig small_config() {
  PipelineConfig c;
  c.seed = 5;
  c.synth.n_docs = 60;
  c.synth.seed = 5;
  c.n_train = 30;
  c.n_dev = 15;
  c.bank.epochs = 3;
  c.crossval = true;
  c.folds = 3;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("deid_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

TEST(Sha256, KnownDigests) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(StageSeed, StagesDiffer) {
  EXPECT_NE(stage_seed(1, SeedStage::kSplit), stage_seed(1, SeedStage::kSampling));
  EXPECT_NE(stage_seed(1, SeedStage::kBank), stage_seed(2, SeedStage::kBank));
  EXPECT_EQ(stage_seed(9, SeedStage::kFolds), stage_seed(9, SeedStage::kFolds));
}

TEST(SplitPlanJson, RoundTrip) {
  SplitPlan p{7, {"a", "b"}, {"c"}, {"d", "e"}};
  const auto q = split_from_json(to_json(p));
  EXPECT_EQ(q.seed, 7u);
  EXPECT_EQ(q.train, p.train);
  EXPECT_EQ(q.dev, p.dev);
  EXPECT_EQ(q.test, p.test);
}

TEST(SelectDocs, KeepsRequestedOrder) {
  const std::vector<Document> docs = {Document("a", "x"), Document("b", "y")};
  const std::vector<std::string> ids = {"b", "a"};
  const auto got = select_docs(docs, ids);
  ASSERT_EQ(got.size(), 2u);
  EXPECT_EQ(got[0].id(), "b");
  const std::vector<std::string> missing = {"z"};
  EXPECT_THROW(select_docs(docs, missing), NotFound);
}

TEST(Pipeline, RepeatRunsAreByteIdentical) {
  const auto config = small_config();
  const fs::path a = scratch("a"), b = scratch("b");
  const auto ra = run_pipeline(config, a);
  run_pipeline(config, b);

  const Json manifest = Json::parse(read_file(a / "manifest.json"));
  ASSERT_TRUE(manifest.contains("outputs"));
  ASSERT_GT(manifest["outputs"].size(), 10u);
  for (const auto& [rel, digest] : manifest["outputs"].items()) {
    const std::string left = read_file(a / rel);
    ASSERT_EQ(left, read_file(b / rel)) << rel;
    ASSERT_EQ(sha256_hex(left), digest.get<std::string>()) << rel;
  }
  EXPECT_EQ(read_file(a / "manifest.json"), read_file(b / "manifest.json"));

  // Split sizes and a selection drawn from the candidate list.
  EXPECT_EQ(ra.split.train.size(), 30u);
  EXPECT_EQ(ra.split.dev.size(), 15u);
  EXPECT_EQ(ra.split.test.size(), 15u);
  EXPECT_EQ(ra.gold_redaction_leaks, 0u);
  EXPECT_EQ(ra.predicted_redaction_leaks, ra.taxonomy.total().fn_nt);
  ASSERT_TRUE(ra.crossval.has_value());
  EXPECT_EQ(ra.crossval->folds.size(), 3u);

  const Json metrics = Json::parse(read_file(a / "reports/test_metrics.json"));
  EXPECT_EQ(metrics["model"], ra.selection.best.id());

  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Pipeline, StageObserverSeesEveryStage) {
  auto config = small_config();
  config.crossval = false;
  const fs::path out = scratch("stages");
  std::vector<std::string> stages;
  run_pipeline(config, out, [&](std::string_view s) { stages.emplace_back(s); });
  const std::vector<std::string> expected = {"synth", "datasets", "train", "select",
                                             "eval",  "redact",   "manifest"};
  EXPECT_EQ(stages, expected);
  EXPECT_FALSE(fs::exists(out / "reports/crossval.json"));
  fs::remove_all(out);
}

TEST(Pipeline, SavedModelReproducesPredictions) {
  auto config = small_config();
  config.crossval = false;
  const fs::path out = scratch("reload");
  const auto r = run_pipeline(config, out);
  const auto model = load_model(out / "models/ensemble.json");
  EXPECT_EQ(model.id(), r.selection.best.id());
  const auto corpus = load_corpus(out / "corpus.jsonl");
  const auto test_docs = select_docs(corpus, r.split.test);
  const auto gold = to_span_set(load_records(out / "gold.jsonl"));
  EXPECT_EQ(evaluate(model, test_docs, gold).micro, r.test_strict.micro);
  fs::remove_all(out);
}

TEST(CrossVal, RejectsSingleFold) {
  CrossValOptions o;
  o.folds = 1;
  const std::vector<Document> docs = {Document("a", "x"), Document("b", "y")};
  EXPECT_ANY_THROW(run_crossval(docs, {}, o));
}

}  // namespace
}  // namespace deid
