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

#include <atomic>
#include <filesystem>
#include <thread>

#include "deid/annotation.hpp"
#include "deid/errors.hpp"
#include "deid/io.hpp"
#include "deid/store.hpp"
#include "support/oracles.hpp"

namespace deid {
namespace {

using testing::Engine;
constexpr auto kPerson = PiiCategory::kPerson;
constexpr auto kIdn = PiiCategory::kIdn;

// Ten two-character tokens; token i spans [3i, 3i + 2).
Document ten_tokens() { return Document("d", "t0 t1 t2 t3 t4 t5 t6 t7 t8 t9"); }

PiiSpan tok(std::size_t i, PiiCategory c = kPerson) { return {3 * i, 3 * i + 2, c}; }

AnnotationRecord record(const std::string& who, std::vector<PiiSpan> spans) {
  AnnotationRecord r;
  r.doc_id = "d";
  r.annotator_id = who;
  r.spans = std::move(spans);
  return r;
}

TEST(Kappa, HandComputedFixture) {
  const Document doc = ten_tokens();
  const auto a = record("a", {tok(1), tok(2)});
  const auto b = record("b", {tok(1), tok(3)});
  EXPECT_NEAR(token_kappa(doc, a, b, KappaMode::kAllTokens), 0.375, 1e-9);
  // Union domain {1, 2, 3}: p_o = 1/3, p_e = 5/9.
  EXPECT_NEAR(token_kappa(doc, a, b, KappaMode::kAnnotatedOnly), -0.5, 1e-9);
}

TEST(Kappa, IdenticalIsOne) {
  const Document doc = ten_tokens();
  const auto a = record("a", {tok(1), tok(4, kIdn)});
  EXPECT_EQ(token_kappa(doc, a, a, KappaMode::kAllTokens), 1.0);
  EXPECT_EQ(token_kappa(doc, a, a, KappaMode::kAnnotatedOnly), 1.0);
}

TEST(Kappa, BioPrefixIsCollapsed) {
  // One two-token span against two one-token spans: same labels per token.
  const Document doc = ten_tokens();
  const auto a = record("a", {{3, 8, kPerson}});
  const auto b = record("b", {tok(1), tok(2)});
  EXPECT_EQ(token_kappa(doc, a, b, KappaMode::kAllTokens), 1.0);
}

TEST(Kappa, EmptyDomainThrows) {
  const Document doc = ten_tokens();
  const auto a = record("a", {});
  EXPECT_THROW(token_kappa(doc, a, a, KappaMode::kAnnotatedOnly), EmptyDomain);
}

TEST(Kappa, RandomIndependentLabelsNearZero) {
  Engine rng(2024);
  std::vector<int> a(10000), b(10000);
  for (auto& x : a) x = static_cast<int>(testing::uniform(rng, 0, 5));
  for (auto& x : b) x = static_cast<int>(testing::uniform(rng, 0, 5));
  const double k = cohen_kappa(a, b);
  EXPECT_LT(std::abs(k), 0.05);
  EXPECT_NEAR(k, testing::oracle_kappa(a, b), 1e-12);
}

TEST(KappaProperty, MatchesFormulaAndIsSymmetric) {
  Engine rng(8);
  for (int i = 0; i < 500; ++i) {
    const std::size_t n = testing::uniform(rng, 1, 30);
    std::vector<int> a(n), b(n);
    for (auto& x : a) x = static_cast<int>(testing::uniform(rng, 0, 3));
    for (auto& x : b) x = testing::uniform(rng, 0, 2) ? x : static_cast<int>(testing::uniform(rng, 0, 3));
    for (std::size_t j = 0; j < n; ++j) {
      if (testing::uniform(rng, 0, 1)) b[j] = a[j];
    }
    ASSERT_NEAR(cohen_kappa(a, b), testing::oracle_kappa(a, b), 1e-12);
    ASSERT_EQ(cohen_kappa(a, b), cohen_kappa(b, a));
  }
}

TEST(IaaF1, HandEnumeratedExample) {
  const auto a = record("a", {{0, 5, kPerson}, {10, 16, kIdn}});
  const auto b = record("b", {{0, 5, kPerson}, {10, 14, kIdn}});
  EXPECT_DOUBLE_EQ(iaa_f1(a, b), 0.5);
  EXPECT_EQ(iaa_f1(a, a), 1.0);
}

TEST(IaaF1Property, SymmetricUnderSwap) {
  Engine rng(99);
  for (int i = 0; i < 200; ++i) {
    const Document doc = testing::random_document(rng, "d");
    const SpanSet a = {{"d", testing::random_aligned_spans(rng, doc)}};
    const SpanSet b = {{"d", testing::random_aligned_spans(rng, doc)}};
    ASSERT_EQ(iaa_f1(a, b), iaa_f1(b, a));
  }
}

TEST(IaaReport, AllFields) {
  const Document doc = ten_tokens();
  const SpanSet a = {{"d", {tok(1), tok(2)}}};
  const SpanSet b = {{"d", {tok(1), tok(3)}}};
  const auto r = iaa_report(std::vector<Document>{doc}, a, b);
  EXPECT_EQ(r.documents, 1u);
  EXPECT_NEAR(r.kappa_all_tokens, 0.375, 1e-9);
  EXPECT_NEAR(r.kappa_annotated_only, -0.5, 1e-9);
  EXPECT_DOUBLE_EQ(r.f1_strict, 0.5);
  EXPECT_DOUBLE_EQ(r.per_category_f1.at(kPerson), 0.5);
}

TEST(Adjudicate, IdenticalNeedsNoDecisions) {
  const auto a = record("a", {tok(1)});
  const auto merged = adjudicate(a, a, {});
  EXPECT_EQ(merged.spans.size(), 1u);
  EXPECT_EQ(merged.spans[0].start, 3u);
  EXPECT_EQ(merged.status, RecordStatus::kConfirmed);
  EXPECT_EQ(merged.annotator_id, "gold");
}

TEST(Adjudicate, BoundaryConflictResolvedByDecision) {
  const auto a = record("a", {{0, 5, kPerson}, {10, 16, kIdn}});
  const auto b = record("b", {{0, 5, kPerson}, {10, 14, kIdn}});
  const auto ds = find_disagreements(a, b);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].start, 10u);
  EXPECT_EQ(ds[0].end, 16u);
  EXPECT_THROW(adjudicate(a, b, {}), UnresolvedDisagreement);
  const std::vector<Decision> decisions = {Decision::take_a(ds[0])};
  const auto merged = adjudicate(a, b, decisions);
  ASSERT_EQ(merged.spans.size(), 2u);
  EXPECT_EQ(merged.spans[1].end, 16u);
}

class StoreTest : public ::testing::Test {
 protected:
  void SetUp() override { store.add_document(Document("d", "Jane Citizen MRN 123456\nPh 9123 4567")); }
  AnnotationStore store;
};

TEST_F(StoreTest, RevisionsCountWrites) {
  EXPECT_EQ(store.save_annotation("d", "a", {{0, 4, kPerson}}, 0), 1u);
  EXPECT_EQ(store.save_annotation("d", "a", {{0, 12, kPerson}}, 1), 2u);
  EXPECT_THROW(store.save_annotation("d", "a", {}, 0), RevisionConflict);
  const auto r = store.get("d", "a");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->revision, 2u);
  EXPECT_EQ(r->spans.size(), 1u);
  EXPECT_EQ(r->spans[0].end, 12u);
}

TEST_F(StoreTest, RejectsBadSpansWithoutBumpingRevision) {
  EXPECT_THROW(store.save_annotation("d", "a", {{0, 4, kPerson}, {2, 8, kPerson}}, 0), OverlapError);
  EXPECT_THROW(store.save_annotation("d", "a", {{20, 27, kPerson}}, 0), CrossLineError);
  EXPECT_THROW(store.save_annotation("missing", "a", {}, 0), NotFound);
  EXPECT_FALSE(store.get("d", "a").has_value());
}

TEST_F(StoreTest, ConcurrentWritersOneWinnerPerRevision) {
  std::atomic<int> ok{0}, conflicts{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      try {
        store.save_annotation("d", "a", {{0, 4, kPerson}}, 0);
        ++ok;
      } catch (const RevisionConflict&) {
        ++conflicts;
      }
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok, 1);
  EXPECT_EQ(conflicts, 7);
}

TEST_F(StoreTest, PretagKeepsHumanSpansAndIsIdempotent) {
  store.save_annotation("d", "a", {{0, 12, kPerson}}, 0);
  const std::vector<PiiSpan> machine = {{0, 4, kPerson}, {17, 23, kIdn}};
  const auto r1 = store.ingest_pretag("d", "a", machine);
  ASSERT_EQ(r1.spans.size(), 2u);
  EXPECT_EQ(r1.spans[0].source, SpanSource::kHuman);
  EXPECT_EQ(r1.spans[1].source, SpanSource::kMachine);
  EXPECT_EQ(r1.status, RecordStatus::kInProgress);
  const auto r2 = store.ingest_pretag("d", "a", machine);
  EXPECT_EQ(r2, r1);
  EXPECT_EQ(store.ingest_pretag("d", "b", {}).spans.size(), 0u);
}

TEST_F(StoreTest, ConfirmTurnsMachineSpansHuman) {
  const auto r = store.ingest_pretag("d", "a", {{17, 23, kIdn}});
  const auto rev = store.confirm("d", "a", r.revision);
  const auto c = store.get("d", "a");
  EXPECT_EQ(c->revision, rev);
  EXPECT_EQ(c->status, RecordStatus::kConfirmed);
  EXPECT_EQ(c->spans[0].source, SpanSource::kHuman);
  EXPECT_THROW(store.ingest_pretag("d", "a", {}), ConfirmedRecord);
}

TEST_F(StoreTest, ExportOnlyConfirmedAndPrefersGold) {
  store.add_document(Document("c", "Dr Smith"));
  store.save_annotation("d", "a", {{0, 4, kPerson}}, 0, RecordStatus::kConfirmed);
  store.save_annotation("d", "gold", {{0, 12, kPerson}}, 0, RecordStatus::kConfirmed);
  store.save_annotation("c", "a", {{3, 8, kPerson}}, 0);
  const auto bio = store.export_bio();
  ASSERT_EQ(bio.size(), 1u);
  EXPECT_EQ(bio[0].doc_id, "d");
  EXPECT_EQ(bio[0].lines[0].tags[1], BioTag::kIPerson);
  const auto all = store.export_bio({}, std::nullopt, true);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].doc_id, "c");
}

TEST(StorePersistence, ReopenReplaysLog) {
  const auto path = std::filesystem::temp_directory_path() / "deid_store_test.jsonl";
  std::filesystem::remove(path);
  {
    AnnotationStore s(path);
    s.add_document(Document("d", "Jane Citizen"));
    s.save_annotation("d", "a", {{0, 4, kPerson}}, 0);
    s.save_annotation("d", "a", {{0, 12, kPerson}}, 1);
  }
  AnnotationStore s(path);
  s.add_document(Document("d", "Jane Citizen"));
  const auto r = s.get("d", "a");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->revision, 2u);
  EXPECT_EQ(r->spans[0].end, 12u);
  std::filesystem::remove(path);
}

TEST(RecordJson, RoundTrip) {
  AnnotationRecord r = record("a", {{0, 4, kPerson, SpanSource::kMachine, "a"}, {5, 9, kIdn, SpanSource::kHuman, "a"}});
  r.revision = 3;
  r.status = RecordStatus::kConfirmed;
  EXPECT_EQ(record_from_json(to_json(r)), r);
}

}  // namespace
}  // namespace deid
