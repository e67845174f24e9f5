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
#include <httplib.h>

#include <atomic>
#include <thread>

#include "deid/bio_io.hpp"
#include "deid/service.hpp"
#include "deid/synth.hpp"

namespace deid {
namespace {

Json spans_json(const std::vector<PiiSpan>& spans) {
  Json out = Json::array();
  for (const auto& s : spans) out.push_back(to_json(s));
  return out;
}

// One running server per test over a store seeded with synthetic documents.
class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SynthConfig c;
    c.n_docs = 6;
    c.seed = 11;
    c.min_lines = 6;
    c.max_lines = 10;
    corpus_ = generate_synthetic(c);
    for (const auto& d : corpus_.docs) store_.add_document(d);

    std::vector<BioDocument> perfect, silent;
    for (const auto& d : corpus_.docs) {
      perfect.push_back(make_bio_document(d, spans_to_bio(d, corpus_.gold.at(d.id()))));
      silent.push_back(make_bio_document(d, spans_to_bio(d, {})));
    }
    service_.add_ensemble(single_model_ensemble(std::make_shared<ImportedTagger>("perfect", perfect)));
    service_.add_ensemble(single_model_ensemble(std::make_shared<ImportedTagger>("silent", silent)));
    service_.add_set("first2", {corpus_.docs[0].id(), corpus_.docs[1].id()});

    port_ = service_.bind_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { service_.run(); });
    service_.wait_until_ready();
  }

  void TearDown() override {
    service_.stop();
    if (thread_.joinable()) thread_.join();
  }

  httplib::Client client() const { return httplib::Client("127.0.0.1", port_); }

  Json get_json(const std::string& path, int expected = 200) {
    auto res = client().Get(path);
    EXPECT_TRUE(res) << path;
    if (!res) return {};
    EXPECT_EQ(res->status, expected) << path << " " << res->body;
    Json j = Json::parse(res->body);
    EXPECT_EQ(j.value("schema_version", 0), kSchemaVersion);
    return j;
  }

  httplib::Result put_spans(const std::string& doc_id, std::uint64_t revision,
                            const std::vector<PiiSpan>& spans, const std::string& who = "gold",
                            const std::string& status = "in_progress") {
    const Json body = {{"revision", revision},
                       {"spans", spans_json(spans)},
                       {"annotator", who},
                       {"status", status}};
    return client().Put("/api/docs/" + doc_id + "/spans", body.dump(), "application/json");
  }

  const std::string& doc_id(std::size_t i) const { return corpus_.docs[i].id(); }
  const std::vector<PiiSpan>& gold(std::size_t i) const { return corpus_.gold.at(doc_id(i)); }

  SynthCorpus corpus_;
  AnnotationStore store_;
  Service service_{store_};
  int port_ = -1;
  std::thread thread_;
};

TEST(ServiceEmpty, ListsNoDocuments) {
  AnnotationStore store;
  Service service(store);
  const int port = service.bind_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { service.run(); });
  service.wait_until_ready();
  auto res = httplib::Client("127.0.0.1", port).Get("/api/docs");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  const Json j = Json::parse(res->body);
  EXPECT_EQ(j["docs"], Json::array());
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  service.stop();
  t.join();
}

TEST_F(ServiceTest, ListsEverySeededDocument) {
  const Json j = get_json("/api/docs");
  ASSERT_EQ(j["docs"].size(), corpus_.docs.size());
  EXPECT_EQ(j["docs"][0]["status"], "none");
  EXPECT_EQ(j["docs"][0]["revision"], 0);
  EXPECT_EQ(j["docs"][0]["pretag_available"], false);
}

TEST_F(ServiceTest, UploadThenFetch) {
  const Json body = {{"doc_id", "new-1"}, {"text", "Patient: Zoë Müller\nSeen."}};
  auto res = client().Post("/api/docs", body.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  const Json j = get_json("/api/docs/new-1");
  EXPECT_EQ(j["text"], "Patient: Zoë Müller\nSeen.");
  EXPECT_EQ(j["spans"], Json::array());
  EXPECT_EQ(j["status"], "none");

  res = client().Post("/api/docs", body.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(Json::parse(res->body)["error"], "DuplicateDocument");
}

TEST_F(ServiceTest, UnknownDocumentIs404) {
  const Json j = get_json("/api/docs/nope", 404);
  EXPECT_EQ(j["error"], "NotFound");
  auto res = put_spans("nope", 0, {});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServiceTest, MalformedBodyIs400) {
  auto res = client().Put("/api/docs/" + doc_id(0) + "/spans", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  res = client().Put("/api/docs/" + doc_id(0) + "/spans", R"({"spans": []})", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
}

TEST_F(ServiceTest, SaveRoundTripAndRevisions) {
  auto res = put_spans(doc_id(0), 0, gold(0));
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200) << res->body;
  EXPECT_EQ(Json::parse(res->body)["revision"], 1);

  const Json j = get_json("/api/docs/" + doc_id(0));
  EXPECT_EQ(j["revision"], 1);
  EXPECT_EQ(j["status"], "in_progress");
  std::vector<PiiSpan> back;
  for (const auto& s : j["spans"]) back.push_back(span_from_json(s, "gold"));
  EXPECT_EQ(back, gold(0));

  // Stale revision.
  res = put_spans(doc_id(0), 0, {});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
  EXPECT_EQ(Json::parse(res->body)["error"], "RevisionConflict");

  res = put_spans(doc_id(0), 1, gold(0), "gold", "confirmed");
  ASSERT_TRUE(res);
  EXPECT_EQ(Json::parse(res->body)["revision"], 2);
  EXPECT_EQ(get_json("/api/docs/" + doc_id(0))["status"], "confirmed");
}

TEST_F(ServiceTest, InvalidSpansAre422) {
  const Document& doc = corpus_.docs[0];
  const auto& first = doc.tokens().front();
  ASSERT_GE(first.size(), 2u);
  const PiiSpan a{first[0].start, first[1].end, PiiCategory::kPerson};
  const PiiSpan b{first[1].start, first[1].end, PiiCategory::kPhone};
  auto res = put_spans(doc_id(0), 0, {a, b});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);
  EXPECT_EQ(Json::parse(res->body)["error"], "OverlapError");

  res = put_spans(doc_id(0), 0, {{0, doc.length() + 5, PiiCategory::kPerson}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 422);

  // Nothing was written.
  EXPECT_EQ(get_json("/api/docs/" + doc_id(0))["revision"], 0);
}

TEST_F(ServiceTest, ConcurrentWritersHaveOneWinner) {
  constexpr int kWriters = 8;
  std::atomic<int> ok{0}, conflict{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < kWriters; ++i) {
    threads.emplace_back([&, i] {
      std::vector<PiiSpan> spans;
      if (i % 2) spans = gold(1);
      auto res = put_spans(doc_id(1), 0, spans);
      if (res && res->status == 200) ++ok;
      if (res && res->status == 409) ++conflict;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), 1);
  EXPECT_EQ(conflict.load(), kWriters - 1);
  EXPECT_EQ(get_json("/api/docs/" + doc_id(1))["revision"], 1);
}

TEST_F(ServiceTest, PretagIsIdempotent) {
  const std::string path = "/api/docs/" + doc_id(2) + "/pretag";
  const Json body = {{"ensemble_id", "base/perfect"}};
  auto first = client().Post(path, body.dump(), "application/json");
  ASSERT_TRUE(first);
  ASSERT_EQ(first->status, 200) << first->body;
  const Json a = Json::parse(first->body);
  EXPECT_EQ(a["spans"].size(), gold(2).size());
  EXPECT_EQ(a["revision"], 1);

  auto second = client().Post(path, body.dump(), "application/json");
  ASSERT_TRUE(second);
  const Json b = Json::parse(second->body);
  EXPECT_EQ(b["spans"], a["spans"]);
  EXPECT_EQ(b["revision"], 1);

  const Json list = get_json("/api/docs");
  EXPECT_EQ(list["docs"][2]["pretag_available"], true);
}

TEST_F(ServiceTest, PretagWithSilentModelYieldsNothing) {
  const Json body = {{"ensemble_id", "base/silent"}};
  auto res = client().Post("/api/docs/" + doc_id(3) + "/pretag", body.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(Json::parse(res->body)["spans"], Json::array());

  const Json unknown = {{"ensemble_id", "vote/none"}};
  res = client().Post("/api/docs/" + doc_id(3) + "/pretag", unknown.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServiceTest, PretagOnConfirmedRecordIs409) {
  ASSERT_EQ(put_spans(doc_id(4), 0, gold(4), "gold", "confirmed")->status, 200);
  const Json body = {{"ensemble_id", "base/perfect"}};
  auto res = client().Post("/api/docs/" + doc_id(4) + "/pretag", body.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);
}

TEST_F(ServiceTest, ExportMatchesStoreExport) {
  for (std::size_t i = 0; i < corpus_.docs.size(); ++i) {
    ASSERT_EQ(put_spans(doc_id(i), 0, gold(i), "gold", i == 5 ? "in_progress" : "confirmed")->status,
              200);
  }
  auto res = client().Get("/api/export/bio");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(res->get_header_value("X-Schema-Version"), std::to_string(kSchemaVersion));
  EXPECT_EQ(res->body, write_bio(store_.export_bio()));

  // The whole gold corpus when unconfirmed records are included.
  std::vector<BioDocument> expected;
  for (const auto& d : corpus_.docs) {
    expected.push_back(make_bio_document(d, spans_to_bio(d, corpus_.gold.at(d.id()))));
  }
  std::sort(expected.begin(), expected.end(),
            [](const BioDocument& a, const BioDocument& b) { return a.doc_id < b.doc_id; });
  res = client().Get("/api/export/bio?include_unconfirmed=1");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->body, write_bio(expected));

  res = client().Get("/api/export/bio?set=first2");
  ASSERT_TRUE(res);
  const std::vector<std::string> ids = {doc_id(0), doc_id(1)};
  EXPECT_EQ(res->body, write_bio(store_.export_bio(ids)));

  res = client().Get("/api/export/bio?set=missing");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServiceTest, IaaEndpoint) {
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<PiiSpan> second = gold(i);
    if (i == 0 && !second.empty()) second.pop_back();
    ASSERT_EQ(put_spans(doc_id(i), 0, gold(i), "ann1")->status, 200);
    ASSERT_EQ(put_spans(doc_id(i), 0, second, "ann2")->status, 200);
    ASSERT_EQ(put_spans(doc_id(i), 0, gold(i), "ann3")->status, 200);
  }
  const Json same = get_json("/api/iaa?a1=ann1&a2=ann3");
  EXPECT_DOUBLE_EQ(same["kappa_all_tokens"].get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(same["f1_strict"].get<double>(), 1.0);
  EXPECT_EQ(same["documents"], 4);

  const Json ab = get_json("/api/iaa?a1=ann1&a2=ann2");
  const Json ba = get_json("/api/iaa?a1=ann2&a2=ann1");
  EXPECT_DOUBLE_EQ(ab["kappa_all_tokens"].get<double>(), ba["kappa_all_tokens"].get<double>());
  EXPECT_DOUBLE_EQ(ab["f1_strict"].get<double>(), ba["f1_strict"].get<double>());

  std::vector<Document> docs;
  SpanSet a, b;
  for (std::size_t i = 0; i < 4; ++i) {
    docs.push_back(corpus_.docs[i]);
    a[doc_id(i)] = store_.get(doc_id(i), "ann1")->spans;
    b[doc_id(i)] = store_.get(doc_id(i), "ann2")->spans;
  }
  Json direct = to_json(iaa_report(docs, a, b));
  direct["a1"] = "ann1";
  direct["a2"] = "ann2";
  direct["schema_version"] = kSchemaVersion;
  EXPECT_EQ(ab, direct);

  get_json("/api/iaa?a1=ann1&a2=nobody", 404);
  get_json("/api/iaa?a1=ann1", 400);
}

TEST_F(ServiceTest, ListsEnsembles) {
  const Json j = get_json("/api/ensembles");
  EXPECT_EQ(j["ensembles"], Json::array({"base/perfect", "base/silent"}));
}

}  // namespace
}  // namespace deid
