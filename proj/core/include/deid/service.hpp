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


// HTTP adapter over an AnnotationStore. Every JSON response carries
// "schema_version"; errors are {"schema_version", "error", "message"} with
// 404 (unknown document, annotator, set or ensemble), 409 (stale revision,
// confirmed record, duplicate upload), 422 (invalid spans) or 400 (bad body).
//
//   GET  /api/docs[?annotator=]              DocSummary list
//   POST /api/docs            {doc_id, text}
//   GET  /api/docs/{id}[?annotator=]          {text, spans, revision, status}
//   PUT  /api/docs/{id}/spans {revision, spans[, annotator, status]}
//   POST /api/docs/{id}/pretag {ensemble_id[, annotator]}
//   GET  /api/export/bio[?set=&annotator=&include_unconfirmed=1]
//   GET  /api/iaa?a1=&a2=[&set=]
//   GET  /api/ensembles

#ifndef DEID_SERVICE_HPP_
#define DEID_SERVICE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "deid/ensemble.hpp"
#include "deid/io.hpp"
#include "deid/store.hpp"

namespace deid {

inline constexpr int kSchemaVersion = 1;

struct ServiceOptions {
  // Served under "/" when set.
  std::filesystem::path static_dir;
  // Annotator used when a request names none.
  std::string default_annotator = std::string(kGoldAnnotator);
};

struct DocSummary {
  std::string doc_id;
  std::string status;  // "none", "in_progress" or "confirmed"
  std::uint64_t revision = 0;
  std::size_t span_count = 0;
  // The record still holds machine spans awaiting review.
  bool pretag_available = false;
};

Json to_json(const DocSummary& summary);

// Registers models/ensemble.json of a pipeline run plus one single-model
// ensemble per bank member. Returns the registered ids.
std::vector<std::string> load_ensembles(const std::filesystem::path& model_dir,
                                        std::vector<EnsembleModel>& out);

class Service {
 public:
  explicit Service(AnnotationStore& store, ServiceOptions options = {});
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void add_ensemble(EnsembleModel model);
  // Named document subsets for export and IAA ("all" is implicit).
  void add_set(const std::string& name, std::vector<std::string> doc_ids);

  std::vector<DocSummary> summaries(const std::string& annotator) const;

  // Blocks until stop(). Returns false if the address cannot be bound.
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it (-1 on failure); then call
  // run() from a worker thread.
  int bind_any_port(const std::string& host);
  bool run();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace deid

#endif  // DEID_SERVICE_HPP_
