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

#ifndef DEID_STORE_HPP_
#define DEID_STORE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "deid/annotation.hpp"
#include "deid/bio_io.hpp"
#include "deid/text.hpp"

namespace deid {

// Annotator id of adjudicated gold records; preferred by BIO export.
inline constexpr std::string_view kGoldAnnotator = "gold";

// Documents plus one revisioned AnnotationRecord per (doc, annotator).
//
// Every accepted write appends the full record as one JSON line to the
// backing file (if any); reopening the store replays the file, last line per
// key winning. Writes to one document are serialized; reads run
// concurrently. Revisions start at 0 (no record) and grow by one per write.
class AnnotationStore {
 public:
  // An empty path keeps everything in memory.
  explicit AnnotationStore(std::filesystem::path file = {});

  AnnotationStore(const AnnotationStore&) = delete;
  AnnotationStore& operator=(const AnnotationStore&) = delete;

  void add_document(Document doc);
  bool has_document(const std::string& doc_id) const;
  // Throws NotFound.
  const Document& document(const std::string& doc_id) const;
  std::vector<std::string> document_ids() const;

  std::optional<AnnotationRecord> get(const std::string& doc_id,
                                      const std::string& annotator_id) const;
  std::vector<AnnotationRecord> records(const std::string& doc_id) const;
  std::vector<std::string> annotators() const;

  // Optimistic write. Throws NotFound, RevisionConflict, OverlapError,
  // CrossLineError or InvalidSpan. Returns the new revision.
  std::uint64_t save_annotation(const std::string& doc_id,
                                const std::string& annotator_id,
                                std::vector<PiiSpan> spans,
                                std::uint64_t expected_revision,
                                RecordStatus status = RecordStatus::kInProgress);

  // Marks the record confirmed; every span becomes human-sourced.
  std::uint64_t confirm(const std::string& doc_id,
                        const std::string& annotator_id,
                        std::uint64_t expected_revision);

  // Stores model output as machine spans for later human correction. Human
  // spans already in the record are kept and machine spans that would
  // overlap them are dropped. Previous machine spans are replaced. A call
  // that changes nothing writes nothing. Throws ConfirmedRecord when the
  // record is already confirmed.
  AnnotationRecord ingest_pretag(const std::string& doc_id,
                                 const std::string& annotator_id,
                                 std::vector<PiiSpan> machine_spans);

  // Confirmed records of `doc_ids` (all documents when empty) in doc_id
  // order. Per document the record of `annotator_id` is used when given,
  // otherwise the gold record, otherwise the first confirmed annotator.
  std::vector<AnnotationRecord> confirmed_records(
      std::span<const std::string> doc_ids = {},
      const std::optional<std::string>& annotator_id = std::nullopt,
      bool include_unconfirmed = false) const;

  std::vector<BioDocument> export_bio(
      std::span<const std::string> doc_ids = {},
      const std::optional<std::string>& annotator_id = std::nullopt,
      bool include_unconfirmed = false) const;

 private:
  using Key = std::pair<std::string, std::string>;

  std::mutex& doc_mutex(const std::string& doc_id);
  void persist(const AnnotationRecord& record);
  std::uint64_t write_locked(AnnotationRecord record);

  std::filesystem::path file_;
  mutable std::shared_mutex mu_;
  std::map<std::string, Document> docs_;
  std::map<Key, AnnotationRecord> records_;
  std::map<std::string, std::unique_ptr<std::mutex>> doc_mutexes_;
  std::mutex file_mu_;
};

}  // namespace deid

#endif  // DEID_STORE_HPP_
