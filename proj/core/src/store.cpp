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

#include "deid/store.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "deid/errors.hpp"
#include "deid/io.hpp"

namespace deid {

AnnotationStore::AnnotationStore(std::filesystem::path file)
    : file_(std::move(file)) {
  if (file_.empty() || !std::filesystem::exists(file_)) return;
  for (auto& r : load_records(file_)) {
    records_[{r.doc_id, r.annotator_id}] = std::move(r);
  }
}

void AnnotationStore::add_document(Document doc) {
  std::unique_lock lock(mu_);
  const std::string id = doc.id();
  docs_.insert_or_assign(id, std::move(doc));
  doc_mutexes_.try_emplace(id, std::make_unique<std::mutex>());
}

bool AnnotationStore::has_document(const std::string& doc_id) const {
  std::shared_lock lock(mu_);
  return docs_.contains(doc_id);
}

const Document& AnnotationStore::document(const std::string& doc_id) const {
  std::shared_lock lock(mu_);
  auto it = docs_.find(doc_id);
  if (it == docs_.end()) throw NotFound("unknown document '" + doc_id + "'");
  return it->second;
}

std::vector<std::string> AnnotationStore::document_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  ids.reserve(docs_.size());
  for (const auto& [id, _] : docs_) ids.push_back(id);
  return ids;
}

std::optional<AnnotationRecord> AnnotationStore::get(
    const std::string& doc_id, const std::string& annotator_id) const {
  std::shared_lock lock(mu_);
  auto it = records_.find({doc_id, annotator_id});
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

std::vector<AnnotationRecord> AnnotationStore::records(
    const std::string& doc_id) const {
  std::shared_lock lock(mu_);
  std::vector<AnnotationRecord> out;
  for (auto it = records_.lower_bound({doc_id, ""});
       it != records_.end() && it->first.first == doc_id; ++it) {
    out.push_back(it->second);
  }
  return out;
}

std::vector<std::string> AnnotationStore::annotators() const {
  std::shared_lock lock(mu_);
  std::set<std::string> ids;
  for (const auto& [key, _] : records_) ids.insert(key.second);
  return {ids.begin(), ids.end()};
}

std::mutex& AnnotationStore::doc_mutex(const std::string& doc_id) {
  std::shared_lock lock(mu_);
  auto it = doc_mutexes_.find(doc_id);
  if (it == doc_mutexes_.end()) {
    throw NotFound("unknown document '" + doc_id + "'");
  }
  return *it->second;
}

void AnnotationStore::persist(const AnnotationRecord& record) {
  if (file_.empty()) return;
  // One write call per record keeps lines whole.
  const std::string line = to_json(record).dump() + "\n";
  std::lock_guard lock(file_mu_);
  if (file_.has_parent_path()) {
    std::filesystem::create_directories(file_.parent_path());
  }
  std::ofstream out(file_, std::ios::binary | std::ios::app);
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  out.flush();
  if (!out) throw Error("IoError", "cannot append to " + file_.string());
}

// Caller holds the document mutex.
std::uint64_t AnnotationStore::write_locked(AnnotationRecord record) {
  persist(record);
  std::unique_lock lock(mu_);
  const std::uint64_t rev = record.revision;
  records_[{record.doc_id, record.annotator_id}] = std::move(record);
  return rev;
}

std::uint64_t AnnotationStore::save_annotation(const std::string& doc_id,
                                               const std::string& annotator_id,
                                               std::vector<PiiSpan> spans,
                                               std::uint64_t expected_revision,
                                               RecordStatus status) {
  std::lock_guard doc_lock(doc_mutex(doc_id));
  const Document& doc = document(doc_id);
  validate_spans(doc, spans);
  const auto current = get(doc_id, annotator_id);
  const std::uint64_t stored = current ? current->revision : 0;
  if (stored != expected_revision) {
    throw RevisionConflict("document '" + doc_id + "' annotator '" +
                           annotator_id + "' is at revision " +
                           std::to_string(stored) + ", not " +
                           std::to_string(expected_revision));
  }
  for (auto& s : spans) {
    s.annotator_id = annotator_id;
    if (status == RecordStatus::kConfirmed) s.source = SpanSource::kHuman;
  }
  sort_spans(spans);
  return write_locked({doc_id, annotator_id, std::move(spans), stored + 1, status});
}

std::uint64_t AnnotationStore::confirm(const std::string& doc_id,
                                       const std::string& annotator_id,
                                       std::uint64_t expected_revision) {
  auto current = get(doc_id, annotator_id);
  return save_annotation(doc_id, annotator_id,
                         current ? current->spans : std::vector<PiiSpan>{},
                         expected_revision, RecordStatus::kConfirmed);
}

AnnotationRecord AnnotationStore::ingest_pretag(
    const std::string& doc_id, const std::string& annotator_id,
    std::vector<PiiSpan> machine_spans) {
  std::lock_guard doc_lock(doc_mutex(doc_id));
  const Document& doc = document(doc_id);
  validate_spans(doc, machine_spans);
  auto current = get(doc_id, annotator_id);
  if (current && current->status == RecordStatus::kConfirmed) {
    throw ConfirmedRecord("record of '" + annotator_id + "' on '" + doc_id +
                          "' is confirmed; pre-tags are not applied");
  }
  AnnotationRecord next;
  next.doc_id = doc_id;
  next.annotator_id = annotator_id;
  next.revision = current ? current->revision : 0;
  if (current) {
    for (const auto& s : current->spans) {
      if (s.source == SpanSource::kHuman) next.spans.push_back(s);
    }
  }
  const std::size_t human = next.spans.size();
  for (auto& m : machine_spans) {
    m.source = SpanSource::kMachine;
    m.annotator_id = annotator_id;
    const bool clashes = std::any_of(
        next.spans.begin(), next.spans.begin() + static_cast<std::ptrdiff_t>(human),
        [&](const PiiSpan& h) { return overlaps(h, m); });
    if (!clashes) next.spans.push_back(m);
  }
  sort_spans(next.spans);
  try {
    validate_spans(doc, next.spans);
  } catch (const OverlapError&) {
    // Token expansion can still collide with human spans; keep humans only.
    next.spans.erase(std::remove_if(next.spans.begin(), next.spans.end(),
                                    [](const PiiSpan& s) {
                                      return s.source == SpanSource::kMachine;
                                    }),
                     next.spans.end());
  }
  if (current && current->spans == next.spans) return *current;
  next.revision += 1;
  write_locked(next);
  return next;
}

std::vector<AnnotationRecord> AnnotationStore::confirmed_records(
    std::span<const std::string> doc_ids,
    const std::optional<std::string>& annotator_id,
    bool include_unconfirmed) const {
  std::vector<std::string> ids(doc_ids.begin(), doc_ids.end());
  if (ids.empty()) ids = document_ids();
  std::sort(ids.begin(), ids.end());
  std::vector<AnnotationRecord> out;
  for (const auto& id : ids) {
    const auto recs = records(id);
    const AnnotationRecord* pick = nullptr;
    auto eligible = [&](const AnnotationRecord& r) {
      return include_unconfirmed || r.status == RecordStatus::kConfirmed;
    };
    for (const auto& r : recs) {
      if (!eligible(r)) continue;
      if (annotator_id) {
        if (r.annotator_id == *annotator_id) pick = &r;
      } else if (r.annotator_id == kGoldAnnotator) {
        pick = &r;
        break;
      } else if (!pick) {
        pick = &r;
      }
    }
    if (pick) out.push_back(*pick);
  }
  return out;
}

std::vector<BioDocument> AnnotationStore::export_bio(
    std::span<const std::string> doc_ids,
    const std::optional<std::string>& annotator_id,
    bool include_unconfirmed) const {
  std::vector<BioDocument> out;
  for (const auto& r : confirmed_records(doc_ids, annotator_id, include_unconfirmed)) {
    const Document& doc = document(r.doc_id);
    out.push_back(make_bio_document(doc, spans_to_bio(doc, r.spans)));
  }
  return out;
}

}  // namespace deid
