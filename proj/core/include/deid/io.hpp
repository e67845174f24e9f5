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

// JSON encodings and the line-delimited file formats:
//
//   corpus file       {"doc_id": ..., "text": ...} per line
//   annotation file   {"doc_id", "annotator_id", "revision", "status",
//                      "spans": [{"start","end","category","source"}]} per line

#ifndef DEID_IO_HPP_
#define DEID_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deid/annotation.hpp"
#include "deid/metrics.hpp"
#include "deid/text.hpp"

namespace deid {

using Json = nlohmann::json;

Json to_json(const PiiSpan& span);
PiiSpan span_from_json(const Json& j, const std::string& annotator_id = {});

Json to_json(const AnnotationRecord& record);
AnnotationRecord record_from_json(const Json& j);

Json to_json(const Counts& counts);
Json to_json(const MetricsReport& report);
Json to_json(const ErrorTaxonomy& taxonomy);
Json to_json(const IaaReport& report);
Json to_json(const CrossValSummary& summary);

void write_corpus(std::ostream& out, std::span<const Document> docs);
std::vector<Document> read_corpus(std::istream& in);

void write_records(std::ostream& out, std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> read_records(std::istream& in);

// Records -> doc_id -> spans. When several records share a doc_id, the last
// one wins.
SpanSet to_span_set(std::span<const AnnotationRecord> records);
std::vector<AnnotationRecord> from_span_set(const SpanSet& set,
                                            const std::string& annotator_id,
                                            RecordStatus status);

// File helpers; throw NotFound when a path cannot be opened for reading.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::vector<Document> load_corpus(const std::filesystem::path& path);
std::vector<AnnotationRecord> load_records(const std::filesystem::path& path);

// Canonical JSON text used for every file artifact: sorted keys, two-space
// indent, trailing newline.
std::string dump(const Json& j);

}  // namespace deid

#endif  // DEID_IO_HPP_
