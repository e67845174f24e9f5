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

#include "deid/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "deid/errors.hpp"

namespace deid {

namespace {

Json parse_line(const std::string& line, std::size_t line_no) {
  try {
    return Json::parse(line);
  } catch (const Json::exception& e) {
    throw FormatError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

template <typename T>
T required(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

Json counts_block(const Counts& c) {
  return {{"tp", c.tp},
          {"fp", c.fp},
          {"fn", c.fn},
          {"precision", c.precision()},
          {"recall", c.recall()},
          {"f1", c.f1()}};
}

}  // namespace

Json to_json(const PiiSpan& span) {
  return {{"start", span.start},
          {"end", span.end},
          {"category", to_string(span.category)},
          {"source", to_string(span.source)}};
}

PiiSpan span_from_json(const Json& j, const std::string& annotator_id) {
  PiiSpan s;
  s.start = required<std::size_t>(j, "start");
  s.end = required<std::size_t>(j, "end");
  const auto cat = parse_category(required<std::string>(j, "category"));
  if (!cat) throw FormatError("unknown category '" + j.at("category").dump() + "'");
  s.category = *cat;
  if (j.contains("source")) {
    const auto src = parse_source(required<std::string>(j, "source"));
    if (!src) throw FormatError("unknown source " + j.at("source").dump());
    s.source = *src;
  }
  s.annotator_id = annotator_id;
  return s;
}

Json to_json(const AnnotationRecord& record) {
  Json spans = Json::array();
  for (const auto& s : record.spans) spans.push_back(to_json(s));
  return {{"doc_id", record.doc_id},
          {"annotator_id", record.annotator_id},
          {"revision", record.revision},
          {"status", to_string(record.status)},
          {"spans", std::move(spans)}};
}

AnnotationRecord record_from_json(const Json& j) {
  AnnotationRecord r;
  r.doc_id = required<std::string>(j, "doc_id");
  r.annotator_id = required<std::string>(j, "annotator_id");
  r.revision = j.contains("revision") ? required<std::uint64_t>(j, "revision") : 0;
  if (j.contains("status")) {
    const auto st = parse_status(required<std::string>(j, "status"));
    if (!st) throw FormatError("unknown status " + j.at("status").dump());
    r.status = *st;
  }
  for (const auto& s : required<Json>(j, "spans")) {
    r.spans.push_back(span_from_json(s, r.annotator_id));
  }
  sort_spans(r.spans);
  return r;
}

Json to_json(const Counts& counts) { return counts_block(counts); }

Json to_json(const MetricsReport& report) {
  Json j;
  j["mode"] = report.mode == MetricsMode::kStrictEntity ? "strict" : "binary";
  j["micro"] = counts_block(report.micro);
  j["zero_denominator_convention"] = "vacuous precision/recall = 1.0";
  if (report.mode == MetricsMode::kStrictEntity) {
    Json per = Json::object();
    for (PiiCategory c : kAllCategories) {
      per[std::string(to_string(c))] = counts_block(report.category(c));
    }
    j["per_category"] = std::move(per);
  }
  return j;
}

Json to_json(const ErrorTaxonomy& taxonomy) {
  auto block = [](const TaxonomyCounts& t) {
    return Json{{"fp", t.fp()},       {"fn", t.fn()},       {"fp_bm", t.fp_bm},
                {"fp_cm", t.fp_cm},   {"fp_wt", t.fp_wt},   {"fn_bm", t.fn_bm},
                {"fn_cm", t.fn_cm},   {"fn_nt", t.fn_nt}};
  };
  Json j = Json::object();
  j["overall"] = block(taxonomy.total());
  for (PiiCategory c : kAllCategories) {
    j[std::string(to_string(c))] = block(taxonomy.category(c));
  }
  return j;
}

Json to_json(const IaaReport& report) {
  Json per = Json::object();
  for (const auto& [c, f] : report.per_category_f1) {
    per[std::string(to_string(c))] = f;
  }
  return {{"documents", report.documents},
          {"kappa_all_tokens", report.kappa_all_tokens},
          {"kappa_annotated_only", report.kappa_annotated_only},
          {"f1_strict", report.f1_strict},
          {"per_category_f1", std::move(per)}};
}

Json to_json(const CrossValSummary& summary) {
  auto ms = [](const MeanSd& m) { return Json{{"mean", m.mean}, {"sd", m.sd}}; };
  return {{"precision", ms(summary.precision)},
          {"recall", ms(summary.recall)},
          {"f1", ms(summary.f1)}};
}

void write_corpus(std::ostream& out, std::span<const Document> docs) {
  for (const Document& d : docs) {
    out << Json{{"doc_id", d.id()}, {"text", d.text()}}.dump() << '\n';
  }
}

std::vector<Document> read_corpus(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const Json j = parse_line(line, n);
    docs.emplace_back(required<std::string>(j, "doc_id"),
                      required<std::string>(j, "text"));
  }
  return docs;
}

void write_records(std::ostream& out, std::span<const AnnotationRecord> records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<AnnotationRecord> read_records(std::istream& in) {
  std::vector<AnnotationRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    out.push_back(record_from_json(parse_line(line, n)));
  }
  return out;
}

SpanSet to_span_set(std::span<const AnnotationRecord> records) {
  SpanSet set;
  for (const auto& r : records) set[r.doc_id] = r.spans;
  return set;
}

std::vector<AnnotationRecord> from_span_set(const SpanSet& set,
                                            const std::string& annotator_id,
                                            RecordStatus status) {
  std::vector<AnnotationRecord> out;
  for (const auto& [id, spans] : set) {
    AnnotationRecord r{id, annotator_id, spans, 1, status};
    for (auto& s : r.spans) s.annotator_id = annotator_id;
    sort_spans(r.spans);
    out.push_back(std::move(r));
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("IoError", "short write to " + path.string());
}

std::vector<Document> load_corpus(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_corpus(in);
}

std::vector<AnnotationRecord> load_records(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_records(in);
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace deid
