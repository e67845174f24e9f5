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

#include "deid/bio_io.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "deid/errors.hpp"

namespace deid {

namespace {

constexpr std::string_view kHeader = "# doc_id = ";

}  // namespace

BioDocument make_bio_document(const Document& doc,
                              std::span<const TagSequence> tags) {
  BioDocument out{doc.id(), {}};
  for (auto& seq : to_bio_sequences(doc, tags)) {
    if (!seq.tokens.empty()) out.lines.push_back(std::move(seq));
  }
  return out;
}

std::vector<TagSequence> align_to_document(const BioDocument& bio,
                                           const Document& doc) {
  std::vector<TagSequence> out;
  out.reserve(doc.tokens().size());
  std::size_t next = 0;
  for (const auto& line : doc.tokens()) {
    if (line.empty()) {
      out.emplace_back();
      continue;
    }
    if (next >= bio.lines.size()) {
      throw ShapeError("document " + doc.id() + " has more text lines than " +
                       "its BIO record");
    }
    const BioSequence& seq = bio.lines[next++];
    if (seq.tokens.size() != line.size()) {
      throw ShapeError("document " + doc.id() + ": token count mismatch on " +
                       "BIO line " + std::to_string(next - 1));
    }
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (seq.tokens[i] != line[i].surface) {
        throw ShapeError("document " + doc.id() + ": token '" + seq.tokens[i] +
                         "' does not match '" + line[i].surface + "'");
      }
    }
    out.push_back(seq.tags);
  }
  if (next != bio.lines.size()) {
    throw ShapeError("document " + doc.id() + " has fewer text lines than " +
                     "its BIO record");
  }
  return out;
}

void write_bio(std::ostream& out, std::span<const BioDocument> docs) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    if (d > 0) out << "\n\n";
    out << kHeader << docs[d].doc_id << '\n';
    for (std::size_t l = 0; l < docs[d].lines.size(); ++l) {
      if (l > 0) out << '\n';
      const BioSequence& seq = docs[d].lines[l];
      for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        out << seq.tokens[i] << '\t' << to_string(seq.tags[i]) << '\n';
      }
    }
  }
}

std::string write_bio(std::span<const BioDocument> docs) {
  std::ostringstream out;
  write_bio(out, docs);
  return out.str();
}

std::vector<BioDocument> read_bio(std::istream& in) {
  std::vector<BioDocument> docs;
  std::string row;
  std::size_t row_no = 0;
  bool open_line = false;
  while (std::getline(in, row)) {
    ++row_no;
    if (row.rfind(kHeader, 0) == 0) {
      docs.push_back({row.substr(kHeader.size()), {}});
      open_line = false;
      continue;
    }
    if (row.empty()) {
      open_line = false;
      continue;
    }
    if (docs.empty()) {
      throw FormatError("row " + std::to_string(row_no) +
                        ": token before any '# doc_id' header");
    }
    const auto tab = row.find('\t');
    if (tab == std::string::npos || tab == 0 ||
        row.find('\t', tab + 1) != std::string::npos) {
      throw FormatError("row " + std::to_string(row_no) +
                        ": expected 'surface<TAB>tag'");
    }
    const auto tag = parse_tag(std::string_view(row).substr(tab + 1));
    if (!tag) {
      throw FormatError("row " + std::to_string(row_no) + ": unknown tag '" +
                        row.substr(tab + 1) + "'");
    }
    auto& lines = docs.back().lines;
    if (!open_line) {
      lines.emplace_back();
      open_line = true;
    }
    lines.back().tokens.push_back(row.substr(0, tab));
    lines.back().tags.push_back(*tag);
  }
  return docs;
}

std::vector<BioDocument> read_bio(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_bio(in);
}

}  // namespace deid
