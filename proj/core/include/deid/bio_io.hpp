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

// BIO text format.
//
//   # doc_id = <id>
//   surface<TAB>tag            one token per line
//                              one blank line between text lines
//                              two blank lines between documents
//
// The file is UTF-8 and ends with a newline. Text lines without tokens are
// not written, so line numbering inside a document counts non-empty lines.

#ifndef DEID_BIO_IO_HPP_
#define DEID_BIO_IO_HPP_

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "deid/text.hpp"

namespace deid {

struct BioDocument {
  std::string doc_id;
  // Non-empty text lines only.
  std::vector<BioSequence> lines;

  friend bool operator==(const BioDocument&, const BioDocument&) = default;
};

BioDocument make_bio_document(const Document& doc,
                              std::span<const TagSequence> tags);

// Expands a BioDocument back to one tag sequence per document line. Throws
// ShapeError when the token surfaces disagree with the document.
std::vector<TagSequence> align_to_document(const BioDocument& bio,
                                           const Document& doc);

void write_bio(std::ostream& out, std::span<const BioDocument> docs);
std::string write_bio(std::span<const BioDocument> docs);

// Throws FormatError on malformed input.
std::vector<BioDocument> read_bio(std::istream& in);
std::vector<BioDocument> read_bio(std::string_view text);

}  // namespace deid

#endif  // DEID_BIO_IO_HPP_
