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

#include "deid/bio_io.hpp"
#include "deid/errors.hpp"
#include "deid/text.hpp"
#include "support/oracles.hpp"

namespace deid {
namespace {

using testing::Engine;

std::vector<std::string> surfaces(const TokenLine& line) {
  std::vector<std::string> out;
  for (const auto& t : line) out.push_back(t.surface);
  return out;
}

TEST(Tokenize, EmptyTextHasNoLines) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, MrnLine) {
  const auto lines = tokenize("MRN: 123456");
  ASSERT_EQ(lines.size(), 1u);
  ASSERT_EQ(lines[0].size(), 3u);
  EXPECT_EQ(surfaces(lines[0]), (std::vector<std::string>{"MRN", ":", "123456"}));
  EXPECT_EQ(lines[0][0].start, 0u);
  EXPECT_EQ(lines[0][0].end, 3u);
  EXPECT_EQ(lines[0][1].start, 3u);
  EXPECT_EQ(lines[0][1].end, 4u);
  EXPECT_EQ(lines[0][2].start, 5u);
  EXPECT_EQ(lines[0][2].end, 11u);
}

TEST(Tokenize, ApostropheIsItsOwnToken) {
  const auto lines = tokenize("Dr Lastname's Room");
  EXPECT_EQ(surfaces(lines[0]),
            (std::vector<std::string>{"Dr", "Lastname", "'", "s", "Room"}));
}

TEST(Tokenize, OffsetsCountScalarValues) {
  const Document doc("d", "Zoë Müller\nx");
  const auto& line = doc.tokens()[0];
  ASSERT_EQ(line.size(), 2u);
  EXPECT_EQ(line[1].start, 4u);
  EXPECT_EQ(line[1].end, 10u);
  EXPECT_EQ(doc.length(), 12u);
  EXPECT_EQ(doc.slice(4, 10), "Müller");
  EXPECT_EQ(doc.line_of(10), 0u);
  EXPECT_EQ(doc.line_of(11), 1u);
}

TEST(Tokenize, BlankLinesAreKept) {
  const auto lines = tokenize("a\n\nb");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_TRUE(lines[1].empty());
}

TEST(DocumentProperty, TokensAreFaithfulToText) {
  Engine rng(11);
  for (int i = 0; i < 300; ++i) {
    const Document doc = testing::random_document(rng, "d");
    ASSERT_EQ(doc.lines().size(), doc.tokens().size());
    for (std::size_t l = 0; l < doc.tokens().size(); ++l) {
      const auto range = doc.lines()[l];
      std::size_t prev_end = range.start;
      std::string rebuilt;
      for (const auto& tok : doc.tokens()[l]) {
        ASSERT_LT(tok.start, tok.end);
        ASSERT_GE(tok.start, prev_end);
        ASSERT_LE(tok.end, range.end);
        ASSERT_EQ(doc.slice(tok.start, tok.end), tok.surface);
        const std::string gap = doc.slice(prev_end, tok.start);
        ASSERT_EQ(gap.find_first_not_of(" \t\r"), std::string::npos);
        rebuilt += gap + tok.surface;
        prev_end = tok.end;
      }
      rebuilt += doc.slice(prev_end, range.end);
      EXPECT_EQ(rebuilt, doc.slice(range.start, range.end));
    }
  }
}

TEST(SpansToBio, TagsCoveredTokens) {
  const Document doc("d", "MRN: 123456");
  const auto tags = spans_to_bio(doc, std::vector<PiiSpan>{{5, 11, PiiCategory::kIdn}});
  EXPECT_EQ(tags[0], (TagSequence{BioTag::kO, BioTag::kO, BioTag::kBIdn}));
}

TEST(SpansToBio, NoSpansIsAllOutside) {
  const Document doc("d", "MRN: 123456");
  EXPECT_EQ(spans_to_bio(doc, {})[0], TagSequence(3, BioTag::kO));
}

TEST(SpansToBio, PartialSpanWidensToToken) {
  const Document doc("d", "MRN: 123456");
  const auto tags = spans_to_bio(doc, std::vector<PiiSpan>{{5, 9, PiiCategory::kIdn}});
  EXPECT_EQ(tags[0][2], BioTag::kBIdn);
}

TEST(SpansToBio, RejectsOverlapAndLineCrossing) {
  const Document doc("d", "Jane Citizen\nMRN 123456");
  EXPECT_THROW(spans_to_bio(doc, std::vector<PiiSpan>{{0, 4, PiiCategory::kPerson},
                                                      {2, 12, PiiCategory::kPerson}}),
               OverlapError);
  EXPECT_THROW(spans_to_bio(doc, std::vector<PiiSpan>{{5, 16, PiiCategory::kPerson}}),
               CrossLineError);
  EXPECT_THROW(spans_to_bio(doc, std::vector<PiiSpan>{{20, 40, PiiCategory::kIdn}}), InvalidSpan);
}

TEST(BioToSpans, Inverse) {
  const Document doc("d", "MRN: 123456");
  const std::vector<TagSequence> tags = {{BioTag::kO, BioTag::kO, BioTag::kBIdn}};
  const auto spans = bio_to_spans(doc, tags);
  ASSERT_EQ(spans.size(), 1u);
  EXPECT_EQ(spans[0].start, 5u);
  EXPECT_EQ(spans[0].end, 11u);
  EXPECT_EQ(spans[0].category, PiiCategory::kIdn);
  EXPECT_TRUE(bio_to_spans(doc, std::vector<TagSequence>{TagSequence(3, BioTag::kO)}).empty());
}

TEST(BioToSpans, ShapeMismatchThrows) {
  const Document doc("d", "MRN: 123456");
  EXPECT_THROW(bio_to_spans(doc, std::vector<TagSequence>{{BioTag::kO}}), ShapeError);
}

TEST(RepairBio, Examples) {
  EXPECT_EQ(repair_bio(TagSequence{BioTag::kO, BioTag::kIPerson}),
            (TagSequence{BioTag::kO, BioTag::kBPerson}));
  EXPECT_EQ(repair_bio(TagSequence{BioTag::kBIdn, BioTag::kIPhone}),
            (TagSequence{BioTag::kBIdn, BioTag::kBPhone}));
  EXPECT_EQ(repair_bio(TagSequence{BioTag::kBPerson, BioTag::kIPerson}),
            (TagSequence{BioTag::kBPerson, BioTag::kIPerson}));
  EXPECT_EQ(repair_bio(TagSequence{BioTag::kIDob}), (TagSequence{BioTag::kBDob}));
}

TEST(RepairBioProperty, IdempotentLegalAndPartitionPreserving) {
  Engine rng(5);
  for (int i = 0; i < 2000; ++i) {
    TagSequence tags(testing::uniform(rng, 0, 9));
    for (auto& t : tags) t = tag_at(testing::uniform(rng, 0, kNumTags - 1));
    const TagSequence once = repair_bio(tags);
    ASSERT_TRUE(is_legal(once));
    ASSERT_EQ(repair_bio(once), once);
    for (std::size_t j = 0; j < tags.size(); ++j) {
      ASSERT_EQ(is_outside(tags[j]), is_outside(once[j]));
      if (!is_outside(tags[j])) ASSERT_EQ(category_of(tags[j]), category_of(once[j]));
    }
    if (is_legal(tags)) ASSERT_EQ(once, tags);
  }
}

TEST(BioCodecProperty, RoundTripOnAlignedSpans) {
  Engine rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Document doc = testing::random_document(rng, "d" + std::to_string(i));
    auto spans = testing::random_aligned_spans(rng, doc);
    sort_spans(spans);
    const auto tags = spans_to_bio(doc, spans);
    for (const auto& line : tags) ASSERT_TRUE(is_legal(line));
    ASSERT_EQ(bio_to_spans(doc, tags), spans) << doc.text();
  }
}

TEST(Transitions, InsideOnlyAfterSameCategory) {
  EXPECT_FALSE(is_legal_transition(std::nullopt, BioTag::kIPerson));
  EXPECT_FALSE(is_legal_transition(BioTag::kO, BioTag::kIPerson));
  EXPECT_FALSE(is_legal_transition(BioTag::kBIdn, BioTag::kIPerson));
  EXPECT_TRUE(is_legal_transition(BioTag::kBPerson, BioTag::kIPerson));
  EXPECT_TRUE(is_legal_transition(BioTag::kIPerson, BioTag::kIPerson));
  EXPECT_TRUE(is_legal_transition(BioTag::kIPerson, BioTag::kBPerson));
}

TEST(TagNames, RoundTrip) {
  for (std::size_t i = 0; i < kNumTags; ++i) {
    EXPECT_EQ(parse_tag(to_string(tag_at(i))), tag_at(i));
  }
  EXPECT_EQ(to_string(BioTag::kBIdn), "B-IDN");
  EXPECT_FALSE(parse_tag("B-NAME").has_value());
  for (PiiCategory c : kAllCategories) EXPECT_EQ(parse_category(to_string(c)), c);
}

TEST(BioFile, ExactLayout) {
  const Document a("a", "Dr Smith\n\nMRN 123456");
  const Document b("b", "ok");
  std::vector<BioDocument> docs = {
      make_bio_document(a, spans_to_bio(a, std::vector<PiiSpan>{{3, 8, PiiCategory::kPerson},
                                                                {14, 20, PiiCategory::kIdn}})),
      make_bio_document(b, spans_to_bio(b, {}))};
  const std::string expected =
      "# doc_id = a\n"
      "Dr\tO\n"
      "Smith\tB-PERSON\n"
      "\n"
      "MRN\tO\n"
      "123456\tB-IDN\n"
      "\n"
      "\n"
      "# doc_id = b\n"
      "ok\tO\n";
  EXPECT_EQ(write_bio(docs), expected);
  EXPECT_EQ(read_bio(expected), docs);
}

TEST(BioFile, AlignsBackToDocument) {
  const Document a("a", "Dr Smith\n\nMRN 123456");
  const auto tags = spans_to_bio(a, std::vector<PiiSpan>{{3, 8, PiiCategory::kPerson}});
  const BioDocument bio = make_bio_document(a, tags);
  EXPECT_EQ(align_to_document(bio, a), tags);
  EXPECT_THROW(align_to_document(bio, Document("a", "Dr Jones\n\nMRN 123456")), ShapeError);
}

TEST(BioFile, MalformedInputThrows) {
  EXPECT_THROW(read_bio("Dr\tO\n"), FormatError);
  EXPECT_THROW(read_bio("# doc_id = a\nDr\tX-NAME\n"), FormatError);
  EXPECT_THROW(read_bio("# doc_id = a\nDr O\n"), FormatError);
}

TEST(BioFileProperty, WriteReadRoundTrip) {
  Engine rng(13);
  for (int i = 0; i < 200; ++i) {
    std::vector<BioDocument> docs;
    for (int d = 0; d < 3; ++d) {
      const Document doc = testing::random_document(rng, "doc" + std::to_string(d));
      docs.push_back(make_bio_document(doc, spans_to_bio(doc, testing::random_aligned_spans(rng, doc))));
    }
    ASSERT_EQ(read_bio(write_bio(docs)), docs);
  }
}

}  // namespace
}  // namespace deid
