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


#include "deid/ensemble.hpp"

#include <algorithm>
#include <map>

#include "deid/errors.hpp"
#include "deid/parallel.hpp"

namespace deid {

BioTag vote_token(std::span<const BioTag> votes, std::span<const std::size_t> ranking) {
  if (votes.empty()) throw ShapeMismatch("vote over zero models");
  std::array<std::size_t, kNumTags> count{};
  for (BioTag t : votes) ++count[index(t)];
  const std::size_t top = *std::max_element(count.begin(), count.end());
  std::size_t winners = 0, winner = 0;
  for (std::size_t y = 0; y < kNumTags; ++y) {
    if (count[y] == top) {
      ++winners;
      winner = y;
    }
  }
  if (winners == 1) return tag_at(winner);
  const std::size_t lead = ranking.empty() ? 0 : ranking.front();
  if (lead >= votes.size()) throw ShapeMismatch("ranking names a missing model");
  return votes[lead];
}

TagSequence vote(std::span<const TagSequence> predictions,
                 std::span<const std::size_t> ranking) {
  if (predictions.empty()) throw ShapeMismatch("vote over zero models");
  const std::size_t n = predictions.front().size();
  for (const auto& p : predictions) {
    if (p.size() != n) throw ShapeMismatch("member predictions differ in length");
  }
  TagSequence out(n);
  std::vector<BioTag> column(predictions.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < predictions.size(); ++m) column[m] = predictions[m][i];
    out[i] = vote_token(column, ranking);
  }
  return repair_bio(out);
}

std::string_view to_string(GroupSelector g) {
  switch (g) {
    case GroupSelector::kAll: return "all";
    case GroupSelector::kTop3F1: return "top3-f1";
    case GroupSelector::kTop3Recall: return "top3-recall";
    case GroupSelector::kSingle: return "single";
  }
  return "all";
}

std::optional<GroupSelector> parse_group_selector(std::string_view name) {
  for (auto g : {GroupSelector::kAll, GroupSelector::kTop3F1, GroupSelector::kTop3Recall,
                 GroupSelector::kSingle}) {
    if (to_string(g) == name) return g;
  }
  return std::nullopt;
}

std::string_view to_string(EnsembleMethod m) {
  switch (m) {
    case EnsembleMethod::kMajorityVote: return "vote";
    case EnsembleMethod::kStackLr: return "stack-lr";
    case EnsembleMethod::kStackSvm: return "stack-svm";
    case EnsembleMethod::kStackGbt: return "stack-gbt";
  }
  return "vote";
}

std::optional<EnsembleMethod> parse_ensemble_method(std::string_view name) {
  for (auto m : kMethodOrder) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

DevScores scores_of(const TaggerPtr& t) {
  return t->dev_scores().value_or(DevScores{});
}

std::vector<TaggerPtr> ranked(std::span<const TaggerPtr> bank, double DevScores::*key) {
  std::vector<TaggerPtr> out(bank.begin(), bank.end());
  std::stable_sort(out.begin(), out.end(), [key](const TaggerPtr& a, const TaggerPtr& b) {
    const double sa = scores_of(a).*key, sb = scores_of(b).*key;
    if (sa != sb) return sa > sb;
    return a->id() < b->id();
  });
  return out;
}

StackAlgorithm algorithm_of(EnsembleMethod m) {
  switch (m) {
    case EnsembleMethod::kStackSvm: return StackAlgorithm::kLinearSvm;
    case EnsembleMethod::kStackGbt: return StackAlgorithm::kGradientBoostedTrees;
    default: return StackAlgorithm::kLogisticRegression;
  }
}

const TaggerPtr& find_member(std::span<const TaggerPtr> bank, const std::string& id) {
  for (const auto& t : bank) {
    if (t->id() == id) return t;
  }
  throw NotFound("tagger '" + id + "' is not in the bank");
}

}  // namespace

std::vector<std::string> rank_by_f1(std::span<const TaggerPtr> bank) {
  std::vector<std::string> ids;
  for (const auto& t : ranked(bank, &DevScores::f1)) ids.push_back(t->id());
  return ids;
}

ModelGroup make_group(std::span<const TaggerPtr> bank, GroupSelector selector) {
  if (bank.empty()) throw ShapeMismatch("empty model bank");
  if (selector == GroupSelector::kSingle) throw ShapeMismatch("single groups wrap one model");
  ModelGroup g{selector, {}};
  const auto by_f1 = rank_by_f1(bank);
  if (selector == GroupSelector::kAll) {
    g.members = by_f1;
    return g;
  }
  const auto key = selector == GroupSelector::kTop3F1 ? &DevScores::f1 : &DevScores::recall;
  const auto top = ranked(bank, key);
  const std::size_t n = std::min<std::size_t>(3, top.size());
  for (const auto& id : by_f1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (top[i]->id() == id) g.members.push_back(id);
    }
  }
  return g;
}

std::string EnsembleModel::id() const {
  if (group.selector == GroupSelector::kSingle) return "base/" + group.members.front();
  return std::string(to_string(method)) + "/" + std::string(to_string(group.selector));
}

MemberTags member_predictions(std::span<const TaggerPtr> members, const Document& doc) {
  MemberTags out;
  out.reserve(members.size());
  for (const auto& m : members) out.push_back(m->tag(doc));
  return out;
}

namespace {

void append_samples(std::vector<StackSample>& out, const MemberTags& tags, const Document& doc,
                    const std::vector<PiiSpan>& gold) {
  const auto gold_tags = spans_to_bio(doc, gold);
  const auto lines = doc.tokens();
  for (std::size_t l = 0; l < lines.size(); ++l) {
    for (std::size_t i = 0; i < lines[l].size(); ++i) {
      StackSample s;
      s.votes.reserve(tags.size());
      for (const auto& m : tags) s.votes.push_back(m[l][i]);
      s.shape = static_cast<std::uint8_t>(shape_class(lines[l][i].surface));
      s.gold = gold_tags[l][i];
      out.push_back(std::move(s));
    }
  }
}

const std::vector<PiiSpan>& spans_of(const SpanSet& set, const std::string& id) {
  static const std::vector<PiiSpan> kNone;
  auto it = set.find(id);
  return it == set.end() ? kNone : it->second;
}

// Per-document member predictions reordered to a group.
MemberTags select_members(const MemberTags& bank_tags, std::span<const TaggerPtr> bank,
                          const ModelGroup& group) {
  MemberTags out;
  for (const auto& id : group.members) {
    for (std::size_t b = 0; b < bank.size(); ++b) {
      if (bank[b]->id() == id) out.push_back(bank_tags[b]);
    }
  }
  return out;
}

EnsembleModel assemble(std::span<const TaggerPtr> bank, EnsembleMethod method,
                       GroupSelector selector,
                       const std::vector<MemberTags>& dev_bank_tags,
                       std::span<const Document> dev_docs, const SpanSet& dev_gold,
                       const StackerOptions& options) {
  EnsembleModel e;
  e.method = method;
  e.group = make_group(bank, selector);
  for (const auto& id : e.group.members) e.members.push_back(find_member(bank, id));
  if (method == EnsembleMethod::kMajorityVote) return e;
  std::vector<StackSample> samples;
  for (std::size_t d = 0; d < dev_docs.size(); ++d) {
    append_samples(samples, select_members(dev_bank_tags[d], bank, e.group), dev_docs[d],
                   spans_of(dev_gold, dev_docs[d].id()));
  }
  e.stacker = train_stacker(samples, e.members.size(), algorithm_of(method), options);
  return e;
}

std::vector<MemberTags> bank_predictions(std::span<const TaggerPtr> bank,
                                         std::span<const Document> docs, std::size_t jobs) {
  std::vector<MemberTags> out(docs.size());
  parallel_for(docs.size(), jobs,
               [&](std::size_t d) { out[d] = member_predictions(bank, docs[d]); });
  return out;
}

}  // namespace

std::vector<StackSample> stack_samples(std::span<const TaggerPtr> members,
                                       std::span<const Document> docs, const SpanSet& gold) {
  std::vector<StackSample> out;
  for (const Document& doc : docs) {
    append_samples(out, member_predictions(members, doc), doc, spans_of(gold, doc.id()));
  }
  return out;
}

EnsembleModel make_ensemble(std::span<const TaggerPtr> bank, EnsembleMethod method,
                            GroupSelector selector, std::span<const Document> dev_docs,
                            const SpanSet& dev_gold, const StackerOptions& options) {
  std::vector<MemberTags> dev_tags;
  if (method != EnsembleMethod::kMajorityVote) dev_tags = bank_predictions(bank, dev_docs, 1);
  return assemble(bank, method, selector, dev_tags, dev_docs, dev_gold, options);
}

EnsembleModel single_model_ensemble(const TaggerPtr& model) {
  EnsembleModel e;
  e.method = EnsembleMethod::kMajorityVote;
  e.group = {GroupSelector::kSingle, {model->id()}};
  e.members = {model};
  return e;
}

std::vector<TagSequence> combine(const EnsembleModel& e, const MemberTags& member_tags,
                                 const Document& doc) {
  if (member_tags.size() != e.members.size() || member_tags.empty()) {
    throw ShapeMismatch("ensemble '" + e.id() + "' expects " +
                        std::to_string(e.members.size()) + " member predictions");
  }
  const auto lines = doc.tokens();
  std::vector<TagSequence> out(lines.size());
  std::vector<std::size_t> ranking(e.members.size());
  for (std::size_t m = 0; m < ranking.size(); ++m) ranking[m] = m;
  std::vector<TagSequence> line_preds(e.members.size());
  std::vector<BioTag> votes(e.members.size());
  for (std::size_t l = 0; l < lines.size(); ++l) {
    for (std::size_t m = 0; m < e.members.size(); ++m) {
      if (member_tags[m].size() != lines.size() || member_tags[m][l].size() != lines[l].size()) {
        throw ShapeMismatch("member prediction shape differs from the document");
      }
      line_preds[m] = member_tags[m][l];
    }
    if (!e.stacker) {
      out[l] = vote(line_preds, ranking);
      continue;
    }
    TagSequence tags(lines[l].size());
    for (std::size_t i = 0; i < tags.size(); ++i) {
      for (std::size_t m = 0; m < votes.size(); ++m) votes[m] = line_preds[m][i];
      tags[i] = e.stacker->predict(votes, shape_class(lines[l][i].surface));
    }
    out[l] = repair_bio(tags);
  }
  return out;
}

std::vector<TagSequence> apply_ensemble_tags(const EnsembleModel& e, const Document& doc) {
  return combine(e, member_predictions(e.members, doc), doc);
}

std::vector<PiiSpan> apply_ensemble(const EnsembleModel& e, const Document& doc) {
  return bio_to_spans(doc, apply_ensemble_tags(e, doc), SpanSource::kMachine, e.id());
}

MetricsReport evaluate(const EnsembleModel& e, std::span<const Document> docs,
                       const SpanSet& gold) {
  SpanSet g, p;
  for (const Document& doc : docs) {
    g[doc.id()] = spans_of(gold, doc.id());
    p[doc.id()] = apply_ensemble(e, doc);
  }
  return strict_entity_metrics(g, p);
}

Selection select_best(std::span<const TaggerPtr> bank, std::span<const Document> dev_docs,
                      const SpanSet& dev_gold, std::span<const Document> selection_docs,
                      const SpanSet& selection_gold, const StackerOptions& options,
                      std::size_t jobs) {
  if (bank.empty()) throw ShapeMismatch("empty model bank");
  Selection out;
  if (bank.size() == 1) {
    out.best = single_model_ensemble(bank.front());
    out.candidates.push_back({out.best.id(), evaluate(out.best, selection_docs, selection_gold)});
    return out;
  }

  std::vector<EnsembleModel> candidates;
  const auto dev_tags = bank_predictions(bank, dev_docs, jobs);
  for (EnsembleMethod m : kMethodOrder) {
    for (GroupSelector g : kGroupOrder) candidates.push_back(EnsembleModel{m, {g, {}}, {}, {}});
  }
  parallel_for(candidates.size(), jobs, [&](std::size_t i) {
    candidates[i] = assemble(bank, candidates[i].method, candidates[i].group.selector, dev_tags,
                             dev_docs, dev_gold, options);
  });
  for (const auto& id : rank_by_f1(bank)) {
    candidates.push_back(single_model_ensemble(find_member(bank, id)));
  }

  // Selection-set member predictions once per bank model.
  const auto sel_tags = bank_predictions(bank, selection_docs, jobs);
  std::vector<MetricsReport> reports(candidates.size());
  parallel_for(candidates.size(), jobs, [&](std::size_t c) {
    SpanSet g, p;
    for (std::size_t d = 0; d < selection_docs.size(); ++d) {
      const Document& doc = selection_docs[d];
      const auto tags = combine(candidates[c], select_members(sel_tags[d], bank, candidates[c].group), doc);
      g[doc.id()] = spans_of(selection_gold, doc.id());
      p[doc.id()] = bio_to_spans(doc, tags, SpanSource::kMachine, candidates[c].id());
    }
    reports[c] = strict_entity_metrics(g, p);
  });
  std::size_t best = 0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    out.candidates.push_back({candidates[c].id(), reports[c]});
    if (reports[c].f1() > reports[best].f1()) best = c;
  }
  out.best = candidates[best];
  return out;
}

Json to_json(const EnsembleModel& e) {
  Json members = Json::array();
  for (const auto& m : e.members) members.push_back({{"tagger_id", m->id()}, {"file", m->id() + ".json"}});
  return Json{{"format_version", 1},
              {"id", e.id()},
              {"method", to_string(e.method)},
              {"group", {{"selector", to_string(e.group.selector)}, {"members", e.group.members}}},
              {"ranking", e.group.members},
              {"members", std::move(members)},
              {"stacker", e.stacker ? e.stacker->to_json() : Json(nullptr)}};
}

EnsembleModel ensemble_from_json(const Json& j, const std::filesystem::path& model_dir) {
  if (j.value("format_version", 0) != 1) throw FormatError("unsupported ensemble format_version");
  EnsembleModel e;
  const auto method = parse_ensemble_method(j.at("method").get<std::string>());
  const auto selector = parse_group_selector(j.at("group").at("selector").get<std::string>());
  if (!method || !selector) throw FormatError("unknown ensemble method or group");
  e.method = *method;
  e.group = {*selector, j.at("group").at("members").get<std::vector<std::string>>()};
  std::map<std::string, std::string> files;
  for (const auto& m : j.at("members")) {
    files[m.at("tagger_id").get<std::string>()] = m.at("file").get<std::string>();
  }
  for (const auto& id : e.group.members) {
    auto it = files.find(id);
    if (it == files.end()) throw FormatError("ensemble member '" + id + "' has no file");
    e.members.push_back(tagger_from_json(Json::parse(read_file(model_dir / it->second))));
  }
  if (const auto& s = j.at("stacker"); !s.is_null()) {
    e.stacker = StackingModel::from_json(s);
    if (e.stacker->num_members() != e.members.size()) {
      throw FormatError("stacker member count differs from the group");
    }
  }
  if (e.method != EnsembleMethod::kMajorityVote && !e.stacker) {
    throw FormatError("stacking ensemble without a stacker payload");
  }
  return e;
}

}  // namespace deid
