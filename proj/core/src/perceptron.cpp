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


#include <algorithm>
#include <limits>
#include <numeric>

#include "deid/errors.hpp"
#include "deid/rng.hpp"
#include "deid/taggers.hpp"
#include "deid/utf8.hpp"
#include "lexicon.hpp"

namespace deid {

namespace {

constexpr std::size_t K = kNumTags;

// Scalar-aligned byte cut points of s.
std::vector<std::size_t> cut_points(std::string_view s) {
  std::vector<std::size_t> cuts;
  for (const auto& sv : utf8::decode(s)) cuts.push_back(sv.byte_offset);
  cuts.push_back(s.size());
  return cuts;
}

void gazetteer_features(std::vector<std::string>& out, const std::string& prefix,
                        const std::string& token) {
  const internal::Lexicon& lex = internal::lexicon();
  if (lex.first_names.count(token)) out.push_back(prefix + "first");
  if (lex.last_names.count(token)) out.push_back(prefix + "last");
  if (lex.streets.count(token)) out.push_back(prefix + "street");
  if (lex.street_types.count(token)) out.push_back(prefix + "stype");
  if (lex.suburb_words.count(token)) out.push_back(prefix + "suburb");
  if (lex.eponym_words.count(token)) out.push_back(prefix + "eponym");
}

}  // namespace

std::string_view to_string(FeatureSet fs) {
  return fs == FeatureSet::kRich ? "rich" : "compact";
}

std::optional<FeatureSet> parse_feature_set(std::string_view name) {
  if (name == "rich") return FeatureSet::kRich;
  if (name == "compact") return FeatureSet::kCompact;
  return std::nullopt;
}

std::string word_shape(std::string_view token) {
  std::string out;
  for (unsigned char c : token) {
    char s;
    if (c >= 'A' && c <= 'Z') {
      s = 'X';
    } else if (c >= 'a' && c <= 'z') {
      s = 'x';
    } else if (c >= '0' && c <= '9') {
      s = 'd';
    } else if (c >= 0x80) {
      s = 'u';
    } else {
      s = static_cast<char>(c);
    }
    if (out.empty() || out.back() != s) out += s;
  }
  return out;
}

std::vector<std::string> extract_features(std::span<const std::string> tokens,
                                          std::size_t i, FeatureSet fs) {
  const bool rich = fs == FeatureSet::kRich;
  const std::string& tok = tokens[i];
  const std::string w = internal::ascii_lower(tok);
  auto word_at = [&](std::ptrdiff_t j) -> std::string {
    if (j < 0) return "<s>";
    if (static_cast<std::size_t>(j) >= tokens.size()) return "</s>";
    return internal::ascii_lower(tokens[static_cast<std::size_t>(j)]);
  };
  const auto pos = static_cast<std::ptrdiff_t>(i);

  std::vector<std::string> f;
  f.reserve(rich ? 40 : 16);
  f.push_back("b");
  f.push_back("w=" + w);
  f.push_back("sh=" + word_shape(tok));
  const auto cuts = cut_points(w);
  const std::size_t n = cuts.size() - 1;
  const std::size_t max_affix = rich ? 4 : 3;
  for (std::size_t a = 1; a <= std::min(max_affix, n); ++a) {
    if (rich) f.push_back("p" + std::to_string(a) + "=" + w.substr(0, cuts[a]));
    f.push_back("s" + std::to_string(a) + "=" + w.substr(cuts[n - a]));
  }
  if (internal::is_digits(tok)) {
    f.push_back("dig");
    f.push_back("dlen=" + std::to_string(std::min<std::size_t>(tok.size(), 12)));
  } else if (std::any_of(tok.begin(), tok.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    f.push_back("hasdig");
  }
  f.push_back("w-1=" + word_at(pos - 1));
  f.push_back("w+1=" + word_at(pos + 1));
  gazetteer_features(f, "gz=", tok);
  if (rich) {
    f.push_back("w-2=" + word_at(pos - 2));
    f.push_back("w+2=" + word_at(pos + 2));
    f.push_back("w-1|w=" + word_at(pos - 1) + "|" + w);
    f.push_back("w-2|w-1=" + word_at(pos - 2) + "|" + word_at(pos - 1));
    if (i > 0) {
      f.push_back("sh-1=" + word_shape(tokens[i - 1]));
      gazetteer_features(f, "gz-1=", tokens[i - 1]);
    }
    if (i + 1 < tokens.size()) {
      f.push_back("sh+1=" + word_shape(tokens[i + 1]));
      gazetteer_features(f, "gz+1=", tokens[i + 1]);
    }
    f.push_back("first=" + std::string(i == 0 ? "1" : "0"));
  }
  return f;
}

void apply_bio_constraints(Lattice& lat) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < lat.k; ++y) {
    if (!is_legal_transition(std::nullopt, tag_at(y))) lat.start[y] = kNegInf;
    for (std::size_t p = 0; p < lat.k; ++p) {
      if (!is_legal_transition(tag_at(p), tag_at(y))) lat.transitions[p * lat.k + y] = kNegInf;
    }
  }
}

namespace {

using FeatureIds = std::vector<std::vector<std::uint32_t>>;  // per position

Lattice make_lattice(const FeatureIds& ids, const std::vector<double>& emission,
                     const std::vector<double>& transition, const std::vector<double>& start) {
  Lattice lat;
  lat.n = ids.size();
  lat.k = K;
  lat.emissions.assign(lat.n * K, 0.0);
  for (std::size_t i = 0; i < lat.n; ++i) {
    double* row = &lat.emissions[i * K];
    for (std::uint32_t f : ids[i]) {
      const double* w = &emission[static_cast<std::size_t>(f) * K];
      for (std::size_t y = 0; y < K; ++y) row[y] += w[y];
    }
  }
  lat.transitions = transition;
  lat.start = start;
  apply_bio_constraints(lat);
  return lat;
}

TagSequence to_tags(const std::vector<std::size_t>& path) {
  TagSequence tags(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) tags[i] = tag_at(path[i]);
  return tags;
}

}  // namespace

PerceptronTagger::PerceptronTagger(std::string id, FeatureSet fs)
    : LineTagger(std::move(id), TaggerKind::kPerceptron),
      feature_set_(fs),
      transition_(K * K, 0.0),
      start_(K, 0.0) {}

Lattice PerceptronTagger::lattice(std::span<const std::string> tokens) const {
  FeatureIds ids(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (const auto& name : extract_features(tokens, i, feature_set_)) {
      if (auto it = feature_index_.find(name); it != feature_index_.end()) {
        ids[i].push_back(it->second);
      }
    }
  }
  return make_lattice(ids, emission_, transition_, start_);
}

TagSequence PerceptronTagger::tag_tokens(std::span<const std::string> tokens) const {
  if (!trained_) throw UntrainedModel("perceptron '" + id() + "' has not been trained");
  if (tokens.empty()) return {};
  return to_tags(viterbi(lattice(tokens)).path);
}

Json PerceptronTagger::parameters() const {
  // Features sorted by name so the file is independent of hash order.
  std::vector<std::pair<std::string, std::uint32_t>> names(feature_index_.begin(),
                                                           feature_index_.end());
  std::sort(names.begin(), names.end());
  Json emissions = Json::object();
  for (const auto& [name, f] : names) {
    Json row = Json::array();
    for (std::size_t y = 0; y < K; ++y) {
      const double w = emission_[f * K + y];
      if (w != 0.0) row.push_back(Json::array({to_string(tag_at(y)), w}));
    }
    if (!row.empty()) emissions[name] = std::move(row);
  }
  return Json{{"feature_set", to_string(feature_set_)},
              {"trained", trained_},
              {"start", start_},
              {"transitions", transition_},
              {"emissions", std::move(emissions)}};
}

std::shared_ptr<PerceptronTagger> PerceptronTagger::from_parameters(std::string id,
                                                                    const Json& p) {
  const auto fs = parse_feature_set(p.at("feature_set").get<std::string>());
  if (!fs) throw FormatError("unknown feature_set in perceptron model");
  auto model = std::make_shared<PerceptronTagger>(std::move(id), *fs);
  model->trained_ = p.value("trained", true);
  model->start_ = p.at("start").get<std::vector<double>>();
  model->transition_ = p.at("transitions").get<std::vector<double>>();
  if (model->start_.size() != K || model->transition_.size() != K * K) {
    throw FormatError("perceptron model has wrong transition dimensions");
  }
  for (const auto& [name, row] : p.at("emissions").items()) {
    const auto f = static_cast<std::uint32_t>(model->feature_index_.size());
    model->feature_index_.emplace(name, f);
    model->emission_.resize(model->emission_.size() + K, 0.0);
    for (const auto& cell : row) {
      const auto tag = parse_tag(cell.at(0).get<std::string>());
      if (!tag) throw FormatError("unknown tag in perceptron model");
      model->emission_[f * K + index(*tag)] = cell.at(1).get<double>();
    }
  }
  return model;
}

// Averaged perceptron with the usual lazy trick: alongside each weight w keep
// u = sum of (step * update); the average after c steps is w - u / c.
class PerceptronTrainer {
 public:
  PerceptronTrainer(std::string id, const PerceptronOptions& options)
      : model_(std::make_shared<PerceptronTagger>(std::move(id), options.feature_set)),
        options_(options) {}

  std::shared_ptr<PerceptronTagger> run(const LabeledCorpus& train) {
    std::vector<FeatureIds> lines;
    std::vector<const TagSequence*> gold;
    lines.reserve(train.entries.size());
    for (const auto& e : train.entries) {
      if (e.sequence.tokens.empty()) continue;
      FeatureIds ids(e.sequence.tokens.size());
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (auto& name : extract_features(e.sequence.tokens, i, options_.feature_set)) {
          ids[i].push_back(intern(std::move(name)));
        }
      }
      lines.push_back(std::move(ids));
      gold.push_back(&e.sequence.tags);
    }
    const std::size_t F = model_->feature_index_.size();
    w_em_.assign(F * K, 0.0);
    u_em_.assign(F * K, 0.0);
    w_tr_.assign(K * K, 0.0);
    u_tr_.assign(K * K, 0.0);
    w_st_.assign(K, 0.0);
    u_st_.assign(K, 0.0);

    std::vector<std::size_t> order(lines.size());
    double step = 1;
    for (std::size_t epoch = 0; epoch < options_.epochs; ++epoch) {
      std::iota(order.begin(), order.end(), 0);
      Rng rng(mix_seed(options_.seed, epoch));
      rng.shuffle(std::span(order));
      for (std::size_t idx : order) {
        const Lattice lat = make_lattice(lines[idx], w_em_, w_tr_, w_st_);
        const TagSequence pred = to_tags(viterbi(lat).path);
        if (pred != *gold[idx]) update(lines[idx], *gold[idx], pred, step);
        step += 1;
      }
    }

    model_->emission_.resize(F * K);
    for (std::size_t i = 0; i < F * K; ++i) model_->emission_[i] = w_em_[i] - u_em_[i] / step;
    for (std::size_t i = 0; i < K * K; ++i) model_->transition_[i] = w_tr_[i] - u_tr_[i] / step;
    for (std::size_t i = 0; i < K; ++i) model_->start_[i] = w_st_[i] - u_st_[i] / step;
    prune_unused();
    model_->trained_ = true;
    return model_;
  }

 private:
  std::uint32_t intern(std::string name) {
    auto [it, inserted] = model_->feature_index_.try_emplace(
        std::move(name), static_cast<std::uint32_t>(model_->feature_index_.size()));
    return it->second;
  }

  void bump(std::vector<double>& w, std::vector<double>& u, std::size_t at, double d,
            double step) {
    w[at] += d;
    u[at] += step * d;
  }

  void update(const FeatureIds& ids, const TagSequence& gold, const TagSequence& pred,
              double step) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t g = index(gold[i]), p = index(pred[i]);
      if (g != p) {
        for (std::uint32_t f : ids[i]) {
          bump(w_em_, u_em_, f * K + g, 1.0, step);
          bump(w_em_, u_em_, f * K + p, -1.0, step);
        }
      }
      if (i == 0) {
        if (g != p) {
          bump(w_st_, u_st_, g, 1.0, step);
          bump(w_st_, u_st_, p, -1.0, step);
        }
      } else {
        const std::size_t gp = index(gold[i - 1]), pp = index(pred[i - 1]);
        if (gp != pp || g != p) {
          bump(w_tr_, u_tr_, gp * K + g, 1.0, step);
          bump(w_tr_, u_tr_, pp * K + p, -1.0, step);
        }
      }
    }
  }

  // Drops features whose averaged weights are all zero.
  void prune_unused() {
    auto& index = model_->feature_index_;
    auto& em = model_->emission_;
    std::vector<std::pair<std::string, std::uint32_t>> kept;
    for (const auto& [name, f] : index) {
      const double* row = &em[static_cast<std::size_t>(f) * K];
      if (std::any_of(row, row + K, [](double w) { return w != 0.0; })) kept.emplace_back(name, f);
    }
    std::sort(kept.begin(), kept.end());
    std::vector<double> packed(kept.size() * K);
    std::unordered_map<std::string, std::uint32_t> next;
    next.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
      std::copy_n(&em[static_cast<std::size_t>(kept[i].second) * K], K, &packed[i * K]);
      next.emplace(std::move(kept[i].first), static_cast<std::uint32_t>(i));
    }
    index = std::move(next);
    em = std::move(packed);
  }

  std::shared_ptr<PerceptronTagger> model_;
  PerceptronOptions options_;
  std::vector<double> w_em_, u_em_, w_tr_, u_tr_, w_st_, u_st_;
};

std::shared_ptr<PerceptronTagger> train_perceptron(std::string id,
                                                   const LabeledCorpus& train,
                                                   const PerceptronOptions& options) {
  const bool any = std::any_of(train.entries.begin(), train.entries.end(),
                               [](const CorpusEntry& e) { return !e.sequence.tokens.empty(); });
  if (!any) throw EmptyTrainingSet("training corpus '" + train.name + "' has no tokens");
  return PerceptronTrainer(std::move(id), options).run(train);
}

}  // namespace deid
