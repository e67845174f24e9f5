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
#include <cmath>
#include <map>
#include <numeric>

#include "deid/ensemble.hpp"
#include "deid/errors.hpp"
#include "deid/rng.hpp"
#include "lexicon.hpp"

namespace deid {

namespace {

constexpr std::size_t K = kNumTags;
constexpr double kTreeLambda = 1.0;

std::size_t argmax(const std::array<double, K>& s) {
  std::size_t best = 0;
  for (std::size_t y = 1; y < K; ++y) {
    if (s[y] > s[best]) best = y;
  }
  return best;
}

}  // namespace

std::string_view to_string(StackAlgorithm a) {
  switch (a) {
    case StackAlgorithm::kLogisticRegression: return "logistic_regression";
    case StackAlgorithm::kLinearSvm: return "linear_svm";
    case StackAlgorithm::kGradientBoostedTrees: return "gradient_boosted_trees";
  }
  return "logistic_regression";
}

std::optional<StackAlgorithm> parse_stack_algorithm(std::string_view name) {
  for (auto a : {StackAlgorithm::kLogisticRegression, StackAlgorithm::kLinearSvm,
                 StackAlgorithm::kGradientBoostedTrees}) {
    if (to_string(a) == name) return a;
  }
  return std::nullopt;
}

std::size_t shape_class(std::string_view token) {
  if (token.empty()) return 3;
  const unsigned char c = static_cast<unsigned char>(token[0]);
  if (c >= 'A' && c <= 'Z') return 0;
  if (internal::is_digits(token)) return 1;
  if (c >= 'a' && c <= 'z') return 2;
  return 3;
}

double RegressionTree::eval(std::span<const std::uint32_t> active) const {
  std::size_t n = 0;
  while (nodes[n].feature >= 0) {
    const auto f = static_cast<std::uint32_t>(nodes[n].feature);
    const bool present = std::binary_search(active.begin(), active.end(), f);
    n = static_cast<std::size_t>(present ? nodes[n].right : nodes[n].left);
  }
  return nodes[n].value;
}

StackingModel::StackingModel(StackAlgorithm algorithm, std::size_t num_members,
                             bool word_shape)
    : algorithm_(algorithm), num_members_(num_members), word_shape_(word_shape) {}

std::vector<std::uint32_t> StackingModel::active_features(std::span<const BioTag> votes,
                                                          std::size_t shape) const {
  if (votes.size() != num_members_) {
    throw ShapeMismatch("stacker expects " + std::to_string(num_members_) + " votes, got " +
                        std::to_string(votes.size()));
  }
  std::vector<std::uint32_t> active;
  active.reserve(votes.size() + 1);
  for (std::size_t m = 0; m < votes.size(); ++m) {
    active.push_back(static_cast<std::uint32_t>(m * K + index(votes[m])));
  }
  if (word_shape_) active.push_back(static_cast<std::uint32_t>(K * num_members_ + shape));
  return active;
}

std::array<double, kNumTags> StackingModel::scores(std::span<const BioTag> votes,
                                                   std::size_t shape) const {
  const auto active = active_features(votes, shape);
  std::array<double, K> s{};
  if (algorithm_ == StackAlgorithm::kGradientBoostedTrees) {
    for (std::size_t y = 0; y < K; ++y) {
      s[y] = base_[y];
      for (const auto& t : trees_[y]) s[y] += t.eval(active);
    }
    return s;
  }
  const std::size_t row = feature_dim() + 1;
  for (std::size_t y = 0; y < K; ++y) {
    const double* w = &weights_[y * row];
    double z = w[row - 1];
    for (std::uint32_t a : active) z += w[a];
    s[y] = z;
  }
  return s;
}

BioTag StackingModel::predict(std::span<const BioTag> votes, std::size_t shape) const {
  return tag_at(argmax(scores(votes, shape)));
}

namespace {

struct Prepared {
  std::vector<std::vector<std::uint32_t>> active;
  std::vector<std::size_t> gold;
};

void train_linear(std::vector<double>& w, std::size_t row, const Prepared& data,
                  StackAlgorithm algorithm, const StackerOptions& o) {
  const double lr = o.learning_rate;
  const std::size_t n = data.active.size();
  const std::size_t width = n == 0 ? 0 : data.active.front().size();
  std::vector<std::uint32_t> flat;
  flat.reserve(n * width);
  for (const auto& a : data.active) flat.insert(flat.end(), a.begin(), a.end());
  std::vector<std::size_t> order(n);
  std::array<double, K> z{};
  for (std::size_t epoch = 0; epoch < o.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    Rng rng(mix_seed(o.seed, epoch));
    rng.shuffle(std::span(order));
    for (std::size_t i : order) {
      const std::uint32_t* active = &flat[i * width];
      const std::size_t gold = data.gold[i];
      for (std::size_t y = 0; y < K; ++y) {
        const double* wy = &w[y * row];
        double s = wy[row - 1];
        for (std::size_t a = 0; a < width; ++a) s += wy[active[a]];
        z[y] = s;
      }
      if (algorithm == StackAlgorithm::kLogisticRegression) {
        const double m = *std::max_element(z.begin(), z.end());
        double sum = 0;
        for (double& v : z) sum += (v = std::exp(v - m));
        const double inv = 1 / sum;
        for (std::size_t y = 0; y < K; ++y) z[y] = z[y] * inv - (y == gold ? 1.0 : 0.0);
      } else {
        for (std::size_t y = 0; y < K; ++y) {
          const double t = y == gold ? 1.0 : -1.0;
          z[y] = t * z[y] < 1.0 ? -t : 0.0;
        }
      }
      // z now holds the (sub)gradient of the loss w.r.t. each tag's score.
      for (std::size_t y = 0; y < K; ++y) {
        const double g = z[y];
        double* wy = &w[y * row];
        for (std::size_t a = 0; a < width; ++a) {
          double& x = wy[active[a]];
          x -= lr * (g + o.l2 * x);
        }
        wy[row - 1] -= lr * g;
      }
    }
  }
}

// Distinct feature patterns with per-tag counts.
struct Pattern {
  std::vector<std::uint32_t> active;
  std::array<double, K> count{};
  double total = 0;
};

std::vector<Pattern> group_patterns(const Prepared& data) {
  std::map<std::vector<std::uint32_t>, std::array<double, K>> grouped;
  for (std::size_t i = 0; i < data.active.size(); ++i) {
    grouped[data.active[i]][data.gold[i]] += 1;
  }
  std::vector<Pattern> out;
  for (auto& [active, count] : grouped) {
    Pattern p{active, count, 0};
    for (double c : count) p.total += c;
    out.push_back(std::move(p));
  }
  return out;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<Pattern>& patterns, const std::vector<double>& g,
              const std::vector<double>& h, std::size_t dim, const StackerOptions& o)
      : patterns_(patterns), g_(g), h_(h), dim_(dim), o_(o) {}

  RegressionTree build() {
    std::vector<std::size_t> all(patterns_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(tree_);
  }

 private:
  std::int32_t grow(const std::vector<std::size_t>& idx, std::size_t depth) {
    double G = 0, H = 0;
    for (std::size_t i : idx) {
      G += g_[i];
      H += h_[i];
    }
    const auto at = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[static_cast<std::size_t>(at)].value = -o_.shrinkage * G / (H + kTreeLambda);
    if (depth >= o_.max_depth || idx.size() < 2) return at;

    std::vector<double> gf(dim_, 0.0), hf(dim_, 0.0);
    std::vector<std::size_t> nf(dim_, 0);
    for (std::size_t i : idx) {
      for (std::uint32_t a : patterns_[i].active) {
        gf[a] += g_[i];
        hf[a] += h_[i];
        ++nf[a];
      }
    }
    const double parent = G * G / (H + kTreeLambda);
    double best_gain = 1e-12;
    std::int32_t best = -1;
    for (std::size_t f = 0; f < dim_; ++f) {
      if (nf[f] == 0 || nf[f] == idx.size()) continue;
      const double gl = G - gf[f], hl = H - hf[f];
      const double gain =
          gl * gl / (hl + kTreeLambda) + gf[f] * gf[f] / (hf[f] + kTreeLambda) - parent;
      if (gain > best_gain) {
        best_gain = gain;
        best = static_cast<std::int32_t>(f);
      }
    }
    if (best < 0) return at;
    std::vector<std::size_t> left, right;
    for (std::size_t i : idx) {
      const auto& a = patterns_[i].active;
      (std::binary_search(a.begin(), a.end(), static_cast<std::uint32_t>(best)) ? right : left)
          .push_back(i);
    }
    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t r = grow(right, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(at)];
    node.feature = best;
    node.left = l;
    node.right = r;
    node.value = 0;
    return at;
  }

  const std::vector<Pattern>& patterns_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  std::size_t dim_;
  const StackerOptions& o_;
  RegressionTree tree_;
};

}  // namespace

StackingModel train_stacker(std::span<const StackSample> samples, std::size_t num_members,
                            StackAlgorithm algorithm, const StackerOptions& options) {
  if (samples.empty()) throw EmptyDev("no dev tokens to train the stacker on");
  StackingModel model(algorithm, num_members, options.word_shape_feature);
  Prepared data;
  data.active.reserve(samples.size());
  for (const StackSample& s : samples) {
    data.active.push_back(model.active_features(s.votes, s.shape));
    data.gold.push_back(index(s.gold));
  }
  const std::size_t dim = model.feature_dim();

  if (algorithm != StackAlgorithm::kGradientBoostedTrees) {
    model.weights_.assign(K * (dim + 1), 0.0);
    train_linear(model.weights_, dim + 1, data, algorithm, options);
    return model;
  }

  const auto patterns = group_patterns(data);
  const double n = static_cast<double>(samples.size());
  std::vector<double> f(patterns.size()), g(patterns.size()), h(patterns.size());
  for (std::size_t y = 0; y < K; ++y) {
    double pos = 0;
    for (const auto& p : patterns) pos += p.count[y];
    const double prior = std::clamp(pos / n, 1e-6, 1 - 1e-6);
    model.base_[y] = std::log(prior / (1 - prior));
    std::fill(f.begin(), f.end(), model.base_[y]);
    for (std::size_t round = 0; round < options.rounds; ++round) {
      for (std::size_t i = 0; i < patterns.size(); ++i) {
        const double p = 1 / (1 + std::exp(-f[i]));
        g[i] = patterns[i].total * p - patterns[i].count[y];
        h[i] = patterns[i].total * p * (1 - p);
      }
      RegressionTree tree = TreeBuilder(patterns, g, h, dim, options).build();
      for (std::size_t i = 0; i < patterns.size(); ++i) f[i] += tree.eval(patterns[i].active);
      model.trees_[y].push_back(std::move(tree));
    }
  }
  return model;
}

Json StackingModel::to_json() const {
  Json j{{"algorithm", to_string(algorithm_)},
         {"num_members", num_members_},
         {"word_shape", word_shape_}};
  if (algorithm_ != StackAlgorithm::kGradientBoostedTrees) {
    j["weights"] = weights_;
    return j;
  }
  j["base"] = base_;
  Json trees = Json::array();
  for (const auto& per_tag : trees_) {
    Json list = Json::array();
    for (const auto& t : per_tag) {
      Json nodes = Json::array();
      for (const auto& nd : t.nodes) nodes.push_back({nd.feature, nd.left, nd.right, nd.value});
      list.push_back(std::move(nodes));
    }
    trees.push_back(std::move(list));
  }
  j["trees"] = std::move(trees);
  return j;
}

StackingModel StackingModel::from_json(const Json& j) {
  const auto algorithm = parse_stack_algorithm(j.at("algorithm").get<std::string>());
  if (!algorithm) throw FormatError("unknown stacking algorithm");
  StackingModel m(*algorithm, j.at("num_members").get<std::size_t>(),
                  j.at("word_shape").get<bool>());
  if (*algorithm != StackAlgorithm::kGradientBoostedTrees) {
    m.weights_ = j.at("weights").get<std::vector<double>>();
    if (m.weights_.size() != K * (m.feature_dim() + 1)) {
      throw FormatError("stacker weight dimension mismatch");
    }
    return m;
  }
  m.base_ = j.at("base").get<std::array<double, K>>();
  const Json& trees = j.at("trees");
  if (trees.size() != K) throw FormatError("stacker needs one tree list per tag");
  for (std::size_t y = 0; y < K; ++y) {
    for (const auto& nodes : trees[y]) {
      RegressionTree t;
      for (const auto& nd : nodes) {
        t.nodes.push_back({nd.at(0).get<std::int32_t>(), nd.at(1).get<std::int32_t>(),
                           nd.at(2).get<std::int32_t>(), nd.at(3).get<double>()});
      }
      if (t.nodes.empty()) throw FormatError("empty regression tree");
      m.trees_[y].push_back(std::move(t));
    }
  }
  return m;
}

}  // namespace deid
