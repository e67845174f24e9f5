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


// Exact first-order Viterbi decoding over a dense lattice.

#ifndef DEID_VITERBI_HPP_
#define DEID_VITERBI_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace deid {

// Scores for n positions over k labels. Illegal moves carry -infinity.
struct Lattice {
  std::size_t n = 0;
  std::size_t k = 0;
  std::vector<double> emissions;    // n x k, row per position
  std::vector<double> transitions;  // k x k, [prev * k + next]
  std::vector<double> start;        // k

  double emission(std::size_t i, std::size_t y) const { return emissions[i * k + y]; }
  double transition(std::size_t p, std::size_t y) const { return transitions[p * k + y]; }
};

struct ViterbiResult {
  std::vector<std::size_t> path;
  double score = 0;
};

// Highest-scoring label path. Score is accumulated as
// start[y0] + e[0][y0], then (score + t[prev][y]) + e[i][y] per position.
// Ties go to the lower label index.
ViterbiResult viterbi(const Lattice& lattice);

// Score of a fixed path under the same summation order.
double path_score(const Lattice& lattice, std::span<const std::size_t> path);

}  // namespace deid

#endif  // DEID_VITERBI_HPP_
