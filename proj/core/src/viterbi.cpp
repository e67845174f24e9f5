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


#include "deid/viterbi.hpp"

#include <limits>

namespace deid {

ViterbiResult viterbi(const Lattice& lat) {
  ViterbiResult out;
  if (lat.n == 0 || lat.k == 0) return out;
  const std::size_t n = lat.n, k = lat.k;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> delta(k), next(k);
  std::vector<std::size_t> back(n * k, 0);
  for (std::size_t y = 0; y < k; ++y) delta[y] = lat.start[y] + lat.emission(0, y);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t y = 0; y < k; ++y) {
      double best = kNegInf;
      std::size_t arg = 0;
      for (std::size_t p = 0; p < k; ++p) {
        const double s = delta[p] + lat.transition(p, y);
        if (s > best) {
          best = s;
          arg = p;
        }
      }
      next[y] = best + lat.emission(i, y);
      back[i * k + y] = arg;
    }
    delta.swap(next);
  }
  std::size_t last = 0;
  for (std::size_t y = 1; y < k; ++y) {
    if (delta[y] > delta[last]) last = y;
  }
  out.score = delta[last];
  out.path.assign(n, 0);
  out.path[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) out.path[i - 1] = back[i * k + out.path[i]];
  return out;
}

double path_score(const Lattice& lat, std::span<const std::size_t> path) {
  if (path.empty()) return 0;
  double s = lat.start[path[0]] + lat.emission(0, path[0]);
  for (std::size_t i = 1; i < path.size(); ++i) {
    s = (s + lat.transition(path[i - 1], path[i])) + lat.emission(i, path[i]);
  }
  return s;
}

}  // namespace deid
