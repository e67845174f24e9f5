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

#ifndef DEID_UTF8_HPP_
#define DEID_UTF8_HPP_

#include <cstddef>
#include <string_view>
#include <vector>

namespace deid::utf8 {

struct ScalarValue {
  char32_t value;
  std::size_t byte_offset;
};

// Malformed sequences decode one byte at a time as U+FFFD.
std::vector<ScalarValue> decode(std::string_view text);

std::size_t length(std::string_view text);

bool is_space(char32_t c);
bool is_alnum(char32_t c);

}  // namespace deid::utf8

#endif  // DEID_UTF8_HPP_
