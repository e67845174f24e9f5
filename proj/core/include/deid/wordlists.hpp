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

// Word lists compiled in from core/data/wordlists/*.txt. Invented, no real
// person data.

#ifndef DEID_WORDLISTS_HPP_
#define DEID_WORDLISTS_HPP_

#include <span>
#include <string>

namespace deid::wordlists {

std::span<const std::string> first_names();
std::span<const std::string> last_names();
std::span<const std::string> streets();
std::span<const std::string> street_types();
std::span<const std::string> suburbs();
// Surnames that appear in medical terms (Parkinson disease, Epley manoeuvre).
std::span<const std::string> eponyms();

}  // namespace deid::wordlists

#endif  // DEID_WORDLISTS_HPP_
