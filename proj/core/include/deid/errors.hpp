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

#ifndef DEID_ERRORS_HPP_
#define DEID_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace deid {

// Base class of every error raised by the library. The kind() string is
// stable and is what the CLI and the HTTP service report to callers.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define DEID_DEFINE_ERROR(Name)                                      \
  class Name : public Error {                                        \
   public:                                                           \
    explicit Name(const std::string& what) : Error(#Name, what) {}   \
  }

// text-core
DEID_DEFINE_ERROR(OverlapError);
DEID_DEFINE_ERROR(CrossLineError);
DEID_DEFINE_ERROR(ShapeError);
DEID_DEFINE_ERROR(InvalidSpan);
DEID_DEFINE_ERROR(FormatError);

// annotation
DEID_DEFINE_ERROR(RevisionConflict);
DEID_DEFINE_ERROR(EmptyDomain);
DEID_DEFINE_ERROR(UnresolvedDisagreement);
DEID_DEFINE_ERROR(NotFound);
DEID_DEFINE_ERROR(ConfirmedRecord);

// datasets
DEID_DEFINE_ERROR(EmptyCorpus);
DEID_DEFINE_ERROR(BadK);
DEID_DEFINE_ERROR(BadConfig);

// taggers
DEID_DEFINE_ERROR(UntrainedModel);
DEID_DEFINE_ERROR(EmptyTrainingSet);
DEID_DEFINE_ERROR(MissingPrediction);

// ensemble
DEID_DEFINE_ERROR(ShapeMismatch);
DEID_DEFINE_ERROR(EmptyDev);

// metrics
DEID_DEFINE_ERROR(TooFewFolds);

#undef DEID_DEFINE_ERROR

}  // namespace deid

#endif  // DEID_ERRORS_HPP_
