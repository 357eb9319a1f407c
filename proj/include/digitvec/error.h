// digitvec/error.h

// Copyright 2026 The digitvec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DIGITVEC_ERROR_H_
#define DIGITVEC_ERROR_H_

#include <stdexcept>
#include <string>

namespace digitvec {

/// Base class of every error raised by the toolkit.  Callers that only care
/// about success/failure catch this; tests and the CLI match on the subclass.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DIGITVEC_DECLARE_ERROR(Name)            \
  class Name : public Error {                   \
   public:                                      \
    using Error::Error;                         \
  }

DIGITVEC_DECLARE_ERROR(EmptyUtterance);
DIGITVEC_DECLARE_ERROR(ConfigError);
DIGITVEC_DECLARE_ERROR(ShapeError);
DIGITVEC_DECLARE_ERROR(NumericalError);
DIGITVEC_DECLARE_ERROR(EmptyInput);
DIGITVEC_DECLARE_ERROR(AlignmentInfeasible);
DIGITVEC_DECLARE_ERROR(DegenerateScatter);
DIGITVEC_DECLARE_ERROR(ZeroVector);
DIGITVEC_DECLARE_ERROR(IncompatibleTrial);
DIGITVEC_DECLARE_ERROR(TrialMismatch);
DIGITVEC_DECLARE_ERROR(DegenerateTrialSet);
DIGITVEC_DECLARE_ERROR(ParseError);
DIGITVEC_DECLARE_ERROR(VersionError);
DIGITVEC_DECLARE_ERROR(CorruptBundle);
DIGITVEC_DECLARE_ERROR(IoError);

#undef DIGITVEC_DECLARE_ERROR

/// Raised when a digit has no training data.
class MissingDigit : public Error {
 public:
  explicit MissingDigit(int digit)
      : Error("no training utterance contains digit " + std::to_string(digit)),
        digit_(digit) {}
  int digit() const { return digit_; }

 private:
  int digit_;
};

}  // namespace digitvec

#endif  // DIGITVEC_ERROR_H_
