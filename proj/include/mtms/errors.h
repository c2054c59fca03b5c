// Copyright 2026 The MTMS Toolkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MTMS_ERRORS_H
#define MTMS_ERRORS_H

#include <stdexcept>

namespace mtms {

/// Input outside an operation's domain (bad parameters, malformed data).
class DomainError : public std::invalid_argument {
   public:
    using std::invalid_argument::invalid_argument;
};

/// Fock truncation too small for the requested motional state.
class TruncationError : public DomainError {
   public:
    using DomainError::DomainError;
};

/// A numerical procedure failed to converge or produced non-finite values.
class NumericError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace mtms

#endif
