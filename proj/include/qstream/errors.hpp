// Copyright 2026 The qstream Authors
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

#ifndef QSTREAM_ERRORS_HPP_
#define QSTREAM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace qstream {

// Base of every error thrown by the library. The C API maps each subclass to
// a distinct status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition was violated by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Matrix dimensions do not fit the requested operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Integration, sampling or optimization produced an invalid value.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Operation not allowed in the current object state (e.g. step after done).
class UsageError : public Error {
 public:
  using Error::Error;
};

// File could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// File was readable but its content is malformed or incompatible.
class FormatError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& what) {
  if (!condition) throw ContractViolation(what);
}

}  // namespace qstream

#endif  // QSTREAM_ERRORS_HPP_
