// Copyright 2026 The sgzsl Authors
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

#ifndef SGZSL_ERRORS_H_
#define SGZSL_ERRORS_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace sgzsl {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape disagreement between matrices, models, or gradients.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value. `field()` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Malformed input file. The message carries path and line.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Inconsistent dataset contents (unknown class, empty class, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Regularizer inputs with too few rows to estimate moments.
class DegenerateBatchError : public Error {
 public:
  using Error::Error;
};

// Wire-level failure: framing, schema, ordering, handshake mismatch.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Unknown envelope version or message type tag.
class ProtocolVersionError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// A required field is missing or has the wrong JSON type.
class SchemaError : public ProtocolError {
 public:
  SchemaError(std::string field, const std::string& message)
      : ProtocolError("field '" + field + "': " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Sequence number did not strictly increase within a session.
class OrderingError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// Transport-level failure (socket errors, peer hang-up mid-frame).
class ConnectionError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// The sentinel's request budget is spent.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace sgzsl

#endif  // SGZSL_ERRORS_H_
