// Copyright 2026 The modular-ppt Authors
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace modular_ppt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// Operand dimensions do not fit the requested bipartite or block layout.
class ShapeError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "shape"; }
};

/// A precondition or type invariant was violated.
class ContractError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract"; }
};

/// A dimension exceeds the configured maximum.
class DimensionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "dimension"; }
};

/// The reference density matrix is not invertible.
class FaithfulnessError : public ContractError {
 public:
  FaithfulnessError(std::size_t index, double eigenvalue, double threshold)
      : ContractError("density matrix is not faithful: eigenvalue #" +
                      std::to_string(index) + " = " +
                      std::to_string(eigenvalue) + " is below " +
                      std::to_string(threshold)),
        index_(index),
        eigenvalue_(eigenvalue) {}
  const char* kind() const noexcept override { return "faithfulness"; }
  std::size_t index() const noexcept { return index_; }
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  std::size_t index_;
  double eigenvalue_;
};

/// A modular power would overflow double precision.
class ConditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "condition"; }
};

/// Two independent evaluation routes disagree beyond tolerance.
class ConsistencyError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "consistency"; }
};

/// A file or command-line value could not be parsed; field() names the culprit.
class InputError : public Error {
 public:
  InputError(std::string field, const std::string& message)
      : Error(field + ": " + message), field_(std::move(field)) {}
  const char* kind() const noexcept override { return "input"; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace modular_ppt
