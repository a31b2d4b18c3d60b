// Copyright 2026 The srdet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
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

namespace srdet {

// Root of every error the library throws on purpose. The CLI maps
// NumericError to exit code 3 and every other Error to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Value outside an operation's domain. `index` is the flat element index of
// the offending value when there is one.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, std::size_t index = kNoIndex)
      : Error(what), index_(index) {}

  static constexpr std::size_t kNoIndex = static_cast<std::size_t>(-1);
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

// Caller broke an API precondition (e.g. backward() on a non-scalar).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A loss or activation went non-finite. `op` names the first recorded
// operation whose output contained NaN/Inf.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::string op)
      : Error(what), op_(std::move(op)) {}

  const std::string& op() const { return op_; }

 private:
  std::string op_;
};

// Configuration or manifest content that fails validation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace srdet
