// Copyright 2026 The zoopt Authors.
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

#ifndef ZOOPT_ERROR_HPP_
#define ZOOPT_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zoopt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A loss evaluation returned NaN or infinity. Parameters are restored to the
// pre-estimate point before this is thrown.
class NonFiniteLoss : public Error {
 public:
  using Error::Error;
};

class NonFiniteUpdate : public Error {
 public:
  using Error::Error;
};

// The objective does not provide the oracle an optimizer needs (grad, jvp or
// truncated gradient).
class CapabilityMissing : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IncompatiblePrecision : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class LabelDomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace zoopt

#endif  // ZOOPT_ERROR_HPP_
