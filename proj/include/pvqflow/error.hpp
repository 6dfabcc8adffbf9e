// Copyright 2026 The pvqflow Authors
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

namespace pvq {

enum class ErrorKind {
  kConfig,     // bad configuration, dimension mismatch, invalid argument
  kDomain,     // well-formed input that violates an operation's precondition
  kNumerical,  // non-finite values, integration failures
  kIo,         // file system and file format problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::kDomain, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what)
      : Error(ErrorKind::kNumerical, what) {}
};

/// Raised by the ODE integrators. Carries the time and step index at which
/// the failure was detected.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double t, std::size_t step)
      : NumericalError(what + " (t=" + std::to_string(t) +
                       ", step=" + std::to_string(step) + ")"),
        t_(t),
        step_(step) {}
  double time() const noexcept { return t_; }
  std::size_t step() const noexcept { return step_; }

 private:
  double t_;
  std::size_t step_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

}  // namespace pvq
