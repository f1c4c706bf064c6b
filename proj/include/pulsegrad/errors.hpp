// Copyright 2026 The pulsegrad Authors.
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
#include <string_view>

namespace pulsegrad {

enum class ErrorKind {
    InvalidArgument,
    NotHermitian,
    DimMismatch,
    IdentityGenerator,
    TimeOutOfRange,
    BadQubitIndex,
    StepLimitExceeded,
    NonFiniteState,
    MissingSensitivities,
    GeneratorNotHermitian,
    NonPauliGenerator,
    TauOutOfRange,
    BadIndex,
    TooLarge,
    UncoupledPair,
    ParseError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Base exception for every failure raised by the library. The kind tag
/// lets callers branch without parsing messages.
class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, const std::string &message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message),
          kind_(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

  private:
    ErrorKind kind_;
};

/// Raised by the text parsers; `line()` is 1-based.
class ParseError : public Error {
  public:
    ParseError(std::size_t line, const std::string &reason)
        : Error(ErrorKind::ParseError,
                "line " + std::to_string(line) + ": " + reason),
          line_(line), reason_(reason) {}

    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string &reason() const noexcept { return reason_; }

  private:
    std::size_t line_;
    std::string reason_;
};

} // namespace pulsegrad
