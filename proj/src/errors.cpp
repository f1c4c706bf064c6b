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

#include "pulsegrad/errors.hpp"

namespace pulsegrad {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotHermitian: return "NotHermitian";
    case ErrorKind::DimMismatch: return "DimMismatch";
    case ErrorKind::IdentityGenerator: return "IdentityGenerator";
    case ErrorKind::TimeOutOfRange: return "TimeOutOfRange";
    case ErrorKind::BadQubitIndex: return "BadQubitIndex";
    case ErrorKind::StepLimitExceeded: return "StepLimitExceeded";
    case ErrorKind::NonFiniteState: return "NonFiniteState";
    case ErrorKind::MissingSensitivities: return "MissingSensitivities";
    case ErrorKind::GeneratorNotHermitian: return "GeneratorNotHermitian";
    case ErrorKind::NonPauliGenerator: return "NonPauliGenerator";
    case ErrorKind::TauOutOfRange: return "TauOutOfRange";
    case ErrorKind::BadIndex: return "BadIndex";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::UncoupledPair: return "UncoupledPair";
    case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

} // namespace pulsegrad
