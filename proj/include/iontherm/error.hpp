// Copyright 2026 The iontherm Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace iontherm {

enum class ErrorKind {
    invalid_configuration,
    invalid_parameter,
    invalid_transition,
    truncation_insufficient,
    out_of_method_range,
    undefined_ratio,
    fit_failed,
    unconstrained_fit,
    insufficient_data,
    numerical_accuracy,
    parse_error,
};

std::string_view to_string(ErrorKind kind);

/// Base exception for every failure raised by the library. The kind is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace iontherm
