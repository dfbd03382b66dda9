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

#include "iontherm/error.hpp"

namespace iontherm {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_configuration: return "invalid-configuration";
        case ErrorKind::invalid_parameter: return "invalid-parameter";
        case ErrorKind::invalid_transition: return "invalid-transition";
        case ErrorKind::truncation_insufficient: return "truncation-insufficient";
        case ErrorKind::out_of_method_range: return "out-of-method-range";
        case ErrorKind::undefined_ratio: return "undefined-ratio";
        case ErrorKind::fit_failed: return "fit-failed";
        case ErrorKind::unconstrained_fit: return "unconstrained-fit";
        case ErrorKind::insufficient_data: return "insufficient-data";
        case ErrorKind::numerical_accuracy: return "numerical-accuracy";
        case ErrorKind::parse_error: return "parse-error";
    }
    return "unknown";
}

}  // namespace iontherm
