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

// Fit report document written by the fitting subcommands. Serialized as JSON
// with sorted keys; doubles use the shortest round-trip representation.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace iontherm::cli {

struct BootstrapReport {
    int replicas = 0;
    int failures = 0;
    double mean_nbar = 0.0;
    double stddev_nbar = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const BootstrapReport&, const BootstrapReport&) = default;
};

struct FitReport {
    std::string method;
    std::string status = "ok";  // "ok" or "error"
    std::optional<std::string> model;
    std::optional<double> nbar;
    std::optional<double> nbar_uncertainty;
    std::map<std::string, double> parameters;
    std::optional<double> chi_square;
    std::optional<int> dof;
    std::string input_sha256;
    std::optional<std::uint64_t> seed;  // recorded in the input, when synthetic
    std::string version;
    std::optional<BootstrapReport> bootstrap;
    std::optional<std::string> error_kind;
    std::optional<std::string> error_message;

    friend bool operator==(const FitReport&, const FitReport&) = default;
};

/// Throws Error(invalid_parameter) when a numeric field is not finite.
nlohmann::json to_json(const FitReport& report);
/// Throws Error(parse_error) on missing or mistyped fields.
FitReport report_from_json(const nlohmann::json& document);

std::string serialize_report(const FitReport& report);
FitReport parse_report(std::string_view text);

/// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

}  // namespace iontherm::cli
