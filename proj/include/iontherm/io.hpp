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

// Tabular text formats. All tables are comma separated with a fixed header
// row; lines starting with '#' are comments. Doubles are written in the
// shortest form that reads back to the same value.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "iontherm/spectrum.hpp"
#include "iontherm/thermometry.hpp"

namespace iontherm {

/// Shortest decimal representation that round-trips through strtod.
std::string format_double(double value);

struct SpectrumRow {
    int order = 0;
    double excitation = 0.0;
    int shots = 1;

    friend bool operator==(const SpectrumRow&, const SpectrumRow&) = default;
};

/// `order,excitation,shots` table.
struct SpectrumFile {
    std::vector<std::string> comments;  // text after '#', in file order
    std::vector<SpectrumRow> rows;

    friend bool operator==(const SpectrumFile&, const SpectrumFile&) = default;
};

inline constexpr std::string_view spectrum_header = "order,excitation,shots";
inline constexpr std::string_view flop_header = "time_us,excitation,shots";
inline constexpr std::string_view heating_header = "delay_ms,nbar,uncertainty";

/// Throws Error(parse_error) with "line L, column C: ..." on malformed
/// numbers, duplicate orders, probabilities outside [0, 1] or shots < 1.
SpectrumFile parse_spectrum(std::string_view text);
std::string serialize_spectrum(const SpectrumFile& file);

/// Requires every order -M..M for M = max |order|.
SidebandSpectrum to_sideband_spectrum(const SpectrumFile& file);
SpectrumFile to_spectrum_file(const SidebandSpectrum& spectrum,
                              std::vector<std::string> comments = {});

/// Seed recorded by a `seed=<n>` token in any comment line.
std::optional<std::uint64_t> recorded_seed(const std::vector<std::string>& comments);

struct FlopRow {
    double time_us = 0.0;
    double excitation = 0.0;
    int shots = 1;

    friend bool operator==(const FlopRow&, const FlopRow&) = default;
};

/// `time_us,excitation,shots` table. Times stay in microseconds as written so
/// the file round-trips exactly; to_flop_curve converts to seconds.
struct FlopFile {
    std::vector<std::string> comments;
    std::vector<FlopRow> rows;

    friend bool operator==(const FlopFile&, const FlopFile&) = default;
};

/// Throws Error(parse_error) as parse_spectrum, and when times are negative
/// or not strictly increasing.
FlopFile parse_flop_file(std::string_view text);
std::string serialize_flop_file(const FlopFile& file);

FlopCurve to_flop_curve(const FlopFile& file);
FlopFile to_flop_file(const FlopCurve& curve, std::vector<std::string> comments = {});

HeatingSeries parse_heating_series(std::string_view text);
std::string serialize_heating_series(const HeatingSeries& series);

}  // namespace iontherm
