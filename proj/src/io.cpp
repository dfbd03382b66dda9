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

#include "iontherm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "iontherm/error.hpp"

namespace iontherm {

namespace {

[[noreturn]] void fail(std::size_t line, std::size_t column, const std::string& message) {
    throw Error(ErrorKind::parse_error,
                "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message);
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

struct Field {
    std::string_view text;
    std::size_t column;  // 1-based
};

struct Row {
    std::size_t line;
    std::vector<Field> fields;
};

struct Table {
    std::vector<std::string> comments;
    std::vector<Row> rows;
};

// Splits the text into comment lines and data rows, checking the header.
Table read_table(std::string_view text, std::string_view header, std::size_t columns) {
    Table table;
    bool seen_header = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto end = text.find('\n', pos);
        const std::string_view raw =
            text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty()) {
            continue;
        }
        if (line.front() == '#') {
            table.comments.emplace_back(trim(line.substr(1)));
            continue;
        }
        if (!seen_header) {
            if (line != header) {
                fail(line_no, 1, "expected header '" + std::string(header) + "'");
            }
            seen_header = true;
            continue;
        }
        Row row{line_no, {}};
        std::size_t start = 0;
        const std::size_t indent = raw.find_first_not_of(" \t");
        while (true) {
            const auto comma = line.find(',', start);
            const auto piece = line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                   : comma - start);
            row.fields.push_back({trim(piece), indent + start + 1});
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (row.fields.size() != columns) {
            fail(line_no, 1,
                 "expected " + std::to_string(columns) + " fields, found " + std::to_string(row.fields.size()));
        }
        table.rows.push_back(std::move(row));
    }
    if (!seen_header) {
        fail(line_no, 1, "missing header '" + std::string(header) + "'");
    }
    return table;
}

template <typename T>
T parse_number(const Row& row, std::size_t index, std::string_view what) {
    const Field& f = row.fields[index];
    T value{};
    const char* begin = f.text.data();
    const char* end = begin + f.text.size();
    if (!f.text.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (f.text.empty() || ec != std::errc() || ptr != end) {
        fail(row.line, f.column, "malformed " + std::string(what) + " '" + std::string(f.text) + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) {
            fail(row.line, f.column, std::string(what) + " must be finite");
        }
    }
    return value;
}

double parse_probability(const Row& row, std::size_t index) {
    const double p = parse_number<double>(row, index, "excitation");
    if (!(p >= 0.0 && p <= 1.0)) {
        fail(row.line, row.fields[index].column,
             "excitation " + std::string(row.fields[index].text) + " outside [0, 1]");
    }
    return p;
}

int parse_shots(const Row& row, std::size_t index) {
    const int shots = parse_number<int>(row, index, "shots");
    if (shots < 1) {
        fail(row.line, row.fields[index].column, "shots must be >= 1");
    }
    return shots;
}

void write_comments(std::ostringstream& out, const std::vector<std::string>& comments) {
    for (const auto& c : comments) {
        out << "# " << c << '\n';
    }
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw Error(ErrorKind::invalid_parameter, "cannot format number");
    }
    return std::string(buffer, ptr);
}

SpectrumFile parse_spectrum(std::string_view text) {
    const Table table = read_table(text, spectrum_header, 3);
    SpectrumFile file;
    file.comments = table.comments;
    std::set<int> orders;
    for (const auto& row : table.rows) {
        SpectrumRow r;
        r.order = parse_number<int>(row, 0, "order");
        if (!orders.insert(r.order).second) {
            fail(row.line, row.fields[0].column, "duplicate order " + std::to_string(r.order));
        }
        r.excitation = parse_probability(row, 1);
        r.shots = parse_shots(row, 2);
        file.rows.push_back(r);
    }
    return file;
}

std::string serialize_spectrum(const SpectrumFile& file) {
    std::ostringstream out;
    write_comments(out, file.comments);
    out << spectrum_header << '\n';
    for (const auto& r : file.rows) {
        out << r.order << ',' << format_double(r.excitation) << ',' << r.shots << '\n';
    }
    return out.str();
}

SidebandSpectrum to_sideband_spectrum(const SpectrumFile& file) {
    if (file.rows.empty()) {
        throw Error(ErrorKind::parse_error, "spectrum has no rows");
    }
    int max_order = 0;
    for (const auto& r : file.rows) {
        max_order = std::max(max_order, std::abs(r.order));
    }
    if (max_order < 1) {
        throw Error(ErrorKind::parse_error, "spectrum needs at least one sideband order");
    }
    const auto size = static_cast<std::size_t>(2 * max_order + 1);
    SidebandSpectrum spectrum;
    spectrum.max_order = max_order;
    spectrum.amplitudes.assign(size, -1.0);
    spectrum.shots = std::vector<int>(size, 0);
    for (const auto& r : file.rows) {
        const auto i = static_cast<std::size_t>(r.order + max_order);
        spectrum.amplitudes[i] = r.excitation;
        (*spectrum.shots)[i] = r.shots;
    }
    for (int m = -max_order; m <= max_order; ++m) {
        if (spectrum.amplitudes[static_cast<std::size_t>(m + max_order)] < 0.0) {
            throw Error(ErrorKind::parse_error, "spectrum is missing order " + std::to_string(m));
        }
    }
    spectrum.seed = recorded_seed(file.comments);
    return spectrum;
}

SpectrumFile to_spectrum_file(const SidebandSpectrum& spectrum, std::vector<std::string> comments) {
    SpectrumFile file;
    file.comments = std::move(comments);
    for (int m = -spectrum.max_order; m <= spectrum.max_order; ++m) {
        const auto i = static_cast<std::size_t>(m + spectrum.max_order);
        file.rows.push_back({m, spectrum.amplitudes[i], spectrum.shots ? (*spectrum.shots)[i] : 1});
    }
    return file;
}

std::optional<std::uint64_t> recorded_seed(const std::vector<std::string>& comments) {
    for (const auto& c : comments) {
        std::istringstream words(c);
        std::string word;
        while (words >> word) {
            if (word.rfind("seed=", 0) == 0) {
                std::uint64_t seed = 0;
                const auto digits = std::string_view(word).substr(5);
                const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
                if (ec == std::errc() && ptr == digits.data() + digits.size()) {
                    return seed;
                }
            }
        }
    }
    return std::nullopt;
}

FlopFile parse_flop_file(std::string_view text) {
    const Table table = read_table(text, flop_header, 3);
    FlopFile file;
    file.comments = table.comments;
    for (const auto& row : table.rows) {
        FlopRow r;
        r.time_us = parse_number<double>(row, 0, "time");
        if (r.time_us < 0.0 || (!file.rows.empty() && r.time_us <= file.rows.back().time_us)) {
            fail(row.line, row.fields[0].column, "times must be nonnegative and strictly increasing");
        }
        r.excitation = parse_probability(row, 1);
        r.shots = parse_shots(row, 2);
        file.rows.push_back(r);
    }
    return file;
}

std::string serialize_flop_file(const FlopFile& file) {
    std::ostringstream out;
    write_comments(out, file.comments);
    out << flop_header << '\n';
    for (const auto& r : file.rows) {
        out << format_double(r.time_us) << ',' << format_double(r.excitation) << ',' << r.shots << '\n';
    }
    return out.str();
}

FlopCurve to_flop_curve(const FlopFile& file) {
    FlopCurve curve;
    std::vector<int> shots;
    for (const auto& r : file.rows) {
        curve.times.push_back(r.time_us * 1e-6);
        curve.excitations.push_back(r.excitation);
        shots.push_back(r.shots);
    }
    curve.shots = std::move(shots);
    curve.seed = recorded_seed(file.comments);
    return curve;
}

FlopFile to_flop_file(const FlopCurve& curve, std::vector<std::string> comments) {
    FlopFile file;
    file.comments = std::move(comments);
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        file.rows.push_back({curve.times[i] * 1e6, curve.excitations[i], curve.shots ? (*curve.shots)[i] : 1});
    }
    return file;
}

HeatingSeries parse_heating_series(std::string_view text) {
    const Table table = read_table(text, heating_header, 3);
    HeatingSeries series;
    for (const auto& row : table.rows) {
        series.delays_ms.push_back(parse_number<double>(row, 0, "delay"));
        series.nbars.push_back(parse_number<double>(row, 1, "nbar"));
        const double sigma = parse_number<double>(row, 2, "uncertainty");
        if (!(sigma > 0.0)) {
            fail(row.line, row.fields[2].column, "uncertainty must be positive");
        }
        series.uncertainties.push_back(sigma);
    }
    return series;
}

std::string serialize_heating_series(const HeatingSeries& series) {
    std::ostringstream out;
    out << heating_header << '\n';
    for (std::size_t i = 0; i < series.delays_ms.size(); ++i) {
        out << format_double(series.delays_ms[i]) << ',' << format_double(series.nbars[i]) << ','
            << format_double(series.uncertainties[i]) << '\n';
    }
    return out.str();
}

}  // namespace iontherm
