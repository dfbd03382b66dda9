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

#include "iontherm/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "iontherm/error.hpp"

namespace iontherm {

double SidebandSpectrum::amplitude(int m) const {
    if (m < -max_order || m > max_order) {
        throw Error(ErrorKind::invalid_parameter, "order " + std::to_string(m) + " not in spectrum");
    }
    return amplitudes[static_cast<std::size_t>(m + max_order)];
}

int SidebandSpectrum::shots_at(int m) const {
    if (!shots) {
        throw Error(ErrorKind::invalid_parameter, "spectrum carries no shot counts");
    }
    if (m < -max_order || m > max_order) {
        throw Error(ErrorKind::invalid_parameter, "order " + std::to_string(m) + " not in spectrum");
    }
    return (*shots)[static_cast<std::size_t>(m + max_order)];
}

double pure_state_excitation(int n, int m, double eta, const ProbePulse& pulse) {
    if (n < 0) {
        throw Error(ErrorKind::invalid_parameter, "motional level must be >= 0");
    }
    if (n + m < 0) {
        return 0.0;
    }
    const double s = std::sin(sideband_rabi_frequency(n, m, eta, pulse.base_rabi) * pulse.duration);
    return s * s;
}

std::size_t population_support(std::span<const double> populations) {
    double tail = 0.0;
    std::size_t end = populations.size();
    while (end > 1) {
        tail += populations[end - 1];
        if (tail > 1e-17) {
            break;
        }
        --end;
    }
    return end;
}

double excitation(const SidebandCouplings& couplings, std::span<const double> populations,
                  int m, double pulse_area, std::size_t support) {
    const auto frequencies = couplings.order(m);
    const std::size_t end = std::min({support, populations.size(), frequencies.size()});
    const std::size_t begin = static_cast<std::size_t>(std::max(0, -m));
    double total = 0.0;
    for (std::size_t n = begin; n < end; ++n) {
        const double s = std::sin(frequencies[n] * pulse_area);
        total += populations[n] * s * s;
    }
    return std::clamp(total, 0.0, 1.0);
}

double mixed_state_excitation(const MotionalState& state, int m, double eta,
                              const ProbePulse& pulse) {
    if (state.populations.empty()) {
        throw Error(ErrorKind::invalid_parameter, "motional state has no populations");
    }
    const int n_max = std::max(1, state.n_max());
    const SidebandCouplings couplings(eta, n_max, std::abs(m));
    return excitation(couplings, state.populations, m, pulse.area(),
                      population_support(state.populations));
}

SidebandSpectrum sideband_envelope(const MotionalState& state, double eta,
                                   const ProbePulse& pulse, int max_order) {
    if (max_order < 1) {
        throw Error(ErrorKind::invalid_parameter, "envelope needs max_order >= 1");
    }
    if (state.populations.empty()) {
        throw Error(ErrorKind::invalid_parameter, "motional state has no populations");
    }
    const SidebandCouplings couplings(eta, std::max(1, state.n_max()), max_order);
    const std::size_t support = population_support(state.populations);
    SidebandSpectrum spectrum;
    spectrum.max_order = max_order;
    spectrum.amplitudes.reserve(2 * static_cast<std::size_t>(max_order) + 1);
    for (int m = -max_order; m <= max_order; ++m) {
        spectrum.amplitudes.push_back(
            excitation(couplings, state.populations, m, pulse.area(), support));
    }
    return spectrum;
}

std::vector<double> carrier_flop_curve(const MotionalState& state, double eta,
                                       double base_rabi, std::span<const double> times) {
    if (state.populations.empty()) {
        throw Error(ErrorKind::invalid_parameter, "motional state has no populations");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1])) {
            throw Error(ErrorKind::invalid_parameter, "times must be nonnegative and sorted");
        }
    }
    const SidebandCouplings couplings(eta, std::max(1, state.n_max()), 0);
    const std::size_t support = population_support(state.populations);
    std::vector<double> out;
    out.reserve(times.size());
    for (double t : times) {
        out.push_back(excitation(couplings, state.populations, 0, base_rabi * t, support));
    }
    return out;
}

std::vector<double> binomial_replica(std::span<const double> probabilities, int shots,
                                     std::uint64_t seed) {
    if (shots < 1) {
        throw Error(ErrorKind::invalid_parameter, "shots must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::vector<double> out;
    out.reserve(probabilities.size());
    for (double p : probabilities) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorKind::invalid_parameter, "probability outside [0, 1]");
        }
        std::binomial_distribution<int> draw(shots, p);
        out.push_back(static_cast<double>(draw(rng)) / shots);
    }
    return out;
}

SidebandSpectrum synthesize_measurement(const SidebandSpectrum& spectrum, int shots,
                                        std::uint64_t seed) {
    SidebandSpectrum out = spectrum;
    out.amplitudes = binomial_replica(spectrum.amplitudes, shots, seed);
    out.shots = std::vector<int>(spectrum.amplitudes.size(), shots);
    out.seed = seed;
    return out;
}

FlopCurve synthesize_measurement(const FlopCurve& curve, int shots, std::uint64_t seed) {
    FlopCurve out = curve;
    out.excitations = binomial_replica(curve.excitations, shots, seed);
    out.shots = std::vector<int>(curve.excitations.size(), shots);
    out.seed = seed;
    return out;
}

}  // namespace iontherm
