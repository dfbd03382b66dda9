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

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "iontherm/oscillator.hpp"

namespace iontherm {

struct ProbePulse {
    double duration = 0.0;    // s
    double base_rabi = 0.0;   // Omega_{0,0}, rad/s

    /// Omega_{0,0} t, the only combination the excitation depends on.
    double area() const { return duration * base_rabi; }
};

/// On-resonance excitation probability for each sideband order
/// m = -max_order..max_order.
struct SidebandSpectrum {
    int max_order = 0;
    std::vector<double> amplitudes;             // indexed by m + max_order
    std::optional<std::vector<int>> shots;      // per order, when measured
    std::optional<std::uint64_t> seed;          // set by synthesize_measurement

    double amplitude(int m) const;
    int shots_at(int m) const;
};

/// Carrier Rabi flopping curve.
struct FlopCurve {
    std::vector<double> times;        // s
    std::vector<double> excitations;
    std::optional<std::vector<int>> shots;
    std::optional<std::uint64_t> seed;
};

/// sin^2(Omega_{n,m} t); exactly zero when n + m < 0.
double pure_state_excitation(int n, int m, double eta, const ProbePulse& pulse);

/// Sum over the ladder of P_n sin^2(Omega_{n,m} t), starting at n = max(0, -m)
/// so every term has a target level.
double mixed_state_excitation(const MotionalState& state, int m, double eta,
                              const ProbePulse& pulse);

SidebandSpectrum sideband_envelope(const MotionalState& state, double eta,
                                   const ProbePulse& pulse, int max_order);

std::vector<double> carrier_flop_curve(const MotionalState& state, double eta,
                                       double base_rabi, std::span<const double> times);

/// Fast kernel behind the functions above: excitation of order m for a
/// population vector on a prebuilt coupling table. Only the first
/// `support` populations are summed; pass populations.size() for all.
double excitation(const SidebandCouplings& couplings, std::span<const double> populations,
                  int m, double pulse_area, std::size_t support);

/// Number of leading populations that carry all but ~1e-17 of the mass.
std::size_t population_support(std::span<const double> populations);

/// Binomial shot-noise replica: each p becomes Binomial(shots, p) / shots.
/// Deterministic for a given seed. Throws Error(invalid_parameter) when
/// shots < 1.
std::vector<double> binomial_replica(std::span<const double> probabilities, int shots,
                                     std::uint64_t seed);

SidebandSpectrum synthesize_measurement(const SidebandSpectrum& spectrum, int shots,
                                        std::uint64_t seed);
FlopCurve synthesize_measurement(const FlopCurve& curve, int shots, std::uint64_t seed);

}  // namespace iontherm
