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
#include <string_view>
#include <vector>

#include "iontherm/error.hpp"
#include "iontherm/oscillator.hpp"
#include "iontherm/spectrum.hpp"

namespace iontherm {

enum class FitMethod { ratio, envelope, rabi_decoherence, heating_rate };
enum class EnvelopeModel { thermal, displaced_thermal };

std::string_view to_string(FitMethod method);
std::string_view to_string(EnvelopeModel model);

struct FitResult {
    FitMethod method = FitMethod::ratio;
    double nbar = 0.0;
    double nbar_uncertainty = 0.0;
    std::optional<double> pulse_area;   // fitted Omega00 t (envelope fits)
    std::optional<double> base_rabi;    // fitted Omega00 in rad/s (Rabi fits)
    std::optional<double> alpha;        // displaced-thermal fits
    double chi_square = 0.0;
    int degrees_of_freedom = 0;
};

/// Thrown when local refinement does not converge; carries the best grid
/// point found before refinement.
class FitFailedError : public Error {
public:
    FitFailedError(const std::string& message, FitResult best_grid_point)
        : Error(ErrorKind::fit_failed, message), best_(std::move(best_grid_point)) {}

    const FitResult& best_grid_point() const noexcept { return best_; }

private:
    FitResult best_;
};

/// First-order sideband comparison: nbar = r / (1 - r) with r = p_red / p_blue.
/// Throws Error(undefined_ratio) when p_blue is zero and
/// Error(out_of_method_range) when r >= 1.
FitResult fit_sideband_ratio(double p_red, double p_blue, int shots_red, int shots_blue);

struct EnvelopeFitOptions {
    EnvelopeModel model = EnvelopeModel::thermal;
    TruncationConfig trunc{};
};

/// Fits the on-resonance sideband envelope to the thermal (nbar, Omega00 t)
/// or displaced-thermal (nbar, Omega00 t, alpha) model by minimizing the
/// binomially weighted chi-square: deterministic grid, Nelder-Mead
/// refinement, and a delta-chi-square = 1 profile along nbar for the
/// uncertainty.
FitResult fit_envelope(const SidebandSpectrum& measured, double eta,
                       const EnvelopeFitOptions& options = {});

/// Fits a carrier flopping curve to (nbar, Omega00).
FitResult fit_rabi_decoherence(std::span<const double> times, std::span<const double> excitations,
                               int shots, double eta, TruncationConfig trunc = {});

struct HeatingSeries {
    std::vector<double> delays_ms;
    std::vector<double> nbars;
    std::vector<double> uncertainties;
};

struct HeatingRateResult {
    double slope = 0.0;  // quanta / ms
    double slope_uncertainty = 0.0;
    double intercept = 0.0;
    double intercept_uncertainty = 0.0;
    double chi_square = 0.0;
    int degrees_of_freedom = 0;
};

/// Weighted straight-line fit of nbar against delay.
HeatingRateResult fit_heating_rate(const HeatingSeries& series);

struct HeatingDifference {
    double delta_nbar = 0.0;
    double uncertainty = 0.0;
    bool below_minus_one_sigma = false;  // reference warmer than transport run
};

HeatingDifference dynamic_heating_difference(const FitResult& transport_fit,
                                             const FitResult& reference_fit);

/// Spread of envelope fits over binomial resamplings of the measured
/// spectrum; a cross-check of the profile uncertainty.
struct BootstrapSummary {
    int replicas = 0;
    int failures = 0;
    double mean_nbar = 0.0;
    double stddev_nbar = 0.0;
};

BootstrapSummary bootstrap_envelope(const SidebandSpectrum& measured, double eta,
                                    const EnvelopeFitOptions& options, int replicas,
                                    std::uint64_t seed);

/// T = hbar omega / (k_B ln(1 + 1/nbar)); zero for nbar = 0.
double temperature_from_nbar(double nbar, double secular_frequency_hz);

}  // namespace iontherm
