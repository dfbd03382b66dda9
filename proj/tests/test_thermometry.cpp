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

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "iontherm/error.hpp"
#include "iontherm/spectrum.hpp"
#include "iontherm/thermometry.hpp"

namespace it = iontherm;

namespace {

constexpr double eta_ca = 0.072;
constexpr double envelope_area = 5.0;

it::SidebandSpectrum clean_envelope(double nbar, double eta = eta_ca, double area = envelope_area) {
    auto spec = it::sideband_envelope(it::thermal_populations(nbar), eta, {area, 1.0}, 4);
    spec.shots = std::vector<int>(spec.amplitudes.size(), 500);
    return spec;
}

std::vector<double> flop_times(int count, double t_max) {
    std::vector<double> t(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        t[static_cast<std::size_t>(i)] = t_max * (i + 1) / count;
    }
    return t;
}

it::ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const it::Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return it::ErrorKind::parse_error;
}

}  // namespace

TEST(Ratio, Examples) {
    EXPECT_EQ(it::fit_sideband_ratio(0.0, 0.4, 500, 500).nbar, 0.0);
    EXPECT_NEAR(it::fit_sideband_ratio(0.2, 0.4, 500, 500).nbar, 1.0, 1e-15);
    EXPECT_NEAR(it::fit_sideband_ratio(0.3, 0.4, 500, 500).nbar, 3.0, 1e-14);
    const auto r = it::fit_sideband_ratio(0.2, 0.4, 500, 500);
    EXPECT_EQ(r.method, it::FitMethod::ratio);
    EXPECT_GT(r.nbar_uncertainty, 0.0);
}

TEST(Ratio, Errors) {
    EXPECT_EQ(kind_of([] { it::fit_sideband_ratio(0.4, 0.4, 500, 500); }), it::ErrorKind::out_of_method_range);
    EXPECT_EQ(kind_of([] { it::fit_sideband_ratio(0.0, 0.0, 500, 500); }), it::ErrorKind::undefined_ratio);
    EXPECT_EQ(kind_of([] { it::fit_sideband_ratio(1.2, 0.4, 500, 500); }), it::ErrorKind::invalid_parameter);
}

TEST(Ratio, UncertaintyMatchesReplicaSpread) {
    const double nbar = 1.5;
    const auto state = it::thermal_populations(nbar);
    const it::ProbePulse pulse{20.0, 1.0};
    const double red = it::mixed_state_excitation(state, -1, eta_ca, pulse);
    const double blue = it::mixed_state_excitation(state, 1, eta_ca, pulse);
    std::mt19937_64 rng(3);
    std::vector<double> fits;
    double reported = 0.0;
    for (int k = 0; k < 400; ++k) {
        std::binomial_distribution<int> dr(2000, red), db(2000, blue);
        const auto r = it::fit_sideband_ratio(dr(rng) / 2000.0, db(rng) / 2000.0, 2000, 2000);
        fits.push_back(r.nbar);
        reported += r.nbar_uncertainty / 400.0;
    }
    double mean = 0.0;
    for (double v : fits) {
        mean += v / fits.size();
    }
    double var = 0.0;
    for (double v : fits) {
        var += (v - mean) * (v - mean) / (fits.size() - 1.0);
    }
    EXPECT_NEAR(mean, nbar, 0.1);
    EXPECT_GT(std::sqrt(var) / reported, 0.5);
    EXPECT_LT(std::sqrt(var) / reported, 2.0);
}

TEST(Envelope, NoiseFreeRoundTrip) {
    for (double nbar : {0.5, 2.2, 10.0, 75.0, 235.0}) {
        const auto r = it::fit_envelope(clean_envelope(nbar), eta_ca);
        EXPECT_NEAR(r.nbar, nbar, 0.01 * nbar) << nbar;
        EXPECT_LT(r.chi_square, 1e-10) << nbar;
        EXPECT_EQ(r.degrees_of_freedom, 7);
        ASSERT_TRUE(r.pulse_area.has_value());
        EXPECT_NEAR(*r.pulse_area, envelope_area, 1e-4);
        EXPECT_EQ(r.method, it::FitMethod::envelope);
        EXPECT_FALSE(r.alpha.has_value());
    }
}

TEST(Envelope, RoundTripAcrossEta) {
    for (double eta : {0.05, 0.15}) {
        for (double nbar : {2.2, 75.0}) {
            const auto r = it::fit_envelope(clean_envelope(nbar, eta), eta);
            EXPECT_NEAR(r.nbar, nbar, 0.01 * nbar) << eta << ' ' << nbar;
        }
    }
}

TEST(Envelope, GroundState) {
    const auto r = it::fit_envelope(clean_envelope(0.0), eta_ca);
    EXPECT_LT(r.nbar, 0.05);
    EXPECT_GE(r.nbar, 0.0);
}

TEST(Envelope, MonotoneInTrueOccupation) {
    double previous = -1.0;
    for (double nbar : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        const double fitted = it::fit_envelope(clean_envelope(nbar), eta_ca).nbar;
        EXPECT_GE(fitted, previous);
        previous = fitted;
    }
}

TEST(Envelope, NoisyRecoveryWithinThreeSigma) {
    const auto noisy = it::synthesize_measurement(clean_envelope(75.0), 500, 7);
    const auto r = it::fit_envelope(noisy, eta_ca);
    EXPECT_LT(std::fabs(r.nbar - 75.0), 3.0 * r.nbar_uncertainty);
    EXPECT_GT(r.nbar_uncertainty, 0.5);
    EXPECT_LT(r.nbar_uncertainty, 16.0);
}

TEST(Envelope, IntervalSpansSecondMinimum) {
    // This replica has a second minimum near nbar 2.9, area 4.55 with chi-square
    // within one of the true one; the interval has to reach across both.
    const auto noisy = it::synthesize_measurement(clean_envelope(2.2), 500, 10);
    const auto r = it::fit_envelope(noisy, eta_ca);
    EXPECT_GT(r.nbar, 2.6);
    EXPECT_LT(std::fabs(r.nbar - 2.2), 3.0 * r.nbar_uncertainty);
}

TEST(Envelope, AgreesWithRatioMethodWhenCold) {
    for (double nbar : {0.5, 2.0, 5.0}) {
        const auto noisy = it::synthesize_measurement(clean_envelope(nbar), 500, 11);
        const auto env = it::fit_envelope(noisy, eta_ca);
        const auto ratio = it::fit_sideband_ratio(noisy.amplitude(-1), noisy.amplitude(1), 500, 500);
        const double joint = std::hypot(env.nbar_uncertainty, ratio.nbar_uncertainty);
        EXPECT_LT(std::fabs(env.nbar - ratio.nbar), 2.0 * joint) << nbar;
    }
}

TEST(Envelope, Errors) {
    auto spec = clean_envelope(2.0);
    auto no_shots = spec;
    no_shots.shots.reset();
    EXPECT_EQ(kind_of([&] { it::fit_envelope(no_shots, eta_ca); }), it::ErrorKind::invalid_parameter);

    auto first_order = it::sideband_envelope(it::thermal_populations(2.0), eta_ca, {5.0, 1.0}, 1);
    first_order.shots = std::vector<int>(3, 500);
    EXPECT_EQ(kind_of([&] { it::fit_envelope(first_order, eta_ca); }), it::ErrorKind::insufficient_data);

    it::SidebandSpectrum flat;
    flat.max_order = 2;
    flat.amplitudes = std::vector<double>(5, 0.3);
    flat.shots = std::vector<int>(5, 100);
    EXPECT_EQ(kind_of([&] { it::fit_envelope(flat, eta_ca); }), it::ErrorKind::unconstrained_fit);
}

TEST(Envelope, DisplacedModelOnThermalData) {
    it::EnvelopeFitOptions options;
    options.model = it::EnvelopeModel::displaced_thermal;
    options.trunc.n_max = 300;
    for (double nbar : {2.2, 10.0}) {
        const auto r = it::fit_envelope(clean_envelope(nbar), eta_ca, options);
        ASSERT_TRUE(r.alpha.has_value());
        EXPECT_LT(*r.alpha * *r.alpha, 1.0);
        EXPECT_NEAR(r.nbar, nbar, 0.02 * nbar);
        EXPECT_EQ(r.degrees_of_freedom, 6);
    }
}

TEST(Envelope, DisplacedModelRecoversCoherentPart) {
    const it::DisplacementGenerator gen(300);
    const auto state = it::displaced_thermal_populations(gen, 3.0, 2.0);
    auto spec = it::sideband_envelope(state, eta_ca, {envelope_area, 1.0}, 4);
    spec.shots = std::vector<int>(9, 500);
    it::EnvelopeFitOptions options;
    options.model = it::EnvelopeModel::displaced_thermal;
    options.trunc.n_max = 300;
    const auto r = it::fit_envelope(spec, eta_ca, options);
    EXPECT_NEAR(r.nbar, 3.0, 0.03);
    EXPECT_NEAR(*r.alpha, 2.0, 0.02);
}

TEST(Envelope, BootstrapSpreadComparableToProfile) {
    const auto noisy = it::synthesize_measurement(clean_envelope(10.0), 500, 9);
    const auto fit = it::fit_envelope(noisy, eta_ca);
    const auto boot = it::bootstrap_envelope(noisy, eta_ca, {}, 40, 21);
    EXPECT_EQ(boot.replicas, 40);
    EXPECT_GT(boot.stddev_nbar / fit.nbar_uncertainty, 0.5);
    EXPECT_LT(boot.stddev_nbar / fit.nbar_uncertainty, 2.0);
    const auto again = it::bootstrap_envelope(noisy, eta_ca, {}, 40, 21);
    EXPECT_EQ(boot.mean_nbar, again.mean_nbar);
}

TEST(Rabi, NoiseFreeRoundTrip) {
    const double omega = 2.0 * std::numbers::pi * 50e3;
    const auto times = flop_times(60, 100e-6);
    for (double nbar : {0.5, 6.0, 30.0}) {
        const auto curve = it::carrier_flop_curve(it::thermal_populations(nbar), eta_ca, omega, times);
        const auto r = it::fit_rabi_decoherence(times, curve, 500, eta_ca);
        EXPECT_NEAR(r.nbar, nbar, 0.02 * nbar) << nbar;
        ASSERT_TRUE(r.base_rabi.has_value());
        EXPECT_NEAR(*r.base_rabi, omega, 1e-4 * omega);
        EXPECT_EQ(r.degrees_of_freedom, 58);
        EXPECT_LT(r.chi_square, 1e-10);
    }
}

TEST(Rabi, GroundStateIsUndamped) {
    const double omega = 2.0 * std::numbers::pi * 50e3;
    const auto times = flop_times(60, 100e-6);
    const auto curve = it::carrier_flop_curve(it::thermal_populations(0.0), eta_ca, omega, times);
    EXPECT_LT(it::fit_rabi_decoherence(times, curve, 500, eta_ca).nbar, 0.05);
}

TEST(Rabi, NoisyRecoveryWithinThreeSigma) {
    const double omega = 2.0 * std::numbers::pi * 50e3;
    const auto times = flop_times(60, 100e-6);
    const auto curve = it::carrier_flop_curve(it::thermal_populations(30.0), eta_ca, omega, times);
    const auto noisy = it::binomial_replica(curve, 500, 13);
    const auto r = it::fit_rabi_decoherence(times, noisy, 500, eta_ca);
    EXPECT_LT(std::fabs(r.nbar - 30.0), 3.0 * r.nbar_uncertainty);
}

TEST(Rabi, Errors) {
    const auto few = flop_times(8, 100e-6);
    const std::vector<double> values(8, 0.3);
    EXPECT_EQ(kind_of([&] { it::fit_rabi_decoherence(few, values, 500, eta_ca); }),
              it::ErrorKind::insufficient_data);
    // Under one oscillation in the sampled window.
    const double omega = 2.0 * std::numbers::pi * 50e3;
    const auto short_times = flop_times(20, 8e-6);
    const auto curve = it::carrier_flop_curve(it::thermal_populations(5.0), eta_ca, omega, short_times);
    EXPECT_EQ(kind_of([&] { it::fit_rabi_decoherence(short_times, curve, 500, eta_ca); }),
              it::ErrorKind::insufficient_data);
}

TEST(Heating, Examples) {
    const auto two = it::fit_heating_rate({{0.0, 1.0}, {1.0, 4.0}, {0.1, 0.1}});
    EXPECT_NEAR(two.slope, 3.0, 1e-12);
    EXPECT_NEAR(two.intercept, 1.0, 1e-12);
    const auto flat = it::fit_heating_rate({{0.0, 1.0, 2.0, 3.0}, {5.0, 5.0, 5.0, 5.0}, {0.2, 0.2, 0.2, 0.2}});
    EXPECT_NEAR(flat.slope, 0.0, flat.slope_uncertainty);
    EXPECT_EQ(flat.degrees_of_freedom, 2);
    EXPECT_EQ(kind_of([] { it::fit_heating_rate({{0.0}, {1.0}, {0.1}}); }), it::ErrorKind::insufficient_data);
    EXPECT_EQ(kind_of([] { it::fit_heating_rate({{1.0, 0.0}, {1.0, 2.0}, {0.1, 0.1}}); }),
              it::ErrorKind::invalid_parameter);
}

TEST(Heating, NoisySeriesRecoversSlope) {
    std::mt19937_64 rng(17);
    it::HeatingSeries series;
    for (int i = 0; i <= 12; ++i) {
        const double t = 0.5 * i;
        const double sigma = 0.3 + 0.03 * (6.0 + 3.0 * t);
        std::normal_distribution<double> noise(0.0, sigma);
        series.delays_ms.push_back(t);
        series.nbars.push_back(6.0 + 3.0 * t + noise(rng));
        series.uncertainties.push_back(sigma);
    }
    const auto r = it::fit_heating_rate(series);
    EXPECT_LT(std::fabs(r.slope - 3.0), 3.0 * r.slope_uncertainty);
}

TEST(DynamicHeating, Examples) {
    it::FitResult a;
    a.nbar = 75.4;
    a.nbar_uncertainty = 1.6;
    it::FitResult b;
    b.nbar = 2.2;
    b.nbar_uncertainty = 0.4;
    const auto d = it::dynamic_heating_difference(a, b);
    EXPECT_NEAR(d.delta_nbar, 73.2, 1e-12);
    EXPECT_NEAR(d.uncertainty, 1.6492, 1e-4);
    EXPECT_FALSE(d.below_minus_one_sigma);
    const auto same = it::dynamic_heating_difference(a, a);
    EXPECT_EQ(same.delta_nbar, 0.0);
    EXPECT_NEAR(same.uncertainty, std::sqrt(2.0) * 1.6, 1e-12);
    const auto negative = it::dynamic_heating_difference(b, a);
    EXPECT_LT(negative.delta_nbar, 0.0);
    EXPECT_TRUE(negative.below_minus_one_sigma);
}

TEST(Temperature, FromOccupation) {
    EXPECT_EQ(it::temperature_from_nbar(0.0, 1.738e6), 0.0);
    const double t = it::temperature_from_nbar(10.0, 1.738e6);
    const double beta = 1.054571817e-34 * 2.0 * std::numbers::pi * 1.738e6 / (1.380649e-23 * t);
    EXPECT_NEAR(1.0 / std::expm1(beta), 10.0, 1e-10);
}
