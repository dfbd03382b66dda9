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
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "iontherm/error.hpp"
#include "iontherm/transport.hpp"
#include "oracles.hpp"

namespace it = iontherm;

namespace {

constexpr double f_ax = 1.738e6;

it::TransportScenario paper_scenario(double update_hz) {
    it::TransportScenario s;
    s.distance_m = 177.3e-6;
    s.n_steps = 120;
    s.secular_frequency_hz = f_ax;
    s.update_frequency_hz = update_hz;
    return s;
}

// Relative difference with a floor far below one quantum, for points where
// the kicks cancel and both values are rounding noise.
double relative(double a, double b) {
    return std::fabs(a - b) / std::max(std::fabs(b), 1e-9);
}

}  // namespace

TEST(Trajectory, PaperStepSizeAndPeriod) {
    const auto trajectory = it::build_filtered_trajectory(paper_scenario(329e3));
    EXPECT_NEAR(trajectory.target(0), 1.4775e-6, 1e-12);
    EXPECT_NEAR(trajectory.target(1) - trajectory.target(0), 1.4775e-6, 1e-12);
    EXPECT_NEAR(trajectory.update_period(), 3.0395e-6, 5e-11);
    EXPECT_EQ(trajectory.updates(), 240);
    EXPECT_NEAR(trajectory.target(119), 177.3e-6, 1e-15);
    EXPECT_NEAR(trajectory.final_target(), 0.0, 1e-15);
}

TEST(Trajectory, SingleStepIsRcResponse) {
    it::TransportScenario s;
    s.distance_m = 2e-6;
    s.n_steps = 1;
    s.legs = 1;
    s.update_frequency_hz = 100e3;
    s.secular_frequency_hz = f_ax;
    const auto trajectory = it::build_filtered_trajectory(s);
    const double tau = 1.0 / (2.0 * std::numbers::pi * 60e3);
    EXPECT_DOUBLE_EQ(trajectory.time_constant(), tau);
    for (double t : {0.0, 1e-6, 5e-6, 20e-6, 100e-6}) {
        EXPECT_NEAR(trajectory.position(t), 2e-6 * (1.0 - std::exp(-t / tau)), 1e-18) << t;
        EXPECT_LE(std::fabs(trajectory.position(t) - 2e-6), 2e-6 * std::exp(-t / tau) + 1e-18);
    }
    EXPECT_NEAR(trajectory.velocity(1e-6), 2e-6 / tau * std::exp(-1e-6 / tau), 1e-9);
}

TEST(Trajectory, InfiniteCutoffIsIdealStaircase) {
    auto s = paper_scenario(300e3);
    s.filter_cutoff_hz = std::numeric_limits<double>::infinity();
    const auto trajectory = it::build_filtered_trajectory(s);
    for (int j = 0; j < trajectory.updates(); ++j) {
        const double t = trajectory.update_time(j) + 0.5 * trajectory.update_period();
        EXPECT_EQ(trajectory.position(t), trajectory.ideal_position(t));
    }
}

TEST(Trajectory, ContinuousAndMonotonePerLeg) {
    const auto s = paper_scenario(250e3);
    const auto trajectory = it::build_filtered_trajectory(s);
    const double leg = trajectory.update_period() * s.n_steps;
    double previous = trajectory.position(0.0);
    for (int i = 1; i <= 4000; ++i) {
        const double t = leg * i / 4000.0;
        const double x = trajectory.position(t);
        EXPECT_GE(x, previous - 1e-18);
        previous = x;
    }
    for (int j = 1; j < trajectory.updates(); ++j) {
        const double t = trajectory.update_time(j);
        EXPECT_NEAR(trajectory.position(t - 1e-15), trajectory.position(t), 1e-15);
    }
    for (int i = 1; i <= 4000; ++i) {
        const double t = leg + leg * i / 4000.0;
        const double x = trajectory.position(t);
        EXPECT_LE(x, previous + 1e-18);
        previous = x;
    }
}

TEST(Transport, ZeroDistanceGainsNothing) {
    auto s = paper_scenario(300e3);
    s.distance_m = 0.0;
    const auto result = it::simulate_transport(s);
    EXPECT_LT(result.quanta_gained, 1e-10);
    EXPECT_EQ(result.final_displacement_amplitude * result.final_displacement_amplitude,
              result.quanta_gained);
}

TEST(Transport, StaticTrapConservesEnergy) {
    auto s = paper_scenario(200e3);
    s.distance_m = 0.0;
    s.relax_time_s = 1e-3;
    EXPECT_LT(it::simulate_transport(s).quanta_gained, 1e-10);
}

TEST(Transport, SingleFilteredStepMatchesClosedForm) {
    it::TransportScenario s;
    s.distance_m = 1e-6;
    s.n_steps = 1;
    s.legs = 1;
    s.update_frequency_hz = 300e3;
    s.relax_time_s = 200e-6;
    s.secular_frequency_hz = f_ax;
    const double l0 = it::zero_point_length(s.ion_mass_amu, f_ax);
    const double wt = 2.0 * std::numbers::pi * f_ax / (2.0 * std::numbers::pi * 60e3);
    const double expected = s.distance_m * s.distance_m / (4.0 * l0 * l0 * (1.0 + wt * wt));
    EXPECT_LT(relative(it::simulate_transport(s).quanta_gained, expected), 1e-8);
}

TEST(Transport, CommensurateUnfilteredRoundTripCancels) {
    // Every kick of a leg lands at the same oscillator phase, so the return
    // leg undoes the out leg exactly.
    for (int k : {3, 5, 7}) {
        auto s = paper_scenario(f_ax / k);
        s.filter_cutoff_hz = std::numeric_limits<double>::infinity();
        EXPECT_LT(it::simulate_transport(s).quanta_gained, 1e-8) << k;
        EXPECT_LT(it::oracle::transport_quanta(s), 1e-8) << k;
    }
    // A single leg at the same rate is maximally excited.
    auto one_way = paper_scenario(f_ax / 5);
    one_way.filter_cutoff_hz = std::numeric_limits<double>::infinity();
    one_way.legs = 1;
    EXPECT_GT(it::simulate_transport(one_way).quanta_gained, 1e4);
}

TEST(Transport, MatchesResponseIntegralOracle) {
    std::mt19937_64 rng(20260731);
    std::uniform_real_distribution<double> distance(-50e-6, 50e-6);
    std::uniform_int_distribution<int> steps(1, 40);
    std::uniform_real_distribution<double> update(150e3, 700e3);
    std::uniform_real_distribution<double> cutoff(20e3, 200e3);
    std::uniform_real_distribution<double> secular(0.8e6, 2.5e6);
    std::uniform_int_distribution<int> legs(1, 2);
    for (int i = 0; i < 8; ++i) {
        it::TransportScenario s;
        s.distance_m = distance(rng);
        s.n_steps = steps(rng);
        s.update_frequency_hz = update(rng);
        s.filter_cutoff_hz = cutoff(rng);
        s.secular_frequency_hz = secular(rng);
        s.legs = legs(rng);
        s.relax_time_s = 20e-6;
        const double q = it::simulate_transport(s).quanta_gained;
        EXPECT_LT(relative(q, it::oracle::transport_quanta(s)), 1e-6) << i;
    }
}

TEST(Transport, ReverseLegOrderIsSymmetric) {
    for (double f : {230e3, 248e3, 300e3, 348e3}) {
        auto s = paper_scenario(f);
        const double forward = it::simulate_transport(s).quanta_gained;
        s.reverse_legs = true;
        EXPECT_LT(relative(it::simulate_transport(s).quanta_gained, forward), 1e-7) << f;
    }
}

TEST(Transport, RecordsTrajectory) {
    auto s = paper_scenario(300e3);
    s.n_steps = 10;
    s.record_trajectory = true;
    const auto result = it::simulate_transport(s);
    ASSERT_EQ(result.trajectory.size(), 21u);
    EXPECT_EQ(result.trajectory.front().time_s, 0.0);
    EXPECT_NEAR(result.trajectory.front().ion_position_m, 0.0, 1e-18);
    for (std::size_t i = 1; i < result.trajectory.size(); ++i) {
        EXPECT_GT(result.trajectory[i].time_s, result.trajectory[i - 1].time_s);
    }
    s.record_trajectory = false;
    EXPECT_TRUE(it::simulate_transport(s).trajectory.empty());
}

TEST(Transport, FrequencyProfileHook) {
    auto s = paper_scenario(300e3);
    s.n_steps = 20;
    const double constant = it::simulate_transport(s).quanta_gained;
    s.secular_frequency_profile_hz.assign(40, f_ax);
    EXPECT_LT(relative(it::simulate_transport(s).quanta_gained, constant), 1e-9);
    for (std::size_t j = 0; j < 40; ++j) {
        s.secular_frequency_profile_hz[j] = f_ax * (1.0 - 0.05 * std::sin(std::numbers::pi * j / 40.0));
    }
    EXPECT_GT(relative(it::simulate_transport(s).quanta_gained, constant), 1e-3);
    s.secular_frequency_profile_hz.resize(7);
    EXPECT_THROW(it::simulate_transport(s), it::Error);
}

TEST(Transport, InvalidScenarios) {
    auto expect_invalid = [](it::TransportScenario s) {
        try {
            it::simulate_transport(s);
            ADD_FAILURE() << "no error";
        } catch (const it::Error& e) {
            EXPECT_EQ(e.kind(), it::ErrorKind::invalid_parameter);
        }
    };
    auto s = paper_scenario(300e3);
    s.n_steps = 0;
    expect_invalid(s);
    s = paper_scenario(0.0);
    expect_invalid(s);
    s = paper_scenario(300e3);
    s.filter_cutoff_hz = -1.0;
    expect_invalid(s);
    s = paper_scenario(300e3);
    s.relax_time_s = -1e-6;
    expect_invalid(s);
    s = paper_scenario(300e3);
    s.secular_frequency_hz = 0.0;
    expect_invalid(s);
}

TEST(Scan, OrderedAsInputAndConsistent) {
    const auto s = paper_scenario(300e3);
    const std::vector<double> f = {400e3, 250e3, 300e3};
    const auto points = it::scan_update_frequency(s, f);
    ASSERT_EQ(points.size(), 3u);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_EQ(points[i].update_frequency_hz, f[i]);
        auto single = s;
        single.update_frequency_hz = f[i];
        EXPECT_EQ(points[i].quanta_gained, it::simulate_transport(single).quanta_gained);
        EXPECT_FALSE(points[i].error);
    }
}

TEST(Scan, FailingPointDoesNotAbort) {
    const std::vector<double> f = {300e3, -5.0, 250e3};
    const auto points = it::scan_update_frequency(paper_scenario(300e3), f);
    ASSERT_EQ(points.size(), 3u);
    EXPECT_FALSE(points[0].error);
    ASSERT_TRUE(points[1].error);
    EXPECT_TRUE(std::isnan(points[1].quanta_gained));
    EXPECT_FALSE(points[2].error);
    EXPECT_THROW(it::scan_update_frequency(paper_scenario(300e3), {}), it::Error);
}

TEST(Scan, ResonancesAtSubharmonics) {
    // With a constant trap frequency every f_ax / k in the band resonates.
    std::vector<double> f;
    for (int i = 0; i <= 400; ++i) {
        f.push_back(200e3 + 1e3 * i);
    }
    const auto points = it::scan_update_frequency(paper_scenario(300e3), f);
    for (int k : {3, 4, 5, 6, 7}) {
        double best = 0.0;
        double where = 0.0;
        for (const auto& p : points) {
            if (std::fabs(p.update_frequency_hz - f_ax / k) < 0.03 * f_ax / k && p.quanta_gained > best) {
                best = p.quanta_gained;
                where = p.update_frequency_hz;
            }
        }
        EXPECT_GT(best, 1e3) << k;
        EXPECT_LT(std::fabs(where - f_ax / k), 0.01 * f_ax / k) << k;
    }
    // Between f_ax/6 and f_ax/5 the heating drops by orders of magnitude.
    double valley = std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
        if (p.update_frequency_hz > 300e3 && p.update_frequency_hz < 330e3) {
            valley = std::min(valley, p.quanta_gained);
        }
    }
    EXPECT_LT(valley, 1e-3 * 5e4);
}
