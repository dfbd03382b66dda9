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

#include "iontherm/transport.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "iontherm/constants.hpp"
#include "iontherm/error.hpp"
#include "iontherm/parallel.hpp"

namespace iontherm {

namespace {

void validate(const TransportScenario& s) {
    if (s.n_steps < 1) {
        throw Error(ErrorKind::invalid_parameter, "transport needs n_steps >= 1");
    }
    if (s.legs != 1 && s.legs != 2) {
        throw Error(ErrorKind::invalid_parameter, "transport supports one or two legs");
    }
    if (!(s.update_frequency_hz > 0.0) || !std::isfinite(s.update_frequency_hz)) {
        throw Error(ErrorKind::invalid_parameter, "update frequency must be positive");
    }
    if (!(s.filter_cutoff_hz > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "filter cutoff must be positive");
    }
    if (!(s.secular_frequency_hz > 0.0) || !(s.ion_mass_amu > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "secular frequency and ion mass must be positive");
    }
    if (!(s.relax_time_s >= 0.0) || !std::isfinite(s.distance_m)) {
        throw Error(ErrorKind::invalid_parameter, "relax time must be >= 0 and distance finite");
    }
    if (!s.secular_frequency_profile_hz.empty()) {
        if (s.secular_frequency_profile_hz.size() != static_cast<std::size_t>(s.n_steps * s.legs)) {
            throw Error(ErrorKind::invalid_parameter,
                        "secular frequency profile needs one entry per update");
        }
        for (double f : s.secular_frequency_profile_hz) {
            if (!(f > 0.0)) {
                throw Error(ErrorKind::invalid_parameter, "secular frequency profile must be positive");
            }
        }
    }
}

using State = std::array<double, 2>;  // deviation from the trap minimum and its rate

}  // namespace

double zero_point_length(double ion_mass_amu, double secular_frequency_hz) {
    const double mass = ion_mass_amu * constants::atomic_mass_unit;
    const double omega = constants::two_pi * secular_frequency_hz;
    return std::sqrt(constants::hbar / (2.0 * mass * omega));
}

FilteredTrajectory::FilteredTrajectory(const TransportScenario& scenario) {
    validate(scenario);
    initial_ = scenario.reverse_legs ? scenario.distance_m : 0.0;
    period_ = 1.0 / scenario.update_frequency_hz;
    tau_ = std::isinf(scenario.filter_cutoff_hz) ? 0.0
                                                 : 1.0 / (constants::two_pi * scenario.filter_cutoff_hz);
    const int updates = scenario.n_steps * scenario.legs;
    targets_.reserve(static_cast<std::size_t>(updates));
    double leg_start = initial_;
    for (int leg = 0; leg < scenario.legs; ++leg) {
        const bool outward = (leg == 0) != scenario.reverse_legs;
        const double direction = outward ? 1.0 : -1.0;
        for (int k = 1; k <= scenario.n_steps; ++k) {
            targets_.push_back(leg_start + direction * scenario.distance_m * k / scenario.n_steps);
        }
        leg_start = targets_.back();
    }
    starts_.resize(targets_.size());
    starts_[0] = initial_;
    const double decay = tau_ > 0.0 ? std::exp(-period_ / tau_) : 0.0;
    for (std::size_t j = 0; j + 1 < targets_.size(); ++j) {
        starts_[j + 1] = targets_[j] + (starts_[j] - targets_[j]) * decay;
    }
    end_time_ = period_ * updates + scenario.relax_time_s;
}

int FilteredTrajectory::interval_of(double t) const {
    if (t < 0.0) {
        return -1;
    }
    const auto j = static_cast<long long>(std::floor(t / period_));
    return static_cast<int>(std::min<long long>(j, updates() - 1));
}

double FilteredTrajectory::position(double t) const {
    const int j = interval_of(t);
    if (j < 0) {
        return initial_;
    }
    const auto idx = static_cast<std::size_t>(j);
    if (tau_ == 0.0) {
        return targets_[idx];
    }
    return targets_[idx] + (starts_[idx] - targets_[idx]) * std::exp(-(t - period_ * j) / tau_);
}

double FilteredTrajectory::velocity(double t) const {
    const int j = interval_of(t);
    if (j < 0 || tau_ == 0.0) {
        return 0.0;
    }
    const auto idx = static_cast<std::size_t>(j);
    return -(starts_[idx] - targets_[idx]) / tau_ * std::exp(-(t - period_ * j) / tau_);
}

double FilteredTrajectory::acceleration(double t) const {
    const int j = interval_of(t);
    if (j < 0 || tau_ == 0.0) {
        return 0.0;
    }
    const auto idx = static_cast<std::size_t>(j);
    return (starts_[idx] - targets_[idx]) / (tau_ * tau_) * std::exp(-(t - period_ * j) / tau_);
}

double FilteredTrajectory::ideal_position(double t) const {
    const int j = interval_of(t);
    return j < 0 ? initial_ : targets_[static_cast<std::size_t>(j)];
}

FilteredTrajectory build_filtered_trajectory(const TransportScenario& scenario) {
    return FilteredTrajectory(scenario);
}

TransportResult simulate_transport(const TransportScenario& scenario) {
    const FilteredTrajectory trajectory(scenario);
    const int updates = trajectory.updates();
    const auto& profile = scenario.secular_frequency_profile_hz;
    auto omega_of = [&](int j) {
        const double f = profile.empty() ? scenario.secular_frequency_hz
                                         : profile[static_cast<std::size_t>(j)];
        return constants::two_pi * f;
    };

    // Positions in units of the zero-point length and time in units of
    // 1/omega at the final trap frequency; then quanta = (v^2 + x^2) / 4.
    const double omega_ref = omega_of(updates - 1);
    const double length = zero_point_length(scenario.ion_mass_amu, omega_ref / constants::two_pi);
    const double tau = trajectory.time_constant();
    const double period = trajectory.update_period();

    // Trap-minimum offset from its target, velocity and acceleration inside
    // interval j, dt seconds after the update, in scaled units.
    struct Minimum {
        double offset, velocity, acceleration;
    };
    auto minimum_at = [&](int j, double dt) {
        const double gap = (trajectory.position_at_update(j) - trajectory.target(j)) / length;
        if (tau == 0.0) {
            return Minimum{0.0, 0.0, 0.0};
        }
        const double e = std::exp(-dt / tau);
        return Minimum{gap * e, -gap * e / (tau * omega_ref),
                       gap * e / (tau * tau * omega_ref * omega_ref)};
    };

    namespace odeint = boost::numeric::odeint;
    using Stepper = odeint::runge_kutta_fehlberg78<State>;
    const double max_step = constants::two_pi / 50.0;
    auto controlled = odeint::make_controlled(1e-12, 1e-12, max_step, Stepper());

    TransportResult result;
    auto record = [&](double t, double deviation_scaled) {
        if (scenario.record_trajectory) {
            result.trajectory.push_back(
                {t, trajectory.position(t), trajectory.position(t) + deviation_scaled * length});
        }
    };

    // The ion starts at rest on the initial trap minimum.
    double ion_offset = (trajectory.initial_position() - trajectory.target(0)) / length;
    double ion_velocity = 0.0;
    State state{};
    for (int j = 0; j < updates; ++j) {
        // Re-express the ion state relative to the new interval's minimum.
        const Minimum m0 = minimum_at(j, 0.0);
        state = {ion_offset - m0.offset, ion_velocity - m0.velocity};
        const double t0 = period * j;
        record(t0, state[0]);

        const bool last = j + 1 == updates;
        const double duration = last ? period + scenario.relax_time_s : period;
        const double ratio = omega_of(j) / omega_ref;
        const double ratio_sq = ratio * ratio;
        auto system = [&](const State& x, State& dxdt, double s) {
            const double dt = s / omega_ref;
            dxdt[0] = x[1];
            dxdt[1] = -ratio_sq * x[0] - minimum_at(j, dt).acceleration;
        };
        const double span = duration * omega_ref;
        try {
            odeint::integrate_adaptive(controlled, system, state, 0.0, span, std::min(max_step, span));
        } catch (const std::exception& e) {
            throw Error(ErrorKind::numerical_accuracy,
                        std::string("transport integration failed: ") + e.what());
        }
        if (!std::isfinite(state[0]) || !std::isfinite(state[1])) {
            throw Error(ErrorKind::numerical_accuracy, "transport integration diverged");
        }
        const Minimum m1 = minimum_at(j, duration);
        ion_offset = state[0] + m1.offset;
        ion_velocity = state[1] + m1.velocity;
        if (!last) {
            // Offsets are relative to target(j); move them to target(j + 1).
            ion_offset += (trajectory.target(j) - trajectory.target(j + 1)) / length;
        }
    }
    record(trajectory.end_time(), state[0]);

    // ion_offset is now measured from the final target.
    result.quanta_gained = 0.25 * (ion_velocity * ion_velocity + ion_offset * ion_offset);
    result.final_displacement_amplitude = std::sqrt(result.quanta_gained);
    return result;
}

std::vector<ScanPoint> scan_update_frequency(const TransportScenario& scenario,
                                             std::span<const double> frequencies_hz) {
    if (frequencies_hz.empty()) {
        throw Error(ErrorKind::invalid_parameter, "scan needs at least one frequency");
    }
    std::vector<ScanPoint> points(frequencies_hz.size());
    parallel_for(points.size(), [&](std::size_t i) {
        TransportScenario s = scenario;
        s.update_frequency_hz = frequencies_hz[i];
        s.record_trajectory = false;
        points[i].update_frequency_hz = frequencies_hz[i];
        try {
            points[i].quanta_gained = simulate_transport(s).quanta_gained;
        } catch (const Error& e) {
            points[i].quanta_gained = std::numeric_limits<double>::quiet_NaN();
            points[i].error = e.what();
        }
    });
    return points;
}

}  // namespace iontherm
