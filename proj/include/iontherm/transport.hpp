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

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iontherm {

/// Stair-step transport along one trap axis. Each leg moves the trap minimum
/// by `distance_m` in `n_steps` equal increments, one per waveform update; a
/// round trip (legs = 2) runs the out leg and then the return leg. The DAC
/// output passes a single-pole low-pass filter before reaching the ion.
struct TransportScenario {
    double distance_m = 0.0;            // signed, per leg
    int n_steps = 120;                  // updates per leg
    int legs = 2;                       // 1 = one way, 2 = out and back
    bool reverse_legs = false;          // start at the far end and run the legs in reverse order
    double update_frequency_hz = 0.0;
    double filter_cutoff_hz = 60e3;     // +infinity gives the ideal staircase
    double secular_frequency_hz = 0.0;
    double ion_mass_amu = 39.9626;
    double relax_time_s = 50e-6;        // hold after the last update period
    /// Optional secular frequency per update interval (size n_steps * legs);
    /// empty means the trap frequency is constant.
    std::vector<double> secular_frequency_profile_hz;
    bool record_trajectory = false;
};

/// Trap-minimum position x0(t): ideal staircase relaxed through the filter,
/// evaluated piecewise analytically between updates.
class FilteredTrajectory {
public:
    explicit FilteredTrajectory(const TransportScenario& scenario);

    double position(double t) const;
    double velocity(double t) const;
    double acceleration(double t) const;
    /// Unfiltered DAC staircase.
    double ideal_position(double t) const;

    int updates() const { return static_cast<int>(targets_.size()); }
    double update_period() const { return period_; }
    double update_time(int j) const { return period_ * j; }
    /// Filtered position at the instant of update j, before it takes effect.
    double position_at_update(int j) const { return starts_[static_cast<std::size_t>(j)]; }
    double target(int j) const { return targets_[static_cast<std::size_t>(j)]; }
    double initial_position() const { return initial_; }
    double final_target() const { return targets_.back(); }
    double time_constant() const { return tau_; }
    double end_time() const { return end_time_; }

private:
    int interval_of(double t) const;

    double initial_ = 0.0;
    double period_ = 0.0;
    double tau_ = 0.0;
    double end_time_ = 0.0;
    std::vector<double> targets_;
    std::vector<double> starts_;
};

FilteredTrajectory build_filtered_trajectory(const TransportScenario& scenario);

struct TrajectorySample {
    double time_s;
    double trap_minimum_m;
    double ion_position_m;
};

struct TransportResult {
    double final_displacement_amplitude = 0.0;  // |alpha|
    double quanta_gained = 0.0;                  // |alpha|^2
    std::vector<TrajectorySample> trajectory;    // filled when requested
};

/// Integrates x'' = -omega^2 (x - x0(t)) from rest at x0(0) through every
/// leg and the relax hold, and converts the residual motional energy about
/// the final trap position into quanta. Throws Error(numerical_accuracy) if
/// the adaptive integrator cannot hold its tolerance.
TransportResult simulate_transport(const TransportScenario& scenario);

struct ScanPoint {
    double update_frequency_hz = 0.0;
    double quanta_gained = 0.0;              // NaN when the point failed
    std::optional<std::string> error;
};

/// simulate_transport for every update frequency, in input order. A failing
/// point records its error and the scan continues.
std::vector<ScanPoint> scan_update_frequency(const TransportScenario& scenario,
                                             std::span<const double> frequencies_hz);

/// Zero-point length sqrt(hbar / (2 m omega)).
double zero_point_length(double ion_mass_amu, double secular_frequency_hz);

}  // namespace iontherm
