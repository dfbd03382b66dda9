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

#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "iontherm/error.hpp"

namespace iontherm::oracle {

double displacement_overlap(int n, int m, double eta, int n_max) {
    const int target = n + m;
    if (n < 0 || target < 0) {
        throw Error(ErrorKind::invalid_transition, "oracle: negative ladder index");
    }
    if (10 * std::max(n, target) >= 9 * n_max) {
        throw Error(ErrorKind::truncation_insufficient, "oracle: index within 10% of n_max");
    }
    using cld = std::complex<long double>;
    const auto size = static_cast<std::size_t>(n_max) + 1;
    std::vector<long double> root(size + 1);
    for (std::size_t j = 0; j <= size; ++j) {
        root[j] = std::sqrt(static_cast<long double>(j));
    }
    // term_k = (i eta X)^k / k! |n>, X tridiagonal with X_{j,j+1} = sqrt(j+1).
    std::vector<cld> term(size), next(size), sum(size);
    term[static_cast<std::size_t>(n)] = 1.0L;
    sum = term;
    const cld factor(0.0L, static_cast<long double>(eta));
    for (int k = 1; k < 4000; ++k) {
        long double norm = 0.0L;
        for (std::size_t j = 0; j < size; ++j) {
            cld x = 0.0L;
            if (j > 0) {
                x += root[j] * term[j - 1];
            }
            if (j + 1 < size) {
                x += root[j + 1] * term[j + 1];
            }
            next[j] = factor * x / static_cast<long double>(k);
            norm += std::norm(next[j]);
        }
        term.swap(next);
        for (std::size_t j = 0; j < size; ++j) {
            sum[j] += term[j];
        }
        if (norm < 1e-44L) {
            return static_cast<double>(std::abs(sum[static_cast<std::size_t>(target)]));
        }
    }
    throw Error(ErrorKind::numerical_accuracy, "oracle: Taylor series did not converge");
}

double transport_quanta(const TransportScenario& s) {
    if (!s.secular_frequency_profile_hz.empty()) {
        throw Error(ErrorKind::invalid_parameter, "oracle: constant secular frequency only");
    }
    constexpr double hbar = 1.054571817e-34;
    constexpr double amu = 1.66053906660e-27;
    const double omega = 2.0 * std::numbers::pi * s.secular_frequency_hz;
    const double l0 = std::sqrt(hbar / (2.0 * s.ion_mass_amu * amu * omega));
    const double period = 1.0 / s.update_frequency_hz;

    // Staircase targets, all legs.
    std::vector<double> targets;
    double start = s.reverse_legs ? s.distance_m : 0.0;
    const double origin = start;
    for (int leg = 0; leg < s.legs; ++leg) {
        const double sign = ((leg == 0) != s.reverse_legs) ? 1.0 : -1.0;
        for (int k = 1; k <= s.n_steps; ++k) {
            targets.push_back(start + sign * s.distance_m * k / s.n_steps);
        }
        start = targets.back();
    }
    const std::size_t updates = targets.size();
    const double end = period * static_cast<double>(updates) + s.relax_time_s;
    const double final_target = targets.back();

    using cd = std::complex<double>;
    cd integral = 0.0;
    double x_end = 0.0;
    if (std::isinf(s.filter_cutoff_hz)) {
        // x0' is a sum of delta functions at the updates.
        double previous = origin;
        for (std::size_t j = 0; j < updates; ++j) {
            const double t = period * static_cast<double>(j);
            integral += (targets[j] - previous) / l0 * std::exp(cd(0.0, -omega * t));
            previous = targets[j];
        }
        x_end = final_target;
    } else {
        const double tau = 1.0 / (2.0 * std::numbers::pi * s.filter_cutoff_hz);
        double x = origin;  // filtered position at the start of each interval
        for (std::size_t j = 0; j < updates; ++j) {
            const double t0 = period * static_cast<double>(j);
            const double length = j + 1 == updates ? end - t0 : period;
            const double gap = (x - targets[j]) / l0;
            auto re = [&](double u) { return -gap / tau * std::exp(-u / tau) * std::cos(omega * (t0 + u)); };
            auto im = [&](double u) { return gap / tau * std::exp(-u / tau) * std::sin(omega * (t0 + u)); };
            using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
            // The integrand decays as e^{-u/tau}; past 40 tau it is below 1e-17 of its start.
            const double upper = std::min(length, 40.0 * tau);
            const double r = GK::integrate(re, 0.0, upper, 12, 1e-12);
            const double i = GK::integrate(im, 0.0, upper, 12, 1e-12);
            integral += cd(r, i);
            x = targets[j] + (x - targets[j]) * std::exp(-length / tau);
        }
        x_end = x;
    }
    const cd z = (x_end - final_target) / l0 - std::exp(cd(0.0, omega * end)) * integral;
    return std::norm(z) / 4.0;
}

}  // namespace iontherm::oracle
