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

#include "iontherm/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include "iontherm/constants.hpp"
#include "iontherm/error.hpp"

namespace iontherm {

namespace {

void require_ladder(const TruncationConfig& trunc) {
    if (trunc.n_max < 1) {
        throw Error(ErrorKind::invalid_parameter,
                    "truncation n_max must be >= 1, got " + std::to_string(trunc.n_max));
    }
}

// sqrt(k!/(k+a)!) L_k^a(x) for k = 0..n_max, by the three-term recurrence
// rewritten for the normalized polynomials. Values stay O(1) for any k, so
// no factorials or rescaling are needed.
std::vector<long double> normalized_laguerre_sequence(int n_max, int a, long double x) {
    std::vector<long double> out(static_cast<std::size_t>(n_max) + 1);
    long double inv_sqrt_factorial = 1.0L;
    for (int j = 2; j <= a; ++j) {
        inv_sqrt_factorial /= std::sqrt(static_cast<long double>(j));
    }
    out[0] = inv_sqrt_factorial;
    if (n_max == 0) {
        return out;
    }
    out[1] = (1.0L + a - x) * out[0] / std::sqrt(static_cast<long double>(a + 1));
    for (int k = 1; k < n_max; ++k) {
        const long double kk = k;
        const long double next =
            ((2.0L * kk + 1.0L + a - x) * out[k] - std::sqrt(kk * (kk + a)) * out[k - 1]) /
            std::sqrt((kk + 1.0L) * (kk + 1.0L + a));
        out[k + 1] = next;
    }
    return out;
}

long double coupling_prefactor(double eta, int a) {
    const long double e = eta;
    return std::exp(-e * e / 2.0L) * std::pow(e, static_cast<long double>(a));
}

}  // namespace

double lamb_dicke(const OscillatorConfig& config) {
    if (!(config.ion_mass_amu > 0.0) || !(config.secular_frequency_hz > 0.0) ||
        !(config.probe_wavelength_m > 0.0)) {
        throw Error(ErrorKind::invalid_configuration,
                    "ion mass, secular frequency and probe wavelength must be positive");
    }
    if (!(config.beam_projection >= 0.0 && config.beam_projection <= 1.0)) {
        throw Error(ErrorKind::invalid_configuration, "beam projection must lie in [0, 1]");
    }
    const double mass = config.ion_mass_amu * constants::atomic_mass_unit;
    const double omega = constants::two_pi * config.secular_frequency_hz;
    const double k_projected = constants::two_pi * config.beam_projection / config.probe_wavelength_m;
    return k_projected * std::sqrt(constants::hbar / (2.0 * mass * omega));
}

double MotionalState::mean_occupation() const {
    double mean = 0.0;
    for (std::size_t n = 0; n < populations.size(); ++n) {
        mean += static_cast<double>(n) * populations[n];
    }
    return mean;
}

double normalized_laguerre(int n, int a, double x) {
    if (n < 0 || a < 0) {
        throw Error(ErrorKind::invalid_parameter, "Laguerre degree and order must be >= 0");
    }
    return static_cast<double>(normalized_laguerre_sequence(n, a, x)[n]);
}

double sideband_rabi_frequency(int n, int m, double eta, double base_rabi) {
    if (n < 0) {
        throw Error(ErrorKind::invalid_parameter, "motional level must be >= 0");
    }
    if (n + m < 0) {
        throw Error(ErrorKind::invalid_transition,
                    "transition " + std::to_string(n) + " -> " + std::to_string(n + m) +
                        " leaves the ladder");
    }
    if (!(eta >= 0.0) || !(base_rabi >= 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "eta and base Rabi frequency must be >= 0");
    }
    const int lower = std::min(n, n + m);
    const int a = std::abs(m);
    const long double x = static_cast<long double>(eta) * eta;
    const long double ell = normalized_laguerre_sequence(lower, a, x)[lower];
    return static_cast<double>(base_rabi * coupling_prefactor(eta, a) * std::fabs(ell));
}

SidebandCouplings::SidebandCouplings(double eta, int n_max, int max_order)
    : eta_(eta), n_max_(n_max), max_order_(max_order) {
    if (!(eta >= 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "eta must be >= 0");
    }
    if (n_max < 1 || max_order < 0) {
        throw Error(ErrorKind::invalid_parameter, "coupling table needs n_max >= 1, max_order >= 0");
    }
    const auto size = static_cast<std::size_t>(n_max) + 1;
    rows_.assign(2 * static_cast<std::size_t>(max_order) + 1, std::vector<double>(size, 0.0));
    const long double x = static_cast<long double>(eta) * eta;
    for (int a = 0; a <= max_order; ++a) {
        const auto ell = normalized_laguerre_sequence(n_max, a, x);
        const long double prefactor = coupling_prefactor(eta, a);
        auto& blue = rows_[static_cast<std::size_t>(max_order + a)];
        auto& red = rows_[static_cast<std::size_t>(max_order - a)];
        for (int n = 0; n <= n_max; ++n) {
            blue[n] = static_cast<double>(prefactor * std::fabs(ell[n]));
        }
        // Omega_{n,-a} = Omega_{n-a,+a}: same lesser and greater level.
        for (int n = a; n <= n_max; ++n) {
            red[n] = blue[n - a];
        }
    }
}

std::span<const double> SidebandCouplings::order(int m) const {
    if (m < -max_order_ || m > max_order_) {
        throw Error(ErrorKind::invalid_parameter,
                    "sideband order " + std::to_string(m) + " outside coupling table");
    }
    return rows_[static_cast<std::size_t>(m + max_order_)];
}

MotionalState thermal_populations(double nbar, TruncationConfig trunc) {
    require_ladder(trunc);
    if (!(nbar >= 0.0) || !std::isfinite(nbar)) {
        throw Error(ErrorKind::invalid_parameter, "nbar must be finite and >= 0");
    }
    const int n_max = trunc.n_max;
    MotionalState state;
    state.kind = StateKind::thermal;
    state.nbar = nbar;
    state.populations.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    if (nbar == 0.0) {
        state.populations[0] = 1.0;
        return state;
    }
    if (nbar >= 0.5 * n_max) {
        throw Error(ErrorKind::truncation_insufficient,
                    "nbar " + std::to_string(nbar) + " needs a ladder above n_max " +
                        std::to_string(n_max));
    }

    // beta = hbar omega / kT. Mean of the geometric distribution restricted to
    // 0..N is 1/(e^beta - 1) - (N+1)/(e^{(N+1)beta} - 1).
    const double levels = n_max + 1.0;
    auto truncated_mean = [levels](double beta) {
        return 1.0 / std::expm1(beta) - levels / std::expm1(levels * beta);
    };
    double beta = std::log1p(1.0 / nbar);
    const auto residual = [&](double b) { return truncated_mean(b) - nbar; };
    const double r_hi = residual(beta);
    if (r_hi < 0.0) {
        double lo = 0.5 * beta;
        double r_lo = residual(lo);
        while (r_lo < 0.0) {
            lo *= 0.5;
            r_lo = residual(lo);
        }
        std::uintmax_t max_iter = 200;
        auto [a, b] = boost::math::tools::toms748_solve(residual, lo, beta, r_lo, r_hi,
                                                        boost::math::tools::eps_tolerance<double>(),
                                                        max_iter);
        beta = 0.5 * (a + b);
    }

    const double ratio = std::exp(-beta);
    double p = 1.0;
    for (auto& pop : state.populations) {
        pop = p;
        p *= ratio;
    }
    const double total = std::accumulate(state.populations.begin(), state.populations.end(), 0.0);
    for (auto& pop : state.populations) {
        pop /= total;
    }
    return state;
}

DisplacementGenerator::DisplacementGenerator(int n_max) : n_max_(n_max) {
    if (n_max < 1) {
        throw Error(ErrorKind::invalid_parameter, "displacement ladder needs n_max >= 1");
    }
    const Eigen::Index size = n_max + 1;
    Eigen::VectorXd diagonal = Eigen::VectorXd::Zero(size);
    Eigen::VectorXd sub(size - 1);
    for (Eigen::Index n = 0; n + 1 < size; ++n) {
        sub[n] = std::sqrt(static_cast<double>(n + 1));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diagonal, sub, Eigen::ComputeEigenvectors);
    if (solver.info() != Eigen::Success) {
        throw Error(ErrorKind::numerical_accuracy, "position operator diagonalization failed");
    }
    eigenvalues_ = solver.eigenvalues();
    eigenvectors_ = solver.eigenvectors();
}

Eigen::MatrixXd DisplacementGenerator::operator_matrix(double alpha) const {
    // With U = diag(i^n), a^dagger - a = i U^dagger X U and so
    // D = U^dagger exp(i alpha X) U, i.e. D_jk = Re(i^{k-j} (C + iS)_jk)
    // where C and S are cos(alpha X) and sin(alpha X).
    const Eigen::VectorXd c = (alpha * eigenvalues_).array().cos();
    const Eigen::VectorXd s = (alpha * eigenvalues_).array().sin();
    const Eigen::MatrixXd cosine = eigenvectors_ * c.asDiagonal() * eigenvectors_.transpose();
    const Eigen::MatrixXd sine = eigenvectors_ * s.asDiagonal() * eigenvectors_.transpose();
    const Eigen::Index size = eigenvectors_.rows();
    Eigen::MatrixXd d(size, size);
    for (Eigen::Index k = 0; k < size; ++k) {
        for (Eigen::Index j = 0; j < size; ++j) {
            switch (((k - j) % 4 + 4) % 4) {
                case 0: d(j, k) = cosine(j, k); break;
                case 1: d(j, k) = -sine(j, k); break;
                case 2: d(j, k) = -cosine(j, k); break;
                default: d(j, k) = sine(j, k); break;
            }
        }
    }
    return d;
}

std::vector<double> DisplacementGenerator::displace(std::span<const double> populations,
                                                    double alpha) const {
    if (populations.size() != static_cast<std::size_t>(n_max_) + 1) {
        throw Error(ErrorKind::invalid_parameter, "population vector does not match ladder");
    }
    if (alpha == 0.0) {
        return {populations.begin(), populations.end()};
    }
    // Only columns of D for occupied input levels are needed.
    Eigen::Index columns = static_cast<Eigen::Index>(populations.size());
    while (columns > 1 && populations[static_cast<std::size_t>(columns - 1)] == 0.0) {
        --columns;
    }
    const Eigen::VectorXd c = (alpha * eigenvalues_).array().cos();
    const Eigen::VectorXd s = (alpha * eigenvalues_).array().sin();
    const auto basis = eigenvectors_.topRows(columns).transpose();
    const Eigen::MatrixXd cosine = eigenvectors_ * (c.asDiagonal() * basis);
    const Eigen::MatrixXd sine = eigenvectors_ * (s.asDiagonal() * basis);
    const Eigen::Index size = eigenvectors_.rows();
    std::vector<double> out(static_cast<std::size_t>(size), 0.0);
    for (Eigen::Index k = 0; k < columns; ++k) {
        const double p = populations[static_cast<std::size_t>(k)];
        for (Eigen::Index j = 0; j < size; ++j) {
            // (k - j) even selects the cosine part, odd the sine part.
            const double v = ((k - j) % 2 == 0) ? cosine(j, k) : sine(j, k);
            out[static_cast<std::size_t>(j)] += p * v * v;
        }
    }
    return out;
}

namespace {

MotionalState displaced_on_ladder(const DisplacementGenerator* generator, int n_max, double nbar,
                                  double alpha) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw Error(ErrorKind::invalid_parameter, "alpha must be finite and >= 0");
    }
    MotionalState thermal = thermal_populations(nbar, {n_max});
    if (nbar > 0.0) {
        // Geometric mass above n_max of the untruncated distribution.
        const double tail = std::pow(nbar / (nbar + 1.0), n_max + 1.0);
        if (tail > truncation_leak_tolerance) {
            throw Error(ErrorKind::truncation_insufficient,
                        "thermal tail above n_max = " + std::to_string(n_max) + " is " +
                            std::to_string(tail));
        }
    }
    MotionalState state;
    state.kind = StateKind::displaced_thermal;
    state.nbar = nbar;
    state.alpha = alpha;
    if (alpha == 0.0) {
        state.populations = std::move(thermal.populations);
        return state;
    }
    // Drop the thermal tail below 1e-17 so fewer columns of D are needed.
    double tail_mass = 0.0;
    for (std::size_t n = thermal.populations.size(); n-- > 1;) {
        tail_mass += thermal.populations[n];
        if (tail_mass >= 1e-17) {
            break;
        }
        thermal.populations[n] = 0.0;
    }
    state.populations = generator->displace(thermal.populations, alpha);

    // Truncation artifacts show up first in the top tenth of the ladder.
    const int band_start = n_max - std::max(1, n_max / 10);
    double leak = 0.0;
    for (int n = band_start; n <= n_max; ++n) {
        leak += state.populations[n];
    }
    if (leak > truncation_leak_tolerance) {
        throw Error(ErrorKind::truncation_insufficient,
                    "displaced state puts " + std::to_string(leak) +
                        " of its population near n_max = " + std::to_string(n_max));
    }
    for (auto& p : state.populations) {
        p = std::max(p, 0.0);
    }
    const double total = std::accumulate(state.populations.begin(), state.populations.end(), 0.0);
    for (auto& p : state.populations) {
        p /= total;
    }
    return state;
}

}  // namespace

MotionalState displaced_thermal_populations(const DisplacementGenerator& generator, double nbar,
                                            double alpha) {
    return displaced_on_ladder(&generator, generator.n_max(), nbar, alpha);
}

MotionalState displaced_thermal_populations(double nbar, double alpha, TruncationConfig trunc) {
    require_ladder(trunc);
    if (alpha == 0.0) {
        return displaced_on_ladder(nullptr, trunc.n_max, nbar, alpha);
    }
    const DisplacementGenerator generator(trunc.n_max);
    return displaced_on_ladder(&generator, trunc.n_max, nbar, alpha);
}

}  // namespace iontherm
