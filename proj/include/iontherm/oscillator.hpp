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

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace iontherm {

/// Single motional mode probed by a laser beam.
struct OscillatorConfig {
    double ion_mass_amu = 0.0;
    double secular_frequency_hz = 0.0;  // mode frequency omega / 2pi
    double probe_wavelength_m = 0.0;
    double beam_projection = 1.0;  // cosine of the angle between beam and mode axis
};

/// Lamb-Dicke parameter eta = k cos(theta) sqrt(hbar / (2 m omega)).
/// Throws Error(invalid_configuration) on nonpositive mass, frequency or
/// wavelength, or a projection outside [0, 1].
double lamb_dicke(const OscillatorConfig& config);

struct TruncationConfig {
    int n_max = 1000;
};

/// Probability mass allowed above the top of the ladder for operations that
/// must not silently truncate.
inline constexpr double truncation_leak_tolerance = 1e-10;

enum class StateKind { thermal, displaced_thermal };

/// Fock-state populations P_0..P_{n_max} of a diagonal motional state.
struct MotionalState {
    StateKind kind = StateKind::thermal;
    double nbar = 0.0;
    double alpha = 0.0;  // coherent displacement |alpha|, zero for thermal states
    std::vector<double> populations;

    int n_max() const { return static_cast<int>(populations.size()) - 1; }
    /// Sum of n P_n over the ladder.
    double mean_occupation() const;
};

/// Thermal (Boltzmann) state on the truncated ladder 0..n_max.
///
/// The populations are geometric, P_{n+1}/P_n = q, renormalized over the
/// ladder. q is chosen so the truncated mean equals nbar exactly; whenever
/// the mass above n_max is negligible this is q = nbar/(nbar+1) to machine
/// precision. nbar >= n_max/2 has no such q and throws
/// Error(truncation_insufficient).
MotionalState thermal_populations(double nbar, TruncationConfig trunc = {});

/// Thermal state displaced by a real coherent amplitude alpha. Populations are
/// the diagonal of D rho D^dagger with D = exp(alpha (a^dagger - a)) built by
/// exponentiating the truncated generator. Throws Error(truncation_insufficient)
/// when either the thermal tail or the displaced state reaches the top of the
/// ladder with more than truncation_leak_tolerance of probability.
MotionalState displaced_thermal_populations(double nbar, double alpha,
                                            TruncationConfig trunc = {});

/// Magnitude of the state dependent sideband Rabi frequency for
/// |n> -> |n+m>:
///
///   Omega00 exp(-eta^2/2) sqrt(n_<! / n_>!) eta^|m| |L_{n_<}^{|m|}(eta^2)|
///
/// evaluated with a normalized Laguerre recurrence so nothing overflows at
/// large n. Throws Error(invalid_transition) when n + m < 0.
double sideband_rabi_frequency(int n, int m, double eta, double base_rabi);

/// sqrt(n! / (n+a)!) L_n^a(x) by the normalized three-term recurrence.
double normalized_laguerre(int n, int a, double x);

/// Table of relative sideband Rabi frequencies Omega_{n,m}/Omega00 for
/// n = 0..n_max and m = -max_order..max_order. Entries with n + m < 0 are
/// zero. Building the table costs O(n_max * max_order); it is immutable
/// afterwards and safe to share between threads.
class SidebandCouplings {
public:
    SidebandCouplings(double eta, int n_max, int max_order);

    double eta() const { return eta_; }
    int n_max() const { return n_max_; }
    int max_order() const { return max_order_; }

    /// Relative frequencies for order m, indexed by the initial level n.
    std::span<const double> order(int m) const;
    double operator()(int n, int m) const { return order(m)[n]; }

private:
    double eta_;
    int n_max_;
    int max_order_;
    std::vector<std::vector<double>> rows_;  // rows_[m + max_order]
};

/// Real displacement operators on a truncated ladder. The generator
/// a^dagger - a is unitarily equivalent to i (a + a^dagger); that symmetric
/// tridiagonal matrix is diagonalized once, after which D(alpha) costs one
/// complex matrix product.
class DisplacementGenerator {
public:
    explicit DisplacementGenerator(int n_max);

    int n_max() const { return n_max_; }

    /// D(alpha) on the truncated ladder.
    Eigen::MatrixXd operator_matrix(double alpha) const;

    /// Diagonal of D(alpha) diag(populations) D(alpha)^T.
    std::vector<double> displace(std::span<const double> populations, double alpha) const;

private:
    int n_max_;
    Eigen::MatrixXd eigenvectors_;
    Eigen::VectorXd eigenvalues_;
};

/// Builds the displaced thermal state with a prebuilt generator; used by
/// fitters that evaluate many displacements on one ladder.
MotionalState displaced_thermal_populations(const DisplacementGenerator& generator,
                                            double nbar, double alpha);

}  // namespace iontherm
