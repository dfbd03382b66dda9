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

// Chi-square minimization shared by the envelope and Rabi fitters. Parameter
// vectors always hold nbar in slot 0; the remaining slots are model specific.

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace iontherm::detail {

/// Returned for parameter points where the model cannot be evaluated.
inline constexpr double infeasible_chi_square = 1e300;

/// Writes predictions for a parameter vector; throws iontherm::Error for
/// infeasible points (for example a ladder too short for nbar).
using Model = std::function<void(std::span<const double> params, std::span<double> out)>;

using Objective = std::function<double(std::span<const double>)>;

class ChiSquare {
public:
    ChiSquare(Model model, std::vector<double> data, std::vector<double> sigma);

    double operator()(std::span<const double> params) const;
    std::vector<double> predict(std::span<const double> params) const;
    std::size_t points() const { return data_.size(); }
    std::span<const double> inverse_sigma() const { return inv_sigma_; }

private:
    Model model_;
    std::vector<double> data_;
    std::vector<double> inv_sigma_;
};

/// Binomial standard error of a measured fraction. The fraction is pulled
/// towards 1/2 by half a count so outcomes of exactly 0 or 1 keep a nonzero
/// error bar.
double binomial_sigma(double fraction, int shots);

struct Candidate {
    std::vector<double> params;
    double chi_square = 0.0;
};

/// Evaluates chi-square on the full tensor grid and returns up to
/// max_candidates grid-local minima, best first.
std::vector<Candidate> grid_minima(const ChiSquare& chi_square,
                                   const std::vector<std::vector<double>>& axes,
                                   std::size_t max_candidates);

struct Minimum {
    std::vector<double> x;
    double value = 0.0;
    bool converged = false;
};

/// Nelder-Mead (GSL nmsimplex2) with restarts from the incumbent until the
/// restart no longer improves the minimum.
Minimum nelder_mead(const Objective& objective, std::span<const double> start,
                    std::span<const double> step, double size_tolerance, int max_iterations,
                    int max_restarts = 6);

/// Local refinement of a grid candidate. nbar is searched through its square
/// root so the boundary nbar = 0 is reachable; `step` gives the initial
/// simplex extent for every parameter in natural units.
Minimum refine(const ChiSquare& chi_square, std::span<const double> start,
               std::span<const double> step, double size_tolerance = 1e-10,
               int max_iterations = 4000, int max_restarts = 6);

/// Gauss-Newton covariance (J^T W J)^-1 with a central-difference Jacobian.
/// Entries are NaN when the normal matrix is singular.
Eigen::MatrixXd covariance(const ChiSquare& chi_square, std::span<const double> params);

struct ProfileInterval {
    double lower = 0.0;
    double upper = 0.0;
    bool lower_at_zero = false;
};

/// Finds where the profile chi-square along nbar (other parameters
/// re-optimized) rises by one above the minimum. Throws
/// Error(unconstrained_fit) when the profile stays below the threshold all
/// the way to nbar_cap.
ProfileInterval profile_interval(const ChiSquare& chi_square, const Minimum& best,
                                 std::span<const double> step, double sigma_guess,
                                 double nbar_cap);

}  // namespace iontherm::detail
