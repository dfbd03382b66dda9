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

#include "chi_square_fit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "iontherm/error.hpp"
#include "iontherm/parallel.hpp"

namespace iontherm::detail {

namespace {

void disable_gsl_abort() {
    static std::once_flag once;
    std::call_once(once, [] { gsl_set_error_handler_off(); });
}

double trampoline(const gsl_vector* v, void* context) {
    const auto& objective = *static_cast<const Objective*>(context);
    const double value = objective(std::span<const double>(v->data, v->size));
    return std::isfinite(value) ? value : infeasible_chi_square;
}

struct VectorDeleter {
    void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
    void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

Minimum nelder_mead_once(const Objective& objective, std::span<const double> start,
                         std::span<const double> step, double size_tolerance,
                         int max_iterations) {
    const std::size_t dim = start.size();
    std::unique_ptr<gsl_vector, VectorDeleter> x(gsl_vector_alloc(dim));
    std::unique_ptr<gsl_vector, VectorDeleter> s(gsl_vector_alloc(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        gsl_vector_set(x.get(), i, start[i]);
        gsl_vector_set(s.get(), i, step[i]);
    }
    gsl_multimin_function function;
    function.n = dim;
    function.f = &trampoline;
    function.params = const_cast<Objective*>(&objective);

    std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> minimizer(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim));
    gsl_multimin_fminimizer_set(minimizer.get(), &function, x.get(), s.get());

    // Besides the simplex size, stop once chi-square has been flat to 1e-12
    // for a while; flat valleys otherwise keep the simplex from shrinking.
    constexpr int flat_window = 100;
    constexpr double flat_chi_square = 1e-12;
    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(max_iterations));
    Minimum result;
    for (int iter = 0; iter < max_iterations; ++iter) {
        if (gsl_multimin_fminimizer_iterate(minimizer.get()) != GSL_SUCCESS) {
            break;
        }
        const double size = gsl_multimin_fminimizer_size(minimizer.get());
        if (gsl_multimin_test_size(size, size_tolerance) == GSL_SUCCESS) {
            result.converged = true;
            break;
        }
        history.push_back(gsl_multimin_fminimizer_minimum(minimizer.get()));
        if (iter >= flat_window &&
            history[static_cast<std::size_t>(iter - flat_window)] - history.back() < flat_chi_square) {
            result.converged = true;
            break;
        }
    }
    const gsl_vector* best = gsl_multimin_fminimizer_x(minimizer.get());
    result.x.assign(best->data, best->data + best->size);
    result.value = gsl_multimin_fminimizer_minimum(minimizer.get());
    return result;
}

}  // namespace

ChiSquare::ChiSquare(Model model, std::vector<double> data, std::vector<double> sigma)
    : model_(std::move(model)), data_(std::move(data)) {
    inv_sigma_.reserve(sigma.size());
    for (double s : sigma) {
        inv_sigma_.push_back(1.0 / s);
    }
}

std::vector<double> ChiSquare::predict(std::span<const double> params) const {
    std::vector<double> out(data_.size());
    model_(params, out);
    return out;
}

double ChiSquare::operator()(std::span<const double> params) const {
    std::vector<double> prediction;
    try {
        prediction = predict(params);
    } catch (const Error&) {
        return infeasible_chi_square;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) {
        const double r = (prediction[i] - data_[i]) * inv_sigma_[i];
        total += r * r;
    }
    return std::isfinite(total) ? total : infeasible_chi_square;
}

double binomial_sigma(double fraction, int shots) {
    const double n = shots;
    const double p = (fraction * n + 0.5) / (n + 1.0);
    return std::sqrt(p * (1.0 - p) / n);
}

std::vector<Candidate> grid_minima(const ChiSquare& chi_square,
                                   const std::vector<std::vector<double>>& axes,
                                   std::size_t max_candidates) {
    const std::size_t dim = axes.size();
    std::vector<std::size_t> extent(dim);
    std::size_t total = 1;
    for (std::size_t d = 0; d < dim; ++d) {
        extent[d] = axes[d].size();
        total *= extent[d];
    }
    auto unravel = [&](std::size_t flat) {
        std::vector<std::size_t> idx(dim);
        for (std::size_t d = dim; d-- > 0;) {
            idx[d] = flat % extent[d];
            flat /= extent[d];
        }
        return idx;
    };
    auto point = [&](const std::vector<std::size_t>& idx) {
        std::vector<double> p(dim);
        for (std::size_t d = 0; d < dim; ++d) {
            p[d] = axes[d][idx[d]];
        }
        return p;
    };

    std::vector<double> values(total);
    parallel_for(total, [&](std::size_t flat) { values[flat] = chi_square(point(unravel(flat))); });

    std::vector<Candidate> minima;
    for (std::size_t flat = 0; flat < total; ++flat) {
        const double v = values[flat];
        if (v >= infeasible_chi_square) {
            continue;
        }
        bool is_minimum = true;
        std::size_t stride = 1;
        const auto idx = unravel(flat);
        for (std::size_t d = dim; d-- > 0 && is_minimum;) {
            if (idx[d] > 0 && values[flat - stride] < v) {
                is_minimum = false;
            }
            if (idx[d] + 1 < extent[d] && values[flat + stride] < v) {
                is_minimum = false;
            }
            stride *= extent[d];
        }
        if (is_minimum) {
            minima.push_back({point(idx), v});
        }
    }
    std::stable_sort(minima.begin(), minima.end(),
                     [](const Candidate& a, const Candidate& b) { return a.chi_square < b.chi_square; });
    if (minima.size() > max_candidates) {
        minima.resize(max_candidates);
    }
    return minima;
}

Minimum nelder_mead(const Objective& objective, std::span<const double> start,
                    std::span<const double> step, double size_tolerance, int max_iterations,
                    int max_restarts) {
    disable_gsl_abort();
    Minimum best = nelder_mead_once(objective, start, step, size_tolerance, max_iterations);
    for (int restart = 0; restart < max_restarts; ++restart) {
        Minimum next = nelder_mead_once(objective, best.x, step, size_tolerance, max_iterations);
        const bool improved = next.value < best.value - 1e-14 * (1.0 + std::fabs(best.value));
        if (next.value <= best.value) {
            best = std::move(next);
        }
        if (!improved) {
            break;
        }
    }
    return best;
}

Minimum refine(const ChiSquare& chi_square, std::span<const double> start,
               std::span<const double> step, double size_tolerance, int max_iterations,
               int max_restarts) {
    auto to_params = [](std::span<const double> y) {
        std::vector<double> p(y.begin(), y.end());
        p[0] = y[0] * y[0];
        return p;
    };
    const Objective objective = [&](std::span<const double> y) { return chi_square(to_params(y)); };

    std::vector<double> y0(start.begin(), start.end());
    y0[0] = std::sqrt(std::max(start[0], 0.0));
    std::vector<double> y_step(step.begin(), step.end());
    y_step[0] = std::max(std::sqrt(start[0] + step[0]) - y0[0], 1e-3);

    Minimum m = nelder_mead(objective, y0, y_step, size_tolerance, max_iterations, max_restarts);
    m.x = to_params(m.x);
    return m;
}

Eigen::MatrixXd covariance(const ChiSquare& chi_square, std::span<const double> params) {
    const auto dim = static_cast<Eigen::Index>(params.size());
    const auto n = static_cast<Eigen::Index>(chi_square.points());
    const auto inv_sigma = chi_square.inverse_sigma();
    Eigen::MatrixXd jacobian(n, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        std::vector<double> up(params.begin(), params.end());
        std::vector<double> down(params.begin(), params.end());
        const double h = 1e-6 * std::max(std::fabs(params[j]), 1e-2);
        up[j] += h;
        double width = h;
        if (j == 0 && params[0] - h < 0.0) {
            down[j] = params[0];
        } else {
            down[j] -= h;
            width = 2.0 * h;
        }
        const auto f_up = chi_square.predict(up);
        const auto f_down = chi_square.predict(down);
        for (Eigen::Index i = 0; i < n; ++i) {
            jacobian(i, j) = inv_sigma[i] * (f_up[i] - f_down[i]) / width;
        }
    }
    const Eigen::MatrixXd normal = jacobian.transpose() * jacobian;
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(normal);
    const auto& singular = svd.singularValues();
    if (singular.size() == 0 || !(singular(singular.size() - 1) > 1e-14 * singular(0))) {
        return Eigen::MatrixXd::Constant(dim, dim, std::numeric_limits<double>::quiet_NaN());
    }
    return normal.inverse();
}

ProfileInterval profile_interval(const ChiSquare& chi_square, const Minimum& best,
                                 std::span<const double> step, double sigma_guess,
                                 double nbar_cap) {
    const double nbar_best = best.x[0];
    const double target = best.value + 1.0;
    const std::vector<double> others_best(best.x.begin() + 1, best.x.end());
    const std::vector<double> others_step(step.begin() + 1, step.end());
    std::vector<double> others = others_best;

    auto excess = [&](double nbar) {
        double value = 0.0;
        if (others.empty()) {
            const double p[1] = {nbar};
            value = chi_square(p);
        } else {
            const Objective objective = [&](std::span<const double> z) {
                std::vector<double> p(z.size() + 1);
                p[0] = nbar;
                std::copy(z.begin(), z.end(), p.begin() + 1);
                return chi_square(p);
            };
            std::vector<double> small_step(others_step);
            for (auto& s : small_step) {
                s *= 0.1;
            }
            Minimum m = nelder_mead(objective, others, small_step, 1e-9, 2000);
            others = m.x;
            value = m.value;
        }
        return value - target;
    };

    const double base_step =
        (std::isfinite(sigma_guess) && sigma_guess > 0.0) ? sigma_guess : 0.1 * std::max(nbar_best, 1.0);
    const auto tolerance = [base_step](double a, double b) {
        return std::fabs(b - a) < 1e-3 * base_step;
    };

    ProfileInterval interval;

    // Upper side.
    others = others_best;
    double inside = nbar_best;
    double g_inside = best.value - target;
    for (int k = 0;; ++k) {
        double trial = nbar_best + base_step * std::ldexp(1.0, k);
        const bool at_cap = trial >= nbar_cap;
        trial = std::min(trial, nbar_cap);
        const double g = excess(trial);
        if (g >= 0.0) {
            std::uintmax_t iterations = 60;
            const auto [a, b] = boost::math::tools::toms748_solve(excess, inside, trial, g_inside, g,
                                                                  tolerance, iterations);
            interval.upper = 0.5 * (a + b);
            break;
        }
        if (at_cap || k > 60) {
            throw Error(ErrorKind::unconstrained_fit,
                        "chi-square profile never rises by one below nbar = " + std::to_string(nbar_cap));
        }
        inside = trial;
        g_inside = g;
    }

    // Lower side, bounded by nbar = 0.
    others = others_best;
    inside = nbar_best;
    g_inside = best.value - target;
    if (nbar_best <= 0.0) {
        interval.lower = 0.0;
        interval.lower_at_zero = true;
        return interval;
    }
    for (int k = 0;; ++k) {
        const double trial = std::max(nbar_best - base_step * std::ldexp(1.0, k), 0.0);
        const double g = excess(trial);
        if (g >= 0.0) {
            std::uintmax_t iterations = 60;
            const auto [a, b] = boost::math::tools::toms748_solve(excess, trial, inside, g, g_inside,
                                                                  tolerance, iterations);
            interval.lower = 0.5 * (a + b);
            break;
        }
        if (trial <= 0.0) {
            interval.lower = 0.0;
            interval.lower_at_zero = true;
            break;
        }
        inside = trial;
        g_inside = g;
    }
    return interval;
}

}  // namespace iontherm::detail
