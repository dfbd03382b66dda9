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

#include "iontherm/thermometry.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <memory>
#include <numeric>
#include <random>
#include <string>

#include <gsl/gsl_fit.h>

#include "chi_square_fit.hpp"
#include "iontherm/constants.hpp"

namespace iontherm {

namespace {

constexpr double grid_nbar_floor = 0.01;
constexpr double grid_nbar_ceiling = 1000.0;

std::vector<double> log_axis(double lo, double hi, int count) {
    std::vector<double> axis(static_cast<std::size_t>(count));
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) {
        axis[static_cast<std::size_t>(i)] = lo * std::exp(step * i);
    }
    return axis;
}

std::vector<double> linear_axis(double first, double step, int count) {
    std::vector<double> axis(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        axis[static_cast<std::size_t>(i)] = first + step * i;
    }
    return axis;
}

// Largest nbar whose untruncated thermal tail above n_max stays below the
// leak tolerance.
double displaced_nbar_limit(int n_max) {
    return 0.999 / std::expm1(std::log(1.0 / truncation_leak_tolerance) / (n_max + 1.0));
}

// Displaced-thermal populations evaluated on the shortest ladder from a
// doubling sequence that passes the truncation checks, zero-padded to n_max.
// The last result per thread is cached since grid and profile scans revisit
// the same (nbar, alpha) many times.
class DisplacedLadders {
public:
    explicit DisplacedLadders(int n_max) : n_max_(n_max), id_(next_id_++) {
        for (int size = 63; size < n_max; size = 2 * size + 1) {
            generators_.emplace_back(size);
        }
        generators_.emplace_back(n_max);
    }

    const std::vector<double>& populations(double nbar, double alpha) const {
        thread_local Cache cache;
        if (cache.owner != id_ || cache.nbar != nbar || cache.alpha != alpha) {
            cache.owner = 0;
            cache.failure = nullptr;
            try {
                cache.populations = compute(nbar, alpha);
            } catch (const Error&) {
                cache.failure = std::current_exception();
            }
            cache.owner = id_;
            cache.nbar = nbar;
            cache.alpha = alpha;
        }
        if (cache.failure) {
            std::rethrow_exception(cache.failure);
        }
        return cache.populations;
    }

private:
    struct Cache {
        std::uint64_t owner = 0;
        double nbar = 0.0;
        double alpha = 0.0;
        std::vector<double> populations;
        std::exception_ptr failure;
    };

    std::vector<double> compute(double nbar, double alpha) const {
        for (std::size_t i = 0; i < generators_.size(); ++i) {
            const auto& generator = generators_[i];
            const bool last = i + 1 == generators_.size();
            if (!last && nbar > 0.0 &&
                std::pow(nbar / (nbar + 1.0), generator.n_max() + 1.0) > truncation_leak_tolerance) {
                continue;
            }
            try {
                auto state = displaced_thermal_populations(generator, nbar, alpha);
                state.populations.resize(static_cast<std::size_t>(n_max_) + 1, 0.0);
                return std::move(state.populations);
            } catch (const Error& e) {
                if (last || e.kind() != ErrorKind::truncation_insufficient) {
                    throw;
                }
            }
        }
        throw Error(ErrorKind::truncation_insufficient, "no ladder holds the displaced state");
    }

    int n_max_;
    std::uint64_t id_;
    std::vector<DisplacementGenerator> generators_;
    static inline std::atomic<std::uint64_t> next_id_{1};
};

FitResult grid_point_result(FitMethod method, const detail::Candidate& c) {
    FitResult r;
    r.method = method;
    r.nbar = c.params[0];
    r.chi_square = c.chi_square;
    return r;
}

double sigma_from_interval(const detail::ProfileInterval& interval, double nbar) {
    if (interval.lower_at_zero) {
        return interval.upper - nbar;
    }
    return 0.5 * (interval.upper - interval.lower);
}

struct Refinement {
    detail::Minimum best;
    double uncertainty = 0.0;
};

// Grid, multi-start refinement and profile uncertainty.
Refinement minimize(FitMethod method, const detail::ChiSquare& chi_square,
                    const std::vector<std::vector<double>>& axes, std::span<const double> step,
                    std::size_t starts, double nbar_cap) {
    const auto candidates = detail::grid_minima(chi_square, axes, starts);
    if (candidates.empty()) {
        throw Error(ErrorKind::fit_failed, "no feasible grid point");
    }
    // Every candidate is refined loosely; only the winner is polished.
    std::vector<detail::Minimum> local;
    for (const auto& candidate : candidates) {
        std::vector<double> local_step(step.begin(), step.end());
        local_step[0] = std::max(0.1 * candidate.params[0], step[0]);
        local.push_back(detail::refine(chi_square, candidate.params, local_step, 1e-5, 400, 0));
    }
    std::sort(local.begin(), local.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
    auto polish = [&](const detail::Minimum& m) {
        std::vector<double> polish_step(step.begin(), step.end());
        for (auto& s : polish_step) {
            s *= 0.01;
        }
        polish_step[0] = std::max(1e-3 * m.x[0], 1e-4);
        return detail::refine(chi_square, m.x, polish_step);
    };
    detail::Minimum best = polish(local.front());
    if (!best.converged || best.value >= detail::infeasible_chi_square) {
        throw FitFailedError("local refinement did not converge",
                             grid_point_result(method, candidates.front()));
    }
    if (best.x[0] > nbar_cap) {
        throw Error(ErrorKind::unconstrained_fit,
                    "best nbar " + std::to_string(best.x[0]) + " beyond the model range");
    }
    auto interval_around = [&](const detail::Minimum& m) {
        const Eigen::MatrixXd cov = detail::covariance(chi_square, m.x);
        return detail::profile_interval(chi_square, m, step, std::sqrt(cov(0, 0)), nbar_cap);
    };
    auto interval = interval_around(best);
    // Other local minima within delta chi-square = 1 belong to the confidence
    // region too; the interval spans all of them.
    for (std::size_t i = 1; i < local.size(); ++i) {
        if (local[i].value > best.value + 1.0 ||
            (local[i].x[0] >= interval.lower && local[i].x[0] <= interval.upper)) {
            continue;
        }
        const auto other = polish(local[i]);
        if (!other.converged || other.value > best.value + 1.0 || other.x[0] > nbar_cap) {
            continue;
        }
        const auto extra = interval_around(other);
        interval.upper = std::max(interval.upper, extra.upper);
        if (extra.lower < interval.lower) {
            interval.lower = extra.lower;
            interval.lower_at_zero = extra.lower_at_zero;
        }
    }
    Refinement out;
    out.uncertainty = sigma_from_interval(interval, best.x[0]);
    out.best = std::move(best);
    return out;
}

}  // namespace

std::string_view to_string(FitMethod method) {
    switch (method) {
        case FitMethod::ratio: return "ratio";
        case FitMethod::envelope: return "envelope";
        case FitMethod::rabi_decoherence: return "rabi_decoherence";
        case FitMethod::heating_rate: return "heating_rate";
    }
    return "unknown";
}

std::string_view to_string(EnvelopeModel model) {
    switch (model) {
        case EnvelopeModel::thermal: return "thermal";
        case EnvelopeModel::displaced_thermal: return "displaced_thermal";
    }
    return "unknown";
}

FitResult fit_sideband_ratio(double p_red, double p_blue, int shots_red, int shots_blue) {
    if (!(p_red >= 0.0 && p_red <= 1.0) || !(p_blue >= 0.0 && p_blue <= 1.0)) {
        throw Error(ErrorKind::invalid_parameter, "sideband excitations must lie in [0, 1]");
    }
    if (shots_red < 1 || shots_blue < 1) {
        throw Error(ErrorKind::invalid_parameter, "shots must be >= 1");
    }
    if (p_blue == 0.0) {
        throw Error(ErrorKind::undefined_ratio, "blue sideband excitation is zero");
    }
    const double r = p_red / p_blue;
    if (r >= 1.0) {
        throw Error(ErrorKind::out_of_method_range,
                    "red/blue ratio " + std::to_string(r) + " >= 1; use the envelope method");
    }
    const double var_red = p_red * (1.0 - p_red) / shots_red;
    const double var_blue = p_blue * (1.0 - p_blue) / shots_blue;
    const double sigma_r = std::sqrt(var_red / (p_blue * p_blue) +
                                     p_red * p_red * var_blue / std::pow(p_blue, 4));
    FitResult result;
    result.method = FitMethod::ratio;
    result.nbar = r / (1.0 - r);
    result.nbar_uncertainty = sigma_r / ((1.0 - r) * (1.0 - r));
    return result;
}

FitResult fit_envelope(const SidebandSpectrum& measured, double eta, const EnvelopeFitOptions& options) {
    const int max_order = measured.max_order;
    const auto orders = static_cast<std::size_t>(2 * max_order + 1);
    if (max_order < 2) {
        throw Error(ErrorKind::insufficient_data, "envelope fits need sidebands up to at least order 2");
    }
    if (measured.amplitudes.size() != orders) {
        throw Error(ErrorKind::invalid_parameter, "spectrum amplitudes do not match max_order");
    }
    if (!measured.shots || measured.shots->size() != orders) {
        throw Error(ErrorKind::invalid_parameter, "envelope fits need shot counts for every order");
    }
    if (!(eta > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "eta must be positive");
    }
    std::vector<double> sigma(orders);
    for (std::size_t i = 0; i < orders; ++i) {
        const double p = measured.amplitudes[i];
        const int shots = (*measured.shots)[i];
        if (!(p >= 0.0 && p <= 1.0) || shots < 1) {
            throw Error(ErrorKind::invalid_parameter, "invalid amplitude or shot count in spectrum");
        }
        sigma[i] = detail::binomial_sigma(p, shots);
    }
    const double mean = std::accumulate(measured.amplitudes.begin(), measured.amplitudes.end(), 0.0) /
                        static_cast<double>(orders);
    bool degenerate = true;
    for (std::size_t i = 0; i < orders; ++i) {
        if (std::fabs(measured.amplitudes[i] - mean) > 2.0 * sigma[i]) {
            degenerate = false;
        }
    }
    if (degenerate) {
        throw Error(ErrorKind::unconstrained_fit, "all sideband amplitudes agree within noise");
    }

    const int n_max = options.trunc.n_max;
    const auto couplings = std::make_shared<const SidebandCouplings>(eta, n_max, max_order);
    const bool displaced = options.model == EnvelopeModel::displaced_thermal;
    std::shared_ptr<const DisplacedLadders> ladders;
    if (displaced) {
        ladders = std::make_shared<const DisplacedLadders>(n_max);
    }

    // params = (nbar, Omega00 t) or (nbar, alpha^2, Omega00 t). The coherent
    // part enters as alpha^2 so chi-square is not flat at alpha = 0.
    detail::Model model = [couplings, ladders, max_order, n_max](std::span<const double> params,
                                                                  std::span<double> out) {
        std::vector<double> thermal;
        const std::vector<double>& populations =
            ladders ? ladders->populations(params[0], std::sqrt(std::fabs(params[1])))
                    : (thermal = thermal_populations(params[0], {n_max}).populations);
        const std::size_t support = population_support(populations);
        const double area = std::fabs(params.back());
        for (int m = -max_order; m <= max_order; ++m) {
            out[static_cast<std::size_t>(m + max_order)] =
                excitation(*couplings, populations, m, area, support);
        }
    };
    const detail::ChiSquare chi_square(model, measured.amplitudes, sigma);

    const double nbar_cap = displaced ? std::min(grid_nbar_ceiling, displaced_nbar_limit(n_max))
                                      : std::min(grid_nbar_ceiling, 0.45 * n_max);
    if (nbar_cap <= grid_nbar_floor) {
        throw Error(ErrorKind::truncation_insufficient, "ladder too short for an envelope fit");
    }
    std::vector<std::vector<double>> axes;
    std::vector<double> step;
    std::size_t starts = 3;
    if (displaced) {
        // Area varies fastest so consecutive grid points share populations.
        std::vector<double> coherent = linear_axis(0.0, 0.25, 13);
        for (auto& a : coherent) {
            a *= a;
        }
        axes = {log_axis(grid_nbar_floor, nbar_cap, 24), coherent,
                linear_axis(constants::two_pi / 64.0, constants::two_pi / 64.0, 64)};
        step = {0.1, 0.1, constants::two_pi / 128.0};
        starts = 4;
    } else {
        axes = {log_axis(grid_nbar_floor, nbar_cap, 48),
                linear_axis(constants::two_pi / 64.0, constants::two_pi / 64.0, 64)};
        step = {0.1, constants::two_pi / 128.0};
    }

    const Refinement fit = minimize(FitMethod::envelope, chi_square, axes, step, starts, nbar_cap);

    FitResult result;
    result.method = FitMethod::envelope;
    result.nbar = fit.best.x[0];
    result.nbar_uncertainty = fit.uncertainty;
    result.pulse_area = std::fabs(fit.best.x.back());
    if (displaced) {
        result.alpha = std::sqrt(std::fabs(fit.best.x[1]));
    }
    result.chi_square = fit.best.value;
    result.degrees_of_freedom = static_cast<int>(orders) - static_cast<int>(step.size());
    return result;
}

FitResult fit_rabi_decoherence(std::span<const double> times, std::span<const double> excitations,
                               int shots, double eta, TruncationConfig trunc) {
    if (times.size() != excitations.size()) {
        throw Error(ErrorKind::invalid_parameter, "times and excitations differ in length");
    }
    if (times.size() < 10) {
        throw Error(ErrorKind::insufficient_data, "Rabi decoherence fits need at least 10 points");
    }
    if (shots < 1) {
        throw Error(ErrorKind::invalid_parameter, "shots must be >= 1");
    }
    if (!(eta > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "eta must be positive");
    }
    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
            throw Error(ErrorKind::invalid_parameter, "times must be nonnegative and strictly increasing");
        }
        if (i > 0) {
            min_spacing = std::min(min_spacing, times[i] - times[i - 1]);
        }
        if (!(excitations[i] >= 0.0 && excitations[i] <= 1.0)) {
            throw Error(ErrorKind::invalid_parameter, "excitations must lie in [0, 1]");
        }
    }
    const double t_max = times.back();
    std::vector<double> sigma(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        sigma[i] = detail::binomial_sigma(excitations[i], shots);
    }

    const int n_max = trunc.n_max;
    const auto couplings = std::make_shared<const SidebandCouplings>(eta, n_max, 0);
    std::vector<double> scaled_times(times.begin(), times.end());
    for (auto& t : scaled_times) {
        t /= t_max;
    }
    // params = (nbar, Omega00 * t_max)
    detail::Model model = [couplings, scaled_times, n_max](std::span<const double> params,
                                                            std::span<double> out) {
        const MotionalState state = thermal_populations(params[0], {n_max});
        const std::size_t support = population_support(state.populations);
        const double area = std::fabs(params[1]);
        for (std::size_t i = 0; i < scaled_times.size(); ++i) {
            out[i] = excitation(*couplings, state.populations, 0, area * scaled_times[i], support);
        }
    };
    const detail::ChiSquare chi_square(model, {excitations.begin(), excitations.end()}, sigma);

    // Omega00 t_max from one oscillation (pi) up to two samples per period.
    const double area_step = constants::pi / 8.0;
    const double area_hi = std::max(2.0 * constants::pi, constants::pi * t_max / (2.0 * min_spacing));
    const int area_count = std::max(2, static_cast<int>((area_hi - constants::pi) / area_step) + 1);
    const double nbar_cap = std::min(grid_nbar_ceiling, 0.45 * n_max);
    const std::vector<std::vector<double>> axes = {log_axis(grid_nbar_floor, nbar_cap, 24),
                                                   linear_axis(constants::pi, area_step, area_count)};
    const std::vector<double> step = {0.1, area_step / 2.0};

    const Refinement fit = minimize(FitMethod::rabi_decoherence, chi_square, axes, step, 3, nbar_cap);
    const double area = std::fabs(fit.best.x[1]);
    if (area / constants::pi < 2.0) {
        throw Error(ErrorKind::insufficient_data,
                    "data cover fewer than two carrier oscillations at the fitted Rabi frequency");
    }

    FitResult result;
    result.method = FitMethod::rabi_decoherence;
    result.nbar = fit.best.x[0];
    result.nbar_uncertainty = fit.uncertainty;
    result.base_rabi = area / t_max;
    result.chi_square = fit.best.value;
    result.degrees_of_freedom = static_cast<int>(times.size()) - 2;
    return result;
}

HeatingRateResult fit_heating_rate(const HeatingSeries& series) {
    const std::size_t n = series.delays_ms.size();
    if (series.nbars.size() != n || series.uncertainties.size() != n) {
        throw Error(ErrorKind::invalid_parameter, "heating series columns differ in length");
    }
    if (n < 2) {
        throw Error(ErrorKind::insufficient_data, "heating-rate fits need at least two points");
    }
    std::vector<double> weights(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !(series.delays_ms[i] > series.delays_ms[i - 1])) {
            throw Error(ErrorKind::invalid_parameter, "delays must be strictly increasing");
        }
        if (!(series.uncertainties[i] > 0.0)) {
            throw Error(ErrorKind::invalid_parameter, "uncertainties must be positive");
        }
        weights[i] = 1.0 / (series.uncertainties[i] * series.uncertainties[i]);
    }
    double c0 = 0.0, c1 = 0.0, cov00 = 0.0, cov01 = 0.0, cov11 = 0.0, chisq = 0.0;
    const int status = gsl_fit_wlinear(series.delays_ms.data(), 1, weights.data(), 1, series.nbars.data(),
                                       1, n, &c0, &c1, &cov00, &cov01, &cov11, &chisq);
    if (status != 0) {
        throw Error(ErrorKind::numerical_accuracy, "weighted linear fit failed");
    }
    HeatingRateResult result;
    result.slope = c1;
    result.slope_uncertainty = std::sqrt(cov11);
    result.intercept = c0;
    result.intercept_uncertainty = std::sqrt(cov00);
    result.chi_square = chisq;
    result.degrees_of_freedom = static_cast<int>(n) - 2;
    return result;
}

HeatingDifference dynamic_heating_difference(const FitResult& transport_fit,
                                             const FitResult& reference_fit) {
    HeatingDifference d;
    d.delta_nbar = transport_fit.nbar - reference_fit.nbar;
    d.uncertainty = std::hypot(transport_fit.nbar_uncertainty, reference_fit.nbar_uncertainty);
    d.below_minus_one_sigma = d.delta_nbar < -d.uncertainty;
    return d;
}

BootstrapSummary bootstrap_envelope(const SidebandSpectrum& measured, double eta,
                                    const EnvelopeFitOptions& options, int replicas,
                                    std::uint64_t seed) {
    if (replicas < 2) {
        throw Error(ErrorKind::invalid_parameter, "bootstrap needs at least two replicas");
    }
    if (!measured.shots) {
        throw Error(ErrorKind::invalid_parameter, "bootstrap needs shot counts");
    }
    std::mt19937_64 rng(seed);
    std::vector<double> nbars;
    BootstrapSummary summary;
    summary.replicas = replicas;
    for (int r = 0; r < replicas; ++r) {
        SidebandSpectrum replica = measured;
        for (std::size_t i = 0; i < replica.amplitudes.size(); ++i) {
            const int shots = (*measured.shots)[i];
            std::binomial_distribution<int> draw(shots, measured.amplitudes[i]);
            replica.amplitudes[i] = static_cast<double>(draw(rng)) / shots;
        }
        try {
            nbars.push_back(fit_envelope(replica, eta, options).nbar);
        } catch (const Error&) {
            ++summary.failures;
        }
    }
    if (nbars.size() < 2) {
        throw Error(ErrorKind::fit_failed, "too few bootstrap replicas converged");
    }
    const double count = static_cast<double>(nbars.size());
    summary.mean_nbar = std::accumulate(nbars.begin(), nbars.end(), 0.0) / count;
    double ss = 0.0;
    for (double v : nbars) {
        ss += (v - summary.mean_nbar) * (v - summary.mean_nbar);
    }
    summary.stddev_nbar = std::sqrt(ss / (count - 1.0));
    return summary;
}

double temperature_from_nbar(double nbar, double secular_frequency_hz) {
    if (!(nbar >= 0.0) || !(secular_frequency_hz > 0.0)) {
        throw Error(ErrorKind::invalid_parameter, "need nbar >= 0 and a positive secular frequency");
    }
    if (nbar == 0.0) {
        return 0.0;
    }
    const double quantum = constants::hbar * constants::two_pi * secular_frequency_hz;
    return quantum / (constants::boltzmann * std::log1p(1.0 / nbar));
}

}  // namespace iontherm
