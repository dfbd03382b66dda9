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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <string_view>

#include "CLI11.hpp"
#include "iontherm/constants.hpp"
#include "iontherm/error.hpp"
#include "iontherm/io.hpp"
#include "iontherm/oscillator.hpp"
#include "iontherm/spectrum.hpp"
#include "iontherm/thermometry.hpp"
#include "iontherm/transport.hpp"
#include "report.hpp"

#ifndef IONTHERM_VERSION
#define IONTHERM_VERSION "0.0.0"
#endif

namespace iontherm::cli {

namespace {

/// Usage problems found after CLI11 parsing (flag combinations, ranges).
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool is_usage_kind(ErrorKind kind) {
    return kind == ErrorKind::invalid_parameter || kind == ErrorKind::invalid_configuration ||
           kind == ErrorKind::invalid_transition;
}

struct Io {
    std::istream& in;
    std::ostream& out;
    std::string input_path = "-";
    std::string output_path;

    std::string read_input() const {
        if (input_path == "-") {
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        }
        std::ifstream file(input_path, std::ios::binary);
        if (!file) {
            throw UsageError("cannot open input file '" + input_path + "'");
        }
        std::ostringstream buffer;
        buffer << file.rdbuf();
        return buffer.str();
    }

    void write_output(const std::string& text) const {
        if (output_path.empty() || output_path == "-") {
            out << text;
            out.flush();
            return;
        }
        std::ofstream file(output_path, std::ios::binary | std::ios::trunc);
        file << text;
        if (!file) {
            throw UsageError("cannot write output file '" + output_path + "'");
        }
    }
};

void add_io(CLI::App* app, Io& io, bool with_input) {
    if (with_input) {
        app->add_option("--input", io.input_path, "Input file, '-' for standard input")
            ->capture_default_str();
    }
    app->add_option("--output", io.output_path, "Output file (default: standard output)");
}

std::string fmt(double value) { return format_double(value); }

// Parses "lo:hi:step" into the inclusive grid lo, lo + step, ..., <= hi.
std::vector<double> parse_range(const std::string& text, std::string_view flag) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = text.find(':', start);
        const std::string piece = text.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(piece.data(), piece.data() + piece.size(), value);
        if (piece.empty() || ec != std::errc() || ptr != piece.data() + piece.size() || !std::isfinite(value)) {
            throw UsageError(std::string(flag) + " expects lo:hi:step, got '" + text + "'");
        }
        parts.push_back(value);
        if (colon == std::string::npos) {
            break;
        }
        start = colon + 1;
    }
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
        throw UsageError(std::string(flag) + " expects lo:hi:step with hi >= lo and step > 0");
    }
    const auto count = static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] * (1.0 + 1e-12))) + 1;
    std::vector<double> grid(count);
    for (std::size_t i = 0; i < count; ++i) {
        grid[i] = parts[0] + parts[2] * static_cast<double>(i);
    }
    return grid;
}

MotionalState make_state(double nbar, double alpha, int n_max) {
    const TruncationConfig trunc{n_max};
    return alpha > 0.0 ? displaced_thermal_populations(nbar, alpha, trunc) : thermal_populations(nbar, trunc);
}

// ---------------------------------------------------------------- options

struct SpectrumOptions {
    double nbar = 0.0;
    double alpha = 0.0;
    double eta = 0.0;
    double omega0t = 0.0;
    int orders = 4;
    int shots = 500;
    int nmax = 1000;
};

struct SynthOptions {
    std::string kind = "spectrum";
    SpectrumOptions spectrum;
    std::uint64_t seed = 0;
    double rabi_khz = 50.0;
    double tmax_us = 100.0;
    int points = 60;
    double rate = 3.0;
    std::string delays_ms = "0:6:1";
    double sigma = 0.3;
};

struct FitOptions {
    double eta = 0.0;
    std::string model = "thermal";
    int nmax = 1000;
    int bootstrap = 0;
    std::uint64_t seed = 1;
};

struct TransportOptions {
    int steps = 120;
    int legs = 2;
    double distance_um = 0.0;
    double fax_mhz = 0.0;
    double cutoff_khz = 60.0;
    double relax_us = 50.0;
    double mass_amu = 39.9626;
    std::string scan_khz;
};

void add_state_options(CLI::App* app, SpectrumOptions& o, bool nbar_required) {
    auto* nbar = app->add_option("--nbar", o.nbar, "Mean thermal occupation")->check(CLI::NonNegativeNumber);
    if (nbar_required) {
        nbar->required();
    }
    app->add_option("--alpha", o.alpha, "Coherent displacement amplitude")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app->add_option("--nmax", o.nmax, "Fock ladder truncation")->check(CLI::PositiveNumber)->capture_default_str();
}

// ------------------------------------------------------------- subcommands

std::vector<std::string> spectrum_comments(std::string_view command, const SpectrumOptions& o) {
    return {"iontherm " + std::string(version()) + " " + std::string(command),
            "nbar=" + fmt(o.nbar) + " alpha=" + fmt(o.alpha) + " eta=" + fmt(o.eta) +
                " omega0t=" + fmt(o.omega0t) + " nmax=" + std::to_string(o.nmax)};
}

SidebandSpectrum ideal_spectrum(const SpectrumOptions& o) {
    const auto state = make_state(o.nbar, o.alpha, o.nmax);
    auto spectrum = sideband_envelope(state, o.eta, ProbePulse{o.omega0t, 1.0}, o.orders);
    spectrum.shots = std::vector<int>(spectrum.amplitudes.size(), o.shots);
    return spectrum;
}

int simulate_spectrum(const SpectrumOptions& o, const Io& io) {
    io.write_output(serialize_spectrum(to_spectrum_file(ideal_spectrum(o), spectrum_comments("simulate-spectrum", o))));
    return exit_ok;
}

int synth(const SynthOptions& o, const Io& io, const CLI::App& app) {
    const std::string seed_token = "seed=" + std::to_string(o.seed);
    if (o.kind == "spectrum") {
        if (app.count("--eta") == 0 || app.count("--omega0t") == 0) {
            throw UsageError("synth --kind spectrum requires --eta and --omega0t");
        }
        const auto measured = synthesize_measurement(ideal_spectrum(o.spectrum), o.spectrum.shots, o.seed);
        auto comments = spectrum_comments("synth", o.spectrum);
        comments.back() += " shots=" + std::to_string(o.spectrum.shots) + " " + seed_token;
        io.write_output(serialize_spectrum(to_spectrum_file(measured, comments)));
        return exit_ok;
    }
    if (o.kind == "flop") {
        if (app.count("--eta") == 0) {
            throw UsageError("synth --kind flop requires --eta");
        }
        if (!(o.tmax_us > 0.0) || o.points < 2) {
            throw UsageError("synth --kind flop needs --tmax-us > 0 and --points >= 2");
        }
        const auto& s = o.spectrum;
        const double base_rabi = constants::two_pi * o.rabi_khz * 1e3;
        FlopCurve curve;
        for (int i = 1; i <= o.points; ++i) {
            curve.times.push_back(o.tmax_us * 1e-6 * i / o.points);
        }
        curve.excitations = carrier_flop_curve(make_state(s.nbar, s.alpha, s.nmax), s.eta, base_rabi, curve.times);
        const auto measured = synthesize_measurement(curve, s.shots, o.seed);
        std::vector<std::string> comments = {
            "iontherm " + std::string(version()) + " synth flop",
            "nbar=" + fmt(s.nbar) + " alpha=" + fmt(s.alpha) + " eta=" + fmt(s.eta) + " rabi_khz=" +
                fmt(o.rabi_khz) + " nmax=" + std::to_string(s.nmax) + " shots=" + std::to_string(s.shots) + " " +
                seed_token};
        io.write_output(serialize_flop_file(to_flop_file(measured, comments)));
        return exit_ok;
    }
    if (o.kind == "heating") {
        if (!(o.sigma > 0.0)) {
            throw UsageError("synth --kind heating needs --sigma > 0");
        }
        HeatingSeries series;
        std::mt19937_64 rng(o.seed);
        std::normal_distribution<double> noise(0.0, o.sigma);
        for (double d : parse_range(o.delays_ms, "--delays-ms")) {
            series.delays_ms.push_back(d);
            series.nbars.push_back(o.spectrum.nbar + o.rate * d + noise(rng));
            series.uncertainties.push_back(o.sigma);
        }
        io.write_output(serialize_heating_series(series));
        return exit_ok;
    }
    throw UsageError("synth --kind must be spectrum, flop or heating");
}

FitReport base_report(std::string method, const std::string& input) {
    FitReport report;
    report.method = std::move(method);
    report.input_sha256 = sha256_hex(input);
    report.version = version();
    return report;
}

void fill(FitReport& report, const FitResult& fit) {
    report.nbar = fit.nbar;
    report.nbar_uncertainty = fit.nbar_uncertainty;
    report.chi_square = fit.chi_square;
    report.dof = fit.degrees_of_freedom;
    if (fit.pulse_area) {
        report.parameters["pulse_area"] = *fit.pulse_area;
    }
    if (fit.base_rabi) {
        report.parameters["base_rabi"] = *fit.base_rabi;
    }
    if (fit.alpha) {
        report.parameters["alpha"] = *fit.alpha;
    }
}

// Runs a fit body and converts library failures into an error report.
template <typename Body>
int run_fit(FitReport report, const Io& io, Body&& body) {
    try {
        body(report);
    } catch (const Error& e) {
        if (is_usage_kind(e.kind())) {
            throw;
        }
        report.status = "error";
        report.error_kind = std::string(to_string(e.kind()));
        report.error_message = e.what();
        report.nbar.reset();
        report.nbar_uncertainty.reset();
        report.parameters.clear();
        report.chi_square.reset();
        report.dof.reset();
        report.bootstrap.reset();
        io.write_output(serialize_report(report));
        return exit_failure;
    }
    io.write_output(serialize_report(report));
    return exit_ok;
}

int fit_ratio(const Io& io) {
    const std::string input = io.read_input();
    return run_fit(base_report("ratio", input), io, [&](FitReport& report) {
        const auto spectrum = to_sideband_spectrum(parse_spectrum(input));
        report.seed = spectrum.seed;
        fill(report, fit_sideband_ratio(spectrum.amplitude(-1), spectrum.amplitude(1), spectrum.shots_at(-1),
                                        spectrum.shots_at(1)));
    });
}

int fit_envelope_command(const FitOptions& o, const Io& io) {
    EnvelopeFitOptions options;
    if (o.model == "thermal") {
        options.model = EnvelopeModel::thermal;
    } else if (o.model == "displaced-thermal" || o.model == "displaced_thermal") {
        options.model = EnvelopeModel::displaced_thermal;
    } else {
        throw UsageError("--model must be thermal or displaced-thermal");
    }
    if (o.bootstrap == 1 || o.bootstrap < 0) {
        throw UsageError("--bootstrap needs 0 or at least 2 replicas");
    }
    options.trunc.n_max = o.nmax;
    const std::string input = io.read_input();
    auto report = base_report("envelope", input);
    report.model = std::string(to_string(options.model));
    return run_fit(report, io, [&](FitReport& r) {
        const auto spectrum = to_sideband_spectrum(parse_spectrum(input));
        r.seed = spectrum.seed;
        fill(r, fit_envelope(spectrum, o.eta, options));
        if (o.bootstrap > 0) {
            const auto b = bootstrap_envelope(spectrum, o.eta, options, o.bootstrap, o.seed);
            r.bootstrap = BootstrapReport{b.replicas, b.failures, b.mean_nbar, b.stddev_nbar, o.seed};
        }
    });
}

int fit_rabi_command(const FitOptions& o, const Io& io) {
    const std::string input = io.read_input();
    return run_fit(base_report("rabi_decoherence", input), io, [&](FitReport& report) {
        const auto curve = to_flop_curve(parse_flop_file(input));
        report.seed = curve.seed;
        if (curve.times.empty()) {
            throw Error(ErrorKind::insufficient_data, "flop curve has no points");
        }
        const auto& shots = *curve.shots;
        if (std::adjacent_find(shots.begin(), shots.end(), std::not_equal_to<>()) != shots.end()) {
            throw Error(ErrorKind::insufficient_data, "fit-rabi needs the same shot count at every time");
        }
        fill(report, fit_rabi_decoherence(curve.times, curve.excitations, shots.front(), o.eta,
                                          TruncationConfig{o.nmax}));
    });
}

int heating_rate(const Io& io) {
    const std::string input = io.read_input();
    return run_fit(base_report("heating_rate", input), io, [&](FitReport& report) {
        const auto fit = fit_heating_rate(parse_heating_series(input));
        report.nbar = fit.intercept;
        report.nbar_uncertainty = fit.intercept_uncertainty;
        report.parameters["slope_quanta_per_ms"] = fit.slope;
        report.parameters["slope_uncertainty"] = fit.slope_uncertainty;
        report.chi_square = fit.chi_square;
        report.dof = fit.degrees_of_freedom;
    });
}

int transport_scan(const TransportOptions& o, const Io& io, std::ostream& err) {
    TransportScenario scenario;
    scenario.n_steps = o.steps;
    scenario.legs = o.legs;
    scenario.distance_m = o.distance_um * 1e-6;
    scenario.secular_frequency_hz = o.fax_mhz * 1e6;
    scenario.filter_cutoff_hz = o.cutoff_khz * 1e3;
    scenario.relax_time_s = o.relax_us * 1e-6;
    scenario.ion_mass_amu = o.mass_amu;
    scenario.update_frequency_hz = 1.0;  // placeholder; validated per point
    build_filtered_trajectory(scenario);  // rejects invalid scenarios up front

    std::vector<double> hz;
    for (double khz : parse_range(o.scan_khz, "--scan-khz")) {
        hz.push_back(khz * 1e3);
    }
    const auto points = scan_update_frequency(scenario, hz);

    std::ostringstream csv;
    csv << "# iontherm " << version() << " transport-scan\n"
        << "# steps=" << o.steps << " legs=" << o.legs << " distance_um=" << fmt(o.distance_um)
        << " fax_mhz=" << fmt(o.fax_mhz) << " cutoff_khz=" << fmt(o.cutoff_khz) << " relax_us=" << fmt(o.relax_us)
        << " mass_amu=" << fmt(o.mass_amu) << "\n"
        << "update_khz,quanta\n";
    int failed = 0;
    for (const auto& p : points) {
        csv << fmt(p.update_frequency_hz / 1e3) << ',' << fmt(p.quanta_gained) << '\n';
        if (p.error) {
            ++failed;
            err << "transport-scan: " << fmt(p.update_frequency_hz / 1e3) << " kHz failed: " << *p.error << '\n';
        }
    }
    io.write_output(csv.str());
    return failed == 0 ? exit_ok : exit_failure;
}

}  // namespace

const char* version() { return IONTHERM_VERSION; }

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sideband thermometry and transport heating toolkit", "iontherm"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(version()));

    Io io{in, out, "-", ""};

    SpectrumOptions sim;
    auto* sim_cmd = app.add_subcommand("simulate-spectrum", "Ideal sideband envelope as a spectrum CSV");
    add_state_options(sim_cmd, sim, true);
    sim_cmd->add_option("--eta", sim.eta, "Lamb-Dicke parameter")->required()->check(CLI::PositiveNumber);
    sim_cmd->add_option("--omega0t", sim.omega0t, "Pulse area Omega00 t")->required()->check(CLI::PositiveNumber);
    sim_cmd->add_option("--orders", sim.orders, "Highest sideband order M")
        ->check(CLI::Range(1, 1000))
        ->capture_default_str();
    sim_cmd->add_option("--shots", sim.shots, "Shot count written per order")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_io(sim_cmd, io, false);

    SynthOptions syn;
    auto* syn_cmd = app.add_subcommand("synth", "Shot-noise synthetic spectrum, flop curve or heating series");
    syn_cmd->add_option("--kind", syn.kind, "spectrum, flop or heating")
        ->check(CLI::IsMember({"spectrum", "flop", "heating"}))
        ->capture_default_str();
    add_state_options(syn_cmd, syn.spectrum, true);
    syn_cmd->add_option("--seed", syn.seed, "Random seed")->required();
    syn_cmd->add_option("--eta", syn.spectrum.eta, "Lamb-Dicke parameter")->check(CLI::PositiveNumber);
    syn_cmd->add_option("--omega0t", syn.spectrum.omega0t, "Pulse area Omega00 t (spectrum)")
        ->check(CLI::PositiveNumber);
    syn_cmd->add_option("--orders", syn.spectrum.orders, "Highest sideband order M (spectrum)")
        ->check(CLI::Range(1, 1000))
        ->capture_default_str();
    syn_cmd->add_option("--shots", syn.spectrum.shots, "Shots per point")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    syn_cmd->add_option("--rabi-khz", syn.rabi_khz, "Carrier Rabi frequency Omega00 / 2pi (flop)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    syn_cmd->add_option("--tmax-us", syn.tmax_us, "Longest pulse (flop)")->capture_default_str();
    syn_cmd->add_option("--points", syn.points, "Number of pulse times (flop)")->capture_default_str();
    syn_cmd->add_option("--rate", syn.rate, "Heating rate in quanta/ms (heating)")->capture_default_str();
    syn_cmd->add_option("--delays-ms", syn.delays_ms, "Delays lo:hi:step (heating)")->capture_default_str();
    syn_cmd->add_option("--sigma", syn.sigma, "Per-point nbar uncertainty (heating)")->capture_default_str();
    add_io(syn_cmd, io, false);

    auto* ratio_cmd = app.add_subcommand("fit-ratio", "First-order sideband ratio fit of a spectrum CSV");
    add_io(ratio_cmd, io, true);

    FitOptions env;
    auto* env_cmd = app.add_subcommand("fit-envelope", "Envelope fit of a spectrum CSV");
    env_cmd->add_option("--eta", env.eta, "Lamb-Dicke parameter")->required()->check(CLI::PositiveNumber);
    env_cmd->add_option("--model", env.model, "thermal or displaced-thermal")->capture_default_str();
    env_cmd->add_option("--nmax", env.nmax, "Fock ladder truncation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    env_cmd->add_option("--bootstrap", env.bootstrap, "Bootstrap replicas (0 disables)")->capture_default_str();
    env_cmd->add_option("--seed", env.seed, "Bootstrap seed")->capture_default_str();
    add_io(env_cmd, io, true);

    FitOptions rabi;
    auto* rabi_cmd = app.add_subcommand("fit-rabi", "Carrier Rabi decoherence fit of a flop CSV");
    rabi_cmd->add_option("--eta", rabi.eta, "Lamb-Dicke parameter")->required()->check(CLI::PositiveNumber);
    rabi_cmd->add_option("--nmax", rabi.nmax, "Fock ladder truncation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_io(rabi_cmd, io, true);

    auto* heat_cmd = app.add_subcommand("heating-rate", "Weighted linear fit of a heating series CSV");
    add_io(heat_cmd, io, true);

    TransportOptions tr;
    auto* tr_cmd = app.add_subcommand("transport-scan", "Transport heating against waveform update frequency");
    tr_cmd->add_option("--steps", tr.steps, "Updates per leg")->check(CLI::PositiveNumber)->capture_default_str();
    tr_cmd->add_option("--legs", tr.legs, "1 one way, 2 round trip")->check(CLI::Range(1, 2))->capture_default_str();
    tr_cmd->add_option("--distance-um", tr.distance_um, "Distance per leg in micrometres")->required();
    tr_cmd->add_option("--fax-mhz", tr.fax_mhz, "Axial secular frequency in MHz")
        ->required()
        ->check(CLI::PositiveNumber);
    tr_cmd->add_option("--cutoff-khz", tr.cutoff_khz, "Low-pass filter cutoff in kHz")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tr_cmd->add_option("--relax-us", tr.relax_us, "Hold after the last update in microseconds")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    tr_cmd->add_option("--mass-amu", tr.mass_amu, "Ion mass in atomic mass units")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tr_cmd->add_option("--scan-khz", tr.scan_khz, "Update frequencies lo:hi:step in kHz")->required();
    add_io(tr_cmd, io, false);

    // Synopsis of the subcommand being run, or of the whole tool.
    auto synopsis = [&]() -> std::string {
        const auto parsed = app.get_subcommands();
        return parsed.empty() ? app.help() : parsed.front()->help(app.get_name());
    };

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::Success& e) {
        app.exit(e, out, err);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "iontherm: " << e.what() << "\n\n" << synopsis();
        return exit_usage;
    }

    try {
        if (sim_cmd->parsed()) {
            return simulate_spectrum(sim, io);
        }
        if (syn_cmd->parsed()) {
            return synth(syn, io, *syn_cmd);
        }
        if (ratio_cmd->parsed()) {
            return fit_ratio(io);
        }
        if (env_cmd->parsed()) {
            return fit_envelope_command(env, io);
        }
        if (rabi_cmd->parsed()) {
            return fit_rabi_command(rabi, io);
        }
        if (heat_cmd->parsed()) {
            return heating_rate(io);
        }
        return transport_scan(tr, io, err);
    } catch (const UsageError& e) {
        err << "iontherm: " << e.what() << "\n\n" << synopsis();
        return exit_usage;
    } catch (const Error& e) {
        err << "iontherm: " << to_string(e.kind()) << ": " << e.what() << '\n';
        return is_usage_kind(e.kind()) ? exit_usage : exit_failure;
    }
}

}  // namespace iontherm::cli
