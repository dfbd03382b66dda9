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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "iontherm/error.hpp"
#include "iontherm/io.hpp"
#include "iontherm/oscillator.hpp"
#include "iontherm/spectrum.hpp"
#include "iontherm/thermometry.hpp"
#include "iontherm/transport.hpp"
#include "iontherm/version.hpp"

namespace py = pybind11;
namespace it = iontherm;

namespace {

it::SidebandSpectrum make_spectrum(int max_order, std::vector<double> amplitudes,
                                   std::optional<std::vector<int>> shots,
                                   std::optional<std::uint64_t> seed) {
    it::SidebandSpectrum s;
    s.max_order = max_order;
    s.amplitudes = std::move(amplitudes);
    s.shots = std::move(shots);
    s.seed = seed;
    return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Motional thermometry and transport heating for trapped ions.";
    m.attr("__version__") = it::version;

    py::enum_<it::ErrorKind>(m, "ErrorKind")
        .value("invalid_configuration", it::ErrorKind::invalid_configuration)
        .value("invalid_parameter", it::ErrorKind::invalid_parameter)
        .value("invalid_transition", it::ErrorKind::invalid_transition)
        .value("truncation_insufficient", it::ErrorKind::truncation_insufficient)
        .value("out_of_method_range", it::ErrorKind::out_of_method_range)
        .value("undefined_ratio", it::ErrorKind::undefined_ratio)
        .value("fit_failed", it::ErrorKind::fit_failed)
        .value("unconstrained_fit", it::ErrorKind::unconstrained_fit)
        .value("insufficient_data", it::ErrorKind::insufficient_data)
        .value("numerical_accuracy", it::ErrorKind::numerical_accuracy)
        .value("parse_error", it::ErrorKind::parse_error);

    static py::handle error_type =
        PyErr_NewException("iontherm._core.Error", PyExc_ValueError, nullptr);
    m.attr("Error") = error_type;
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const it::Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
            exc.attr("kind") = py::str(std::string(it::to_string(e.kind())));
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    py::class_<it::OscillatorConfig>(m, "OscillatorConfig")
        .def(py::init([](double mass, double freq, double wavelength, double projection) {
                 return it::OscillatorConfig{mass, freq, wavelength, projection};
             }),
             py::arg("ion_mass_amu"), py::arg("secular_frequency_hz"),
             py::arg("probe_wavelength_m"), py::arg("beam_projection") = 1.0)
        .def_readwrite("ion_mass_amu", &it::OscillatorConfig::ion_mass_amu)
        .def_readwrite("secular_frequency_hz", &it::OscillatorConfig::secular_frequency_hz)
        .def_readwrite("probe_wavelength_m", &it::OscillatorConfig::probe_wavelength_m)
        .def_readwrite("beam_projection", &it::OscillatorConfig::beam_projection);

    m.def("lamb_dicke", &it::lamb_dicke, py::arg("config"));
    m.def("sideband_rabi_frequency", &it::sideband_rabi_frequency, py::arg("n"), py::arg("m"),
          py::arg("eta"), py::arg("base_rabi"));

    py::enum_<it::StateKind>(m, "StateKind")
        .value("thermal", it::StateKind::thermal)
        .value("displaced_thermal", it::StateKind::displaced_thermal);

    py::class_<it::MotionalState>(m, "MotionalState")
        .def_readonly("kind", &it::MotionalState::kind)
        .def_readonly("nbar", &it::MotionalState::nbar)
        .def_readonly("alpha", &it::MotionalState::alpha)
        .def_readonly("populations", &it::MotionalState::populations)
        .def_property_readonly("n_max", &it::MotionalState::n_max)
        .def("mean_occupation", &it::MotionalState::mean_occupation);

    m.def(
        "thermal_populations",
        [](double nbar, int n_max) { return it::thermal_populations(nbar, {n_max}); },
        py::arg("nbar"), py::arg("n_max") = 1000);
    m.def(
        "displaced_thermal_populations",
        [](double nbar, double alpha, int n_max) {
            return it::displaced_thermal_populations(nbar, alpha, {n_max});
        },
        py::arg("nbar"), py::arg("alpha"), py::arg("n_max") = 1000);

    py::class_<it::ProbePulse>(m, "ProbePulse")
        .def(py::init([](double duration, double base_rabi) {
                 return it::ProbePulse{duration, base_rabi};
             }),
             py::arg("duration"), py::arg("base_rabi"))
        .def_readwrite("duration", &it::ProbePulse::duration)
        .def_readwrite("base_rabi", &it::ProbePulse::base_rabi)
        .def_property_readonly("area", &it::ProbePulse::area);

    py::class_<it::SidebandSpectrum>(m, "SidebandSpectrum")
        .def(py::init(&make_spectrum), py::arg("max_order"), py::arg("amplitudes"),
             py::arg("shots") = py::none(), py::arg("seed") = py::none())
        .def_readwrite("max_order", &it::SidebandSpectrum::max_order)
        .def_readwrite("amplitudes", &it::SidebandSpectrum::amplitudes)
        .def_readwrite("shots", &it::SidebandSpectrum::shots)
        .def_readwrite("seed", &it::SidebandSpectrum::seed)
        .def("amplitude", &it::SidebandSpectrum::amplitude, py::arg("m"));

    m.def("pure_state_excitation", &it::pure_state_excitation, py::arg("n"), py::arg("m"),
          py::arg("eta"), py::arg("pulse"));
    m.def("mixed_state_excitation", &it::mixed_state_excitation, py::arg("state"), py::arg("m"),
          py::arg("eta"), py::arg("pulse"));
    m.def("sideband_envelope", &it::sideband_envelope, py::arg("state"), py::arg("eta"),
          py::arg("pulse"), py::arg("max_order"));
    m.def(
        "carrier_flop_curve",
        [](const it::MotionalState& state, double eta, double base_rabi,
           const std::vector<double>& times) {
            return it::carrier_flop_curve(state, eta, base_rabi, times);
        },
        py::arg("state"), py::arg("eta"), py::arg("base_rabi"), py::arg("times"));
    m.def(
        "synthesize_measurement",
        [](const it::SidebandSpectrum& spectrum, int shots, std::uint64_t seed) {
            return it::synthesize_measurement(spectrum, shots, seed);
        },
        py::arg("spectrum"), py::arg("shots"), py::arg("seed"));

    py::enum_<it::FitMethod>(m, "FitMethod")
        .value("ratio", it::FitMethod::ratio)
        .value("envelope", it::FitMethod::envelope)
        .value("rabi_decoherence", it::FitMethod::rabi_decoherence)
        .value("heating_rate", it::FitMethod::heating_rate);
    py::enum_<it::EnvelopeModel>(m, "EnvelopeModel")
        .value("thermal", it::EnvelopeModel::thermal)
        .value("displaced_thermal", it::EnvelopeModel::displaced_thermal);

    py::class_<it::FitResult>(m, "FitResult")
        .def_readonly("method", &it::FitResult::method)
        .def_readonly("nbar", &it::FitResult::nbar)
        .def_readonly("nbar_uncertainty", &it::FitResult::nbar_uncertainty)
        .def_readonly("pulse_area", &it::FitResult::pulse_area)
        .def_readonly("base_rabi", &it::FitResult::base_rabi)
        .def_readonly("alpha", &it::FitResult::alpha)
        .def_readonly("chi_square", &it::FitResult::chi_square)
        .def_readonly("degrees_of_freedom", &it::FitResult::degrees_of_freedom);

    m.def("fit_sideband_ratio", &it::fit_sideband_ratio, py::arg("p_red"), py::arg("p_blue"),
          py::arg("shots_red"), py::arg("shots_blue"));
    m.def(
        "fit_envelope",
        [](const it::SidebandSpectrum& measured, double eta, it::EnvelopeModel model, int n_max) {
            py::gil_scoped_release release;
            return it::fit_envelope(measured, eta, {model, {n_max}});
        },
        py::arg("measured"), py::arg("eta"), py::arg("model") = it::EnvelopeModel::thermal,
        py::arg("n_max") = 1000);
    m.def(
        "fit_rabi_decoherence",
        [](const std::vector<double>& times, const std::vector<double>& excitations, int shots,
           double eta, int n_max) {
            py::gil_scoped_release release;
            return it::fit_rabi_decoherence(times, excitations, shots, eta, {n_max});
        },
        py::arg("times"), py::arg("excitations"), py::arg("shots"), py::arg("eta"),
        py::arg("n_max") = 1000);

    py::class_<it::HeatingSeries>(m, "HeatingSeries")
        .def(py::init([](std::vector<double> delays, std::vector<double> nbars,
                         std::vector<double> sigmas) {
                 return it::HeatingSeries{std::move(delays), std::move(nbars), std::move(sigmas)};
             }),
             py::arg("delays_ms"), py::arg("nbars"), py::arg("uncertainties"))
        .def_readwrite("delays_ms", &it::HeatingSeries::delays_ms)
        .def_readwrite("nbars", &it::HeatingSeries::nbars)
        .def_readwrite("uncertainties", &it::HeatingSeries::uncertainties);

    py::class_<it::HeatingRateResult>(m, "HeatingRateResult")
        .def_readonly("slope", &it::HeatingRateResult::slope)
        .def_readonly("slope_uncertainty", &it::HeatingRateResult::slope_uncertainty)
        .def_readonly("intercept", &it::HeatingRateResult::intercept)
        .def_readonly("intercept_uncertainty", &it::HeatingRateResult::intercept_uncertainty)
        .def_readonly("chi_square", &it::HeatingRateResult::chi_square)
        .def_readonly("degrees_of_freedom", &it::HeatingRateResult::degrees_of_freedom);

    m.def("fit_heating_rate", &it::fit_heating_rate, py::arg("series"));
    m.def("temperature_from_nbar", &it::temperature_from_nbar, py::arg("nbar"),
          py::arg("secular_frequency_hz"));

    py::class_<it::TransportScenario>(m, "TransportScenario")
        .def(py::init<>())
        .def_readwrite("distance_m", &it::TransportScenario::distance_m)
        .def_readwrite("n_steps", &it::TransportScenario::n_steps)
        .def_readwrite("legs", &it::TransportScenario::legs)
        .def_readwrite("reverse_legs", &it::TransportScenario::reverse_legs)
        .def_readwrite("update_frequency_hz", &it::TransportScenario::update_frequency_hz)
        .def_readwrite("filter_cutoff_hz", &it::TransportScenario::filter_cutoff_hz)
        .def_readwrite("secular_frequency_hz", &it::TransportScenario::secular_frequency_hz)
        .def_readwrite("ion_mass_amu", &it::TransportScenario::ion_mass_amu)
        .def_readwrite("relax_time_s", &it::TransportScenario::relax_time_s)
        .def_readwrite("secular_frequency_profile_hz",
                       &it::TransportScenario::secular_frequency_profile_hz)
        .def_readwrite("record_trajectory", &it::TransportScenario::record_trajectory);

    py::class_<it::TrajectorySample>(m, "TrajectorySample")
        .def_readonly("time_s", &it::TrajectorySample::time_s)
        .def_readonly("trap_minimum_m", &it::TrajectorySample::trap_minimum_m)
        .def_readonly("ion_position_m", &it::TrajectorySample::ion_position_m);

    py::class_<it::TransportResult>(m, "TransportResult")
        .def_readonly("final_displacement_amplitude",
                      &it::TransportResult::final_displacement_amplitude)
        .def_readonly("quanta_gained", &it::TransportResult::quanta_gained)
        .def_readonly("trajectory", &it::TransportResult::trajectory);

    py::class_<it::ScanPoint>(m, "ScanPoint")
        .def_readonly("update_frequency_hz", &it::ScanPoint::update_frequency_hz)
        .def_readonly("quanta_gained", &it::ScanPoint::quanta_gained)
        .def_readonly("error", &it::ScanPoint::error);

    m.def(
        "simulate_transport",
        [](const it::TransportScenario& scenario) {
            py::gil_scoped_release release;
            return it::simulate_transport(scenario);
        },
        py::arg("scenario"));
    m.def(
        "scan_update_frequency",
        [](const it::TransportScenario& scenario, const std::vector<double>& frequencies) {
            py::gil_scoped_release release;
            return it::scan_update_frequency(scenario, frequencies);
        },
        py::arg("scenario"), py::arg("frequencies_hz"));
    m.def("zero_point_length", &it::zero_point_length, py::arg("ion_mass_amu"),
          py::arg("secular_frequency_hz"));

    m.def(
        "parse_spectrum",
        [](const std::string& text) { return it::to_sideband_spectrum(it::parse_spectrum(text)); },
        py::arg("text"));
    m.def(
        "serialize_spectrum",
        [](const it::SidebandSpectrum& spectrum, std::vector<std::string> comments) {
            return it::serialize_spectrum(it::to_spectrum_file(spectrum, std::move(comments)));
        },
        py::arg("spectrum"), py::arg("comments") = std::vector<std::string>{});
}
