# Copyright 2026 The iontherm Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import iontherm

ETA = 0.072


def thermal_spectrum(nbar, area=5.0):
    state = iontherm.thermal_populations(nbar)
    spec = iontherm.sideband_envelope(state, ETA, iontherm.ProbePulse(area, 1.0), 4)
    spec.shots = [500] * len(spec.amplitudes)
    return spec


def test_version():
    assert iontherm.__version__ == "0.1.0"


def test_lamb_dicke_calcium():
    config = iontherm.OscillatorConfig(39.9626, 1.738e6, 729e-9, math.cos(math.radians(10)))
    hbar, amu = 1.054571817e-34, 1.66053906660e-27
    x0 = math.sqrt(hbar / (2 * 39.9626 * amu * 2 * math.pi * 1.738e6))
    expected = 2 * math.pi * math.cos(math.radians(10)) / 729e-9 * x0
    assert iontherm.lamb_dicke(config) == pytest.approx(expected, rel=1e-14)
    assert iontherm.lamb_dicke(config) == pytest.approx(0.0724, abs=1e-4)


def test_thermal_populations():
    state = iontherm.thermal_populations(2.0, n_max=200)
    assert state.n_max == 200
    assert sum(state.populations) == pytest.approx(1.0, abs=1e-12)
    assert state.mean_occupation() == pytest.approx(2.0, abs=1e-9)
    assert state.populations[1] / state.populations[0] == pytest.approx(2.0 / 3.0)


def test_ratio_fit():
    assert iontherm.fit_sideband_ratio(0.3, 0.4, 500, 500).nbar == pytest.approx(3.0)


def test_envelope_round_trip():
    result = iontherm.fit_envelope(thermal_spectrum(2.2), ETA)
    assert result.method == iontherm.FitMethod.envelope
    assert result.nbar == pytest.approx(2.2, rel=0.01)
    assert result.pulse_area == pytest.approx(5.0, abs=1e-4)


def test_synthesized_measurement_is_reproducible():
    a = iontherm.synthesize_measurement(thermal_spectrum(2.2), 500, 11)
    b = iontherm.synthesize_measurement(thermal_spectrum(2.2), 500, 11)
    assert a.amplitudes == b.amplitudes
    assert a.seed == 11


def test_spectrum_text_round_trip():
    spec = iontherm.synthesize_measurement(thermal_spectrum(2.2), 500, 3)
    text = iontherm.serialize_spectrum(spec, ["seed=3"])
    back = iontherm.parse_spectrum(text)
    assert back.amplitudes == spec.amplitudes
    assert back.shots == spec.shots
    assert back.seed == 3


def test_heating_rate():
    delays = [0.0, 1.0, 2.0, 3.0]
    series = iontherm.HeatingSeries(delays, [0.5 + 3.0 * d for d in delays], [0.2] * 4)
    result = iontherm.fit_heating_rate(series)
    assert result.slope == pytest.approx(3.0)
    assert result.intercept == pytest.approx(0.5)


def test_transport_single_step():
    scenario = iontherm.TransportScenario()
    scenario.distance_m = 1.4775e-6
    scenario.n_steps = 1
    scenario.legs = 1
    scenario.update_frequency_hz = 329e3
    scenario.secular_frequency_hz = 1.738e6
    result = iontherm.simulate_transport(scenario)
    l0 = iontherm.zero_point_length(scenario.ion_mass_amu, scenario.secular_frequency_hz)
    omega_tau = 1.738e6 / 60e3
    expected = scenario.distance_m**2 / (4 * l0**2 * (1 + omega_tau**2))
    assert result.quanta_gained == pytest.approx(expected, rel=1e-6)


def test_errors_carry_kind():
    with pytest.raises(iontherm.Error) as info:
        iontherm.fit_sideband_ratio(0.4, 0.4, 500, 500)
    assert info.value.kind == "out-of-method-range"
    assert isinstance(info.value, ValueError)
