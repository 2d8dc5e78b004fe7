# Copyright 2026 The donorq Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import pytest

import donorq

LAYOUT = {
    "grid": {"nx": 5, "ny": 5, "nz": 11, "spacing_m": 2e-9},
    "background_permittivity": 11.7,
    "electrodes": [
        {"name": "back", "box": {"min_m": [0, 0, 0], "max_m": [8e-9, 8e-9, 0]}, "voltage_V": 0.0},
        {"name": "gate", "box": {"min_m": [0, 0, 20e-9], "max_m": [8e-9, 8e-9, 20e-9]}, "voltage_V": 0.2},
    ],
}


def test_hfs_conversions():
    assert donorq.gauss_to_hz(42.0) == pytest.approx(117.705e6, rel=1e-12)
    assert donorq.hz_to_gauss(donorq.gauss_to_hz(10.0)) == pytest.approx(10.0, rel=1e-14)


def test_slater():
    a = 1.5e-9
    assert donorq.slater_cumulative(a, a) == pytest.approx(1.0 - 5.0 * math.exp(-2.0), rel=1e-13)
    samples = [(0.3e-9 * i, donorq.slater_cumulative(0.3e-9 * i, a)) for i in range(1, 13)]
    assert donorq.fit_slater(samples) == pytest.approx(a, rel=1e-6)


def test_levels():
    out = donorq.levels()
    lines = out["lines"]
    assert set(lines) == {"ESR_nUp", "ESR_nDown", "NMR_eDown", "NMR_eUp"}
    assert lines["ESR_nUp"]["exact_hz"] > lines["ESR_nDown"]["exact_hz"]
    one_tesla = donorq.levels({"preset": "si_p_1T"})
    assert one_tesla["device"]["b0_T"] == 1.0


def test_calibrate_esr():
    cal = donorq.calibrate("ESR_nUp")
    assert 340e-9 < cal["t_pi_s"] < 380e-9
    assert cal["peak_population"] > 0.99
    with pytest.raises(ValueError):
        donorq.calibrate("ESR_sideways")


def test_solve_field():
    out = donorq.solve_field(LAYOUT, donor=[4e-9, 4e-9, 10e-9])
    assert out["maximum_principle_holds"]
    assert out["potential_at_donor_V"] == pytest.approx(0.1, rel=1e-6)
    assert -out["E_at_donor_Vpm"][2] == pytest.approx(1e7, rel=5e-3)


def test_pipeline_custom_sequence(tmp_path):
    config = {
        "field": {"layout": LAYOUT, "donor_position_m": [4e-9, 4e-9, 10e-9]},
        "device": {"preset": "si_p"},
        "sequence": {
            "kind": "custom",
            "segments": [{"channel": "ESR", "duration_s": 100e-9, "b_ac_T": 1e-4, "omega_rad_s": "ESR_nUp"}],
            "initial": "dU",
            "target": "dU",
            "samples_per_segment": 10,
        },
    }
    report = donorq.run_pipeline(config)
    assert report["mode"] == "experiment"
    assert 0.0 <= report["experiment"]["final_fidelity"] < 1.0
    assert report == donorq.run_pipeline(config)

    donorq.run_pipeline(config, output_dir=tmp_path)
    assert (tmp_path / "fidelity_trace.csv").read_text().startswith("t_s,fidelity,segment\n")


def test_pipeline_errors_carry_the_stage():
    with pytest.raises(donorq.PipelineError, match=r"^\[field\]"):
        donorq.run_pipeline({"field": {"layout": {"grid": {}}}})
    with pytest.raises(donorq.PipelineError, match=r"^\[config\]"):
        donorq.run_pipeline("{not json")
