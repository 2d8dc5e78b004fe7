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

"""Single-donor silicon qubit workbench."""

import json
import os

from . import _donorq
from ._donorq import PipelineError, fit_slater, gauss_to_hz, hz_to_gauss, slater_cumulative

__all__ = [
    "PipelineError",
    "bell",
    "calibrate",
    "fit_slater",
    "gauss_to_hz",
    "hz_to_gauss",
    "levels",
    "run_pipeline",
    "slater_cumulative",
    "solve_field",
]


def _device(device):
    return json.dumps(device or {})


def levels(device=None):
    """Exact spectrum and transition lines; `device` is a config device section."""
    return json.loads(_donorq.levels(_device(device)))


def calibrate(transition, device=None, t_max=None):
    """Rabi calibration of ESR_nUp, ESR_nDown, NMR_eDown or NMR_eUp."""
    return json.loads(_donorq.calibrate(transition, _device(device), t_max or 0.0))


def bell(device=None, samples_per_segment=200):
    """Calibrate and run the Bell preparation; returns fidelity trace and calibrations."""
    return json.loads(_donorq.bell(_device(device), samples_per_segment))


def solve_field(layout, donor=None):
    """Solve a layout (dict, as in a layout JSON file) and sample it at `donor` (m)."""
    return json.loads(_donorq.solve_field(json.dumps(layout), list(donor or [])))


def run_pipeline(config, ensemble=False, base_dir=".", output_dir=None):
    """Run the config-driven pipeline and return the report dict.

    Files are written only when `output_dir` is given.
    """
    if not isinstance(config, str):
        config = json.dumps(config)
    out = os.fspath(output_dir) if output_dir is not None else ""
    return json.loads(_donorq.run_pipeline(config, ensemble, os.fspath(base_dir), out))
