# Copyright 2026 The sgzsl Authors
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

"""Sentinel-guided zero-shot learning.

Thin wrappers over the C++ core. Configurations are plain dicts using the
same flat keys as the command line's JSON config files.
"""

import csv
import io
import json

from sgzsl._sgzsl import (
    BudgetExceeded,
    ConfigError,
    DataError,
    Error,
    ProtocolError,
    harmonic_mean,
    privacy_epsilon,
)
from sgzsl import _sgzsl

__all__ = [
    "BudgetExceeded",
    "ConfigError",
    "DataError",
    "Error",
    "ProtocolError",
    "dataset",
    "effective_config",
    "harmonic_mean",
    "privacy_epsilon",
    "run",
    "sweep",
]


def _dump(config):
    return json.dumps(config or {})


def effective_config(config=None):
    """Returns the validated config with every default filled in."""
    return json.loads(_sgzsl.effective_config(_dump(config)))


def run(config=None):
    """Runs one full experiment and returns the report as a dict."""
    return json.loads(_sgzsl.run(_dump(config)))


def sweep(axis, values, seeds=(0, 1, 2), config=None, teacher_only=False):
    """Seed-averaged metrics for each value of `axis`, one dict per value."""
    text = _sgzsl.sweep(_dump(config), axis, list(values), list(seeds),
                        teacher_only)
    return list(csv.DictReader(io.StringIO(text)))


def dataset(config=None):
    """Features, labels, semantics and class splits as numpy arrays."""
    return _sgzsl.dataset(_dump(config))
