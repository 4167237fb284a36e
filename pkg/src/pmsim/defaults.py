"""The one documented table of physical defaults, overridable externally.

Every tunable the experiments rely on (protection gap, measurement
duration, pointer grid, stepping rule) lives in ``defaults.json`` next to
this module.  Setting the environment variable ``PMSIM_DEFAULTS`` to a path
replaces the packaged table wholesale.
"""

from __future__ import annotations

import json
import os
from importlib import resources

DEFAULTS_ENV_VAR = "PMSIM_DEFAULTS"


def load_defaults() -> dict:
    override = os.environ.get(DEFAULTS_ENV_VAR)
    if override:
        with open(override, encoding="utf-8") as fh:
            return json.load(fh)
    text = resources.files("pmsim").joinpath("defaults.json").read_text(encoding="utf-8")
    return json.loads(text)
