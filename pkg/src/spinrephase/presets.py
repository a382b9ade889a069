"""Built-in run configurations, shipped as JSON package data.

* ``experiment1``: compensated trap with a tiny residual inhomogeneity
  (0.08 Hz); rates derived from atomic parameters; tight synchronization.
* ``fig3``: detuned trap (2 Hz inhomogeneity) with explicit effective
  rates scaling linearly in density; decay and revivals of the contrast.
"""

from __future__ import annotations

import copy
import json
from importlib import resources

PRESET_NAMES = ("experiment1", "fig3")


def get_preset(name: str) -> dict:
    """Deep copy of a named built-in configuration document."""
    if name not in PRESET_NAMES:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    ref = resources.files(__package__).joinpath(f"presets/{name}.json")
    return copy.deepcopy(json.loads(ref.read_text(encoding="utf-8")))
