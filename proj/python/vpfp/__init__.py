"""Python front end for the vpfp solver.

Runs are driven by the compiled core; the helpers in :mod:`vpfp.io` read what it writes.
"""

import json

from ._vpfp import (
    ConfigError,
    Error,
    IoError,
    __version__,
    csv_columns,
    fit_decay_rate,
    fit_envelope_decay_rate,
    gauss_hermite_normal,
    load_config,
    preset_names,
    set_quiet,
)
from . import _vpfp
from .io import read_diagnostics, read_manifest, read_run, read_snapshot

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "__version__",
    "csv_columns",
    "fit_decay_rate",
    "fit_envelope_decay_rate",
    "gauss_hermite_normal",
    "load_config",
    "preset",
    "preset_names",
    "read_diagnostics",
    "read_manifest",
    "read_run",
    "read_snapshot",
    "run",
    "set_quiet",
]


def preset(name, desk=False):
    """Preset configuration as a dict (same schema as the manifest's "config")."""
    return json.loads(_vpfp.preset_config(name, desk))


def run(config, out_dir, threads=1, dump_matrix=False, quiet=True):
    """Run a config dict (or JSON string). Returns one dict per sweep entry."""
    text = config if isinstance(config, str) else json.dumps(config)
    return _vpfp.run(text, str(out_dir), threads, dump_matrix, quiet)
