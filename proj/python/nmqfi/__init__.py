"""Python bindings for the nmqfi engine.

Everything lives in the compiled extension; this package re-exports it and
adds a couple of conveniences.
"""

import json as _json

from ._nmqfi import *  # noqa: F401,F403
from ._nmqfi import run_scenario as _run_scenario


def run_json(subcommand, config):
    """Run a subcommand on a config dict (or JSON text) and decode JSON output."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_scenario(subcommand, text, "json"))


__version__ = "0.1.0"
