"""Python bindings for the cmc library."""

from ._cmc import *  # noqa: F401,F403
from ._cmc import CmcError, run_cli

import json as _json


def cli(*args):
    """Run a cmc subcommand; returns (exit_code, parsed JSON or None, stderr)."""
    code, out, err = run_cli([str(a) for a in args])
    doc = _json.loads(out) if out.strip().startswith("{") else None
    return code, doc, err
