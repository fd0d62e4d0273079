"""Quadrature budgets and their file/environment plumbing.

A :class:`QuadratureSpec` travels with every transform call. Defaults can be
overridden by a plain-text ``key=value`` file (keys ``rel_tol``, ``abs_tol``,
``max_nodes``, ``truncation_T``), located either explicitly or through the
``LEBEDEV_CONFIG`` environment variable.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

from .errors import ConfigError

ENV_VAR = "LEBEDEV_CONFIG"

_INT_KEYS = {"max_nodes"}
_FLOAT_KEYS = {"rel_tol", "abs_tol", "truncation_T"}


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and budgets for every infinite/contour integral.

    truncation_T is the half-height of a vertical contour or the cutoff of a
    semi-infinite range; routines may extend it with parameter-dependent
    safety margins but never shrink it.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_nodes: int = 200_000
    truncation_T: float = 14.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ConfigError("rel_tol and abs_tol must be positive")
        if self.max_nodes < 64:
            raise ConfigError("max_nodes must be >= 64")
        if not self.truncation_T > 0:
            raise ConfigError("truncation_T must be positive")

    def with_overrides(self, **kw) -> "QuadratureSpec":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


@dataclass(frozen=True)
class EvalResult:
    """Value plus diagnostic metadata for one numerical evaluation."""

    value: complex
    err_estimate: float
    nodes_used: int
    truncation_T_used: float
    route: str = ""

    def __post_init__(self):
        if self.err_estimate < 0:
            raise ConfigError("err_estimate must be >= 0")


def parse_config_text(text: str) -> dict:
    """Parse ``key=value`` lines. '#' starts a comment; blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        try:
            if key in _INT_KEYS:
                out[key] = int(val)
            elif key in _FLOAT_KEYS:
                out[key] = float(val)
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
    return out


def load_spec(path: str | None = None) -> QuadratureSpec:
    """Build a QuadratureSpec from a config file.

    Resolution order: explicit path, then $LEBEDEV_CONFIG, then defaults.
    """
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return QuadratureSpec()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return QuadratureSpec().with_overrides(**parse_config_text(text))
