"""Physical parameters of the isosceles Manev problem and integration settings."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping

from .errors import DegenerateCoefficients, ManevError, NonPositiveParameter, RegimeViolation

PARAM_KEYS = ("G", "M", "m", "gamma0", "gamma")


@dataclass(frozen=True)
class PhysicalParams:
    """Masses, gravitational constant and Manev coefficients.

    ``M`` is the mass of each of the two equal outer bodies, ``m`` the middle
    one. ``gamma0`` is the Manev coefficient of the outer pair, ``gamma`` that
    of each outer-middle pair. Build instances through :func:`validate`.
    """

    G: float
    M: float
    m: float
    gamma0: float
    gamma: float

    @property
    def mu(self) -> float:
        return (2.0 * self.M + self.m) / self.m

    def as_dict(self) -> dict[str, float]:
        return {k: getattr(self, k) for k in PARAM_KEYS}


def validate(params: Any = None, /, **kwargs: float) -> PhysicalParams:
    """Check a parameter set and return it as :class:`PhysicalParams`.

    Accepts a ``PhysicalParams``, a mapping with the five keys, a 5-sequence
    ``(G, M, m, gamma0, gamma)`` or keyword arguments. Idempotent.

    Raises
    ------
    NonPositiveParameter
        If any of G, M, m, gamma0, gamma is not strictly positive.
    RegimeViolation
        If ``16 * gamma <= gamma0``; that regime has no off-axis critical
        points of the shape potentials and is not modelled.
    DegenerateCoefficients
        If ``gamma == gamma0``.
    """
    if params is None:
        values = dict(kwargs)
    elif isinstance(params, PhysicalParams):
        values = params.as_dict()
    elif isinstance(params, Mapping):
        values = {k: params[k] for k in PARAM_KEYS if k in params}
    else:
        seq = list(params)
        if len(seq) != len(PARAM_KEYS):
            raise ManevError(f"expected {len(PARAM_KEYS)} parameters, got {len(seq)}")
        values = dict(zip(PARAM_KEYS, seq))
    missing = [k for k in PARAM_KEYS if k not in values]
    if missing:
        raise ManevError(f"missing parameters: {', '.join(missing)}")

    vals = {k: float(values[k]) for k in PARAM_KEYS}
    for k, x in vals.items():
        if not math.isfinite(x):
            raise ManevError(f"parameter {k} must be finite, got {x}")
        if x <= 0.0:
            raise NonPositiveParameter(f"parameter {k} must be > 0, got {x}")
    if not 16.0 * vals["gamma"] > vals["gamma0"]:
        raise RegimeViolation(
            f"16*gamma > gamma0 required (gamma={vals['gamma']}, gamma0={vals['gamma0']})"
        )
    if vals["gamma"] == vals["gamma0"]:
        raise DegenerateCoefficients("gamma != gamma0 required")
    return PhysicalParams(**vals)


#: Reference parameter set: G=1, M=10, m=1, gamma0=1, gamma=3 (mu = 21).
P0 = validate(G=1.0, M=10.0, m=1.0, gamma0=1.0, gamma=3.0)


def load_config(path: str | os.PathLike) -> dict[str, float]:
    """Read a JSON object holding any of the five parameter keys."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ManevError(f"config {path} must hold a JSON object")
    unknown = set(data) - set(PARAM_KEYS)
    if "mu" in unknown:
        raise ManevError("mu is derived from M and m and cannot be configured")
    return {k: float(data[k]) for k in PARAM_KEYS if k in data}


def resolve(overrides: Mapping[str, float | None] | None = None,
            config: str | os.PathLike | None = None) -> PhysicalParams:
    """Merge defaults, an optional config file and explicit overrides.

    Precedence (lowest first): ``P0``, the file named by ``$MANEV_CONFIG``,
    ``config``, then non-None entries of ``overrides``.
    """
    values = P0.as_dict()
    env = os.environ.get("MANEV_CONFIG")
    for src in (env, config):
        if src:
            if not Path(src).is_file():
                raise ManevError(f"config file not found: {src}")
            values.update(load_config(src))
    for k, x in (overrides or {}).items():
        if x is not None:
            values[k] = x
    return validate(values)


@dataclass(frozen=True)
class IntegrationSettings:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    max_step: float = math.inf
    theta_guard: float = 1e-6
    r_floor: float = 0.0
    escape_radius: float = 1e6
    max_steps: int = 2_000_000

    def __post_init__(self):
        for f in ("rel_tol", "abs_tol", "max_step", "escape_radius"):
            if not getattr(self, f) > 0:
                raise ManevError(f"{f} must be > 0")
        if not 0.0 < self.theta_guard < math.pi / 4:
            raise ManevError("theta_guard must lie in (0, pi/4)")
        if not self.r_floor >= 0.0:
            raise ManevError("r_floor must be >= 0")
        if self.max_steps < 1:
            raise ManevError("max_steps must be >= 1")

    def replace(self, **kw) -> "IntegrationSettings":
        vals = {f.name: getattr(self, f.name) for f in fields(self)}
        vals.update(kw)
        return IntegrationSettings(**vals)
