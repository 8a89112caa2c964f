"""Shape potentials V(theta), W(theta), U(theta) = W cos^2 theta and their derivatives.

With ``D(theta) = cos^2 + mu sin^2``::

    V = G M sqrt(M/2) (M / cos + 4 m / sqrt(D))
    W = G M^2/2 (M gamma0 / cos^2 + 8 m gamma / D)
    U = G M^2/2 (M gamma0 + 8 m gamma cos^2 / D)

V and W blow up at the double-collision angles theta = +-pi/2, U stays
bounded there. All derivatives are hand-derived closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .params import PhysicalParams

HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class PotentialEval:
    theta: float
    V: float
    W: float
    U: float
    dV: float
    dW: float
    dU: float
    at_boundary: bool = False


@dataclass(frozen=True)
class CriticalPoints:
    theta_v: float
    theta_w: float
    u_min: float
    u_max: float


def _consts(p: PhysicalParams):
    a = p.G * p.M * math.sqrt(p.M / 2.0)
    b = 0.5 * p.G * p.M * p.M
    return a, b


# --- vectorized closed forms -------------------------------------------------

def V(p: PhysicalParams, theta):
    a, _ = _consts(p)
    c, s = np.cos(theta), np.sin(theta)
    D = c * c + p.mu * s * s
    return a * (p.M / c + 4.0 * p.m / np.sqrt(D))


def dV(p: PhysicalParams, theta):
    a, _ = _consts(p)
    c, s = np.cos(theta), np.sin(theta)
    D = c * c + p.mu * s * s
    return a * (p.M * s / (c * c) - 4.0 * p.m * (p.mu - 1.0) * s * c / D**1.5)


def W(p: PhysicalParams, theta):
    _, b = _consts(p)
    c, s = np.cos(theta), np.sin(theta)
    D = c * c + p.mu * s * s
    return b * (p.M * p.gamma0 / (c * c) + 8.0 * p.m * p.gamma / D)


def dW(p: PhysicalParams, theta):
    _, b = _consts(p)
    c, s = np.cos(theta), np.sin(theta)
    D = c * c + p.mu * s * s
    return b * (2.0 * p.M * p.gamma0 * s / c**3
                - 16.0 * p.m * p.gamma * (p.mu - 1.0) * s * c / (D * D))


def U(p: PhysicalParams, theta):
    _, b = _consts(p)
    c, s = np.cos(theta), np.sin(theta)
    D = c * c + p.mu * s * s
    return b * (p.M * p.gamma0 + 8.0 * p.m * p.gamma * c * c / D)


def dU(p: PhysicalParams, theta):
    _, b = _consts(p)
    c, s = np.cos(theta), np.sin(theta)
    D = c * c + p.mu * s * s
    return -16.0 * b * p.m * p.gamma * p.mu * s * c / (D * D)


def d2U(p: PhysicalParams, theta):
    _, b = _consts(p)
    c, s = np.cos(theta), np.sin(theta)
    D = c * c + p.mu * s * s
    s2, c2 = 2.0 * s * c, c * c - s * s
    return -16.0 * b * p.m * p.gamma * p.mu * (c2 / D**2 - (p.mu - 1.0) * s2 * s2 / D**3)


# --- scalar fast path used by the vector fields ------------------------------

def shape_terms(p: PhysicalParams, theta: float) -> tuple[float, float, float, float]:
    """Return ``(V*cos, V' * cos^2, U, U')`` for a float angle.

    The cos-weighted V terms stay finite at the boundary, which is what the
    regularized equations consume.
    """
    a, b = _consts(p)
    c, s = math.cos(theta), math.sin(theta)
    mu = p.mu
    D = c * c + mu * s * s
    sqD = math.sqrt(D)
    vc = a * (p.M + 4.0 * p.m * c / sqD)
    dvc2 = a * (p.M * s - 4.0 * p.m * (mu - 1.0) * s * c**3 / (D * sqD))
    u = b * (p.M * p.gamma0 + 8.0 * p.m * p.gamma * c * c / D)
    du = -16.0 * b * p.m * p.gamma * mu * s * c / (D * D)
    return vc, dvc2, u, du


# --- public API ---------------------------------------------------------------

def evaluate(p: PhysicalParams, theta: float) -> PotentialEval:
    """Evaluate all shape potentials at one angle.

    On the closed interval ``|theta| <= pi/2``. At the endpoints V and W are
    reported as ``inf`` (their derivatives as signed ``inf``) while U and U'
    keep their finite limits.
    """
    theta = float(theta)
    if math.isnan(theta):
        raise ValueError("theta is NaN")
    if abs(theta) > HALF_PI:
        raise ValueError(f"|theta| must be <= pi/2, got {theta}")
    u, du = float(U(p, theta)), float(dU(p, theta))
    if abs(theta) >= HALF_PI:
        sign = math.copysign(1.0, theta)
        return PotentialEval(theta, math.inf, math.inf, float(U(p, math.copysign(HALF_PI, theta))),
                             sign * math.inf, sign * math.inf, 0.0, at_boundary=True)
    return PotentialEval(theta, float(V(p, theta)), float(W(p, theta)), u,
                         float(dV(p, theta)), float(dW(p, theta)), du)


def critical_points(p: PhysicalParams) -> CriticalPoints:
    """Positive off-axis critical angles of V and W and the extreme values of U."""
    mu = p.mu
    theta_v = math.acos(math.sqrt(mu / (mu + 3.0)))
    theta_w = math.acos(math.sqrt(mu / (mu + 4.0 * math.sqrt(p.gamma / p.gamma0) - 1.0)))
    return CriticalPoints(theta_v, theta_w, u_min(p), u_max(p))


def u_min(p: PhysicalParams) -> float:
    """U at the double-collision angles, G M^3 gamma0 / 2."""
    return 0.5 * p.G * p.M**3 * p.gamma0


def u_max(p: PhysicalParams) -> float:
    """U at theta = 0, G M^2 (M gamma0 + 8 m gamma) / 2."""
    return 0.5 * p.G * p.M**2 * (p.M * p.gamma0 + 8.0 * p.m * p.gamma)


def table(p: PhysicalParams, n: int) -> np.ndarray:
    """Columns theta, V, W, U, dV, dW, dU on ``n`` points of [-pi/2, pi/2]."""
    if n < 2:
        raise ValueError("grid needs at least 2 points")
    rows = [evaluate(p, t) for t in np.linspace(-HALF_PI, HALF_PI, n)]
    return np.array([[e.theta, e.V, e.W, e.U, e.dV, e.dW, e.dU] for e in rows])
