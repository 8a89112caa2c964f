"""Cylindrical reduced coordinates, McGehee blow-up variables and energy relations.

Cylindrical state ``(R, Z, P_R, P_Z)`` with angular momentum ``C``: R is the
distance between the two outer masses, Z the height of the middle mass above
their midpoint. The mass matrix is ``K = diag(M/2, 2Mm/(2M+m))``.

McGehee variables::

    r = sqrt(x^T K x),  v = x . p,  sqrt(K) x = r (cos theta, sin theta),
    u = r^2 dtheta/dt,  w = cos^2(theta) u / sqrt(U(theta))

so that ``v = r dr/dt`` and the kinetic energy is ``(v^2 + u^2) / (2 r^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import potentials as pot
from .errors import CollisionManifoldPoint, DoubleCollisionInput, ManevError, TripleCollisionInput
from .params import PhysicalParams


@dataclass(frozen=True)
class CylState:
    R: float
    Z: float
    P_R: float
    P_Z: float
    C: float = 0.0


@dataclass(frozen=True)
class McGeheeState:
    r: float
    v: float
    theta: float
    w: float
    t_phys: float = 0.0
    tau: float = 0.0
    sigma: float = 0.0

    def core(self) -> np.ndarray:
        return np.array([self.r, self.v, self.theta, self.w])


def mass_matrix(p: PhysicalParams) -> np.ndarray:
    return np.diag([0.5 * p.M, 2.0 * p.M * p.m / (2.0 * p.M + p.m)])


def _sqrt_k(p: PhysicalParams) -> tuple[float, float]:
    return math.sqrt(0.5 * p.M), math.sqrt(2.0 * p.M * p.m / (2.0 * p.M + p.m))


def intermediate(p: PhysicalParams, state: CylState) -> tuple[float, np.ndarray, np.ndarray]:
    """Return ``(r, s, u_vec)`` of the unreduced blow-up (before the polar split)."""
    x = np.array([state.R, state.Z], dtype=float)
    pm = np.array([state.P_R, state.P_Z], dtype=float)
    K = mass_matrix(p)
    r = math.sqrt(x @ K @ x)
    if r == 0.0:
        raise TripleCollisionInput("R = Z = 0 is the triple collision")
    s = x / r
    u_vec = r * (np.linalg.solve(K, pm) - (s @ pm) * s)
    return r, s, u_vec


def to_mcgehee(p: PhysicalParams, state: CylState) -> McGeheeState:
    if state.R == 0.0 and state.Z == 0.0:
        raise TripleCollisionInput("R = Z = 0 is the triple collision")
    k1, k2 = _sqrt_k(p)
    y1, y2 = k1 * state.R, k2 * state.Z
    r = math.hypot(y1, y2)
    theta = math.atan2(y2, y1)
    v = state.R * state.P_R + state.Z * state.P_Z
    # u = r^2 dtheta/dt = y1 dy2/dt - y2 dy1/dt with dy/dt = K^{-1/2} p
    u = y1 * state.P_Z / k2 - y2 * state.P_R / k1
    c = math.cos(theta)
    w = c * c * u / math.sqrt(pot.U(p, theta))
    return McGeheeState(r, v, theta, float(w))


def from_mcgehee(p: PhysicalParams, state: McGeheeState, C: float = 0.0) -> CylState:
    """Invert :func:`to_mcgehee`; needs ``r > 0`` and ``|theta| < pi/2``."""
    r, theta = state.r, state.theta
    if r <= 0.0:
        raise CollisionManifoldPoint("r = 0 lies on the collision manifold and has no physical preimage")
    c, s = math.cos(theta), math.sin(theta)
    if abs(theta) >= pot.HALF_PI:
        raise DoubleCollisionInput("|theta| = pi/2 is a double collision")
    k1, k2 = _sqrt_k(p)
    R = r * c / k1
    Z = r * s / k2
    u = state.w * math.sqrt(pot.U(p, theta)) / (c * c)
    # sqrt(K)^{-1} p = (v/r) e_r + (u/r) e_theta in the y-plane
    py1 = (state.v * c - u * s) / r
    py2 = (state.v * s + u * c) / r
    return CylState(R, Z, k1 * py1, k2 * py2, C)


def effective_potential(p: PhysicalParams, R: float, Z: float, C: float) -> float:
    """C^2/(M R^2) plus the Manev pair potential of the three bodies."""
    if R == 0.0:
        raise DoubleCollisionInput("effective potential diverges at R = 0")
    rho = math.sqrt(R * R + 4.0 * Z * Z)
    GM = p.G * p.M
    u = (-GM * p.M / R * (1.0 + p.gamma0 / R)
         - 4.0 * GM * p.m / rho * (1.0 + 2.0 * p.gamma / rho))
    return C * C / (p.M * R * R) + u


def reduced_energy(p: PhysicalParams, state: CylState) -> float:
    if state.R <= 0.0:
        raise DoubleCollisionInput("reduced energy needs R > 0")
    kin = state.P_R**2 / p.M + (2.0 * p.M + p.m) / (4.0 * p.M * p.m) * state.P_Z**2
    return kin + effective_potential(p, state.R, state.Z, state.C)


def _terms(p, r, v, theta, w, h, C):
    c = math.cos(theta)
    c2 = c * c
    c4 = c2 * c2
    vc, _, u, _ = pot.shape_terms(p, theta)
    # r V cos^4 = r (V cos) cos^3 stays finite at the boundary
    return (2.0 * h * r * r * c4, -w * w * u, -v * v * c4, -C * C * c2,
            2.0 * r * vc * c2 * c, 2.0 * u * c2)


def energy_residual(p: PhysicalParams, state, h: float, C: float) -> float:
    """F(r, v, theta, w): zero on the energy level ``h``.

    ``F = 2 h r^2 cos^4 - w^2 U - v^2 cos^4 - C^2 cos^2 + 2 r V cos^4 + 2 U cos^2``.
    ``state`` is a :class:`McGeheeState` or a 4-sequence ``(r, v, theta, w)``.
    """
    r, v, theta, w = _unpack(state)
    return math.fsum(_terms(p, r, v, theta, w, h, C))


def residual_scale(p: PhysicalParams, state, h: float, C: float) -> float:
    """Largest absolute term of F; the natural unit for residual tolerances."""
    r, v, theta, w = _unpack(state)
    return max(abs(t) for t in _terms(p, r, v, theta, w, h, C))


def energy_residual_unscaled(p: PhysicalParams, state, h: float, C: float) -> float:
    """``h r^2`` minus the McGehee energy with the centrifugal term restored.

    Equals ``F / (2 cos^4 theta)``; used to cross-check :func:`energy_residual`.
    """
    r, v, theta, w = _unpack(state)
    c = math.cos(theta)
    uu = float(pot.U(p, theta))
    u = w * math.sqrt(uu) / (c * c)
    return (h * r * r - 0.5 * (u * u + v * v) - C * C / (2.0 * c * c)
            + r * float(pot.V(p, theta)) + float(pot.W(p, theta)))


def solve_w(p: PhysicalParams, r: float, v: float, theta: float, h: float, C: float,
            sign: float = 1.0) -> float:
    """Shape velocity ``w`` placing ``(r, v, theta, w)`` on the energy level."""
    c = math.cos(theta)
    c2 = c * c
    vc, _, u, _ = pot.shape_terms(p, theta)
    w2 = (2.0 * h * r * r * c2 * c2 - v * v * c2 * c2 - C * C * c2
          + 2.0 * r * vc * c2 * c + 2.0 * u * c2) / u
    if w2 < 0.0:
        raise ManevError(f"no real w: point lies outside the Hill region (w^2 = {w2:.6g})")
    return math.copysign(math.sqrt(w2), sign)


def _unpack(state):
    if isinstance(state, McGeheeState):
        return state.r, state.v, state.theta, state.w
    r, v, theta, w = (float(x) for x in state[:4])
    return r, v, theta, w
