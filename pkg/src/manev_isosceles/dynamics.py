"""Vector fields of the isosceles Manev problem and trajectory integration.

Fields (independent variable in brackets)

``regularized`` [sigma]
    Blow-up field on ``(r, v, theta, w)`` with the energy substituted into
    ``v'``; analytic at ``r = 0``. Clocks ``tau`` and ``t`` ride along.
``unregularized`` [tau]
    The intermediate field on ``(r, v, theta, u)`` after ``dt = r^2 dtau``,
    kept for cross-validation only.
``cylindrical`` [t]
    Hamilton's equations for ``(R, Z, P_R, P_Z)``.
``manifold`` [sigma]
    The ``r = 0`` restriction on ``(v, theta, w)``.
``homographic`` [sigma]
    The ``theta = w = 0`` restriction on ``(r, v)``.

The shape equation carries the term ``(k'/k) w^2`` with
``k = cos^2 theta / sqrt(U)``, which comes from differentiating
``w = k u`` and is needed for the energy level (and the collision manifold)
to be invariant.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import Callable, Sequence

import numpy as np

from . import coords
from . import potentials as pot
from .errors import InconsistentStart, ManevError, StepFailure
from .integrator import Event, dopri5
from .params import IntegrationSettings, PhysicalParams

FIELDS = ("regularized", "unregularized", "cylindrical", "manifold", "homographic")

COLUMNS = {
    "regularized": ("r", "v", "theta", "w", "tau", "t_phys"),
    "unregularized": ("r", "v", "theta", "u", "sigma", "t_phys"),
    "cylindrical": ("R", "Z", "P_R", "P_Z"),
    "manifold": ("v", "theta", "w"),
    "homographic": ("r", "v", "tau", "t_phys"),
}

START_TOL = 1e-8


class Termination(str, enum.Enum):
    MAX_TIME = "MaxTime"
    DOUBLE_COLLISION = "DoubleCollisionEvent"
    TRIPLE_COLLISION = "TripleCollisionEvent"
    ESCAPE = "Escape"
    STEP_FAILURE = "StepFailure"
    EVENT = "Event"


# --- vector fields -------------------------------------------------------------

def _w_prime(p, r, theta, w, C):
    c, s = math.cos(theta), math.sin(theta)
    vc, dvc2, u, du = pot.shape_terms(p, theta)
    c2 = c * c
    base = (r * dvc2 * c2 + du * c2 - (C * C - 2.0 * u) * s * c) / u
    return base - (2.0 * s / c + 0.5 * du / u) * w * w


def rhs_regularized(p: PhysicalParams, state, h: float, C: float) -> np.ndarray:
    """Derivatives ``(r', v', theta', w', tau', t')`` with respect to sigma."""
    r, v, theta, w = coords._unpack(state)
    c = math.cos(theta)
    vc, _, u, _ = pot.shape_terms(p, theta)
    sq = math.sqrt(u)
    k = c * c / sq
    return np.array([
        k * r * v,
        r * (2.0 * h * r * k + c * vc / sq),
        w,
        _w_prime(p, r, theta, w, C),
        k,
        r * r * k,
    ])


def rhs_collision_manifold(p: PhysicalParams, state, C: float) -> np.ndarray:
    """Derivatives ``(v', theta', w')`` on the collision manifold r = 0."""
    _, theta, w = (float(x) for x in state[:3])
    return np.array([0.0, w, _w_prime(p, 0.0, theta, w, C)])


def rhs_unregularized(p: PhysicalParams, state, C: float) -> np.ndarray:
    """Derivatives ``(r', v', theta', u', sigma', t')`` with respect to tau.

    ``state`` is ``(r, v, theta, u)``; the energy is not substituted, so no
    ``h`` is needed.
    """
    r, v, theta, u = (float(x) for x in state[:4])
    c, s = math.cos(theta), math.sin(theta)
    c2 = c * c
    V, dV = float(pot.V(p, theta)), float(pot.dV(p, theta))
    W, dW = float(pot.W(p, theta)), float(pot.dW(p, theta))
    uu = float(pot.U(p, theta))
    return np.array([
        r * v,
        v * v + u * u + C * C / c2 - r * V - 2.0 * W,
        u,
        -C * C * s / (c2 * c) + r * dV + dW,
        math.sqrt(uu) / c2,
        r * r,
    ])


def potential_gradient(p: PhysicalParams, R: float, Z: float) -> tuple[float, float]:
    """``(dU/dR, dU/dZ)`` of the Manev pair potential in cylindrical coordinates."""
    rho2 = R * R + 4.0 * Z * Z
    rho = math.sqrt(rho2)
    GM = p.G * p.M
    a = 4.0 * GM * p.m / (rho2 * rho) + 16.0 * GM * p.m * p.gamma / (rho2 * rho2)
    dR = GM * p.M / (R * R) + 2.0 * GM * p.M * p.gamma0 / R**3 + a * R
    dZ = 4.0 * a * Z
    return dR, dZ


def rhs_cylindrical(p: PhysicalParams, state, C: float | None = None) -> np.ndarray:
    """Derivatives ``(R', Z', P_R', P_Z')`` in physical time."""
    if isinstance(state, coords.CylState):
        R, Z, PR, PZ, Cs = state.R, state.Z, state.P_R, state.P_Z, state.C
        C = Cs if C is None else C
    else:
        R, Z, PR, PZ = (float(x) for x in state[:4])
        C = 0.0 if C is None else C
    dR, dZ = potential_gradient(p, R, Z)
    return np.array([
        2.0 * PR / p.M,
        (2.0 * p.M + p.m) / (2.0 * p.M * p.m) * PZ,
        2.0 * C * C / (p.M * R**3) - dR,
        -dZ,
    ])


def rhs_homographic(p: PhysicalParams, state, h: float) -> np.ndarray:
    """Derivatives ``(r', v', tau', t')`` on the homographic plane theta = w = 0."""
    r, v = float(state[0]), float(state[1])
    k0 = 1.0 / math.sqrt(pot.u_max(p))
    V0 = float(pot.V(p, 0.0))
    return np.array([k0 * r * v, k0 * r * (2.0 * h * r + V0), k0, r * r * k0])


# --- residuals -----------------------------------------------------------------

def homographic_residual(p: PhysicalParams, r: float, v: float, h: float, C: float) -> float:
    """Energy relation on the homographic plane; zero on admissible states."""
    V0, U0 = float(pot.V(p, 0.0)), pot.u_max(p)
    return v * v + 2.0 * (-h) * r * r - 2.0 * r * V0 + C * C - 2.0 * U0


def _residual_fn(p, fld, h, C):
    """Return ``y -> (residual, scale)`` for a field's state vector."""
    if fld == "regularized":
        return lambda y: (coords.energy_residual(p, y, h, C), coords.residual_scale(p, y, h, C))
    if fld == "manifold":
        def res(y):
            st = (0.0, y[0], y[1], y[2])
            return coords.energy_residual(p, st, h, C), coords.residual_scale(p, st, h, C)
        return res
    if fld == "unregularized":
        def res(y):
            c = math.cos(y[2])
            w = c * c * y[3] / math.sqrt(float(pot.U(p, y[2])))
            st = (y[0], y[1], y[2], w)
            return coords.energy_residual(p, st, h, C), coords.residual_scale(p, st, h, C)
        return res
    if fld == "homographic":
        V0, U0 = float(pot.V(p, 0.0)), pot.u_max(p)

        def res(y):
            r, v = y[0], y[1]
            terms = (v * v, 2.0 * h * r * r, 2.0 * r * V0, C * C, 2.0 * U0)
            return homographic_residual(p, r, v, h, C), max(abs(t) for t in terms)
        return res
    if fld == "cylindrical":
        def res(y):
            st = coords.CylState(y[0], y[1], y[2], y[3], C)
            e = coords.reduced_energy(p, st)
            return e - h, max(1.0, abs(h))
        return res
    raise ManevError(f"unknown field {fld!r}")


# --- trajectories ----------------------------------------------------------------

@dataclass
class Trajectory:
    """Sampled solution of one of the fields.

    ``sigma`` holds the independent variable (physical time for the
    cylindrical field). ``states`` has one row per sample, with column names
    in ``columns``.
    """

    field: str
    sigma: np.ndarray
    states: np.ndarray
    columns: tuple[str, ...]
    h: float
    C: float
    termination: Termination
    max_residual: float
    residual_scale: float
    residuals: np.ndarray
    events: list[tuple[str, float, np.ndarray]] = dc_field(default_factory=list)
    event_name: str | None = None
    message: str = ""
    params: PhysicalParams | None = None

    def __len__(self):
        return len(self.sigma)

    def col(self, name: str) -> np.ndarray:
        return self.states[:, self.columns.index(name)]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def max_relative_residual(self) -> float:
        return self.max_residual / max(1.0, self.residual_scale)

    def mcgehee(self, i: int = -1) -> coords.McGeheeState:
        """Sample ``i`` as a McGehee state (all fields except cylindrical)."""
        y = self.states[i]
        s = float(self.sigma[i])
        if self.field == "regularized":
            return coords.McGeheeState(*y[:4], t_phys=y[5], tau=y[4], sigma=s)
        if self.field == "manifold":
            return coords.McGeheeState(0.0, y[0], y[1], y[2], sigma=s)
        if self.field == "homographic":
            return coords.McGeheeState(y[0], y[1], 0.0, 0.0, t_phys=y[3], tau=y[2], sigma=s)
        if self.field == "unregularized":
            return _unreg_to_state(self.params, y, s)
        raise ManevError("cylindrical samples are CylState; use states directly")

    def table(self) -> np.ndarray:
        """Uniform columns ``sigma, t_phys, r, v, theta, w, residual``."""
        p = self.params
        rows = []
        for i, y in enumerate(self.states):
            s = float(self.sigma[i])
            res = float(self.residuals[i])
            if self.field == "regularized":
                rows.append((s, y[5], y[0], y[1], y[2], y[3], res))
            elif self.field == "manifold":
                rows.append((s, 0.0, 0.0, y[0], y[1], y[2], res))
            elif self.field == "homographic":
                rows.append((s, y[3], y[0], y[1], 0.0, 0.0, res))
            elif self.field == "unregularized":
                st = _unreg_to_state(p, y, s)
                rows.append((st.sigma, st.t_phys, st.r, st.v, st.theta, st.w, res))
            else:
                st = coords.to_mcgehee(p, coords.CylState(*y[:4], self.C))
                rows.append((s, s, st.r, st.v, st.theta, st.w, res))
        return np.array(rows)

    def raise_for_status(self) -> "Trajectory":
        if self.termination is Termination.STEP_FAILURE:
            raise StepFailure(self.message or "step size underflow")
        return self


def _unreg_to_state(p, y, tau):
    c = math.cos(y[2])
    w = c * c * y[3] / math.sqrt(float(pot.U(p, y[2])))
    return coords.McGeheeState(y[0], y[1], y[2], w, t_phys=y[5], tau=tau, sigma=y[4])


def _start_vector(p, fld, start, h, C):
    if isinstance(start, coords.McGeheeState):
        if fld == "regularized":
            return [start.r, start.v, start.theta, start.w, start.tau, start.t_phys], start.sigma
        if fld == "manifold":
            return [start.v, start.theta, start.w], start.sigma
        if fld == "homographic":
            return [start.r, start.v, start.tau, start.t_phys], start.sigma
        if fld == "unregularized":
            c = math.cos(start.theta)
            u = start.w * math.sqrt(float(pot.U(p, start.theta))) / (c * c)
            return [start.r, start.v, start.theta, u, start.sigma, start.t_phys], start.tau
        raise ManevError("cylindrical field needs a CylState start")
    if isinstance(start, coords.CylState):
        if fld != "cylindrical":
            raise ManevError(f"{fld} field needs a McGehee start")
        return [start.R, start.Z, start.P_R, start.P_Z], 0.0
    y = [float(x) for x in start]
    n = len(COLUMNS[fld])
    base = {"regularized": 4, "unregularized": 4, "cylindrical": 4, "manifold": 3, "homographic": 2}[fld]
    if len(y) == base:
        y += [0.0] * (n - base)
    if len(y) != n:
        raise ManevError(f"{fld} start needs {base} (or {n}) components, got {len(y)}")
    return y, 0.0


def _field_fn(p, fld, h, C) -> Callable[[float, np.ndarray], np.ndarray]:
    if fld == "regularized":
        return lambda s, y: rhs_regularized(p, y, h, C)
    if fld == "manifold":
        return lambda s, y: rhs_collision_manifold(p, y, C)
    if fld == "unregularized":
        return lambda s, y: rhs_unregularized(p, y, C)
    if fld == "cylindrical":
        return lambda s, y: rhs_cylindrical(p, y, C)
    if fld == "homographic":
        return lambda s, y: rhs_homographic(p, y, h)
    raise ManevError(f"unknown field {fld!r}")


def _events(p, fld, st: IntegrationSettings) -> list[Event]:
    edge = pot.HALF_PI - st.theta_guard
    evs = []
    if fld in ("regularized", "unregularized", "manifold"):
        i = 1 if fld == "manifold" else 2
        evs.append(Event(Termination.DOUBLE_COLLISION.value, lambda s, y: edge - abs(y[i]), -1))
    if fld == "cylindrical":
        k1, k2 = coords._sqrt_k(p)
        evs.append(Event(Termination.DOUBLE_COLLISION.value,
                         lambda s, y: edge - abs(math.atan2(k2 * y[1], k1 * y[0])), -1))

        def rad(y):
            return math.hypot(k1 * y[0], k2 * y[1])
    else:
        def rad(y):
            return y[0]
    if fld != "manifold":
        if st.r_floor > 0.0:
            evs.append(Event(Termination.TRIPLE_COLLISION.value, lambda s, y: rad(y) - st.r_floor, -1))
        evs.append(Event(Termination.ESCAPE.value, lambda s, y: rad(y) - st.escape_radius, +1))
    return evs


def integrate(p: PhysicalParams, fld: str, start, h: float, C: float,
              sigma_max: float, settings: IntegrationSettings | None = None, *,
              events: Sequence[Event] = (), strict: bool = False,
              check_start: bool = True) -> Trajectory:
    """Integrate one of the fields from ``start`` up to ``sigma_max``.

    ``start`` is a :class:`~manev_isosceles.coords.McGeheeState`, a
    :class:`~manev_isosceles.coords.CylState` (cylindrical field), or a plain
    sequence of the field's coordinates (clocks may be omitted). For the
    cylindrical field ``h`` is ignored and taken from the start.

    Extra ``events`` are located alongside the built-in ones; a terminal one
    ends the run with ``Termination.EVENT``.

    Raises
    ------
    InconsistentStart
        If the start is off the energy level by more than ``1e-8`` of the
        residual scale.
    StepFailure
        Only with ``strict=True``; otherwise the partial trajectory is returned
        with ``termination == StepFailure``.
    """
    if fld not in FIELDS:
        raise ManevError(f"unknown field {fld!r}; choose from {', '.join(FIELDS)}")
    st = settings or IntegrationSettings()
    y0, s0 = _start_vector(p, fld, start, h, C)
    if fld == "cylindrical":
        h = coords.reduced_energy(p, coords.CylState(*y0[:4], C))
    resid = _residual_fn(p, fld, h, C)
    if check_start and fld != "cylindrical":
        f0, sc0 = resid(np.asarray(y0))
        if abs(f0) > START_TOL * max(1.0, sc0):
            raise InconsistentStart(
                f"start is off the energy level h={h}: residual {f0:.3e} (scale {sc0:.3e})")

    builtin = _events(p, fld, st)
    sol = dopri5(_field_fn(p, fld, h, C), s0, y0, s0 + sigma_max,
                 rtol=st.rel_tol, atol=st.abs_tol, max_step=st.max_step,
                 max_steps=st.max_steps, events=[*builtin, *events])

    if sol.status == "done":
        term = Termination.MAX_TIME
    elif sol.status == "event":
        names = {e.value for e in Termination}
        term = Termination(sol.event) if sol.event in names else Termination.EVENT
    else:
        term = Termination.STEP_FAILURE
    states = np.array(sol.y)
    rs = [resid(y) for y in states]
    residuals = np.array([r[0] for r in rs])
    scale = max(r[1] for r in rs)
    traj = Trajectory(fld, np.array(sol.s), states, COLUMNS[fld], h, C, term,
                      float(np.max(np.abs(residuals))), float(scale), residuals,
                      events=sol.hits, event_name=sol.event, message=sol.message, params=p)
    if strict:
        traj.raise_for_status()
    return traj
