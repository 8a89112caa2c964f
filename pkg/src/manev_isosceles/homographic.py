"""Homographic motions: the invariant plane theta = 0, w = 0.

On this plane the three bodies stay collinear with the middle mass at the
midpoint, and the energy relation reads::

    v^2 + 2(-h) r^2 - 2 r V(0) + C^2 - 2 U(0) = 0
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import potentials as pot
from .dynamics import Termination, integrate, rhs_homographic
from .errors import MotionImpossible, NotPeriodic
from .integrator import Event
from .params import IntegrationSettings, PhysicalParams

EDGE_RTOL = 1e-12


class HomographicClass(str, enum.Enum):
    PERIODIC = "Periodic"
    EJECTION_COLLISION = "EjectionCollision"
    UNBOUNDED = "Unbounded"
    EQUILIBRIUM = "Equilibrium"


@dataclass
class PeriodResult:
    kind: HomographicClass
    sigma_period: float
    t_period: float
    closure: float
    r_min: float
    r_max: float


@dataclass
class HomographicReport:
    h: float
    C: float
    S_r: float | None
    window_exists: float
    window_periodic: tuple[float, float] | None
    classification: HomographicClass
    r_range: tuple[float, float]
    period_sigma: float | None = None
    period_t: float | None = None
    integration_check: str | None = None
    verified: bool | None = None


def _v2(p, h, C, r):
    V0, U0 = float(pot.V(p, 0.0)), pot.u_max(p)
    return 2.0 * h * r * r + 2.0 * V0 * r + 2.0 * U0 - C * C


def radial_speed(p: PhysicalParams, h: float, C: float, r: float) -> float:
    """``|v|`` at radius ``r`` on the homographic plane (NaN if inadmissible)."""
    v2 = _v2(p, h, C, r)
    if v2 < 0.0:
        v2 = 0.0 if v2 > -1e-10 * max(1.0, abs(C * C)) else math.nan
    return math.sqrt(v2)


def admissible_range(p: PhysicalParams, h: float, C: float) -> tuple[float, float]:
    """Interval of ``r >= 0`` where the energy relation has a real ``v``.

    Raises ``MotionImpossible`` if it is empty.
    """
    V0, U0 = float(pot.V(p, 0.0)), pot.u_max(p)
    c0 = 2.0 * U0 - C * C
    if h == 0.0:
        return (max(0.0, -c0 / (2.0 * V0)), math.inf)
    disc = V0 * V0 - 2.0 * h * c0
    if disc < 0.0:
        if math.isclose(V0 * V0, 2.0 * h * c0, rel_tol=EDGE_RTOL):
            disc = 0.0
        else:
            raise MotionImpossible(f"no homographic motion for h={h}, C={C}")
    sq = math.sqrt(disc)
    if h < 0.0:
        lo = (V0 - sq) / (-2.0 * h)
        hi = (V0 + sq) / (-2.0 * h)
        return (max(0.0, lo), hi)
    # h > 0: v^2 is an upward parabola with its vertex at negative r
    if c0 >= 0.0:
        return (0.0, math.inf)
    return ((-V0 + sq) / (2.0 * h), math.inf)


def _windows(p, h):
    V0, U0 = float(pot.V(p, 0.0)), pot.u_max(p)
    lo = math.sqrt(2.0 * U0)
    if h < 0.0:
        hi = math.sqrt(2.0 * U0 + V0 * V0 / (2.0 * -h))
        return V0 / (2.0 * -h), hi, (lo, hi)
    return None, math.inf, None


def classify(p: PhysicalParams, h: float, C: float) -> HomographicClass:
    S_r, bound, _ = _windows(p, h)
    a = abs(C)
    lo = math.sqrt(2.0 * pot.u_max(p))
    if h < 0.0:
        if math.isclose(a, bound, rel_tol=EDGE_RTOL):
            return HomographicClass.EQUILIBRIUM
        if a > bound:
            raise MotionImpossible(
                f"|C| < sqrt(2U(0) + V(0)^2/(2(-h))) = {bound:.12g} required, got {C}")
        if a > lo and not math.isclose(a, lo, rel_tol=EDGE_RTOL):
            return HomographicClass.PERIODIC
        return HomographicClass.EJECTION_COLLISION
    if a > lo and not math.isclose(a, lo, rel_tol=EDGE_RTOL):
        return HomographicClass.UNBOUNDED
    return HomographicClass.EJECTION_COLLISION


def s_linearization(p: PhysicalParams, h: float) -> np.ndarray:
    """Eigenvalues of the (r, v) field linearized at the centre S (h < 0)."""
    if h >= 0.0:
        raise NotPeriodic("the centre S exists only for h < 0")
    S = float(pot.V(p, 0.0)) / (2.0 * -h)
    x = np.array([S, 0.0])
    J = np.empty((2, 2))
    for j in range(2):
        d = 1e-6 * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += d
        xm[j] -= d
        J[:, j] = (rhs_homographic(p, xp, h)[:2] - rhs_homographic(p, xm, h)[:2]) / (2 * d)
    return np.linalg.eigvals(J)


def find_period(p: PhysicalParams, h: float, C: float, r_start: float, v_sign: float = 1.0,
                settings: IntegrationSettings | None = None) -> PeriodResult:
    """First-return period of the homographic orbit through ``r_start``.

    The return section is ``v = 0`` crossed upwards (the pericentre). When
    the orbit degenerates to the point S, the small-oscillation period is
    returned with ``kind == Equilibrium``.

    Raises
    ------
    NotPeriodic
        If ``h >= 0``, ``C`` is outside the periodic window, or ``r_start`` is
        not admissible.
    """
    if h >= 0.0:
        raise NotPeriodic("homographic orbits are periodic only for h < 0")
    try:
        kind = classify(p, h, C)
    except MotionImpossible as exc:
        raise NotPeriodic(str(exc)) from exc
    S_r, _, _ = _windows(p, h)
    k0 = 1.0 / math.sqrt(pot.u_max(p))
    V0 = float(pot.V(p, 0.0))
    omega = k0 * math.sqrt(S_r * V0)
    if kind is HomographicClass.EQUILIBRIUM:
        return PeriodResult(kind, 2.0 * math.pi / omega,
                            2.0 * math.pi / omega * S_r * S_r * k0, 0.0, S_r, S_r)
    if kind is not HomographicClass.PERIODIC:
        raise NotPeriodic(f"C={C} lies outside the periodic window for h={h}")
    r_lo, r_hi = admissible_range(p, h, C)
    v_abs = radial_speed(p, h, C, r_start)
    if not (r_lo * (1 - 1e-12) <= r_start <= r_hi * (1 + 1e-12)) or math.isnan(v_abs):
        raise NotPeriodic(f"r_start={r_start} outside the admissible range [{r_lo}, {r_hi}]")
    v0 = math.copysign(v_abs, v_sign)
    st = settings or IntegrationSettings()
    on_section = v0 == 0.0 and r_start < S_r
    needed = 1 if on_section else 2
    section = Event("pericentre", lambda s, y: y[1], +1, terminal=False)
    span = 4.0 * math.pi / omega
    while True:
        tr = integrate(p, "homographic", [r_start, v0], h, C, span, st, events=[section])
        hits = [(s, y) for name, s, y in tr.events if name == "pericentre"]
        if len(hits) >= needed:
            break
        if tr.termination is not Termination.MAX_TIME or span > 1e6:
            raise NotPeriodic(f"no return to the pericentre section ({tr.termination.value})")
        span *= 2.0
    if on_section:
        (s1, y1), = hits[:1]
        T_sigma, T_t = s1, y1[3]
    else:
        (s0, y0), (s1, y1) = hits[:2]
        T_sigma, T_t = s1 - s0, y1[3] - y0[3]
    back = integrate(p, "homographic", [r_start, v0], h, C, T_sigma, st)
    closure = float(max(abs(back.final[0] - r_start), abs(back.final[1] - v0)))
    return PeriodResult(kind, float(T_sigma), float(T_t), closure, r_lo, r_hi)


def analyze(p: PhysicalParams, h: float, C: float, *, verify: bool = True,
            settings: IntegrationSettings | None = None) -> HomographicReport:
    """Closed-form description of homographic motion at ``(h, C)``.

    With ``verify`` the classification is checked by integrating one orbit
    of the plane field and the outcome is stored in ``integration_check``.

    Raises ``MotionImpossible`` when ``h < 0`` and ``|C|`` exceeds the
    existence bound.
    """
    S_r, bound, win = _windows(p, h)
    cls = classify(p, h, C)
    if cls is HomographicClass.EQUILIBRIUM:
        rng = (S_r, S_r)
    else:
        rng = admissible_range(p, h, C)
    rep = HomographicReport(h, C, S_r, bound, win, cls, rng)
    if cls in (HomographicClass.PERIODIC, HomographicClass.EQUILIBRIUM):
        per = find_period(p, h, C, rng[0], settings=settings)
        rep.period_sigma, rep.period_t = per.sigma_period, per.t_period
        if verify:
            ok = per.closure <= 1e-6 * max(1.0, rng[1])
            rep.integration_check = f"closure {per.closure:.3e}"
            rep.verified = ok
        return rep
    if not verify:
        return rep
    st = (settings or IntegrationSettings())
    if cls is HomographicClass.UNBOUNDED:
        r0 = rng[0]
        tr = integrate(p, "homographic", [r0, 0.0], h, C, 1e4, st)
        rep.integration_check = tr.termination.value
        rep.verified = tr.termination is Termination.ESCAPE
    else:
        # fall towards the collision manifold from the outermost admissible radius
        r0 = rng[1] if math.isfinite(rng[1]) else 1.0
        v0 = -radial_speed(p, h, C, r0)
        st = st.replace(r_floor=1e-8 * max(1.0, r0))
        tr = integrate(p, "homographic", [r0, v0], h, C, 1e4, st)
        rep.integration_check = tr.termination.value
        rep.verified = tr.termination is Termination.TRIPLE_COLLISION
    return rep


def orbit(p: PhysicalParams, h: float, C: float, r_start: float, v_sign: float = 1.0,
          sigma_max: float | None = None, settings: IntegrationSettings | None = None):
    """Integrate the homographic orbit through ``r_start``; one period by default."""
    v0 = math.copysign(radial_speed(p, h, C, r_start), v_sign)
    if math.isnan(v0):
        raise MotionImpossible(f"r_start={r_start} is not admissible for h={h}, C={C}")
    if sigma_max is None:
        if classify(p, h, C) is HomographicClass.PERIODIC:
            sigma_max = find_period(p, h, C, r_start, v_sign, settings).sigma_period
        else:
            sigma_max = 100.0
    return integrate(p, "homographic", [r_start, v0], h, C, sigma_max, settings)
