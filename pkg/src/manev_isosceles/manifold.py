"""Triple collision manifold: topology, sections, equilibria and their spectra.

The collision manifold is the ``r = 0`` slice of the energy level,
``w^2 + v^2 cos^4/U + (C^2 - 2U) cos^2/U = 0``. Its shape is decided by
comparing ``|C|`` against ``sqrt(2 U_min) = sqrt(G M^3 gamma0)`` and
``sqrt(2 U(0))``.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import coords
from . import potentials as pot
from .dynamics import rhs_regularized
from .errors import OutsideWindow
from .params import PhysicalParams

EDGE_RTOL = 1e-12


class TopologyClass(str, enum.Enum):
    SPHERE_MINUS_FOUR_POINTS = "SphereMinusFourPoints"
    SPHERE_PLUS_TWO_LINES = "SpherePlusTwoLines"
    POINT_PLUS_TWO_LINES = "PointPlusTwoLines"
    TWO_LINES_ONLY = "TwoLinesOnly"


TOPOLOGY_ORDER = tuple(TopologyClass)


class EquilibriumKind(str, enum.Enum):
    P_PLUS = "P_plus"
    P_MINUS = "P_minus"
    E1_PLUS = "E1_plus"
    E1_MINUS = "E1_minus"
    E2_PLUS = "E2_plus"
    E2_MINUS = "E2_minus"
    BOUNDARY_LINE = "BoundaryLine"


@dataclass(frozen=True)
class TopologyReport:
    cls: TopologyClass
    C: float
    lower: float
    upper: float


@dataclass
class Equilibrium:
    kind: EquilibriumKind
    location: tuple[float, float, float, float] | None
    spectrum_closed: np.ndarray | None = None
    spectrum_numeric: np.ndarray | None = None
    manifold_dims: tuple[int, int, int] | None = None

    @property
    def interior(self) -> bool:
        return self.kind is not EquilibriumKind.BOUNDARY_LINE


@dataclass
class SpectrumReport:
    """Closed-form against finite-difference spectrum at one equilibrium.

    ``lambda1_forms`` holds every closed-form expression of the radial
    eigenvalue; ``lambda1_match`` names the one that agrees with the
    numerical radial eigenvalue ``lambda1_numeric`` (``None`` if none does).
    """

    kind: EquilibriumKind
    location: tuple[float, float, float, float]
    spectrum_closed: np.ndarray
    spectrum_numeric: np.ndarray
    manifold_dims: tuple[int, int, int]
    lambda1_numeric: complex
    lambda1_forms: dict[str, complex]
    lambda1_match: str | None
    shape_coefficient: float  # d(w')/d(theta) from the numerical Jacobian
    max_deviation: float = math.nan
    notes: list[str] = field(default_factory=list)

    @property
    def agrees(self) -> bool:
        return self.max_deviation <= 1e-6


# --- thresholds and topology ----------------------------------------------------

def thresholds(p: PhysicalParams) -> tuple[float, float]:
    """``(sqrt(2 U_min), sqrt(2 U(0)))``."""
    return math.sqrt(2.0 * pot.u_min(p)), math.sqrt(2.0 * pot.u_max(p))


def _at(x: float, edge: float) -> bool:
    return math.isclose(x, edge, rel_tol=EDGE_RTOL, abs_tol=0.0)


def classify(p: PhysicalParams, C: float) -> TopologyReport:
    """Topology of the collision manifold for angular momentum ``C``.

    The equality ``|C| = sqrt(2 U_min)`` is assigned to the sphere-minus-four-
    points case.
    """
    lo, hi = thresholds(p)
    a = abs(C)
    if a < lo or _at(a, lo):
        cls = TopologyClass.SPHERE_MINUS_FOUR_POINTS
    elif _at(a, hi):
        cls = TopologyClass.POINT_PLUS_TWO_LINES
    elif a < hi:
        cls = TopologyClass.SPHERE_PLUS_TWO_LINES
    else:
        cls = TopologyClass.TWO_LINES_ONLY
    return TopologyReport(cls, float(C), lo, hi)


def section_w2(p: PhysicalParams, v0: float, C: float, theta) -> np.ndarray:
    """``w^2`` on the level ``v = v0`` of the collision manifold (negative: empty)."""
    c2 = np.cos(theta) ** 2
    u = pot.U(p, theta)
    return ((2.0 * u - C * C) * c2 - v0 * v0 * c2 * c2) / u


def section_curve(p: PhysicalParams, v0: float, C: float, n: int) -> np.ndarray:
    """Points ``(theta, w)`` of the level ``v = v0`` of the collision manifold.

    ``theta`` runs over ``n`` points of ``[-pi/2, pi/2]``. The upper branch
    (``w >= 0``, increasing theta) is followed by the lower branch
    (decreasing theta). Returns shape ``(k, 2)``; ``k = 0`` when empty.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    th = np.linspace(-pot.HALF_PI, pot.HALF_PI, n)
    w2 = section_w2(p, v0, C, th)
    ok = w2 >= 0.0
    w = np.sqrt(np.where(ok, w2, 0.0))
    upper = np.column_stack([th[ok], w[ok]])
    lower = np.column_stack([th[ok][::-1], -w[ok][::-1]])
    return np.vstack([upper, lower]) if ok.any() else np.empty((0, 2))


# --- equilibria -------------------------------------------------------------------

def e_point_angle(p: PhysicalParams, C: float) -> float:
    """Positive shape angle of the off-axis equilibria (needs ``C^2 < G M^3 gamma0``)."""
    gm3 = p.G * p.M**3
    tan2 = (math.sqrt(16.0 * gm3 * p.gamma / (gm3 * p.gamma0 - C * C)) - 1.0) / p.mu
    return math.atan(math.sqrt(tan2))


def e_point_speed(p: PhysicalParams, C: float) -> float:
    """``|v|`` of the off-axis equilibria, from the collision-manifold relation."""
    th = e_point_angle(p, C)
    return math.sqrt(2.0 * float(pot.U(p, th)) - C * C) / math.cos(th)


def e_point_speed_printed(p: PhysicalParams, C: float) -> float:
    """The literature expression ``(1/mu)[sqrt(8GM^2 m gamma) + sqrt(2M/m (GM^3 gamma0 - C^2))]``.

    Smaller than :func:`e_point_speed` by a factor ``sqrt(mu)``; kept only to
    document the discrepancy.
    """
    gm3 = p.G * p.M**3
    return (math.sqrt(8.0 * p.G * p.M**2 * p.m * p.gamma)
            + math.sqrt(2.0 * p.M / p.m * (gm3 * p.gamma0 - C * C))) / p.mu


def p_windows(p: PhysicalParams, C: float) -> tuple[bool, bool]:
    """``(P points exist, E points exist)`` for angular momentum ``C``."""
    lo, hi = thresholds(p)
    a = abs(C)
    has_p = a <= hi or _at(a, hi)
    has_e = a < lo and not _at(a, lo)
    return has_p, has_e


def equilibria(p: PhysicalParams, C: float) -> list[Equilibrium]:
    """Equilibria of the regularized field lying on the collision manifold.

    Always ends with a :attr:`EquilibriumKind.BOUNDARY_LINE` marker standing
    for the lines of degenerate equilibria at ``theta = +-pi/2``.
    """
    K = EquilibriumKind
    has_p, has_e = p_windows(p, C)
    out = []
    if has_p:
        vp = math.sqrt(max(0.0, 2.0 * pot.u_max(p) - C * C))
        out += [Equilibrium(K.P_PLUS, (0.0, vp, 0.0, 0.0)),
                Equilibrium(K.P_MINUS, (0.0, -vp, 0.0, 0.0))]
    if has_e:
        th, ve = e_point_angle(p, C), e_point_speed(p, C)
        out += [Equilibrium(K.E1_PLUS, (0.0, ve, -th, 0.0)),
                Equilibrium(K.E1_MINUS, (0.0, -ve, -th, 0.0)),
                Equilibrium(K.E2_PLUS, (0.0, ve, th, 0.0)),
                Equilibrium(K.E2_MINUS, (0.0, -ve, th, 0.0))]
    out.append(Equilibrium(K.BOUNDARY_LINE, None))
    return out


# --- closed-form spectral data ------------------------------------------------------

def shape_coefficient_printed(p: PhysicalParams, C: float) -> float:
    """The printed closed form of d(w')/d(theta) at the off-axis equilibria."""
    th = e_point_angle(p, C)
    c2 = math.cos(th) ** 2
    s2 = 1.0 - c2
    M, m, g0, g = p.M, p.m, p.gamma0, p.gamma
    num = 16.0 * M * m * m * (2.0 * M + m) * g * s2 * c2 * c2
    return num / (M * c2 - M - 0.5 * m) ** 2 / expression_T(p, C)


def expression_T(p: PhysicalParams, C: float) -> float:
    """``(M^2 gamma0 - 4 m^2 gamma) cos^2 theta0 - M (M + m/2) gamma0``."""
    c2 = math.cos(e_point_angle(p, C)) ** 2
    M, m = p.M, p.m
    return (M * M * p.gamma0 - 4.0 * m * m * p.gamma) * c2 - M * (M + 0.5 * m) * p.gamma0


def expression_T_closed(p: PhysicalParams, C: float) -> float:
    """:func:`expression_T` after eliminating ``theta0``; always negative."""
    gm3 = p.G * p.M**3
    q = math.sqrt(16.0 * gm3 * p.gamma / (gm3 * p.gamma0 - C * C))
    M, m = p.M, p.m
    return -m * (2.0 * M + m) * (8.0 * m * p.gamma + M * p.gamma0 * q) / (2.0 * (2.0 * M + m * q))


def _p_lambda1_forms(p: PhysicalParams, C: float, sign: float) -> dict[str, complex]:
    gm3g0 = p.G * p.M**3 * p.gamma0
    return {
        "jacobian": sign * cmath.sqrt(2.0 - C * C / pot.u_max(p)),
        "simplified": sign * cmath.sqrt((gm3g0 - C * C) / gm3g0),
    }


def _p_shape_pair(p: PhysicalParams, C: float) -> complex:
    num = -2.0 * (p.G * p.M**3 * (p.gamma0 - 16.0 * p.gamma) - C * C)
    den = p.G * p.M**2 * (p.M * p.gamma0 + 8.0 * p.m * p.gamma)
    return 1j * cmath.sqrt(num / den)


def closed_spectrum(p: PhysicalParams, kind: EquilibriumKind, C: float):
    """Closed-form restricted spectrum and the radial-eigenvalue forms."""
    K = EquilibriumKind
    if kind in (K.P_PLUS, K.P_MINUS):
        sign = 1.0 if kind is K.P_PLUS else -1.0
        forms = _p_lambda1_forms(p, C, sign)
        pair = _p_shape_pair(p, C)
        return np.array([forms["jacobian"], pair, -pair]), forms
    if kind is K.BOUNDARY_LINE:
        raise OutsideWindow("boundary lines are degenerate; no spectrum is computed")
    sign = 1.0 if kind in (K.E1_PLUS, K.E2_PLUS) else -1.0
    th = e_point_angle(p, C)
    lam1 = sign * e_point_speed(p, C) * math.cos(th) ** 2 / math.sqrt(float(pot.U(p, th)))
    a = shape_coefficient_printed(p, C)
    pair = cmath.sqrt(a)  # i sqrt(-a) when a < 0
    return np.array([lam1, pair, -pair], dtype=complex), {"closed": complex(lam1)}


# --- numerical restricted Jacobian -----------------------------------------------------

def canonical_sort(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    key = [(round(x.real, 8), round(x.imag, 8)) for x in z]
    return z[sorted(range(len(z)), key=key.__getitem__)]


def jacobian_fd(p: PhysicalParams, x, h: float, C: float) -> np.ndarray:
    """Central-difference Jacobian of the (r, v, theta, w) regularized field."""
    x = np.asarray(x, dtype=float)
    J = np.empty((4, 4))
    for j in range(4):
        d = 1e-6 * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += d
        xm[j] -= d
        J[:, j] = (rhs_regularized(p, xp, h, C)[:4] - rhs_regularized(p, xm, h, C)[:4]) / (2 * d)
    return J


def energy_gradient_fd(p: PhysicalParams, x, h: float, C: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    g = np.empty(4)
    for j in range(4):
        d = 1e-6 * (1.0 + abs(x[j]))
        xp, xm = x.copy(), x.copy()
        xp[j] += d
        xm[j] -= d
        g[j] = (coords.energy_residual(p, xp, h, C) - coords.energy_residual(p, xm, h, C)) / (2 * d)
    return g


def restricted_jacobian(p: PhysicalParams, x, h: float, C: float):
    """Jacobian restricted to the tangent space of the energy level at ``x``.

    Returns ``(Jbar, basis)`` where ``basis`` is a 4x3 orthonormal basis of
    the kernel of grad F.
    """
    g = energy_gradient_fd(p, x, h, C)
    _, _, vt = np.linalg.svd(g.reshape(1, 4))
    B = vt[1:].T
    J = jacobian_fd(p, x, h, C)
    return B.T @ J @ B, B


def count_dims(eigs, tol: float = 1e-7) -> tuple[int, int, int]:
    """``(unstable, stable, centre)`` dimensions from the real parts."""
    eigs = np.asarray(eigs)
    scale = max(1.0, float(np.max(np.abs(eigs)))) if len(eigs) else 1.0
    re = eigs.real
    return (int(np.sum(re > tol * scale)), int(np.sum(re < -tol * scale)),
            int(np.sum(np.abs(re) <= tol * scale)))


def _numeric(p, x, h, C):
    Jbar, B = restricted_jacobian(p, x, h, C)
    vals, vecs = np.linalg.eig(Jbar)
    full = B @ vecs
    radial = int(np.argmax(np.abs(full[0]) / np.linalg.norm(full, axis=0)))
    a = jacobian_fd(p, x, h, C)[3, 2]
    return vals, complex(vals[radial]), float(a)


def _deviation(a, b) -> float:
    a, b = canonical_sort(a), canonical_sort(b)
    return float(np.max(np.abs(a - b)))


def restricted_spectrum(p: PhysicalParams, eq: Equilibrium, h: float, C: float) -> SpectrumReport:
    """Spectrum of the linearization restricted to the energy level.

    Fills ``eq.spectrum_closed``, ``eq.spectrum_numeric`` and
    ``eq.manifold_dims`` in place and returns the full report.

    Raises
    ------
    OutsideWindow
        If ``eq`` does not exist for this ``C`` or is a boundary-line marker.
    """
    K = EquilibriumKind
    if eq.kind is K.BOUNDARY_LINE or eq.location is None:
        raise OutsideWindow("boundary lines are degenerate; no spectrum is computed")
    has_p, has_e = p_windows(p, C)
    if eq.kind in (K.P_PLUS, K.P_MINUS) and not has_p:
        raise OutsideWindow(f"P equilibria need |C| <= sqrt(2 U(0)), got C={C}")
    if eq.kind not in (K.P_PLUS, K.P_MINUS) and not has_e:
        raise OutsideWindow(f"E equilibria need |C| < sqrt(G M^3 gamma0), got C={C}")

    closed, forms = closed_spectrum(p, eq.kind, C)
    numeric, lam1, a = _numeric(p, eq.location, h, C)
    closed, numeric = canonical_sort(closed), canonical_sort(numeric)
    match = None
    for name, val in forms.items():
        if abs(val - lam1) <= 1e-6 * max(1.0, abs(val)):
            match = name
            break
    dims = count_dims(numeric)
    rep = SpectrumReport(eq.kind, eq.location, closed, numeric, dims, lam1, forms, match, a,
                         max_deviation=_deviation(closed, numeric))
    if eq.kind in (K.P_PLUS, K.P_MINUS) and abs(forms["jacobian"] - forms["simplified"]) > 1e-9:
        rep.notes.append(f"radial eigenvalue forms disagree; numeric matches {match!r}")
    if eq.kind not in (K.P_PLUS, K.P_MINUS):
        a_closed = shape_coefficient_printed(p, C)
        if abs(a - a_closed) > 1e-6 * max(1.0, abs(a)):
            rep.notes.append(f"shape coefficient: numeric {a:.9g}, closed form {a_closed:.9g}")
    eq.spectrum_closed, eq.spectrum_numeric, eq.manifold_dims = closed, numeric, dims
    return rep


def special_point_spectrum(p: PhysicalParams, h: float = -1.0) -> SpectrumReport:
    """Spectrum at the origin for ``|C| = sqrt(2 U(0))``, where P+ and P- merge."""
    C = math.sqrt(2.0 * pot.u_max(p))
    pair = 4j * math.sqrt(p.m * p.gamma * p.mu / (p.M * p.gamma0 + 8.0 * p.m * p.gamma))
    closed = canonical_sort([0.0, pair, -pair])
    x = (0.0, 0.0, 0.0, 0.0)
    numeric, _, a = _numeric(p, x, h, C)
    numeric = canonical_sort(numeric)
    lam1 = complex(numeric[np.argmin(np.abs(numeric))])
    forms = {"closed": 0j}
    match = "closed" if abs(lam1) <= 1e-6 else None
    return SpectrumReport(EquilibriumKind.P_PLUS, x, closed, numeric, count_dims(numeric),
                          lam1, forms, match, a, max_deviation=_deviation(closed, numeric))
