"""Dormand-Prince 5(4) integrator with PI step control and event location.

Step-size control and the continuous extension follow Hairer, Norsett &
Wanner, *Solving ODEs I*, section II.4-II.6 (DOPRI5). Events are located on
the dense output by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Butcher tableau
C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
A71, A73, A74, A75, A76 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = (71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
# continuous extension
D1 = -12715105075 / 11282082432
D3 = 87487479700 / 32700410799
D4 = -10690763975 / 1880347072
D5 = 701980252875 / 199316789632
D6 = -1453857185 / 822651844
D7 = 69997945 / 29380423

SAFE, FAC_MIN, FAC_MAX, BETA = 0.9, 0.2, 10.0, 0.04
EXPO1 = 0.2 - BETA * 0.75


@dataclass
class Event:
    """Root of ``g(s, y)`` to detect.

    ``direction`` +1 fires only when g goes from negative to positive, -1 the
    reverse, 0 either way.
    """

    name: str
    g: Callable[[float, np.ndarray], float]
    direction: int = 0
    terminal: bool = True


@dataclass
class Solution:
    s: list[float]
    y: list[np.ndarray]
    status: str  # "done" | "event" | "step_failure" | "max_steps"
    event: str | None = None
    hits: list[tuple[str, float, np.ndarray]] = field(default_factory=list)
    message: str = ""


class _Dense:
    __slots__ = ("s0", "h", "r1", "r2", "r3", "r4", "r5")

    def __init__(self, s0, h, y0, y1, k1, k3, k4, k5, k6, k7):
        ydiff = y1 - y0
        bspl = h * k1 - ydiff
        self.s0, self.h = s0, h
        self.r1, self.r2, self.r3 = y0, ydiff, bspl
        self.r4 = ydiff - h * k7 - bspl
        self.r5 = h * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7)

    def __call__(self, s):
        th = (s - self.s0) / self.h
        th1 = 1.0 - th
        return self.r1 + th * (self.r2 + th1 * (self.r3 + th * (self.r4 + th1 * self.r5)))


def _fires(g0, g1, direction):
    if g0 == 0.0 or g0 * g1 > 0.0:
        return False
    if direction > 0:
        return g0 < 0.0
    if direction < 0:
        return g0 > 0.0
    return True


def _bisect(ev: Event, dense: _Dense, sa, sb, ga):
    """Shrink ``[sa, sb]`` around the root; return the far-side endpoint."""
    for _ in range(200):
        sm = 0.5 * (sa + sb)
        if sm == sa or sm == sb:
            break
        gm = ev.g(sm, dense(sm))
        if gm == 0.0 or (gm > 0.0) != (ga > 0.0):
            sb = sm
        else:
            sa, ga = sm, gm
    return sb


def _initial_step(f, s0, y0, f0, direction, rtol, atol, max_step):
    sc = atol + rtol * np.abs(y0)
    d0 = math.sqrt(np.mean((y0 / sc) ** 2))
    d1 = math.sqrt(np.mean((f0 / sc) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, max_step)
    y1 = y0 + direction * h0 * f0
    f1 = f(s0 + direction * h0, y1)
    d2 = math.sqrt(np.mean(((f1 - f0) / sc) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def dopri5(f: Callable[[float, np.ndarray], np.ndarray], s0: float, y0: Sequence[float],
           s_end: float, *, rtol: float = 1e-12, atol: float = 1e-12,
           max_step: float = math.inf, max_steps: int = 2_000_000,
           events: Sequence[Event] = (), first_step: float | None = None) -> Solution:
    """Integrate ``y' = f(s, y)`` from ``s0`` to ``s_end`` (forward only).

    Every accepted step is recorded. Terminal events stop the integration at
    the located root; non-terminal ones are listed in ``Solution.hits``.
    """
    y = np.asarray(y0, dtype=float).copy()
    s = float(s0)
    if not s_end > s:
        return Solution([s], [y], "done")
    k1 = f(s, y)
    if not np.all(np.isfinite(k1)):
        return Solution([s], [y], "step_failure", message="non-finite field at start")
    h = first_step or _initial_step(f, s, y, k1, 1.0, rtol, atol, max_step)
    g_old = [ev.g(s, y) for ev in events]
    out_s, out_y = [s], [y.copy()]
    hits: list[tuple[str, float, np.ndarray]] = []
    facold = 1e-4
    reject = False
    nsteps = 0

    while True:
        if nsteps >= max_steps:
            return Solution(out_s, out_y, "max_steps", hits=hits, message="step budget exhausted")
        last = False
        if s + 1.01 * h >= s_end:
            h = s_end - s
            last = True
        if h <= 10.0 * np.finfo(float).eps * max(1.0, abs(s)):
            return Solution(out_s, out_y, "step_failure", hits=hits,
                            message=f"step size underflow at s={s:.17g}")
        nsteps += 1
        k2 = f(s + C2 * h, y + h * A21 * k1)
        k3 = f(s + C3 * h, y + h * (A31 * k1 + A32 * k2))
        k4 = f(s + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(s + C5 * h, y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(s + h, y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        y1 = y + h * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6)
        k7 = f(s + h, y1)
        err_vec = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y1))
        err = math.sqrt(np.mean((err_vec / sc) ** 2))
        if not math.isfinite(err):
            h *= 0.1
            reject = True
            continue

        fac11 = err**EXPO1 if err > 0.0 else 0.0
        fac = fac11 / facold**BETA
        fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
        h_new = h / fac
        if err > 1.0:
            h = h / min(1.0 / FAC_MIN, fac11 / SAFE)
            reject = True
            continue

        facold = max(err, 1e-4)
        s1 = s + h
        dense = None
        stop_at, stop_name = None, None
        g_new = []
        for i, ev in enumerate(events):
            g1 = ev.g(s1, y1)
            g_new.append(g1)
            if _fires(g_old[i], g1, ev.direction):
                dense = dense or _Dense(s, h, y, y1, k1, k3, k4, k5, k6, k7)
                sr = _bisect(ev, dense, s, s1, g_old[i])
                if ev.terminal:
                    if stop_at is None or sr < stop_at:
                        stop_at, stop_name = sr, ev.name
                else:
                    hits.append((ev.name, sr, dense(sr)))
        if stop_at is not None:
            hits[:] = [hh for hh in hits if hh[1] <= stop_at]
            ys = y1 if stop_at == s1 else dense(stop_at)
            out_s.append(stop_at)
            out_y.append(ys)
            return Solution(out_s, out_y, "event", event=stop_name, hits=hits)
        g_old = g_new

        k1 = k7
        y = y1
        s = s1
        out_s.append(s)
        out_y.append(y.copy())
        if not np.all(np.isfinite(k1)):
            return Solution(out_s, out_y, "step_failure", hits=hits,
                            message=f"non-finite field at s={s:.17g}")
        if last:
            return Solution(out_s, out_y, "done", hits=hits)
        h_new = min(h_new, max_step)
        if reject:
            h_new = min(h_new, h)
            reject = False
        h = h_new
