"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed at the end.

Run alone with ``pytest tests/test_acceptance.py -v`` (or ``python3 tests/test_acceptance.py``).
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest
from scipy.optimize import brentq

from manev_isosceles import coords, homographic, manifold, sweep
from manev_isosceles import potentials as pot
from manev_isosceles.coords import CylState
from manev_isosceles.dynamics import Termination, integrate, rhs_regularized
from manev_isosceles.errors import ManevError
from manev_isosceles.integrator import Event
from manev_isosceles.manifold import EquilibriumKind as K
from manev_isosceles.params import P0

acceptance = pytest.mark.acceptance
HALF = math.pi / 2


@acceptance("criterion 1: closed-form critical angles and analytic derivatives")
def test_criterion_1():
    cp = pot.critical_points(P0)
    for df, closed in ((pot.dV, cp.theta_v), (pot.dW, cp.theta_w)):
        grid = np.linspace(1e-6, HALF - 1e-6, 4001)
        vals = df(P0, grid)
        brackets = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        assert len(brackets) == 1
        i = brackets[0]
        root = brentq(lambda t: float(df(P0, t)), grid[i], grid[i + 1], xtol=1e-15)
        assert abs(root - closed) <= 1e-8
    th = np.linspace(-HALF + 0.05, HALF - 0.05, 1000)
    d = 1e-6
    for name in ("V", "W", "U"):
        f, df = getattr(pot, name), getattr(pot, "d" + name)
        fd = (f(P0, th + d) - f(P0, th - d)) / (2 * d)
        an = df(P0, th)
        assert np.all(np.abs(an - fd) <= 1e-6 * np.maximum(1.0, np.abs(an)))


@acceptance("criterion 2: reduced energy agrees with the McGehee energy residual")
def test_criterion_2():
    rng = np.random.default_rng(2)
    for _ in range(100):
        s = CylState(rng.uniform(0.2, 5), rng.uniform(-3, 3), rng.uniform(-3, 3),
                     rng.uniform(-3, 3), rng.uniform(-5, 5))
        m = coords.to_mcgehee(P0, s)
        h = coords.reduced_energy(P0, s)
        F = coords.energy_residual(P0, m, h, s.C)
        assert abs(F) <= 1e-10 * max(1.0, coords.residual_scale(P0, m, h, s.C))


@acceptance("criterion 3: energy conserved by the regularized flow; v constant on the manifold")
def test_criterion_3():
    rng = np.random.default_rng(3)
    h = -1.0
    n = 0
    while n < 20:
        C = rng.uniform(0, 55)
        r, v, th = rng.uniform(0.01, 3.0), rng.uniform(-20, 20), rng.uniform(-0.5, 0.5)
        try:
            w = coords.solve_w(P0, r, v, th, h, C, rng.choice([-1.0, 1.0]))
        except ManevError:
            continue
        n += 1
        tr = integrate(P0, "regularized", [r, v, th, w], h, C, 5.0)
        assert tr.termination in (Termination.MAX_TIME, Termination.DOUBLE_COLLISION)
        assert tr.max_residual <= 1e-8 * tr.residual_scale
    for C, v0 in ((0.0, 10.0), (20.0, -5.0), (40.0, 30.0)):
        w = coords.solve_w(P0, 0.0, v0, 0.1, h, C)
        tr = integrate(P0, "manifold", [v0, 0.1, w], h, C, 20.0)
        assert np.all(np.abs(tr.col("v") - v0) <= 1e-12)


@acceptance("criterion 4: equilibrium census and vanishing field at every equilibrium")
def test_criterion_4():
    expected = {0: 6, 20: 6, 31: 6, 40: 2, 58: 2, 60: 0}
    for C, n in expected.items():
        eqs = manifold.equilibria(P0, C)
        interior = [e for e in eqs if e.location is not None]
        assert len(interior) == n
        if n == 2:
            assert {e.kind for e in interior} == {K.P_PLUS, K.P_MINUS}
        for e in interior:
            assert np.all(np.abs(rhs_regularized(P0, e.location, -1.0, C)[:4]) <= 1e-9)


@acceptance("criterion 5a: P-point spectra match closed forms; radial eigenvalue form identified")
def test_criterion_5_p_points():
    for kind, dims in ((K.P_PLUS, (1, 0, 2)), (K.P_MINUS, (0, 1, 2))):
        eq = next(e for e in manifold.equilibria(P0, 0.0) if e.kind is kind)
        rep = manifold.restricted_spectrum(P0, eq, -1.0, 0.0)
        assert np.max(np.abs(rep.spectrum_closed - rep.spectrum_numeric)) <= 1e-6
        # lambda_{2,3} from the closed form +-i sqrt(-2(GM^3(g0-16g) - C^2)/(GM^2(M g0 + 8 m g)))
        pair = math.sqrt(-2 * (1000 * (1 - 48)) / (100 * 34))
        assert sorted(np.abs(rep.spectrum_numeric.imag))[1:] == pytest.approx([pair, pair], abs=1e-6)
        # the two printed radial forms disagree; the report names the one the numerics confirm
        forms = rep.lambda1_forms
        assert abs(forms["jacobian"] - forms["simplified"]) > 1e-3
        assert rep.lambda1_match == "jacobian"
        assert abs(rep.lambda1_numeric - forms["jacobian"]) <= 1e-6
        assert rep.manifold_dims == dims


@acceptance("criterion 5b: E-point spectra match the printed closed forms (v0=9.06720, theta0=0.488347)")
def test_criterion_5_e_points():
    v0, th0 = 9.06720, 0.488347
    lam1 = v0 * math.cos(th0) ** 2 / math.sqrt(float(pot.U(P0, th0)))
    a = manifold.shape_coefficient_printed(P0, 0.0)
    closed_pair = 1j * math.sqrt(-a)
    failures = []
    for kind, sign in ((K.E1_PLUS, 1), (K.E1_MINUS, -1), (K.E2_PLUS, 1), (K.E2_MINUS, -1)):
        eq = next(e for e in manifold.equilibria(P0, 0.0) if e.kind is kind)
        rep = manifold.restricted_spectrum(P0, eq, -1.0, 0.0)
        closed = manifold.canonical_sort([sign * lam1, closed_pair, -closed_pair])
        dev = float(np.max(np.abs(closed - rep.spectrum_numeric)))
        want_dims = (1, 0, 2) if sign > 0 else (0, 1, 2)
        if dev > 1e-6 or rep.manifold_dims != want_dims:
            failures.append(f"{kind.value}: closed {np.round(closed, 6)} numeric "
                            f"{np.round(rep.spectrum_numeric, 6)} dims {rep.manifold_dims}")
    assert not failures, "; ".join(failures)


@acceptance("criterion 6: 141-point C sweep places transitions at both thresholds in order")
def test_criterion_6():
    plan = sweep.plan_from_dict({"axes": [{"name": "C", "start": 0, "stop": 70, "num": 141}],
                                 "analyses": ["classify"]})
    recs = sweep.run_sweep(plan, None, workers=1)
    Cs = [float(r["C"]) for r in recs]
    classes = [manifold.TopologyClass(r["topology"]) for r in recs]
    order = [manifold.TOPOLOGY_ORDER.index(c) for c in classes]
    assert order == sorted(order)
    cuts = [i for i in range(1, len(classes)) if classes[i] != classes[i - 1]]
    assert len(cuts) == 2
    for i, edge in zip(cuts, (math.sqrt(1000), math.sqrt(3400))):
        assert Cs[i - 1] < edge <= Cs[i]


@acceptance("criterion 7: wrap-around closed orbit at C=40; double-collision exit at C=20")
def test_criterion_7():
    th0 = 0.3
    w0 = coords.solve_w(P0, 0.0, 0.0, th0, -1.0, 40.0)
    ret = Event("return", lambda s, y: y[1] - th0, direction=+1)
    tr = integrate(P0, "manifold", [0.0, th0, w0], -1.0, 40.0, 100.0, events=[ret])
    assert tr.termination is Termination.EVENT
    assert math.hypot(tr.final[1] - th0, tr.final[2] - w0) <= 1e-6
    assert np.all(tr.col("v") == 0.0)
    w0 = coords.solve_w(P0, 0.0, 0.0, th0, -1.0, 20.0)
    tr = integrate(P0, "manifold", [0.0, th0, w0], -1.0, 20.0, 100.0, events=[ret])
    assert tr.termination is Termination.DOUBLE_COLLISION


@acceptance("criterion 8: homographic centre, bound, periodic closure and escape for h=+1")
def test_criterion_8():
    t0 = time.perf_counter()
    rep = homographic.analyze(P0, -1.0, 0.0, verify=False)
    assert abs(rep.S_r - 156.5248) <= 1e-4 and abs(rep.S_r - 70 * math.sqrt(5)) <= 1e-6
    assert abs(rep.window_exists - 228.9104) <= 1e-4
    rep = homographic.analyze(P0, -1.0, 100.0)
    assert rep.classification is homographic.HomographicClass.PERIODIC
    per = homographic.find_period(P0, -1.0, 100.0, rep.r_range[0])
    assert per.closure <= 1e-6

    rng = np.random.default_rng(8)
    h = 1.0
    for _ in range(10):
        C = rng.uniform(0.0, 150.0)
        lo, _ = homographic.admissible_range(P0, h, C)
        r = lo + rng.uniform(0.01, 50.0)
        sign = rng.choice([-1.0, 1.0])
        if sign < 0 and C <= math.sqrt(3400):
            # this branch falls into the collision manifold; its unbounded half is the past,
            # which the time-reversal (r, v) -> (r, -v) turns into a forward orbit
            sign = 1.0
        tr = homographic.orbit(P0, h, C, r, sign, sigma_max=1e4)
        assert tr.termination is Termination.ESCAPE
    assert time.perf_counter() - t0 <= 60.0


@acceptance("criterion 9: near-collision orbits with v<0 turn around (v>0, r increasing) within sigma 50")
def test_criterion_9():
    rng = np.random.default_rng(9)
    h, C = -1.0, 40.0
    v_top = math.sqrt(2 * pot.u_max(P0) - C * C)  # |v| of P+- bounds the compact component
    outcomes = []
    while len(outcomes) < 10:
        r = 10 ** rng.uniform(-4, -2)
        v = -rng.uniform(0.0, v_top)
        th = rng.uniform(-0.35, 0.35)
        try:
            w = coords.solve_w(P0, r, v, th, h, C, rng.choice([-1.0, 1.0]))
        except ManevError:
            continue
        tr = integrate(P0, "regularized", [r, v, th, w], h, C, 50.0)
        vs, rs = tr.col("v"), tr.col("r")
        turned = bool(np.any(vs > 0))
        grows = turned and rs[-1] > rs[int(np.argmax(vs > 0))]
        outcomes.append((r, v, turned and grows, vs[-1], rs[-1]))
    bad = [f"r0={r:.1e} v0={v:.2f}: v_end={ve:.3f} r_end={re:.1e}" for r, v, ok, ve, re in outcomes if not ok]
    assert not bad, f"{len(bad)}/10 orbits never turned: " + "; ".join(bad)


@acceptance("criterion 10: repeated CLI invocations write byte-identical files")
def test_criterion_10(tmp_path):
    plan = tmp_path / "plan.json"
    plan.write_text('{"axes": [{"name": "C", "start": 0, "stop": 70, "num": 8}],'
                    ' "analyses": ["classify", "equilibria", "spectra", "homographic"]}')
    commands = {
        "potentials": ["potentials", "--theta-grid", "101"],
        "section": ["section", "--v0", "10", "--C", "40", "-n", "200"],
        "integrate": ["integrate", "--field", "regularized", "--start", "1,0,0.3", "--solve-w",
                      "--h", "-1", "--C", "40", "--sigma-max", "2"],
        "equilibria": ["equilibria", "--C", "0", "--h", "-1"],
        "homographic": ["homographic", "--h", "-1", "--C", "100"],
        "sweep": ["sweep", "--config", str(plan), "--workers", "2"],
    }
    for name, args in commands.items():
        blobs = []
        for k in range(2):
            out = tmp_path / f"{name}{k}.out"
            extra = ["--out", str(out)]
            if name == "homographic":
                extra += ["--orbit-csv", str(tmp_path / f"orbit{k}.csv")]
            proc = subprocess.run([sys.executable, "-m", "manev_isosceles.cli", *args, *extra],
                                  capture_output=True, text=True)
            assert proc.returncode == 0, proc.stderr
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1], name
    assert (tmp_path / "orbit0.csv").read_bytes() == (tmp_path / "orbit1.csv").read_bytes()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
