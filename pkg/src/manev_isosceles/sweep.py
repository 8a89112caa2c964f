"""Resumable parameter sweeps over grids of C, h, masses and coefficients.

Plan file (JSON)::

    {
      "params": {"G": 1, "M": 10, "m": 1, "gamma0": 1, "gamma": 3},
      "h": -1.0,
      "C": 0.0,
      "axes": [{"name": "C", "start": 0, "stop": 70, "num": 141}],
      "analyses": ["classify", "equilibria", "spectra", "homographic"],
      "out": "results.csv",
      "workers": 4
    }

Every key except ``axes`` is optional. An axis may give ``values`` instead
of ``start``/``stop``/``num``. The grid is the Cartesian product of the axes
with the last axis varying fastest; each point is keyed by its flat index.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from io import StringIO
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import homographic, manifold
from .errors import IoFailure, ManevError
from .formatting import fmt, fmt_list
from .params import P0, PARAM_KEYS, validate

FORMAT_VERSION = 1
AXIS_NAMES = ("C", "h", *PARAM_KEYS)
ANALYSES = ("classify", "equilibria", "spectra", "homographic")

COLUMNS = (
    "index", "G", "M", "m", "gamma0", "gamma", "h", "C", "status", "error",
    # classify
    "topology", "threshold_lower", "threshold_upper",
    # equilibria
    "n_interior", "has_P", "has_E", "e_theta0", "e_v0",
    # spectra (numeric; P+ and E2+ represent their symmetric families)
    "spec_P_plus", "spec_E2_plus", "lambda1_match", "spectra_max_deviation",
    # homographic
    "homographic_class", "S_r", "window_exists", "period_sigma", "period_t",
)


@dataclass(frozen=True)
class Axis:
    name: str
    values: tuple[float, ...]


@dataclass(frozen=True)
class SweepPlan:
    base: dict[str, float]
    h: float = -1.0
    C: float = 0.0
    axes: tuple[Axis, ...] = ()
    analyses: tuple[str, ...] = ("classify", "equilibria")
    out: str | None = None
    workers: int | None = None
    source: dict = field(default_factory=dict, compare=False)

    @property
    def size(self) -> int:
        return math.prod(len(a.values) for a in self.axes)

    def fingerprint(self) -> str:
        """Digest of everything that determines the table contents."""
        key = {"base": self.base, "h": self.h, "C": self.C,
               "axes": [[a.name, list(a.values)] for a in self.axes],
               "analyses": list(self.analyses)}
        return hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:16]

    def point(self, index: int) -> dict[str, float]:
        values = {**self.base, "h": self.h, "C": self.C}
        if self.axes:
            pos = np.unravel_index(index, [len(a.values) for a in self.axes])
            for axis, j in zip(self.axes, pos):
                values[axis.name] = axis.values[int(j)]
        return values


def _finite(x: Any, what: str) -> float:
    try:
        x = float(x)
    except (TypeError, ValueError):
        raise ManevError(f"{what} must be a number, got {x!r}") from None
    if not math.isfinite(x):
        raise ManevError(f"{what} must be finite, got {x}")
    return x


def _axis(spec: dict) -> Axis:
    name = spec.get("name")
    if name not in AXIS_NAMES:
        raise ManevError(f"axis name must be one of {AXIS_NAMES}, got {name!r}")
    if "values" in spec:
        vals = tuple(_finite(x, f"axis {name} value") for x in spec["values"])
    else:
        try:
            num = int(spec["num"])
            start = _finite(spec["start"], f"axis {name} start")
            stop = _finite(spec["stop"], f"axis {name} stop")
        except KeyError as exc:
            raise ManevError(f"axis {name} needs start, stop and num (or values)") from exc
        if num < 1:
            raise ManevError(f"axis {name}: num must be >= 1")
        vals = tuple(float(x) for x in np.linspace(start, stop, num))
    if not vals:
        raise ManevError(f"axis {name} is empty")
    return Axis(name, vals)


def plan_from_dict(data: dict, defaults: dict[str, float] | None = None) -> SweepPlan:
    """Build a plan; ``defaults`` (P0 if omitted) fill parameters the plan leaves out."""
    if not isinstance(data, dict):
        raise ManevError("sweep plan must be a JSON object")
    base = dict(defaults or P0.as_dict())
    params = data.get("params", {})
    if "mu" in params:
        raise ManevError("mu is derived from M and m and cannot be configured")
    for k, x in params.items():
        if k not in PARAM_KEYS:
            raise ManevError(f"unknown parameter {k!r}")
        base[k] = _finite(x, k)
    axes = tuple(_axis(a) for a in data.get("axes", []))
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        raise ManevError("axis names must be distinct")
    analyses = tuple(data.get("analyses", ("classify", "equilibria")))
    bad = [a for a in analyses if a not in ANALYSES]
    if bad:
        raise ManevError(f"unknown analyses {bad}; choose from {ANALYSES}")
    workers = data.get("workers")
    if workers is not None and int(workers) < 1:
        raise ManevError("workers must be >= 1")
    return SweepPlan(base=base, h=_finite(data.get("h", -1.0), "h"), C=_finite(data.get("C", 0.0), "C"),
                     axes=axes, analyses=analyses, out=data.get("out"),
                     workers=None if workers is None else int(workers), source=data)


def load_plan(path: str | os.PathLike, defaults: dict[str, float] | None = None) -> SweepPlan:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read plan {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ManevError(f"plan {path} is not valid JSON: {exc}") from exc
    return plan_from_dict(data, defaults)


# --- per-point evaluation ---------------------------------------------------------

def evaluate_point(values: dict[str, float], analyses: tuple[str, ...]) -> dict[str, str]:
    """One output record; domain errors are captured in the ``error`` column."""
    row: dict[str, Any] = {k: values[k] for k in ("G", "M", "m", "gamma0", "gamma", "h", "C")}
    try:
        p = validate({k: values[k] for k in PARAM_KEYS})
    except ManevError as exc:
        row.update(status="skipped", error=str(exc))
        return {k: fmt(row.get(k)) for k in COLUMNS[1:]}
    h, C = values["h"], values["C"]
    errors = []
    for name in analyses:
        try:
            row.update(ANALYZERS[name](p, h, C))
        except ManevError as exc:
            errors.append(f"{name}: {exc}")
    row["status"] = "error" if errors else "ok"
    row["error"] = " | ".join(errors) or None
    return {k: fmt(row.get(k)) for k in COLUMNS[1:]}


def _classify(p, h, C):
    rep = manifold.classify(p, C)
    return {"topology": rep.cls, "threshold_lower": rep.lower, "threshold_upper": rep.upper}


def _equilibria(p, h, C):
    eqs = manifold.equilibria(p, C)
    has_p, has_e = manifold.p_windows(p, C)
    out = {"n_interior": sum(e.location is not None for e in eqs), "has_P": has_p, "has_E": has_e}
    if has_e:
        out.update(e_theta0=manifold.e_point_angle(p, C), e_v0=manifold.e_point_speed(p, C))
    return out


def _spectra(p, h, C):
    out: dict[str, Any] = {}
    devs = []
    for eq in manifold.equilibria(p, C):
        if eq.kind not in (manifold.EquilibriumKind.P_PLUS, manifold.EquilibriumKind.E2_PLUS):
            continue
        rep = manifold.restricted_spectrum(p, eq, h, C)
        devs.append(rep.max_deviation)
        if eq.kind is manifold.EquilibriumKind.P_PLUS:
            out["spec_P_plus"] = fmt_list(rep.spectrum_numeric)
            out["lambda1_match"] = rep.lambda1_match
        else:
            out["spec_E2_plus"] = fmt_list(rep.spectrum_numeric)
    if devs:
        out["spectra_max_deviation"] = max(devs)
    return out


def _homographic(p, h, C):
    rep = homographic.analyze(p, h, C, verify=False)
    return {"homographic_class": rep.classification, "S_r": rep.S_r,
            "window_exists": rep.window_exists if math.isfinite(rep.window_exists) else None,
            "period_sigma": rep.period_sigma, "period_t": rep.period_t}


ANALYZERS: dict[str, Callable[..., dict]] = {
    "classify": _classify, "equilibria": _equilibria,
    "spectra": _spectra, "homographic": _homographic,
}


def _work(args):
    index, values, analyses = args
    return index, evaluate_point(values, analyses)


# --- persistence ------------------------------------------------------------------

def _header(plan: SweepPlan) -> str:
    return f"# manev-sweep format={FORMAT_VERSION} plan={plan.fingerprint()} points={plan.size}\n"


def _line(index: int, rec: dict[str, str]) -> str:
    # csv quoting keeps error messages with commas intact
    buf = StringIO()
    csv.writer(buf, lineterminator="\n").writerow([str(index), *(rec[k] for k in COLUMNS[1:])])
    return buf.getvalue()


def read_results(path: str | os.PathLike, plan: SweepPlan) -> dict[int, dict[str, str]]:
    """Completed records of an earlier (possibly interrupted) run of ``plan``."""
    path = Path(path)
    if not path.exists():
        return {}
    try:
        text = path.read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines(keepends=True)
    if not lines:
        return {}
    if lines[0] != _header(plan):
        raise ManevError(f"{path} holds results of a different plan or format; choose another --out")
    done = {}
    for row in csv.reader(ln for ln in lines[2:] if ln.endswith("\n")):
        if len(row) != len(COLUMNS) or not row[0].isdigit():
            continue
        idx = int(row[0])
        if idx < plan.size:
            done[idx] = dict(zip(COLUMNS[1:], row[1:]))
    return done


def run_sweep(plan: SweepPlan, out: str | os.PathLike | None = None, workers: int | None = None,
              progress: Callable[[int, int], None] | None = None) -> list[dict[str, str]]:
    """Evaluate every grid point and write the sorted table to ``out``.

    Records are appended as they finish, so an interrupted run resumes by
    skipping the indices already present. On completion the file is
    rewritten in index order, which makes the output independent of worker
    scheduling.

    Raises ``IoFailure`` when the output cannot be written.
    """
    out = out or plan.out
    workers = workers or plan.workers or os.cpu_count() or 1
    done = read_results(out, plan) if out else {}
    todo = [(i, plan.point(i), plan.analyses) for i in range(plan.size) if i not in done]

    fh = None
    if out:
        try:
            fresh = not Path(out).exists() or Path(out).stat().st_size == 0
            fh = open(out, "a")
            if fresh:
                fh.write(_header(plan) + ",".join(COLUMNS) + "\n")
                fh.flush()
        except OSError as exc:
            raise IoFailure(f"cannot write {out}: {exc}") from exc

    def store(index, rec):
        done[index] = rec
        if fh is not None:
            fh.write(_line(index, rec))
            fh.flush()
        if progress:
            progress(len(done), plan.size)

    try:
        if workers == 1 or len(todo) <= 1:
            for job in todo:
                store(*_work(job))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                for fut in as_completed([pool.submit(_work, job) for job in todo]):
                    store(*fut.result())
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc
    finally:
        if fh is not None:
            fh.close()

    if out:
        write_table(out, plan, done)
    return [{"index": str(i), **done[i]} for i in range(plan.size)]


def table_text(plan: SweepPlan, records: dict[int, dict[str, str]]) -> str:
    body = "".join(_line(i, records[i]) for i in sorted(records))
    return _header(plan) + ",".join(COLUMNS) + "\n" + body


def write_table(out: str | os.PathLike, plan: SweepPlan, records: dict[int, dict[str, str]]) -> None:
    tmp = Path(f"{out}.tmp")
    try:
        tmp.write_text(table_text(plan, records))
        os.replace(tmp, out)
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc
