"""A resumable 141-point sweep in C, written to sweep_results.csv next to this script."""

from collections import Counter
from pathlib import Path

from manev_isosceles import sweep

plan = sweep.plan_from_dict({
    "axes": [{"name": "C", "start": 0, "stop": 70, "num": 141}],
    "analyses": ["classify", "equilibria", "homographic"],
    "workers": 4,
})
out = Path(__file__).with_name("sweep_results.csv")
records = sweep.run_sweep(plan, out)
print(f"plan {plan.fingerprint()}: {len(records)} points -> {out.name}")
print(Counter(r["topology"] for r in records))
prev = None
for r in records:
    if r["topology"] != prev:
        print(f"  from C={r['C']}: {r['topology']}")
        prev = r["topology"]
