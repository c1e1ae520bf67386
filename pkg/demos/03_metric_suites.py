"""Combine metrics with the Weighted Product Model and compare suites to single metrics.

Run after ``02_metric_strength.py``: ``python demos/03_metric_suites.py [output_dir]``.
"""
import sys
from pathlib import Path

from graphprivacy import PRESETS, SuiteSpec, search_suites, suite_monotonic_fraction
from graphprivacy.harness import ResultStore, _collect, scenario_matrices, strength_table, top_monotonic

store = ResultStore(Path(sys.argv[1] if len(sys.argv) > 1 else "demo_results") / "store")
data, meta, nodes = _collect(store)

# One matrix per scenario: rows are adversary strengths, columns the 26 metric means.
matrices = scenario_matrices(data)

# A suite counts a scenario as monotonic when its WPM score strictly drops at
# every step up in adversary strength.
for name, suite in PRESETS.items():
    frac, pct = suite_monotonic_fraction(matrices, suite)
    print(f"{name}: {pct:5.1f}% monotonic scenarios, {frac:.3f} of adjacent pairs  ({'+'.join(suite.metrics)})")

single = {m: suite_monotonic_fraction(matrices, SuiteSpec.equal([m])) for m in matrices[0].metrics}
best = max(single, key=lambda m: single[m][::-1])
print(f"\nbest single metric: {best} at {single[best][1]:.1f}%")

# Exhaustive search over equal-weight subsets of the most monotonic metrics.
top = [m for m, _ in top_monotonic(strength_table(data, meta, nodes), 7)]
for suite, frac, pct in search_suites(top, matrices)[:5]:
    print(f"{pct:5.1f}%  {frac:.3f}  {suite.label()}")
