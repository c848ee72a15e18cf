"""Desk-scale rank-dependence search: how many rows does rank r need?

For each rank, binary search finds the smallest m whose mean normalized
rowspace error lands in 0.1 +- 0.02; the log-log slope of m* against r
near 2 is the experimental signature of the r^2 sample-complexity law.

Full-protocol parameters (d=200, 20 runs per probe) take tens of minutes;
this demo shrinks the instance to run in about a minute.
"""

from onesided import RankDepSpec, SolverConfig, rank_dependence

spec = RankDepSpec(
    r_list=(2, 3, 4),
    d=30,
    k=2,
    runs_per_probe=5,
    m_max=400_000,
    base_seed=0,
    solver=SolverConfig(rank=2, steps=4000),
)

results, slope = rank_dependence(spec)
print(f"{'r':>3} {'m*':>10} {'accepted':>9} {'probes':>7}")
for res in results:
    print(f"{res.r:>3} {res.m_star:>10,} {str(res.accepted):>9} {res.probes:>7}")
if slope is not None:
    print(f"\nlog-log slope of m* vs r: {slope:.2f}  (r^2 law predicts 2)")
