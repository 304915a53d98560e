"""Why the pure shift family admits no envelope: the blow-up scan.

For shifts with drift uncertainty [-1, 1] the one-step supremum spreads
the capped pole f_eps = min(eps^(-1/(2p)), |x|^(-1/(2p))) on [-1, 1] into a
plateau of width about 2t, so its L^p norm grows like eps^(-1/(2p)) as the
cap is removed -- the supremum leaves L^p and no upper-bound operator can
exist. A bounded control profile stays put.
"""

from nisioenv import LambdaInterval, PNorm, PureShift, bump, counterexample_scan, lp_norm, make_grid, step_J

p, t = 2.0, 0.5
grid = make_grid(-3.0, 3.0, 2400001)
norm = PNorm(p)

print(f"uncertain shift, window h = t = {t}, p = {p}")
print(f"grid spacing dx = {grid.dx:.2e} (resolves eps >= {4 * grid.dx:.0e})\n")

epsilons = [1e-2, 1e-3, 1e-4, 1e-5]
table = counterexample_scan(grid, p, t, epsilons)
print("      eps     ||J_t f_eps||_2    ratio (theory 10^(1/4) = 1.778)")
prev = None
for eps, val in table:
    ratio = "" if prev is None else f"{val / prev:.3f}"
    print(f"  {eps:8.0e}   {val:14.4f}    {ratio}")
    prev = val

family = PureShift(LambdaInterval(-1.0, 1.0))
control = bump(grid, radius=0.5)
ctrl = lp_norm(step_J(family, t, control), norm)
print(f"\nbounded control row: ||J_t bump||_2 = {ctrl:.6f} (independent of eps)")
