"""The counterexample family: the margin at zero frequency shrinks like 1/N.

Every member is internally stable (no kernel on the imaginary axis), but the
uniform bound degrades with N, which is what classify() picks up.
"""

from blockstab.scenarios import counterexample_scenario
from blockstab.stability import SeriesPoint, classify, default_lambda_grid, resolvent_scan, spectral_gap

pts = []
for N in (8, 16, 32, 64, 128):
    scn = counterexample_scenario(N)
    A = scn.A.dense()
    sc = resolvent_scan(A, default_lambda_grid())
    pts.append(SeriesPoint(N, sc.margin_at(0.0), spectral_gap(A), sc.interior_margin(),
                           all(k == 0 for k in sc.kernel_dims)))
    print(f"N={N:4d}  margin(0)={sc.margin_at(0.0):.6f}  1/N={1 / N:.6f}  gap={pts[-1].spectral_gap:.6f}")

cl = classify(pts)
print(f"{cl.label}: margin exponent {cl.margin_exponent:.3f}")
