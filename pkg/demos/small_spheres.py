"""Shrinking tangent sphere bundles on a bumpy torus.

Sphere points of radius lambda are swept down a halving grid.  Mean curvature
grows like 1/lambda, and the intrinsic scalar curvature like 1/lambda^2, while
the gaps to the leading round-fiber terms stay bounded.
"""

from statbundle import gallery as ga
from statbundle import spherebundle as sb

n = 3
s = ga.torus_bump(n).structure
points = sb.sample_sphere_points(s, 1.0, 2, 3, seed=0)
rows = sb.radius_sweep(s, points, sb.halving_grid(10), workers=4)

print(f"{'lambda':>10}{'min |H|':>12}{'max gap |h|^2':>16}{'max gap H^2-|h|^2':>20}{'min rho~':>14}")
for lam in sb.halving_grid(10):
    sel = [r for r in rows if r.lam == lam]
    d = [r.r_eff ** 2 + r.k_norm_sq for r in sel]
    gap_h = max(abs(r.norm_h_sq - (n - 1) / dd) for r, dd in zip(sel, d))
    gap_g = max(abs(r.H2_minus_h2 - (n - 1) * (n - 2) / dd) for r, dd in zip(sel, d))
    print(f"{lam:>10.6f}{min(abs(r.H) for r in sel):>12.2f}{gap_h:>16.4f}{gap_g:>20.4f}"
          f"{min(r.rho_tilde for r in sel):>14.4g}")
