"""Closed-form curvature of the lifted metric next to the brute-force chart oracle.

For each gallery structure we pick a few tangent vectors of growing length and
print the relative Frobenius error between the adapted-frame curvature from
closed forms and the one obtained by differentiating the 2n x 2n metric on TM.
Then we walk out along a fiber of the round sphere and watch the horizontal
sectional curvature fall without bound.
"""

import numpy as np

from statbundle import checks as ck
from statbundle import gallery as ga
from statbundle import sasaki as sa
from statbundle import statmanifold as sm
from statbundle.sasaki import H, TangentPoint

print("relative error, closed form vs chart oracle")
print(f"{'structure':<28}{'|xi|':>6}{'curvature':>12}{'ricci':>12}{'scalar':>12}")
for entry in ga.default_entries(3) + [ga.gaussian_fisher(0.5)]:
    s = entry.structure
    for tp in ck.tangent_points(s, 4, 0):
        norm = np.sqrt(sm.bundle(s, tp.x).norm_sq(tp.xi))
        print(f"{s.name:<28}{norm:>6.1f}{ck.sasaki_curvature_oracle(s, tp):>12.1e}"
              f"{ck.sasaki_ricci_oracle(s, tp):>12.1e}{ck.sasaki_scalar_oracle(s, tp):>12.1e}")

s = ga.round_sphere2().structure
x = np.array([0.3, -0.2])
X, Y = sm.bundle(s, x).frame.T
print("\nround sphere, xi = t X: sectional curvature of the horizontal plane, scalar curvature")
for t in (0, 1, 2, 4, 8, 16):
    tp = TangentPoint(x, t * X)
    print(f"  t={t:>2}  k={sa.sectional_tg(s, tp, (H, X), (H, Y)):>10.3f}"
          f"  rho={sa.scalar_tg(s, tp):>10.3f}")
