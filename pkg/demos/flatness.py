"""When is the lifted metric flat?

A flat statistical connection is not enough: the diagonal example with
K(e_i, e_i) = -e_i / x_i has parallel K and a flat lift, while the Gaussian
Fisher structure at alpha = 1 is also Hessian but K is not parallel and the
lift is curved.  The round sphere is the curved control.
"""

import numpy as np

from statbundle import checks as ck
from statbundle import gallery as ga
from statbundle import sasaki as sa
from statbundle import statmanifold as sm
from statbundle import tmoracle as tm

for entry in (ga.paper_hessian(3), ga.gaussian_fisher(1.0), ga.round_sphere2()):
    s = entry.structure
    tr = ck.traits(s, entry.known_flags, s.sample(8, 0))
    pts = ck.tangent_points(s, 6, 1)
    closed = max(sa.curvature_norm(s, tp) for tp in pts)
    oracle = max(float(np.linalg.norm(tm.adapted_curvature(s, tp.z))) for tp in pts)
    nK = max(float(np.linalg.norm(sm.bundle(s, tp.x).nablaK_t)) for tp in pts)
    print(f"{s.name:<24} hessian={tr.hessian!s:<5} |nabla K|={nK:.1e}  "
          f"max|R~| closed {closed:.2e}  oracle {oracle:.2e}")
