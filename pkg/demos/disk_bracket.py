"""
Bracketing the Cheeger constant of the disk
===========================================

The unit disk is its own Cheeger set, so its constant is |dD|/|D| = 2.
A feasible flow with uniform production h gives a lower bound and the
minimum cut at the first infeasible h gives a subset whose quotient is
an upper bound.
"""

import math

from cheegerflow import geometry
from cheegerflow.cheeger import cheeger_constant
from cheegerflow.distance_field import polygon_inradius, reduced_inradius

spec = geometry.DomainSpec.from_dict({"kind": "disk", "r": 1.0, "resolution": 96})
g = geometry.rasterize(spec)
print(f"grid {g.dims}, {g.n_cells} cells, dx = {g.cell_size:.4f}")

###############################################################################
# Bisection on the production rate. Each step is one max-flow solve.

res = cheeger_constant(g, tol_h=0.01)
print(f"h_lower = {res.h_lower:.4f}   h_upper = {res.h_upper:.4f}   ({res.iterations} solves)")

###############################################################################
# The flow certificate is a vector field with |V| <= 1 and block
# divergence h_lower. For the disk it should look like V(x) = x.

rep = res.certificate_report
print(f"certificate: max |V| = {rep.max_speed:.3f}, min div = {rep.min_div:.3f}")

###############################################################################
# The reduced inradius gives h >= 1/rho~, with equality on the disk.

rho = polygon_inradius(g.polygon)
rt = reduced_inradius(rho, geometry.area(g.polygon))
print(f"1/rho~ = {1 / rt:.4f}; ratio h_lower * rho~ = {res.h_lower * rt:.3f}")

###############################################################################
# Scaling: a disk of radius r has h = 2/r.

for r in (0.5, 2.0):
    gr = geometry.rasterize(geometry.DomainSpec.from_dict({"kind": "disk", "r": r, "resolution": 64}))
    rr = cheeger_constant(gr)
    print(f"r = {r}: bracket [{rr.h_lower:.3f}, {rr.h_upper:.3f}], exact {2 / r:.3f}")

assert res.h_lower <= 2 + 0.1 and math.isfinite(res.h_upper)
