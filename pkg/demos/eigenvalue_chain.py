"""
Eigenvalues against the Cheeger and Makai bounds
================================================

The first Dirichlet eigenvalue sits above h^2 / 4, and above 1 / (4 rho~^2)
for every simply connected domain. On convex domains h >= 1/rho~, so the
two bounds nearly agree; at this coarse resolution the discrete lower
bound for h can dip a fraction of a percent under 1/rho~.
"""

import math

from cheegerflow import geometry
from cheegerflow.cheeger import cheeger_constant
from cheegerflow.distance_field import polygon_inradius, reduced_inradius
from cheegerflow.spectral import assemble, smallest_eigenvalue

shapes = {
    "disk": {"kind": "disk", "r": 1.0},
    "square": {"kind": "rectangle", "w": 1, "h": 1},
    "rect 4x1": {"kind": "rectangle", "w": 4, "h": 1},
    "L-shape": {"kind": "l_shape", "w": 2, "h": 2, "notch": 1},
}

print(f"{'domain':10s} {'lambda':>9s} {'h^2/4':>9s} {'1/(4rt^2)':>10s}")
for name, d in shapes.items():
    spec = geometry.DomainSpec.from_dict({**d, "resolution": 64})
    # Dirichlet nodes on the walls for the eigenvalue, cells tiling the box for the flow
    lam = smallest_eigenvalue(assemble(geometry.rasterize(spec, "node"))).eigenvalue
    h = cheeger_constant(geometry.rasterize(spec)).h_lower
    p = spec.polygon()
    rt = reduced_inradius(polygon_inradius(p), geometry.area(p))
    print(f"{name:10s} {lam:9.4f} {h * h / 4:9.4f} {1 / (4 * rt * rt):10.4f}")

###############################################################################
# Exact values for comparison: 2 pi^2 for the square and the square of the
# first zero of J0 for the disk.

print(f"2 pi^2 = {2 * math.pi ** 2:.4f}, j01^2 = {2.404825557695773 ** 2:.4f}")
