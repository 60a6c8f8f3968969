"""
Divergence certificates and where they break
============================================

A vector field with |V| <= 1 and div V >= h on a domain proves that its
Cheeger constant is at least h. On the disk V(x) = x does this for h = 2.
The field built from the distance function of the square satisfies the
bound only on average; pointwise it fails near the medial axis.
"""

from cheegerflow import geometry
from cheegerflow.cheeger import certify_lower_bound
from cheegerflow.distance_field import (
    VectorField,
    divergence_integral,
    grid_distance,
    makai_field,
    reduced_inradius,
)

disk = geometry.rasterize(geometry.DomainSpec.from_dict({"kind": "disk", "r": 1.0, "resolution": 96}))
V = VectorField.from_function(disk, lambda x, y: (x, y))

for h in (2.0, 2.2):
    rep = certify_lower_bound(V, h_claimed=h)
    print(f"V = x on the disk, h = {h}: {rep.message()}")

###############################################################################
# The square: rho = 1/2 and rho~ = rho / (1 + pi rho^2 / |S|).

sq = geometry.rasterize(geometry.DomainSpec.from_dict({"kind": "rectangle", "w": 1, "h": 1, "resolution": 96}))
rt = reduced_inradius(0.5, 1.0)
W = makai_field(grid_distance(sq), 0.5)
rep = certify_lower_bound(W, h_claimed=1 / rt)
print(f"square, h = 1/rho~ = {1 / rt:.4f}: {rep.message()}")

###############################################################################
# The integral version still holds: the total divergence beats |S| / rho~.

total = divergence_integral(W)
print(f"integral of div V = {total:.4f} >= |S|/rho~ = {1 / rt:.4f}")
