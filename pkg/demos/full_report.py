"""
A full report for the L-shaped domain
=====================================

``analyze`` runs every module on one domain and collects each inequality
as a check carrying both sides and its tolerance. ``write_outputs``
saves the JSON report, CSV fields and an SVG picture.
"""

import sys
import tempfile
from pathlib import Path

from cheegerflow import geometry
from cheegerflow.report import analyze, write_outputs

spec = geometry.DomainSpec.from_dict({"kind": "l_shape", "w": 2, "h": 2, "notch": 1})
keep = {}
report = analyze(spec, resolution=64, samples=16, keep=keep)

print(f"h in [{report.cheeger['h_lower']:.4f}, {report.cheeger['h_upper']:.4f}]")
print(f"lambda = {report.spectral['lambda']:.4f}")
for name, c in report.checks.items():
    print(f"  {name:24s} {c.lhs:10.4f} {c.relation} {c.rhs:10.4f}  {'ok' if c.holds else 'FAIL'}")

###############################################################################
# Files go to a directory of your choice; pass one on the command line to
# keep them.

out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp())
for path in write_outputs(report, keep, out):
    print("wrote", path)
