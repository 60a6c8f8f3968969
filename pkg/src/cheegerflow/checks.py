"""Inequality verdicts that carry their operands and slack."""

from __future__ import annotations

from dataclasses import asdict, dataclass

REL_TOL = 0.05
CELLS_TOL = 10.0


@dataclass(frozen=True)
class InequalityCheck:
    """Verdict for ``lhs >= rhs`` (or ``lhs <= rhs``) up to slack ``tol``."""

    name: str
    lhs: float
    rhs: float
    tol: float
    relation: str = ">="

    @property
    def holds(self) -> bool:
        if self.relation == ">=":
            return self.lhs >= self.rhs - self.tol
        return self.lhs <= self.rhs + self.tol

    @property
    def margin(self) -> float:
        d = self.lhs - self.rhs
        return d if self.relation == ">=" else -d

    @property
    def relative_slack(self) -> float:
        return self.margin / abs(self.rhs) if self.rhs else float("inf")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["holds"] = self.holds
        d["margin"] = self.margin
        return d


def grid_tolerance(magnitude: float, resolution: int | None) -> float:
    """Slack for grid-based inequalities.

    The larger of 5% of the magnitude and ten cells relative to the
    bounding box, i.e. first-order rasterization error.
    """
    rel = REL_TOL
    if resolution:
        rel = max(rel, CELLS_TOL / resolution)
    return rel * abs(magnitude)
