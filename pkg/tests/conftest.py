import functools
from pathlib import Path

import numpy as np
import pytest

from cheegerflow import geometry
from cheegerflow.cheeger import cheeger_constant
from cheegerflow.spectral import assemble, smallest_eigenvalue

CORPUS_DIR = Path(__file__).resolve().parents[1] / "src" / "cheegerflow" / "data" / "corpus"
NETWORK_DIR = CORPUS_DIR.parent / "networks"

CORPUS = sorted(p.stem for p in CORPUS_DIR.glob("*.json"))
CONVEX = ["disk", "ngon_256", "rect_2x1", "rect_4x1", "rect_8x1", "square"]


def load_spec(name, resolution=None):
    spec = geometry.DomainSpec.load(CORPUS_DIR / f"{name}.json")
    return spec.with_resolution(resolution) if resolution else spec


@functools.cache
def grid(name, resolution=None, alignment="cell"):
    return geometry.rasterize(load_spec(name, resolution), alignment)


@functools.cache
def cheeger(name, resolution=None, stencil="8"):
    return cheeger_constant(grid(name, resolution), stencil)


@functools.cache
def eigen(name, resolution=None):
    return smallest_eigenvalue(assemble(grid(name, resolution, "node")))


def spec_grid(resolution=128, alignment="cell", **kw):
    return geometry.rasterize(geometry.DomainSpec.from_dict({**kw, "resolution": resolution}), alignment)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance verdicts, printed once at the end of the session
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
