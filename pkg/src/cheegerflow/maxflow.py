"""Capacitated networks, Dinic max flow, residual min cuts, DIMACS I/O."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numba
import numpy as np

from .errors import DomainError, InfeasibleFlowError, InvalidDomainError, NotMaxFlowError

__all__ = [
    "Network",
    "Flow",
    "Cut",
    "max_flow",
    "min_cut",
    "cut_capacity",
    "excess",
    "check_feasible",
    "verify_weak_duality",
    "uniform_source_network",
    "read_dimacs",
    "write_dimacs",
    "REL_TOL",
]

REL_TOL = 1e-9


def _frozen(a, dtype=None):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Network:
    """Directed network on nodes ``0..n-1``.

    Arcs are kept in input order; parallel arcs stay distinct and
    self-loops never carry flow. Integer-valued capacities are stored as
    ``int64`` and solved exactly.
    """

    n: int
    source: int
    sink: int
    tails: np.ndarray
    heads: np.ndarray
    caps: np.ndarray

    def __post_init__(self):
        tails = _frozen(self.tails, np.int64)
        heads = _frozen(self.heads, np.int64)
        caps = np.asarray(self.caps)
        if tails.shape != heads.shape or tails.shape != caps.shape or tails.ndim != 1:
            raise InvalidDomainError("tails, heads and caps must be equal-length vectors")
        if self.source == self.sink:
            raise InvalidDomainError("source and sink must differ")
        for v in (self.source, self.sink):
            if not 0 <= v < self.n:
                raise InvalidDomainError(f"terminal {v} out of range")
        if len(tails) and (tails.min() < 0 or heads.min() < 0 or max(tails.max(), heads.max()) >= self.n):
            raise InvalidDomainError("arc endpoint out of range")
        if not np.all(np.isfinite(caps)) or np.any(caps < 0):
            raise InvalidDomainError("capacities must be finite and nonnegative")
        if caps.dtype.kind in "iu" or (caps.size and np.all(caps == np.round(caps)) and caps.max() < 2**52):
            caps = caps.astype(np.int64)
        else:
            caps = caps.astype(np.float64)
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "caps", _frozen(caps))

    @classmethod
    def from_arcs(cls, n: int, source: int, sink: int, arcs: Iterable[tuple]) -> "Network":
        arcs = list(arcs)
        if not arcs:
            return cls(n, source, sink, np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0, np.int64))
        t, h, c = zip(*arcs)
        return cls(n, source, sink, np.array(t), np.array(h), np.array(c))

    @property
    def m(self) -> int:
        return len(self.tails)

    @property
    def integral(self) -> bool:
        return self.caps.dtype.kind == "i"

    def with_capacity(self, arc: int, cap) -> "Network":
        caps = np.array(self.caps, dtype=np.result_type(self.caps, type(cap)))
        caps[arc] = cap
        return Network(self.n, self.source, self.sink, self.tails, self.heads, caps)


@dataclass(frozen=True, eq=False)
class Flow:
    """Per-arc flow values of a network."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(self.values))


@dataclass(frozen=True)
class Cut:
    """Source side of an s-t cut."""

    nodes: frozenset

    @classmethod
    def of(cls, net: Network, nodes: Iterable[int]) -> "Cut":
        s = frozenset(int(v) for v in nodes)
        if net.source not in s or net.sink in s:
            raise InvalidDomainError("cut must contain the source and not the sink")
        return cls(s)

    def indicator(self, n: int) -> np.ndarray:
        ind = np.zeros(n, dtype=bool)
        ind[list(self.nodes)] = True
        return ind


# ---------------------------------------------------------------------------
# Dinic


@numba.njit(cache=True)
def _dinic(n, s, t, start, adj, to, res, eps):
    level = np.empty(n, np.int64)
    it = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    path = np.empty(n + 1, np.int64)
    total = res[0] - res[0]
    while True:
        level[:] = -1
        level[s] = 0
        qh, qt = 0, 1
        queue[0] = s
        while qh < qt:
            u = queue[qh]
            qh += 1
            for k in range(start[u], start[u + 1]):
                e = adj[k]
                v = to[e]
                if level[v] < 0 and res[e] > eps:
                    level[v] = level[u] + 1
                    queue[qt] = v
                    qt += 1
        if level[t] < 0:
            break
        for u in range(n):
            it[u] = start[u]
        depth = 0
        u = s
        while True:
            if u == t:
                f = res[path[0]]
                for i in range(1, depth):
                    if res[path[i]] < f:
                        f = res[path[i]]
                for i in range(depth):
                    e = path[i]
                    res[e] -= f
                    res[e ^ 1] += f
                total += f
                k = 0
                while k < depth and res[path[k]] > eps:
                    k += 1
                depth = k
                u = s if depth == 0 else to[path[depth - 1]]
                continue
            advanced = False
            while it[u] < start[u + 1]:
                e = adj[it[u]]
                v = to[e]
                if res[e] > eps and level[v] == level[u] + 1:
                    path[depth] = e
                    depth += 1
                    u = v
                    advanced = True
                    break
                it[u] += 1
            if not advanced:
                if u == s:
                    break
                level[u] = -1
                depth -= 1
                u = to[path[depth] ^ 1]
                it[u] += 1
    return total


@numba.njit(cache=True)
def _reachable(n, s, start, adj, to, res, eps):
    seen = np.zeros(n, np.bool_)
    stack = np.empty(n, np.int64)
    seen[s] = True
    stack[0] = s
    top = 1
    while top > 0:
        top -= 1
        u = stack[top]
        for k in range(start[u], start[u + 1]):
            e = adj[k]
            v = to[e]
            if not seen[v] and res[e] > eps:
                seen[v] = True
                stack[top] = v
                top += 1
    return seen


def _residual(net: Network, flow: np.ndarray | None = None):
    """CSR residual graph: edge ``2i`` is arc ``i``, edge ``2i+1`` its reverse."""
    m = net.m
    live = net.tails != net.heads
    dtype = np.int64 if net.integral else np.float64
    caps = np.where(live, net.caps, 0).astype(dtype)
    f = np.zeros(m, dtype) if flow is None else np.asarray(flow, dtype) * live
    to = np.empty(2 * m, np.int64)
    frm = np.empty(2 * m, np.int64)
    to[0::2], to[1::2] = net.heads, net.tails
    frm[0::2], frm[1::2] = net.tails, net.heads
    res = np.empty(2 * m, dtype)
    res[0::2] = caps - f
    res[1::2] = f
    adj = np.argsort(frm, kind="stable").astype(np.int64)
    start = np.zeros(net.n + 1, np.int64)
    np.cumsum(np.bincount(frm, minlength=net.n), out=start[1:])
    return start, adj, to, res


def _eps(net: Network):
    if net.integral:
        return np.int64(0)
    cmax = float(net.caps.max()) if net.m else 0.0
    return 1e-13 * cmax


def max_flow(net: Network) -> tuple[Flow, float]:
    """Maximum s-t flow by Dinic's algorithm (BFS levels + blocking flows).

    The returned flow is checked against the capacity and conservation
    constraints before it is handed back.
    """
    if net.m == 0:
        return Flow(np.zeros(0, net.caps.dtype)), 0
    start, adj, to, res = _residual(net)
    _dinic(net.n, net.source, net.sink, start, adj, to, res, _eps(net))
    f = res[1::2].copy()
    f[net.tails == net.heads] = 0
    if not net.integral:
        np.clip(f, 0.0, net.caps, out=f)
    flow = Flow(f)
    check_feasible(net, flow)
    value = excess(net, flow, net.source)
    return flow, (int(value) if net.integral else float(value))


def excess(net: Network, f: Flow, v: int) -> float:
    """Net outflow ``sum_w f(v, w) - f(w, v)`` at node ``v``."""
    vals = f.values
    return vals[net.tails == v].sum() - vals[net.heads == v].sum()


def _node_excess(net: Network, f: Flow) -> np.ndarray:
    vals = np.asarray(f.values, dtype=float)
    return np.bincount(net.tails, vals, net.n) - np.bincount(net.heads, vals, net.n)


def check_feasible(net: Network, f: Flow) -> None:
    """Raise :class:`InfeasibleFlowError` naming the first violated constraint."""
    vals = np.asarray(f.values)
    if vals.shape != net.caps.shape:
        raise InfeasibleFlowError("flow has the wrong number of arcs")
    scale = float(net.caps.max()) if net.m else 1.0
    tol = 0 if (net.integral and vals.dtype.kind == "i") else REL_TOL * max(scale, 1e-300)
    bad = np.flatnonzero((vals < -tol) | (vals > net.caps + tol))
    if bad.size:
        a = int(bad[0])
        raise InfeasibleFlowError(
            f"capacity constraint violated on arc {a} "
            f"({net.tails[a]}->{net.heads[a]}): flow {vals[a]} vs capacity {net.caps[a]}"
        )
    ex = _node_excess(net, f)
    ex[[net.source, net.sink]] = 0
    deg = np.bincount(net.tails, minlength=net.n) + np.bincount(net.heads, minlength=net.n)
    bad = np.flatnonzero(np.abs(ex) > tol * np.maximum(deg, 1))
    if bad.size:
        v = int(bad[0])
        raise InfeasibleFlowError(f"conservation violated at node {v}: net outflow {ex[v]}")


def cut_capacity(net: Network, cut: Cut) -> float:
    """Total capacity of arcs leaving the source side."""
    ind = cut.indicator(net.n)
    crossing = ind[net.tails] & ~ind[net.heads]
    return net.caps[crossing].sum()


def min_cut(net: Network, f: Flow) -> Cut:
    """Nodes reachable from the source in the residual graph of ``f``.

    Raises :class:`NotMaxFlowError` when the sink is reachable or the cut
    capacity does not match the flow value.
    """
    check_feasible(net, f)
    if net.m == 0:
        return Cut(frozenset([net.source]))
    start, adj, to, res = _residual(net, f.values)
    seen = _reachable(net.n, net.source, start, adj, to, res, _eps(net) * 1e3)
    if seen[net.sink]:
        raise NotMaxFlowError("sink reachable in the residual graph; flow is not maximal")
    cut = Cut(frozenset(np.flatnonzero(seen).tolist()))
    value = excess(net, f, net.source)
    cap = cut_capacity(net, cut)
    if net.integral and np.asarray(f.values).dtype.kind == "i":
        ok = cap == value
    else:
        ok = abs(cap - value) <= REL_TOL * max(abs(value), float(net.caps.max()))
    if not ok:
        raise NotMaxFlowError(f"cut capacity {cap} differs from flow value {value}")
    return cut


def verify_weak_duality(net: Network, f: Flow, cut: Cut) -> bool:
    """``value(f) <= cap(cut)`` for a feasible flow (raises if infeasible)."""
    check_feasible(net, f)
    return bool(excess(net, f, net.source) <= cut_capacity(net, cut) + 1e-12)


def uniform_source_network(
    weights: Sequence[float],
    sink_arcs: Mapping[int, float] | Sequence[tuple[int, float]],
    internal: Iterable[tuple[int, int, float]],
    h: float,
) -> Network:
    """Super-source reduction for sources of equal strength per unit weight.

    Base nodes are ``0..k-1``; node ``k`` is the super-source (arc of
    capacity ``h * w(v)`` into every base node) and ``k + 1`` the sink. All
    source arcs saturate exactly when ``h <= cap(boundary S) / w(S)`` for
    every base set ``S``.
    """
    if h < 0:
        raise DomainError("h must be nonnegative")
    w = np.asarray(weights, dtype=float)
    if np.any(w <= 0):
        raise DomainError("weights must be positive")
    k = len(w)
    s, t = k, k + 1
    items = sink_arcs.items() if isinstance(sink_arcs, Mapping) else sink_arcs
    arcs = [(s, v, h * w[v]) for v in range(k)]
    arcs += [(int(v), t, float(c)) for v, c in items]
    arcs += [(int(a), int(b), float(c)) for a, b, c in internal]
    tails, heads, caps = (np.array(x) for x in zip(*arcs))
    return Network(k + 2, s, t, tails, heads, caps.astype(float))


# ---------------------------------------------------------------------------
# DIMACS


def read_dimacs(path) -> Network:
    """Parse a DIMACS max-flow file (``p max``, ``n``, ``a`` lines; 1-based)."""
    n = m = None
    s = t = None
    arcs = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        parts = raw.split()
        if not parts or parts[0] == "c":
            continue
        try:
            tag = parts[0]
            if tag == "p":
                if len(parts) != 4 or parts[1] != "max":
                    raise ValueError("expected 'p max <nodes> <arcs>'")
                n, m = int(parts[2]), int(parts[3])
            elif tag == "n":
                v, kind = int(parts[1]) - 1, parts[2]
                if kind == "s":
                    s = v
                elif kind == "t":
                    t = v
                else:
                    raise ValueError(f"unknown node designator {kind!r}")
            elif tag == "a":
                u, v = int(parts[1]) - 1, int(parts[2]) - 1
                c = float(parts[3])
                arcs.append((u, v, int(c) if c.is_integer() else c))
            else:
                raise ValueError(f"unknown line type {tag!r}")
        except (ValueError, IndexError) as exc:
            raise InvalidDomainError(f"{path}:{lineno}: {exc}") from exc
    if n is None or s is None or t is None:
        raise InvalidDomainError(f"{path}: missing problem line or terminals")
    if m is not None and m != len(arcs):
        raise InvalidDomainError(f"{path}: declared {m} arcs, found {len(arcs)}")
    return Network.from_arcs(n, s, t, arcs)


def write_dimacs(net: Network, path) -> None:
    lines = [f"p max {net.n} {net.m}", f"n {net.source + 1} s", f"n {net.sink + 1} t"]
    for u, v, c in zip(net.tails, net.heads, net.caps):
        cap = int(c) if net.integral else repr(float(c))
        lines.append(f"a {u + 1} {v + 1} {cap}")
    Path(path).write_text("\n".join(lines) + "\n")
