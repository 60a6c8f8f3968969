"""Command line: ``cheegerflow analyze|maxflow|certify|suite``.

Exit codes: 0 success, 1 a check or certificate failed, 2 bad input,
3 a solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import geometry
from .cheeger import STENCILS, certify_lower_bound
from .errors import BracketError, CheegerFlowError, ConvergenceError, InvalidDomainError
from .maxflow import max_flow, min_cut, read_dimacs
from .report import analyze, read_field_csv, write_outputs

log = logging.getLogger("cheegerflow")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--resolution", type=int, default=None,
                   help="cells across the longer side (default: value in the spec, else 128)")
    p.add_argument("--stencil", choices=sorted(STENCILS), default="8")
    p.add_argument("--tol-h", type=float, default=0.01, help="bisection stopping width")
    p.add_argument("--levels", type=int, default=64, help="level sets for coarea integrals")
    p.add_argument("--cert-tol", type=float, default=0.05, help="certificate tolerance")
    p.add_argument("--samples", type=int, default=32, help="random test subsets per domain")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cheegerflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="full analysis of one domain spec")
    p.add_argument("spec")
    _add_common(p)
    p.add_argument("--out", default=None, help="directory for report.json, SVG and CSV fields")

    p = sub.add_parser("maxflow", help="max flow and min cut of a DIMACS network")
    p.add_argument("dimacs")

    p = sub.add_parser("certify", help="check a vector field CSV as a lower-bound certificate")
    p.add_argument("field_csv")
    p.add_argument("--h", type=float, required=True, help="claimed lower bound")
    p.add_argument("--spec", required=True)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--tol", type=float, default=0.05)

    p = sub.add_parser("suite", help="analyze every spec in a corpus directory")
    p.add_argument("corpus_dir", nargs="?", default=None,
                   help="directory of DomainSpec JSON files (default: bundled corpus)")
    _add_common(p)
    p.add_argument("--out", default=None, help="CSV table path (default: stdout)")
    return ap


def _load_spec(path, resolution=None) -> geometry.DomainSpec:
    spec = geometry.DomainSpec.load(path)
    if resolution is not None and spec.kind != "raster":
        spec = spec.with_resolution(resolution)
    return spec


def cmd_analyze(args) -> int:
    spec = _load_spec(args.spec, args.resolution)
    keep: dict = {}
    report = analyze(spec, None, args.stencil, args.tol_h, args.levels, args.cert_tol,
                     args.samples, keep=keep)
    if args.out:
        write_outputs(report, keep, args.out)
    print(report.to_json(indent=2))
    for name in report.failures():
        c = report.checks[name]
        print(f"FAIL {name}: {c.lhs:.6g} {c.relation} {c.rhs:.6g} (tol {c.tol:.3g})", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_maxflow(args) -> int:
    net = read_dimacs(args.dimacs)
    f, value = max_flow(net)
    cut = min_cut(net, f)
    names = {net.source: "s", net.sink: "t"}
    nodes = sorted(cut.nodes)
    print(f"value {value}")
    print("cut " + " ".join(names.get(v, str(v + 1)) for v in nodes))
    return EXIT_OK


def cmd_certify(args) -> int:
    spec = _load_spec(args.spec, args.resolution)
    g = geometry.rasterize(spec)
    V = read_field_csv(args.field_csv, g)
    rep = certify_lower_bound(V, g, args.h, args.tol)
    print(json.dumps(rep.to_dict(), indent=2))
    print(rep.message())
    return EXIT_OK if rep.verdict else EXIT_FAIL


def _bundled_corpus() -> Path:
    return Path(__file__).parent / "data" / "corpus"


def cmd_suite(args) -> int:
    corpus = Path(args.corpus_dir) if args.corpus_dir else _bundled_corpus()
    if not corpus.is_dir():
        raise InvalidDomainError(f"corpus directory {corpus} not found")
    files = sorted(corpus.glob("*.json"))
    if not files:
        log.warning("corpus %s has no domain specs", corpus)
        print(f"warning: corpus {corpus} has no domain specs", file=sys.stderr)
        return EXIT_OK
    rows = []
    for path in files:
        try:
            spec = _load_spec(path, args.resolution)
            rep = analyze(spec, None, args.stencil, args.tol_h, args.levels, args.cert_tol, args.samples)
        except (CheegerFlowError, OSError) as exc:
            rows.append([path.stem, "load_and_solve", "", "", "", "", "fail", str(exc)])
            continue
        for name, c in rep.checks.items():
            rows.append([path.stem, name, repr(c.lhs), c.relation, repr(c.rhs), repr(c.tol),
                         "pass" if c.holds else "fail", ""])
    header = ["domain", "check", "lhs", "relation", "rhs", "tol", "verdict", "note"]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return EXIT_FAIL if any(r[6] == "fail" for r in rows) else EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "maxflow": cmd_maxflow, "certify": cmd_certify, "suite": cmd_suite}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConvergenceError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (CheegerFlowError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
