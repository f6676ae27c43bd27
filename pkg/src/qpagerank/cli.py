"""Command-line front end: ``qpagerank {rank-classical,rank-quantum,perturb,validate}``.

Every command builds a set of named tables and writes them as JSON or CSV
with identical numeric content.  Floats are printed with 17 significant
digits; non-finite values are written as the strings ``inf``/``-inf``/``nan``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import acceptance, oracle
from .errors import InadmissibleChi, InvalidParameter, NotInSubspace, QPageRankError
from .graph import GoogleMatrix, build_google, classical_pagerank, load_edge_list
from .perturbation.analysis import MAX_ORDER, PerturbationAnalysis
from .perturbation.spec_io import load_perturbation
from .spectral import build_t, eigendecompose
from .szegedy import (
    average_pagerank_all,
    build_walk,
    default_psi0,
    he_eigenpairs,
    limit_pagerank_all,
    mixing_bound,
    quantum_pagerank_all,
)

Table = tuple[list[str], list[list]]


@dataclass
class Report:
    command: str
    tables: dict[str, Table] = field(default_factory=dict)

    def add(self, name: str, columns: list[str], rows: list[list]) -> None:
        self.tables[name] = (columns, rows)


# ---------------------------------------------------------------- formatting


def fmt_float(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        s = fmt_float(float(v))
        return s if math.isfinite(v) else json.dumps(s)
    if v is None:
        return "null"
    return json.dumps(str(v))


def _csv_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(float(v))
    return "" if v is None else str(v)


def render_json(report: Report) -> str:
    lines = ["{", f'  "command": {json.dumps(report.command)},', '  "tables": {']
    names = list(report.tables)
    for t, name in enumerate(names):
        columns, rows = report.tables[name]
        lines.append(f"    {json.dumps(name)}: [")
        for r, row in enumerate(rows):
            body = ", ".join(f"{json.dumps(c)}: {_json_value(v)}" for c, v in zip(columns, row))
            lines.append(f"      {{{body}}}" + ("," if r < len(rows) - 1 else ""))
        lines.append("    ]" + ("," if t < len(names) - 1 else ""))
    lines += ["  }", "}"]
    return "\n".join(lines) + "\n"


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    multi = len(report.tables) > 1
    for t, (name, (columns, rows)) in enumerate(report.tables.items()):
        if multi:
            if t:
                buf.write("\n")
            buf.write(f"# {name}\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_csv_value(v) for v in row])
    return buf.getvalue()


def emit(report: Report, fmt: str, out: str | None) -> None:
    text = render_json(report) if fmt == "json" else render_csv(report)
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise InvalidParameter(f"cannot write {out}: {exc.strerror}") from exc


# ---------------------------------------------------------------- inputs


def read_google(path: str, alpha: float) -> GoogleMatrix:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidParameter(f"cannot read graph file {path}: {exc.strerror}") from exc
    return build_google(load_edge_list(text), alpha)


def read_psi0(choice: str, n: int, ops) -> np.ndarray:
    if choice == "uniform":
        return default_psi0(ops)
    try:
        data = json.loads(Path(choice).read_text())
    except OSError as exc:
        raise InvalidParameter(f"cannot read initial state file {choice}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidParameter(f"{choice}: invalid JSON ({exc.msg})") from exc
    try:
        vec = np.array([complex(*v) if isinstance(v, list) else complex(v) for v in data])
    except (TypeError, ValueError) as exc:
        raise InvalidParameter(f"{choice}: expected a list of numbers or [re, im] pairs") from exc
    if vec.shape != (n * n,):
        raise InvalidParameter(f"{choice}: initial state needs {n * n} amplitudes, got {vec.size}")
    return vec


def _nodes(selected: Sequence[int] | None, n: int) -> list[int]:
    if not selected:
        return list(range(1, n + 1))
    bad = [i for i in selected if not 1 <= i <= n]
    if bad:
        raise InvalidParameter(f"node ids {bad} outside [1, {n}]")
    return sorted(set(selected))


def _check_psi0(fn):
    """Report initial states outside the dynamical subspace as bad input."""

    def wrapped(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except NotInSubspace as exc:
            raise InvalidParameter(f"initial state rejected: {exc}") from exc

    return wrapped


# ---------------------------------------------------------------- commands


def cmd_rank_classical(args: argparse.Namespace) -> Report:
    G = read_google(args.graph, args.alpha)
    pi = classical_pagerank(G)
    rep = Report("rank-classical")
    rep.add("pagerank", ["node", "score"], [[k + 1, float(pi[k])] for k in range(G.n)])
    return rep


@_check_psi0
def cmd_rank_quantum(args: argparse.Namespace) -> Report:
    G = read_google(args.graph, args.alpha)
    ops = build_walk(G)
    ws = he_eigenpairs(ops, eigendecompose(build_t(G)))
    psi0 = read_psi0(args.psi0, G.n, ops)
    nodes = _nodes(args.nodes, G.n)
    rep = Report("rank-quantum")
    rows = []
    for m in sorted(set(args.m)):
        vals = quantum_pagerank_all(ws, psi0, m, args.variant)
        rows += [[i, m, float(vals[i - 1])] for i in nodes]
    rep.add("instantaneous", ["node", "m", "I_q"], rows)
    lim = limit_pagerank_all(ws, psi0, args.variant)
    avg_rows = []
    for t in sorted(set(args.t)):
        avg = average_pagerank_all(ws, psi0, t, args.variant)
        bound = mixing_bound(ws, psi0, t)
        avg_rows += [[i, t, float(avg[i - 1]), float(lim[i - 1]), float(bound)] for i in nodes]
    rep.add("average", ["node", "t", "I_avg", "I_infinity", "mixing_bound"], avg_rows)
    return rep


def comparison_grid(an: PerturbationAnalysis, iq_B: float, points: int) -> list[float]:
    """Dyadic grid inside 0.3 r0, further limited to where the tail bound is finite."""
    limit = 0.3 * an.radius.r0
    if iq_B > 0:
        limit = min(limit, 0.5 / iq_B)
    return oracle.dyadic_grid(min(limit, 0.1), points)


@_check_psi0
def cmd_perturb(args: argparse.Namespace) -> Report:
    G = read_google(args.graph, args.alpha)
    gs = load_perturbation(args.perturbation, G.entries)
    if not 1 <= args.order <= MAX_ORDER:
        raise InvalidParameter(f"order must lie in [1, {MAX_ORDER}], got {args.order}")
    an = PerturbationAnalysis(gs, args.order)
    r0 = an.radius.r0
    for chi in args.chi:
        if not math.isfinite(chi):
            raise InadmissibleChi(f"chi = {chi} is not finite")
        if abs(chi) > r0:
            raise InadmissibleChi(f"|chi| = {chi:.6g} exceeds the certified radius r0 = {r0:.6g}")
        oracle.google_at(gs, chi)
    psi0 = read_psi0(args.psi0, G.n, an.ops)
    nodes = _nodes(args.nodes, G.n)
    K = args.order
    rep = Report("perturb")

    t_rows = []
    for order in range(K + 1):
        c = np.real(an.ts.coeffs[order])
        t_rows += [[order, i + 1, j + 1, float(c[i, j])] for i in range(G.n) for j in range(G.n)]
    rep.add("T_coefficients", ["order", "i", "j", "value"], t_rows)

    lam_rows = []
    for leaf_id, (leaf, coeffs) in enumerate(an.lambda_coefficients(), start=1):
        lam_rows += [[leaf_id, leaf.multiplicity, order, float(np.real(coeffs[order]))] for order in range(K + 1)]
    rep.add("lambda", ["leaf", "multiplicity", "order", "value"], lam_rows)

    radius = an.radius
    rad_rows = [[k, float(v)] for k, v in radius.as_dict().items() if not isinstance(v, list)]
    rad_rows += [[f"r_h[{h + 1}]", float(v)] for h, v in enumerate(radius.r_h)]
    rep.add("radius", ["name", "value"], rad_rows)

    C = oracle.swap_complement_basis(an.spec)
    iq_rows, bound_rows, cmp_rows, eval_rows = [], [], [], []
    for i in nodes:
        for m in sorted(set(args.m)):
            iq = an.iq(psi0, i, m, args.variant)
            iq_rows += [[i, m, order, float(np.real(iq.coeffs[order]))] for order in range(K + 1)]
            ledger = an.error_bounds(psi0, i, m, args.variant)
            for name, e in ledger.entries.items():
                bound_rows.append([i, m, name, e.majorant.a0, e.A, e.B, e.holds, e.provenance])
            I_maj = ledger["I_q"].majorant

            def direct(chi, i=i, m=m):
                return oracle.iq_direct(gs, chi, psi0, i, m, C, args.variant)

            grid = comparison_grid(an, I_maj.B, args.grid_points)
            rounding = 64 * np.finfo(float).eps * max(1.0, abs(float(np.real(iq.coeffs[0]))))
            table = oracle.compare_truncation(
                iq.coeffs, direct, grid, K, lambda x: I_maj.tail(x, K), rounding=rounding
            )
            for r in table.rows:
                cmp_rows.append([i, m, r.chi, r.oracle, r.truncated, r.abs_error, r.tail_bound, r.within_bound])
            for chi in args.chi:
                eval_rows.append([i, m, chi, float(np.real(iq.evaluate(chi))), float(np.real(direct(chi)))])
    rep.add("I_q_coefficients", ["node", "m", "order", "value"], iq_rows)
    rep.add("bounds", ["node", "m", "quantity", "a0", "A", "B", "holds", "provenance"], bound_rows)
    rep.add(
        "comparison",
        ["node", "m", "chi", "oracle", "truncated", "abs_error", "tail_bound", "within_bound"],
        cmp_rows,
    )
    if args.chi:
        rep.add("evaluation", ["node", "m", "chi", "series", "oracle"], eval_rows)
    return rep


def cmd_validate(args: argparse.Namespace) -> Report:
    numbers = args.criteria or list(acceptance.CRITERIA)
    bad = [k for k in numbers if k not in acceptance.CRITERIA]
    if bad:
        raise InvalidParameter(f"unknown criteria {bad}; choose from 1..{len(acceptance.CRITERIA)}")
    results = [acceptance.run(k, args.seed) for k in numbers]
    for r in results:
        print(r.line(), file=sys.stderr)
    rep = Report("validate")
    rep.add("criteria", ["number", "title", "passed", "detail"], [[r.number, r.title, r.passed, r.detail] for r in results])
    return rep


# ---------------------------------------------------------------- parser


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0,1), got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpagerank", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, graph: bool = True) -> None:
        if graph:
            p.add_argument("graph", help="edge list: one 'src<TAB>dst' per line, 1-based ids")
            p.add_argument("--alpha", type=_alpha, default=0.85, help="damping factor (default 0.85)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="write to this path instead of stdout")

    def quantum(p: argparse.ArgumentParser, default_m: list[int]) -> None:
        p.add_argument("--m", type=int, nargs="+", default=default_m, help="walk steps")
        p.add_argument("--nodes", type=int, nargs="+", help="restrict output to these nodes")
        p.add_argument("--variant", choices=("paper", "norm"), default="paper")
        p.add_argument("--psi0", default="uniform", help="'uniform' or a JSON file holding a list of N^2 amplitudes")

    p = sub.add_parser("rank-classical", help="power-iteration PageRank")
    common(p)
    p.set_defaults(func=cmd_rank_classical)

    p = sub.add_parser("rank-quantum", help="instantaneous, averaged and limiting quantum PageRank")
    common(p)
    quantum(p, [0, 1, 2])
    p.add_argument("--t", type=int, nargs="+", default=[10, 100, 1000], help="averaging windows")
    p.set_defaults(func=cmd_rank_quantum)

    p = sub.add_parser("perturb", help="series expansion in chi with radius, bounds and oracle check")
    common(p)
    p.add_argument("perturbation", help="JSON file with order_terms")
    quantum(p, [1])
    p.add_argument("--order", type=int, default=4, help=f"truncation order K in [1, {MAX_ORDER}] (default 4)")
    p.add_argument("--chi", type=float, nargs="*", default=[], help="extra points to evaluate")
    p.add_argument("--grid-points", type=int, default=6, help="points on the comparison grid")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("validate", help="run the acceptance checks on the built-in fixtures")
    common(p, graph=False)
    p.add_argument("--criteria", type=int, nargs="+", help="subset of criterion numbers")
    p.add_argument("--seed", type=int, default=acceptance.SEED, help="seed for the random graphs")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = args.func(args)
        emit(report, args.format, args.out)
    except QPageRankError as exc:
        print(f"qpagerank: error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.command == "validate":
        passed = all(report.tables["criteria"][1][k][2] for k in range(len(report.tables["criteria"][1])))
        return 0 if passed else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
