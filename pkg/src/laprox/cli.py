"""``laprox`` command-line frontend.

Exit codes: 0 success, 1 usage, 2 input/parse, 3 numeric, 4 oracle-cap refusal.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import __version__, ecc, kc, oracle
from .errors import GraphParseError, LaproxError, UsageError
from .graph import Graph, read_edge_list, select_landmark

SCHEMA = 1
ESTIMATORS = ("ecc-spantree", "ecc-lewalk", "kc-spantree", "kc-lewalk")
VECTOR_METRICS = ("maxrel", "l1")
SCALAR_METRICS = ("rel", "abs")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# -- error metrics ---------------------------------------------------------------------

def error_metrics(est, ref, metrics: tuple[str, ...] | None = None) -> dict[str, float]:
    """maxrel and l1 for vectors, rel and abs for scalars.

    Relative metrics divide by the reference and refuse a zero entry.
    """
    est_a = np.asarray(est, dtype=np.float64)
    ref_a = np.asarray(ref, dtype=np.float64)
    if est_a.shape != ref_a.shape:
        raise UsageError(f"shape mismatch: {est_a.shape} vs {ref_a.shape}")
    scalar = est_a.ndim == 0
    allowed = SCALAR_METRICS if scalar else VECTOR_METRICS
    metrics = allowed if metrics is None else tuple(metrics)
    for name in metrics:
        if name not in allowed:
            kind = "scalar" if scalar else "per-node"
            raise UsageError(f"metric {name!r} does not apply to {kind} values "
                             f"(use {' or '.join(allowed)})")
    diff = np.abs(est_a - ref_a)
    out: dict[str, float] = {}
    for name in metrics:
        if name in ("maxrel", "rel"):
            zero = np.flatnonzero(np.atleast_1d(ref_a) == 0)
            if zero.size:
                where = "reference" if scalar else f"reference entry {int(zero[0])}"
                raise UsageError(f"relative error undefined: {where} is zero")
            out[name] = float(np.max(diff / np.abs(ref_a)))
        elif name == "l1":
            out[name] = float(diff.sum())
        else:
            out[name] = float(diff)
    return out


# -- report assembly -------------------------------------------------------------------

@dataclass
class RunReport:
    command: str
    graph: str | None = None
    n: int | None = None
    m: int | None = None
    landmark: int | None = None
    samples: int | None = None
    seed: int | None = None
    threads: int = 1
    wall_time: float = 0.0
    estimates: dict[str, Any] = field(default_factory=dict)
    nodes: list[int] | None = None
    primary: str | None = None
    """Key of ``estimates`` written as the TSV value column (or the scalar row)."""

    def to_json(self) -> str:
        doc: dict[str, Any] = {"schema": SCHEMA, "command": self.command}
        for key in ("graph", "n", "m", "landmark", "samples", "seed"):
            val = getattr(self, key)
            if val is not None:
                doc[key] = val
        if self.nodes is not None:
            doc["nodes"] = self.nodes
        doc["estimates"] = {k: _jsonable(v) for k, v in self.estimates.items()}
        # Everything that may legitimately differ between equivalent runs.
        doc["runtime"] = {"threads": self.threads, "wall_time": self.wall_time}
        return json.dumps(doc, indent=2, allow_nan=False) + "\n"

    def to_tsv(self) -> str:
        lines = [f"# laprox {self.command}"]
        for key in ("graph", "n", "m", "landmark", "samples", "seed"):
            val = getattr(self, key)
            if val is not None:
                lines.append(f"# {key}={val}")
        value = self.estimates[self.primary]
        if isinstance(value, np.ndarray):
            lines.append(f"#node_id\t{self.primary}")
            lines += [f"{u}\t{_fmt(x)}" for u, x in zip(self.nodes, value)]
        else:
            for key, val in self.estimates.items():
                if not isinstance(val, np.ndarray):
                    lines.append(f"{key}\t{_fmt(val)}")
        return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [None if math.isnan(x) else float(x) for x in v.tolist()]
    if isinstance(v, (float, np.floating)):
        return None if math.isnan(v) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    return v


def _emit(text: str, out: str | None):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _render(report: RunReport, args) -> None:
    _emit(report.to_json() if args.format == "json" else report.to_tsv(), args.out)


# -- graph loading ---------------------------------------------------------------------

def _load(path: str) -> tuple[Graph, dict[int, int], list[int]]:
    try:
        g, relabel = read_edge_list(path)
    except OSError as exc:
        raise GraphParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    orig = [0] * g.n
    for o, i in relabel.items():
        orig[i] = o
    return g, relabel, orig


def _landmark(g: Graph, relabel: dict[int, int], choice: str) -> int:
    if choice == "auto":
        return select_landmark(g)
    try:
        orig = int(choice)
    except ValueError:
        raise UsageError(f"--landmark expects 'auto' or a node id, got {choice!r}") from None
    if orig not in relabel:
        raise UsageError(f"landmark {orig} is not a node of the largest connected component")
    return select_landmark(g, relabel[orig])


# -- subcommands -----------------------------------------------------------------------

def _run_estimator(name: str, g: Graph, v: int, samples: int, seed: int, threads: int):
    if name == "ecc-spantree":
        return ecc.estimate_spantree(g, v, samples, seed=seed, threads=threads)
    if name == "ecc-lewalk":
        return ecc.estimate_lewalk(g, v, samples, seed=seed, threads=threads)
    if name == "kc-spantree":
        return kc.estimate_kc_spantree(g, v, samples, seed=seed, threads=threads)
    return kc.estimate_kc_lewalk(g, v, samples, seed=seed, threads=threads)


def cmd_estimate(args) -> int:
    g, relabel, orig = _load(args.graph)
    v = _landmark(g, relabel, args.landmark)
    res = _run_estimator(args.command, g, v, args.samples, args.seed, args.threads)
    rep = RunReport(command=args.command, graph=args.graph, n=g.n, m=g.m, landmark=orig[v],
                    samples=args.samples, seed=args.seed, threads=args.threads,
                    wall_time=res.wall_time)
    if isinstance(res, ecc.DiagEstimate):
        rep.nodes = orig
        rep.estimates["ecc"] = ecc.ecc_scores(res)
        if args.emit_diag:
            rep.estimates["diag"] = res.diag
        if args.emit_parts:
            rep.estimates["first"] = res.accumulator.first
            rep.estimates["second"] = res.accumulator.second
        rep.primary = "diag" if args.emit_diag else "ecc"
    else:
        rep.estimates["kappa"] = res.kappa
        if args.emit_parts:
            rep.estimates["part_trace"] = res.part_trace
            rep.estimates["part_weighted"] = res.part_weighted
            rep.estimates["stderr"] = res.stderr
        rep.primary = "kappa"
    _render(rep, args)
    return 0


def cmd_exact(args) -> int:
    g, _, orig = _load(args.graph)
    t0 = time.perf_counter()
    diag = oracle.exact_diag(g)
    kappa = oracle.exact_kc(g)
    rep = RunReport(command="exact", graph=args.graph, n=g.n, m=g.m,
                    landmark=orig[select_landmark(g)], nodes=orig)
    rep.estimates = {"ecc": ecc.ecc_scores(diag), "diag": diag, "kappa": kappa,
                     "kirchhoff": float(diag.sum())}
    rep.primary = "diag" if args.emit_diag else "ecc"
    rep.wall_time = time.perf_counter() - t0
    _render(rep, args)
    return 0


def cmd_stats(args) -> int:
    g, relabel, orig = _load(args.graph)
    v = _landmark(g, relabel, args.landmark)
    t0 = time.perf_counter()
    steps = kc.wilson_run_lengths(g, v, args.samples, seed=args.seed, threads=args.threads)
    per_node = steps / g.n
    stderr = float(per_node.std(ddof=1) / math.sqrt(len(steps))) if len(steps) > 1 else math.nan
    rep = RunReport(command="stats", graph=args.graph, n=g.n, m=g.m, landmark=orig[v],
                    samples=args.samples, seed=args.seed, threads=args.threads)
    rep.estimates = {"trace_over_n": int(steps.sum()) / (len(steps) * g.n), "stderr": stderr}
    rep.primary = "trace_over_n"
    rep.wall_time = time.perf_counter() - t0
    _render(rep, args)
    return 0


def cmd_sweep(args) -> int:
    g, relabel, orig = _load(args.graph)
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    k = min(args.k, g.n)
    picks = np.sort(np.random.default_rng(args.seed).choice(g.n, size=k, replace=False))
    t0 = time.perf_counter()
    rows = []
    for i, v in enumerate(picks.tolist()):
        res = _run_estimator(args.estimator, g, v, args.samples, args.seed + i, args.threads)
        if isinstance(res, ecc.DiagEstimate):
            rows.append({"landmark": orig[v], "kirchhoff": res.trace, "diag": res.diag})
        else:
            rows.append({"landmark": orig[v], "kappa": res.kappa})
    key = "kirchhoff" if args.estimator.startswith("ecc") else "kappa"
    vals = np.array([r[key] for r in rows])
    rep = RunReport(command="landmark-sweep", graph=args.graph, n=g.n, m=g.m,
                    samples=args.samples, seed=args.seed, threads=args.threads)
    rep.estimates = {"estimator": args.estimator, "runs": rows, "mean": float(vals.mean()),
                     "spread": float(vals.max() - vals.min())}
    rep.wall_time = time.perf_counter() - t0
    if args.format == "json":
        _emit(rep.to_json(), args.out)
    else:
        lines = [f"# laprox landmark-sweep {args.estimator}", f"#landmark\t{key}"]
        lines += [f"{r['landmark']}\t{_fmt(r[key])}" for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


def read_report(path: str) -> dict[str, Any]:
    """Load a JSON or TSV report into ``{field: scalar or {node_id: value}}``."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise GraphParseError(f"cannot read {path}: {exc.strerror or exc}") from None
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphParseError(f"{path}: invalid JSON ({exc.msg})", exc.lineno) from None
        nodes = doc.get("nodes")
        out = {}
        for key, val in doc.get("estimates", {}).items():
            if isinstance(val, list) and nodes is not None and len(val) == len(nodes):
                out[key] = {int(u): (math.nan if x is None else float(x))
                            for u, x in zip(nodes, val)}
            elif isinstance(val, (int, float)) and not isinstance(val, bool):
                out[key] = float(val)
        return out
    out: dict[str, Any] = {}
    column = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#node_id\t"):
            column = line.split("\t", 1)[1].strip()
            out[column] = {}
            continue
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise GraphParseError(f"{path}: expected 2 tab-separated fields", lineno)
        try:
            value = float(parts[1])
            if column is not None:
                out[column][int(parts[0])] = value
            else:
                out[parts[0]] = value
        except ValueError:
            raise GraphParseError(f"{path}: malformed row {line!r}", lineno) from None
    return out


def _pick(doc: dict[str, Any], fld: str | None, path: str):
    if fld is None:
        for candidate in ("ecc", "kappa", "trace_over_n"):
            if candidate in doc:
                return candidate, doc[candidate]
        if len(doc) == 1:
            return next(iter(doc.items()))
        raise UsageError(f"{path}: several fields present, choose one with --field")
    if fld not in doc:
        raise UsageError(f"{path}: no field {fld!r} (have {', '.join(doc) or 'none'})")
    return fld, doc[fld]


def cmd_compare(args) -> int:
    est_doc, ref_doc = read_report(args.est), read_report(args.ref)
    fld, est = _pick(est_doc, args.field, args.est)
    _, ref = _pick(ref_doc, fld, args.ref)
    if isinstance(est, dict) != isinstance(ref, dict):
        raise UsageError(f"field {fld!r} is per-node in one file and scalar in the other")
    if isinstance(est, dict):
        if set(est) != set(ref):
            raise UsageError("estimate and reference cover different node sets")
        ids = sorted(ref)
        est_v = [est[u] for u in ids]
        ref_v = [ref[u] for u in ids]
    else:
        est_v, ref_v = est, ref
    metrics = error_metrics(est_v, ref_v, None if args.metric is None else (args.metric,))
    rep = RunReport(command="compare", estimates={"field": fld, **metrics})
    if args.format == "json":
        _emit(rep.to_json(), args.out)
    else:
        lines = [f"# laprox compare field={fld}"] + [f"{k}\t{_fmt(x)}" for k, x in metrics.items()]
        _emit("\n".join(lines) + "\n", args.out)
    return 0


# -- argument parsing ------------------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {val}")
    return val


def _seed(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2^64)")
    return val


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="laprox", description="Laplacian pseudo-inverse diagonal and "
                "Kemeny constant estimation by spanning-tree and walk sampling.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_flags(sp):
        sp.add_argument("--out", help="write here instead of stdout")
        sp.add_argument("--format", choices=("tsv", "json"), default="tsv")

    def sampling_flags(sp):
        sp.add_argument("--graph", required=True, help="edge-list file")
        sp.add_argument("--samples", type=_positive_int, required=True)
        sp.add_argument("--landmark", default="auto", help="'auto' or an original node id")
        sp.add_argument("--seed", type=_seed, default=0)
        sp.add_argument("--threads", type=_positive_int, default=1)
        output_flags(sp)

    for name in ESTIMATORS:
        sp = sub.add_parser(name, help=f"run the {name} estimator")
        sampling_flags(sp)
        sp.add_argument("--emit-diag", action="store_true",
                        help="also report diag(L^+) (TSV value column becomes the diagonal)")
        sp.add_argument("--emit-parts", action="store_true",
                        help="also report the two estimated parts")
        sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("exact", help="dense oracle ECC and Kemeny constant")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--emit-diag", action="store_true")
    output_flags(sp)
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("stats", help="mean Wilson run length over n")
    sampling_flags(sp)
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("landmark-sweep", help="repeat an estimator over sampled landmarks")
    sp.add_argument("--estimator", choices=ESTIMATORS, required=True)
    sp.add_argument("--graph", required=True)
    sp.add_argument("--samples", type=_positive_int, required=True)
    sp.add_argument("--k", type=int, default=5, help="number of landmarks")
    sp.add_argument("--seed", type=_seed, default=0)
    sp.add_argument("--threads", type=_positive_int, default=1)
    output_flags(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("compare", help="error metrics between two reports")
    sp.add_argument("--est", required=True)
    sp.add_argument("--ref", required=True)
    sp.add_argument("--metric", choices=VECTOR_METRICS + SCALAR_METRICS)
    sp.add_argument("--field", help="estimate field to compare (default: ecc or kappa)")
    output_flags(sp)
    sp.set_defaults(func=cmd_compare)
    return p


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="laprox: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except LaproxError as exc:
        print(f"laprox: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
