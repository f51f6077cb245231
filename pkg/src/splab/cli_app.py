"""Command line entry point: ``splab {verify,embed,simulate,ricci}``.

Exit codes: 0 success, 1 a verified invariant failed, 2 usage error,
3 invalid configuration (bad covariance file, lambda spec, N < 2, ...),
4 numerical failure inside a module.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings

from . import __version__
from . import brownian_sim as bs
from . import diff_embed as de
from . import op_algebra as oa
from . import ricci_engine as rc
from . import sp_algebra as sa
from .fourier_core import ContractError, ModeWindow

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3, 4


class ConfigError(Exception):
    pass


def _origin(exc) -> str:
    # module of the innermost package frame that raised
    name = "cli_app"
    tb = exc.__traceback__
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("splab."):
            name = mod.split(".", 1)[1]
        tb = tb.tb_next
    return name


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _emit_table(header, rows, out, fmt):
    if fmt == "json":
        text = json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _provenance(args, extra=None):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    line = {"command": args.command, "config": cfg, "seed": args.seed,
            "version": f"splab {__version__}"}
    if extra:
        line.update(extra)
    print(json.dumps(line, sort_keys=True, default=str), file=sys.stderr)


# --- embed -------------------------------------------------------------------

def _parse_diffeo(text: str):
    """``rotation:a`` | ``sine:k:eps`` | ``cosine:k:eps``, comma-joined for a composition."""
    parts = []
    for chunk in text.split(","):
        name, *vals = chunk.split(":")
        try:
            if name == "rotation" and len(vals) == 1:
                parts.append(de.Rotation(float(vals[0])))
            elif name in ("sine", "cosine") and len(vals) == 2:
                cls = de.Sine if name == "sine" else de.Cosine
                parts.append(cls(int(vals[0]), float(vals[1])))
            else:
                raise ConfigError(f"bad diffeomorphism term {chunk!r}")
        except ValueError as exc:
            raise ConfigError(f"bad diffeomorphism term {chunk!r}: {exc}") from exc
    return parts[0] if len(parts) == 1 else de.Compose(parts)


def cmd_embed(args) -> int:
    if args.family == "compose":
        if not args.parts:
            raise ConfigError("compose needs --parts")
        psi = _parse_diffeo(args.parts)
    elif args.family == "rotation":
        psi = de.Rotation(args.alpha)
    else:
        cls = de.Sine if args.family == "sine" else de.Cosine
        psi = cls(args.k, args.eps)
    window = ModeWindow(args.N)
    grid = de.QuadratureGrid(args.grid) if args.grid else None
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", de.AccuracyWarning)
        Phi = de.embed(psi, window, grid)
    for w in caught:
        print(f"diff_embed: warning: {w.message}", file=sys.stderr)
    rows = [[int(m), int(n), _fmt(Phi[i, j].real), _fmt(Phi[i, j].imag)]
            for i, m in enumerate(window.indices) for j, n in enumerate(window.indices)]
    _emit_table(["m", "n", "re", "im"], rows, args.out, args.format)
    report = {"real_residual": oa.real_residual(Phi),
              "omega_residual": oa.omega_residual(Phi, window.central()),
              "norm2": oa.norm2(Phi)}
    print(json.dumps(report, sort_keys=True), file=sys.stdout if args.out else sys.stderr)
    _provenance(args)
    return EXIT_OK


# --- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    try:
        Q = sa.CovSpec.parse(args.Q)
    except sa.CovSpecError as exc:
        raise ConfigError(f"sp_algebra: {exc}") from exc
    cfg = bs.SimConfig(N=args.N, dt=args.dt, T=args.T, paths=args.paths, seed=args.seed,
                       Q=Q, record_every=args.record_every, project=args.project)
    records = bs.simulate(cfg, threads=args.threads)
    rows = [[r.path, _fmt(t), _fmt(res), _fmt(nn)]
            for r in records for t, res, nn in zip(r.times, r.residual, r.norm2)]
    _emit_table(["path", "t", "residual", "norm2"], rows, args.out, args.format)
    summary = bs.summarize(cfg, records)
    if args.summary:
        bs.write_summary_json(summary, args.summary)
    else:
        print(json.dumps(summary, sort_keys=True), file=sys.stdout if args.out else sys.stderr)
    _provenance(args, {"Q": Q.to_dict()})
    return EXIT_OK


# --- ricci -------------------------------------------------------------------

def cmd_ricci(args) -> int:
    lam = sa.LambdaSeq.parse(args.lam, args.N)
    labels = rc.parse_label_selection(args.labels, args.N)
    reports = rc.curvature_report(labels, lam, args.N, threads=args.threads)
    rows = [[r.label.kind, r.label.a, r.label.b, r.N, _fmt(r.brute), _fmt(r.closed_form),
             _fmt(r.abs_diff)] for r in reports]
    _emit_table(["kind", "a", "b", "N", "brute", "closed", "abs_diff"], rows, args.out, args.format)
    _provenance(args)
    return EXIT_OK


# --- verify ------------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import run_battery
    results = run_battery(args.N, seed=args.seed)
    rows = [[r.module, r.name, r.kind, "pass" if r.passed else "FAIL", _fmt(r.measured), _fmt(r.tol)]
            for r in results]
    _emit_table(["module", "invariant", "kind", "status", "measured", "tol"], rows, args.out, args.format)
    _provenance(args)
    failed = [r for r in results if not r.passed and (r.kind == "invariant" or args.strict)]
    return EXIT_FAIL if failed else EXIT_OK


# --- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, default=8, help="window size (indices -N..N, N >= 2)")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    common.add_argument("--seed", type=int, default=0)

    p = _Parser(prog="splab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"splab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", parents=[common], help="run the invariant battery")
    v.add_argument("--strict", action="store_true",
                   help="also fail on reference comparisons against closed forms")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("embed", parents=[common], help="matrix of a circle diffeomorphism")
    e.add_argument("--family", choices=("rotation", "sine", "cosine", "compose"), default="sine")
    e.add_argument("--k", type=int, default=1)
    e.add_argument("--eps", type=float, default=0.0)
    e.add_argument("--alpha", type=float, default=0.0)
    e.add_argument("--parts", default=None, help="for compose: e.g. 'sine:2:0.2,rotation:0.5'")
    e.add_argument("--grid", type=int, default=None, help="FFT grid size (power of two, >= 8N)")
    e.set_defaults(func=cmd_embed)

    s = sub.add_parser("simulate", parents=[common], help="Brownian motion on the group")
    s.add_argument("--Q", default="zero", help="zero | uniform:q,K | power:p | file:path.json")
    s.add_argument("--dt", type=float, default=1e-3)
    s.add_argument("--T", type=float, default=1.0)
    s.add_argument("--paths", type=int, default=1)
    s.add_argument("--record-every", type=int, default=1)
    s.add_argument("--project", action="store_true", help="Newton re-projection after each step")
    s.add_argument("--summary", default=None, help="write the summary JSON here")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("ricci", parents=[common], help="truncated Ricci curvature report")
    r.add_argument("--lambda", dest="lam", default="uniform:0.70710678118654752",
                   help="uniform:x | power:p | file:path")
    r.add_argument("--labels", default="all:2", help="all:k | muRe:a,b;nuIm:a,b ...")
    r.set_defaults(func=cmd_ricci)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.N < 2:
        print("splab: error: --N must be at least 2", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, sa.CovSpecError) as exc:
        print(f"splab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractError as exc:
        print(f"splab: error: {_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (de.NumericalError, FloatingPointError) as exc:
        print(f"splab: error: {_origin(exc)}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
