"""Command-line driver.

Every subcommand writes a CSV table or a JSON report (to ``--output`` or
stdout) and prints a one-line summary to stderr.  Exit codes: 0 success,
2 argument error, 3 numerical non-convergence.

``--config run.json`` supplies defaults for any flag (keys are the flag names
with dashes replaced by underscores); explicit flags override it.  The
environment variable ``MULTICRITICAL_THREADS`` caps BLAS threads.
"""

from __future__ import annotations

import os

_threads = os.environ.get("MULTICRITICAL_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from . import fredholm, hiairy, kernel, painleve, schur
from .hiairy import ConvergenceError

__all__ = ["RunConfig", "main", "run", "parse_grid", "build_parser"]

FLOAT_FORMAT = "{:.17g}"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NONCONVERGENCE = 3


class UsageError(ValueError):
    """Bad command-line input that passed argparse."""


@dataclass
class RunConfig:
    """Fully resolved arguments of one run; echoed into JSON reports."""

    command: str
    options: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def parse_grid(text: str) -> np.ndarray:
    """``a:b:h`` (inclusive, step ``h``), ``a:b`` (step 1) or a comma list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(v) for v in text.split(":")]
            if len(parts) == 2:
                parts.append(1.0)
            if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
                raise UsageError(f"bad range {text!r}; expected a:b or a:b:step with a <= b, step > 0")
            a, b, h = parts
            n = int(math.floor((b - a) / h + 1e-9)) + 1
            return a + h * np.arange(n)
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot parse grid {text!r}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def _fmt(v: Any) -> str:
    if isinstance(v, (float, np.floating)):
        return FLOAT_FORMAT.format(float(v))
    return str(v)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _report(cfg: RunConfig, body: dict) -> str:
    return json.dumps(_jsonable({"config": asdict(cfg), **body}), indent=2, sort_keys=True) + "\n"


def _rows_to_json(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    return _report(cfg, {"columns": header, "rows": rows})


def _table(cfg: RunConfig, fmt: str, header: list[str], rows: list[list]) -> str:
    if fmt == "json":
        return _rows_to_json(cfg, header, rows)
    return _csv(header, rows)


def _need_p(args, allowed=None) -> int:
    if args.p is None:
        raise UsageError("--p is required")
    p = int(args.p)
    if p < 2:
        raise UsageError("--p must be at least 2")
    if allowed is not None and p not in allowed:
        raise UsageError(f"--p must be one of {sorted(allowed)} for this command")
    return p


# Subcommand implementations return (text, summary).


def _cmd_airy(args, cfg):
    p = _need_p(args)
    z = parse_grid(args.z)
    k = int(args.k)
    if k < 0:
        raise UsageError("--k must be non-negative")
    tilde_avail = p % 2 == 1
    vals = hiairy.ai_derivatives(p, z, k)[k]
    header = ["z", f"ai_{p}^({k})"]
    cols = [z, vals]
    if tilde_avail:
        header.append(f"ai_tilde_{p}^({k})")
        cols.append(hiairy.ai_derivatives(p, z, k, tilde=True)[k])
    rows = [list(r) for r in zip(*cols)]
    return _table(cfg, args.format, header, rows), f"airy p={p} k={k}: {len(rows)} points"


def _cmd_kernel(args, cfg):
    p = _need_p(args)
    xs = parse_grid(args.x)
    ys = parse_grid(args.y) if args.y is not None else xs
    K = kernel.kernel_matrix(p, xs, ys)
    rows = [[x, y, K[i, j]] for i, x in enumerate(xs) for j, y in enumerate(ys)]
    return _table(cfg, args.format, ["x", "y", "K"], rows), f"kernel p={p}: {len(rows)} pairs"


def _cmd_density(args, cfg):
    p = _need_p(args)
    xs = parse_grid(args.x)
    rho = kernel.kernel_matrix(p, xs).diagonal()
    rows = []
    for x, r in zip(xs, rho):
        asym = kernel.density_asymptotic(p, x) if x != 0.0 else float("nan")
        rows.append([x, r, asym])
    return _table(cfg, args.format, ["x", "density", "asymptotic"], rows), f"density p={p}: {len(rows)} points"


def _miwa_from_args(args) -> tuple[schur.MiwaParams, int | None]:
    chosen = [args.miwa is not None, args.plancherel is not None, args.alpha is not None]
    if sum(chosen) != 1:
        raise UsageError("give exactly one of --miwa PATH, --plancherel THETA, --alpha ALPHA_P (with --p)")
    if args.miwa is not None:
        try:
            return schur.MiwaParams.load(args.miwa), args.p
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read Miwa document: {exc}") from None
    if args.plancherel is not None:
        return schur.MiwaParams.plancherel(float(args.plancherel)), 2
    return schur.multicritical(_need_p(args), float(args.alpha)), int(args.p)


def _cmd_schur(args, cfg):
    params, p = _miwa_from_args(args)
    body: dict[str, Any] = {
        "t": list(params.t),
        "t_tilde": list(params.t_tilde),
        "beta": params.beta,
        "alphas": [params.alpha(k) for k in range(1, max(p or 0, params.size) + 2)],
        "dynamic_range": schur.dynamic_range(params),
    }
    try:
        body["partition_function"] = schur.partition_function(params)
    except OverflowError as exc:
        body["partition_function"] = str(exc)
    if args.epsilon is not None:
        if p is None:
            raise UsageError("--epsilon needs --p for the scaling comparison")
        pts = _floats(args.points)
        if len(pts) % 2:
            raise UsageError("--points takes x1,y1,x2,y2,...")
        pairs = list(zip(pts[0::2], pts[1::2]))
        tables = []
        for eps in _floats(args.epsilon):
            tab = schur.scaling_error(p, params, eps, pairs)
            tables.append(
                {
                    "epsilon": eps,
                    "lattice": tab.lattice,
                    "scaled_kernel": tab.scaled_kernel,
                    "limit_kernel": tab.limit_kernel,
                    "error": tab.error,
                    "max_error": tab.max_error,
                    "realized_error": tab.realized_error,
                    "max_realized_error": tab.max_realized_error,
                }
            )
        body["scaling"] = tables
        summary = f"schur scaling p={p}: max errors " + ", ".join(f"{t['max_error']:.3g}" for t in tables)
    else:
        N = int(args.n)
        coeffs = schur.wave_coeffs(params, N)
        body["method"] = coeffs.method
        body["n"] = list(range(-N, N + 1))
        body["J"] = coeffs.J
        body["J_tilde"] = coeffs.J_tilde
        body["biorthonormality_defect"] = schur.biorthonormality_defect(coeffs)
        if args.points:
            pts = _floats(args.points)
            # The kernel sums need coefficients well beyond the reported range.
            reach = int(max(abs(v) for v in pts)) + 1
            scale = sum(abs(a) + abs(b) for a, b in zip(params.t, params.t_tilde))
            big = schur.wave_coeffs(params, max(N, 2 * reach + int(4 * scale) + 64))
            body["points"] = pts
            body["kernel"] = schur.kernel_matrix(big, pts)
            body["correlation"] = schur.correlation(big, pts)
        summary = f"schur: {2 * N + 1} coefficients via {coeffs.method}"
    return _report(cfg, body), summary


def _interval_from_args(args, p: int) -> fredholm.IntervalSet:
    if args.half_line is not None:
        return fredholm.IntervalSet.half_line(float(args.half_line), args.truncation)
    if args.interval is None:
        raise UsageError("give --interval a,b[,c,d...] or --half-line s")
    pts = _floats(args.interval)
    try:
        return fredholm.IntervalSet(tuple(pts))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _cmd_gap(args, cfg):
    p = _need_p(args)
    iv = _interval_from_args(args, p)
    spec = fredholm.GapProbabilitySpec(p, iv, quad_order=args.quad_order, tol=args.tol)
    res = fredholm.gap_probability(spec, with_aux=not iv.is_empty)
    body = {"F": res.F, "quad_order": res.quad_order, "delta": res.delta, "tol": args.tol}
    if res.aux is not None:
        body["endpoints"] = res.aux.endpoints
        body["H"] = res.aux.H
        body["H_resolvent"] = res.aux.H_resolvent
    return _report(cfg, body), f"gap p={p}: F={res.F:.12g} at {res.quad_order} nodes"


def _cmd_spacing(args, cfg):
    p = _need_p(args)
    if p % 2 == 0:
        raise UsageError("spacing needs an odd --p")
    s = parse_grid(args.s)
    curve = fredholm.spacing_curve(p, s, tol=args.tol)
    rows = [list(r) for r in zip(curve.s, curve.F, curve.H, curve.H_prime, curve.F_second)]
    return (
        _table(cfg, args.format, ["s", "F", "H", "H_prime", "F_second"], rows),
        f"spacing p={p}: {len(rows)} points",
    )


def _cmd_tw(args, cfg):
    p = _need_p(args)
    if p % 2 == 1:
        raise UsageError("tw needs an even --p")
    s = parse_grid(args.s)
    curve = fredholm.tw_tail(p, s, truncation=args.truncation, tol=args.tol)
    rows = [list(r) for r in zip(curve.s, curve.F, curve.q, curve.p, curve.H)]
    return _table(cfg, args.format, ["s", "F", "q", "p", "H"], rows), f"tw p={p}: {len(rows)} points"


def _cmd_ode(args, cfg):
    p = _need_p(args)
    if p % 2 == 0:
        if p not in (2, 4, 6):
            raise UsageError("the even hierarchy is provided for p = 2, 4, 6")
        s_end = -4.0 if args.s_end is None else args.s_end
        traj = painleve.solve_even_hierarchy(p, args.s0, s_end, tol=args.ode_tol, n_points=args.n_points)
    else:
        if p not in (3, 5, 7):
            raise UsageError("the coupled odd systems are provided for p = 3, 5, 7")
        s0 = 8.0 if args.s0 is None else args.s0
        s_end = 2.0 if args.s_end is None else args.s_end
        traj = painleve.solve_single_interval(p, s0, s_end, tol=args.ode_tol, n_points=args.n_points)
    ints = traj.integrals()
    # I_l exists for l <= p; missing columns are written as NaN.
    integrals = [ints[:, l] if l < ints.shape[1] else np.full(traj.s.size, np.nan) for l in (1, 2, 3)]
    columns = [traj.s, traj.q(), traj.p(), traj.u(1), traj.v(1), *integrals, painleve.hierarchy_residual(traj)]
    header = ["s", "q", "p", "u1", "v1", "I1", "I2", "I3", "residuals"]
    if traj.log_F is not None:
        columns.append(np.exp(traj.log_F))
        header.append("F")
    rows = [list(r) for r in zip(*columns)]
    extra = f"drift={traj.drift():.3g}"
    if traj.log_F is not None:
        extra += f", F({traj.s[-1]:.6g})={math.exp(traj.log_F[-1]):.10g}"
    return _table(cfg, args.format, header, rows), f"ode p={p}: {len(rows)} points, {extra}"


def _cmd_fit(args, cfg):
    p = _need_p(args)
    lo, hi = (float(v) for v in str(args.s).split(":")[:2])
    try:
        fit = fredholm.fit_exponent(p, (lo, hi), n_points=args.n_points)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    expected = 2.0 + 2.0 / p
    body = {
        "exponent": fit.exponent,
        "expected_exponent": expected,
        "C_p": fit.C,
        "s": fit.s,
        "F": fit.F,
        "tolerance": 0.15,
        "within_tolerance": abs(fit.exponent - expected) <= 0.15 and fit.C > 0,
    }
    return _report(cfg, body), f"fit p={p}: exponent={fit.exponent:.4f} (expected {expected:.4f}), C={fit.C:.4g}"


_VERIFY_TOL = {
    "pq_rel": 1e-6,
    "iom": 1e-6,
    "resolvent_cd": 1e-6,
    "hamiltonian": 1e-6,
    "closure": 1e-6,
    "dlogF": 1e-4,
    "lax_trace": 1e-6,
    "lax_hamiltonian": 1e-6,
    "parity": 1e-8,
    "even_uv": 1e-8,
}


def _cmd_verify(args, cfg):
    p = _need_p(args)
    iv = _interval_from_args(args, p)
    if iv.is_empty:
        raise UsageError("verify needs a nonempty interval set")
    res = fredholm.verify_structure(fredholm.GapProbabilitySpec(p, iv, tol=args.tol))
    checks = {
        k: {"value": v, "tolerance": _VERIFY_TOL.get(k, 1e-6), "ok": v <= _VERIFY_TOL.get(k, 1e-6)}
        for k, v in res.items()
    }
    ok = all(c["ok"] for c in checks.values())
    worst = max(res, key=lambda k: res[k] / _VERIFY_TOL.get(k, 1e-6))
    return _report(cfg, {"checks": checks, "all_ok": ok}), f"verify p={p}: {'ok' if ok else 'FAILED'} (worst {worst})"


_COMMANDS = {
    "airy": _cmd_airy,
    "kernel": _cmd_kernel,
    "density": _cmd_density,
    "schur": _cmd_schur,
    "gap": _cmd_gap,
    "spacing": _cmd_spacing,
    "tw": _cmd_tw,
    "ode": _cmd_ode,
    "fit": _cmd_fit,
    "verify": _cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with defaults for any flag")
    common.add_argument("--p", type=int, help="order of the multicritical point")
    common.add_argument("--output", "-o", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    common.add_argument("--tol", type=float, default=1e-10, help="Fredholm convergence tolerance")

    parser = argparse.ArgumentParser(prog="multicritical", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("airy", parents=[common], help="higher Airy functions on a grid")
    sp.add_argument("--z", default="-5:5:0.5", help="grid a:b:step or list")
    sp.add_argument("--k", type=int, default=0, help="derivative order")

    sp = sub.add_parser("kernel", parents=[common], help="limit kernel on a product grid")
    sp.add_argument("--x", default="-2:2:1")
    sp.add_argument("--y", default=None)

    sp = sub.add_parser("density", parents=[common], help="one-point density and its asymptotics")
    sp.add_argument("--x", default="-8:8:1")

    sp = sub.add_parser("schur", parents=[common], help="Schur-measure coefficients, kernel, scaling")
    sp.add_argument("--miwa", help='JSON document {"t": [...], "t_tilde": [...]}')
    sp.add_argument("--plancherel", type=float, help="Plancherel parameter theta")
    sp.add_argument("--alpha", type=float, help="multicritical tuning with this alpha_p (needs --p)")
    sp.add_argument("--n", type=int, default=30, help="coefficient range [-N, N]")
    sp.add_argument("--points", default=None, help="half-integers for kernel/correlation, or x,y pairs with --epsilon")
    sp.add_argument("--epsilon", default=None, help="comma list of scaling parameters")

    for name, helptext in (("gap", "gap probability of an interval set"), ("verify", "structure identities")):
        sp = sub.add_parser(name, parents=[common], help=helptext)
        sp.add_argument("--interval", help="endpoints a,b[,c,d...]")
        sp.add_argument("--half-line", type=float, help="start of [s, inf) (even p)")
        sp.add_argument("--truncation", type=float, default=None)
        if name == "gap":
            sp.add_argument("--quad-order", type=int, default=None)

    sp = sub.add_parser("spacing", parents=[common], help="symmetric-interval gap curve (odd p)")
    sp.add_argument("--s", default="0.25:3:0.25")

    sp = sub.add_parser("tw", parents=[common], help="largest-particle distribution (even p)")
    sp.add_argument("--s", default="-4:3:0.5")
    sp.add_argument("--truncation", type=float, default=None)

    sp = sub.add_parser("ode", parents=[common], help="integrate the half-line Hamiltonian system")
    sp.add_argument("--s0", type=float, default=None)
    sp.add_argument("--s-end", type=float, default=None)
    sp.add_argument("--ode-tol", type=float, default=1e-10)
    sp.add_argument("--n-points", type=int, default=61)

    sp = sub.add_parser("fit", parents=[common], help="large-gap exponent fit")
    sp.add_argument("--s", default="1:8", help="window a:b")
    sp.add_argument("--n-points", type=int, default=40)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        with open(args.config) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    if data.pop("command", args.command) != args.command:
        raise UsageError("config command does not match the subcommand")
    # Re-parse with the config as defaults so explicit flags still win.
    sub_parser = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub_parser._actions}
    unknown = sorted(set(data) - known)
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    sub_parser.set_defaults(**data)
    return parser.parse_args(argv)


def _attach_negative_values(argv: list[str]) -> list[str]:
    """Join ``--flag -1:2`` into ``--flag=-1:2`` so argparse accepts negative values."""
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        nxt = argv[i + 1] if i + 1 < len(argv) else None
        if tok.startswith("--") and "=" not in tok and nxt is not None and re.match(r"^-[\d.]", nxt):
            out.append(f"{tok}={nxt}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def run(argv: list[str] | None = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    argv = _attach_negative_values(list(sys.argv[1:] if argv is None else argv))
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    except UsageError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    options = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "config", "output")}
    cfg = RunConfig(args.command, options)
    try:
        text, summary = _COMMANDS[args.command](args, cfg)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"not converged: {exc}", file=stderr)
        return EXIT_NONCONVERGENCE
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    print(summary, file=stderr)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
