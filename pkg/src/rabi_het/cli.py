"""Command-line front end: ``rabi-het {equilibria,limit-profile,solve,sweep,verify}``.

Exit codes: 0 success, 1 bad input, 2 numerical failure (the failing stage
is named on standard error).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import io
from .asymptotics import run_verification
from .bvp import SolveOptions, continue_in_lambda, solve_params
from .equilibria import all_equilibria
from .errors import ParamsError, RabiHetError
from .limit_profiles import compute_phi0, compute_u0
from .params import Regime, make_params

EXIT_OK, EXIT_BAD_INPUT, EXIT_NUMERICAL = 0, 1, 2


class StageError(Exception):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")


@dataclass
class RunConfig:
    subcommand: str
    lam: float | None
    c0: list
    regime: Regime
    omega_tilde: str
    n: int
    half_length: float | None
    tol: float
    out: str | None
    fmt: str
    ladder: list

    def solve_options(self) -> SolveOptions:
        return SolveOptions(n=self.n, L=self.half_length, tol=self.tol)

    def params(self, lam=None, c0=None):
        c0 = self.c0[0] if c0 is None else c0
        lam = self.lam if lam is None else lam
        if lam is None:
            raise ParamsError("--lambda is required")
        return make_params(lam, c0, io.omega_tilde_by_name(self.omega_tilde, c0), self.regime)


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _half_length(text):
    if text == "auto":
        return None
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--half-length takes a number or 'auto'") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=None)
    common.add_argument("--c0", type=_float_list, default=[0.25], help="c0, or a comma list for sweep")
    common.add_argument("--regime", choices=["strong", "weak"], default="strong")
    common.add_argument("--omega-tilde", choices=["zero", "quadratic"], default="zero")
    common.add_argument("--n", type=int, default=2049)
    common.add_argument("--half-length", type=_half_length, default=None, help="number or 'auto'")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--out", default=None)
    common.add_argument("--format", dest="fmt", choices=["csv", "json"], default=None)
    common.add_argument("--ladder", type=_float_list, default=None, help="comma-separated lambda values")

    parser = argparse.ArgumentParser(prog="rabi-het", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("equilibria", parents=[common], help="list equilibria and spectra")
    sub.add_parser("limit-profile", parents=[common], help="compute u0 (strong) or phi0 (weak)")
    sub.add_parser("solve", parents=[common], help="one boundary-value solve")
    sub.add_parser("sweep", parents=[common], help="continuation over a lambda ladder")
    sub.add_parser("verify", parents=[common], help="run the rate-verification pipeline")
    return parser


def parse_config(argv=None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    fmt = ns.fmt or ("json" if ns.subcommand in ("verify", "equilibria") else "csv")
    return RunConfig(subcommand=ns.subcommand, lam=ns.lam, c0=ns.c0, regime=Regime(ns.regime),
                     omega_tilde=ns.omega_tilde, n=ns.n, half_length=ns.half_length, tol=ns.tol,
                     out=ns.out, fmt=fmt, ladder=ns.ladder or [])


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except ParamsError:
        raise
    except RabiHetError as exc:
        raise StageError(name, exc) from exc


def _emit_json(data, out):
    text = json.dumps(data, indent=2, sort_keys=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _cmd_equilibria(cfg):
    params = cfg.params()
    eqs = _stage("equilibria", all_equilibria, params)
    if cfg.out:
        _emit_json(io.equilibria_to_dict(eqs, params), cfg.out)
    for eq in eqs:
        u, v = eq.uv
        print(f"{eq.kind.value:<11s} ({u:.10f}, {v:.10f})  eig: "
              + " ".join(f"{complex(w):.6g}" for w in eq.eigenvalues))


def _cmd_limit(cfg):
    c0 = cfg.c0[0]
    fn = compute_u0 if cfg.regime is Regime.STRONG else compute_phi0
    limit = _stage("limit-profile", fn, c0, cfg.half_length, cfg.n)
    if cfg.out:
        io.write_limit(limit, cfg.out, cfg.fmt)
    print(f"{limit.kind.value}: c0={c0} L={limit.L:.6g} n={len(limit.mesh)} "
          f"symmetry_residual={limit.symmetry_residual():.3e}")


def _cmd_solve(cfg):
    params = cfg.params()
    opts = cfg.solve_options()
    prof = _stage("solve", solve_params, params, opts)
    if cfg.out:
        io.write_profile(prof, cfg.out, cfg.fmt, opts)
    d = prof.diagnostics
    print(f"solved lambda={params.lam} c0={params.c0} regime={params.regime.value}: "
          f"n={prof.n} L={prof.L:.6g} newton_iters={d.newton_iters} residual={d.final_residual:.3e} "
          f"max|H|={d.hamiltonian_drift:.3e}")


def _sweep_one(cfg, c0):
    opts = cfg.solve_options()
    path = [cfg.params(lam=lam, c0=c0) for lam in cfg.ladder]
    return c0, continue_in_lambda(path, opts)


def _cmd_sweep(cfg):
    if not cfg.ladder:
        raise ParamsError("sweep needs --ladder")
    for c0 in cfg.c0:
        for lam in cfg.ladder:
            cfg.params(lam=lam, c0=c0)
    threads = max(1, int(os.environ.get("RABI_HET_THREADS", "1")))
    if threads > 1 and len(cfg.c0) > 1:
        with ProcessPoolExecutor(max_workers=min(threads, len(cfg.c0))) as pool:
            futures = [pool.submit(_sweep_one, cfg, c0) for c0 in cfg.c0]
            results = [_stage("sweep", f.result) for f in futures]
    else:
        results = [_stage("sweep", _sweep_one, cfg, c0) for c0 in cfg.c0]
    opts = cfg.solve_options()
    for c0, profiles in results:
        for prof in profiles:
            d = prof.diagnostics
            print(f"c0={c0} lambda={prof.params.lam} newton_iters={d.newton_iters} "
                  f"max|H|={d.hamiltonian_drift:.3e}")
            if cfg.out:
                base = Path(cfg.out)
                path = base.with_name(f"{base.stem}_c0={c0:g}_lambda={prof.params.lam:g}.{cfg.fmt}")
                io.write_profile(prof, path, cfg.fmt, opts)


def _cmd_verify(cfg):
    c0 = cfg.c0[0]
    kwargs = {}
    if cfg.ladder:
        key = "strong_lams" if cfg.regime is Regime.STRONG else "weak_lams"
        kwargs[key] = tuple(cfg.ladder)
    opts = SolveOptions(n=cfg.n, L=cfg.half_length, tol=cfg.tol)
    ot = io.omega_tilde_by_name(cfg.omega_tilde, c0) if cfg.omega_tilde != "zero" else None
    report = _stage("verify", run_verification, c0, opts=opts, omega_tilde=ot, **kwargs)
    _emit_json(report, cfg.out)
    failed = [r["estimate_id"] for r in report["records"] if not r["pass"]]
    if failed:
        raise StageError("verify", f"{len(failed)} estimate(s) failed: {', '.join(failed)}")


COMMANDS = {
    "equilibria": _cmd_equilibria,
    "limit-profile": _cmd_limit,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def run(config: RunConfig) -> int:
    try:
        COMMANDS[config.subcommand](config)
    except (ParamsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except StageError as exc:
        print(f"numerical failure in stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return EXIT_BAD_INPUT if exc.code else EXIT_OK
    return run(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
