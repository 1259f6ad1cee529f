"""Flat-file serialization of profiles, limit profiles and reports.

Floats are written with 17 significant digits (CSV) or Python's shortest
round-trip repr (JSON), so reading a file back reproduces every node value
bit for bit. Payloads carry no timestamps.
"""
from __future__ import annotations

import csv
import json
import math

import numpy as np

from .bvp import Diagnostics, Profile, SolveOptions
from .limit_profiles import LimitProfile
from .params import Regime, make_params, quadratic_omega_tilde, zero_omega_tilde

SCHEMA_VERSION = 1
PROFILE_COLUMNS = ("x", "u", "v", "du", "dv", "H")
LIMIT_COLUMNS = ("x", "value", "deriv")


def omega_tilde_by_name(name: str, c0: float):
    if name == "zero":
        return zero_omega_tilde
    if name == "quadratic":
        return quadratic_omega_tilde(c0)
    raise ValueError(f"unknown omega_tilde {name!r}; choose zero or quadratic")


def _omega_tilde_name(params):
    name = params.omega_tilde_name
    return "zero" if name == "zero_omega_tilde" else name


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def profile_rows(profile: Profile) -> np.ndarray:
    H = profile.hamiltonian()
    return np.column_stack([profile.mesh, profile.u, profile.v, profile.du, profile.dv, H])


def profile_to_dict(profile: Profile, opts: SolveOptions | None = None) -> dict:
    p = profile.params
    meta = {
        "lambda": p.lam, "omega": p.omega, "c0": p.c0, "regime": p.regime.value,
        "omega_tilde": _omega_tilde_name(p), "n": profile.n, "L": profile.L,
        "tol": opts.tol if opts else None, "schema_version": SCHEMA_VERSION,
    }
    diag = {k: (_json_float(v) if isinstance(v, float) else v) for k, v in profile.diagnostics.as_dict().items()}
    return {"meta": meta, "nodes": profile_rows(profile).tolist(), "diagnostics": diag}


def profile_from_dict(data: dict) -> Profile:
    meta = data["meta"]
    if meta.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {meta.get('schema_version')!r}")
    params = make_params(meta["lambda"], meta["c0"], omega_tilde_by_name(meta.get("omega_tilde", "zero"), meta["c0"]),
                         Regime(meta["regime"]))
    nodes = np.array(data["nodes"], dtype=float)
    states = nodes[:, [1, 3, 2, 4]]
    diag_in = data.get("diagnostics") or {}
    diag = Diagnostics(**{k: (float("nan") if v is None and k != "refinement_change" else v)
                          for k, v in diag_in.items() if k in Diagnostics.__dataclass_fields__})
    return Profile(params=params, mesh=nodes[:, 0].copy(), states=np.ascontiguousarray(states),
                   phase_anchor=len(nodes) // 2, diagnostics=diag)


def write_profile(profile: Profile, path, fmt: str = "csv", opts: SolveOptions | None = None) -> None:
    if fmt == "csv":
        _write_csv(path, PROFILE_COLUMNS, profile_rows(profile))
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump(profile_to_dict(profile, opts), fh, indent=None)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def read_profile_json(path) -> Profile:
    with open(path) as fh:
        return profile_from_dict(json.load(fh))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader]
    return header, np.array(rows)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.17g}" for v in row])


def limit_to_dict(limit: LimitProfile) -> dict:
    return {
        "meta": {"kind": limit.kind.value, "c0": limit.c0, "L": limit.L, "n": len(limit.mesh),
                 "schema_version": SCHEMA_VERSION},
        "nodes": np.column_stack([limit.mesh, limit.values, limit.derivs]).tolist(),
    }


def write_limit(limit: LimitProfile, path, fmt: str = "csv") -> None:
    if fmt == "csv":
        _write_csv(path, LIMIT_COLUMNS, np.column_stack([limit.mesh, limit.values, limit.derivs]))
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump(limit_to_dict(limit), fh)
            fh.write("\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")


def equilibria_to_dict(eqs, params) -> dict:
    out = []
    for eq in eqs:
        w = eq.eigenvalues
        out.append({
            "kind": eq.kind.value,
            "u": float(eq.point[0]), "v": float(eq.point[2]),
            "eigenvalues_real": np.real(w).tolist(), "eigenvalues_imag": np.imag(w).tolist(),
        })
    return {"meta": {"lambda": params.lam, "omega": params.omega, "c0": params.c0,
                     "regime": params.regime.value, "schema_version": SCHEMA_VERSION},
            "equilibria": out}
