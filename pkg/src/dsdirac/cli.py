"""Command-line front end.

Every run writes its outputs plus ``manifest.json`` into ``--out``.  Exit
codes: 0 success, 1 verification failure, 2 configuration error, 3
numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import boundary_coefficients, flat_fundamental_values
from .checks import SUITES, run_suites
from .errors import DsDiracError, PreconditionError
from .hadamard import singularity_exponents, two_point_scalars
from .integrate import CSV_HEADER, integrate
from .io import complex_pair, write_csv, write_json
from .modes import (
    CLOSED,
    CLOSED_PHASE_STRIPPED,
    CLOSED_T,
    FLAT,
    FLAT_CONFORMAL,
    FLAT_COSMOLOGICAL,
    FLAT_PHASE_STRIPPED,
    ModeParams,
)
from .signature import (
    boundary_term,
    project_negative,
    signature_closed_form,
    signature_literal_printed,
    signature_numeric,
    smear_decay_exponent,
    verify_mass_identity,
)

__all__ = ["main", "parse_grid", "build_parser", "ConfigError"]

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(Exception):
    """Invalid command-line or config-file input."""


# ------------------------------------------------------------------ parsing


def parse_grid(text) -> list[float]:
    """``a,b,c`` | ``start:end:count`` (linear, inclusive) | ``geom:start:end:count``."""
    if isinstance(text, (int, float)):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    text = str(text).strip()
    if not text:
        return []
    try:
        if text.startswith("geom:"):
            start, end, count = text[5:].split(":")
            start, end, n = float(start), float(end), int(count)
            if start == 0 or end == 0 or (start > 0) != (end > 0):
                raise ConfigError(f"geometric grid needs same-sign nonzero ends: {text!r}")
            if n < 1:
                raise ConfigError(f"grid count must be positive: {text!r}")
            return [float(x) for x in np.geomspace(start, end, n)]
        if ":" in text:
            start, end, count = text.split(":")
            n = int(count)
            if n < 1:
                raise ConfigError(f"grid count must be positive: {text!r}")
            return [float(x) for x in np.linspace(float(start), float(end), n)]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}: {exc}") from None


def _vector3(text) -> tuple[float, float, float]:
    vals = parse_grid(text)
    if len(vals) != 3:
        raise ConfigError(f"k needs three components, got {text!r}")
    return tuple(vals)


def _spin(text) -> int:
    s = str(text).strip()
    if s in ("+1", "1", "+"):
        return 1
    if s in ("-1", "-"):
        return -1
    raise ConfigError(f"spin must be +1 or -1, got {text!r}")


DEFAULTS = {
    "common": {"out": ".", "format": "csv", "threads": os.cpu_count() or 1,
               "tol_rel": 1e-10, "tol_abs": 1e-12},
    "solve-mode": {"slicing": CLOSED, "m": 1.0, "lambda": 1.5, "k": "1,0,0", "s": "+1",
                   "chart": None, "t0": None, "t1": None, "u0": "1,0,0,0"},
    "signature": {"m": "0.5,1,2", "lambda": "1.5,-1.5,2.5,-2.5", "t_extract": 30.0},
    "twopoint": {"m": 1.0, "radius": 1.0, "z": "0:0.999:200", "z_fit": None},
    "boundary": {"m": 1.0, "m_prime": 1.2, "lambda": 1.0, "tau": "-1e2,-1e3,-1e4",
                 "t_grid": "-5:5:21"},
    "smear": {"lambda": 1.0, "interval": "1,2", "t": "10,20,40,80", "n": 32},
    "verify": {"suite": "all"},
}


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    common = argparse.ArgumentParser(add_help=False, argument_default=S, allow_abbrev=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flag names")
    common.add_argument("--out", help="output directory (default: current directory)")
    common.add_argument("--format", choices=("csv", "json"), help="table format")
    common.add_argument("--threads", type=int, help="worker processes for grid sweeps")
    common.add_argument("--tol-rel", dest="tol_rel", type=float, help="integrator relative tolerance")
    common.add_argument("--tol-abs", dest="tol_abs", type=float, help="integrator absolute tolerance")

    p = argparse.ArgumentParser(prog="dsdirac", description="Dirac modes on de Sitter space",
                                parents=[common], argument_default=S, allow_abbrev=False)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sm = sub.add_parser("solve-mode", parents=[common], argument_default=S, allow_abbrev=False,
                        help="integrate one mode and write its trajectory")
    sm.add_argument("--slicing", choices=(CLOSED, FLAT))
    sm.add_argument("--m", type=float)
    sm.add_argument("--lambda", dest="lambda", type=float, help="closed-slicing eigenvalue")
    sm.add_argument("--k", help="flat momentum, e.g. 1,0,0")
    sm.add_argument("--s", help="flat spin label +1 or -1")
    sm.add_argument("--chart", choices=("cosmological", "conformal", "phase-stripped", "closed"),
                    help="time variable (flat: cosmological|conformal|phase-stripped; "
                         "closed: closed|phase-stripped)")
    sm.add_argument("--t0", type=float)
    sm.add_argument("--t1", type=float)
    sm.add_argument("--u0", help="initial amplitude re1,im1,re2,im2")

    sg = sub.add_parser("signature", parents=[common], argument_default=S, allow_abbrev=False,
                        help="closed-slicing signature matrices over a mode grid")
    sg.add_argument("--m", help="mass grid")
    sg.add_argument("--lambda", dest="lambda", help="lambda list")
    sg.add_argument("--t-extract", dest="t_extract", type=float)

    tp = sub.add_parser("twopoint", parents=[common], argument_default=S, allow_abbrev=False,
                        help="two-point scalars f, h and their singularity exponents")
    tp.add_argument("--m", type=float)
    tp.add_argument("--radius", type=float)
    tp.add_argument("--z", help="Z grid within [0, 0.999]")
    tp.add_argument("--z-fit", dest="z_fit", help="Z grid for the exponent fit")

    bd = sub.add_parser("boundary", parents=[common], argument_default=S, allow_abbrev=False,
                        help="flat past-boundary coefficients, boundary term, mass identity")
    bd.add_argument("--m", type=float)
    bd.add_argument("--m-prime", dest="m_prime", type=float)
    bd.add_argument("--lambda", dest="lambda", type=float)
    bd.add_argument("--tau", help="conformal extraction times")
    bd.add_argument("--t-grid", dest="t_grid", help="times for the mass identity")

    sr = sub.add_parser("smear", parents=[common], argument_default=S, allow_abbrev=False,
                        help="mass-smeared amplitude and its decay exponent")
    sr.add_argument("--lambda", dest="lambda", type=float)
    sr.add_argument("--interval", help="mass interval m_L,m_R")
    sr.add_argument("--t", help="times")
    sr.add_argument("--n", type=int, help="initial Gauss-Legendre order")

    vf = sub.add_parser("verify", parents=[common], argument_default=S, allow_abbrev=False,
                        help="run verification suites")
    vf.add_argument("--suite", choices=tuple(SUITES) + ("all",))
    return p


def effective_config(ns: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    given = vars(ns).copy()
    cmd = given.pop("command")
    cfg = {**DEFAULTS["common"], **DEFAULTS[cmd]}
    path = given.pop("config", None)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        unknown = set(data) - set(cfg) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update({k: v for k, v in data.items() if k != "command"})
    cfg.update(given)
    cfg["command"] = cmd
    if path is not None:
        cfg["config"] = str(path)
    return cfg


# ------------------------------------------------------------------ helpers


def _ordered_map(fn, items, threads: int):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))


def _check_tols(cfg) -> tuple[float, float]:
    r, a = float(cfg["tol_rel"]), float(cfg["tol_abs"])
    for name, v in (("tol-rel", r), ("tol-abs", a)):
        if not 1e-14 <= v <= 1e-2:
            raise ConfigError(f"--{name} must lie in [1e-14, 1e-2], got {v}")
    return r, a


def _matrix(e) -> list:
    return [[complex_pair(x) for x in row] for row in np.asarray(e)]


# ---------------------------------------------------------------- commands


def cmd_solve_mode(cfg, out: Path, manifest) -> int:
    rel, abs_ = _check_tols(cfg)
    if cfg["t0"] is None or cfg["t1"] is None:
        raise ConfigError("solve-mode needs --t0 and --t1")
    t0, t1 = float(cfg["t0"]), float(cfg["t1"])
    if t0 == t1:
        raise ConfigError("t0 and t1 must differ (empty integration interval)")
    u = parse_grid(cfg["u0"])
    if len(u) != 4:
        raise ConfigError("--u0 needs four numbers re1,im1,re2,im2")
    u0 = np.array([complex(u[0], u[1]), complex(u[2], u[3])])
    if cfg["slicing"] == CLOSED:
        p = ModeParams.closed(float(cfg["m"]), float(cfg["lambda"]))
        chart = cfg["chart"] or "closed"
        systems = {"closed": CLOSED_T, "phase-stripped": CLOSED_PHASE_STRIPPED}
    else:
        p = ModeParams.flat(float(cfg["m"]), _vector3(cfg["k"]), _spin(cfg["s"]))
        chart = cfg["chart"] or "cosmological"
        systems = {"cosmological": FLAT_COSMOLOGICAL, "conformal": FLAT_CONFORMAL,
                   "phase-stripped": FLAT_PHASE_STRIPPED}
    if chart not in systems:
        raise ConfigError(f"chart {chart!r} is not available for {cfg['slicing']} slicing")
    if systems[chart] == FLAT_CONFORMAL and (t0 >= 0 or t1 >= 0):
        raise ConfigError("the conformal chart needs t0, t1 < 0")
    traj = integrate(systems[chart], p, u0, t0, t1, rel, abs_)
    manifest["tasks"].append({"name": "integrate", "status": "ok", "steps": traj.stats})
    if cfg["format"] == "json":
        path = out / "trajectory.json"
        write_json(path, {"system": traj.system, "columns": list(CSV_HEADER),
                          "rows": [[float(t), *complex_pair(s[0]), *complex_pair(s[1])]
                                   for t, s in zip(traj.times, traj.states)]})
    else:
        path = out / "trajectory.csv"
        traj.to_csv(path)
    manifest["outputs"].append(path.name)
    return EXIT_OK


def _signature_record(args) -> dict:
    m, lam, T, rel, abs_ = args
    rec = {"m": m, "lambda": lam, "source": "numeric"}
    try:
        p = ModeParams.closed(m, lam)
        sp, sm, st = signature_numeric(p, T, rel_tol=rel, abs_tol=abs_)
        cf = signature_closed_form(p)
        dev = float(np.abs(st.entries - cf.entries).max())
        rec.update({
            "status": "ok",
            "entries": _matrix(st.entries),
            "eigenvalues": [float(x) for x in st.eigenvalues()],
            "max_deviation": dev,
            "S_plus": _matrix(sp.entries),
            "S_minus": _matrix(sm.entries),
            "projector": _matrix(project_negative(st)),
            "closed_form": {"source": "closed-form", "entries": _matrix(cf.entries),
                            "eigenvalues": [float(x) for x in cf.eigenvalues()]},
            "literal_offdiagonal_deviation": float(
                np.abs(st.entries - signature_literal_printed(p)).max()),
        })
    except DsDiracError as exc:
        rec.update({"status": "failed", "error": f"{type(exc).__name__}: {exc}"})
    return rec


def cmd_signature(cfg, out: Path, manifest) -> int:
    rel, abs_ = _check_tols(cfg)
    ms = parse_grid(cfg["m"])
    lams = parse_grid(cfg["lambda"])
    if not ms or not lams:
        raise ConfigError("mass and lambda lists must be non-empty")
    for m in ms:
        for lam in lams:
            ModeParams.closed(m, lam)  # validate the whole grid before computing
    T = float(cfg["t_extract"])
    jobs = [(m, lam, T, rel, abs_) for m in ms for lam in lams]
    records = _ordered_map(_signature_record, jobs, int(cfg["threads"]))
    path = out / "signature.json"
    write_json(path, records)
    manifest["outputs"].append(path.name)
    failed = [r for r in records if r["status"] != "ok"]
    for r in records:
        manifest["tasks"].append({"name": f"signature m={r['m']} lambda={r['lambda']}",
                                  "status": r["status"],
                                  "max_deviation": r.get("max_deviation")})
    return EXIT_NUMERIC if failed else EXIT_OK


def cmd_twopoint(cfg, out: Path, manifest) -> int:
    Z = parse_grid(cfg["z"])
    if not Z:
        raise ConfigError("empty Z grid")
    if min(Z) < 0 or max(Z) > 0.999:
        raise ConfigError(f"Z grid must lie within [0, 0.999], got [{min(Z)}, {max(Z)}]")
    m, R = float(cfg["m"]), float(cfg["radius"])
    if not (m > 0 and R > 0):
        raise ConfigError("m and radius must be positive")
    vals = [two_point_scalars(z, m, R) for z in Z]
    rows = [[v.Z, v.f.real, v.f.imag, v.h.real, v.h.imag] for v in vals]
    header = ["Z", "re_f", "im_f", "re_h", "im_h"]
    if cfg["format"] == "json":
        path = out / "twopoint.json"
        write_json(path, {"columns": header, "rows": rows})
    else:
        path = out / "twopoint.csv"
        write_csv(path, header, rows)
    manifest["outputs"].append(path.name)
    zfit = None if cfg["z_fit"] is None else parse_grid(cfg["z_fit"])
    fit = singularity_exponents(m, R, zfit)
    epath = out / "exponents.json"
    write_json(epath, {"m": m, "radius": R, "p_f": fit.p_f, "p_h": fit.p_h,
                       "fit_residuals": {"f": fit.residual_f, "h": fit.residual_h}})
    manifest["outputs"].append(epath.name)
    manifest["tasks"].append({"name": "twopoint", "status": "ok"})
    return EXIT_OK


def cmd_boundary(cfg, out: Path, manifest) -> int:
    m, mp_, lam = float(cfg["m"]), float(cfg["m_prime"]), float(cfg["lambda"])
    taus = parse_grid(cfg["tau"])
    tg = parse_grid(cfg["t_grid"])
    if not taus or any(t >= 0 for t in taus):
        raise ConfigError("--tau needs negative conformal times")
    if m == mp_:
        raise ConfigError("the mass identity needs m != m'")
    if lam == 0:
        raise ConfigError("the boundary phase needs lambda != 0")
    rel, abs_ = _check_tols(cfg)
    p, q = ModeParams.flat_lambda(m, lam), ModeParams.flat_lambda(mp_, lam)
    u = flat_fundamental_values(p, taus, chart="conformal", rel_tol=rel, abs_tol=abs_)
    v = flat_fundamental_values(q, taus, chart="conformal", rel_tol=rel, abs_tol=abs_)
    rows = []
    for tau, a, b in zip(taus, u, v):
        g, gt = boundary_coefficients(tau, a, p), boundary_coefficients(tau, b, q)
        B = boundary_term(g, gt, (p, q)).value
        rows.append({"tau": tau, "g": [complex_pair(x) for x in g],
                     "g_tilde": [complex_pair(x) for x in gt], "boundary_term": complex_pair(B),
                     "inner_product": complex_pair(np.vdot(a, b))})
    rep = verify_mass_identity(p, mp_, tg)
    path = out / "boundary.json"
    write_json(path, {"m": m, "m_prime": mp_, "lambda": lam, "extractions": rows,
                      "mass_identity": {"t": list(map(float, rep.t_grid)),
                                        "residual": list(map(float, rep.residuals)),
                                        "max_residual": rep.max_residual}})
    manifest["outputs"].append(path.name)
    manifest["tasks"].append({"name": "boundary", "status": "ok",
                              "max_residual": rep.max_residual})
    return EXIT_OK


def cmd_smear(cfg, out: Path, manifest) -> int:
    iv = parse_grid(cfg["interval"])
    if len(iv) != 2 or not (0 < iv[0] < iv[1]):
        raise ConfigError("--interval must be m_L,m_R with 0 < m_L < m_R")
    ts = parse_grid(cfg["t"])
    if len(ts) < 2:
        raise ConfigError("the decay fit needs at least two times")
    slope, res = smear_decay_exponent(float(cfg["lambda"]), tuple(iv), ts, n=int(cfg["n"]))
    header = ["t", "re_u1", "im_u1", "re_u2", "im_u2", "norm"]
    rows = [[float(t), u[0].real, u[0].imag, u[1].real, u[1].imag, float(np.linalg.norm(u))]
            for t, u in zip(res.times, res.values)]
    if cfg["format"] == "json":
        path = out / "smear.json"
        write_json(path, {"columns": header, "rows": rows})
    else:
        path = out / "smear.csv"
        write_csv(path, header, rows)
    fpath = out / "smear_fit.json"
    write_json(fpath, {"lambda": float(cfg["lambda"]), "interval": iv, "decay_exponent": slope,
                       "quadrature_error": res.quadrature_error, "nodes": res.n})
    manifest["outputs"] += [path.name, fpath.name]
    manifest["tasks"].append({"name": "smear", "status": "ok", "decay_exponent": slope})
    return EXIT_OK


def cmd_verify(cfg, out: Path, manifest) -> int:
    suite = cfg["suite"]
    names = list(SUITES) if suite == "all" else [suite]
    if any(n not in SUITES for n in names):
        raise ConfigError(f"unknown suite {suite!r}")
    checks, timing = run_suites(names)
    manifest["checks"] = [c.record() for c in checks]
    manifest["timing"].update({f"suite:{k}": v for k, v in timing.items()})
    failed = [c for c in checks if not c.passed and not c.informational]
    for c in checks:
        mark = "PASS" if c.passed else ("INFO" if c.informational else "FAIL")
        bounds = f"[{c.lower}, {c.upper}]" if c.lower is not None else f"<= {c.upper}"
        print(f"{mark} {c.suite}/{c.name}: {c.measured:.6e} {bounds}")
    print(f"{len(failed)} of {len(checks)} checks failed")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "solve-mode": cmd_solve_mode,
    "signature": cmd_signature,
    "twopoint": cmd_twopoint,
    "boundary": cmd_boundary,
    "smear": cmd_smear,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = effective_config(ns)
    except ConfigError as exc:
        print(f"dsdirac: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"tool": "dsdirac", "version": __version__, "command": cfg["command"],
                "config": {k: v for k, v in cfg.items() if k != "threads"},
                "status": "running", "outputs": [], "tasks": [], "checks": [], "timing": {}}
    start = time.perf_counter()
    code = EXIT_NUMERIC
    try:
        code = COMMANDS[cfg["command"]](cfg, out, manifest)
        manifest["status"] = {EXIT_OK: "ok", EXIT_VERIFY: "verification failed",
                              EXIT_NUMERIC: "numerical failure"}[code]
    except (ConfigError, PreconditionError) as exc:
        code = EXIT_CONFIG
        manifest["status"] = "config error"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        print(f"dsdirac: error: {exc}", file=sys.stderr)
    except (DsDiracError, ArithmeticError) as exc:
        code = EXIT_NUMERIC
        manifest["status"] = "numerical failure"
        manifest["error"] = f"{type(exc).__name__}: {exc}"
        print(f"dsdirac: numerical failure: {exc}", file=sys.stderr)
    except Exception:
        manifest["status"] = "internal error"
        manifest["error"] = traceback.format_exc(limit=3)
        raise
    finally:
        manifest["timing"]["wall_seconds"] = time.perf_counter() - start
        manifest["exit_code"] = code
        write_json(out / "manifest.json", manifest)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
