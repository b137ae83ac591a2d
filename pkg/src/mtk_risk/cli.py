"""Command-line entry point.

Every command prints one JSON envelope on stdout::

    {"status": "ok", "payload": {...}, "config": {...}, "version": "0.1.0"}

with exit codes ok=0, config_error=1, domain_error=2, numeric_error=3.  On
failure a JSON error object is also written to stderr.  Matrices and series
go to the files named by ``--out``.

Scenario files list one command per line, written exactly as on the command
line (``pwf eval --family tk --gamma 0.61 --p 0.2``); blank lines and lines
starting with ``#`` are ignored.
"""

from __future__ import annotations

import argparse
import json
import math
import shlex
import sys
import warnings
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from . import dirichlet as dl
from . import ergodic, geometry, kernel, matrix_io, pwf, riskops
from .errors import ConfigError, MTKRiskError

__all__ = ["dispatch", "run_scenario", "build_parser", "main"]

EXIT_CODES = {"ok": 0, "config_error": 1, "domain_error": 2, "numeric_error": 3}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# -- argument types -----------------------------------------------------------


def _prob(s: str) -> float:
    v = float(s)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {s}")
    return v


def _floats(s: str) -> list[float]:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _pair(s: str) -> tuple[float, float]:
    v = _floats(s)
    if len(v) != 2:
        raise argparse.ArgumentTypeError(f"expected two comma-separated numbers, got {s!r}")
    return v[0], v[1]


def _pos_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _pstar(s: str):
    if s == "auto":
        return s
    v = float(s)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"pstar must be 'auto' or lie in (0, 1), got {s}")
    return v


# -- shared option groups -----------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False, allow_abbrev=False)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    return p


def _pwf_opts() -> argparse.ArgumentParser:
    p = _Parser(add_help=False, allow_abbrev=False)
    p.add_argument("--family", choices=("identity", "prelec", "tk", "tabulated"), default="prelec")
    p.add_argument("--gamma", type=float, default=0.65)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--table", help="two-column (p, w) CSV for the tabulated family")
    return p


def _make_pwf(a) -> pwf.WeightingFunctionSpec:
    if a.family == "identity":
        return pwf.WeightingFunctionSpec.identity()
    if a.family == "prelec":
        return pwf.WeightingFunctionSpec.prelec(a.gamma, a.beta)
    if a.family == "tk":
        return pwf.WeightingFunctionSpec.tk(a.gamma)
    if not a.table:
        raise ConfigError("--table is required for the tabulated family")
    return pwf.load_tabulated_csv(a.table)


def _utility_opts() -> argparse.ArgumentParser:
    p = _Parser(add_help=False, allow_abbrev=False)
    p.add_argument("--utility", choices=("cara", "crra", "linear", "tkvalue"), required=True)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--alpha-g", type=float, default=0.88)
    p.add_argument("--beta-l", type=float, default=0.88)
    p.add_argument("--lambda", dest="lam", type=float, default=2.25)
    p.add_argument("--fd", action="store_true", help="use finite-difference derivatives")
    p.add_argument("--x", type=float, required=True)
    return p


def _make_utility(a) -> riskops.UtilitySampler:
    u = {
        "cara": lambda: riskops.UtilitySampler.cara(a.a),
        "crra": lambda: riskops.UtilitySampler.crra(a.rho),
        "linear": riskops.UtilitySampler.linear,
        "tkvalue": lambda: riskops.UtilitySampler.tk_value(a.alpha_g, a.beta_l, a.lam),
    }[a.utility]()
    return u.with_finite_differences() if a.fd else u


def _curve_opts() -> argparse.ArgumentParser:
    p = _Parser(add_help=False, allow_abbrev=False)
    p.add_argument("--curve", choices=("circle", "helix", "line", "tabulated"), required=True)
    p.add_argument("--r", type=float, default=1.0)
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--b", type=float, default=1.0)
    p.add_argument("--direction", type=_floats, default=[1.0, 0.0, 0.0])
    p.add_argument("--file", help="CSV of t, x, y, z for the tabulated curve")
    p.add_argument("--fd-step", type=float, help="switch to finite differences with this step")
    p.add_argument("--t", type=float, required=True)
    return p


def _make_curve(a) -> geometry.CurveSampler:
    if a.curve == "circle":
        c = geometry.CurveSampler.circle(a.r)
    elif a.curve == "helix":
        c = geometry.CurveSampler.helix(a.a, a.b)
    elif a.curve == "line":
        c = geometry.CurveSampler.line(a.direction)
    else:
        if not a.file:
            raise ConfigError("--file is required for a tabulated curve")
        c = geometry.load_curve_csv(a.file)
    return c.with_finite_differences(a.fd_step) if a.fd_step is not None else c


def _domain_opts() -> argparse.ArgumentParser:
    p = _Parser(add_help=False, allow_abbrev=False)
    p.add_argument("--domain", choices=("disk", "rectangle", "annulus"), default="disk")
    p.add_argument("--center", type=_pair, default=(0.0, 0.0))
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--lo", type=_pair, default=(0.0, 0.0))
    p.add_argument("--hi", type=_pair, default=(1.0, 1.0))
    p.add_argument("--r-in", type=float, default=0.5)
    p.add_argument("--r-out", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=dl.DEFAULT_DELTA)
    p.add_argument("--boundary", choices=("constant", "cos", "sin", "tkvalue"), required=True)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--alpha", type=float, default=0.88)
    p.add_argument("--beta", type=float, default=0.88)
    p.add_argument("--lambda", dest="lam", type=float, default=2.25)
    p.add_argument("--axis", type=_pair, default=(1.0, 0.0))
    p.add_argument("--paths", type=_pos_int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_pos_int)
    return p


def _make_domain(a) -> tuple[dl.DomainSpec, dl.BoundaryData]:
    if a.domain == "disk":
        dom = dl.DomainSpec.disk(a.center, a.radius, a.delta)
    elif a.domain == "rectangle":
        dom = dl.DomainSpec.rectangle(a.lo, a.hi, a.delta)
    else:
        dom = dl.DomainSpec.annulus(a.center, a.r_in, a.r_out, a.delta)
    phi = {
        "constant": lambda: dl.BoundaryData.constant(a.c),
        "cos": lambda: dl.BoundaryData.cos_harmonic(a.k),
        "sin": lambda: dl.BoundaryData.sin_harmonic(a.k),
        "tkvalue": lambda: dl.BoundaryData.tk_value(a.alpha, a.beta, a.lam, a.axis),
    }[a.boundary]()
    return dom, phi


# -- command handlers ---------------------------------------------------------


def _pwf_eval(a):
    w = _make_pwf(a)
    v = w(a.p)
    return {"value": v, "diagnostics": {"pwf": w.describe(), "gap": v - a.p}}


def _pwf_fixed_point(a):
    w = _make_pwf(a)
    ps = pwf.fixed_point(w)
    return {"value": ps, "diagnostics": {"pwf": w.describe(), "residual": w(ps) - ps}}


def _pwf_partition(a):
    if len(a.centers) != len(a.half_widths):
        raise ConfigError("--centers and --half-widths must have the same length")
    part = pwf.build_partition(a.centers, a.half_widths, a.grid)
    if a.out:
        header = ["p"] + [f"w{i + 1}" for i in range(len(a.centers))] + ["sum"]
        rows = (
            [p, *wi, s]
            for p, wi, s in zip(part.grid, part.weights.T, part.weights.sum(axis=0))
        )
        matrix_io.write_table(a.out, header, rows)
    return {
        "value": part.max_deviation,
        "diagnostics": {"pieces": len(a.centers), "strictly_fractional": part.strictly_fractional, "out": a.out},
    }


def _matrix_payload(M, out, pstar=None, extra=None):
    d = {"rows": int(M.shape[0]), "cols": int(M.shape[1]), "max_abs": float(np.max(np.abs(M))) if M.size else 0.0}
    if pstar is not None:
        d["pstar"] = pstar
    if out:
        matrix_io.write_matrix(out, M, pstar)
        d["out"] = out
    else:
        d["entries"] = M.tolist()
    d.update(extra or {})
    return d


def _kernel_build(a):
    w = _make_pwf(a)
    K = kernel.build_kernel_matrix(
        w, a.loss_n, a.gain_n, p_star=a.pstar, quadrature=a.quad, quad_points=a.quad_points, scale=a.scale
    )
    return _matrix_payload(K.entries, a.out, K.p_star, {"quadrature": K.quadrature.value, "quad_points": K.quad_points})


def _kernel_adjoint(a):
    M, ps = matrix_io.read_matrix(a.inp)
    return _matrix_payload(kernel.behavioral_adjoint(M), a.out, ps)


def _kernel_composite(a):
    M, ps = matrix_io.read_matrix(a.inp)
    return _matrix_payload(kernel.composite_T(M), a.out, ps)


def _kernel_spectrum(a):
    M, _ = matrix_io.read_matrix(a.inp)
    return kernel.spectrum(M).to_dict()


def _initial_vector(spec: str, d: int, seed: int) -> np.ndarray:
    if spec == "random":
        return np.random.default_rng(seed).standard_normal(d)
    if spec.startswith("e") and spec[1:].isdigit():
        k = int(spec[1:])
        if not 1 <= k <= d:
            raise ConfigError(f"basis vector {spec} out of range for dimension {d}")
        f = np.zeros(d)
        f[k - 1] = 1.0
        return f
    v = np.array(_floats(spec))
    if v.size != d:
        raise ConfigError(f"f0 has {v.size} components, operator has dimension {d}")
    return v


def _ergodic_orbit(a):
    T, _ = matrix_io.read_matrix(a.T)
    f0 = _initial_vector(a.f0, T.shape[1], a.seed)
    rec = ergodic.orbit(T, f0, a.steps)
    s = float(np.linalg.norm(T, 2))
    bound_ok = bool(np.all(rec.norms <= s ** np.arange(rec.norms.size) * rec.norms[0] + 1e-9))
    if a.out:
        header = ["step", "norm"] + [f"f{i}" for i in range(T.shape[1])]
        matrix_io.write_table(a.out, header, ([j, n, *f] for j, (n, f) in enumerate(zip(rec.norms, rec.iterates))))
    return {
        "steps": rec.steps,
        "final_norm": float(rec.norms[-1]),
        "spectral_norm": s,
        "norm_bound_holds": bound_ok,
        "time_average": rec.time_average.tolist(),
        "out": a.out,
    }


def _ergodic_birkhoff(a):
    T, _ = matrix_io.read_matrix(a.T)
    f0 = _initial_vector(a.f0, T.shape[1], a.seed)
    return ergodic.birkhoff_check(T, f0, a.steps).to_dict()


def _ergodic_phase(a):
    w = _make_pwf(a)
    pp = ergodic.phase_portrait(w, a.grid)
    if a.out:
        matrix_io.write_table(a.out, ["p", "w", "gap"], pp.rows())
    return {"grid": a.grid, "crossings": [list(c) for c in pp.crossings], "out": a.out}


def _geometry_frenet(a):
    return geometry.frenet(_make_curve(a), a.t).to_dict()


def _geometry_spin(a):
    return {"spin": geometry.spin_vector(_make_curve(a), a.t).tolist()}


def _geometry_gauss(a):
    factories = {"saddle": geometry.SurfaceSampler.saddle, "paraboloid": geometry.SurfaceSampler.paraboloid, "plane": geometry.SurfaceSampler.plane}
    if a.surface not in factories:
        raise ConfigError(f"unknown surface {a.surface!r}; choose from {sorted(factories)}")
    return geometry.gauss_curvature(factories[a.surface](), a.at).to_dict()


def _risk_arrow_pratt(a):
    return {"value": riskops.arrow_pratt(_make_utility(a), a.x)}


def _risk_prudence(a):
    return {"value": riskops.prudence(_make_utility(a), a.x)}


def _risk_torsion(a):
    t = riskops.risk_torsion(_make_utility(a), a.x)
    return {"ra": t.ra, "rs": t.rs, "torsion": t.torsion}


def _pair_from(a) -> riskops.InfinitesimalPair:
    if len(a.alpha) != len(a.beta):
        raise ConfigError("--alpha and --beta must have the same length")
    return riskops.InfinitesimalPair(np.array(a.alpha), np.array(a.beta), a.r)


def _risk_structure(a):
    return riskops.structure_constants(_pair_from(a)).to_dict()


def _risk_lambda(a):
    return riskops.estimate_lambda(_pair_from(a), hardy_factor=a.hardy_factor).to_dict()


def _risk_regime(a):
    if a.ab is not None:
        prod = a.ab
    elif a.alpha_i is not None and a.beta_j is not None:
        prod = a.alpha_i * a.beta_j
    else:
        raise ConfigError("give --ab or both --alpha-i and --beta-j")
    return {"regime": riskops.classify_product(prod, a.r), "discriminant": 4 * prod - a.r * a.r}


def _risk_bracket(a):
    A, _ = matrix_io.read_matrix(a.A)
    B, _ = matrix_io.read_matrix(a.B)
    C = riskops.lie_bracket(A, B)
    return {"bracket": C.tolist(), "trace": float(np.trace(C)), "skew_residual": float(np.max(np.abs(C + C.T)))}


def _dirichlet_solve(a):
    dom, phi = _make_domain(a)
    if a.x0 is None:
        raise ConfigError("--x0 is required")
    return dl.estimate_value(dom, phi, a.x0, a.paths, a.seed, a.workers).to_dict()


def _dirichlet_grid(a):
    dom, phi = _make_domain(a)
    pts = matrix_io.read_points(a.grid_file, 2)
    res = dl.estimate_value_grid(dom, phi, pts, a.paths, a.seed, a.workers)
    rows = []
    for pt, r in zip(pts, res):
        if isinstance(r, dl.ExitEstimate):
            rows.append([pt[0], pt[1], r.mean, r.std_error, r.n_paths, r.mean_exit_steps, "ok"])
        else:
            rows.append([pt[0], pt[1], math.nan, math.nan, 0, math.nan, r.status])
    if a.out:
        matrix_io.write_table(a.out, ["x", "y", "mean", "std_error", "paths", "mean_steps", "status"], rows)
    return {
        "points": len(res),
        "failures": [r.to_dict() for r in res if isinstance(r, dl.PointFailure)],
        "results": [r.to_dict() for r in res],
        "out": a.out,
    }


def _scenario_run(a):
    results, code = run_scenario(a.file)
    return {"steps": results, "exit_code": code}


# -- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common, pw, ut, cv, dm = _common(), _pwf_opts(), _utility_opts(), _curve_opts(), _domain_opts()
    root = _Parser(prog="mtk-risk", allow_abbrev=False, description="Behavioural risk numerics.")
    groups = root.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def cmd(sub, name, handler: Callable, parents=()):
        p = sub.add_parser(name, parents=[common, *parents], allow_abbrev=False)
        p.set_defaults(handler=handler)
        return p

    g = groups.add_parser("pwf").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = cmd(g, "eval", _pwf_eval, [pw])
    p.add_argument("--p", type=_prob, required=True)
    cmd(g, "fixed-point", _pwf_fixed_point, [pw])
    p = cmd(g, "partition", _pwf_partition)
    p.add_argument("--centers", type=_floats, required=True)
    p.add_argument("--half-widths", type=_floats, required=True)
    p.add_argument("--grid", type=_pos_int, default=1001)
    p.add_argument("--out")

    g = groups.add_parser("kernel").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = cmd(g, "build", _kernel_build, [pw])
    p.add_argument("--loss-n", type=_pos_int, required=True)
    p.add_argument("--gain-n", type=_pos_int, required=True)
    p.add_argument("--pstar", type=_pstar, default="auto")
    p.add_argument("--quad", choices=("simpson", "trapezoid"))
    p.add_argument("--quad-points", type=_pos_int, default=1024)
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--out")
    for name, h in (("adjoint", _kernel_adjoint), ("composite", _kernel_composite)):
        p = cmd(g, name, h)
        p.add_argument("--in", dest="inp", required=True)
        p.add_argument("--out")
    p = cmd(g, "spectrum", _kernel_spectrum)
    p.add_argument("--in", dest="inp", required=True)

    g = groups.add_parser("ergodic").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name, h in (("orbit", _ergodic_orbit), ("birkhoff", _ergodic_birkhoff)):
        p = cmd(g, name, h)
        p.add_argument("--T", required=True)
        p.add_argument("--f0", default="e1", help="e<k>, 'random' or comma-separated components")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--steps", type=_pos_int, default=200)
        if name == "orbit":
            p.add_argument("--out")
    p = cmd(g, "phase", _ergodic_phase, [pw])
    p.add_argument("--grid", type=_pos_int, default=101)
    p.add_argument("--out")

    g = groups.add_parser("geometry").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    cmd(g, "frenet", _geometry_frenet, [cv])
    cmd(g, "spin", _geometry_spin, [cv])
    p = cmd(g, "gauss", _geometry_gauss)
    p.add_argument("--surface", required=True)
    p.add_argument("--at", type=_pair, default=(0.0, 0.0))

    g = groups.add_parser("risk").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    cmd(g, "arrow-pratt", _risk_arrow_pratt, [ut])
    cmd(g, "prudence", _risk_prudence, [ut])
    cmd(g, "torsion", _risk_torsion, [ut])
    for name, h in (("structure", _risk_structure), ("lambda", _risk_lambda)):
        p = cmd(g, name, h)
        p.add_argument("--alpha", type=_floats, required=True)
        p.add_argument("--beta", type=_floats, required=True)
        p.add_argument("--r", type=float, default=0.5)
        if name == "lambda":
            p.add_argument("--hardy-factor", action="store_true")
    p = cmd(g, "regime", _risk_regime)
    p.add_argument("--ab", type=float)
    p.add_argument("--alpha-i", type=float)
    p.add_argument("--beta-j", type=float)
    p.add_argument("--r", type=float, required=True)
    p = cmd(g, "bracket", _risk_bracket)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)

    g = groups.add_parser("dirichlet").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = cmd(g, "solve", _dirichlet_solve, [dm])
    p.add_argument("--x0", type=_pair)
    p = cmd(g, "grid", _dirichlet_grid, [dm])
    p.add_argument("--grid-file", required=True)
    p.add_argument("--out")

    g = groups.add_parser("scenario").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    p = cmd(g, "run", _scenario_run)
    p.add_argument("--file", required=True)
    return root


# -- envelope -----------------------------------------------------------------


def _jsonable(o: Any):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if math.isfinite(v) else str(v)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return {"re": o.real, "im": o.imag}
    return o


def _envelope(status: str, payload, config: dict) -> dict:
    return {"status": status, "payload": _jsonable(payload), "config": _jsonable(config), "version": __version__}


def _config_echo(ns: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(ns).items()) if k != "handler"}


def dispatch(argv: Sequence[str]) -> tuple[dict, int]:
    """Parse, run one command and return (envelope, exit code)."""
    argv = list(argv)
    config: dict = {"argv": argv}
    try:
        ns = build_parser().parse_args(argv)
        config = _config_echo(ns)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            payload = ns.handler(ns)
        if caught and isinstance(payload, dict):
            payload["warnings"] = [str(w.message) for w in caught]
        code = payload["exit_code"] if ns.group == "scenario" else 0
        status = next(k for k, v in EXIT_CODES.items() if v == code)
        return _envelope(status, payload, config), code
    except MTKRiskError as exc:
        err = {"error": str(exc), "type": type(exc).__name__}
        return _envelope(exc.status, err, config), exc.exit_code
    except (OSError, ValueError) as exc:
        err = {"error": str(exc), "type": type(exc).__name__}
        return _envelope("config_error", err, config), 1
    except ArithmeticError as exc:
        err = {"error": str(exc), "type": type(exc).__name__}
        return _envelope("numeric_error", err, config), 3


def run_scenario(path: str | Path) -> tuple[list[dict], int]:
    """Run each command line of a scenario file; the exit code is the max over steps."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from exc
    envs, code = [], 0
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            argv = shlex.split(line)
        except ValueError as exc:
            env, c = _envelope("config_error", {"error": str(exc), "type": "ConfigError"}, {"line": line}), 1
        else:
            if argv[:1] == ["scenario"]:
                env, c = _envelope("config_error", {"error": "scenarios cannot nest", "type": "ConfigError"}, {"argv": argv}), 1
            else:
                env, c = dispatch(argv)
        envs.append(env)
        code = max(code, c)
    return envs, code


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list):
            yield key, ";".join(json.dumps(x) if isinstance(x, (list, dict)) else str(x) for x in v)
        else:
            yield key, v


def _render(env: dict, fmt: str) -> str:
    if fmt == "csv":
        rows = [("status", env["status"]), ("version", env["version"])]
        rows += list(_flatten(env["payload"], "payload."))
        return "\n".join(f"{k},{v}" for k, v in rows)
    return json.dumps(env, indent=2)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help") or "-h" in argv or "--help" in argv:
        try:
            build_parser().parse_args(argv or ["--help"])
        except SystemExit as exc:
            return int(exc.code or 0)
        except ConfigError as exc:
            print(json.dumps({"status": "config_error", "error": str(exc)}), file=sys.stderr)
            return 1
    env, code = dispatch(argv)
    fmt = env["config"].get("format", "json") if isinstance(env["config"], dict) else "json"
    print(_render(env, fmt))
    if code:
        print(json.dumps({"status": env["status"], **env["payload"]}), file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
