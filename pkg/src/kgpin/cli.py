"""Batch command-line front end.

Verbs: eval | grid | verify | solve | fit, configured by one JSON document
(--config) with flag overrides.  Output is CSV (17 significant digits, LF line
endings, header row) or JSON for reports; every kernel value row carries its
truncation certificate.  Exit code 0 iff all requested checks pass.

Environment: KGPIN_WORKERS (grid worker threads), KGPIN_TOL (truncation tol
override).  Grid output is deterministic and byte-identical for any worker
count (fixed summation order with exactly rounded accumulation).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bvp import solve_dirichlet
from .calculus import BoxDomain, QuadratureRule
from .errors import KGPinError, NotCertifiedError, OverflowGuardError, SingularPointError
from .kernels import PeriodizedKernel, TruncationPolicy, periodized
from .lattice import KLEIN, MOBIUS, ManifoldSpec, PinCharacter
from .poles import fit_expansion
from .specfun import KernelParams
from .verify import SUITES, run_suites

__all__ = ["main"]

_DEFAULTS = {
    "manifold": {"kind": KLEIN, "n": 2, "k": 2},
    "alpha": 1.0,
    "character": [],
    "derivative": None,
    "truncation": {"mode": "adaptive", "radius": 0, "tol": 1e-12},
}

_ERROR_CODES = {
    SingularPointError: "singular-point",
    NotCertifiedError: "not-certified",
    OverflowGuardError: "overflow-guard",
}


class ConfigError(KGPinError):
    pass


def _load_config(path) -> dict:
    cfg = json.loads(json.dumps(_DEFAULTS))
    if path:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config root must be a JSON object")
        for key, val in user.items():
            if isinstance(val, dict) and isinstance(cfg.get(key), dict):
                cfg[key].update(val)
            else:
                cfg[key] = val
    return cfg


def _set_path(cfg: dict, dotted: str, raw: str):
    """Apply one --set override: dotted key path, JSON-parsed value."""
    keys = dotted.split(".")
    node = cfg
    for key in keys[:-1]:
        nxt = node.get(key)
        if not isinstance(nxt, dict):
            nxt = {}
            node[key] = nxt
        node = nxt
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node[keys[-1]] = value


def _apply_overrides(cfg: dict, args) -> dict:
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key.path=value, got {item!r}")
        _set_path(cfg, *item.split("=", 1))
    if args.kind is not None:
        cfg["manifold"]["kind"] = args.kind
    if args.n is not None:
        cfg["manifold"]["n"] = args.n
    if args.k is not None:
        cfg["manifold"]["k"] = args.k
    if args.alpha is not None:
        cfg["alpha"] = args.alpha
    if args.character is not None:
        cfg["character"] = [int(t) for t in args.character.split(",") if t.strip()]
    if args.mode is not None:
        cfg["truncation"]["mode"] = args.mode
    if args.radius is not None:
        cfg["truncation"]["radius"] = args.radius
    if args.tol is not None:
        cfg["truncation"]["tol"] = args.tol
    env_tol = os.environ.get("KGPIN_TOL")
    if env_tol:
        cfg["truncation"]["tol"] = float(env_tol)
    return cfg


def _build_kernel(cfg: dict) -> PeriodizedKernel:
    man = cfg["manifold"]
    try:
        kind = man["kind"]
        if kind == MOBIUS:
            spec = ManifoldSpec.mobius(int(man["n"]), int(man["k"]))
        elif kind == KLEIN:
            spec = ManifoldSpec.klein(int(man["n"]))
        else:
            raise ConfigError(f"manifold.kind must be '{MOBIUS}' or '{KLEIN}', got {kind!r}")
        params = KernelParams(n=int(man["n"]), alpha=float(cfg["alpha"]))
        chi = PinCharacter(spec.k, frozenset(int(i) for i in cfg.get("character", [])))
        tr = cfg["truncation"]
        trunc = TruncationPolicy(
            mode=tr.get("mode", "adaptive"),
            radius=int(tr.get("radius", 0)),
            tol=float(tr.get("tol", 1e-12)),
        )
        deriv = cfg.get("derivative")
        deriv = None if deriv is None else tuple(int(m) for m in deriv)
        return PeriodizedKernel(spec, chi=chi, params=params, derivative=deriv, trunc=trunc)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad kernel configuration: {exc}") from exc


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("KGPIN_WORKERS", "1")))
    except ValueError:
        return 1


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def _open_out(path):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def _write_rows(path, header, rows):
    out, close = _open_out(path)
    try:
        out.write(",".join(header) + "\n")
        for row in rows:
            out.write(",".join(row) + "\n")
    finally:
        if close:
            out.close()


def _eval_row(kernel: PeriodizedKernel, x, y=None):
    val = periodized(kernel, np.asarray(x, dtype=float), y)
    return [_fmt(c) for c in x] + [_fmt(val), _fmt(val.tail), str(val.shells_used)]


def cmd_eval(cfg: dict, args) -> int:
    kernel = _build_kernel(cfg)
    points = cfg.get("points")
    if args.point:
        points = [[float(t) for t in p.split(",")] for p in args.point]
    if not points:
        raise ConfigError("eval needs 'points' in the config or --point flags")
    n = kernel.spec.n
    if any(len(p) != n for p in points):
        raise ConfigError(f"eval points must have dimension {n}")
    y = cfg.get("source_point")
    y = None if y is None else np.asarray([float(c) for c in y])
    rows = [_eval_row(kernel, p, y) for p in points]
    header = [f"x_{i+1}" for i in range(n)] + ["value", "tail", "shells_used"]
    _write_rows(args.out, header, rows)
    return 0


def _grid_points(grid_cfg: dict, n: int) -> list:
    try:
        lo = [float(c) for c in grid_cfg["min"]]
        hi = [float(c) for c in grid_cfg["max"]]
        steps = grid_cfg["steps"]
        steps = [int(steps)] * n if isinstance(steps, (int, float)) else [int(s) for s in steps]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"grid needs min, max, steps: {exc}") from exc
    if not (len(lo) == len(hi) == len(steps) == n):
        raise ConfigError(f"grid min/max/steps must have dimension {n}")
    axes = [np.linspace(lo[i], hi[i], steps[i]) for i in range(n)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1).tolist()


def cmd_grid(cfg: dict, args) -> int:
    kernel = _build_kernel(cfg)
    grid_cfg = cfg.get("grid")
    if not grid_cfg:
        raise ConfigError("grid needs a 'grid' block {min, max, steps}")
    points = _grid_points(grid_cfg, kernel.spec.n)
    workers = _workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda p: _eval_row(kernel, p), points))
    else:
        rows = [_eval_row(kernel, p) for p in points]
    header = [f"x_{i+1}" for i in range(kernel.spec.n)] + ["value", "tail", "shells_used"]
    _write_rows(args.out, header, rows)
    return 0


def cmd_verify(cfg: dict, args) -> int:
    names = args.suite or cfg.get("suites") or list(SUITES)
    bad = [s for s in names if s not in SUITES]
    if bad:
        raise ConfigError(f"unknown suites {bad}; choose from {sorted(SUITES)}")
    alpha = cfg.get("alpha_override")
    reports = run_suites(names, alpha=alpha)
    payload = {"passed": all(r.passed for r in reports), "suites": [r.to_dict() for r in reports]}
    out, close = _open_out(args.out)
    try:
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    finally:
        if close:
            out.close()
    for rep in reports:
        n_ok = sum(c.passed for c in rep.checks)
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} {rep.suite}: {n_ok}/{len(rep.checks)} checks", file=sys.stderr)
    return 0 if payload["passed"] else 1


def _manufactured_data(cfg: dict, kernel: PeriodizedKernel, box: BoxDomain):
    """Built-in (f, g, exact) triples for the solve command."""
    data = cfg.get("dirichlet", {"kind": "exp_axis", "axis": 1})
    kind = data.get("kind", "exp_axis")
    alpha = kernel.params.alpha
    if kind == "exp_axis":
        axis = int(data.get("axis", 1)) - 1
        if not 0 <= axis < kernel.spec.n:
            raise ConfigError("dirichlet.axis out of range")
        exact = lambda x: math.exp(alpha * x[axis])
        return None, exact, exact
    if kind == "zero":
        return None, (lambda x: 0.0), (lambda x: 0.0)
    if kind == "bump":
        lo = np.array(box.lower)
        wid = np.array(box.upper) - lo

        def bump(x):
            t = 2.0 * (np.asarray(x) - lo) / wid - 1.0
            return float(np.prod((1.0 - t * t) ** 4)) if np.all(np.abs(t) < 1.0) else 0.0

        def source(x):
            t = 2.0 * (np.asarray(x) - lo) / wid - 1.0
            if np.any(np.abs(t) >= 1.0):
                return 0.0
            psi = (1.0 - t * t) ** 4
            d2 = (-8.0 * (1.0 - t * t) ** 3 + 48.0 * t * t * (1.0 - t * t) ** 2) * (2.0 / wid) ** 2
            lap = sum(d2[i] * np.prod(np.delete(psi, i)) for i in range(len(t)))
            return float(lap - alpha**2 * np.prod(psi))

        return source, (lambda x: 0.0), bump
    raise ConfigError(f"unknown dirichlet data kind {data.get('kind')!r}")


def cmd_solve(cfg: dict, args) -> int:
    kernel = _build_kernel(cfg)
    dom = cfg.get("domain")
    if not dom:
        raise ConfigError("solve needs a 'domain' block {lower, upper}")
    box = BoxDomain(tuple(dom["lower"]), tuple(dom["upper"]))
    rule_cfg = cfg.get("boundary_rule", {})
    rule = QuadratureRule(int(rule_cfg.get("panels", 4)), int(rule_cfg.get("order", 4)))
    f, g, exact = _manufactured_data(cfg, kernel, box)
    solution = solve_dirichlet(kernel, f, g, box, rule=rule)
    points = cfg.get("points") or [box.center.tolist()]
    header = [f"x_{i+1}" for i in range(kernel.spec.n)] + ["u", "u_exact", "abs_error"]
    rows = []
    for p in points:
        u = solution(np.asarray(p, dtype=float))
        ue = exact(np.asarray(p, dtype=float))
        rows.append([_fmt(c) for c in p] + [_fmt(u), _fmt(ue), _fmt(abs(u - ue))])
    _write_rows(args.out, header, rows)
    return 0


def _read_samples(path: str, n: int):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError as exc:
        raise ConfigError(f"cannot read samples {path}: {exc}") from exc
    expected = [f"x_{i+1}" for i in range(n)] + ["value"]
    if [h.strip() for h in header] != expected or data.shape[1] != n + 1:
        raise ConfigError(f"samples must have columns {','.join(expected)}")
    return data[:, :n], data[:, n]


def cmd_fit(cfg: dict, args) -> int:
    kernel = _build_kernel(cfg)
    path = args.samples or cfg.get("samples_path")
    if not path:
        raise ConfigError("fit needs 'samples_path' in the config or --samples")
    poles = cfg.get("poles")
    if args.pole:
        poles = [[float(t) for t in p.split(",")] for p in args.pole]
    if not poles:
        raise ConfigError("fit needs 'poles' in the config or --pole flags")
    max_order = int(args.max_order if args.max_order is not None else cfg.get("max_order", 2))
    X, vals = _read_samples(path, kernel.spec.n)
    fit = fit_expansion(kernel, X, vals, np.asarray(poles, dtype=float), max_order)
    report = {
        "residual_rms": fit.residual,
        "residual_max": fit.max_residual,
        "residual_ok": fit.residual_ok,
        "rank": fit.rank,
        "n_coefficients": fit.n_coefficients,
        "sparsity": fit.sparsity,
        "poles": [
            {
                "point": [float(c) for c in pole],
                "terms": [{"m": list(m), "b": b} for m, b in per_pole],
            }
            for pole, per_pole in zip(fit.expansion.poles, fit.expansion.terms)
        ],
    }
    out, close = _open_out(args.out)
    try:
        out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    finally:
        if close:
            out.close()
    return 0 if fit.residual_ok else 1


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="kgpin",
        description="Periodized Klein-Gordon kernels on Moebius/Klein quotients: "
        "evaluate, verify, solve, fit.",
    )
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument(
        "--set",
        action="append",
        metavar="KEY.PATH=VALUE",
        help="override any config field (value parsed as JSON, else string)",
    )
    ap.add_argument("--out", help="output path (default stdout)")
    ap.add_argument("--kind", choices=[MOBIUS, KLEIN])
    ap.add_argument("--n", type=int)
    ap.add_argument("--k", type=int)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--character", help="comma-separated twisted generator indices")
    ap.add_argument("--mode", choices=["adaptive", "fixed_radius"])
    ap.add_argument("--radius", type=int)
    ap.add_argument("--tol", type=float)
    sub = ap.add_subparsers(dest="command", required=True)
    p_eval = sub.add_parser("eval", help="evaluate the kernel at points")
    p_eval.add_argument("--point", action="append", help="comma-separated coordinates")
    sub.add_parser("grid", help="evaluate the kernel on a grid")
    p_ver = sub.add_parser("verify", help="run verification suites")
    p_ver.add_argument("--suite", action="append", choices=sorted(SUITES))
    sub.add_parser("solve", help="solve a Dirichlet problem on a box")
    p_fit = sub.add_parser("fit", help="fit a pole expansion to samples")
    p_fit.add_argument("--samples", help="CSV with columns x_1..x_n,value")
    p_fit.add_argument("--pole", action="append", help="comma-separated pole coordinates")
    p_fit.add_argument("--max-order", type=int, dest="max_order")
    return ap


_COMMANDS = {
    "eval": cmd_eval,
    "grid": cmd_grid,
    "verify": cmd_verify,
    "solve": cmd_solve,
    "fit": cmd_fit,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _apply_overrides(_load_config(args.config), args)
        return _COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(json.dumps({"error": "config-schema", "message": str(exc)}), file=sys.stderr)
        return 2
    except KGPinError as exc:
        code = _ERROR_CODES.get(type(exc), "kgpin-error")
        print(json.dumps({"error": code, "message": str(exc)}), file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(json.dumps({"error": "invalid-input", "message": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
