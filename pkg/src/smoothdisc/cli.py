"""Command-line front end.

Exit codes: 0 success, 2 argument error, 3 resource cap, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .discrepancy import (
    SearchSpec,
    b_r_discrepancy,
    fixed_volume_discrepancy,
    global_smooth_discrepancy,
    kernel_matrix,
    optimize_weights_minimax,
    periodic_fixed_volume_discrepancy,
    simplex_exponents,
    star_discrepancy_exact,
    widths_from_exponents,
)
from .dispersion import dispersion_times_n_curve
from .errors import ArgumentError, SmoothDiscError
from .harness import RateFit, fixed_volume_curve, rate_table, verify_lattice
from .pointsets import build_pointset

KINDS = ("frolov", "frolov-periodized", "fibonacci", "random")
DISC_MODES = ("fixed_volume", "periodic", "global", "star", "b_r")


def _floats(text):
    try:
        return [float(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ArgumentError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _search_args(p):
    p.add_argument("--z-grid", type=int, default=64)
    p.add_argument("--u-samples", type=int, default=32)
    p.add_argument("--refine-iters", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)


def _search(ns) -> SearchSpec:
    return SearchSpec(ns.z_grid, ns.u_samples, ns.refine_iters, ns.seed)


def _config(ns) -> dict:
    # output paths do not affect results, so they stay out of the hash
    return {k: v for k, v in sorted(vars(ns).items()) if k not in ("func", "out", "weights_out")}


def cmd_gen(ns):
    params = {"d": ns.d, "a": ns.a, "n": ns.n, "m": ns.m, "seed": ns.seed}
    needed = {"frolov": ("d", "a"), "frolov-periodized": ("d", "a"), "fibonacci": ("n",), "random": ("m", "d")}
    missing = [k for k in needed[ns.kind] if params[k] is None]
    if missing:
        raise ArgumentError(f"gen {ns.kind} needs --{' --'.join(missing)}")
    ps = build_pointset(ns.kind, **{k: v for k, v in params.items() if v is not None})
    out = ns.out or f"{ns.kind}.csv"
    cfg = _config(ns)
    meta = dict(ps.meta, config_hash=io.config_hash(cfg), seed=ns.seed)
    ps = type(ps)(ps.points, ps.weights, meta, ps.pre_wrap_points)
    io.write_pointset(ps, out)
    print(f"wrote {ps.m} points to {out}", file=sys.stderr)


def cmd_disc(ns):
    if ns.v is None and ns.mode in ("periodic", "fixed_volume") or ns.mode == "global" and not (ns.v or ns.v_grid):
        raise ArgumentError(f"--mode {ns.mode} needs a volume (--v or --v-grid)")
    ps = io.read_pointset(ns.setfile)
    search = _search(ns)
    if ns.mode == "periodic":
        rep = periodic_fixed_volume_discrepancy(ps, ns.r, ns.v, search, ns.weights)
    elif ns.mode == "fixed_volume":
        rep = fixed_volume_discrepancy(ps, ns.r, ns.v, search, ns.weights)
    elif ns.mode == "global":
        grid = _floats(ns.v_grid) if ns.v_grid else [ns.v]
        rep = global_smooth_discrepancy(ps, ns.r, search, grid, ns.weights)
    elif ns.mode == "b_r":
        rep = b_r_discrepancy(ps, ns.r, search, ns.weights)
    else:
        out = {"value": star_discrepancy_exact(ps), "mode": "star", "weight_mode": "unweighted", "m": ps.m}
        rep = None
    if rep is not None:
        out = rep.to_dict()
    out["m"] = ps.m
    out["config_hash"] = io.config_hash(_config(ns))
    out["seed"] = ns.seed
    _emit(io.dumps(out), ns.out)


def cmd_disp(ns):
    sets = [io.read_pointset(f) for f in ns.setfiles]
    rows = dispersion_times_n_curve(sets)
    head = f"# config_hash={io.config_hash(_config(ns))} seed=none\n"
    _emit(head + io.table_csv(["n", "disp", "n_disp"], rows), ns.out)


def _family(cfg):
    kind = cfg.get("kind")
    if kind not in KINDS:
        raise ArgumentError(f"config kind must be one of {KINDS}")
    seed = int(cfg.get("seed", 0))
    if kind in ("frolov", "frolov-periodized"):
        d = int(cfg.get("d", 2))
        return [build_pointset(kind, d=d, a=a) for a in _floats(cfg["a"])]
    if kind == "fibonacci":
        return [build_pointset(kind, n=int(n)) for n in _floats(cfg["n"])]
    d = int(cfg.get("d", 2))
    return [build_pointset(kind, m=int(m), d=d, seed=seed) for m in _floats(cfg["m"])]


def cmd_rates(ns):
    cfg = io.read_config(ns.config)
    mode = cfg.get("mode", "periodic")
    search = SearchSpec(int(cfg.get("z_grid", 64)), int(cfg.get("u_samples", 32)),
                        int(cfg.get("refine_iters", 20)), int(cfg.get("seed", 0)))
    volume = float(cfg["v"]) if "v" in cfg else None
    weight_mode = cfg.get("weights", "native")
    if weight_mode == "zero":
        sets = [ps.with_weights(np.zeros(ps.m), "zero") for ps in _family(cfg)]
        weight_mode = "native"
    else:
        sets = _family(cfg)
    head = f"# config_hash={io.config_hash(cfg)} seed={search.seed}\n"
    rows, fail = [], None
    for ps in sets:
        try:
            r, _ = rate_table([ps], mode, r=int(cfg.get("r", 2)), volume=volume, search=search,
                              weight_mode=weight_mode)
            rows.extend(r)
        except SmoothDiscError as exc:
            fail = exc
            break
    text = head + io.table_csv(["m", "value"], rows)
    if fail is None and len(rows) >= 3:
        vals = [v for _, v in rows]
        if all(v == 0 for v in vals):
            fit = {"slope": 0.0, "intercept": None, "residual_rms": 0.0, "points": len(rows)}
        else:
            fit = RateFit.fit([m for m, _ in rows], vals).summary()
        text += "".join(f"# {k}={io.fmt(v) if isinstance(v, float) else v}\n" for k, v in fit.items())
    _emit(text, ns.out)
    if fail is not None:
        raise fail


def cmd_verify_lattice(ns):
    res = verify_lattice(ns.d, ns.a, ns.M, boxes=ns.boxes, seed=ns.seed)
    res["config_hash"] = io.config_hash(_config(ns))
    res["seed"] = ns.seed
    _emit(io.dumps(res), ns.out)
    if not res["pass"]:
        return 4
    return 0


def cmd_fixed_volume_curve(ns):
    ps = io.read_pointset(ns.setfile)
    v0 = ns.v0
    if v0 is None:
        a = ps.meta.get("a")
        v0 = float(a) ** (-ps.d) if a else 1.0 / ps.m
    rows, fit = fixed_volume_curve(ps, ns.r, v0, ns.steps, _search(ns))
    head = f"# config_hash={io.config_hash(_config(ns))} seed={ns.seed}\n"
    body = io.table_csv(["j", "v", "value", "ratio"], [(j, v, val, "" if q is None else q) for j, v, val, q in rows])
    tail = "".join(f"# {k}={io.fmt(v)}\n" for k, v in fit.items())
    _emit(head + body + tail, ns.out)


def cmd_weights(ns):
    ps = io.read_pointset(ns.setfile)
    d = ps.d
    E = simplex_exponents(ns.u_samples, d, ns.seed)
    axis = np.arange(ns.z_grid) / ns.z_grid
    sample = []
    for e in E:
        u = widths_from_exponents(e, ns.v, 0.5)
        for idx in np.ndindex(*(ns.z_grid,) * d):
            sample.append((axis[list(idx)], u))
    res = optimize_weights_minimax(ps.points, ns.r, sample, [ns.v**ns.r] * len(sample), mass_bound=ns.mass_bound)
    H = kernel_matrix(ps.points, ns.r, sample)
    c = ns.v**ns.r
    out = {
        "value": res.value,
        "lp_objective": res.lp_objective,
        "native_objective": float(np.max(np.abs(c - H @ ps.weights))),
        "equal_objective": float(np.max(np.abs(c - H @ np.full(ps.m, 1.0 / ps.m)))),
        "weight_mass": float(np.abs(res.weights).sum()),
        "constraints": len(sample),
        "iterations": res.iterations,
        "config_hash": io.config_hash(_config(ns)),
        "seed": ns.seed,
    }
    if ns.weights_out:
        io.write_pointset(ps.with_weights(res.weights, "optimized"), ns.weights_out)
    _emit(io.dumps(out), ns.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="smoothdisc", description="Frolov and Fibonacci point sets, smooth discrepancy and dispersion.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a point set file")
    g.add_argument("kind", choices=KINDS)
    g.add_argument("--d", type=int)
    g.add_argument("--a", type=float)
    g.add_argument("--n", type=int, help="Fibonacci index (b_1 = b_2 = 1)")
    g.add_argument("--m", type=int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("disc", help="discrepancy report (JSON)")
    s.add_argument("setfile")
    s.add_argument("--mode", choices=DISC_MODES, default="periodic")
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--v", type=float, help="volume constraint (pr(u) for periodic, box volume for fixed_volume)")
    s.add_argument("--v-grid", help="comma-separated volumes for --mode global")
    s.add_argument("--weights", choices=("native", "equal", "optimized"), default="native")
    _search_args(s)
    s.add_argument("--out")
    s.set_defaults(func=cmd_disc)

    s = sub.add_parser("disp", help="dispersion table (CSV)")
    s.add_argument("setfiles", nargs="+")
    s.add_argument("--out")
    s.set_defaults(func=cmd_disp)

    s = sub.add_parser("rates", help="decay-rate experiment from a key=value config")
    s.add_argument("config")
    s.add_argument("--out")
    s.set_defaults(func=cmd_rates)

    s = sub.add_parser("verify-lattice", help="check the admissibility properties numerically")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--M", type=int, default=50)
    s.add_argument("--boxes", type=int, default=1000)
    s.add_argument("--seed", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify_lattice)

    s = sub.add_parser("fixed-volume-curve", help="periodic discrepancy along v0 * 2^j")
    s.add_argument("setfile")
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--v0", type=float)
    s.add_argument("--steps", type=int, default=7)
    _search_args(s)
    s.add_argument("--out")
    s.set_defaults(func=cmd_fixed_volume_curve)

    s = sub.add_parser("weights", help="minimax weights by linear programming")
    s.add_argument("setfile")
    s.add_argument("--r", type=int, default=2)
    s.add_argument("--v", type=float, required=True)
    s.add_argument("--mass-bound", type=float)
    s.add_argument("--z-grid", type=int, default=16)
    s.add_argument("--u-samples", type=int, default=4)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weights-out")
    s.add_argument("--out")
    s.set_defaults(func=cmd_weights)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns) or 0
    except SmoothDiscError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
