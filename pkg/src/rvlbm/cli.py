"""Command-line front end.

Every subcommand reads its parameters from built-in defaults, then the
optional TOML file given by ``--config`` (either top-level keys or a table
named after the subcommand), then explicit flags. The resolved parameters are
written next to the outputs so a run can be repeated from that file alone.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import tomli_w

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import _backend, eqeq, io, l2, linf, simulator, vonneumann
from .lattice import Equilibrium, RelativeMode, SchemeSpec, Variant, henon_to_rate

SIGMA_Q_LIST = [0.1, 0.05, 0.02, 0.01, 0.005]
SPOT_ROWS = [
    ("non-intrinsic", "zero"),
    ("non-intrinsic", "V"),
    ("intrinsic", "zero"),
    ("intrinsic", "V"),
]

DEFAULTS = {
    "spot": {
        "table": 1, "theta": None, "sigma_xy": 1 / math.sqrt(3), "sigma_q": SIGMA_Q_LIST,
        "nx": simulator.DEFAULT_GRID, "steps": simulator.DEFAULT_STEPS, "step_size": 0.01,
        "v_max": 2.0, "blowup_factor": simulator.BLOWUP_FACTOR, "lam": 1.0,
    },
    "vn-scan": {
        "variant": "twisted", "equilibrium": "non-intrinsic", "s_q": 1.0, "s_xy": 1.5,
        "modes": ["zero", "V"], "v_max": 1.5, "v_step": 0.02, "n_k": vonneumann.DEFAULT_K,
        "refine_k": vonneumann.REFINED_K, "lam": 1.0,
    },
    "linf-region": {
        "variant": "twisted", "equilibrium": "non-intrinsic", "mode": "zero", "s_q": 1.0,
        "s_xy": 0.5, "v_max": 1.6, "v_step": 0.01, "frame": "original", "lam": 1.0,
    },
    "l2-structure": {
        "variant": "twisted", "equilibrium": "non-intrinsic", "mode": "V", "s_q": 1.5,
        "s_xy": 0.8, "v_max": 1.2, "v_step": 0.05, "lam": 1.0,
    },
    "eqeq": {
        "variant": "twisted", "equilibriums": ["non-intrinsic", "intrinsic"],
        "modes": ["zero", "V"],
        "velocities": [[0.0, 0.0], [0.3, -0.2], [0.5, 0.4], [-0.7, 0.1], [0.8, 0.0]],
        "sigma_q": [0.3, 0.1, 0.05], "sigma_xy": [1 / math.sqrt(3), 0.4, 0.1], "lam": 1.0,
    },
    "validate": {"samples": 200},
}
COMMON = {"threads": 1, "seed": 0, "output_dir": None, "backend": None}


# -- config ------------------------------------------------------------------

def load_config(path, command: str) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    table = dict(data.get(command, {}))
    flat = {k: v for k, v in data.items() if not isinstance(v, dict)}
    return {k.replace("-", "_"): v for k, v in {**flat, **table}.items()}


def resolve(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then flags that were given."""
    cfg = {**COMMON, **DEFAULTS[command]}
    for key, value in load_config(args.config, command).items():
        if key not in cfg:
            raise SystemExit(f"unknown key {key!r} for {command}")
        cfg[key] = value
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _save_config(out, name, command, cfg):
    clean = {k: v for k, v in cfg.items() if v is not None}
    with open(out / f"{name}.toml", "wb") as fh:
        tomli_w.dump({command: clean}, fh)


def _kernels(cfg):
    return _backend.get(cfg["backend"]) if cfg["backend"] else None


# -- subcommands -------------------------------------------------------------

def cmd_spot(cfg) -> int:
    """Largest stable speed of the advected spot for each family and σ_q."""
    theta = cfg["theta"]
    if theta is None:
        theta = 0.0 if int(cfg["table"]) == 1 else math.pi / 4
    lam = float(cfg["lam"])
    s_xy = henon_to_rate(float(cfg["sigma_xy"]))
    out = io.output_dir(cfg["output_dir"])
    header = ["equilibrium", "u_mode", "theta"] + [f"sigma_q={s:g}" for s in cfg["sigma_q"]]
    rows = []
    runs = []
    for eq, mode in SPOT_ROWS:
        row = [eq, mode, float(theta)]
        for sq in cfg["sigma_q"]:
            template = SchemeSpec(lam=lam, s_q=henon_to_rate(float(sq)), s_xy=s_xy, equilibrium=eq)
            log = []
            v = simulator.max_stable_speed(
                template, theta, mode, nx=int(cfg["nx"]), n_steps=int(cfg["steps"]),
                step_size=float(cfg["step_size"]) * lam, v_max=float(cfg["v_max"]) * lam,
                threads=int(cfg["threads"]), blowup_factor=float(cfg["blowup_factor"]),
                backend=_kernels(cfg), log=log)
            row.append(round(v / lam, 10))
            for spec, rep in log:
                runs.append((spec.s_q, spec.s_xy, spec.V[0] / lam, spec.V[1] / lam, mode, eq,
                             spec.variant.value, rep.stable,
                             "" if rep.blowup_step is None else rep.blowup_step))
        rows.append(row)
        print(f"{eq:>14} u={mode:<4} " + " ".join(f"{x:5.2f}" for x in row[3:]), flush=True)
    io.write_csv(out / "spot_table.csv", header, rows)
    io.write_csv(out / "spot_runs.csv", ["sq", "sxy", "Vx", "Vy", "utilde_mode", "equilibrium",
                                         "variant", "stable", "blowup_step"], runs)
    _save_config(out, "spot_table", "spot", cfg)
    return 0


def cmd_vn(cfg) -> int:
    """Von Neumann verdict grid for each relative-velocity mode."""
    lam = float(cfg["lam"])
    template = SchemeSpec(variant=cfg["variant"], lam=lam, s_q=float(cfg["s_q"]),
                          s_xy=float(cfg["s_xy"]), equilibrium=cfg["equilibrium"])
    axis = vonneumann.velocity_axis(float(cfg["v_max"]), float(cfg["v_step"]))
    out = io.output_dir(cfg["output_dir"])
    for mode in cfg["modes"]:
        grid = vonneumann.stability_region_scan(
            template, mode, axis, n_k=int(cfg["n_k"]), refine_k=int(cfg["refine_k"]) or None,
            threads=int(cfg["threads"]), backend=_kernels(cfg))
        vx, vy, r, ok = grid.points()
        stem = f"vn_{mode}"
        io.write_csv(out / f"{stem}.csv", ["Vx", "Vy", "max_r", "verdict"], zip(vx, vy, r, ok))
        io.write_csv(out / f"{stem}_verdict.csv", ["Vx", "Vy", f"verdict_{mode}"],
                     zip(vx, vy, ok))
        io.heatmap_svg(out / f"{stem}.svg", axis, axis, grid.verdict,
                       title=f"stable V, u={mode}, s=({cfg['s_q']:g},{cfg['s_xy']:g})")
        print(f"u={mode}: {int(grid.verdict.sum())} of {grid.verdict.size} cells stable")
    _save_config(out, "vn_scan", "vn-scan", cfg)
    return 0


def _linf_grid(cfg):
    axis = linf.sweep_axis(-float(cfg["v_max"]), float(cfg["v_max"]), float(cfg["v_step"]))
    A, B = np.meshgrid(axis, axis)
    a, b = A.ravel(), B.ravel()
    if cfg["frame"] == "rotated":
        # a = Vx + Vy, b = Vx - Vy
        V = np.stack([(a + b) / 2, (a - b) / 2], axis=1)
        labels = ("(Vx+Vy) / λ", "(Vx-Vy) / λ")
    elif cfg["frame"] == "original":
        V = np.stack([a, b], axis=1)
        labels = ("Vx / λ", "Vy / λ")
    else:
        raise SystemExit(f"unknown frame {cfg['frame']!r}")
    return axis, V, labels


def cmd_linf(cfg) -> int:
    """Closed-form L∞ region next to the collision-positivity oracle."""
    lam = float(cfg["lam"])
    case = linf.LinfCase(cfg["variant"], cfg["equilibrium"], cfg["mode"],
                         float(cfg["s_q"]), float(cfg["s_xy"]), lam)
    axis, V, labels = _linf_grid(cfg)
    inside, margin = linf.linf_region(case, V * lam)
    oracle = linf.linf_oracle_batch(case, V * lam)
    dom = linf.linf_param_domain(case)
    out = io.output_dir(cfg["output_dir"])
    name = f"{case.variant.value}/{case.equilibrium.value}/{case.mode.value}/{dom.label}"
    io.write_csv(out / "linf_region.csv",
                 ["case", "sq", "sxy", "Vx", "Vy", "predicate", "oracle", "margin"],
                 ((name, case.s_q, case.s_xy, a, b, p, o, m)
                  for a, b, p, o, m in zip(V[:, 0], V[:, 1], inside, oracle, margin)))
    keep = margin > linf.COLLAR
    mismatch = keep & (inside != oracle)
    bad = int(mismatch.sum())
    n = len(axis)
    # predicate in blue, oracle disagreements (outside the collar) in red
    picture = np.where(mismatch, np.nan, inside.astype(float)).reshape(n, n)
    io.heatmap_svg(out / "linf_region.svg", axis, axis, picture, vmin=0.0, vmax=1.0,
                   title=f"L∞ region {dom.result} {dom.label}", xlabel=labels[0],
                   ylabel=labels[1])
    _save_config(out, "linf_region", "linf-region", cfg)
    print(f"{dom.result} [{dom.label}]: {int(inside.sum())} stable points, "
          f"{bad} disagreements with the oracle")
    return 0


def cmd_l2(cfg) -> int:
    """Weighted L² verdict on a velocity grid."""
    lam = float(cfg["lam"])
    axis = linf.sweep_axis(-float(cfg["v_max"]), float(cfg["v_max"]), float(cfg["v_step"]))
    out = io.output_dir(cfg["output_dir"])
    rank = {l2.Verdict.NONE: 0.0, l2.Verdict.PRESTRUCTURE: 0.5, l2.Verdict.STRUCTURE: 1.0}

    def work(V):
        spec = SchemeSpec.relative(cfg["mode"], V, variant=cfg["variant"], lam=lam,
                                   s_q=float(cfg["s_q"]), s_xy=float(cfg["s_xy"]),
                                   equilibrium=cfg["equilibrium"])
        verdict = l2.check_structure(spec)
        norm = l2.collision_norm(spec) if verdict is not l2.Verdict.NONE else float("nan")
        return verdict, norm

    pts = [(vx * lam, vy * lam) for vy in axis for vx in axis]
    threads = int(cfg["threads"])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            res = list(pool.map(work, pts))
    else:
        res = [work(p) for p in pts]
    rows = [(cfg["mode"], cfg["equilibrium"], p[0] / lam, p[1] / lam, float(cfg["s_q"]),
             float(cfg["s_xy"]), v.value, n) for p, (v, n) in zip(pts, res)]
    io.write_csv(out / "l2_structure.csv", ["mode", "equilibrium", "Vx", "Vy", "sq", "sxy",
                                            "verdict", "collision_norm"], rows)
    n = len(axis)
    grid = np.array([rank[v] for v, _ in res]).reshape(n, n)
    io.heatmap_svg(out / "l2_structure.svg", axis, axis, grid, vmin=0.0, vmax=1.0,
                   title=f"weighted L2: none / pre-structure / structure, u={cfg['mode']}")
    _save_config(out, "l2_structure", "l2-structure", cfg)
    counts = {v.value: sum(1 for r, _ in res if r is v) for v in l2.Verdict}
    print(" ".join(f"{k}={c}" for k, c in counts.items()))
    return 0


EQEQ_ENTRIES = [
    ("d2_xx", "d2", (0, 0)), ("d2_xy", "d2", (0, 1)), ("d2_yy", "d2", (1, 1)),
    ("d3_xxx", "d3", (0, 0)), ("d3_xyy", "d3", (0, 1)),
    ("d3_xxy", "d3", (1, 0)), ("d3_yyy", "d3", (1, 1)),
]


def relative_errors(closed: eqeq.EquivalentEquation, fitted: eqeq.EquivalentEquation, lam=1.0):
    """Entry-wise errors relative to ``max(|entry|, 1e-3 max|matrix|, 1e-9 λ^p)``."""
    out = {}
    for name, which, ij in EQEQ_ENTRIES:
        c = getattr(closed, which)
        f = getattr(fitted, which)
        floor = max(1e-3 * float(np.abs(c).max()), 1e-9 * lam ** (2 if which == "d2" else 3))
        out[name] = (float(c[ij]), float(f[ij]), abs(f[ij] - c[ij]) / max(abs(c[ij]), floor))
    return out


def eqeq_rows(cfg):
    lam = float(cfg["lam"])
    jobs = []
    for eq in cfg["equilibriums"]:
        for mode in cfg["modes"]:
            for V in cfg["velocities"]:
                for sq in cfg["sigma_q"]:
                    for sxy in cfg["sigma_xy"]:
                        jobs.append((eq, mode, tuple(float(x) * lam for x in V),
                                     float(sq), float(sxy)))

    def work(job):
        eq, mode, V, sq, sxy = job
        spec = SchemeSpec.relative(mode, V, variant=cfg["variant"], lam=lam,
                                   s_q=henon_to_rate(sq), s_xy=henon_to_rate(sxy),
                                   equilibrium=eq)
        errs = relative_errors(eqeq.equivalent_equation(spec), eqeq.fitted_equation(spec), lam)
        return [(eq, mode, V[0] / lam, V[1] / lam, sq, sxy, name, c, f, e)
                for name, (c, f, e) in errs.items()]

    threads = int(cfg["threads"])
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(j) for j in jobs]
    return [row for part in parts for row in part]


def cmd_eqeq(cfg) -> int:
    """Closed-form equivalent-equation coefficients against the numeric fit."""
    rows = eqeq_rows(cfg)
    out = io.output_dir(cfg["output_dir"])
    io.write_csv(out / "eqeq.csv", ["flavor", "u_mode", "Vx", "Vy", "sq", "sxy", "entry",
                                    "closed_form", "fitted", "rel_err"], rows)
    _save_config(out, "eqeq", "eqeq", cfg)
    worst = max(r[-1] for r in rows)
    print(f"{len(rows)} coefficients, worst relative error {worst:.2e}")
    return 0


def cmd_validate(cfg) -> int:
    """Randomised cross-module property checks; nonzero exit on any failure."""
    from .validate import run_all

    results = run_all(int(cfg["samples"]), int(cfg["seed"]), _kernels(cfg))
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failed += not ok
    return 1 if failed else 0


COMMANDS = {
    "spot": cmd_spot,
    "vn-scan": cmd_vn,
    "linf-region": cmd_linf,
    "l2-structure": cmd_l2,
    "eqeq": cmd_eqeq,
    "validate": cmd_validate,
}


def _floats(text):
    return [float(x) for x in text.split(",") if x.strip()]


def _words(text):
    return [x.strip() for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rvlbm", description="Stability analysis of relative "
                                "velocity D2Q4 lattice Boltzmann schemes")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="<path>", help="TOML file with parameters")
    common.add_argument("--threads", type=int, metavar="<n>", help="worker threads")
    common.add_argument("--seed", type=int, metavar="<u64>", help="random seed")
    common.add_argument("--output-dir", dest="output_dir", metavar="<dir>",
                        help=f"output directory (default ${io.OUTPUT_ENV} or .)")
    common.add_argument("--backend", choices=["python", "compiled"], help="kernel backend")
    scheme = argparse.ArgumentParser(add_help=False)
    scheme.add_argument("--variant", choices=[v.value for v in Variant])
    scheme.add_argument("--equilibrium", choices=[e.value for e in Equilibrium])
    scheme.add_argument("--s-q", dest="s_q", type=float, metavar="<float>")
    scheme.add_argument("--s-xy", dest="s_xy", type=float, metavar="<float>")
    scheme.add_argument("--lam", type=float, metavar="<float>", help="velocity scale λ")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spot", parents=[common], help="advected spot maximal stable speeds")
    s.add_argument("--table", type=int, choices=[1, 2], help="1: θ=0, 2: θ=π/4")
    s.add_argument("--theta", type=float, metavar="<rad>", help="advection direction")
    s.add_argument("--sigma-xy", dest="sigma_xy", type=float, metavar="<float>")
    s.add_argument("--sigma-q", dest="sigma_q", type=_floats, metavar="<list>")
    s.add_argument("--nx", type=int, metavar="<int>", help="grid points per side")
    s.add_argument("--steps", type=int, metavar="<int>")
    s.add_argument("--step-size", dest="step_size", type=float, metavar="<float>",
                   help="speed increment in units of λ")
    s.add_argument("--v-max", dest="v_max", type=float, metavar="<float>")
    s.add_argument("--blowup-factor", dest="blowup_factor", type=float, metavar="<float>")
    s.add_argument("--lam", type=float, metavar="<float>")

    s = sub.add_parser("vn-scan", parents=[common, scheme], help="von Neumann stability region")
    s.add_argument("--modes", type=_words, metavar="zero,V")
    s.add_argument("--v-max", dest="v_max", type=float, metavar="<float>")
    s.add_argument("--v-step", dest="v_step", type=float, metavar="<float>")
    s.add_argument("--n-k", dest="n_k", type=int, metavar="<int>")
    s.add_argument("--refine-k", dest="refine_k", type=int, metavar="<int>")

    s = sub.add_parser("linf-region", parents=[common, scheme], help="L∞ stability region")
    s.add_argument("--mode", choices=[m.value for m in RelativeMode])
    s.add_argument("--v-max", dest="v_max", type=float, metavar="<float>")
    s.add_argument("--v-step", dest="v_step", type=float, metavar="<float>")
    s.add_argument("--frame", choices=["original", "rotated"])

    s = sub.add_parser("l2-structure", parents=[common, scheme], help="weighted L² verdicts")
    s.add_argument("--mode", choices=[m.value for m in RelativeMode])
    s.add_argument("--v-max", dest="v_max", type=float, metavar="<float>")
    s.add_argument("--v-step", dest="v_step", type=float, metavar="<float>")

    s = sub.add_parser("eqeq", parents=[common], help="equivalent-equation coefficients")
    s.add_argument("--variant", choices=[v.value for v in Variant])
    s.add_argument("--modes", type=_words, metavar="zero,V")
    s.add_argument("--sigma-q", dest="sigma_q", type=_floats, metavar="<list>")
    s.add_argument("--sigma-xy", dest="sigma_xy", type=_floats, metavar="<list>")
    s.add_argument("--lam", type=float, metavar="<float>")

    s = sub.add_parser("validate", parents=[common], help="randomised property checks")
    s.add_argument("--samples", type=int, metavar="<int>")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = resolve(args.command, args)
    t0 = time.perf_counter()
    code = COMMANDS[args.command](cfg)
    print(f"[{args.command}] done in {time.perf_counter() - t0:.1f} s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
