"""Command-line front end: sweep runner and figure-data generators.

Every run is reproducible from its manifest: CLI flags are overrides onto
a JSON spec, the manifest echoes the fully-resolved spec, and CSV payloads
are byte-identical across reruns (fixed grid-cell order, fixed-order
reduction, 17-significant-digit floats).

Exit codes: 0 ok; 2 spec validation failure; 3 a grid cell hit a
numerical instability.  Non-converged cells are recorded in the manifest
("unresolved") and skipped, not fatal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .analytic import mean_polarization
from .cumulant import inelastic_saturation, sigma_xx_cumulant, solve_ce2
from .doppler import DopplerParams, doppler_profile
from .ensemble import run_ensemble
from .errors import NonConvergence, NoPhysicalRoot, NumericalInstability
from .io import (write_csv, write_cumulant_pair_csv, write_ensemble_csv,
                 write_json, write_sie_csv)
from .meanfield import field_observables, solve_steady_state
from .params import ModelParams, build_chain

MODELS = ("BWM", "EAM", "DM", "UWM", "CE2-UWM", "DOPPLER")
AXES = ("eta", "s0", "s_tilde", "D")
FIGS = ("fig2", "fig3", "fig4", "fig5", "fig7", "fig8")

_SCALAR_COLS = ("s_out_right", "s_out_left", "j_z", "s_ie_total")


class SpecError(Exception):
    """Sweep/figure spec validation failure (CLI exit code 2)."""


# --- sweep spec --------------------------------------------------------------


@dataclass
class Axis:
    name: str
    kind: str      # "log" | "lin"
    lo: float
    hi: float
    n: int

    def values(self) -> np.ndarray:
        if self.n == 1:
            return np.array([self.lo])
        if self.kind == "log":
            return np.geomspace(self.lo, self.hi, self.n)
        return np.linspace(self.lo, self.hi, self.n)


def _parse_axis(text: str) -> Axis:
    # grammar: name=kind:lo..hi:n  e.g. s0=log:2.4..80:7
    try:
        name, rest = text.split("=", 1)
        kind, rng, n = rest.split(":")
        lo, hi = rng.split("..")
        ax = Axis(name=name.strip(), kind=kind.strip(),
                  lo=float(lo), hi=float(hi), n=int(n))
    except (ValueError, AttributeError):
        raise SpecError(f"axis {text!r}: expected name=log|lin:lo..hi:n")
    if ax.name not in AXES:
        raise SpecError(f"axis {text!r}: unknown axis name "
                        f"(choose from {', '.join(AXES)})")
    if ax.kind not in ("log", "lin"):
        raise SpecError(f"axis {text!r}: kind must be 'log' or 'lin'")
    if ax.n < 1:
        raise SpecError(f"axis {text!r}: grid size must be >= 1")
    if ax.kind == "log" and (ax.lo <= 0 or ax.hi <= 0):
        raise SpecError(f"axis {text!r}: log axis needs positive bounds")
    return ax


@dataclass
class SweepSpec:
    model: str
    axes: List[Axis]
    fixed: dict
    out: str = "sweep"
    fmt: str = "csv"
    jobs: int = 0          # 0 = auto

    def validate(self):
        if self.model not in MODELS:
            raise SpecError(f"model {self.model!r}: choose from "
                            f"{', '.join(MODELS)}")
        if not 1 <= len(self.axes) <= 2:
            raise SpecError("need one or two --axis specifications")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise SpecError("axes must be distinct")
        if self.fmt not in ("csv", "json"):
            raise SpecError("format must be csv or json")
        f = self.fixed
        if f["N"] < 1:
            raise SpecError("field N: need at least one emitter")
        if not 0.0 <= f["beta"] <= 0.5:
            raise SpecError("field beta: must lie in [0, 1/2]")
        if f["s0"] < 0 or f["eta"] < 0 or f["xi"] < 0:
            raise SpecError("fields s0, eta, xi must be >= 0")
        if self.model == "DOPPLER" and "eta" in names:
            raise SpecError("DOPPLER has no disorder axis eta")

    def payload(self) -> dict:
        return {
            "model": self.model,
            "axes": [{"name": a.name, "kind": a.kind, "lo": a.lo,
                      "hi": a.hi, "n": a.n} for a in self.axes],
            "fixed": dict(self.fixed),
            "out": self.out,
            "format": self.fmt,
            "jobs": self.jobs,
        }


_FIXED_DEFAULTS = {"N": 100, "beta": 0.005, "s0": 2.0, "eta": 0.0,
                   "seed": 0, "k0": 1.0, "xi": 0.0, "d_max": 0.0,
                   "stream": 0}


def _spec_from_args(args) -> SweepSpec:
    base: dict = {}
    if args.spec:
        try:
            base = json.loads(Path(args.spec).read_text())
        except OSError as exc:
            raise SpecError(f"spec file: {exc}")
        except json.JSONDecodeError as exc:
            raise SpecError(f"spec file line {exc.lineno}: {exc.msg}")
        if not isinstance(base, dict):
            raise SpecError("spec file: expected a JSON object")
    unknown = set(base) - {"model", "axes", "fixed", "out", "format", "jobs"}
    if unknown:
        raise SpecError(f"spec file: unknown keys {sorted(unknown)}")
    fixed = dict(_FIXED_DEFAULTS)
    fixed.update(base.get("fixed", {}))
    unknown = set(fixed) - set(_FIXED_DEFAULTS)
    if unknown:
        raise SpecError(f"spec file fixed: unknown fields {sorted(unknown)}")

    axes = []
    for a in base.get("axes", []):
        if isinstance(a, str):  # grammar form, same as --axis
            axes.append(_parse_axis(a))
        elif isinstance(a, dict):
            try:
                axes.append(Axis(**a))
            except TypeError:
                raise SpecError(f"spec file axis {a!r}: expected keys "
                                "name/kind/lo/hi/n")
        else:
            raise SpecError(f"spec file axis {a!r}: expected a string or object")
    if args.axis:
        axes = [_parse_axis(t) for t in args.axis]
    for name, val in (("N", args.N), ("beta", args.beta), ("s0", args.s0),
                      ("eta", args.eta), ("seed", args.seed), ("k0", args.k0),
                      ("xi", args.xi), ("d_max", args.d_max),
                      ("stream", args.stream)):
        if val is not None:
            fixed[name] = val
    fixed["N"] = int(fixed["N"])
    fixed["seed"] = int(fixed["seed"])
    fixed["stream"] = int(fixed["stream"])

    model = args.model or base.get("model")
    if not model:
        raise SpecError("no model given (--model or spec file)")
    spec = SweepSpec(model=model, axes=axes, fixed=fixed,
                     out=args.out or base.get("out", "sweep"),
                     fmt=args.format or base.get("format", "csv"),
                     jobs=_resolve_jobs(args.jobs if args.jobs is not None
                                        else base.get("jobs", 0)))
    spec.validate()
    return spec


def _resolve_jobs(jobs: int) -> int:
    if jobs and jobs > 0:
        return jobs
    env = os.environ.get("CASCADIA_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --- grid-cell evaluation ----------------------------------------------------


def _cell_config(fixed: dict, coords: List[Tuple[str, float]]) -> dict:
    cfg = dict(fixed)
    # depth first so an s_tilde coordinate sees the cell's own D
    for name, v in sorted(coords, key=lambda c: c[0] != "D"):
        if name == "D":
            if cfg.get("_doppler"):
                cfg["d_max"] = v
            else:
                cfg["beta"] = v / (4.0 * cfg["N"])
        elif name == "s_tilde":
            d_tot = (cfg["d_max"] if cfg.get("_doppler")
                     else 4.0 * cfg["beta"] * cfg["N"])
            cfg["s0"] = v * d_tot
        else:
            cfg[name] = v
    return cfg


def _eval_cell(task: dict) -> dict:
    """One grid cell; returns profile rows, a scalar row, and a status."""
    model = task["model"]
    coords = task["coords"]
    cfg = _cell_config(task["fixed"], coords)
    prefix = [v for _, v in coords]
    out = {"index": task["index"], "coords": coords, "profile": [],
           "scalar": None, "status": "ok"}
    nan = float("nan")
    try:
        if model == "DOPPLER":
            d_max = cfg["d_max"] or 200.0 * (1.0 + 4.0 * cfg["xi"] ** 2)
            p = DopplerParams(xi_delta=cfg["xi"], s0=cfg["s0"], d_max=d_max)
            prof = doppler_profile(p)
            s0 = cfg["s0"] if cfg["s0"] > 0 else 1.0
            out["profile"] = [prefix + [D, s, s / s0] for D, s in prof]
            out["scalar"] = prefix + [prof[-1, 1], nan, nan, nan]
        elif model == "CE2-UWM":
            params = ModelParams.from_beta(beta=cfg["beta"], s0=cfg["s0"],
                                           n_emitters=cfg["N"],
                                           seed=cfg["seed"])
            sol = solve_ce2(params)
            s0 = cfg["s0"] if cfg["s0"] > 0 else 1.0
            for i in range(1, sol.n + 1):
                nn = (sigma_xx_cumulant(sol, i - 1, i) if i < sol.n else nan)
                out["profile"].append(
                    prefix + [i, 4.0 * sol.beta * i, sol.sigma_z[i - 1],
                              inelastic_saturation(sol, upto=i) / s0, nn])
            out["scalar"] = prefix + [nan, nan,
                                      float(np.mean(sol.sigma_z)),
                                      inelastic_saturation(sol)]
        else:
            params = ModelParams.from_beta(beta=cfg["beta"], s0=cfg["s0"],
                                           n_emitters=cfg["N"],
                                           eta=cfg["eta"], seed=cfg["seed"],
                                           k0_spacing=cfg["k0"])
            chain = (build_chain(params, stream=cfg["stream"])
                     if model == "BWM" else None)
            sol = solve_steady_state(model, params, chain)
            if not sol.converged:
                out["status"] = "unresolved"
                return out
            obs = field_observables(sol, params, chain)
            beta = params.beta
            for i in range(params.n_emitters):
                m, a = sol.sigma_minus[i], sol.alpha[i]
                out["profile"].append(
                    prefix + [i + 1, 4.0 * beta * (i + 1), m.real, m.imag,
                              sol.sigma_z[i], a.real, a.imag,
                              8.0 * abs(a) ** 2])
            out["scalar"] = prefix + [obs.s_out_right, obs.s_out_left,
                                      float(np.mean(sol.sigma_z)), nan]
    except (NonConvergence, NoPhysicalRoot):
        out["status"] = "unresolved"
    except NumericalInstability:
        out["status"] = "instability"
    return out


_PROFILE_COLS = {
    "DOPPLER": ["D", "s", "s_over_s0"],
    "CE2-UWM": ["site", "D_i", "sigma_z", "s_ie_over_s0", "nn_sigxx_cumulant"],
    "meanfield": ["site", "D_i", "re_sigma_minus", "im_sigma_minus",
                  "sigma_z", "re_alpha", "im_alpha", "s_i"],
}


def cmd_sweep(args) -> int:
    spec = _spec_from_args(args)
    t0 = time.time()

    grids = [a.values() for a in spec.axes]
    names = [a.name for a in spec.axes]
    fixed = dict(spec.fixed)
    fixed["_doppler"] = spec.model == "DOPPLER"
    tasks = []
    if len(grids) == 1:
        points = [[(names[0], float(v))] for v in grids[0]]
    else:
        points = [[(names[0], float(u)), (names[1], float(v))]
                  for u in grids[0] for v in grids[1]]
    for idx, coords in enumerate(points):
        tasks.append({"index": idx, "model": spec.model, "coords": coords,
                      "fixed": fixed})

    jobs = min(spec.jobs, len(tasks))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_eval_cell, tasks))
    else:
        results = [_eval_cell(t) for t in tasks]
    results.sort(key=lambda r: r["index"])

    kind = spec.model if spec.model in _PROFILE_COLS else "meanfield"
    prof_header = names + _PROFILE_COLS[kind]
    scal_header = names + list(_SCALAR_COLS)
    prof_rows, scal_rows, unresolved, instability = [], [], [], []
    for r in results:
        if r["status"] == "ok":
            prof_rows.extend(r["profile"])
            scal_rows.append(r["scalar"])
        elif r["status"] == "unresolved":
            unresolved.append(r["coords"])
        else:
            instability.append(r["coords"])

    base = Path(spec.out)
    outputs = []
    if spec.fmt == "csv":
        outputs.append(str(write_csv(base.parent / (base.name + "_profile.csv"),
                                     prof_header, prof_rows)))
        outputs.append(str(write_csv(base.parent / (base.name + "_scalars.csv"),
                                     scal_header, scal_rows)))
    else:
        payload = {
            "profile": {"columns": prof_header, "rows": prof_rows},
            "scalars": {"columns": scal_header, "rows": scal_rows},
        }
        outputs.append(str(write_json(base.parent / (base.name + "_data.json"),
                                      payload)))

    manifest = {
        "spec": spec.payload(),
        "version": _version(),
        "seed": spec.fixed["seed"],
        "wall_time_s": time.time() - t0,
        "cells": len(tasks),
        "unresolved": unresolved,
        "unresolved_count": len(unresolved),
        "instability": instability,
        "outputs": outputs,
    }
    write_json(base.parent / (base.name + ".manifest.json"), manifest)
    print(f"{len(tasks)} cells -> {', '.join(outputs)}"
          f" ({len(unresolved)} unresolved)")
    if instability:
        print(f"numerical instability in {len(instability)} cells",
              file=sys.stderr)
        return 3
    return 0


# --- figure registry ---------------------------------------------------------


def _fig_dir(args, name: str) -> Path:
    d = Path(args.out or f"fig_{name}")
    d.mkdir(parents=True, exist_ok=True)
    return d


def _fig2(args, manifest: dict) -> List[str]:
    """Steady-state inversion profiles across drive strengths (two
    directional limits), N=2000, β=0.005, s0 log-spaced 2.4..80."""
    n = int(args.N or 2000)
    beta = args.beta if args.beta is not None else 0.005
    s0s = np.geomspace(2.4, 80.0, 7)
    rows = []
    for model in ("UWM", "DM"):
        for s0 in s0s:
            params = ModelParams.from_beta(beta=beta, s0=float(s0),
                                           n_emitters=n)
            sol = solve_steady_state(model, params)
            for i in range(n):
                rows.append((model, s0, i + 1, 4.0 * beta * (i + 1),
                             sol.sigma_z[i]))
    out = _fig_dir(args, "fig2")
    path = write_csv(out / "inversion_profiles.csv",
                     ["model", "s0", "site", "D_i", "sigma_z"], rows)
    manifest["params"] = {"N": n, "beta": beta, "s0_grid": list(map(float, s0s))}
    return [str(path)]


def _fig3(args, manifest: dict) -> List[str]:
    """Realization-vs-equation averaging maps over disorder strength."""
    n = int(args.N or 2000)
    beta = args.beta if args.beta is not None else 0.005
    s0 = args.s0 if args.s0 is not None else 20.0
    M = args.M or 20
    etas = np.geomspace(1e-3, 0.3, 7)
    jobs = _resolve_jobs(args.jobs or 0)
    rows = []
    excluded = {}
    for eta in etas:
        params = ModelParams.from_beta(beta=beta, s0=s0, n_emitters=n,
                                       eta=float(eta),
                                       seed=int(args.seed or 0))
        rep = run_ensemble(params, M=M, jobs=jobs)
        excluded[f"{eta:.6g}"] = rep.excluded
        for i in range(n):
            rows.append((eta, i + 1, 4.0 * beta * (i + 1),
                         rep.mean_diff[i], rep.variance[i]))
    out = _fig_dir(args, "fig3")
    path = write_csv(out / "ensemble_maps.csv",
                     ["eta", "site", "D_i", "mean_diff", "variance"], rows)
    manifest["params"] = {"N": n, "beta": beta, "s0": s0, "M": M,
                          "eta_grid": list(map(float, etas)),
                          "excluded": excluded}
    return [str(path)]


def _fig4(args, manifest: dict) -> List[str]:
    """Output-saturation maps over (η, s̃) for the disorder-averaged model,
    plus per-realization output scatter at three disorder strengths.

    Desk-scale reduction: 20×30 heatmap grid (paper-scale grids are an
    override away) and M=6 realizations at N=500 for the scatter."""
    n = int(args.N or 1000)
    beta = args.beta if args.beta is not None else 0.005
    d_tot = 4.0 * beta * n
    etas = np.geomspace(1e-3, 1.0, 20)
    stils = np.linspace(0.05, 4.0, 30)
    jobs = _resolve_jobs(args.jobs or 0)

    tasks = []
    for idx, (eta, st) in enumerate((e, s) for e in etas for s in stils):
        tasks.append({"index": idx, "model": "EAM",
                      "coords": [("eta", float(eta)),
                                 ("s_tilde", float(st))],
                      "fixed": dict(_FIXED_DEFAULTS, N=n, beta=beta,
                                    s0=float(st * d_tot), _doppler=False)})
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_eval_cell, tasks))
    else:
        results = [_eval_cell(t) for t in tasks]
    results.sort(key=lambda r: r["index"])
    # scalar rows carry the 2-coordinate prefix: outputs sit at [2], [3]
    heat_rows = [(r["coords"][0][1], r["coords"][1][1],
                  r["scalar"][2], r["scalar"][3])
                 for r in results if r["status"] == "ok"]
    unresolved = [r["coords"] for r in results if r["status"] != "ok"]

    n_sc = min(500, n)
    M_sc = args.M or 6
    scat_rows = []
    for eta in (0.001, 0.02, 0.1):
        for st in np.linspace(0.25, 3.0, 8):
            params = ModelParams.from_beta(beta=beta, s0=float(st * 4 * beta * n_sc),
                                           n_emitters=n_sc, eta=eta,
                                           seed=int(args.seed or 0))
            rep = run_ensemble(params, M=M_sc, jobs=jobs)
            for mu in range(M_sc):
                r_out, l_out = rep.per_realization_outputs[mu]
                scat_rows.append((eta, float(st), mu, r_out, l_out))

    out = _fig_dir(args, "fig4")
    paths = [
        write_csv(out / "output_heatmap.csv",
                  ["eta", "s_tilde", "s_out_right", "s_out_left"], heat_rows),
        write_csv(out / "realization_scatter.csv",
                  ["eta", "s_tilde", "realization", "s_out_right",
                   "s_out_left"], scat_rows),
    ]
    manifest["params"] = {"N": n, "beta": beta,
                          "heatmap_grid": [len(etas), len(stils)],
                          "scatter": {"N": n_sc, "M": M_sc}}
    manifest["reductions"] = ("heatmap 20x30 and scatter N=500/M=6 keep the "
                              "default run desk-sized; pass --N/--M to scale")
    manifest["unresolved"] = unresolved
    return [str(p) for p in paths]


def _fig5(args, manifest: dict) -> List[str]:
    """Medium-averaged inversion j_z vs normalized drive for three depths."""
    rows = []
    stils = np.linspace(0.05, 4.0, 160)
    for d_tot in (10.0, 40.0, 160.0):
        for st in stils:
            rows.append((d_tot, float(st),
                         mean_polarization(float(st * d_tot), d_tot)))
    out = _fig_dir(args, "fig5")
    path = write_csv(out / "jz_curves.csv", ["D", "s_tilde", "j_z"], rows)
    manifest["params"] = {"D_values": [10.0, 40.0, 160.0],
                          "s_tilde_grid": [0.05, 4.0, 160]}
    return [str(path)]


def _fig7(args, manifest: dict) -> List[str]:
    """Pair-correlation map and inelastic output profile (second-order
    cumulant run with D_i spanning [0, 2 s0])."""
    s0 = args.s0 if args.s0 is not None else 80.0
    n = int(args.sites or args.N or 200)
    beta = s0 / (2.0 * n)       # D_N = 4βn = 2 s0
    if beta > 0.5:
        raise SpecError(f"sites={n} too few for s0={s0}: "
                        f"beta = s0/(2 sites) = {beta} > 1/2")
    params = ModelParams.from_beta(beta=beta, s0=s0, n_emitters=n)
    sol = solve_ce2(params)
    out = _fig_dir(args, "fig7")
    paths = [write_cumulant_pair_csv(out / "xx_cumulant_map.csv", sol),
             write_sie_csv(out / "inelastic_profile.csv", sol)]
    manifest["params"] = {"s0": s0, "sites": n, "beta": beta}
    return [str(p) for p in paths]


def _fig8(args, manifest: dict) -> List[str]:
    """Transmission vs normalized drive for broadened media."""
    rows = []
    stils = np.arange(0.5, 1.5001, 0.025)
    for xi in (0.0, 1.0, 10.0, 37.0):
        d_max = 200.0 * (1.0 + 4.0 * xi * xi)
        grid = np.array([0.0, d_max])
        for st in stils:
            s0 = float(st * d_max)
            prof = doppler_profile(DopplerParams(xi_delta=xi, s0=s0,
                                                 d_max=d_max, grid=grid))
            rows.append((xi, float(st), prof[-1, 1] / s0))
    out = _fig_dir(args, "fig8")
    path = write_csv(out / "transmission.csv",
                     ["xi_delta", "s_tilde", "transmission"], rows)
    manifest["params"] = {"xi_values": [0.0, 1.0, 10.0, 37.0],
                          "depth_rule": "D = 200*(1+4*xi^2)"}
    return [str(path)]


_FIG_REGISTRY = {"fig2": _fig2, "fig3": _fig3, "fig4": _fig4,
                 "fig5": _fig5, "fig7": _fig7, "fig8": _fig8}


def cmd_fig(args) -> int:
    if args.name not in _FIG_REGISTRY:
        print(f"unknown figure {args.name!r}: choose from "
              f"{', '.join(FIGS)}", file=sys.stderr)
        return 2
    t0 = time.time()
    manifest = {"figure": args.name, "version": _version(),
                "seed": int(args.seed or 0)}
    outputs = _FIG_REGISTRY[args.name](args, manifest)
    manifest["wall_time_s"] = time.time() - t0
    manifest["outputs"] = outputs
    out_dir = Path(outputs[0]).parent if outputs else _fig_dir(args, args.name)
    write_json(out_dir / "manifest.json", manifest)
    print(f"{args.name} -> {', '.join(outputs)}")
    return 0


# --- entry point -------------------------------------------------------------


def _version() -> str:
    from . import __version__
    return __version__


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cascadia",
        description="Driven waveguide-QED emitter chains: sweeps and "
                    "figure data.")
    sub = ap.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="evaluate a solver over a 1D/2D grid")
    sw.add_argument("--spec", help="JSON sweep spec (flags override it)")
    sw.add_argument("--model", choices=MODELS)
    sw.add_argument("--axis", action="append",
                    help="name=log|lin:lo..hi:n (repeat for a 2D grid)")
    sw.add_argument("--N", type=int, help="emitter / site count")
    sw.add_argument("--beta", type=float)
    sw.add_argument("--s0", type=float)
    sw.add_argument("--eta", type=float)
    sw.add_argument("--seed", type=int)
    sw.add_argument("--k0", type=float, help="mean spacing in λ/2 units")
    sw.add_argument("--xi", type=float, help="Doppler width ξ_Δ")
    sw.add_argument("--d-max", dest="d_max", type=float)
    sw.add_argument("--stream", type=int, help="chain realization stream")
    sw.add_argument("--out", help="output basename (default 'sweep')")
    sw.add_argument("--format", choices=("csv", "json"))
    sw.add_argument("--jobs", type=int)
    sw.set_defaults(func=cmd_sweep)

    fg = sub.add_parser("fig", help="run a pre-registered figure dataset")
    fg.add_argument("name", help="|".join(FIGS))
    fg.add_argument("--N", type=int)
    fg.add_argument("--M", type=int, help="realization count")
    fg.add_argument("--beta", type=float)
    fg.add_argument("--s0", type=float)
    fg.add_argument("--sites", type=int, help="cumulant site count")
    fg.add_argument("--seed", type=int)
    fg.add_argument("--jobs", type=int)
    fg.add_argument("--out", help="output directory (default fig_<name>)")
    fg.set_defaults(func=cmd_fig)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return 2
    except NumericalInstability as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
