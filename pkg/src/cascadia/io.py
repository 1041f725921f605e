"""CSV / JSON serialization with a byte-determinism contract.

All floats are emitted with 17 significant digits ('%.17g'), which
round-trips IEEE doubles exactly, so identical inputs produce identical
bytes regardless of platform or worker scheduling.  Line endings are
fixed to '\\n'.
"""

from __future__ import annotations

import json
from dataclasses import asdict, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .cumulant import CumulantSolution, inelastic_saturation, sigma_xx_cumulant
from .doppler import DopplerParams
from .ensemble import EnsembleReport
from .meanfield import MeanFieldSolution
from .params import ModelParams

__all__ = ["fmt17", "write_csv", "write_json", "write_meanfield_csv",
           "write_cumulant_pair_csv", "write_sie_csv", "write_ensemble_csv",
           "write_doppler_csv"]


def fmt17(x) -> str:
    """Format one value: floats at 17 significant digits, the rest via str."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt17(x) for x in row) + "\n")
    return path


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return path


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".json") if path.suffix == ".csv" \
        else Path(str(path) + ".json")


def write_meanfield_csv(path, params: ModelParams,
                        solution: MeanFieldSolution) -> Path:
    """Profile columns site,D_i,re_sigma_minus,im_sigma_minus,sigma_z,
    re_alpha,im_alpha,s_i plus a JSON sidecar (params, residual, converged)."""
    path = Path(path)
    beta = params.beta
    rows = []
    for i in range(params.n_emitters):
        a = solution.alpha[i]
        m = solution.sigma_minus[i]
        rows.append((i + 1, 4.0 * beta * (i + 1), m.real, m.imag,
                     solution.sigma_z[i], a.real, a.imag,
                     8.0 * abs(a) ** 2))
    write_csv(path, ["site", "D_i", "re_sigma_minus", "im_sigma_minus",
                     "sigma_z", "re_alpha", "im_alpha", "s_i"], rows)
    write_json(_sidecar(path), {
        "params": {f.name: getattr(params, f.name) for f in fields(params)},
        "model": solution.model_tag,
        "residual": solution.residual,
        "converged": solution.converged,
    })
    return path


def write_cumulant_pair_csv(path, sol: CumulantSolution) -> Path:
    """Pair-cumulant map, upper triangle: i,j,D_i,D_j,sigxx_cumulant."""
    rows = []
    for i in range(1, sol.n + 1):       # 1-based site labels in the CSV
        for j in range(i + 1, sol.n + 1):
            rows.append((i, j, 4.0 * sol.beta * i, 4.0 * sol.beta * j,
                         sigma_xx_cumulant(sol, i - 1, j - 1)))
    return write_csv(path, ["i", "j", "D_i", "D_j", "sigxx_cumulant"], rows)


def write_sie_csv(path, sol: CumulantSolution) -> Path:
    """Cumulative inelastic output profile: site,D_i,s_ie_over_s0."""
    s0 = sol.s0 if sol.s0 > 0 else 1.0
    rows = [(i, 4.0 * sol.beta * i, inelastic_saturation(sol, upto=i) / s0)
            for i in range(1, sol.n + 1)]
    return write_csv(path, ["site", "D_i", "s_ie_over_s0"], rows)


def write_ensemble_csv(path, params: ModelParams,
                       report: EnsembleReport) -> Path:
    """site,D_i,mean_diff,variance plus a JSON sidecar
    (eta, M, seed, excluded_count)."""
    path = Path(path)
    beta = params.beta
    rows = [(i + 1, 4.0 * beta * (i + 1), report.mean_diff[i],
             report.variance[i]) for i in range(params.n_emitters)]
    write_csv(path, ["site", "D_i", "mean_diff", "variance"], rows)
    write_json(_sidecar(path), {
        "eta": report.eta,
        "M": report.n_realizations,
        "seed": params.seed,
        "excluded_count": report.excluded,
    })
    return path


def write_doppler_csv(path, p: DopplerParams, profile: np.ndarray) -> Path:
    """D,s,s_over_s0,transmission; transmission = s(D_max)/s0 (endpoint)."""
    s0 = p.s0 if p.s0 > 0 else 1.0
    trans = profile[-1, 1] / s0
    rows = [(D, s, s / s0, trans) for D, s in profile]
    return write_csv(path, ["D", "s", "s_over_s0", "transmission"], rows)
