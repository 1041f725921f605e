"""Shared time-integration scaffolding for steady-state searches.

All solvers in this package reach steady state by integrating from a
physical initial condition rather than by root finding: the nonlinear
fixed-point equations are multistable in parts of parameter space, and
time integration from the ground state (plus drive ramps for branch
continuation) selects physical branches the way an experiment would.

State vectors are packed real (complex moments split into Re/Im by the
caller) so that stiff solvers can be used interchangeably.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericalInstability

__all__ = ["RampSpec", "SolverOptions", "SteadyResult", "integrate_to_steady",
           "integrate_ramp"]


@dataclass(frozen=True)
class RampSpec:
    """Linear drive ramp s₀: s0_start → s0_end over t_ramp, for hysteresis
    continuation.  After the ramp the drive is held at s0_end until the
    steady-state criterion is met."""

    s0_start: float
    s0_end: float
    t_ramp: float

    def __post_init__(self):
        if self.s0_start < 0 or self.s0_end < 0 or self.t_ramp <= 0:
            raise ValueError("ramp requires non-negative drives and t_ramp > 0")

    def s0_at(self, t: float) -> float:
        x = min(max(t / self.t_ramp, 0.0), 1.0)
        return self.s0_start + (self.s0_end - self.s0_start) * x


@dataclass(frozen=True)
class SolverOptions:
    """Integrator contract shared by the mean-field/cumulant/exact solvers."""

    # rel_tol must sit well below steady_state_residual: the integrator's
    # local error rattles the state off the fixed point at ~rel_tol×rates,
    # and a residual target below that floor is never met
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    steady_state_residual: float = 1e-9
    t_max: float = 1e4
    ramp: Optional[RampSpec] = None
    method: str = "auto"  # auto | LSODA | DOP853 | RK45 | BDF | Radau

    def __post_init__(self):
        if min(self.abs_tol, self.rel_tol, self.steady_state_residual) <= 0:
            raise ValueError("tolerances must be > 0")
        if self.t_max <= 0:
            raise ValueError("t_max must be > 0")


@dataclass
class SteadyResult:
    y: np.ndarray
    t: float
    residual: float
    converged: bool


def _pick_method(opts: SolverOptions, ndof: int) -> str:
    if opts.method != "auto":
        return opts.method
    # LSODA auto-detects stiffness but factors dense Jacobians; past ~1200
    # real dof the factorization dominates and the explicit RK wins.
    return "LSODA" if ndof <= 1200 else "DOP853"


def _check_finite(y: np.ndarray):
    if not np.all(np.isfinite(y)):
        raise NumericalInstability("integration produced non-finite state")


def integrate_ramp(rhs_t: Callable, y0: np.ndarray, t_ramp: float,
                   opts: SolverOptions) -> np.ndarray:
    """Integrate a time-dependent RHS over [0, t_ramp] (no residual check)."""
    method = _pick_method(opts, y0.size)
    sol = solve_ivp(rhs_t, (0.0, t_ramp), y0, method=method,
                    rtol=opts.rel_tol, atol=opts.abs_tol, dense_output=False)
    if not sol.success:
        raise NumericalInstability(f"ramp integration failed: {sol.message}")
    y = sol.y[:, -1]
    _check_finite(y)
    return y


def integrate_to_steady(rhs: Callable, y0: np.ndarray,
                        opts: SolverOptions) -> SteadyResult:
    """Integrate dy/dt = rhs(t, y) until max|rhs| < steady_state_residual.

    Time is consumed in growing chunks (25 → 400 Γ_tot⁻¹) with a residual
    check between chunks; this keeps dense output off and avoids paying for
    interpolation while still detecting convergence early.  Returns a
    flagged (converged=False) result at t_max rather than raising, so sweep
    drivers can record unresolved cells.  NaN/Inf aborts hard.
    """
    y = np.asarray(y0, dtype=float).copy()
    _check_finite(y)
    method = _pick_method(opts, y.size)
    t, chunk = 0.0, 25.0
    residual = float(np.max(np.abs(rhs(t, y)))) if y.size else 0.0
    if residual < opts.steady_state_residual:
        return SteadyResult(y=y, t=t, residual=residual, converged=True)

    while t < opts.t_max:
        t_next = min(t + chunk, opts.t_max)
        sol = solve_ivp(rhs, (t, t_next), y, method=method,
                        rtol=opts.rel_tol, atol=opts.abs_tol)
        if not sol.success:
            raise NumericalInstability(f"integration failed: {sol.message}")
        y = sol.y[:, -1]
        _check_finite(y)
        t = t_next
        residual = float(np.max(np.abs(rhs(t, y))))
        if residual < opts.steady_state_residual:
            return SteadyResult(y=y, t=t, residual=residual, converged=True)
        chunk = min(chunk * 2.0, 400.0)

    return SteadyResult(y=y, t=t, residual=residual, converged=False)
