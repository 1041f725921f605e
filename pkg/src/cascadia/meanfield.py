"""Mean-field steady states of the four chain models.

The factorized equations of motion for every model are

    d⟨σ⁻_i⟩/dt = i α_i ⟨σᶻ_i⟩ + (iΔ_i − Γ_tot/2) ⟨σ⁻_i⟩
    d⟨σᶻ_i⟩/dt = −4 Im(α_i* ⟨σ⁻_i⟩) − Γ_tot (1 + ⟨σᶻ_i⟩)

with all model structure in the effective drive α_i:

    UWM   α_i = Ω/2 − i(Γ₁D/2) Σ_{j<i} ⟨σ⁻_j⟩
    EAM   … plus backward term Σ_{j>i} e^{−2(ηπ)²(j−i)} ⟨σ⁻_j⟩
    BWM   … plus backward term Σ_{j>i} e^{2ik₀(z_j−z_i)} ⟨σ⁻_j⟩  (spiral gauge)
    DM    α_i = Ω/2 − i(Γ₁D/2) Σ_{j≠i} ⟨σ⁻_j⟩   (= (N−1)⟨σ⁻⟩ when uniform)

All drive sums are evaluated in O(N): forward sums are exclusive cumulative
sums, the EAM backward kernel is a first-order linear recurrence, and BWM
backward phases factorize as u_j ū_i with u_j = e^{4πi z_j} (positions in λ).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import root as _scipy_root
from scipy.signal import lfilter

from .errors import NonConvergence
from .params import EmitterChain, ModelParams, averaged_phase_factor
from .steady import RampSpec, SolverOptions, integrate_ramp, integrate_to_steady

__all__ = [
    "MODEL_TAGS", "MeanFieldSolution", "FieldObservables",
    "effective_drive", "solve_steady_state", "field_observables",
    "uwm_saturation_recursion", "uwm_cascade_fixed_point", "solve_collective",
]

MODEL_TAGS = ("BWM", "EAM", "DM", "UWM")

_POLISH_MAX_SITES = 700  # dense root polish beyond this costs more than it buys


@dataclass(frozen=True)
class MeanFieldSolution:
    sigma_minus: np.ndarray  # ⟨σ⁻_i⟩, complex
    sigma_z: np.ndarray      # ⟨σᶻ_i⟩, real
    alpha: np.ndarray        # effective drives α_i at the final state
    converged: bool
    residual: float          # max-norm of the RHS at the final state
    model_tag: str

    def bloch_norm(self) -> np.ndarray:
        """4|⟨σ⁻⟩|² + ⟨σᶻ⟩² per site (≤ 1 for physical states)."""
        return 4.0 * np.abs(self.sigma_minus) ** 2 + self.sigma_z ** 2


@dataclass(frozen=True)
class FieldObservables:
    alpha_profile: np.ndarray
    s_profile: np.ndarray     # s_i = 8|α_i|²/Γ_tot²
    s_out_right: float
    s_out_left: float


# --- effective drives ------------------------------------------------------


class _DrivePlan:
    """Per-solve precomputation for O(N) drive evaluation."""

    def __init__(self, model_tag: str, params: ModelParams,
                 chain: Optional[EmitterChain]):
        if model_tag not in MODEL_TAGS:
            raise ValueError(f"unknown model tag {model_tag!r}")
        self.tag = model_tag
        self.n = params.n_emitters
        self.g = params.gamma_1d / 2.0  # Γ₁D/2
        if model_tag == "BWM":
            if chain is None:
                raise ValueError("BWM requires a chain realization")
            if len(chain) != self.n:
                raise ValueError("chain length does not match n_emitters")
            # 2k₀z mod 2π via z mod λ/2: keeps Bragg phases exactly 1
            self.u = np.exp(4j * np.pi * np.mod(chain.positions, 0.5))
        elif model_tag == "EAM":
            self.r = averaged_phase_factor(params.eta, 1) if params.eta > 0 else 1.0

    def alpha(self, m: np.ndarray, omega: float) -> np.ndarray:
        base = 0.5 * omega
        if self.tag == "DM":
            return base - 1j * self.g * (np.sum(m) - m)
        fwd = np.cumsum(m)
        fwd = np.concatenate(([0.0 + 0.0j], fwd[:-1]))  # Σ_{j<i}
        if self.tag == "UWM":
            return base - 1j * self.g * fwd
        if self.tag == "EAM":
            r = self.r
            if r == 0.0:
                return base - 1j * self.g * fwd
            # b_i = Σ_{j>i} r^{j−i} m_j by the recurrence b_i = r(m_{i+1}+b_{i+1})
            rev = m[::-1]
            bwd = lfilter([0.0, r], [1.0, -r], rev)[::-1]
            return base - 1j * self.g * (fwd + bwd)
        # BWM: Σ_{j>i} u_j ū_i m_j as a suffix sum of u·m
        um = self.u * m
        suf = np.cumsum(um[::-1])[::-1]
        suf = np.concatenate((suf[1:], [0.0 + 0.0j]))
        return base - 1j * self.g * (fwd + np.conj(self.u) * suf)


def effective_drive(model_tag: str, params: ModelParams,
                    chain: Optional[EmitterChain],
                    sigma_minus: np.ndarray) -> np.ndarray:
    """α_i for the given model at drive Ω = params.rabi."""
    m = np.asarray(sigma_minus, dtype=complex)
    if m.shape != (params.n_emitters,):
        raise ValueError("sigma_minus must have length n_emitters")
    return _DrivePlan(model_tag, params, chain).alpha(m, params.rabi)


# --- time-domain solve ------------------------------------------------------


def _pack(m: np.ndarray, z: np.ndarray) -> np.ndarray:
    return np.concatenate((m.real, m.imag, z))


def _unpack(y: np.ndarray, n: int):
    return y[:n] + 1j * y[n:2 * n], y[2 * n:]


def _make_rhs(plan: _DrivePlan, detunings: Optional[np.ndarray]):
    n = plan.n

    def rhs(y, omega):
        m, z = _unpack(y, n)
        a = plan.alpha(m, omega)
        dm = 1j * a * z - 0.5 * m
        if detunings is not None:
            dm += 1j * detunings * m
        dz = -4.0 * np.imag(np.conj(a) * m) - (1.0 + z)
        return np.concatenate((dm.real, dm.imag, dz))

    return rhs


def _polish(rhs0, y, residual):
    """Newton-ish refinement of an already-converged state.

    Accepted only if it stays on the same branch (tiny move) and actually
    reduces the residual — multistable models must not be allowed to hop.
    """
    sol = _scipy_root(rhs0, y, method="hybr", tol=1e-13)
    ynew = sol.x
    if not np.all(np.isfinite(ynew)):
        return y, residual
    moved = np.max(np.abs(ynew - y)) / (1.0 + np.max(np.abs(y)))
    rnew = float(np.max(np.abs(rhs0(ynew))))
    if moved < 1e-5 and rnew < residual:
        return ynew, rnew
    return y, residual


def solve_steady_state(model_tag: str, params: ModelParams,
                       chain: Optional[EmitterChain] = None,
                       opts: Optional[SolverOptions] = None,
                       initial: Optional[MeanFieldSolution] = None,
                       ) -> MeanFieldSolution:
    """Integrate the mean-field equations to steady state.

    Starts from the ground state (⟨σ⁻⟩ = 0, ⟨σᶻ⟩ = −1) unless `initial`
    (warm start for branch continuation) is given.  `opts.ramp` ramps the
    drive s₀ linearly over t_ramp before holding it at ramp.s0_end; the
    returned solution then corresponds to drive ramp.s0_end, not params.rabi.
    Non-convergence at t_max returns a flagged partial result.
    """
    opts = opts or SolverOptions()
    n = params.n_emitters

    if model_tag == "DM":
        return _solve_dicke(params, opts, initial)

    plan = _DrivePlan(model_tag, params, chain)
    det = None
    if chain is not None and np.any(chain.detunings != 0.0):
        det = chain.detunings
    elif params.detuning != 0.0:
        det = np.full(n, params.detuning)
    rhs = _make_rhs(plan, det)

    omega_end = params.rabi
    if initial is not None:
        y0 = _pack(np.asarray(initial.sigma_minus, dtype=complex),
                   np.asarray(initial.sigma_z, dtype=float))
    else:
        y0 = _pack(np.zeros(n, dtype=complex), -np.ones(n))

    if opts.ramp is not None:
        ramp = opts.ramp
        omega_end = math.sqrt(ramp.s0_end / 2.0)

        def rhs_t(t, y):
            return rhs(y, math.sqrt(ramp.s0_at(t) / 2.0))

        y0 = integrate_ramp(rhs_t, y0, ramp.t_ramp, opts)

    def rhs0(y, _w=omega_end):
        return rhs(y, _w)

    res = integrate_to_steady(lambda t, y: rhs0(y), y0, opts)
    y, residual, converged = res.y, res.residual, res.converged

    if converged:
        if model_tag == "UWM" and det is None:
            y, residual = _uwm_cascade_polish(params, omega_end, y, residual, rhs0)
        elif n <= _POLISH_MAX_SITES:
            y, residual = _polish(rhs0, y, residual)

    m, z = _unpack(y, n)
    alpha = plan.alpha(m, omega_end)
    return MeanFieldSolution(sigma_minus=m, sigma_z=z.copy(), alpha=alpha,
                             converged=converged, residual=residual,
                             model_tag=model_tag)


def _uwm_cascade_polish(params, omega, y, residual, rhs0):
    # The cascaded fixed point is unique and available in closed form per
    # site; swap it in when the integrator has landed on it (always, for
    # UWM on resonance) to reach 1e−12-level residuals at any N.
    n = params.n_emitters
    fp = uwm_cascade_fixed_point(2.0 * omega ** 2, params.beta, n)
    ynew = _pack(fp.sigma_minus, fp.sigma_z)
    moved = np.max(np.abs(ynew - y)) / (1.0 + np.max(np.abs(y)))
    rnew = float(np.max(np.abs(rhs0(ynew))))
    if moved < 1e-4 and rnew < residual:
        return ynew, rnew
    return y, residual


# --- collective (permutation-symmetric) reduction ---------------------------


def solve_collective(feedback: float, s0: float, s0_start: Optional[float] = None,
                     t_ramp: float = 400.0,
                     opts: Optional[SolverOptions] = None):
    """Steady state of the one-site collective system α = Ω/2 − i(b/2)⟨σ⁻⟩.

    `feedback` is b: 2β(N−1) for the N-emitter permutation-symmetric model,
    or D/2 in the thermodynamic parametrization by total optical depth.
    With s0_start given, the drive ramps s0_start → s0 over t_ramp first
    (branch continuation in the bistable window).  Returns (⟨σ⁻⟩, ⟨σᶻ⟩).
    """
    opts = opts or SolverOptions()
    b = feedback

    def rhs(y, omega):
        m = y[0] + 1j * y[1]
        z = y[2]
        a = 0.5 * omega - 0.5j * b * m
        dm = 1j * a * z - 0.5 * m
        dz = -4.0 * (np.conj(a) * m).imag - (1.0 + z)
        return np.array([dm.real, dm.imag, dz])

    y0 = np.array([0.0, 0.0, -1.0])
    omega_end = math.sqrt(s0 / 2.0)
    if s0_start is not None:
        ramp = RampSpec(s0_start=s0_start, s0_end=s0, t_ramp=t_ramp)
        # start on the branch belonging to s0_start
        y0 = integrate_to_steady(
            lambda t, y: rhs(y, math.sqrt(ramp.s0_start / 2.0)), y0, opts).y
        y0 = integrate_ramp(lambda t, y: rhs(y, math.sqrt(ramp.s0_at(t) / 2.0)),
                            y0, ramp.t_ramp, opts)

    res = integrate_to_steady(lambda t, y: rhs(y, omega_end), y0, opts)
    y, residual = res.y, res.residual
    if not res.converged:
        raise NonConvergence(
            f"collective steady state not reached (residual {residual:.2e})")
    y, residual = _polish(lambda v: rhs(v, omega_end), y, residual)
    return y[0] + 1j * y[1], y[2]


def _solve_dicke(params: ModelParams, opts: SolverOptions,
                 initial: Optional[MeanFieldSolution]) -> MeanFieldSolution:
    """DM: one collective site with b = 2β(N−1), broadcast to N sites."""
    n = params.n_emitters
    b = 2.0 * params.beta * (n - 1)

    def rhs(y, omega):
        m = y[0] + 1j * y[1]
        z = y[2]
        a = 0.5 * omega - 0.5j * b * m
        dm = 1j * a * z - 0.5 * m
        if params.detuning != 0.0:
            dm += 1j * params.detuning * m
        dz = -4.0 * (np.conj(a) * m).imag - (1.0 + z)
        return np.array([dm.real, dm.imag, dz])

    omega_end = params.rabi
    if initial is not None:
        y0 = np.array([initial.sigma_minus[0].real, initial.sigma_minus[0].imag,
                       initial.sigma_z[0]])
    else:
        y0 = np.array([0.0, 0.0, -1.0])

    if opts.ramp is not None:
        ramp = opts.ramp
        omega_end = math.sqrt(ramp.s0_end / 2.0)
        y0 = integrate_ramp(lambda t, y: rhs(y, math.sqrt(ramp.s0_at(t) / 2.0)),
                            y0, ramp.t_ramp, opts)

    res = integrate_to_steady(lambda t, y: rhs(y, omega_end), y0, opts)
    y, residual = res.y, res.residual
    if res.converged:
        y, residual = _polish(lambda v: rhs(v, omega_end), y, residual)

    m = np.full(n, y[0] + 1j * y[1])
    z = np.full(n, y[2])
    alpha = np.full(n, 0.5 * omega_end - 0.5j * b * m[0])
    return MeanFieldSolution(sigma_minus=m, sigma_z=z, alpha=alpha,
                             converged=res.converged, residual=residual,
                             model_tag="DM")


# --- output fields ----------------------------------------------------------


def field_observables(solution: MeanFieldSolution, params: ModelParams,
                      chain: Optional[EmitterChain] = None) -> FieldObservables:
    """Coherent output saturations from the input–output relations.

    Right-going output (spiral gauge, forward phases absorbed):
        α_out^R = Ω/2 − i(Γ₁D/2) Σ_j ⟨σ⁻_j⟩              (all models)
    Left-going output at the chain head:
        BWM  weights e^{2ik₀(z_j−z_1)};  EAM  weights e^{−2(ηπ)²(j−1)};
        DM   unit weights;  UWM  exactly zero.
    Saturations are s = 8|α|²/Γ_tot² so an empty chain returns s₀ on the right.
    """
    if not solution.converged:
        raise ValueError("field_observables requires a converged solution")
    m = solution.sigma_minus
    g = params.gamma_1d / 2.0
    # params.rabi must match the drive the solution was computed at; after a
    # ramp, pass params rebuilt with rabi = √(s0_end/2).
    s_profile = 8.0 * np.abs(solution.alpha) ** 2

    a_right = 0.5 * params.rabi - 1j * g * np.sum(m)
    tag = solution.model_tag
    if tag == "UWM":
        a_left = 0.0 + 0.0j
    elif tag == "DM":
        a_left = -1j * g * np.sum(m)
    elif tag == "EAM":
        r = averaged_phase_factor(params.eta, 1) if params.eta > 0 else 1.0
        w = r ** np.arange(len(m))
        a_left = -1j * g * np.sum(w * m)
    else:  # BWM
        if chain is None:
            raise ValueError("BWM field observables require the chain")
        u = np.exp(4j * np.pi * np.mod(chain.positions, 0.5))
        w = u * np.conj(u[0])
        a_left = -1j * g * np.sum(w * m)

    return FieldObservables(
        alpha_profile=solution.alpha,
        s_profile=s_profile,
        s_out_right=float(8.0 * np.abs(a_right) ** 2),
        s_out_left=float(8.0 * np.abs(a_left) ** 2),
    )


# --- discrete saturation recursion and exact cascade ------------------------


def uwm_saturation_recursion(s0: float, beta: float, n: int) -> np.ndarray:
    """Saturation profile by the discrete update s_{i+1} = s_i − 4β s_i/(1+s_i).

    Returns s_0 … s_n (length n+1); s_i is the drive saturation after i
    emitters, i.e. on the optical-depth grid D_i = 4βi.  This is the
    first-order-in-β update; it converges to the Lambert-W continuum
    profile as β → 0 with D fixed (error ∝ β).  The exact fixed point of
    the mean-field cascade at finite β is `uwm_cascade_fixed_point`.
    """
    if s0 < 0.0:
        raise ValueError("s0 must be >= 0")
    if not 0.0 < beta <= 0.5:
        raise ValueError("beta must lie in (0, 1/2]")
    s = np.empty(n + 1)
    s[0] = s0
    for i in range(n):
        s[i + 1] = s[i] - 4.0 * beta * s[i] / (1.0 + s[i])
    return s


@dataclass(frozen=True)
class CascadeFixedPoint:
    alpha: np.ndarray        # real > 0: the drive never acquires a phase
    sigma_minus: np.ndarray  # −2iα_i/(1+s_i)
    sigma_z: np.ndarray      # −1/(1+s_i)
    s: np.ndarray            # 8α_i²


def uwm_cascade_fixed_point(s0: float, beta: float, n: int) -> CascadeFixedPoint:
    """Exact cascaded mean-field fixed point: α_{i+1} = α_i(1 − 2β/(1+s_i)).

    Each emitter sits in the single-site resonance-fluorescence steady state
    of its local drive; the drive update follows from inserting ⟨σ⁻_i⟩ into
    the forward sum.  Agrees with time-integrated UWM steady states to
    solver precision and is used to polish them.
    """
    a = np.empty(n)
    s = np.empty(n)
    cur = math.sqrt(s0 / 8.0)
    for i in range(n):
        a[i] = cur
        s[i] = 8.0 * cur * cur
        cur = cur * (1.0 - 2.0 * beta / (1.0 + s[i]))
    z = -1.0 / (1.0 + s)
    m = -2j * a / (1.0 + s)
    return CascadeFixedPoint(alpha=a, sigma_minus=m, sigma_z=z, s=s)
