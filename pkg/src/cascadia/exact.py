"""Dense density-matrix oracle for small chains (N ≤ 6).

Builds each model's Lindblad generator explicitly and integrates dρ/dt to
steady state.  Used as ground truth by the test suite; nothing here scales
past a handful of emitters and nothing here is approximate.

All four models share the driven-qubit part and differ in the guided
channels.  In the spiral gauge the right-going channel has unit weights
and the left-going channel carries phases v_j = e^{−2ik₀ z_j}:

    BWM  right cascade (unit weights) + left cascade (weights v_j) + loss γ
    EAM  same with the left-channel pair weights replaced by their Gaussian
         ensemble average e^{−2(ηπ)²|i−j|} (a real, positive Kac kernel)
    DM   single collective channel Γ₁D·D[J⁻] + loss γ (Bragg limit)
    UWM  right cascade only; the backward emission (Γ₁D/2 per site) becomes
         independent local loss (photons leaving left never return)

A cascaded channel with site amplitudes c_j and upstream order ≺ adds
    H_casc = −(i/2) Σ_{l≺j} (c_j c̄_l σ⁺_j σ⁻_l − h.c.)
    D(ρ)  = Σ_{j,l} c_j c̄_l (σ⁻_l ρ σ⁺_j − ½{σ⁺_j σ⁻_l, ρ})
with ≺ the site order for the right channel and its reverse for the left.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionCap, NonConvergence
from .params import EmitterChain, ModelParams, averaged_phase_factor
from .steady import SolverOptions, integrate_to_steady

__all__ = ["DensityState", "exact_steady_state", "exact_observables",
           "flux_report", "build_generator"]

_MAX_N = 6


@dataclass(frozen=True)
class DensityState:
    """Steady-state density matrix in the tensor-product qubit basis.

    Site 1 is the leftmost emitter and the slowest-varying tensor factor.
    """

    rho: np.ndarray
    model_tag: str


def _site_ops(n: int):
    """σ⁻_i in the 2ⁿ-dimensional product space, site 1 slowest factor."""
    sm1 = np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex)  # |g⟩⟨e|
    eye = np.eye(2, dtype=complex)
    ops = []
    for i in range(n):
        op = np.array([[1.0 + 0.0j]])
        for k in range(n):
            op = np.kron(op, sm1 if k == i else eye)
        ops.append(op)
    return ops


class _Generator:
    """dρ/dt = −i[H, ρ] + Σ_channels Σ_jl K_jl (σ⁻_l ρ σ⁺_j − ½{σ⁺_jσ⁻_l, ρ})."""

    def __init__(self, H: np.ndarray, kernels, sm):
        self.H = H
        self.sm = sm
        self.sp = [s.conj().T for s in sm]
        n = len(sm)
        # per channel, precompute S_j = Σ_l K_jl σ⁻_l and G = Σ_j σ⁺_j S_j
        self.channels = []
        for K in kernels:
            S = [sum(K[j, l] * sm[l] for l in range(n)) for j in range(n)]
            G = sum(self.sp[j] @ S[j] for j in range(n))
            self.channels.append((S, G))

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = -1j * (self.H @ rho - rho @ self.H)
        for S, G in self.channels:
            for j, Sj in enumerate(S):
                out += Sj @ rho @ self.sp[j]
            out -= 0.5 * (G @ rho + rho @ G)
        return out


def build_generator(model_tag: str, params: ModelParams,
                    chain: Optional[EmitterChain]) -> _Generator:
    """Assemble H and dissipator kernels for one model.

    Exposed (rather than private) because the generator-level limit
    identities — Bragg BWM ≡ DM, η→∞ EAM ≡ UWM — are part of the tested
    contract and need direct access to H and the kernels.
    """
    n = params.n_emitters
    if n > _MAX_N:
        raise DimensionCap(f"exact solver capped at N = {_MAX_N} (got {n})")
    g1d = params.gamma_1d
    g = g1d / 2.0
    gl = params.gamma_loss
    sm = _site_ops(n)
    sp = [s.conj().T for s in sm]
    num = [sp[i] @ sm[i] for i in range(n)]

    H = sum((params.rabi / 2.0) * (sm[i] + sp[i]) for i in range(n))
    if chain is not None and np.any(chain.detunings != 0.0):
        H = H - sum(chain.detunings[i] * num[i] for i in range(n))
    elif params.detuning != 0.0:
        H = H - sum(params.detuning * num[i] for i in range(n))

    def cascade_h(weights):
        # −(i/2) Σ_{l≺j} (c_j c̄_l σ⁺_jσ⁻_l − h.c.) with c_j = √g·w_j and the
        # list `weights` ordered upstream-first
        Hc = np.zeros_like(H)
        for jj in range(n):
            for ll in range(jj):
                c = g * weights[jj][1] * np.conj(weights[ll][1])
                j, l = weights[jj][0], weights[ll][0]
                Hc += -0.5j * (c * sp[j] @ sm[l] - np.conj(c) * sp[l] @ sm[j])
        return Hc

    ones = np.ones((n, n))
    loc = np.eye(n)
    kernels = []

    if model_tag == "DM":
        kernels = [g1d * ones, gl * loc]
    elif model_tag == "UWM":
        H = H + cascade_h([(i, 1.0) for i in range(n)])
        kernels = [g * ones, (g + gl) * loc]
    elif model_tag == "BWM":
        if chain is None:
            raise ValueError("BWM requires a chain realization")
        v = np.exp(-4j * np.pi * np.mod(chain.positions, 0.5))  # e^{−2ik₀z}
        H = H + cascade_h([(i, 1.0) for i in range(n)])
        H = H + cascade_h([(i, v[i]) for i in range(n - 1, -1, -1)])
        kernels = [g * ones, g * np.outer(v, np.conj(v)), gl * loc]
    elif model_tag == "EAM":
        hop = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        K = np.exp(-2.0 * (params.eta * np.pi) ** 2 * hop)
        H = H + cascade_h([(i, 1.0) for i in range(n)])
        # left cascade with ensemble-averaged pair weights (real kernel)
        Hl = np.zeros_like(H)
        for j in range(n):
            for l in range(j):
                # upstream for the left channel is the larger index j
                Hl += -0.5j * g * K[j, l] * (sp[l] @ sm[j] - sp[j] @ sm[l])
        H = H + Hl
        kernels = [g * ones, g * K, gl * loc]
    else:
        raise ValueError(f"unknown model tag {model_tag!r}")

    return _Generator(H, kernels, sm)


def exact_steady_state(model_tag: str, params: ModelParams,
                       chain: Optional[EmitterChain] = None,
                       opts: Optional[SolverOptions] = None) -> DensityState:
    """Integrate the master equation from |g…g⟩ to steady state.

    Convergence requires the Frobenius norm of dρ/dt below 1e−10 (the
    element-wise integration threshold is tighter still).
    """
    n = params.n_emitters
    gen = build_generator(model_tag, params, chain)
    dim = 2 ** n
    rho0 = np.zeros((dim, dim), dtype=complex)
    rho0[dim - 1, dim - 1] = 1.0  # |g…g⟩: ground is the last basis state

    def rhs(t, y):
        rho = (y[:dim * dim] + 1j * y[dim * dim:]).reshape(dim, dim)
        drho = gen.apply(rho)
        return np.concatenate((drho.real.ravel(), drho.imag.ravel()))

    opts = opts or SolverOptions(steady_state_residual=1e-12, rel_tol=1e-10,
                                 abs_tol=1e-12)
    y0 = np.concatenate((rho0.real.ravel(), rho0.imag.ravel()))
    res = integrate_to_steady(rhs, y0, opts)
    rho = (res.y[:dim * dim] + 1j * res.y[dim * dim:]).reshape(dim, dim)
    frob = float(np.linalg.norm(gen.apply(rho)))
    if frob > 1e-10:
        raise NonConvergence(
            f"exact steady state: ‖dρ/dt‖_F = {frob:.2e} > 1e-10 at t = {res.t}")
    rho = 0.5 * (rho + rho.conj().T)  # strip integrator's Hermiticity dust
    return DensityState(rho=rho, model_tag=model_tag)


# --- observables ------------------------------------------------------------


def _left_weights(model_tag: str, params: ModelParams,
                  chain: Optional[EmitterChain], n: int):
    """Weights w_j of the left-output operator Σ_j w_j σ⁻_j at the chain head."""
    if model_tag == "UWM":
        return None
    if model_tag == "DM":
        return np.ones(n)
    if model_tag == "EAM":
        r = averaged_phase_factor(params.eta, 1) if params.eta > 0 else 1.0
        return r ** np.arange(n)
    u = np.exp(4j * np.pi * np.mod(chain.positions, 0.5))
    return u * np.conj(u[0])  # e^{2ik₀(z_j − z_1)}


def exact_observables(state: DensityState, params: ModelParams,
                      chain: Optional[EmitterChain] = None) -> dict:
    """All single/pair moments plus output saturations.

    pairs[(a, b)][i, j] = ⟨σᵃ_i σᵇ_j⟩ for a, b ∈ {'-', '+', 'z'}; diagonal
    entries hold the same-site products reduced by the Pauli algebra
    (e.g. ('+','-') diagonal is ⟨σ⁺σ⁻⟩ = (1+⟨σᶻ⟩)/2).
    s_ie is the inelastic right-output saturation 8β²(⟨J⁺J⁻⟩ − |⟨J⁻⟩|²).
    """
    rho = state.rho
    n = params.n_emitters
    sm = _site_ops(n)
    sp = [s.conj().T for s in sm]
    sz = [2.0 * (sp[i] @ sm[i]) - np.eye(2 ** n) for i in range(n)]
    ops = {"-": sm, "+": sp, "z": sz}

    def ev(op):
        return complex(np.trace(op @ rho))

    sigma_minus = np.array([ev(sm[i]) for i in range(n)])
    sigma_z = np.array([ev(sz[i]).real for i in range(n)])

    pairs = {}
    for a in "-+z":
        for b in "-+z":
            M = np.zeros((n, n), dtype=complex)
            for i in range(n):
                for j in range(n):
                    M[i, j] = ev(ops[a][i] @ ops[b][j])
            pairs[(a, b)] = M

    g = params.gamma_1d / 2.0
    beta = params.beta
    J = np.sum(sm, axis=0)
    Jev = ev(J)
    JpJm = ev(J.conj().T @ J).real
    a_right = 0.5 * params.rabi - 1j * g * Jev
    s_ie = 8.0 * beta ** 2 * (JpJm - abs(Jev) ** 2)

    w = _left_weights(state.model_tag, params, chain, n)
    if w is None:
        a_left = 0.0 + 0.0j
    else:
        a_left = -1j * g * sum(w[j] * sigma_minus[j] for j in range(n))

    return {
        "sigma_minus": sigma_minus,
        "sigma_z": sigma_z,
        "pairs": pairs,
        "s_out_right": float(8.0 * abs(a_right) ** 2),
        "s_out_left": float(8.0 * abs(a_left) ** 2),
        "s_ie": float(s_ie),
    }


def flux_report(state: DensityState, params: ModelParams,
                chain: Optional[EmitterChain] = None) -> dict:
    """Photon-flux bookkeeping at steady state (units: photons/Γ_tot⁻¹).

    Input flux Ω²/(2Γ₁D) must equal the sum of right output (coherent +
    inelastic), left output, γ loss, and — for the UWM — the discarded
    backward emission.  `defect` is input minus the sum; a correct
    generator at a converged state leaves only integrator dust.

    The left channel splits into coherent/inelastic through its collective
    operator when the channel is rank-one (BWM, DM); for the EAM the
    ensemble-averaged kernel is full-rank, so `left_total` is the kernel
    sum Σ_ij Γ^L_ij ⟨σ⁺_iσ⁻_j⟩ and `left_inelastic` is reported as the
    remainder after the attenuated coherent part (it then also carries the
    ensemble-diffuse flux).
    """
    obs = exact_observables(state, params, chain)
    n = params.n_emitters
    tag = state.model_tag
    g1d = params.gamma_1d
    g = g1d / 2.0
    if g1d == 0.0:
        raise ValueError("flux accounting needs gamma_1d > 0")

    m = obs["sigma_minus"]
    pm = obs["pairs"][("+", "-")]
    n_i = 0.5 * (1.0 + obs["sigma_z"])  # ⟨σ⁺σ⁻⟩ same-site

    flux_in = params.rabi ** 2 / (2.0 * g1d)
    a_in = params.rabi / np.sqrt(2.0 * g1d)

    # right channel: a_out = a_in − i√g J⁻ with unit weights
    Jev = np.sum(m)
    JpJm = float(np.sum(pm).real)  # Σ_ij ⟨σ⁺_iσ⁻_j⟩ incl. diagonal
    right_coherent = abs(a_in - 1j * np.sqrt(g) * Jev) ** 2
    right_inelastic = g * (JpJm - abs(Jev) ** 2)

    loss_gamma = params.gamma_loss * float(np.sum(n_i))
    loss_backward = 0.0

    if tag == "UWM":
        left_total = left_coherent = left_inelastic = 0.0
        loss_backward = g * float(np.sum(n_i))
    elif tag == "DM":
        left_coherent = g * abs(Jev) ** 2
        left_inelastic = g * (JpJm - abs(Jev) ** 2)
        left_total = left_coherent + left_inelastic
    elif tag == "BWM":
        u = np.exp(4j * np.pi * np.mod(chain.positions, 0.5))
        JL = np.sum(u * m)  # phase weights; global phase drops in |·|
        JLpJLm = float(np.real(np.conj(u)[:, None] * u[None, :] * pm).sum())
        left_coherent = g * abs(JL) ** 2
        left_inelastic = g * (JLpJLm - abs(JL) ** 2)
        left_total = left_coherent + left_inelastic
    else:  # EAM: full-rank averaged kernel
        hop = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
        K = np.exp(-2.0 * (params.eta * np.pi) ** 2 * hop)
        left_total = g * float(np.real(np.sum(K * pm)))
        w = _left_weights("EAM", params, chain, n)
        left_coherent = g * abs(np.sum(w * m)) ** 2
        left_inelastic = left_total - left_coherent

    total_out = (right_coherent + right_inelastic + left_total
                 + loss_gamma + loss_backward)
    return {
        "flux_in": float(flux_in),
        "right_coherent": float(right_coherent),
        "right_inelastic": float(right_inelastic),
        "left_coherent": float(left_coherent),
        "left_inelastic": float(left_inelastic),
        "left_total": float(left_total),
        "loss_gamma": float(loss_gamma),
        "loss_backward": float(loss_backward),
        "defect": float(flux_in - total_out),
    }
