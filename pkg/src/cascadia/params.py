"""Core domain types: normalized parameters, derived quantities, chains.

Units: Γ_tot = 1 and v_g = 1 throughout.  All rates (Γ₁D, γ, Ω, Δ, ξ_Δ)
are in units of Γ_tot, positions in units of λ, times in units of 1/Γ_tot.
The coupling fraction per direction is β = Γ₁D/2, so β ∈ [0, 1/2].
"""

from __future__ import annotations

import json
import math
from dataclasses import MISSING, dataclass, fields

import numpy as np

_GAMMA_TOT_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Physical parameters of a driven emitter chain.

    gamma_1d    Γ₁D, decay into the guided mode (both directions combined)
    gamma_loss  γ, decay into unguided modes; gamma_1d + gamma_loss = 1
    rabi        Ω, coherent drive amplitude
    detuning    Δ, laser detuning from the emitter transition
    n_emitters  N
    eta         η, spacing disorder (std-dev of the spacing in units of λ/2)
    k0_spacing  mean spacing in units of λ/2 (1 = Bragg condition)
    seed        64-bit master seed for chain generation
    """

    gamma_1d: float
    gamma_loss: float
    rabi: float
    n_emitters: int
    eta: float = 0.0
    detuning: float = 0.0
    k0_spacing: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not (self.gamma_1d >= 0.0 and self.gamma_loss >= 0.0):
            raise ValueError("decay rates must be non-negative")
        if abs(self.gamma_1d + self.gamma_loss - 1.0) > _GAMMA_TOT_TOL:
            raise ValueError(
                f"gamma_1d + gamma_loss = {self.gamma_1d + self.gamma_loss!r}"
                " but rates are normalized to Γ_tot = 1"
            )
        if self.eta < 0.0:
            raise ValueError("eta must be >= 0")
        if int(self.n_emitters) != self.n_emitters or self.n_emitters < 1:
            raise ValueError("n_emitters must be a positive integer")
        object.__setattr__(self, "n_emitters", int(self.n_emitters))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def beta(self) -> float:
        """β = Γ₁D/(2Γ_tot) ∈ [0, 1/2]."""
        return self.gamma_1d / 2.0

    @classmethod
    def from_beta(cls, beta: float, s0: float, n_emitters: int, **kw) -> "ModelParams":
        """Convenience constructor from (β, s₀) with Ω = √(s₀/2)."""
        if not 0.0 <= beta <= 0.5:
            raise ValueError("beta must lie in [0, 1/2]")
        if s0 < 0.0:
            raise ValueError("s0 must be >= 0")
        return cls(gamma_1d=2.0 * beta, gamma_loss=1.0 - 2.0 * beta,
                   rabi=math.sqrt(s0 / 2.0), n_emitters=n_emitters, **kw)

    def derive(self) -> "DerivedQuantities":
        return derive(self)

    # --- strict flat-JSON (de)serialization -------------------------------

    def to_json(self) -> str:
        return json.dumps({f.name: getattr(self, f.name) for f in fields(self)},
                          sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        """Parse a flat JSON object. Unknown keys are an error (strict mode)."""
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("expected a flat JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown parameter keys: {sorted(unknown)}")
        required = {f.name for f in fields(cls) if f.default is MISSING}
        missing = required - set(data)
        if missing:
            raise ValueError(f"missing parameter keys: {sorted(missing)}")
        return cls(**data)


@dataclass(frozen=True)
class DerivedQuantities:
    """Dimensionless control parameters derived from ModelParams.

    d_total = D_N = 4βN, s0 = 2Ω², s_tilde = s₀/D_N, d_at(i) = 4βi.
    """

    beta: float
    d_total: float
    s0: float
    s_tilde: float

    def d_at(self, i):
        """Optical depth coordinate D_i = 4βi of site i (1-based; array ok)."""
        return 4.0 * self.beta * np.asarray(i, dtype=float)


def derive(params: ModelParams) -> DerivedQuantities:
    beta = params.beta
    d_total = 4.0 * beta * params.n_emitters
    s0 = 2.0 * params.rabi ** 2
    if d_total > 0.0:
        s_tilde = s0 / d_total
    else:
        s_tilde = math.inf if s0 > 0.0 else math.nan
    return DerivedQuantities(beta=beta, d_total=d_total, s0=s0, s_tilde=s_tilde)


@dataclass(frozen=True)
class EmitterChain:
    """A chain realization: positions z_i (units of λ) and detunings Δ_i.

    Site 1 is the leftmost / most-upstream emitter.  Positions enter the
    dynamics only through relative phases 2k₀(z_j − z_i) (spiral gauge),
    so the z₁ = 0 origin is a pure convention.
    """

    positions: np.ndarray
    detunings: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        det = np.asarray(self.detunings, dtype=float)
        if pos.ndim != 1 or det.shape != pos.shape:
            raise ValueError("positions and detunings must be equal-length 1D arrays")
        pos.setflags(write=False)
        det.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "detunings", det)

    def __len__(self) -> int:
        return self.positions.size


def _rng(seed: int, stream: int) -> np.random.Generator:
    # (seed, stream) keyed streams: independent, reproducible, parallel-safe
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(stream))))


def build_chain(params: ModelParams, stream: int = 0,
                xi_delta: float = 0.0) -> EmitterChain:
    """Draw one chain realization.

    Spacings Z_j = z_{j+1} − z_j are i.i.d. Gaussian with mean (λ/2)·k0_spacing
    and std-dev (λ/2)·η.  The Gaussian tail may produce Z_j < 0 for large η;
    index order is kept regardless (site j stays upstream of j+1), since only
    relative phases matter.  With xi_delta > 0, per-site detunings are drawn
    i.i.d. N(0, ξ_Δ²) after the spacings (fixed draw order for determinism).
    """
    n = params.n_emitters
    rng = _rng(params.seed, stream)
    # N(μ, 0) draws return μ exactly, so η = 0 yields the exact Bragg lattice
    spacings = rng.normal(0.5 * params.k0_spacing, 0.5 * params.eta, size=n - 1)
    positions = np.concatenate(([0.0], np.cumsum(spacings)))
    if xi_delta > 0.0:
        detunings = rng.normal(0.0, xi_delta, size=n)
    else:
        detunings = np.zeros(n)
    if params.detuning != 0.0:
        detunings = detunings + params.detuning
    return EmitterChain(positions=positions, detunings=detunings)


def averaged_phase_factor(eta: float, hop: int) -> float:
    """Ensemble average of the backward phase e^{2ik₀(z_{i+hop} − z_i)}.

    For Gaussian spacings the average is real: e^{−2(ηπ)²·hop}.  This is the
    attenuation the EAM applies to backward (downstream → upstream) coupling.
    """
    if eta < 0.0:
        raise ValueError("eta must be >= 0")
    if hop < 1:
        raise ValueError("hop must be >= 1")
    return float(np.exp(-2.0 * (eta * np.pi) ** 2 * hop))
