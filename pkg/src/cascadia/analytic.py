"""Closed-form steady-state results for the driven chain.

Unidirectional (cascaded) propagation admits a full analytic solution: the
saturation profile obeys ds/dD = −s/(1+s) in the optical-depth coordinate
D = 4βi, whose solution is s(D) = W(s₀ e^{s₀−D}) with W the principal
Lambert-W branch.  The permutationally-symmetric (Dicke) limit instead
yields a cubic fixed-point equation for the inversion with a bistable
window at large optical depth.  Everything here is pure arithmetic; the
time-domain solvers live in `meanfield`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .errors import NoPhysicalRoot

__all__ = [
    "lambert_w0",
    "uwm_saturation",
    "uwm_inversion",
    "mean_polarization",
    "thermodynamic_saturation",
    "dicke_cubic",
    "dicke_steady_states",
    "dicke_bistability_window",
    "DickeRoots",
    "BistabilityWindow",
]


def lambert_w0(log_x):
    """Principal Lambert-W branch, taking the argument in log domain.

    Solves w + ln w = log_x for w ≥ 0, i.e. w = W(e^{log_x}).  The log-domain
    input matters: the profile argument s₀e^{s₀−D} overflows double precision
    already for s₀ ≳ 700 while its logarithm stays modest.  Halley iteration
    on g(w) = w + ln w − log_x; relative accuracy ~1e−14.

    Accepts scalars or arrays; log_x = −inf maps to W(0) = 0.
    """
    L = np.asarray(log_x, dtype=float)
    if np.isnan(L).any():
        raise ValueError("lambert_w0: NaN argument")
    scalar = L.ndim == 0
    L = np.atleast_1d(L).copy()
    w = np.empty_like(L)

    finite = L > -np.inf
    w[~finite] = 0.0

    # seeds: asymptotic for large L, series-flavored elsewhere
    big = finite & (L > 2.0)
    mid = finite & ~big & (L > -2.0)
    low = finite & (L <= -2.0)
    w[big] = L[big] - np.log(L[big])
    w[mid] = np.log1p(np.exp(L[mid]))
    w[low] = np.exp(L[low])

    # w = e^L ≤ 1e-16: the seed equals W(e^L) = e^L(1 − e^L + …) to double
    # precision, and 1/w² in the Halley step would overflow
    act = finite & (w > 1e-16)
    for _ in range(100):
        if not act.any():
            break
        wa = w[act]
        g = wa + np.log(wa) - L[act]
        gp = 1.0 + 1.0 / wa
        gpp = -1.0 / wa ** 2
        dw = 2.0 * g * gp / (2.0 * gp ** 2 - g * gpp)
        wn = wa - dw
        bad = ~(wn > 0.0)  # overshoot into w ≤ 0: damp instead
        wn[bad] = 0.5 * wa[bad]
        w[act] = wn
        done = np.abs(dw) <= 1e-16 * (1.0 + np.abs(wn))
        sub = act.copy()
        sub[act] = done & ~bad
        act &= ~sub

    return float(w[0]) if scalar else w


def uwm_saturation(s0: float, D):
    """Saturation s(D) of the cascaded chain: s = W(s₀ e^{s₀−D}).

    The Lambert-W argument in log domain is ln s₀ + s₀ − D, equivalently
    ln(s̃D) + (s̃−1)D with s̃ = s₀/D.  s(0) = s₀; monotone decreasing in D.
    """
    if s0 < 0.0:
        raise ValueError("s0 must be >= 0")
    D = np.asarray(D, dtype=float)
    if s0 == 0.0:
        z = np.zeros_like(D)
        return float(z) if z.ndim == 0 else z
    return lambert_w0(math.log(s0) + s0 - D)


def uwm_inversion(s):
    """⟨σᶻ⟩ at local saturation s: −1/(1+s)."""
    return -1.0 / (1.0 + np.asarray(s, dtype=float))


def mean_polarization(s0: float, D: float) -> float:
    """Chain-averaged inversion j_z = (1/D)∫₀ᴰ dD′ ⟨σᶻ(s(D′))⟩.

    Adaptive quadrature with the integration split at the knee
    D′ = s₀ + ln s₀ − 1 (where s crosses 1) — the integrand bends there
    on a scale of O(1) in D′, which adaptive panels otherwise resolve
    slowly at large D.  Absolute tolerance 1e−9.
    """
    if D <= 0.0:
        raise ValueError("D must be > 0")
    if s0 == 0.0:
        return -1.0
    knee = s0 + math.log(s0) - 1.0
    points = [knee] if 0.0 < knee < D else None

    def f(dp):
        return -1.0 / (1.0 + uwm_saturation(s0, dp))

    val, _ = quad(f, 0.0, D, epsabs=1e-9, epsrel=1e-11, limit=200, points=points)
    return val / D


def thermodynamic_saturation(s_tilde: float, D: float):
    """Pointwise thermodynamic limit of the saturation profile.

    In the scaled coordinate, s → 0 for s̃ < 1 (the field dies before
    depth D) and s → (s̃−1)D for s̃ > 1 (excess input survives); the
    marginal line s̃ = 1 keeps the finite-D value W(D).
    """
    if D < 0.0:
        raise ValueError("D must be >= 0")
    if s_tilde < 1.0:
        return 0.0
    if s_tilde > 1.0:
        return (s_tilde - 1.0) * D
    return lambert_w0(math.log(D)) if D > 0.0 else 0.0


# --- Dicke (permutationally symmetric) steady states ----------------------


def dicke_cubic(m, d_total: float, s0: float):
    """Value of the collective fixed-point cubic at inversion m.

    0 = m³ D²/4 + m² (D²/4 − D) + m (s₀ − D + 1) + 1,  D ≡ d_total.
    Roots in [−1, 0] are the steady-state inversions of the collective model.
    """
    D = d_total
    m = np.asarray(m, dtype=float)
    return (m ** 3 * D * D / 4.0 + m ** 2 * (D * D / 4.0 - D)
            + m * (s0 - D + 1.0) + 1.0)


@dataclass(frozen=True)
class DickeRoots:
    """Real roots m = ⟨σᶻ⟩ ∈ [−1, 0] of the collective cubic, ascending."""

    roots: np.ndarray
    stability: tuple  # 'stable' | 'unstable' per root
    bistable: bool


@dataclass(frozen=True)
class BistabilityWindow:
    """Drive window [s₋, s₊] with two stable collective branches.

    Exists for d_total > 16; at exactly 16 the window closes at the fold
    value s₋ = s₊ = 27.  The large-D asymptotes are exposed for sweeps.
    """

    s_minus: float
    s_plus: float
    exists: bool
    s_minus_asymptotic: float
    s_plus_asymptotic: float


def dicke_bistability_window(d_total: float) -> BistabilityWindow:
    """Window edges s∓ = (−32 ∓ √(D(D−16)³) + D(40+D))/32."""
    if d_total <= 0.0:
        raise ValueError("d_total must be > 0")
    D = d_total
    mid = (D * (40.0 + D) - 32.0) / 32.0
    if D > 16.0:
        half = math.sqrt(D * (D - 16.0) ** 3) / 32.0
        s_minus, s_plus = mid - half, mid + half
    else:
        # below the fold the window is empty; report the (clipped) midpoint
        s_minus = s_plus = max(mid, 0.0)
    return BistabilityWindow(
        s_minus=s_minus, s_plus=s_plus, exists=D > 16.0,
        s_minus_asymptotic=2.0 * D - 4.0 - 8.0 / D,
        s_plus_asymptotic=D * D / 16.0 + D / 2.0 + 2.0 + 8.0 / D,
    )


def dicke_steady_states(d_total: float, s0: float) -> DickeRoots:
    """All physical fixed points of the collective model at drive s₀.

    Roots come from the companion matrix of the cubic plus one Newton
    polish each (robust near the folds, where two roots nearly coalesce).
    Stability is classified operationally: the collective mean-field ODE
    is integrated with the drive ramped slowly up from zero and down from
    deep saturation; a root reached by either continuation branch is
    stable, an unreached (middle) root is unstable.
    """
    if d_total <= 0.0:
        raise ValueError("d_total must be > 0")
    if s0 < 0.0:
        raise ValueError("s0 must be >= 0")
    D = d_total
    coeffs = [D * D / 4.0, D * D / 4.0 - D, s0 - D + 1.0, 1.0]
    raw = np.roots(coeffs)
    real = raw[np.abs(raw.imag) < 1e-8 * max(1.0, np.abs(raw).max())].real

    roots = []
    for r in real:
        m = float(r)
        for _ in range(3):  # Newton polish
            p = dicke_cubic(m, D, s0)
            dp = 3.0 * m * m * D * D / 4.0 + 2.0 * m * (D * D / 4.0 - D) + (s0 - D + 1.0)
            if dp != 0.0:
                m -= p / dp
        if -1.0 - 1e-9 <= m <= 1e-9:
            roots.append(min(0.0, max(-1.0, m)))
    roots = np.array(sorted(roots))
    if roots.size > 1:  # merge near-coalescent fold duplicates
        keep = np.concatenate(([True], np.diff(roots) > 1e-7))
        roots = roots[keep]
    if roots.size == 0:
        raise NoPhysicalRoot(
            f"no cubic root in [-1, 0] for D={D}, s0={s0} — should be impossible")

    stability = _classify_by_continuation(roots, D, s0)
    return DickeRoots(roots=roots, stability=tuple(stability),
                      bistable=int(roots.size) >= 3)


def _classify_by_continuation(roots: np.ndarray, D: float, s0: float):
    from .meanfield import solve_collective  # local import: avoids cycle

    reached = set()
    # continuation from below (ground state, drive ramped up to s0) and from
    # above (start deep in saturation, drive ramped down to s0)
    for s_start in (0.0, max(4.0 * s0, 10.0 * D, 100.0)):
        m, z = solve_collective(feedback=D / 2.0, s0=s0, s0_start=s_start,
                                t_ramp=400.0)
        reached.add(int(np.argmin(np.abs(roots - z))))
    return ["stable" if k in reached else "unstable" for k in range(roots.size)]
