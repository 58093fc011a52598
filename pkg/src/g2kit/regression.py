"""
Analytic route: moment evolution, steady state and two-time correlations.

Second moments obey

    d<α²>/dt   = -μ <α²> + 2β <α*α> - B
    d<α*α>/dt  = -μ <α*α> + β (<α*²> + <α²>) + C

which separate into three scalar relaxations: Re<α²> + <α*α> with rate λ₋,
<α*α> - Re<α²> with rate λ₊ and Im<α²> with rate μ.  Two-time quantities
follow by regressing (α, α*) through the transfer matrix, and the fourth
moment closes by Isserlis pairing of the zero-mean Gaussian steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from . import gaussint
from .errors import DomainError
from .model import MomentState, SystemParams, transfer_coeffs, validate_params

__all__ = [
    "CorrelationCurve",
    "Classification",
    "evolve_moments",
    "steady_state",
    "two_time_pair",
    "g1_curve",
    "g2_curve",
    "g2_zero_number_formula",
    "classify",
    "two_time_gaussian",
    "g2_transient_curve",
    "make_grid",
]


@dataclass
class CorrelationCurve:
    """g1(τ) and g2(τ) sampled on a delay grid.

    ``g2`` is ``None`` for routes that only produce first-order correlations.
    Error arrays are present only for Monte Carlo estimates.
    """

    tau: np.ndarray
    g1: np.ndarray
    g2: Optional[np.ndarray]
    n_ss: float
    g1_err: Optional[np.ndarray] = None
    g2_err: Optional[np.ndarray] = None
    method: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tau = np.asarray(self.tau, dtype=float)
        self.g1 = np.asarray(self.g1, dtype=complex)
        if self.g2 is not None:
            self.g2 = np.asarray(self.g2, dtype=float)
        if self.g1_err is not None:
            self.g1_err = np.asarray(self.g1_err, dtype=float)
        if self.g2_err is not None:
            self.g2_err = np.asarray(self.g2_err, dtype=float)
        _check_grid(self.tau)
        for name in ("g1", "g2", "g1_err", "g2_err"):
            arr = getattr(self, name)
            if arr is not None and arr.shape != self.tau.shape:
                raise ValueError(f"{name} has shape {arr.shape}, expected {self.tau.shape}")

    @property
    def has_errors(self) -> bool:
        return self.g1_err is not None or self.g2_err is not None

    def __len__(self):
        return len(self.tau)


class Correlation(str, Enum):
    BUNCHED = "bunched"
    ANTIBUNCHED = "antibunched"
    FLAT = "flat"


class Statistics(str, Enum):
    POISSONIAN = "poissonian"
    SUPER = "super-Poissonian"
    SUB = "sub-Poissonian"


@dataclass(frozen=True)
class Classification:
    correlation: Correlation
    statistics: Statistics
    g2_zero: float
    g2_tail: float

    def label(self) -> str:
        stats = "poissonian" if self.statistics is Statistics.POISSONIAN else self.statistics.value
        return f"{self.correlation.value}, {stats}"


def _check_grid(tau: np.ndarray) -> None:
    if tau.ndim != 1 or tau.size == 0:
        raise ValueError("tau grid must be a non-empty 1-d array")
    if tau[0] != 0.0:
        raise ValueError("tau grid must start at 0")
    if np.any(np.diff(tau) <= 0):
        raise ValueError("tau grid must be strictly increasing")


def make_grid(tau_max: float, steps: int) -> np.ndarray:
    """Uniform grid 0, tau_max/steps, ..., tau_max (steps + 1 points)."""
    if not tau_max > 0 or steps < 1:
        raise ValueError("need tau_max > 0 and steps >= 1")
    return np.linspace(0.0, float(tau_max), int(steps) + 1)


def _relax(x0: float, x_ss: float, rate: float, t: float) -> float:
    return x_ss + (x0 - x_ss) * math.exp(-rate * t)


def evolve_moments(p: SystemParams, s0: MomentState, t: float) -> MomentState:
    """Propagate <α>, <α²>, <α*α> over a time ``t`` in closed form."""
    validate_params(p)
    if not t >= 0:
        raise DomainError(f"t must be non-negative, got {t}")
    if t == 0:
        return s0
    tc = transfer_coeffs(p, t)
    mean = tc.a_plus * s0.mean + tc.a_minus * s0.mean.conjugate()

    ss = steady_state(p)
    s_sum = _relax(s0.m2.real + s0.n, ss.m2.real + ss.n, p.lambda_minus, t)
    s_dif = _relax(s0.n - s0.m2.real, ss.n - ss.m2.real, p.lambda_plus, t)
    im_m2 = _relax(s0.m2.imag, ss.m2.imag, p.mu, t)
    n = 0.5 * (s_sum + s_dif)
    m2 = complex(0.5 * (s_sum - s_dif), im_m2)
    return MomentState(mean, m2, n)


def steady_state(p: SystemParams) -> MomentState:
    validate_params(p)
    mu, beta, b, c = p.mu, p.beta, p.noise_b, p.noise_c
    n = (mu * c - 2.0 * beta * b.real) / (mu * mu - 4.0 * beta * beta)
    m2 = (2.0 * beta * n - b) / mu
    return MomentState(0j, m2, n)


def two_time_pair(p: SystemParams, tau: float) -> tuple[complex, complex]:
    """Stationary (<α*(t) α(t+τ)>, <α(t) α(t+τ)>).

    Noise entering after ``t`` is independent of α(t), so only the
    regressed one-time moments contribute.
    """
    tc = transfer_coeffs(p, tau)
    ss = steady_state(p)
    c_normal = tc.a_plus * ss.n + tc.a_minus * ss.m2.conjugate()
    c_anom = tc.a_plus * ss.m2 + tc.a_minus * ss.n
    return complex(c_normal), complex(c_anom)


def _pairs(p: SystemParams, grid) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    tau = np.asarray(grid, dtype=float)
    _check_grid(tau)
    ss = steady_state(p)
    if ss.n <= 0:
        raise DomainError("zero denominator: steady-state occupation is zero")
    em = np.exp(-0.5 * p.lambda_minus * tau)
    ep = np.exp(-0.5 * p.lambda_plus * tau)
    a_plus, a_minus = 0.5 * (em + ep), 0.5 * (em - ep)
    c_normal = a_plus * ss.n + a_minus * ss.m2.conjugate()
    c_anom = a_plus * ss.m2 + a_minus * ss.n
    return tau, c_normal, c_anom, ss.n


def g1_curve(p: SystemParams, grid) -> CorrelationCurve:
    tau, c_normal, _, n = _pairs(p, grid)
    return CorrelationCurve(tau, c_normal / n, None, n, method="regression")


def g2_curve(p: SystemParams, grid) -> CorrelationCurve:
    tau, c_normal, c_anom, n = _pairs(p, grid)
    g2 = 1.0 + (np.abs(c_normal) ** 2 + np.abs(c_anom) ** 2) / (n * n)
    return CorrelationCurve(tau, c_normal / n, g2, n, method="regression")


def g2_zero_number_formula(n: float) -> float:
    """Equal-time <n>(<n> - 1)/<n>², the number-state expression."""
    if not n > 0:
        raise DomainError("zero denominator: mean photon number must be positive")
    return n * (n - 1.0) / (n * n)


def classify(curve: CorrelationCurve, tol: float = 1e-6) -> Classification:
    """Label a g2 curve as bunched/antibunched/flat and by its photon statistics.

    The tail is the mean of g2 over the last quarter of the grid (at least
    one point), compared with g2(0).
    """
    if curve.g2 is None or len(curve.g2) == 0:
        raise ValueError("curve carries no g2 values")
    g2 = curve.g2
    g0 = float(g2[0])
    k = max(1, len(g2) // 4)
    tail = float(np.mean(g2[-k:])) if len(g2) > 1 else g0
    if tail < g0 - tol:
        corr = Correlation.BUNCHED
    elif tail > g0 + tol:
        corr = Correlation.ANTIBUNCHED
    else:
        corr = Correlation.FLAT
    if g0 > 1.0 + tol:
        stats = Statistics.SUPER
    elif g0 < 1.0 - tol:
        stats = Statistics.SUB
    else:
        stats = Statistics.POISSONIAN
    return Classification(corr, stats, g0, tail)


# --- transient (non-stationary) variant ---------------------------------------


def two_time_gaussian(
    p: SystemParams, s0: MomentState, t: float, tau: float
) -> tuple[np.ndarray, np.ndarray]:
    """Joint normally ordered Gaussian of (α(t), α(t+τ)) from an initial state.

    Returns ``(mean, cov)`` in the variable order (α₁, α₂, α₁*, α₂*) with
    ``cov[i, j] = <δw_i δw_j>`` (bilinear, no conjugation).
    """
    s1 = evolve_moments(p, s0, t)
    s2 = evolve_moments(p, s1, tau)
    tc = transfer_coeffs(p, tau)
    n1, m1 = s1.n_centered, s1.m2_centered
    n2, m2 = s2.n_centered, s2.m2_centered
    cn = tc.a_plus * n1 + tc.a_minus * m1.conjugate()  # <δα₁* δα₂>
    ca = tc.a_plus * m1 + tc.a_minus * n1  # <δα₁ δα₂>
    mean = np.array([s1.mean, s2.mean, s1.mean.conjugate(), s2.mean.conjugate()])
    cov = np.array(
        [
            [m1, ca, n1, np.conj(cn)],
            [ca, m2, cn, n2],
            [n1, cn, np.conj(m1), np.conj(ca)],
            [np.conj(cn), n2, np.conj(ca), np.conj(m2)],
        ],
        dtype=complex,
    )
    return mean, cov


def g2_transient_curve(
    p: SystemParams, s0: MomentState, t: float, grid: Iterable[float]
) -> CorrelationCurve:
    """g1, g2 at reference time ``t`` for an arbitrary Gaussian initial state.

    Normalized by n(t) n(t+τ), which reduces to n_ss² at stationarity.
    """
    tau = np.asarray(list(grid), dtype=float)
    _check_grid(tau)
    g1 = np.empty(tau.size, dtype=complex)
    g2 = np.empty(tau.size)
    n_ref = None
    for k, tk in enumerate(tau):
        mean, cov = two_time_gaussian(p, s0, t, tk)
        # indices: 0 α₁, 1 α₂, 2 α₁*, 3 α₂*
        n1 = gaussint.wick_moment(mean, cov, (2, 0)).real
        n2 = gaussint.wick_moment(mean, cov, (3, 1)).real
        if n1 <= 0 or n2 <= 0:
            raise DomainError("zero denominator: occupation vanishes")
        g1[k] = gaussint.wick_moment(mean, cov, (2, 1)) / n1
        g2[k] = gaussint.wick_moment(mean, cov, (2, 3, 1, 0)).real / (n1 * n2)
        if n_ref is None:
            n_ref = n1
    return CorrelationCurve(tau, g1, g2, n_ref, method="regression-transient")
