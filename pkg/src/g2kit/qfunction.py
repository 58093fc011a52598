"""
Husimi Q-function route.

A Gaussian Q-function is fixed by its mean and the anti-normally ordered
centered moments sigma_n = <|δα|²>_Q and sigma_m = <δα²>_Q.  Anti-normal
ordering adds one vacuum unit to the occupation (sigma_n = n_c + 1) and
leaves <δα²> unchanged.  Q-moments are anti-normally ordered operator
moments, which are converted back to normal order with

    a†^l a^m = Σ_k (-1)^k k! C(l,k) C(m,k) a^(m-k) a†^(l-k).

Two-time quantities use a joint Gaussian Q over (α(t), α(t+τ)) whose
cross covariances come from the regression transfer coefficients; only
same-time pairs carry the vacuum unit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

from . import gaussint
from .errors import DegreeError, DomainError
from .gaussint import GaussianForm, Monomial
from .model import MomentState, SystemParams, validate_params
from .regression import CorrelationCurve, _check_grid, steady_state, two_time_gaussian, two_time_pair

__all__ = [
    "GaussianQ",
    "JointGaussianQ",
    "q_from_moments",
    "q_evaluate",
    "antinormal_moment",
    "to_normal_order",
    "normal_from_q",
    "joint_q",
    "joint_q_transient",
    "g2_via_q",
    "g2_via_q_transient",
    "ORDERING_DEGREE_LIMIT",
]

ORDERING_DEGREE_LIMIT = 4


@dataclass(frozen=True)
class GaussianQ:
    mean: complex
    sigma_n: float
    sigma_m: complex

    def check(self, atol: float = 1e-12) -> "GaussianQ":
        if self.sigma_n < 1.0 - atol:
            raise DomainError(f"Q variance {self.sigma_n} below the vacuum floor 1")
        if abs(self.sigma_m) >= self.sigma_n:
            raise DomainError("Q covariance not positive definite (|sigma_m| >= sigma_n)")
        return self

    def form(self) -> GaussianForm:
        """π Q(α) as a Gaussian form, normalized under d²α/π."""
        s, m, mu = self.sigma_n, complex(self.sigma_m), complex(self.mean)
        det = s * s - abs(m) ** 2
        a = s / det
        f = m.conjugate() / (2 * det)
        g = m / (2 * det)
        b = a * mu.conjugate() - 2 * f * mu
        c = a * mu - 2 * g * mu.conjugate()
        const = -a * abs(mu) ** 2 + f * mu * mu + g * mu.conjugate() ** 2
        return GaussianForm([[a]], [b], [c], [[f]], [[g]], offset=const - 0.5 * math.log(det))


@dataclass(frozen=True)
class JointGaussianQ:
    """Gaussian Q over (α₁, α₂) = (α(t), α(t+τ)).

    ``cov[i, j] = <δw_i δw_j>_Q`` in the variable order (α₁, α₂, α₁*, α₂*).
    """

    mean: np.ndarray
    cov: np.ndarray
    tau: float = 0.0

    def marginal(self, which: int) -> GaussianQ:
        return GaussianQ(complex(self.mean[which]), float(self.cov[which, which + 2].real), complex(self.cov[which, which]))

    @property
    def cross(self) -> tuple[complex, complex]:
        """(<δα₁* δα₂>, <δα₁ δα₂>)."""
        return complex(self.cov[2, 1]), complex(self.cov[0, 1])

    def check(self) -> "JointGaussianQ":
        # PSD of the real 4x4 covariance of (x₁, x₂, y₁, y₂)
        t = np.block([[np.eye(2), 1j * np.eye(2)], [np.eye(2), -1j * np.eye(2)]])
        tinv = np.linalg.inv(t)
        real_cov = (tinv @ self.cov @ tinv.T).real
        if np.linalg.eigvalsh(0.5 * (real_cov + real_cov.T))[0] < -1e-12:
            raise DomainError("joint Q covariance is not positive semidefinite")
        return self

    def form(self) -> GaussianForm:
        m = np.linalg.inv(self.cov)
        j = m @ self.mean
        base = GaussianForm.from_symmetric(m, j)
        return GaussianForm(base.a_matrix, base.b_vec, base.c_vec, base.f_matrix, base.g_matrix,
                            offset=-gaussint.log_integrate(base))


def q_from_moments(s: MomentState) -> GaussianQ:
    s.check()
    return GaussianQ(s.mean, s.n_centered + 1.0, s.m2_centered).check()


def q_evaluate(q: GaussianQ, alpha: complex) -> float:
    """Q(α), a density with respect to d²α."""
    return float(np.exp(q.form().exponent(alpha)).real / math.pi)


def antinormal_moment(q: GaussianQ, l: int, m: int, max_degree: int = gaussint.DEFAULT_MAX_DEGREE) -> complex:
    """<a^m a†^l> = ∫ α^m ᾱ^l Q(α) d²α."""
    if l < 0 or m < 0:
        raise ValueError("orders must be non-negative")
    if l + m > max_degree:
        raise DegreeError(f"order {l + m} exceeds limit {max_degree}")
    return gaussint.moment(q.form(), Monomial((m,), (l,)), max_degree)


AntinormalSource = Union[Mapping[tuple[int, int], complex], Callable[[int, int], complex], GaussianQ]


def _lookup(values: AntinormalSource) -> Callable[[int, int], complex]:
    if isinstance(values, GaussianQ):
        return lambda l, m: antinormal_moment(values, l, m)
    if callable(values):
        return values
    return lambda l, m: values[(l, m)]


def to_normal_order(l: int, m: int, antinormal: AntinormalSource, limit: int = ORDERING_DEGREE_LIMIT) -> complex:
    """<a†^l a^m> from anti-normal moments.

    ``antinormal`` supplies <a^j a†^k> keyed as (k, j), matching
    ``antinormal_moment(q, l=k, m=j)``; a mapping, a callable or a
    GaussianQ are accepted.
    """
    if l < 0 or m < 0:
        raise ValueError("orders must be non-negative")
    if l + m > limit:
        raise DegreeError(f"ordering conversion limited to total order {limit}, got {l + m}")
    get = _lookup(antinormal)
    total = 0j
    for k in range(min(l, m) + 1):
        coef = (-1) ** k * math.factorial(k) * math.comb(l, k) * math.comb(m, k)
        total += coef * get(l - k, m - k)
    return complex(total)


def normal_from_q(q: GaussianQ) -> MomentState:
    """Recover <α>, <α²>, <α*α> from a Gaussian Q."""
    mean = antinormal_moment(q, 0, 1)
    m2 = antinormal_moment(q, 0, 2)
    n = to_normal_order(1, 1, q).real
    return MomentState(mean, m2, n)


# --- two-time ------------------------------------------------------------------


def _joint_from_normal(mean: np.ndarray, cov: np.ndarray, tau: float) -> JointGaussianQ:
    qcov = np.array(cov, complex)
    qcov[0, 2] += 1.0
    qcov[2, 0] += 1.0
    qcov[1, 3] += 1.0
    qcov[3, 1] += 1.0
    return JointGaussianQ(np.asarray(mean, complex), qcov, float(tau)).check()


def joint_q(p: SystemParams, tau: float) -> JointGaussianQ:
    """Stationary joint Q of (α(t), α(t+τ))."""
    validate_params(p)
    ss = steady_state(p)
    cn, ca = two_time_pair(p, tau)
    n, m = ss.n, ss.m2
    cov = np.array(
        [
            [m, ca, n, np.conj(cn)],
            [ca, m, cn, n],
            [n, cn, np.conj(m), np.conj(ca)],
            [np.conj(cn), n, np.conj(ca), np.conj(m)],
        ],
        dtype=complex,
    )
    return _joint_from_normal(np.zeros(4, complex), cov, tau)


def joint_q_transient(p: SystemParams, s0: MomentState, t: float, tau: float) -> JointGaussianQ:
    mean, cov = two_time_gaussian(p, s0, t, tau)
    return _joint_from_normal(mean, cov, tau)


def _joint_normal_moment(jq: JointGaussianQ, l1: int, m1: int, l2: int, m2: int) -> complex:
    """<α₁*^l1 α₂*^l2 α₂^m2 α₁^m1> (normal order per time) from joint Q-moments.

    Operators at different times are not reordered; each time gets the
    single-mode anti-normal to normal conversion.
    """
    if l1 + m1 > ORDERING_DEGREE_LIMIT or l2 + m2 > ORDERING_DEGREE_LIMIT:
        raise DegreeError("ordering conversion limited to total order 4 per time")
    form = jq.form()
    mean, cov = form.moments()
    total = 0j
    for k1 in range(min(l1, m1) + 1):
        c1 = (-1) ** k1 * math.factorial(k1) * math.comb(l1, k1) * math.comb(m1, k1)
        for k2 in range(min(l2, m2) + 1):
            c2 = (-1) ** k2 * math.factorial(k2) * math.comb(l2, k2) * math.comb(m2, k2)
            mono = Monomial((m1 - k1, m2 - k2), (l1 - k1, l2 - k2))
            total += c1 * c2 * gaussint.wick_moment(mean, cov, mono.indices())
    return complex(total)


def _curve_from_joints(joints, tau: np.ndarray, method: str) -> CorrelationCurve:
    g1 = np.empty(tau.size, complex)
    g2 = np.empty(tau.size)
    n_ref = None
    for k, jq in enumerate(joints):
        n1 = _joint_normal_moment(jq, 1, 1, 0, 0).real
        n2 = _joint_normal_moment(jq, 0, 0, 1, 1).real
        if n1 <= 0 or n2 <= 0:
            raise DomainError("zero denominator: occupation vanishes")
        g1[k] = _joint_normal_moment(jq, 1, 0, 0, 1) / n1
        g2[k] = _joint_normal_moment(jq, 1, 1, 1, 1).real / (n1 * n2)
        if n_ref is None:
            n_ref = n1
    return CorrelationCurve(tau, g1, g2, n_ref, method=method)


def g2_via_q(p: SystemParams, grid) -> CorrelationCurve:
    """Stationary g1(τ), g2(τ) from Gaussian moments of the joint Q."""
    tau = np.asarray(grid, float)
    _check_grid(tau)
    if steady_state(p).n <= 0:
        raise DomainError("zero denominator: steady-state occupation is zero")
    return _curve_from_joints((joint_q(p, tk) for tk in tau), tau, "qfunction")


def g2_via_q_transient(p: SystemParams, s0: MomentState, t: float, grid) -> CorrelationCurve:
    """Non-stationary variant normalized by n(t) n(t+τ)."""
    tau = np.asarray(grid, float)
    _check_grid(tau)
    return _curve_from_joints((joint_q_transient(p, s0, t, tk) for tk in tau), tau, "qfunction-transient")

