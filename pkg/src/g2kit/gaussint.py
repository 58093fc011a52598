"""
Closed-form complex Gaussian integrals.

A form over ``n`` complex variables z represents the exponent

    E(z) = -z̄ᵀ A z + bᵀ z + cᵀ z̄ + zᵀ F z + z̄ᵀ G z̄ + offset

integrated against the measure Π d²z_k / π.  Internally z and z̄ are treated
as independent variables collected in w = (z, z̄), so that

    E = -½ wᵀ M w + Jᵀ w + offset,   M = [[-2F, Aᵀ], [A, -2G]],  J = (b, c).

Under the normalized Gaussian, <w> = M⁻¹ J and <δw δwᵀ> = M⁻¹, which is all
that Wick pairing needs.  Integrability is decided on the real
decomposition z = x + iy: the real part of the 2n x 2n matrix K = Tᵀ M T,
with w = T (x, y), must be positive definite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, DegreeError, SingularError

__all__ = [
    "GaussianForm",
    "Monomial",
    "integrate",
    "log_integrate",
    "moment",
    "wick_moment",
    "integrate_out",
    "block_diag",
    "DEFAULT_MAX_DEGREE",
]

DEFAULT_MAX_DEGREE = 8
COND_LIMIT = 1e12
DET_FLOOR = 1e-300


@dataclass
class GaussianForm:
    a_matrix: np.ndarray
    b_vec: np.ndarray
    c_vec: np.ndarray
    f_matrix: Optional[np.ndarray] = None
    g_matrix: Optional[np.ndarray] = None
    offset: complex = 0j

    def __post_init__(self):
        self.a_matrix = np.atleast_2d(np.asarray(self.a_matrix, dtype=complex))
        n = self.a_matrix.shape[0]
        if self.a_matrix.shape != (n, n):
            raise ValueError("a_matrix must be square")
        self.b_vec = np.zeros(n, complex) if self.b_vec is None else np.atleast_1d(np.asarray(self.b_vec, complex))
        self.c_vec = np.zeros(n, complex) if self.c_vec is None else np.atleast_1d(np.asarray(self.c_vec, complex))
        if self.b_vec.shape != (n,) or self.c_vec.shape != (n,):
            raise ValueError("b_vec and c_vec must have length dim")
        for name in ("f_matrix", "g_matrix"):
            m = getattr(self, name)
            if m is None:
                continue
            m = np.atleast_2d(np.asarray(m, dtype=complex))
            if m.shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
            if not np.allclose(m, m.T, rtol=0, atol=1e-14 * max(1.0, np.abs(m).max())):
                raise ValueError(f"{name} must be symmetric")
            setattr(self, name, 0.5 * (m + m.T))
        self.offset = complex(self.offset)

    @property
    def dim(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def is_diagonal(self) -> bool:
        """True when there are no zz or z̄z̄ couplings."""
        return not (
            (self.f_matrix is not None and np.any(self.f_matrix != 0))
            or (self.g_matrix is not None and np.any(self.g_matrix != 0))
        )

    def symmetric(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (M, J) of the w = (z, z̄) representation."""
        n = self.dim
        zero = np.zeros((n, n), complex)
        f = zero if self.f_matrix is None else self.f_matrix
        g = zero if self.g_matrix is None else self.g_matrix
        m = np.block([[-2.0 * f, self.a_matrix.T], [self.a_matrix, -2.0 * g]])
        return m, np.concatenate([self.b_vec, self.c_vec])

    @classmethod
    def from_symmetric(cls, m: np.ndarray, j: np.ndarray, offset: complex = 0j) -> "GaussianForm":
        n = m.shape[0] // 2
        m = 0.5 * (m + m.T)
        return cls(
            a_matrix=m[n:, :n],
            b_vec=j[:n],
            c_vec=j[n:],
            f_matrix=-0.5 * m[:n, :n],
            g_matrix=-0.5 * m[n:, n:],
            offset=offset,
        )

    def exponent(self, z) -> complex:
        """Evaluate E(z) at a point (used by quadrature cross-checks)."""
        z = np.atleast_1d(np.asarray(z, complex))
        zb = z.conj()
        val = -zb @ self.a_matrix @ z + self.b_vec @ z + self.c_vec @ zb + self.offset
        if self.f_matrix is not None:
            val += z @ self.f_matrix @ z
        if self.g_matrix is not None:
            val += zb @ self.g_matrix @ zb
        return complex(val)

    def moments(self) -> tuple[np.ndarray, np.ndarray]:
        """Mean <w> and bilinear covariance <δw δwᵀ> of the normalized Gaussian."""
        m, j = self.symmetric()
        _check_conditioning(m)
        cov = np.linalg.inv(m)
        cov = 0.5 * (cov + cov.T)
        return cov @ j, cov


@dataclass(frozen=True)
class Monomial:
    """Π z_i^{z_powers[i]} z̄_i^{zbar_powers[i]}."""

    z_powers: tuple[int, ...]
    zbar_powers: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "z_powers", tuple(int(k) for k in self.z_powers))
        object.__setattr__(self, "zbar_powers", tuple(int(k) for k in self.zbar_powers))
        if len(self.z_powers) != len(self.zbar_powers):
            raise ValueError("z_powers and zbar_powers must have equal length")
        if any(k < 0 for k in self.z_powers + self.zbar_powers):
            raise ValueError("powers must be non-negative")

    @property
    def degree(self) -> int:
        return sum(self.z_powers) + sum(self.zbar_powers)

    def indices(self) -> tuple[int, ...]:
        """Flatten into w-indices (z_i -> i, z̄_i -> n + i)."""
        n = len(self.z_powers)
        out: list[int] = []
        for i, k in enumerate(self.z_powers):
            out += [i] * k
        for i, k in enumerate(self.zbar_powers):
            out += [n + i] * k
        return tuple(out)

    @classmethod
    def one(cls, dim: int) -> "Monomial":
        return cls((0,) * dim, (0,) * dim)


def _real_matrix(m: np.ndarray) -> np.ndarray:
    n = m.shape[0] // 2
    eye = np.eye(n)
    t = np.block([[eye, 1j * eye], [eye, -1j * eye]])
    return t.T @ m @ t


def _check_conditioning(m: np.ndarray) -> None:
    if not np.all(np.isfinite(m)):
        raise SingularError("exponent matrix has non-finite entries")
    sv = np.linalg.svd(m, compute_uv=False)
    if sv[-1] <= DET_FLOOR or sv[0] / sv[-1] > COND_LIMIT:
        raise SingularError(f"exponent matrix ill-conditioned (singular values {sv[0]:.3e} .. {sv[-1]:.3e})")


def _log_prefactor(m: np.ndarray) -> complex:
    """log of ∫ Π d²z/π exp(-½ wᵀ M w), with convergence checked."""
    k = _real_matrix(m)
    re = 0.5 * (k.real + k.real.T)
    lam_min = np.linalg.eigvalsh(re)[0]
    if not lam_min > 0:
        raise ConvergenceError(f"real part of exponent not positive definite (min eigenvalue {lam_min:.3e})")
    # eigenvalues of K have positive real part, so principal logs give the
    # branch continuously connected to the real positive-definite case
    eig = np.linalg.eigvals(k)
    n = m.shape[0] // 2
    return complex(n * np.log(2.0) - 0.5 * np.sum(np.log(eig.astype(complex))))


def log_integrate(form: GaussianForm) -> complex:
    m, j = form.symmetric()
    _check_conditioning(m)
    if form.is_diagonal:
        a = form.a_matrix
        # real decomposition of the diagonal case still has to be integrable
        _log_prefactor(m)
        sign, logdet = np.linalg.slogdet(a)
        if logdet < np.log(DET_FLOOR):
            raise SingularError("determinant below floor")
        quad = form.b_vec @ np.linalg.solve(a, form.c_vec)
        return complex(form.offset - (np.log(sign) + logdet) + quad)
    logpref = _log_prefactor(m)
    quad = 0.5 * j @ np.linalg.solve(m, j)
    return complex(form.offset + logpref + quad)


def integrate(form: GaussianForm) -> complex:
    """∫ Π d²z/π exp(E(z)).

    For forms without zz / z̄z̄ couplings this is det(A)⁻¹ exp(bᵀ A⁻¹ c);
    otherwise the 2n-dimensional real Gaussian formula is used.

    Raises
    ------
    ConvergenceError
        If the real part of the exponent matrix is not positive definite.
    SingularError
        If the exponent matrix is (numerically) singular.
    """
    return complex(np.exp(log_integrate(form)))


def wick_moment(mean: np.ndarray, cov: np.ndarray, idx: Sequence[int]) -> complex:
    """E[Π w_i] for a Gaussian with given mean and bilinear covariance.

    Sums over all ways of assigning each factor to its mean or pairing it
    with another factor (Isserlis with mean insertions).
    """
    mean = np.asarray(mean, complex)
    cov = np.asarray(cov, complex)

    @lru_cache(maxsize=None)
    def rec(key: tuple[int, ...]) -> complex:
        if not key:
            return 1.0 + 0j
        first, rest = key[0], key[1:]
        total = mean[first] * rec(rest) if mean[first] != 0 else 0j
        for k, other in enumerate(rest):
            c = cov[first, other]
            if c != 0:
                total += c * rec(rest[:k] + rest[k + 1 :])
        return total

    return complex(rec(tuple(sorted(idx))))


def moment(form: GaussianForm, m: Monomial, max_degree: int = DEFAULT_MAX_DEGREE) -> complex:
    """∫ Π d²z/π (monomial) exp(E(z))."""
    if len(m.z_powers) != form.dim:
        raise ValueError("monomial dimension does not match form")
    if m.degree > max_degree:
        raise DegreeError(f"monomial degree {m.degree} exceeds limit {max_degree}")
    norm = integrate(form)
    if m.degree == 0:
        return norm
    mean, cov = form.moments()
    return norm * wick_moment(mean, cov, m.indices())


def normalized_moment(form: GaussianForm, m: Monomial, max_degree: int = DEFAULT_MAX_DEGREE) -> complex:
    """Moment divided by the integral, i.e. an expectation value."""
    if m.degree > max_degree:
        raise DegreeError(f"monomial degree {m.degree} exceeds limit {max_degree}")
    integrate(form)  # convergence and conditioning checks
    mean, cov = form.moments()
    return wick_moment(mean, cov, m.indices())


def integrate_out(form: GaussianForm, idx: Sequence[int]) -> GaussianForm:
    """Integrate over the complex variables ``idx``; return the form on the rest.

    The kept variables keep their relative order.
    """
    n = form.dim
    idx = sorted(set(int(i) for i in idx))
    keep = [i for i in range(n) if i not in idx]
    if not idx:
        return form
    m, j = form.symmetric()
    wy = idx + [n + i for i in idx]
    wx = keep + [n + i for i in keep]
    myy = m[np.ix_(wy, wy)]
    _check_conditioning(myy)
    logpref = _log_prefactor(myy)
    jy = j[wy]
    sol_j = np.linalg.solve(myy, jy)
    offset = form.offset + logpref + 0.5 * jy @ sol_j
    if not keep:
        return GaussianForm(np.zeros((0, 0)), np.zeros(0), np.zeros(0), offset=offset)
    mxy = m[np.ix_(wx, wy)]
    mred = m[np.ix_(wx, wx)] - mxy @ np.linalg.solve(myy, mxy.T)
    jred = j[wx] - mxy @ sol_j
    return GaussianForm.from_symmetric(mred, jred, offset)


def block_diag(f1: GaussianForm, f2: GaussianForm) -> GaussianForm:
    """Direct sum of two forms over disjoint variable sets."""
    n1, n2 = f1.dim, f2.dim

    def _bd(x, y):
        x = np.zeros((n1, n1), complex) if x is None else x
        y = np.zeros((n2, n2), complex) if y is None else y
        out = np.zeros((n1 + n2, n1 + n2), complex)
        out[:n1, :n1] = x
        out[n1:, n1:] = y
        return out

    return GaussianForm(
        _bd(f1.a_matrix, f2.a_matrix),
        np.concatenate([f1.b_vec, f2.b_vec]),
        np.concatenate([f1.c_vec, f2.c_vec]),
        _bd(f1.f_matrix, f2.f_matrix),
        _bd(f1.g_matrix, f2.g_matrix),
        f1.offset + f2.offset,
    )
