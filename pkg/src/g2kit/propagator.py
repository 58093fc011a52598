"""
Coherent-state propagators K(α,t|β,0) = <α|U(t)|β> for quadratic generators.

Every kernel here has the Gaussian form

    K(α,t|β,0) = exp(-|α|²/2 - |β|²/2 + u ᾱβ + v ᾱ² + w β² + l_a ᾱ + l_b β + offset).

For the drift dα/dt = -(μ/2 + iω) α + β α* with transfer matrix
[[P, Q], [Q̄, P̄]], the kernel with

    u = (|P|² - |Q|²)/P̄,  v = Q/(2P̄),  w = -Q̄/(2P̄),  offset = -½ log(P̄ e^{(μ/2 - iω)t})

maps a coherent state |β> onto a Gaussian state whose normalized mean is
Pβ + Qβ̄.  For μ = 0 it is the exact matrix element of the squeeze-rotation
unitary; for β = 0 it is exp(-(μ/2 + iω) t a†a).  With both μ > 0 and β > 0
no Gaussian operator semigroup reproduces the mean map, so in that regime
the family matches moments but does not compose to itself.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from . import gaussint
from .errors import DomainError
from .gaussint import GaussianForm, Monomial
from .model import SystemParams

__all__ = [
    "PropagatorKernel",
    "Drift",
    "kernel_free",
    "kernel_damped",
    "compose",
    "evaluate",
    "induced_mean",
    "g1_via_chain",
    "chain_form",
]


@dataclass(frozen=True)
class PropagatorKernel:
    u: complex
    v: complex = 0j
    w: complex = 0j
    offset: complex = 0j
    t: float = 0.0
    lin_alpha: complex = 0j
    lin_beta: complex = 0j

    def coefficients(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w, self.offset, self.lin_alpha, self.lin_beta], complex)


@dataclass(frozen=True)
class Drift:
    """Noiseless linear drift dα/dt = -(μ/2 + iω) α + β α*."""

    mu: float = 0.0
    beta: float = 0.0
    omega: float = 0.0

    @classmethod
    def from_params(cls, p: SystemParams, omega: float = 0.0) -> "Drift":
        return cls(p.mu, p.beta, omega)

    def generator(self) -> np.ndarray:
        return np.array(
            [[-0.5 * self.mu - 1j * self.omega, self.beta], [self.beta, -0.5 * self.mu + 1j * self.omega]]
        )

    def transfer(self, t: float) -> np.ndarray:
        """Map (α, α*)(0) -> (α, α*)(t)."""
        if self.omega == 0:
            em = np.exp(-0.5 * (self.mu - 2 * self.beta) * t)
            ep = np.exp(-0.5 * (self.mu + 2 * self.beta) * t)
            return np.array([[em + ep, em - ep], [em - ep, em + ep]], complex) * 0.5
        return scipy.linalg.expm(t * self.generator())


def kernel_free(omega: float, t: float) -> PropagatorKernel:
    """Kernel of exp(-iωt a†a)."""
    return PropagatorKernel(u=cmath.exp(-1j * omega * t), t=float(t))


def kernel_damped(drift: Union[Drift, SystemParams], t: float) -> PropagatorKernel:
    if isinstance(drift, SystemParams):
        drift = Drift.from_params(drift)
    if drift.mu < 0 or drift.beta < 0:
        raise DomainError(f"drift rates must be non-negative (mu={drift.mu}, beta={drift.beta})")
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    if t == 0:
        return PropagatorKernel(u=1.0 + 0j, t=0.0)
    m = drift.transfer(t)
    p, q = complex(m[0, 0]), complex(m[0, 1])
    pb = p.conjugate()
    det = abs(p) ** 2 - abs(q) ** 2
    return PropagatorKernel(
        u=det / pb,
        v=q / (2 * pb),
        w=-q.conjugate() / (2 * pb),
        offset=-0.5 * cmath.log(pb * cmath.exp((0.5 * drift.mu - 1j * drift.omega) * t)),
        t=float(t),
    )


# --- exponent assembly ---------------------------------------------------------

Atom = Union[int, complex]


class _Exponent:
    """Accumulates a quadratic exponent over ``n`` complex variables.

    Endpoints are either a variable index or a fixed complex number.
    """

    def __init__(self, n: int):
        self.n = n
        self.a = np.zeros((n, n), complex)
        self.f = np.zeros((n, n), complex)
        self.g = np.zeros((n, n), complex)
        self.b = np.zeros(n, complex)
        self.c = np.zeros(n, complex)
        self.const = 0j

    @staticmethod
    def _is_var(x) -> bool:
        return isinstance(x, (int, np.integer)) and not isinstance(x, bool)

    def bar_times(self, coef, x, y):
        """coef * conj(x) * y."""
        xv, yv = self._is_var(x), self._is_var(y)
        if xv and yv:
            self.a[x, y] -= coef
        elif xv:
            self.c[x] += coef * y
        elif yv:
            self.b[y] += coef * np.conj(x)
        else:
            self.const += coef * np.conj(x) * y

    def times(self, coef, x, y):
        """coef * x * y."""
        xv, yv = self._is_var(x), self._is_var(y)
        if xv and yv:
            self.f[x, y] += 0.5 * coef
            self.f[y, x] += 0.5 * coef
        elif xv:
            self.b[x] += coef * y
        elif yv:
            self.b[y] += coef * x
        else:
            self.const += coef * x * y

    def bar_bar(self, coef, x, y):
        """coef * conj(x) * conj(y)."""
        xv, yv = self._is_var(x), self._is_var(y)
        if xv and yv:
            self.g[x, y] += 0.5 * coef
            self.g[y, x] += 0.5 * coef
        elif xv:
            self.c[x] += coef * np.conj(y)
        elif yv:
            self.c[y] += coef * np.conj(x)
        else:
            self.const += coef * np.conj(x * y)

    def lin(self, coef, x):
        if self._is_var(x):
            self.b[x] += coef
        else:
            self.const += coef * x

    def lin_bar(self, coef, x):
        if self._is_var(x):
            self.c[x] += coef
        else:
            self.const += coef * np.conj(x)

    def kernel(self, k: PropagatorKernel, x: Atom, y: Atom, conjugate: bool = False):
        """Add log K(x|y), or log of its complex conjugate."""
        self.bar_times(-0.5, x, x)
        self.bar_times(-0.5, y, y)
        if not conjugate:
            self.bar_times(k.u, x, y)
            self.bar_bar(k.v, x, x)
            self.times(k.w, y, y)
            self.lin_bar(k.lin_alpha, x)
            self.lin(k.lin_beta, y)
            self.const += k.offset
        else:
            self.bar_times(np.conj(k.u), y, x)
            self.times(np.conj(k.v), x, x)
            self.bar_bar(np.conj(k.w), y, y)
            self.lin(np.conj(k.lin_alpha), x)
            self.lin_bar(np.conj(k.lin_beta), y)
            self.const += np.conj(k.offset)

    def overlap(self, x: Atom, y: Atom, conjugate: bool = False):
        """Add log <x|y> (or its conjugate <y|x>)."""
        self.kernel(PropagatorKernel(u=1.0 + 0j), x, y, conjugate)

    def form(self) -> GaussianForm:
        return GaussianForm(self.a, self.b, self.c, self.f, self.g, self.const)


def evaluate(k: PropagatorKernel, alpha: complex, beta: complex) -> complex:
    e = _Exponent(0)
    e.kernel(k, complex(alpha), complex(beta))
    return complex(np.exp(e.const))


def compose(k1: PropagatorKernel, k2: PropagatorKernel, atol: float = 1e-9) -> PropagatorKernel:
    """Kernel of U₂U₁: ∫ d²β/π K₂(α,t₂|β) K₁(β,t₁|γ), β integrated by the Gaussian engine."""
    e = _Exponent(3)  # 0: α, 1: β, 2: γ
    e.kernel(k2, 0, 1)
    e.kernel(k1, 1, 2)
    red = gaussint.integrate_out(e.form(), [1])
    a = red.a_matrix
    f = np.zeros((2, 2)) if red.f_matrix is None else red.f_matrix
    g = np.zeros((2, 2)) if red.g_matrix is None else red.g_matrix
    stray = [a[0, 0] - 0.5, a[1, 1] - 0.5, a[1, 0], f[0, 0], f[0, 1], g[1, 1], g[0, 1], red.b_vec[0], red.c_vec[1]]
    if max(abs(s) for s in stray) > atol * max(1.0, np.abs(a).max()):
        raise ValueError("composed exponent is not of coherent-state kernel form")
    return PropagatorKernel(
        u=complex(-a[0, 1]),
        v=complex(g[0, 0]),
        w=complex(f[1, 1]),
        offset=complex(red.offset),
        t=k1.t + k2.t,
        lin_alpha=complex(red.c_vec[0]),
        lin_beta=complex(red.b_vec[1]),
    )


def induced_mean(k: PropagatorKernel, beta: complex) -> complex:
    """Normalized <a> of the state U|β>, from ∫ d²α/π α |K(α|β)|²."""
    e = _Exponent(1)
    e.kernel(k, 0, complex(beta))
    e.kernel(k, 0, complex(beta), conjugate=True)
    return gaussint.normalized_moment(e.form(), Monomial((1,), (0,)))


def chain_form(kernel_at: Callable[[float], PropagatorKernel], alpha0: complex, t: float, tau: float) -> GaussianForm:
    """Five-variable integrand of <a†(t+τ) a(t)> for the initial state |α₀>.

    Variables (α, α₁, α₂, α₃, α₄) enter through

        <α₁|α₀> <α₀|α₃> K(α₄,τ|α,0) K*(α₄,τ|α₂,0) K(α,t|α₁,0) K*(α₂,t|α₃,0).

    The delay kernel starts from time 0; writing K(α₄,τ|α,τ) here would
    break the chain obtained by inserting coherent-state resolutions
    into Tr(ρ(t) a†(τ) a).
    """
    alpha0 = complex(alpha0)
    k_t, k_tau = kernel_at(t), kernel_at(tau)
    e = _Exponent(5)
    e.overlap(1, alpha0)
    e.overlap(alpha0, 3)
    e.kernel(k_tau, 4, 0)
    e.kernel(k_tau, 4, 2, conjugate=True)
    e.kernel(k_t, 0, 1)
    e.kernel(k_t, 2, 3, conjugate=True)
    return e.form()


def g1_via_chain(
    kernel_at: Callable[[float], PropagatorKernel],
    alpha0: complex,
    t: float,
    tau: float,
    normalize: bool = True,
) -> complex:
    """g(τ) = <a†(t+τ) a(t)> for the coherent initial state |α₀>.

    Parameters
    ----------
    kernel_at : callable
        Returns the propagator kernel for a given duration.
    normalize : bool
        Divide by the same chain without the α ᾱ₄ prefactor, i.e. by
        ||U(t+τ)|α₀>||².  This is 1 for unitary kernels and removes the
        norm loss of damped (non-unitary) kernels.
    """
    form = chain_form(kernel_at, alpha0, t, tau)
    mono = Monomial((1, 0, 0, 0, 0), (0, 0, 0, 0, 1))
    if normalize:
        return gaussint.normalized_moment(form, mono)
    return gaussint.moment(form, mono)
