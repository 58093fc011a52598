"""
System parameters, moment state and transfer coefficients.

The single-mode amplitude obeys the linear c-number Langevin equation

    dα/dt = -(μ/2) α + β α* + η(t),
    <η(t') η(t)> = -B δ(t - t'),   <η*(t') η(t)> = C δ(t - t').

In the variables α* + α and α* - α the drift decouples with rates
λ∓ = μ ∓ 2β, which gives the transfer coefficients

    a±(τ) = [exp(-λ₋τ/2) ± exp(-λ₊τ/2)] / 2,

so that the noiseless flow is α(t+τ) = a₊(τ) α(t) + a₋(τ) α*(t).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .errors import DomainError

__all__ = [
    "SystemParams",
    "MomentState",
    "TransferCoeffs",
    "validate_params",
    "transfer_coeffs",
    "transfer_matrix",
]


@dataclass(frozen=True)
class SystemParams:
    """Drift and noise constants of the linear model.

    Parameters
    ----------
    mu : float
        Damping rate (> 0).
    beta : float
        Phase-sensitive coupling rate (>= 0).
    noise_b : complex
        Noise strength B, with <η η> = -B δ.
    noise_c : float
        Noise strength C, with <η* η> = C δ.
    """

    mu: float
    beta: float
    noise_b: complex = 0j
    noise_c: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mu", float(self.mu))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "noise_b", complex(self.noise_b))
        object.__setattr__(self, "noise_c", float(self.noise_c))

    @property
    def lambda_minus(self) -> float:
        return self.mu - 2.0 * self.beta

    @property
    def lambda_plus(self) -> float:
        return self.mu + 2.0 * self.beta

    def to_dict(self) -> dict[str, float]:
        return {
            "mu": self.mu,
            "beta": self.beta,
            "B_re": self.noise_b.real,
            "B_im": self.noise_b.imag,
            "C": self.noise_c,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SystemParams":
        try:
            return cls(
                mu=float(d["mu"]),
                beta=float(d["beta"]),
                noise_b=complex(float(d.get("B_re", 0.0)), float(d.get("B_im", 0.0))),
                noise_c=float(d["C"]),
            )
        except KeyError as exc:
            raise KeyError(f"missing parameter key {exc.args[0]!r}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SystemParams":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class MomentState:
    """Normally ordered first and second moments <α>, <α²>, <α*α>."""

    mean: complex = 0j
    m2: complex = 0j
    n: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "mean", complex(self.mean))
        object.__setattr__(self, "m2", complex(self.m2))
        object.__setattr__(self, "n", float(self.n))

    @property
    def n_centered(self) -> float:
        return self.n - abs(self.mean) ** 2

    @property
    def m2_centered(self) -> complex:
        return self.m2 - self.mean**2

    def check(self, atol: float = 1e-12) -> "MomentState":
        """Raise DomainError unless the state is a valid classical Gaussian."""
        nc = self.n_centered
        if nc < -atol:
            raise DomainError(f"centered occupation is negative ({nc:.3e})")
        if abs(self.m2_centered) > nc + atol * max(1.0, abs(self.n)):
            raise DomainError("|<δα²>| exceeds <|δα|²> (Cauchy-Schwarz violated)")
        return self

    @classmethod
    def vacuum(cls) -> "MomentState":
        return cls(0j, 0j, 0.0)

    @classmethod
    def coherent(cls, alpha: complex) -> "MomentState":
        alpha = complex(alpha)
        return cls(alpha, alpha**2, abs(alpha) ** 2)

    @classmethod
    def thermal(cls, n: float) -> "MomentState":
        return cls(0j, 0j, n)


@dataclass(frozen=True)
class TransferCoeffs:
    a_plus: float
    a_minus: float
    lambda_plus: float
    lambda_minus: float
    tau: float

    def matrix(self) -> np.ndarray:
        """Symmetric 2x2 map acting on (α, α*)."""
        return np.array([[self.a_plus, self.a_minus], [self.a_minus, self.a_plus]])


def validate_params(p: SystemParams) -> SystemParams:
    """Return ``p`` unchanged if it is stable and its noise is representable.

    Raises
    ------
    DomainError
        ``"unstable"`` when λ₋ = μ - 2β <= 0, ``"noise"`` when C < |B|.
    """
    if not all(math.isfinite(x) for x in (p.mu, p.beta, p.noise_b.real, p.noise_b.imag, p.noise_c)):
        raise DomainError("noise: parameters must be finite")
    if p.beta < 0:
        raise DomainError(f"unstable: beta must be non-negative, got {p.beta}")
    if p.mu <= 0 or p.lambda_minus <= 0:
        raise DomainError(
            f"unstable: stability requires lambda_minus = mu - 2*beta > 0 "
            f"(mu={p.mu}, beta={p.beta}, lambda_minus={p.lambda_minus})"
        )
    if p.noise_c < 0 or p.noise_c < abs(p.noise_b):
        raise DomainError(
            f"noise: noise covariance requires C >= |B| (C={p.noise_c}, |B|={abs(p.noise_b)})"
        )
    return p


def transfer_coeffs(p: SystemParams, tau: float) -> TransferCoeffs:
    validate_params(p)
    tau = float(tau)
    if not tau >= 0:
        raise DomainError(f"tau must be non-negative, got {tau}")
    em = math.exp(-0.5 * p.lambda_minus * tau)
    ep = math.exp(-0.5 * p.lambda_plus * tau)
    return TransferCoeffs(
        a_plus=0.5 * (em + ep),
        a_minus=0.5 * (em - ep),
        lambda_plus=p.lambda_plus,
        lambda_minus=p.lambda_minus,
        tau=tau,
    )


def transfer_matrix(p: SystemParams, tau: float) -> np.ndarray:
    return transfer_coeffs(p, tau).matrix()
