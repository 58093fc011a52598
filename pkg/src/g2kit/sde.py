"""
Monte Carlo route: trajectories of the c-number Langevin equation.

Writing α = u + iv, the drift separates into two real Ornstein-Uhlenbeck
coordinates, u relaxing at λ₋/2 and v at λ₊/2 (u and v are the α* ± α
variables up to constant factors), driven by correlated white noise with
intensity matrix

    D = ½ [[C - Re B, -Im B], [-Im B, C + Re B]].

The exact scheme samples the integrated noise with the closed-form
covariance D_ij (1 - exp(-(k_i + k_j) h)) / (k_i + k_j).

Reproducibility: trajectories are processed in fixed-size chunks, each with
its own counter-based Philox stream keyed by (seed, chunk index), and chunk
sums are reduced in chunk order, so results do not depend on how many
worker threads run the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Any, Mapping, Optional

import numpy as np

from .errors import ConfigError, DomainError
from .model import SystemParams, validate_params
from .regression import CorrelationCurve, _check_grid

__all__ = [
    "NoiseIncrement",
    "EnsembleConfig",
    "Trajectory",
    "SCHEMES",
    "noise_covariance",
    "sample_noise",
    "exact_step_covariance",
    "stationary_covariance",
    "step",
    "make_rng",
    "simulate_trajectory",
    "simulate_curve",
    "worker_count",
]

SCHEMES = ("exact-OU", "euler-maruyama")
CHUNK_SIZE = 4096
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class NoiseIncrement:
    value: complex | np.ndarray
    dt: float


@dataclass(frozen=True)
class EnsembleConfig:
    n_traj: int
    seed: int
    dt: float = 0.01
    t_relax: float = 0.0
    scheme: str = "exact-OU"

    def check(self, p: Optional[SystemParams] = None) -> "EnsembleConfig":
        if not isinstance(self.n_traj, (int, np.integer)) or self.n_traj <= 0:
            raise ConfigError(f"n_traj must be a positive integer, got {self.n_traj!r}")
        if not isinstance(self.seed, (int, np.integer)):
            raise ConfigError("seed must be an integer")
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_relax >= 0:
            raise ConfigError(f"t_relax must be non-negative, got {self.t_relax}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if p is not None and self.scheme == "euler-maruyama" and self.dt > 0.1 / p.lambda_plus:
            raise ConfigError(
                f"euler-maruyama requires dt <= 0.1/lambda_plus = {0.1 / p.lambda_plus:.4g}"
            )
        return self

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "EnsembleConfig":
        unknown = set(d) - {"n_traj", "seed", "dt", "t_relax", "scheme"}
        if unknown:
            raise ConfigError(f"unknown ensemble keys: {sorted(unknown)}")
        try:
            n_traj = d["n_traj"]
            seed = d["seed"]
        except KeyError as exc:
            raise ConfigError(f"ensemble section missing {exc.args[0]!r}") from None
        if isinstance(n_traj, float) and n_traj.is_integer():
            n_traj = int(n_traj)
        return cls(
            n_traj=n_traj,
            seed=seed,
            dt=float(d.get("dt", 0.01)),
            t_relax=float(d.get("t_relax", 0.0)),
            scheme=str(d.get("scheme", "exact-OU")),
        ).check()


@dataclass
class Trajectory:
    times: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        if len(self.times) != len(self.alpha):
            raise ValueError("times and alpha must have equal length")


def worker_count(threads: Optional[int] = None) -> int:
    if threads is None:
        env = os.environ.get("G2KIT_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError:
                raise ConfigError(f"G2KIT_THREADS must be an integer, got {env!r}") from None
        else:
            threads = os.cpu_count() or 1
    return max(1, int(threads))


def make_rng(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator for one independent stream."""
    key = np.array([int(seed) & _MASK64, int(stream) & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


# --- noise -------------------------------------------------------------------


def _intensity(p: SystemParams) -> np.ndarray:
    b, c = p.noise_b, p.noise_c
    return 0.5 * np.array([[c - b.real, -b.imag], [-b.imag, c + b.real]])


def noise_covariance(p: SystemParams, dt: float) -> np.ndarray:
    """Covariance of (Re η, Im η) for an increment over ``dt``."""
    if p.noise_c < abs(p.noise_b):
        raise DomainError(f"noise: covariance not positive semidefinite (C={p.noise_c} < |B|={abs(p.noise_b)})")
    if not dt > 0:
        raise DomainError(f"dt must be positive, got {dt}")
    return _intensity(p) * dt


def _factor_2x2(cov: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L Lᵀ = cov for a PSD 2x2 matrix (singular allowed)."""
    a, b, c = cov[0, 0], cov[0, 1], cov[1, 1]
    scale = max(abs(a), abs(c), 1e-300)
    if a < -1e-14 * scale or c < -1e-14 * scale or a * c - b * b < -1e-12 * scale * scale:
        raise DomainError("noise: covariance not positive semidefinite")
    l11 = math.sqrt(max(a, 0.0))
    l21 = b / l11 if l11 > 0 else 0.0
    l22 = math.sqrt(max(c - l21 * l21, 0.0))
    return np.array([[l11, 0.0], [l21, l22]])


def _draw(rng: np.random.Generator, chol: np.ndarray, size) -> np.ndarray:
    g = rng.standard_normal((2,) + tuple(np.atleast_1d(size)) if size is not None else 2)
    x = chol[0, 0] * g[0]
    y = chol[1, 0] * g[0] + chol[1, 1] * g[1]
    return x + 1j * y


def sample_noise(p: SystemParams, dt: float, rng: np.random.Generator, size=None) -> NoiseIncrement:
    """Draw η integrated over ``dt``: E[η²] = -B dt, E[|η|²] = C dt.

    With ``size`` given, ``value`` is an array of independent increments.
    """
    validate_params(p)
    chol = _factor_2x2(noise_covariance(p, dt))
    val = _draw(rng, chol, size)
    if size is None:
        val = complex(val)
    return NoiseIncrement(val, float(dt))


# --- propagation -------------------------------------------------------------


def _rates(p: SystemParams) -> np.ndarray:
    return 0.5 * np.array([p.lambda_minus, p.lambda_plus])


def exact_step_covariance(p: SystemParams, dt: float) -> np.ndarray:
    """Covariance of (Re, Im) of the integrated noise over one exact step."""
    k = _rates(p)
    ksum = k[:, None] + k[None, :]
    return _intensity(p) * (-np.expm1(-ksum * dt)) / ksum


def stationary_covariance(p: SystemParams) -> np.ndarray:
    """Stationary covariance of (Re α, Im α)."""
    validate_params(p)
    k = _rates(p)
    return _intensity(p) / (k[:, None] + k[None, :])


class _Stepper:
    """Precomputed propagation of a batch of amplitudes over a fixed dt."""

    def __init__(self, p: SystemParams, dt: float, scheme: str):
        if scheme not in SCHEMES:
            raise DomainError(f"unknown scheme {scheme!r}")
        if not dt > 0:
            raise DomainError(f"dt must be positive, got {dt}")
        self.p, self.dt, self.scheme = p, dt, scheme
        if scheme == "exact-OU":
            self.decay = np.exp(-_rates(p) * dt)
            self.chol = _factor_2x2(exact_step_covariance(p, dt))
        else:
            self.chol = _factor_2x2(noise_covariance(p, dt))

    def __call__(self, alpha, rng):
        size = np.shape(alpha) if np.ndim(alpha) else None
        noise = _draw(rng, self.chol, size)
        if self.scheme == "exact-OU":
            a = np.asarray(alpha)
            out = self.decay[0] * a.real + 1j * self.decay[1] * a.imag + noise
        else:
            p = self.p
            out = alpha + (-0.5 * p.mu * alpha + p.beta * np.conj(alpha)) * self.dt + noise
        return complex(out) if size is None else out


def step(p: SystemParams, alpha, dt: float, rng: np.random.Generator, scheme: str = "exact-OU"):
    """Advance α (scalar or array) by ``dt``."""
    validate_params(p)
    if scheme == "euler-maruyama" and dt > 0.1 / p.lambda_plus:
        raise DomainError(f"euler-maruyama requires dt <= 0.1/lambda_plus = {0.1 / p.lambda_plus:.4g}")
    return _Stepper(p, dt, scheme)(alpha, rng)


def _advance(p, alpha, delta, cfg, rng, cache):
    """Propagate a batch by ``delta``; Euler subdivides into steps <= cfg.dt."""
    if cfg.scheme == "exact-OU":
        nsub, h = 1, delta
    else:
        nsub = max(1, math.ceil(delta / cfg.dt - 1e-9))
        h = delta / nsub
    key = round(h, 15)
    stepper = cache.get(key)
    if stepper is None:
        stepper = cache[key] = _Stepper(p, h, cfg.scheme)
    for _ in range(nsub):
        alpha = stepper(alpha, rng)
    return alpha


def _initial(p, cfg, size, rng, cache):
    if cfg.t_relax > 0:
        alpha = np.zeros(size, complex)
        nsteps = max(1, math.ceil(cfg.t_relax / cfg.dt - 1e-9))
        h = cfg.t_relax / nsteps
        stepper = _Stepper(p, h, cfg.scheme)
        for _ in range(nsteps):
            alpha = stepper(alpha, rng)
        return alpha
    chol = _factor_2x2(stationary_covariance(p))
    return _draw(rng, chol, size)


def simulate_trajectory(
    p: SystemParams, cfg: EnsembleConfig, times, rng: Optional[np.random.Generator] = None, alpha0=None
) -> Trajectory:
    """Single trajectory on ``times`` (starting at ``times[0]``)."""
    validate_params(p)
    cfg.check(p)
    times = np.asarray(times, float)
    rng = make_rng(cfg.seed, 0) if rng is None else rng
    cache: dict = {}
    a = complex(_initial(p, cfg, 1, rng, cache)[0]) if alpha0 is None else complex(alpha0)
    out = np.empty(times.size, complex)
    out[0] = a
    for k in range(1, times.size):
        a = complex(_advance(p, np.array([a]), times[k] - times[k - 1], cfg, rng, cache)[0])
        out[k] = a
    return Trajectory(times, out)


_SUM_KEYS = ("n", "nn", "c", "cc", "cn", "a", "f", "ff", "fn", "nk")


def _chunk_sums(p, cfg, tau, chunk_index, size):
    rng = make_rng(cfg.seed, chunk_index)
    cache: dict = {}
    x0 = _initial(p, cfg, size, rng, cache)
    n0 = np.abs(x0) ** 2
    m = tau.size
    s = {k: np.zeros(m, complex if k in ("c", "cn", "a") else float) for k in _SUM_KEYS}
    x = x0
    for k in range(m):
        if k > 0:
            x = _advance(p, x, tau[k] - tau[k - 1], cfg, rng, cache)
        c = np.conj(x0) * x
        f = n0 * np.abs(x) ** 2
        s["c"][k] = c.sum()
        s["cc"][k] = (np.abs(c) ** 2).sum()
        s["cn"][k] = (c * n0).sum()
        s["a"][k] = (x0 * x).sum()
        s["f"][k] = f.sum()
        s["ff"][k] = (f * f).sum()
        s["fn"][k] = (f * n0).sum()
        s["nk"][k] = (np.abs(x) ** 2).sum()
    s["n"][:] = n0.sum()
    s["nn"][:] = (n0 * n0).sum()
    return s


def simulate_curve(
    p: SystemParams, cfg: EnsembleConfig, grid, threads: Optional[int] = None
) -> CorrelationCurve:
    """Ensemble estimates of g1(τ) and g2(τ) with standard errors.

    Each trajectory contributes one sample per delay, taken from a single
    time origin.  The fourth moment <|α(t)|² |α(t+τ)|²> is averaged directly
    from the samples; no Gaussian factorization is assumed.  g1 and g2 are
    ratio estimators normalized by the ensemble mean of |α(t)|², and their
    standard errors come from the delta method.

    ``curve.extra`` holds the raw estimates ``n``, ``c_normal``, ``c_anom``,
    ``fourth`` and ``n_tau``.
    """
    validate_params(p)
    if isinstance(cfg.n_traj, (int, np.integer)) and cfg.n_traj == 0:
        raise ConfigError("n_traj must be positive")
    cfg.check(p)
    tau = np.asarray(grid, float)
    _check_grid(tau)

    n_total = int(cfg.n_traj)
    bounds = [(i, min(CHUNK_SIZE, n_total - i * CHUNK_SIZE)) for i in range(-(-n_total // CHUNK_SIZE))]
    workers = min(worker_count(threads), len(bounds))

    def run(b):
        return _chunk_sums(p, cfg, tau, b[0], b[1])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]

    tot = {k: np.zeros_like(parts[0][k]) for k in _SUM_KEYS}
    for part in parts:  # fixed chunk order
        for k in _SUM_KEYS:
            tot[k] += part[k]

    N = float(n_total)
    n_hat = tot["n"][0].real / N
    c_hat = tot["c"] / N
    a_hat = tot["a"] / N
    f_hat = tot["f"] / N
    extra = {
        "n": n_hat,
        "c_normal": c_hat,
        "c_anom": a_hat,
        "fourth": f_hat,
        "n_tau": tot["nk"] / N,
        "n_traj": n_total,
    }
    if n_hat <= 0:
        # noiseless start from the origin: every estimate is identically zero
        zeros = np.zeros(tau.size)
        return CorrelationCurve(tau, zeros.astype(complex), zeros, 0.0, zeros, zeros, method="sde", extra=extra)

    bessel = N / (N - 1.0) if N > 1 else 0.0
    var_n = max(tot["nn"][0].real / N - n_hat**2, 0.0) * bessel
    var_f = np.maximum(tot["ff"] / N - f_hat**2, 0.0) * bessel
    cov_fn = (tot["fn"] / N - f_hat * n_hat) * bessel
    var_c = np.maximum(tot["cc"] / N - np.abs(c_hat) ** 2, 0.0) * bessel
    cov_cn = (tot["cn"] / N - c_hat * n_hat) * bessel

    g1 = c_hat / n_hat
    g2 = f_hat / n_hat**2
    g2_var = (var_f / n_hat**4 - 4 * f_hat * cov_fn / n_hat**5 + 4 * f_hat**2 * var_n / n_hat**6) / N
    g1_var = (
        var_c / n_hat**2 + np.abs(c_hat) ** 2 * var_n / n_hat**4 - 2 * np.real(np.conj(c_hat) * cov_cn) / n_hat**3
    ) / N
    return CorrelationCurve(
        tau,
        g1,
        g2,
        n_hat,
        g1_err=np.sqrt(np.maximum(g1_var, 0.0)),
        g2_err=np.sqrt(np.maximum(g2_var, 0.0)),
        method="sde",
        extra=extra,
    )

