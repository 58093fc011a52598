"""
Command-line front end.

    g2kit correlate CONFIG [--method M] [--seed S] [--tau-max T] [--steps N] [--out PATH] [--format F]
    g2kit compare CONFIG_A CONFIG_B [--tol X] [--z-max Z]
    g2kit classify CURVE [--tol X]

Exit codes: 0 ok, 2 configuration or input error, 3 domain error,
4 numerical failure, 5 comparison outside tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from . import __version__
from .errors import ConfigError, DomainError, NumericalError
from .io import read_curve, write_curve
from .model import SystemParams, validate_params
from .propagator import Drift, g1_via_chain, kernel_damped
from .qfunction import g2_via_q
from .regression import CorrelationCurve, classify, g2_curve, make_grid
from .sde import EnsembleConfig, simulate_curve

METHODS = ("regression", "sde", "qfunction", "propagator")
EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_NUMERIC, EXIT_MISMATCH = 0, 2, 3, 4, 5


@dataclass
class PropagatorSetup:
    alpha0: complex = 1.0 + 0j
    t: float = 0.0
    omega: float = 0.0


@dataclass
class RunConfig:
    params: SystemParams
    tau_max: float
    steps: int
    method: str
    ensemble: Optional[EnsembleConfig] = None
    propagator: Optional[PropagatorSetup] = None
    output_path: Optional[str] = None
    output_format: str = "csv"
    tolerance: float = 1e-6
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def grid(self) -> np.ndarray:
        return make_grid(self.tau_max, self.steps)

    def check(self) -> "RunConfig":
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if not self.tau_max > 0:
            raise ConfigError("grid.tau_max must be positive")
        if not isinstance(self.steps, int) or self.steps <= 1:
            raise ConfigError("grid.steps must be an integer > 1")
        if (self.ensemble is not None) != (self.method == "sde"):
            raise ConfigError("the 'ensemble' section is required for method 'sde' and only for it")
        if self.propagator is not None and self.method != "propagator":
            raise ConfigError("the 'propagator' section is only valid for method 'propagator'")
        if self.output_format not in ("csv", "json"):
            raise ConfigError(f"output.format must be csv or json, got {self.output_format!r}")
        return self


def parse_config(data: dict[str, Any], overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    try:
        params = SystemParams.from_dict(data["params"])
        grid = data.get("grid", {})
        tau_max = float(overrides.get("tau_max", grid.get("tau_max", 5.0)))
        steps = overrides.get("steps", grid.get("steps", 100))
        if isinstance(steps, float) and steps.is_integer():
            steps = int(steps)
        method = overrides.get("method", data.get("method", "regression"))
        ensemble = None
        if "ensemble" in data:
            ens = dict(data["ensemble"])
            if "seed" in overrides:
                ens["seed"] = overrides["seed"]
            ensemble = EnsembleConfig.from_dict(ens)
        prop = None
        if "propagator" in data:
            ps = data["propagator"]
            prop = PropagatorSetup(
                alpha0=complex(float(ps.get("alpha0_re", 1.0)), float(ps.get("alpha0_im", 0.0))),
                t=float(ps.get("t", 0.0)),
                omega=float(ps.get("omega", 0.0)),
            )
        elif method == "propagator":
            prop = PropagatorSetup()
        out = data.get("output", {})
        path = overrides.get("out", out.get("path"))
        fmt = overrides.get("format", out.get("format"))
        if fmt is None:
            fmt = "json" if path and str(path).endswith(".json") else "csv"
        tol = float(data.get("tolerance", 1e-6))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid config: {exc}") from exc
    return RunConfig(params, tau_max, steps, method, ensemble, prop, path, fmt, tol, raw=data).check()


def load_config(path: str, overrides: Optional[dict[str, Any]] = None) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(data, overrides)


def propagator_curve(p: SystemParams, setup: PropagatorSetup, grid) -> CorrelationCurve:
    """g1(τ) of the noiseless drift from the coherent-state propagator chain."""
    drift = Drift.from_params(p, setup.omega)

    def kernel_at(s):
        return kernel_damped(drift, s)

    tau = np.asarray(grid, float)
    vals = np.array([g1_via_chain(kernel_at, setup.alpha0, setup.t, tk) for tk in tau])
    n = vals[0].real
    if not n > 0:
        raise DomainError("zero denominator: propagated occupation is zero")
    # chain gives <a†(t+τ) a(t)>, the conjugate of <a†(t) a(t+τ)>
    return CorrelationCurve(tau, np.conj(vals) / n, None, n, method="propagator")


def compute(cfg: RunConfig, threads: Optional[int] = None) -> CorrelationCurve:
    p = validate_params(cfg.params)
    grid = cfg.grid
    if cfg.method == "regression":
        return g2_curve(p, grid)
    if cfg.method == "qfunction":
        return g2_via_q(p, grid)
    if cfg.method == "sde":
        return simulate_curve(p, cfg.ensemble, grid, threads=threads)
    return propagator_curve(p, cfg.propagator, grid)


@dataclass
class Comparison:
    max_dg1: float
    max_dg2: Optional[float]
    max_z: Optional[float]
    z_scores: Optional[np.ndarray]
    passed: bool

    def report(self) -> str:
        lines = [f"max_abs_dg1 = {self.max_dg1:.6e}"]
        lines.append("max_abs_dg2 = " + ("n/a" if self.max_dg2 is None else f"{self.max_dg2:.6e}"))
        if self.z_scores is not None:
            lines.append(f"max_abs_z = {self.max_z:.4f}")
            lines.append("z_scores = " + " ".join(f"{z:.3f}" for z in self.z_scores))
        lines.append("result = " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def compare_curves(a: CorrelationCurve, b: CorrelationCurve, tol: float = 1e-8, z_max: float = 3.0) -> Comparison:
    if a.tau.shape != b.tau.shape or not np.array_equal(a.tau, b.tau):
        raise ConfigError("curves are on different tau grids")
    dg1 = np.abs(a.g1 - b.g1)
    dg2 = None if a.g2 is None or b.g2 is None else np.abs(a.g2 - b.g2)
    errs = [c.g2_err for c in (a, b) if c.g2_err is not None]
    if errs and dg2 is not None:
        err = np.sqrt(sum(e**2 for e in errs))
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(err > 0, dg2 / np.where(err > 0, err, 1.0), np.where(dg2 <= 1e-12, 0.0, np.inf))
        max_z = float(np.max(z))
        passed = max_z <= z_max
        return Comparison(float(dg1.max()), float(dg2.max()), max_z, z, passed)
    passed = float(dg1.max()) <= tol and (dg2 is None or float(dg2.max()) <= tol)
    return Comparison(float(dg1.max()), None if dg2 is None else float(dg2.max()), None, None, passed)


# --- argparse glue ---------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="g2kit", description="Two-time photon correlation engine.")
    ap.add_argument("--version", action="version", version=f"g2kit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("correlate", help="compute a correlation curve from a JSON config")
    c.add_argument("config")
    c.add_argument("--method", choices=METHODS)
    c.add_argument("--seed", type=int)
    c.add_argument("--tau-max", type=float, dest="tau_max")
    c.add_argument("--steps", type=int)
    c.add_argument("--out")
    c.add_argument("--format", choices=("csv", "json"))

    m = sub.add_parser("compare", help="compare two runs on the same parameters and grid")
    m.add_argument("config_a")
    m.add_argument("config_b")
    m.add_argument("--tol", type=float, default=1e-8, help="max |Δg| when neither side has error bars")
    m.add_argument("--z-max", type=float, default=3.0, dest="z_max")

    k = sub.add_parser("classify", help="classify a curve file (CSV or JSON)")
    k.add_argument("curve")
    k.add_argument("--tol", type=float, default=1e-6)
    return ap


def _err(msg: str) -> None:
    print(f"g2kit: error: {msg}", file=sys.stderr)


def _cmd_correlate(args) -> int:
    cfg = load_config(
        args.config,
        {"method": args.method, "seed": args.seed, "tau_max": args.tau_max, "steps": args.steps,
         "out": args.out, "format": args.format},
    )
    curve = compute(cfg)
    write_curve(curve, cfg.output_path, cfg.output_format)
    return EXIT_OK


def _cmd_compare(args) -> int:
    a = load_config(args.config_a)
    b = load_config(args.config_b)
    if a.params != b.params:
        raise ConfigError("configs use different parameters")
    if a.tau_max != b.tau_max or a.steps != b.steps:
        raise ConfigError("configs use different tau grids")
    result = compare_curves(compute(a), compute(b), tol=args.tol, z_max=args.z_max)
    print(f"methods = {a.method} vs {b.method}")
    print(result.report())
    return EXIT_OK if result.passed else EXIT_MISMATCH


def _cmd_classify(args) -> int:
    try:
        curve = read_curve(args.curve)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot parse curve file {args.curve}: {exc}") from exc
    if curve.g2 is None:
        raise ConfigError("curve file has no g2 values")
    cls = classify(curve, args.tol)
    print(cls.label())
    print(f"g2(0) = {cls.g2_zero:.10g}")
    print(f"g2(tail) = {cls.g2_tail:.10g}")
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    handler = {"correlate": _cmd_correlate, "compare": _cmd_compare, "classify": _cmd_classify}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_CONFIG
    except DomainError as exc:
        _err(f"domain error: {exc}")
        return EXIT_DOMAIN
    except NumericalError as exc:
        _err(f"numerical failure: {exc}")
        return EXIT_NUMERIC


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
