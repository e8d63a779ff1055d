"""Command-line front end: config parsing, dispatch, CSV/JSON emission.

Config files are flat ``key = value`` text with ``#`` comments. Command-line
``--set key=value`` overrides win over file values. Unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import decoy, security
from .photonics import ChannelSpec
from .pipeline import (
    MuSearchSpec,
    PointResult,
    ScanConfig,
    evaluate_point,
    max_attenuation,
    optimize_mu,
    scan,
)

__all__ = ["RunConfig", "ConfigError", "load_config", "run", "main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INTERNAL = 3

CSV_COLUMNS = (
    "attenuation_db",
    "distance_km",
    "beta_deg",
    "mu",
    "capacity_bit_per_pulse",
    "c_lower",
    "q_value",
    "q_bab",
    "e_bab",
    "q_ba_signal",
    "y1_min",
    "y1_max",
    "qn1_bae",
    "qn2_bae",
    "flags",
)


class ConfigError(ValueError):
    """A malformed, unknown, or out-of-range configuration entry."""


def _parse_float(key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: not a number: {raw!r}") from None


def _parse_int(key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: not an integer: {raw!r}") from None


def _parse_float_list(key, raw):
    parts = [p.strip() for p in str(raw).split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key}: empty list")
    return tuple(_parse_float(key, p) for p in parts)


@dataclass
class RunConfig:
    """Fully-resolved run parameters; defaults are the standard simulation set."""

    # channel
    alpha_db_per_km: float = 0.2
    eta_opt_ba: float = 0.21
    eta_opt_bab: float = 0.088
    eta_d: float = 0.7
    pd: float = 8e-8
    ed_a: float = 0.0131
    ed_b: float = 0.0026
    beta_deg: tuple = (0.0,)
    # grids
    attenuation_db: float = 10.0  # point mode
    atten_start_db: float = 0.0
    atten_stop_db: float = 12.0
    atten_step_db: float = 0.5
    atten_hi_db: float = 20.0  # cutoff bracket
    # intensities
    mu: tuple = ()  # fixed-mode signal intensities; empty means optimize
    decoy_ratio1: float = 0.05
    decoy_ratio2: float = 0.01
    mu_lo: float = 1e-3
    mu_hi: float = 0.5
    mu_coarse_points: int = 25
    mu_rel_tol: float = 1e-4
    # estimation
    n_cut: int = decoy.DEFAULT_N_CUT
    tight_z_bounds: bool = False
    y0_from_model: bool = False
    workers: int = 1

    def channel(self, beta_rad: float = 0.0) -> ChannelSpec:
        return ChannelSpec(
            attenuation_db=0.0,
            alpha_db_per_km=self.alpha_db_per_km,
            eta_opt_ba=self.eta_opt_ba,
            eta_opt_bab=self.eta_opt_bab,
            eta_d=self.eta_d,
            pd=self.pd,
            ed_a=self.ed_a,
            ed_b=self.ed_b,
            beta_rad=beta_rad,
        )

    def mu_search(self) -> MuSearchSpec:
        return MuSearchSpec(
            mu_lo=self.mu_lo,
            mu_hi=self.mu_hi,
            coarse_points=self.mu_coarse_points,
            rel_tol=self.mu_rel_tol,
        )

    def betas_rad(self) -> tuple:
        return tuple(math.radians(b) for b in self.beta_deg)

    def decoy_ratios(self) -> tuple:
        return (self.decoy_ratio1, self.decoy_ratio2)


_FLOAT_KEYS = {
    "alpha_db_per_km", "eta_opt_ba", "eta_opt_bab", "eta_d", "pd", "ed_a",
    "ed_b", "attenuation_db", "atten_start_db", "atten_stop_db",
    "atten_step_db", "atten_hi_db", "decoy_ratio1", "decoy_ratio2", "mu_lo",
    "mu_hi", "mu_rel_tol",
}
_INT_KEYS = {"mu_coarse_points", "n_cut", "workers"}
_BOOL_KEYS = {"tight_z_bounds", "y0_from_model"}
_LIST_KEYS = {"beta_deg", "mu"}


def _apply_entry(config: RunConfig, key: str, raw: str):
    if key in _FLOAT_KEYS:
        setattr(config, key, _parse_float(key, raw))
    elif key in _INT_KEYS:
        setattr(config, key, _parse_int(key, raw))
    elif key in _BOOL_KEYS:
        low = str(raw).strip().lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ConfigError(f"{key}: not a boolean: {raw!r}")
        setattr(config, key, low in ("true", "1", "yes"))
    elif key in _LIST_KEYS:
        setattr(config, key, _parse_float_list(key, raw))
    else:
        raise ConfigError(f"unknown configuration key: {key}")


def _validate(config: RunConfig):
    for key in ("eta_opt_ba", "eta_opt_bab", "eta_d", "pd", "ed_a", "ed_b"):
        value = getattr(config, key)
        if not 0.0 <= value <= 1.0:
            raise ConfigError(f"{key}: must be in [0, 1], got {value}")
    if config.alpha_db_per_km <= 0:
        raise ConfigError(f"alpha_db_per_km: must be > 0, got {config.alpha_db_per_km}")
    for key in ("attenuation_db", "atten_start_db", "atten_hi_db"):
        if getattr(config, key) < 0:
            raise ConfigError(f"{key}: must be >= 0, got {getattr(config, key)}")
    if config.atten_stop_db < config.atten_start_db:
        raise ConfigError("atten_stop_db: must be >= atten_start_db")
    if config.atten_step_db <= 0:
        raise ConfigError(f"atten_step_db: must be > 0, got {config.atten_step_db}")
    if not 0.0 < config.decoy_ratio2 < config.decoy_ratio1 < 1.0:
        raise ConfigError(
            f"decoy ratios: need 0 < decoy_ratio2 < decoy_ratio1 < 1, "
            f"got {config.decoy_ratio1}, {config.decoy_ratio2}"
        )
    if not 0.0 < config.mu_lo <= config.mu_hi:
        raise ConfigError(f"mu range: need 0 < mu_lo <= mu_hi, got [{config.mu_lo}, {config.mu_hi}]")
    if any(m <= 0 for m in config.mu):
        raise ConfigError(f"mu: intensities must be > 0, got {config.mu}")
    if config.mu_coarse_points < 1:
        raise ConfigError(f"mu_coarse_points: must be >= 1, got {config.mu_coarse_points}")
    if config.mu_rel_tol <= 0:
        raise ConfigError(f"mu_rel_tol: must be > 0, got {config.mu_rel_tol}")
    if config.n_cut < 2:
        raise ConfigError(f"n_cut: must be >= 2, got {config.n_cut}")
    if config.workers < 1:
        raise ConfigError(f"workers: must be >= 1, got {config.workers}")
    if not config.beta_deg:
        raise ConfigError("beta_deg: at least one angle required")


def load_config(path: str | None, overrides: list[str]) -> RunConfig:
    """Resolve a RunConfig from an optional file plus key=value overrides."""
    config = RunConfig()
    entries = []
    if path is not None:
        try:
            with open(path, encoding="utf-8") as handle:
                for lineno, line in enumerate(handle, start=1):
                    text = line.split("#", 1)[0].strip()
                    if not text:
                        continue
                    if "=" not in text:
                        raise ConfigError(f"{path}:{lineno}: expected key = value, got {text!r}")
                    key, _, raw = text.partition("=")
                    entries.append((key.strip(), raw.strip()))
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        entries.append((key.strip(), raw.strip()))
    for key, raw in entries:
        _apply_entry(config, key, raw)
    _validate(config)
    return config


def _format_number(value: float) -> str:
    return f"{value:.8e}"


def _point_row(point: PointResult) -> list[str]:
    return [
        _format_number(point.attenuation_db),
        _format_number(point.distance_km),
        _format_number(point.beta_deg),
        _format_number(point.mu),
        _format_number(max(point.capacity, 0.0)),
        _format_number(point.c_lower),
        _format_number(point.q_value),
        _format_number(point.q_bab),
        _format_number(point.e_bab),
        _format_number(point.q_ba_signal),
        _format_number(point.y1_min),
        _format_number(point.y1_max),
        _format_number(point.qn1_bae),
        _format_number(point.qn2_bae),
        ";".join(point.flags),
    ]


def write_csv(points: list[PointResult], path: str):
    """Stable CSV: fixed column order, scientific 9-significant-digit floats, LF."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(",".join(CSV_COLUMNS) + "\n")
        for point in points:
            handle.write(",".join(_point_row(point)) + "\n")


def _point_dict(point: PointResult) -> dict:
    return {
        "attenuation_db": point.attenuation_db,
        "distance_km": point.distance_km,
        "beta_deg": point.beta_deg,
        "mu": point.mu,
        "capacity_bit_per_pulse": max(point.capacity, 0.0),
        "capacity_raw": point.capacity,
        "c_lower": point.c_lower,
        "q_value": point.q_value,
        "q_bab": point.q_bab,
        "e_bab": point.e_bab,
        "q_ba_signal": point.q_ba_signal,
        "y1_min": point.y1_min,
        "y1_max": point.y1_max,
        "qn1_bae": point.qn1_bae,
        "qn2_bae": point.qn2_bae,
        "flags": list(point.flags),
    }


def write_summary(payload: dict, path: str):
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


class _Reporter:
    def __init__(self, quiet: bool, verbose: bool):
        self.quiet = quiet
        self.verbose = verbose

    def info(self, message: str):
        if not self.quiet:
            print(message)

    def debug(self, message: str):
        if self.verbose and not self.quiet:
            print(message)


def _echo_config(config: RunConfig, reporter: _Reporter):
    reporter.debug("resolved configuration:")
    for f in fields(config):
        reporter.debug(f"  {f.name} = {getattr(config, f.name)}")


def _warn_flags(points: list[PointResult], reporter: _Reporter):
    flagged = sum(1 for p in points if p.flags)
    if flagged:
        reporter.info(f"warning: {flagged} of {len(points)} points carry diagnostic flags")


def _cmd_scan(config: RunConfig, args, reporter: _Reporter) -> int:
    mode = "fixed" if args.mode == "fixed" else "optimized"
    fixed_mus = config.mu
    if mode == "fixed" and not fixed_mus:
        raise ConfigError("scan --mode fixed requires at least one mu value")
    scan_config = ScanConfig(
        channel=config.channel(),
        atten_start_db=config.atten_start_db,
        atten_stop_db=config.atten_stop_db,
        atten_step_db=config.atten_step_db,
        betas_rad=config.betas_rad(),
        decoy_ratios=config.decoy_ratios(),
        mu_search=config.mu_search(),
        fixed_mus=fixed_mus,
        n_cut=config.n_cut,
        mode=mode,
        workers=config.workers,
    )
    points = scan(scan_config)
    reporter.info(f"scan ({mode} intensity): {len(points)} grid points")
    if args.out:
        write_csv(points, args.out)
        reporter.info(f"wrote {args.out}")
    if args.summary:
        write_summary({"mode": f"scan-{mode}", "points": [_point_dict(p) for p in points]}, args.summary)
        reporter.info(f"wrote {args.summary}")
    _warn_flags(points, reporter)
    return EXIT_OK


def _cmd_point(config: RunConfig, args, reporter: _Reporter) -> int:
    beta = config.betas_rad()[0]
    if config.mu:
        mu = config.mu[0]
        point = evaluate_point(
            config.channel(), config.attenuation_db, beta, mu,
            config.n_cut, config.decoy_ratios(),
            y0_from_model=config.y0_from_model,
            tight_z_bounds=config.tight_z_bounds,
        )
    else:
        mu, point = optimize_mu(
            config.channel(), config.attenuation_db, beta,
            config.mu_search(), config.n_cut, config.decoy_ratios(),
        )
    reporter.info(
        f"A = {point.attenuation_db:g} dB, beta = {point.beta_deg:g} deg, mu = {mu:.6g}: "
        f"capacity = {point.capacity:.6e} bit/pulse"
    )
    if args.out:
        write_csv([point], args.out)
        reporter.info(f"wrote {args.out}")
    if args.summary:
        write_summary({"mode": "point", "points": [_point_dict(point)]}, args.summary)
        reporter.info(f"wrote {args.summary}")
    _warn_flags([point], reporter)
    return EXIT_OK


def _cmd_cutoff(config: RunConfig, args, reporter: _Reporter) -> int:
    beta = config.betas_rad()[0]
    a_max, point = max_attenuation(
        config.channel(), beta, config.mu_search(), config.n_cut,
        config.decoy_ratios(), atten_hi_db=config.atten_hi_db,
    )
    if a_max is None:
        reporter.info("always insecure: no attenuation yields positive capacity")
        if args.summary:
            write_summary({"mode": "cutoff", "always_insecure": True}, args.summary)
        return EXIT_OK
    l_max = a_max / (2.0 * config.alpha_db_per_km)
    reporter.info(f"A_max = {a_max:.2f} dB, L_max = {l_max:.3f} km")
    if args.out:
        write_csv([point], args.out)
        reporter.info(f"wrote {args.out}")
    if args.summary:
        write_summary(
            {
                "mode": "cutoff",
                "always_insecure": False,
                "a_max_db": a_max,
                "l_max_km": l_max,
                "points": [_point_dict(point)],
            },
            args.summary,
        )
        reporter.info(f"wrote {args.summary}")
    return EXIT_OK


def _vertex_optimum(objective, a_ub, b_ub, bounds, sense):
    """Brute-force reference optimum of a small boxed LP by vertex enumeration."""
    from itertools import combinations

    n = len(objective)
    mats, vals = [], []
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        mats.extend([e, e])
        vals.extend([bounds[i][0], bounds[i][1]])
    for row, b in zip(a_ub, b_ub):
        mats.append(np.asarray(row, dtype=float))
        vals.append(b)
    best = None
    for idx in combinations(range(len(mats)), n):
        a = np.array([mats[i] for i in idx])
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        x = np.linalg.solve(a, np.array([vals[i] for i in idx]))
        ok = all(bounds[i][0] - 1e-9 <= x[i] <= bounds[i][1] + 1e-9 for i in range(n))
        ok = ok and all(np.dot(row, x) <= b + 1e-9 for row, b in zip(a_ub, b_ub))
        if not ok:
            continue
        value = float(np.dot(objective, x))
        if best is None or (value < best if sense == "minimize" else value > best):
            best = value
    return best


def _selftest_gain_sum(rng) -> bool:
    from .photonics import detector_yield, gain_component, poisson_pn

    worst = 0.0
    for _ in range(50):
        intensity = rng.uniform(0.001, 0.5)
        eta_chan = rng.uniform(0.001, 1.0)
        eta_d = rng.uniform(0.1, 1.0)
        pd = rng.uniform(0.0, 1e-3)
        fy_sq = rng.uniform(0.0, 1.0)
        direct = gain_component(intensity, eta_chan, eta_d, pd, fy_sq)
        mean = intensity * eta_chan
        summed = sum(
            poisson_pn(mean, k) * detector_yield(k, fy_sq, eta_d, pd) for k in range(81)
        )
        worst = max(worst, abs(direct - summed))
    return worst <= 1e-10


def _selftest_holevo(rng) -> bool:
    worst = 0.0
    for _ in range(100):
        l1 = rng.uniform(0.0, 1.0)
        l3 = rng.uniform(0.0, (1.0 - l1) / 2.0)
        l2 = 1.0 - l1 - 2.0 * l3
        if l2 < 0:
            continue
        attack = security.BellDiagonalAttack(
            lambdas=(l1, l2, l3, l3),
            chi=rng.uniform(0, 2 * math.pi),
            chi_prime=rng.uniform(0, 2 * math.pi),
        )
        gap = abs(security.holevo_oracle(attack) - security.eve_info_bound(attack.c_value))
        worst = max(worst, gap)
    return worst <= 1e-8


def _selftest_lp(rng) -> bool:
    for _ in range(20):
        n = 4
        objective = rng.uniform(-1, 1, size=n)
        a_ub = rng.uniform(-1, 1, size=(3, n))
        b_ub = rng.uniform(0.5, 2.0, size=3)
        bounds = [(0.0, 1.0)] * n
        lp = decoy.LinearProgram(
            sense="minimize",
            objective=objective,
            constraints=[(a_ub[i], "<=", b_ub[i]) for i in range(3)],
            variable_bounds=bounds,
        )
        try:
            value, _ = decoy.solve_lp(lp)
        except decoy.InfeasibleError:
            continue
        reference = _vertex_optimum(objective, a_ub, b_ub, bounds, "minimize")
        if reference is None or abs(value - reference) > 1e-9:
            return False
    return True


def _cmd_selftest(config: RunConfig, args, reporter: _Reporter) -> int:
    rng = np.random.default_rng(20240811)
    groups = (
        ("gain-sum consistency", _selftest_gain_sum),
        ("closed-form information bound regime", _selftest_holevo),
        ("LP vertex oracle", _selftest_lp),
    )
    all_ok = True
    for name, check in groups:
        ok = check(rng)
        all_ok = all_ok and ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all_ok else EXIT_INTERNAL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key=value config file")
    common.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override one config entry (repeatable)",
    )
    common.add_argument("--out", help="CSV output path")
    common.add_argument("--summary", help="JSON summary output path")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")
    common.add_argument("--verbose", action="store_true", help="echo the resolved configuration")
    parser = argparse.ArgumentParser(
        prog="rfiqsdc",
        description="Secrecy message capacity simulator for frame-independent "
        "quantum secure direct communication over weak-coherent-pulse channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    scan_parser = sub.add_parser("scan", parents=[common], help="capacity over an attenuation grid")
    scan_parser.add_argument(
        "--mode", choices=("fixed", "optimized"), default="optimized",
        help="fixed signal intensities (mu list) or per-point optimization",
    )
    sub.add_parser("point", parents=[common], help="capacity at a single attenuation")
    sub.add_parser("cutoff", parents=[common], help="largest attenuation with positive capacity")
    sub.add_parser("selftest", parents=[common], help="run the built-in numerical cross-checks")
    return parser


_COMMANDS = {
    "scan": _cmd_scan,
    "point": _cmd_point,
    "cutoff": _cmd_cutoff,
    "selftest": _cmd_selftest,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    reporter = _Reporter(quiet=args.quiet, verbose=args.verbose)
    try:
        config = load_config(args.config, args.set)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _echo_config(config, reporter)
    if not hasattr(args, "mode"):
        args.mode = None
    try:
        return _COMMANDS[args.command](config, args, reporter)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
