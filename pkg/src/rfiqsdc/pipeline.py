"""End-to-end capacity evaluation, intensity optimization and attenuation scans."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import decoy, photonics, security
from .photonics import ChannelSpec, NoClicksError

__all__ = [
    "MuSearchSpec",
    "ScanConfig",
    "PointResult",
    "evaluate_point",
    "optimize_mu",
    "scan",
    "max_attenuation",
]

DEFAULT_DECOY_RATIOS = (0.05, 0.01)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MuSearchSpec:
    """Signal-intensity search: coarse log grid, then golden-section refinement."""

    mu_lo: float = 1e-3
    mu_hi: float = 0.5
    coarse_points: int = 25
    rel_tol: float = 1e-4

    def __post_init__(self):
        if not 0.0 < self.mu_lo <= self.mu_hi:
            raise ValueError(f"need 0 < mu_lo <= mu_hi, got [{self.mu_lo}, {self.mu_hi}]")
        if self.coarse_points < 1:
            raise ValueError("coarse_points must be >= 1")


@dataclass(frozen=True)
class ScanConfig:
    """An attenuation/misalignment grid plus everything needed to evaluate it."""

    channel: ChannelSpec = ChannelSpec()
    atten_start_db: float = 0.0
    atten_stop_db: float = 12.0
    atten_step_db: float = 0.5
    betas_rad: tuple = (0.0,)
    decoy_ratios: tuple = DEFAULT_DECOY_RATIOS
    mu_search: MuSearchSpec = MuSearchSpec()
    fixed_mus: tuple = ()  # used by fixed-intensity scans
    n_cut: int = decoy.DEFAULT_N_CUT
    mode: str = "optimized"  # "optimized" | "fixed"
    workers: int = 1

    def __post_init__(self):
        r1, r2 = self.decoy_ratios
        if not (0.0 < r2 < r1 < 1.0):
            raise ValueError(f"decoy ratios must satisfy 0 < r2 < r1 < 1, got {self.decoy_ratios}")
        if self.atten_step_db <= 0:
            raise ValueError("atten_step_db must be > 0")
        if self.mode not in ("optimized", "fixed"):
            raise ValueError(f"bad scan mode {self.mode!r}")
        if self.mode == "fixed" and not self.fixed_mus:
            raise ValueError("fixed-intensity scan requires fixed_mus")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def attenuation_grid(self):
        n = int(math.floor((self.atten_stop_db - self.atten_start_db) / self.atten_step_db + 1e-9)) + 1
        return [self.atten_start_db + i * self.atten_step_db for i in range(max(n, 0))]


@dataclass
class PointResult:
    """Full record of one capacity evaluation."""

    attenuation_db: float
    distance_km: float
    beta_rad: float
    mu: float
    capacity: float
    c_lower: float
    q_value: float
    q_bab: float
    e_bab: float
    q_ba_signal: float
    y1_min: float
    y1_max: float
    qn1_bae: float
    qn2_bae: float
    flags: list = field(default_factory=list)

    @property
    def beta_deg(self) -> float:
        return math.degrees(self.beta_rad)


def _failed_point(spec: ChannelSpec, mu: float, flag: str) -> PointResult:
    return PointResult(
        attenuation_db=spec.attenuation_db,
        distance_km=photonics.distance_from_attenuation(spec),
        beta_rad=spec.beta_rad,
        mu=mu,
        capacity=0.0,
        c_lower=0.0,
        q_value=1.0,
        q_bab=0.0,
        e_bab=0.0,
        q_ba_signal=0.0,
        y1_min=0.0,
        y1_max=1.0,
        qn1_bae=0.0,
        qn2_bae=0.0,
        flags=[flag],
    )


def evaluate_point(
    channel: ChannelSpec,
    attenuation_db: float,
    beta_rad: float,
    mu: float,
    n_cut: int = decoy.DEFAULT_N_CUT,
    decoy_ratios: tuple = DEFAULT_DECOY_RATIOS,
    y0_from_model: bool = False,
    tight_z_bounds: bool = False,
) -> PointResult:
    """Evaluate the secrecy message capacity at one (attenuation, beta, mu) point.

    Failures of individual stages (no clicks, LP infeasibility) are reported as
    flagged zero-capacity results rather than exceptions.
    """
    spec = replace(channel, attenuation_db=attenuation_db, beta_rad=beta_rad)
    intensities = {
        "signal": mu,
        "decoy1": decoy_ratios[0] * mu,
        "decoy2": decoy_ratios[1] * mu,
    }
    flags = []
    try:
        table = photonics.ba_observed(spec, intensities)
        bounds = decoy.estimate_bounds(table, intensities, n_cut, tight_z_bounds=tight_z_bounds)
        q_bab, e_bab = photonics.bab_stats(spec, mu)
    except NoClicksError as exc:
        return _failed_point(spec, mu, f"no_clicks: {exc}")
    except decoy.InfeasibleError as exc:
        return _failed_point(spec, mu, f"lp_infeasible: {exc}")

    if y0_from_model:
        y0 = 2.0 * spec.pd * (1.0 - spec.pd) - spec.pd**2
        y0 = max(y0, 0.0)
    else:
        y0 = bounds.y0[0]
    y1_min, y1_max = bounds.y1["ZZ"]
    if y1_max >= 1.0 - 1e-12 and y1_min <= 1e-12:
        flags.append("vacuous_y1")
    gains = security.eve_gains(mu, max(y1_min, y0), y0, table.q_ba_signal)
    if gains.clamped:
        flags.append("qn2_clamped")
    c_lower = bounds.c_lower
    if c_lower > 2.0:
        flags.append("c_lower_clamped")
        c_lower = 2.0
    capacity = security.secrecy_capacity(
        security.CapacityInputs(
            q_bab=q_bab,
            e_bab=e_bab,
            q_n1_bae=gains.q_n1,
            q_n2_bae=gains.q_n2,
            c_lower=c_lower,
        )
    )
    return PointResult(
        attenuation_db=attenuation_db,
        distance_km=photonics.distance_from_attenuation(spec),
        beta_rad=beta_rad,
        mu=mu,
        capacity=capacity,
        c_lower=c_lower,
        q_value=bounds.e1["ZZ"][1],
        q_bab=q_bab,
        e_bab=e_bab,
        q_ba_signal=table.q_ba_signal,
        y1_min=y1_min,
        y1_max=y1_max,
        qn1_bae=gains.q_n1,
        qn2_bae=gains.q_n2,
        flags=flags,
    )


def optimize_mu(
    channel: ChannelSpec,
    attenuation_db: float,
    beta_rad: float,
    search: MuSearchSpec = MuSearchSpec(),
    n_cut: int = decoy.DEFAULT_N_CUT,
    decoy_ratios: tuple = DEFAULT_DECOY_RATIOS,
) -> tuple[float, PointResult]:
    """Best signal intensity at one grid point.

    Coarse logarithmic grid, then golden-section refinement on the bracketing
    interval; ties break toward smaller mu.
    """

    def cap(mu):
        return evaluate_point(channel, attenuation_db, beta_rad, mu, n_cut, decoy_ratios)

    if search.mu_lo == search.mu_hi or search.coarse_points == 1:
        best = cap(search.mu_lo)
        return search.mu_lo, best

    grid = np.geomspace(search.mu_lo, search.mu_hi, search.coarse_points)
    results = [cap(mu) for mu in grid]
    caps = [r.capacity for r in results]
    i_best = int(np.argmax(caps))  # argmax returns the first (smallest-mu) maximum

    # bracket around the coarse winner, then golden-section on log(mu)
    lo = grid[max(i_best - 1, 0)]
    hi = grid[min(i_best + 1, len(grid) - 1)]
    a, b = math.log(lo), math.log(hi)
    best_mu, best = grid[i_best], results[i_best]
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    rc, rd = cap(math.exp(c)), cap(math.exp(d))
    while (b - a) > search.rel_tol:
        if rc.capacity >= rd.capacity:
            b, d, rd = d, c, rc
            c = b - _INV_PHI * (b - a)
            rc = cap(math.exp(c))
        else:
            a, c, rc = c, d, rd
            d = a + _INV_PHI * (b - a)
            rd = cap(math.exp(d))
    for mu, r in ((math.exp(c), rc), (math.exp(d), rd)):
        if r.capacity > best.capacity or (r.capacity == best.capacity and mu < best_mu):
            best_mu, best = mu, r
    if best.capacity <= 0.0:
        best.flags.append("no_positive_capacity")
    return best_mu, best


def scan(config: ScanConfig) -> list[PointResult]:
    """Evaluate every grid point; never aborts on a single point's failure.

    Grid points are independent; with ``workers > 1`` they are evaluated
    concurrently, and results are always ordered by grid index.
    """
    tasks = []
    for attenuation in config.attenuation_grid():
        for beta in config.betas_rad:
            if config.mode == "fixed":
                for mu in config.fixed_mus:
                    tasks.append((attenuation, beta, mu))
            else:
                tasks.append((attenuation, beta, None))

    def run_one(task):
        attenuation, beta, mu = task
        if mu is None:
            _, result = optimize_mu(
                config.channel, attenuation, beta, config.mu_search, config.n_cut, config.decoy_ratios
            )
        else:
            result = evaluate_point(
                config.channel, attenuation, beta, mu, config.n_cut, config.decoy_ratios
            )
        return result

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(run_one, tasks))
    return [run_one(t) for t in tasks]


def max_attenuation(
    channel: ChannelSpec,
    beta_rad: float,
    search: MuSearchSpec = MuSearchSpec(),
    n_cut: int = decoy.DEFAULT_N_CUT,
    decoy_ratios: tuple = DEFAULT_DECOY_RATIOS,
    atten_hi_db: float = 20.0,
    width_db: float = 0.01,
) -> tuple[float | None, PointResult | None]:
    """Largest attenuation with positive optimized capacity, by bisection.

    Returns (None, None) when no attenuation in [0, atten_hi_db] yields a
    positive capacity.
    """

    def best(attenuation):
        return optimize_mu(channel, attenuation, beta_rad, search, n_cut, decoy_ratios)[1]

    lo_result = best(0.0)
    if lo_result.capacity <= 0.0:
        return None, None
    lo, hi = 0.0, atten_hi_db
    lo_point = lo_result
    if best(hi).capacity > 0.0:
        return hi, best(hi)
    while hi - lo > width_db:
        mid = (lo + hi) / 2.0
        result = best(mid)
        if result.capacity > 0.0:
            lo, lo_point = mid, result
        else:
            hi = mid
    return lo, lo_point
