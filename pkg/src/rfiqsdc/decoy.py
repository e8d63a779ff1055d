"""Decoy-state estimation: LP bounds on single-photon yields and error rates.

The observed multi-intensity gains constrain the per-photon-number yields
through two-sided Poisson-weighted inequalities; small dense linear programs
extremize the single-photon quantities, and the resulting intervals compose
into a conservative lower bound on the correlation invariant C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .photonics import INTENSITY_LABELS, PAIR_LABELS, LegStatsTable, poisson_pn

__all__ = [
    "LinearProgram",
    "BoundsSet",
    "InfeasibleError",
    "build_yield_lp",
    "build_error_lp",
    "solve_lp",
    "estimate_bounds",
    "c_lower_bound",
]

DEFAULT_N_CUT = 10


class InfeasibleError(RuntimeError):
    """The observations admit no photon-number yield decomposition."""


@dataclass
class LinearProgram:
    """A small dense LP: extremize ``objective . x`` under inequality rows and boxes.

    ``constraints`` is a list of (coefficients, relation, bound) with relation
    one of "<=" and ">=".
    """

    sense: str  # "minimize" | "maximize"
    objective: np.ndarray
    constraints: list = field(default_factory=list)
    variable_bounds: list = field(default_factory=list)

    def __post_init__(self):
        if self.sense not in ("minimize", "maximize"):
            raise ValueError(f"bad sense {self.sense!r}")
        n = len(self.objective)
        for coeffs, rel, _ in self.constraints:
            if len(coeffs) != n:
                raise ValueError("constraint dimension mismatch")
            if rel not in ("<=", ">="):
                raise ValueError(f"bad relation {rel!r}")
        if len(self.variable_bounds) != n:
            raise ValueError("variable bound dimension mismatch")


def _two_sided_rows(observations, n_cut, values):
    """Two-sided decoy constraints: the Poisson-weighted sum of the variables
    must bracket each observed value up to the truncated tail mass."""
    rows = []
    for (intensity, _), observed in zip(observations, values):
        p = np.array([poisson_pn(intensity, n) for n in range(n_cut + 1)])
        tail = 1.0 - p.sum()
        rows.append((p, "<=", observed))
        rows.append((p, ">=", observed - tail))
    return rows


def build_yield_lp(observations, n_cut: int, target_n: int, sense: str) -> LinearProgram:
    """LP bounding the ``target_n``-photon yield from (intensity, gain) pairs."""
    if len({i for i, _ in observations}) < 2:
        raise ValueError("at least two distinct intensities required")
    if n_cut < 2:
        raise ValueError(f"n_cut must be >= 2, got {n_cut}")
    if not 0 <= target_n <= n_cut:
        raise ValueError(f"target_n must be in [0, {n_cut}], got {target_n}")
    objective = np.zeros(n_cut + 1)
    objective[target_n] = 1.0
    rows = _two_sided_rows(observations, n_cut, [q for _, q in observations])
    bounds = [(0.0, 1.0)] * (n_cut + 1)
    return LinearProgram(sense=sense, objective=objective, constraints=rows, variable_bounds=bounds)


def build_error_lp(observations, n_cut: int, sense: str) -> LinearProgram:
    """LP bounding the single-photon error-weighted yield z1 = e1*Y1.

    ``observations`` holds (intensity, Q*E) pairs; the variables are the
    error-weighted yields z_n, each boxed to [0, 1].
    """
    if len({i for i, _ in observations}) < 2:
        raise ValueError("at least two distinct intensities required")
    if n_cut < 2:
        raise ValueError(f"n_cut must be >= 2, got {n_cut}")
    objective = np.zeros(n_cut + 1)
    objective[1] = 1.0
    rows = _two_sided_rows(observations, n_cut, [qe for _, qe in observations])
    bounds = [(0.0, 1.0)] * (n_cut + 1)
    return LinearProgram(sense=sense, objective=objective, constraints=rows, variable_bounds=bounds)


def solve_lp(lp: LinearProgram) -> tuple[float, np.ndarray]:
    """Solve a boxed LP to high accuracy; deterministic for identical input.

    Rows are normalized to unit infinity-norm first, since the Poisson weights
    span many orders of magnitude.
    """
    sign = 1.0 if lp.sense == "minimize" else -1.0
    a_ub, b_ub = [], []
    for coeffs, rel, bound in lp.constraints:
        coeffs = np.asarray(coeffs, dtype=float)
        scale = np.max(np.abs(coeffs))
        if scale == 0.0:
            scale = 1.0
        if rel == "<=":
            a_ub.append(coeffs / scale)
            b_ub.append(bound / scale)
        else:
            a_ub.append(-coeffs / scale)
            b_ub.append(-bound / scale)
    # presolve rejects the nearly-degenerate two-sided rows that arise when the
    # truncated Poisson tail underflows; the bare solver handles them fine
    res = linprog(
        sign * lp.objective,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        bounds=lp.variable_bounds,
        method="highs",
        options={"presolve": False},
    )
    if res.status == 2:
        raise InfeasibleError("inconsistent observations: no feasible yield decomposition")
    if res.status != 0:
        raise RuntimeError(f"LP solver failure (status {res.status}): {res.message}")
    return sign * res.fun, res.x


@dataclass
class BoundsSet:
    """Decoy-derived intervals and the composed C lower bound.

    ``y1`` and ``e1`` map pair labels to (lo, hi) intervals; ``y0`` is the
    Z-basis vacuum-yield interval.
    """

    y1: dict
    y0: tuple
    e1: dict
    c_lower: float


def _interval(lp_min_val, lp_max_val):
    lo = max(0.0, lp_min_val)
    hi = max(lo, lp_max_val)
    return (lo, hi)


def _coupled_error_lp(q_obs, qe_obs, n_cut, sense):
    """Joint program with variables (Y_0..Y_ncut, z_0..z_ncut) and z_n <= Y_n."""
    n_var = n_cut + 1
    objective = np.zeros(2 * n_var)
    objective[n_var + 1] = 1.0
    rows = []
    for (coeffs, rel, bound) in _two_sided_rows(q_obs, n_cut, [q for _, q in q_obs]):
        rows.append((np.concatenate([coeffs, np.zeros(n_var)]), rel, bound))
    for (coeffs, rel, bound) in _two_sided_rows(qe_obs, n_cut, [qe for _, qe in qe_obs]):
        rows.append((np.concatenate([np.zeros(n_var), coeffs]), rel, bound))
    for n in range(n_var):
        coupling = np.zeros(2 * n_var)
        coupling[n_var + n] = 1.0
        coupling[n] = -1.0
        rows.append((coupling, "<=", 0.0))
    bounds = [(0.0, 1.0)] * (2 * n_var)
    return LinearProgram(sense=sense, objective=objective, constraints=rows, variable_bounds=bounds)


def _e1_interval(z1_lo, z1_hi, y1_lo, y1_hi):
    """Conservative decoupled ratio: e1 in [z1_lo / y1_hi, z1_hi / y1_lo]."""
    if y1_hi <= 0.0:
        return (0.0, 1.0)  # vacuous: no single-photon information
    lo = min(1.0, z1_lo / y1_hi)
    hi = 1.0 if y1_lo <= 0.0 else min(1.0, z1_hi / y1_lo)
    return (lo, max(lo, hi))


def c_lower_bound(e1_intervals) -> float:
    """Lower-bound the correlation sum C from four error-rate intervals.

    Each squared correlator (1-2e)^2 is minimized over its interval; an
    interval straddling 1/2 contributes nothing.
    """
    total = 0.0
    for lo, hi in e1_intervals:
        if lo <= 0.5 <= hi:
            continue
        total += min((1.0 - 2.0 * lo) ** 2, (1.0 - 2.0 * hi) ** 2)
    return total


def estimate_bounds(
    table: LegStatsTable,
    intensities: dict[str, float],
    n_cut: int = DEFAULT_N_CUT,
    tight_z_bounds: bool = False,
) -> BoundsSet:
    """Single-photon yield/error intervals for every retained pair, plus the C bound.

    ``tight_z_bounds`` switches the error program to the coupled form with
    z_n <= Y_n instead of the plain z_n <= 1 box.
    """
    y1, e1 = {}, {}
    y0 = (0.0, 1.0)
    for pair_label in PAIR_LABELS:
        q_obs = [(intensities[k], table.entries[(k, pair_label)][0]) for k in INTENSITY_LABELS]
        qe_obs = [
            (intensities[k], table.entries[(k, pair_label)][0] * table.entries[(k, pair_label)][1])
            for k in INTENSITY_LABELS
        ]
        y1_lo, _ = solve_lp(build_yield_lp(q_obs, n_cut, 1, "minimize"))
        y1_hi, _ = solve_lp(build_yield_lp(q_obs, n_cut, 1, "maximize"))
        y1[pair_label] = _interval(y1_lo, y1_hi)
        if tight_z_bounds:
            z1_lo, _ = solve_lp(_coupled_error_lp(q_obs, qe_obs, n_cut, "minimize"))
            z1_hi, _ = solve_lp(_coupled_error_lp(q_obs, qe_obs, n_cut, "maximize"))
        else:
            z1_lo, _ = solve_lp(build_error_lp(qe_obs, n_cut, "minimize"))
            z1_hi, _ = solve_lp(build_error_lp(qe_obs, n_cut, "maximize"))
        z1_lo, z1_hi = _interval(z1_lo, z1_hi)
        e1[pair_label] = _e1_interval(z1_lo, z1_hi, *y1[pair_label])
        if pair_label == "ZZ":
            y0_lo, _ = solve_lp(build_yield_lp(q_obs, n_cut, 0, "minimize"))
            y0_hi, _ = solve_lp(build_yield_lp(q_obs, n_cut, 0, "maximize"))
            y0 = _interval(y0_lo, y0_hi)
    c_lower = c_lower_bound([e1[p] for p in ("XX", "XY", "YX", "YY")])
    return BoundsSet(y1=y1, y0=y0, e1=e1, c_lower=c_lower)
