"""Seeded Monte Carlo oracle for the SOP, ASR and SINR CDF.

Random streams
--------------
Trials are split into fixed-size blocks. Block ``b`` draws from
``numpy.random.Generator(PCG64(SeedSequence(seed, spawn_key=(b,))))``, so any
block can be regenerated on its own and the result does not depend on how
blocks are scheduled. Per block, the draw order is: source-hop SNRs of every
UAV, destination-hop SNRs of every UAV, then (random selection only) the
selected UAV index per trial.

Integer-shape Gamma variates are sums of ``shape`` standard exponentials
times the scale. In ``per_antenna`` mode each destination antenna power is
instead built from ``m`` complex Gaussian components (half the sum of 2m
squared standard normals), then summed over the antennas.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Sequence, Union

import numpy as np

from .channel import LinkBudget, Scenario, link_budgets
from .secrecy import LinkRealization, optimal_sinrs_array

DEFAULT_BLOCK_SIZE = 1 << 16
Z95 = 1.959963984540054

Selection = Union[Literal["best", "random"], int]
PowerPolicy = Union[Literal["optimal"], float]


@dataclass(frozen=True)
class SimConfig:
    samples: int = 1_000_000
    seed: int = 42
    selection: Selection = "best"
    power_policy: PowerPolicy = "optimal"
    antenna_sampling: Literal["aggregate", "per_antenna"] = "aggregate"
    block_size: int = DEFAULT_BLOCK_SIZE
    workers: int = 1

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise ValueError("samples must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        sel = self.selection
        if not (sel in ("best", "random") or (isinstance(sel, int) and sel >= 0)):
            raise ValueError(f"selection must be 'best', 'random' or a UAV index, got {sel!r}")
        pol = self.power_policy
        if pol != "optimal":
            if isinstance(pol, str) or not 0.0 <= float(pol) <= 1.0:
                raise ValueError(f"power_policy must be 'optimal' or a split in [0, 1], got {pol!r}")
        if self.antenna_sampling not in ("aggregate", "per_antenna"):
            raise ValueError("antenna_sampling must be 'aggregate' or 'per_antenna'")
        if self.block_size < 1 or self.workers < 1:
            raise ValueError("block_size and workers must be >= 1")

    @property
    def num_blocks(self) -> int:
        return -(-self.samples // self.block_size)

    def block_length(self, b: int) -> int:
        return min(self.block_size, self.samples - b * self.block_size)


@dataclass(frozen=True)
class EstimateWithCI:
    mean: float
    std_error: float
    samples: int
    ci95_low: float
    ci95_high: float

    def within(self, value: float, n_se: float = 3.0) -> bool:
        return abs(self.mean - value) <= n_se * self.std_error


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _erlang(rng: np.random.Generator, shape: int, scale, size) -> np.ndarray:
    return rng.standard_exponential((shape,) + tuple(size)).sum(axis=0) * scale


def _nakagami_power(rng: np.random.Generator, m: int, size) -> np.ndarray:
    g = rng.standard_normal((2 * m,) + tuple(size))
    return 0.5 * np.einsum("i...,i...->...", g, g)


def _draw_links(rng, gs: np.ndarray, gd: np.ndarray, m: int, n: int, size: int,
                antenna_sampling: str) -> tuple[np.ndarray, np.ndarray]:
    """SNR draws of shape (R, size) for per-UAV scales ``gs``, ``gd``."""
    r = gs.size
    gamma_s = _erlang(rng, m, gs[:, None], (r, size))
    if antenna_sampling == "per_antenna":
        gamma_d = _nakagami_power(rng, m, (n, r, size)).sum(axis=0) * gd[:, None]
    else:
        gamma_d = _erlang(rng, n * m, gd[:, None], (r, size))
    return gamma_s, gamma_d


def sample_link(budget: LinkBudget, m: int, n: int, rng: np.random.Generator,
                size: int | None = None,
                antenna_sampling: str = "aggregate") -> LinkRealization:
    """Draw (Gamma_S, Gamma_D) ~ (Gamma(m, gbar_s), Gamma(n m, gbar_d))."""
    k = 1 if size is None else int(size)
    gs, gd = _draw_links(rng, np.array([budget.gbar_s]), np.array([budget.gbar_d]),
                         m, n, k, antenna_sampling)
    if size is None:
        return LinkRealization(float(gs[0, 0]), float(gd[0, 0]))
    return LinkRealization(gs[0], gd[0])


def _link_rates(gamma_s: np.ndarray, gamma_d: np.ndarray, policy: PowerPolicy) -> np.ndarray:
    if policy == "optimal":
        s_uav, s_dest = optimal_sinrs_array(gamma_s, gamma_d)
    else:
        a = float(policy)
        s_uav = a * gamma_s / ((1.0 - a) * gamma_s + 1.0)
        s_dest = a * gamma_s * gamma_d / (gamma_s + gamma_d + 1.0)
    return np.maximum(np.log1p(s_dest) - np.log1p(s_uav), 0.0)


@dataclass(frozen=True)
class BlockSums:
    """Sufficient statistics of a run of blocks."""

    n: int
    outages: int
    rate_sum: float
    rate_sq_sum: float

    def __add__(self, other: "BlockSums") -> "BlockSums":
        return BlockSums(self.n + other.n, self.outages + other.outages,
                         self.rate_sum + other.rate_sum, self.rate_sq_sum + other.rate_sq_sum)


def _run_block(gs, gd, m, n, cfg: SimConfig, b: int) -> BlockSums:
    rng = block_rng(cfg.seed, b)
    size = cfg.block_length(b)
    gamma_s, gamma_d = _draw_links(rng, gs, gd, m, n, size, cfg.antenna_sampling)
    rates = _link_rates(gamma_s, gamma_d, cfg.power_policy)
    if cfg.selection == "best":
        chosen = rates.max(axis=0)
    elif cfg.selection == "random":
        idx = rng.integers(0, gs.size, size)
        chosen = rates[idx, np.arange(size)]
    else:
        chosen = rates[cfg.selection]
    return BlockSums(size, int(np.count_nonzero(chosen <= 0.0)),
                     float(chosen.sum()), float(np.dot(chosen, chosen)))


def simulate_blocks(budgets: Sequence[LinkBudget], m: int, n: int, cfg: SimConfig,
                    start: int = 0, stop: int | None = None) -> BlockSums:
    """Run blocks ``start..stop-1`` (clipped to the run) and reduce them in block order."""
    stop = cfg.num_blocks if stop is None else min(stop, cfg.num_blocks)
    if start < 0:
        raise ValueError("start must be >= 0")
    if isinstance(cfg.selection, int) and cfg.selection >= len(budgets):
        raise IndexError(f"selected UAV {cfg.selection} out of range for {len(budgets)} UAVs")
    gs = np.array([b.gbar_s for b in budgets], dtype=float)
    gd = np.array([b.gbar_d for b in budgets], dtype=float)
    blocks = range(start, stop)
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(lambda b: _run_block(gs, gd, m, n, cfg, b), blocks))
    else:
        parts = [_run_block(gs, gd, m, n, cfg, b) for b in blocks]
    total = BlockSums(0, 0, 0.0, 0.0)
    for p in parts:
        total = total + p
    return total


def _proportion(k: int, n: int) -> EstimateWithCI:
    p = k / n
    se = math.sqrt(p * (1.0 - p) / n)
    return EstimateWithCI(p, se, n, max(0.0, p - Z95 * se), min(1.0, p + Z95 * se))


def _mean(total: float, total_sq: float, n: int) -> EstimateWithCI:
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0) * n / max(n - 1, 1)
    se = math.sqrt(var / n)
    return EstimateWithCI(mean, se, n, mean - Z95 * se, mean + Z95 * se)


@dataclass(frozen=True)
class SimResult:
    sop: EstimateWithCI
    asr: EstimateWithCI


def simulate(scn: Scenario, cfg: SimConfig) -> SimResult:
    return simulate_budgets(link_budgets(scn), scn.m, scn.n_antennas, cfg)


def simulate_budgets(budgets: Sequence[LinkBudget], m: int, n: int, cfg: SimConfig) -> SimResult:
    s = simulate_blocks(budgets, m, n, cfg)
    return SimResult(_proportion(s.outages, s.n), _mean(s.rate_sum, s.rate_sq_sum, s.n))


def estimate_sop(scn: Scenario, cfg: SimConfig) -> EstimateWithCI:
    """Fraction of trials whose selected link has zero secrecy rate."""
    return simulate(scn, cfg).sop


def estimate_asr(scn: Scenario, cfg: SimConfig) -> EstimateWithCI:
    """Mean secrecy rate (nats) of the selected link, idle trials counted as 0."""
    return simulate(scn, cfg).asr


def empirical_cdf_optimal_dest_sinr(budget: LinkBudget, m: int, n: int, cfg: SimConfig,
                                    t_grid: Sequence[float]) -> np.ndarray:
    """Empirical Pr[SINR_dest(a*) <= t] on ``t_grid``; idle trials sit at 0."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t) < 0):
        raise ValueError("t_grid must be non-decreasing")
    counts = np.zeros(t.size, dtype=np.int64)
    gs, gd = np.array([budget.gbar_s]), np.array([budget.gbar_d])
    for b in range(cfg.num_blocks):
        rng = block_rng(cfg.seed, b)
        gamma_s, gamma_d = _draw_links(rng, gs, gd, m, n, cfg.block_length(b),
                                       cfg.antenna_sampling)
        _, s_dest = optimal_sinrs_array(gamma_s[0], gamma_d[0])
        counts += np.searchsorted(np.sort(s_dest), t, side="right")
    return counts / cfg.samples
