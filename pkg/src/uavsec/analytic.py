"""Closed-form secrecy outage probability, average secrecy rate and high-SNR behaviour.

Notation: ``gs``/``gd`` are the Gamma scale parameters (average SNRs) of the
source-UAV and UAV-destination hops, ``m`` the Nakagami shape and ``n`` the
number of destination antennas, so the destination-hop SNR has shape n*m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .channel import LinkBudget
from .specfun import (
    QuadratureSpec,
    integrate_semi_infinite,
    log_bessel_k_orders,
    log_bessel_k_orders_mp,
)

MAX_SHAPE = 64
# below this the float evaluation of 1 - sum is redone in extended precision
EXTENDED_THRESHOLD = 1e-6
_MAX_DPS = 4000


def _check_shapes(m: int, n: int) -> None:
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if n * m > MAX_SHAPE:
        raise ValueError(f"n*m = {n * m} exceeds the supported maximum {MAX_SHAPE}")


def _logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    peak = np.max(a, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    with np.errstate(under="ignore"):
        s = np.sum(np.exp(a - peak), axis=axis, keepdims=True)
    with np.errstate(divide="ignore"):
        return np.squeeze(np.log(s) + peak, axis=axis)


# --------------------------------------------------------------------------
# Single-link SOP
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _sop_terms(m: int, n: int):
    """Index data of the double sum: Bessel order, powers of gs, gd and 1/((k-l)! l!)."""
    order, pow_s, pow_d, log_c = [], [], [], []
    for k in range(n * m):
        for l in range(k + 1):
            order.append(abs(m - k + l))
            pow_s.append((l - k - m) / 2.0)
            pow_d.append(-(l + k + m) / 2.0)
            log_c.append(-math.lgamma(k - l + 1.0) - math.lgamma(l + 1.0))
    return (np.array(order), np.array(pow_s), np.array(pow_d), np.array(log_c))


def _sop_float(gs: float, gd: float, m: int, n: int) -> float:
    order, pow_s, pow_d, log_c = _sop_terms(m, n)
    x = 2.0 / math.sqrt(gs * gd)
    log_k = log_bessel_k_orders(int(order.max()), x)
    log_terms = (math.log(2.0) - 1.0 / gd - math.lgamma(m)
                 + pow_s * math.log(gs) + pow_d * math.log(gd) + log_c + log_k[order])
    if not np.all(np.isfinite(log_terms)):
        raise FloatingPointError(f"non-finite SOP term for gs={gs!r}, gd={gd!r}, m={m}, n={n}")
    return 1.0 - float(np.exp(_logsumexp(log_terms)))


def _sop_mp(gs: float, gd: float, m: int, n: int, dps: int):
    order, pow_s, pow_d, log_c = _sop_terms(m, n)
    with mpmath.workdps(dps):
        mgs, mgd = mpmath.mpf(gs), mpmath.mpf(gd)
        x = 2 / mpmath.sqrt(mgs * mgd)
        log_k = log_bessel_k_orders_mp(int(order.max()), x, dps)
        lgs, lgd = mpmath.log(mgs), mpmath.log(mgd)
        head = mpmath.log(2) - 1 / mgd - mpmath.loggamma(m)
        total = mpmath.mpf(0)
        for k in range(n * m):
            for l in range(k + 1):
                v = abs(m - k + l)
                total += mpmath.exp(head + mpmath.mpf(l - k - m) / 2 * lgs
                                    - mpmath.mpf(l + k + m) / 2 * lgd + log_k[v]
                                    - mpmath.loggamma(k - l + 1) - mpmath.loggamma(l + 1))
        return 1 - total


def _sop_extended(gs: float, gd: float, m: int, n: int) -> float:
    dps = 40
    while dps <= _MAX_DPS:
        val = _sop_mp(gs, gd, m, n, dps)
        if val > 0:
            digits_lost = -int(mpmath.floor(mpmath.log10(val)))
            if digits_lost + 25 <= dps:
                return float(val)
            dps = digits_lost + 45
        else:
            dps *= 2
    raise FloatingPointError(
        f"SOP below representable range for gs={gs!r}, gd={gd!r}, m={m}, n={n}")


def sop_single_link(budget: LinkBudget, m: int, n: int,
                    extended: bool | None = None) -> float:
    """Secrecy outage probability of the link through one UAV under optimal a*.

    Evaluates the closed-form double sum over Bessel K terms in log space.
    ``extended=None`` recomputes the result with mpmath when the float value
    falls below ``EXTENDED_THRESHOLD`` (1 - sum loses relative accuracy
    there); ``True``/``False`` force either path.
    """
    _check_shapes(m, n)
    gs, gd = float(budget.gbar_s), float(budget.gbar_d)
    if extended:
        return _sop_extended(gs, gd, m, n)
    sop = _sop_float(gs, gd, m, n)
    if extended is None and sop < EXTENDED_THRESHOLD:
        return _sop_extended(gs, gd, m, n)
    return min(max(sop, 0.0), 1.0)


def sop_network(budgets: Sequence[LinkBudget], m: int, n: int,
                exact: bool = True) -> float:
    """Outage of best-UAV selection: all links idle at once.

    ``exact`` multiplies the per-link SOPs (independent fading); otherwise
    the first link's SOP is raised to the number of UAVs, the equal-path-loss
    approximation.
    """
    if len(budgets) == 0:
        raise ValueError("sop_network needs at least one link budget")
    if exact:
        out = 1.0
        for b in budgets:
            out *= sop_single_link(b, m, n)
        return out
    return sop_single_link(budgets[0], m, n) ** len(budgets)


# --------------------------------------------------------------------------
# CDF of the destination SINR under a*
# --------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _cdf_terms(m: int, n: int):
    order, r_pow, c_pow, pow_s, pow_d, log_c = [], [], [], [], [], []
    for k in range(n * m):
        for l in range(k + 1):
            for r in range(m):
                v = r - l + 1
                order.append(abs(v))
                r_pow.append(m - 1 - r)
                c_pow.append(k + r + 1)
                pow_d.append(-(k + v / 2.0))
                pow_s.append(-(m - v / 2.0))
                log_c.append(-math.lgamma(l + 1.0) - math.lgamma(k - l + 1.0)
                             + math.lgamma(m) - math.lgamma(r + 1.0) - math.lgamma(m - r))
    return tuple(np.array(a) for a in (order, r_pow, c_pow, pow_s, pow_d, log_c))


def survival_optimal_dest_sinr(budget: LinkBudget, m: int, n: int, t):
    """Pr[SINR_dest(a*) > t], the complement of the triple-sum CDF.

    Every term of the sum is positive, so the survival is accurate even where
    the CDF is within rounding of 1.
    """
    _check_shapes(m, n)
    tt = np.asarray(t, dtype=float)
    if np.any(~(tt >= 0)):
        raise ValueError("t must be >= 0")
    gs, gd = float(budget.gbar_s), float(budget.gbar_d)
    order, r_pow, c_pow, pow_s, pow_d, log_c = _cdf_terms(m, n)
    tf = tt.reshape(-1)
    c = 2.0 * tf + 1.0
    x = 2.0 * c / math.sqrt(gs * gd)
    log_k = log_bessel_k_orders(int(order.max()), x)            # (T, orders)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_2t = np.log(2.0 * tf)
        r_term = np.where(r_pow[None, :] == 0, 0.0, r_pow[None, :] * log_2t[:, None])
    log_terms = (math.log(2.0) - math.lgamma(m) + log_c[None, :]
                 + pow_s[None, :] * math.log(gs) + pow_d[None, :] * math.log(gd)
                 - (2.0 * tf * (1.0 / gs + 1.0 / gd) + 1.0 / gd)[:, None]
                 + r_term + c_pow[None, :] * np.log(c)[:, None]
                 + log_k[:, order])
    if np.any(np.isnan(log_terms)) or np.any(log_terms == np.inf):
        raise FloatingPointError(f"non-finite CDF term for gs={gs!r}, gd={gd!r}, m={m}, n={n}")
    with np.errstate(under="ignore"):
        sf = np.minimum(np.exp(_logsumexp(log_terms)), 1.0)
    sf = sf.reshape(tt.shape)
    return float(sf) if sf.ndim == 0 else sf


def cdf_optimal_dest_sinr(budget: LinkBudget, m: int, n: int, t):
    """CDF of the destination SINR under a*, with the idle atom at 0."""
    out = 1.0 - np.asarray(survival_optimal_dest_sinr(budget, m, n, t))
    return float(out) if out.ndim == 0 else out


# --------------------------------------------------------------------------
# Average secrecy rate
# --------------------------------------------------------------------------

def _quad_scale(budgets: Sequence[LinkBudget], m: int) -> float:
    harm = max(b.gbar_s * b.gbar_d / (b.gbar_s + b.gbar_d) for b in budgets)
    return max(1.0, 0.5 * m * harm)


def _asr(budgets: Sequence[LinkBudget], powers: Sequence[int], m: int, n: int,
         quad: QuadratureSpec | None) -> float:
    # ln(1 + max z_i) with z = S^2/(2S+1), and Pr[z <= y] = F(y + sqrt(y^2 + y))
    def integrand(y):
        t = y + np.sqrt(y * y + y)
        log_f_max = 0.0
        with np.errstate(divide="ignore"):
            for b, p in zip(budgets, powers):
                log_f_max = log_f_max + p * np.log1p(-survival_optimal_dest_sinr(b, m, n, t))
        return -np.expm1(log_f_max) / (1.0 + y)

    return integrate_semi_infinite(integrand, quad or QuadratureSpec(),
                                   scale=_quad_scale(budgets, m))


def asr_single(budget: LinkBudget, m: int, n: int,
               quad: QuadratureSpec | None = None) -> float:
    """Average secrecy rate (nats) of a single UAV link under a*."""
    return asr_network(budget, 1, m, n, quad)


def asr_network(budget: LinkBudget, num_uavs: int, m: int, n: int,
                quad: QuadratureSpec | None = None) -> float:
    """Average secrecy rate (nats) of best selection among i.i.d. UAV links."""
    _check_shapes(m, n)
    if int(num_uavs) != num_uavs or num_uavs < 1:
        raise ValueError(f"num_uavs must be a positive integer, got {num_uavs}")
    return _asr([budget], [int(num_uavs)], m, n, quad)


def asr_heterogeneous(budgets: Sequence[LinkBudget], m: int, n: int,
                      quad: QuadratureSpec | None = None) -> float:
    """Best-selection ASR over independent, non-identical links (CDF product)."""
    _check_shapes(m, n)
    if len(budgets) == 0:
        raise ValueError("asr_heterogeneous needs at least one link budget")
    return _asr(list(budgets), [1] * len(budgets), m, n, quad)


# --------------------------------------------------------------------------
# High-SNR behaviour
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HighSnrConfig:
    """Transmit SNR grid for asymptotics.

    ``delta`` ties the two transmit SNRs: P_s/sigma_u^2 = delta P_u/sigma_d^2
    = gbar for every ``gbar`` in ``gbar_grid`` (linear).
    """

    delta: float
    gbar_grid: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gbar_grid", tuple(float(g) for g in self.gbar_grid))
        if not self.delta > 0:
            raise ValueError("delta must be > 0")
        g = self.gbar_grid
        if len(g) < 2 or any(b <= a for a, b in zip(g, g[1:])) or g[0] <= 0:
            raise ValueError("gbar_grid must be positive, strictly increasing, length >= 2")


def high_snr_budget(gbar: float, delta: float, loss_s: float, loss_d: float,
                    inr: float, sigma2_s: float = 1.0, sigma2_d: float = 1.0) -> LinkBudget:
    """Link budget at transmit SNR ``gbar`` given mean path losses and INR."""
    return LinkBudget(gbar * sigma2_s / (loss_s * (1.0 + inr)),
                      gbar * sigma2_d / (delta * loss_d))


def sop_bounds_from_budget(budget: LinkBudget, m: int, n: int) -> tuple[float, float]:
    """Asymptotic (lower, upper) bounds on the single-link SOP; needs n >= 2."""
    _check_shapes(m, n)
    if n < 2:
        raise ValueError("the high-SNR bounds need n >= 2; for m = n = 1 use "
                         "sop_high_snr_single_antenna")
    nm = n * m
    ln_gs, ln_gd = math.log(budget.gbar_s), math.log(budget.gbar_d)
    # Pr(Gamma_D < 1) and Pr(Gamma_D < 1/Gamma_S) at leading order
    ln_dest = -nm * ln_gd - math.lgamma(nm + 1.0)
    ln_prod = (-m * (ln_gs + ln_gd) + math.lgamma((n - 1) * m)
               - math.lgamma(m + 1.0) - math.lgamma(nm))
    lower = math.exp(max(ln_dest, ln_prod))
    upper = math.exp(m * math.log(2.0) + ln_prod) + math.exp(nm * math.log(2.0) + ln_dest)
    return lower, upper


def sop_high_snr_bounds(loss_s: float, loss_d: float, inr: float, cfg: HighSnrConfig,
                        m: int, n: int) -> list[tuple[float, float]]:
    """(lower, upper) single-link SOP bounds for each gbar in ``cfg.gbar_grid``."""
    return [sop_bounds_from_budget(high_snr_budget(g, cfg.delta, loss_s, loss_d, inr), m, n)
            for g in cfg.gbar_grid]


def sop_high_snr_single_antenna(gbar_d: float, num_uavs: int = 1) -> float:
    """High-SNR network SOP for m = n = 1: (1 - exp(-1/gbar_d))^R."""
    return (-math.expm1(-1.0 / gbar_d)) ** num_uavs


def diversity_slope(points: Sequence[tuple[float, float]], last_decade: bool = True) -> float:
    """-d log SOP / d log gbar by least squares over (gbar, SOP) pairs.

    Points with SOP outside (0, 0.1] are dropped. With ``last_decade`` the fit
    uses only gbar within a factor of 10 of the largest remaining gbar, if at
    least three points are left there.
    """
    pts = sorted((float(g), float(p)) for g, p in points
                 if g > 0 and 0 < p <= 0.1 and math.isfinite(p))
    if last_decade and pts:
        top = pts[-1][0]
        tail = [pt for pt in pts if pt[0] >= top / 10.0]
        if len(tail) >= 3:
            pts = tail
    if len(pts) < 3:
        raise ValueError("need at least 3 points with 0 < SOP <= 0.1 to fit a slope")
    lg = np.log10([g for g, _ in pts])
    lp = np.log10([p for _, p in pts])
    slope = np.polyfit(lg, lp, 1)[0]
    return float(-slope)
