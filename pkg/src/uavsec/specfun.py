"""Special functions and quadrature used by the closed-form secrecy expressions.

Only what the analysis needs is here: log-gamma, integer-order modified Bessel
functions of the second kind (plain, log-space and extended precision),
Erlang (integer-shape Gamma) distribution helpers and an adaptive
Gauss-Kronrod integrator for (0, inf).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

# Branch points for K_0/K_1.
_SERIES_MAX_X = 2.0
_ASYMPTOTIC_MIN_X = 25.0

_N_SERIES = 30
_TRAPZ_STEP = 1.0 / 16.0
_TRAPZ_T = np.arange(0.0, 4.5 + _TRAPZ_STEP / 2, _TRAPZ_STEP)
_RENORM = 1e280


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, estimate: float, error: float, subdivisions: int):
        self.estimate = estimate
        self.error = error
        self.subdivisions = subdivisions
        super().__init__(
            f"quadrature did not converge after {subdivisions} subdivisions: "
            f"estimate={estimate!r}, error bound={error!r}"
        )


def ln_gamma(x: float) -> float:
    """Natural log of the Gamma function for positive finite ``x``."""
    if not math.isfinite(x) or x <= 0:
        raise DomainError(f"ln_gamma requires a positive finite argument, got {x!r}")
    return math.lgamma(x)


def ln_factorial(k: int) -> float:
    return math.lgamma(k + 1.0)


# --------------------------------------------------------------------------
# Bessel K
# --------------------------------------------------------------------------

def _series_coefficients(n_terms: int):
    k = np.arange(n_terms)
    log_fact = np.array([math.lgamma(i + 1.0) for i in range(n_terms + 1)])
    harmonic = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1, n_terms + 1))))
    # 1/(k!)^2 and 1/(k!(k+1)!)
    c0 = np.exp(-2.0 * log_fact[:n_terms])
    c1 = np.exp(-log_fact[:n_terms] - log_fact[1:n_terms + 1])
    psi_k1 = harmonic[:n_terms] - EULER_GAMMA
    psi_k2 = harmonic[1:n_terms + 1] - EULER_GAMMA
    return k, c0, c1, harmonic[:n_terms], psi_k1 + psi_k2


_SER_K, _SER_C0, _SER_C1, _SER_H, _SER_PSI = _series_coefficients(_N_SERIES)


def _k01_series(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """K_0 and K_1 from the ascending series, x <= 2."""
    q = 0.25 * x * x
    qk = q[:, None] ** _SER_K[None, :]
    log_half = np.log(0.5 * x)
    i0 = qk @ _SER_C0
    i1 = 0.5 * x * (qk @ _SER_C1)
    k0 = -(log_half + EULER_GAMMA) * i0 + qk @ (_SER_C0 * _SER_H)
    k1 = 1.0 / x + log_half * i1 - 0.25 * x * (qk @ (_SER_C1 * _SER_PSI))
    return k0, k1


def _k01_scaled_integral(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """e^x K_0, e^x K_1 by the trapezoid rule on exp(-x (cosh t - 1)) cosh(nu t).

    The integrand is analytic in a strip, so the rule converges geometrically;
    with the fixed step it is accurate to machine precision for 2 < x <= 25.
    """
    t = _TRAPZ_T
    w = np.full(t.size, _TRAPZ_STEP)
    w[0] *= 0.5
    base = np.exp(-x[:, None] * (np.cosh(t)[None, :] - 1.0))
    k0 = base @ w
    k1 = base @ (w * np.cosh(t))
    return k0, k1


def _k_scaled_asymptotic(nu: int, x: np.ndarray) -> np.ndarray:
    """e^x K_nu(x) from the Hankel expansion, x > 25."""
    mu = 4.0 * nu * nu
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
        if np.all(np.abs(term) < 1e-17 * np.abs(total)):
            break
    return np.sqrt(np.pi / (2.0 * x)) * total


def _validate_x(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError("Bessel K requires finite x > 0")
    return arr


def log_bessel_k_orders(n_max: int, x) -> np.ndarray:
    """ln K_nu(x) for every order nu = 0..n_max.

    Returns an array of shape ``x.shape + (n_max + 1,)``. K_0 and K_1 come from
    the series (x <= 2), a trapezoid integral (2 < x <= 25) or the Hankel
    expansion (x > 25); higher orders follow from the upward recurrence
    K_{n+1} = K_{n-1} + (2n/x) K_n, run on exponentially scaled values with
    periodic renormalisation so nothing overflows or underflows.
    """
    if n_max < 0:
        raise DomainError("order must be non-negative")
    xa = _validate_x(x)
    shape = xa.shape
    xf = xa.reshape(-1)

    # scaled values s = e^x K
    s0 = np.empty_like(xf)
    s1 = np.empty_like(xf)
    log_shift = np.zeros_like(xf)

    small = xf <= _SERIES_MAX_X
    mid = (xf > _SERIES_MAX_X) & (xf <= _ASYMPTOTIC_MIN_X)
    big = xf > _ASYMPTOTIC_MIN_X
    if small.any():
        xs = xf[small]
        k0, k1 = _k01_series(xs)
        # unscaled for x <= 2; the shift makes the column ln(e^x K) like the others
        s0[small], s1[small] = k0, k1
        log_shift[small] = xs
    if mid.any():
        s0[mid], s1[mid] = _k01_scaled_integral(xf[mid])
    if big.any():
        s0[big] = _k_scaled_asymptotic(0, xf[big])
        s1[big] = _k_scaled_asymptotic(1, xf[big])

    out = np.empty((xf.size, n_max + 1))
    # out holds ln(e^x K) until the final subtraction
    out[:, 0] = np.log(s0) + log_shift
    if n_max >= 1:
        out[:, 1] = np.log(s1) + log_shift
    prev, cur = s0, s1
    for n in range(1, n_max):
        nxt = prev + (2.0 * n / xf) * cur
        big_vals = nxt > _RENORM
        if big_vals.any():
            scale = np.where(big_vals, nxt, 1.0)
            cur = cur / scale
            nxt = nxt / scale
            log_shift = log_shift + np.log(scale)
        out[:, n + 1] = np.log(nxt) + log_shift
        prev, cur = cur, nxt
    out -= xf[:, None]
    return out.reshape(shape + (n_max + 1,))


def log_bessel_k(n: int, x):
    """ln K_n(x) for integer order ``n`` (negative orders use K_{-n} = K_n)."""
    n = abs(int(n))
    res = log_bessel_k_orders(n, x)[..., n]
    return float(res) if np.ndim(res) == 0 else res


def bessel_k(n: int, x):
    """Modified Bessel function of the second kind K_n(x), integer ``n``.

    Large arguments underflow to 0.0 and tiny ones overflow to inf silently.
    """
    with np.errstate(under="ignore", over="ignore"):
        val = np.exp(log_bessel_k(n, x))
    return float(val) if np.ndim(val) == 0 else val


def log_bessel_k_orders_mp(n_max: int, x, dps: int) -> list:
    """Extended-precision ln K_nu(x), nu = 0..n_max, as mpmath numbers.

    Uses the ascending series for every x with enough guard digits to absorb
    its cancellation (about x / ln 10 digits), then the upward recurrence.
    Values are returned at ``dps`` working digits.
    """
    xf = float(x)
    if not math.isfinite(xf) or xf <= 0:
        raise DomainError("Bessel K requires finite x > 0")
    guard = int(xf / math.log(10.0)) + 10
    with mpmath.workdps(dps + guard):
        xm = mpmath.mpf(x)
        q = xm * xm / 4
        log_half = mpmath.log(xm / 2)
        eps = mpmath.mpf(10) ** (-(dps + guard))
        i0 = i1 = s0 = s1 = mpmath.mpf(0)
        a0 = mpmath.mpf(1)          # q^k / (k!)^2
        a1 = mpmath.mpf(1)          # q^k / (k! (k+1)!)
        h_k = mpmath.mpf(0)
        euler = mpmath.euler
        k = 0
        while True:
            h_k1 = h_k + mpmath.mpf(1) / (k + 1)
            i0 += a0
            i1 += a1
            s0 += a0 * h_k
            s1 += a1 * (h_k + h_k1 - 2 * euler)
            if a0 < eps * i0 and k > 2 * xf:
                break
            k += 1
            a0 = a0 * q / (k * k)
            a1 = a1 * q / (k * (k + 1))
            h_k = h_k1
        k0 = -(log_half + euler) * i0 + s0
        k1 = 1 / xm + log_half * (xm / 2) * i1 - xm / 4 * s1
        vals = [k0, k1]
        for n in range(1, n_max):
            vals.append(vals[n - 1] + 2 * n / xm * vals[n])
        logs = [mpmath.log(v) for v in vals[: n_max + 1]]
    with mpmath.workdps(dps):
        return [+v for v in logs]


# --------------------------------------------------------------------------
# Erlang distribution
# --------------------------------------------------------------------------

def _check_erlang(shape: int, scale: float) -> None:
    if int(shape) != shape or shape < 1:
        raise DomainError(f"shape must be a positive integer, got {shape!r}")
    if not scale > 0:
        raise DomainError(f"scale must be positive, got {scale!r}")


def _poisson_log_terms(k: np.ndarray, u: np.ndarray) -> np.ndarray:
    lf = np.array([math.lgamma(i + 1.0) for i in k])
    with np.errstate(divide="ignore", invalid="ignore"):
        logu = np.log(u)
        powers = np.where(k[None, :] == 0, 0.0, k[None, :] * logu[:, None])
    return powers - lf[None, :] - u[:, None]


def erlang_sf(shape: int, scale: float, t):
    """Survival function e^{-u} sum_{k<shape} u^k/k!, u = t/scale."""
    _check_erlang(shape, scale)
    tt = np.asarray(t, dtype=float)
    u = np.clip(tt.reshape(-1), 0.0, None) / scale
    terms = _poisson_log_terms(np.arange(shape), u)
    with np.errstate(under="ignore"):
        sf = np.exp(terms).sum(axis=1)
    sf = np.where(u <= 0, 1.0, np.minimum(sf, 1.0)).reshape(tt.shape)
    return float(sf) if sf.ndim == 0 else sf


def erlang_cdf(shape: int, scale: float, t):
    """CDF of the Gamma distribution with integer ``shape`` and ``scale``.

    Equals 1 - e^{-u} sum_{k<shape} u^k/k!, u = t/scale, and 0 for t <= 0.
    Below the mode the complementary Poisson tail is summed instead so small
    probabilities keep full relative precision.
    """
    _check_erlang(shape, scale)
    tt = np.asarray(t, dtype=float)
    u = np.clip(tt.reshape(-1), 0.0, None) / scale
    out = 1.0 - np.atleast_1d(erlang_sf(shape, scale, u * scale))
    low = (u > 0) & (u < shape + 1)
    if low.any():
        ul = u[low]
        n_tail = 40 + int(shape)
        k = np.arange(shape, shape + n_tail)
        with np.errstate(under="ignore"):
            out[low] = np.exp(_poisson_log_terms(k, ul)).sum(axis=1)
    out = np.clip(np.where(u <= 0, 0.0, out), 0.0, 1.0).reshape(tt.shape)
    return float(out) if out.ndim == 0 else out


def erlang_pdf(shape: int, scale: float, t):
    _check_erlang(shape, scale)
    tt = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", under="ignore"):
        logp = ((shape - 1) * np.log(tt) - tt / scale
                - math.lgamma(shape) - shape * math.log(scale))
        p = np.where(tt > 0, np.exp(logp), 0.0)
    return float(p) if p.ndim == 0 else p


# --------------------------------------------------------------------------
# Quadrature
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    max_subdivisions: int = 200

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be non-negative")
        if not (self.abs_tol > 0 or self.rel_tol > 0):
            raise ValueError("at least one of abs_tol, rel_tol must be positive")
        if int(self.max_subdivisions) != self.max_subdivisions or self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be a positive integer")


# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))           # 15 nodes, ascending
_KW = np.concatenate((_WGK[:-1], _WGK[::-1]))
_GW = np.zeros(15)
_GW[1:7:2] = _WG[:3]
_GW[7] = _WG[3]
_GW[9:14:2] = _WG[2::-1]


def _gk15(g: Callable, a: float, b: float) -> tuple[float, float]:
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(g(mid + half * _NODES), dtype=float)
    kron = half * float(vals @ _KW)
    gauss = half * float(vals @ _GW)
    return kron, abs(kron - gauss)


def integrate_semi_infinite(f: Callable, spec: QuadratureSpec | None = None,
                            scale: float = 1.0) -> float:
    """Integrate ``f`` over (0, inf).

    The substitution y = scale * u / (1 - u) maps the half line onto (0, 1),
    where an adaptive 15-point Gauss-Kronrod rule bisects the interval with
    the largest error until ``abs_tol`` or ``rel_tol`` is met. ``f`` is called
    with numpy arrays of abscissae.

    Raises
    ------
    QuadratureError
        When ``max_subdivisions`` bisections do not reach the tolerance; the
        exception carries the best estimate and its error bound.
    """
    spec = spec or QuadratureSpec()
    if not scale > 0:
        raise ValueError("scale must be positive")

    def g(u):
        one_m = 1.0 - u
        y = scale * u / one_m
        with np.errstate(over="ignore", under="ignore"):
            return np.asarray(f(y), dtype=float) * scale / (one_m * one_m)

    val, err = _gk15(g, 0.0, 1.0)
    heap = [(-err, 0.0, 1.0, val)]
    total, total_err = val, err
    n_sub = 0
    while total_err > max(spec.abs_tol, spec.rel_tol * abs(total)):
        if n_sub >= spec.max_subdivisions:
            raise QuadratureError(total, total_err, n_sub)
        neg_err, a, b, v = heapq.heappop(heap)
        mid = 0.5 * (a + b)
        v1, e1 = _gk15(g, a, mid)
        v2, e2 = _gk15(g, mid, b)
        heapq.heappush(heap, (-e1, a, mid, v1))
        heapq.heappush(heap, (-e2, mid, b, v2))
        n_sub += 1
        # re-sum rather than update incrementally to avoid drift
        total = math.fsum(item[3] for item in heap)
        total_err = math.fsum(-item[0] for item in heap)
    if not math.isfinite(total):
        raise QuadratureError(total, total_err, n_sub)
    return total
