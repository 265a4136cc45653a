"""Independent reference computations built on scipy."""

import numpy as np
from scipy import integrate, stats


def _breaks(*scales):
    pts = sorted({float(s) for s in scales if s > 0})
    return pts


def sop_proof_integral(gs, gd, m, n):
    """Pr[Gamma_D < 1 + 1/Gamma_S] by quadrature over Gamma_D.

    SOP = F_D(1) + int_1^inf f_D(y) F_S(1/(y-1)) dy with
    Gamma_S ~ Gamma(m, gs), Gamma_D ~ Gamma(n m, gd).
    """
    S = stats.gamma(m, scale=gs)
    D = stats.gamma(n * m, scale=gd)
    # u = y - 1
    f = lambda u: D.pdf(1.0 + u) * S.cdf(1.0 / u) if u > 0 else 0.0
    edges = [0.0] + _breaks(1e-3 / gs, 1.0 / gs, 1.0, gd, n * m * gd, 10 * n * m * gd) + [np.inf]
    total = D.cdf(1.0)
    for a, b in zip(edges, edges[1:]):
        val, _ = integrate.quad(f, a, b, limit=200, epsabs=1e-13, epsrel=1e-11)
        total += val
    return total


def survival_proof_integral(gs, gd, m, n, t):
    """Pr[SINR_dest(a*) > t] by quadrature over Gamma_D.

    The event is Gamma_D > 1 + 2t and Gamma_S > ((2t+1)^2 + 2t u)/u with
    u = Gamma_D - 1 - 2t.
    """
    S = stats.gamma(m, scale=gs)
    D = stats.gamma(n * m, scale=gd)
    c = 2.0 * t + 1.0
    f = lambda u: D.pdf(c + u) * S.sf(c * c / u + 2.0 * t) if u > 0 else 0.0
    edges = [0.0] + _breaks(c * c / gs * 1e-3, c * c / gs, c * c, gd, n * m * gd,
                             10 * n * m * gd) + [np.inf]
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        val, _ = integrate.quad(f, a, b, limit=200, epsabs=1e-13, epsrel=1e-11)
        total += val
    return total


def optimal_rate(gs, gd):
    """Closed-form C(a*) written independently: ln((1+x)^2/(1+2x)) with x = SINR_dest."""
    num = gs * (gd - 1.0) - 1.0
    if num <= 0:
        return 0.0
    x = num / (2.0 * (gd + gs + 1.0))
    return 2.0 * np.log1p(x) - np.log1p(2.0 * x)


def asr_single_dblquad(gs, gd, m, n):
    """E[C(a*)] for one link by 2-D quadrature over the fading joint density."""
    S = stats.gamma(m, scale=gs)
    D = stats.gamma(n * m, scale=gd)
    f = lambda y, x: optimal_rate(x, y) * S.pdf(x) * D.pdf(y)
    val, _ = integrate.dblquad(f, 0, 60 * gs, lambda x: 1.0 + 1.0 / x if x > 0 else 1e300,
                               lambda x: 60 * n * m * gd, epsabs=1e-10, epsrel=1e-9)
    return val
