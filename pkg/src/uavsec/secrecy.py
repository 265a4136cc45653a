"""Per-realization quantities of source-based jamming through one untrusted relay.

All rates are in nats. Functions accept scalars or numpy arrays inside
``LinkRealization`` and broadcast like numpy ufuncs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np


@dataclass(frozen=True)
class LinkRealization:
    """Instantaneous SNRs of the source-UAV hop and the UAV-destination hop."""

    gamma_s: float
    gamma_d: float

    def __post_init__(self):
        for name in ("gamma_s", "gamma_d"):
            v = np.asarray(getattr(self, name), dtype=float)
            if np.any(~np.isfinite(v)) or np.any(v < 0):
                raise ValueError(f"{name} must be finite and >= 0")


@dataclass(frozen=True)
class PowerSplit:
    """Fraction ``a`` of the source power carried by the confidential signal."""

    a: float

    def __post_init__(self):
        v = np.asarray(self.a, dtype=float)
        if np.any(~(v >= 0)) or np.any(~(v <= 1)):
            raise ValueError(f"power split must lie in [0, 1], got {self.a!r}")


SplitLike = Union[PowerSplit, float, np.ndarray]


def _a(split: SplitLike):
    return split.a if isinstance(split, PowerSplit) else split


def sinr_uav(link: LinkRealization, split: SplitLike):
    a = _a(split)
    gs = link.gamma_s
    return a * gs / ((1.0 - a) * gs + 1.0)


def sinr_dest(link: LinkRealization, split: SplitLike):
    a = _a(split)
    gs, gd = link.gamma_s, link.gamma_d
    return a * gs * gd / (gs + gd + 1.0)


def secrecy_rate(link: LinkRealization, split: SplitLike):
    """[ln(1 + SINR_dest) - ln(1 + SINR_uav)]^+ in nats."""
    diff = np.log1p(sinr_dest(link, split)) - np.log1p(sinr_uav(link, split))
    out = np.maximum(diff, 0.0)
    return float(out) if np.ndim(out) == 0 else out


def is_idle(link: LinkRealization):
    """True where gamma_d <= 1 + 1/gamma_s, i.e. no split gives a positive rate.

    The boundary is counted as idle; written as gamma_s (gamma_d - 1) <= 1 so
    gamma_s = 0 needs no special case.
    """
    return link.gamma_s * (link.gamma_d - 1.0) <= 1.0


def optimal_split(link: LinkRealization) -> PowerSplit | None:
    """Rate-maximising split, or ``None`` when the source should stay idle."""
    gs, gd = float(link.gamma_s), float(link.gamma_d)
    if is_idle(LinkRealization(gs, gd)):
        return None
    return PowerSplit(0.5 * (1.0 - (1.0 + gs) / (gs * gd)))


def optimal_split_array(gamma_s, gamma_d):
    """Vectorised a*; NaN where the link is idle."""
    gs = np.asarray(gamma_s, dtype=float)
    gd = np.asarray(gamma_d, dtype=float)
    idle = gs * (gd - 1.0) <= 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        a = 0.5 * (1.0 - (1.0 + gs) / (gs * gd))
    return np.where(idle, np.nan, a)


def optimal_sinrs_array(gamma_s, gamma_d):
    """SINRs at the UAV and destination under a*; both 0 on idle links."""
    gs = np.asarray(gamma_s, dtype=float)
    gd = np.asarray(gamma_d, dtype=float)
    num = gs * (gd - 1.0) - 1.0
    active = num > 0
    num = np.where(active, num, 0.0)
    s_uav = num / ((gs + 2.0) * gd + gs + 1.0)
    s_dest = num / (2.0 * (gd + gs + 1.0))
    return s_uav, s_dest


def optimal_sinrs(link: LinkRealization) -> tuple[float, float]:
    if np.any(is_idle(link)):
        raise ValueError("optimal SINRs are undefined on an idle link")
    s_uav, s_dest = optimal_sinrs_array(link.gamma_s, link.gamma_d)
    if np.ndim(s_uav) == 0:
        return float(s_uav), float(s_dest)
    return s_uav, s_dest


def optimal_secrecy_rate_array(gamma_s, gamma_d):
    """C(a*) in nats from the unsimplified log ratio; 0 on idle links."""
    s_uav, s_dest = optimal_sinrs_array(gamma_s, gamma_d)
    return np.maximum(np.log1p(s_dest) - np.log1p(s_uav), 0.0)


def optimal_secrecy_rate(link: LinkRealization) -> float:
    out = optimal_secrecy_rate_array(link.gamma_s, link.gamma_d)
    return float(out) if np.ndim(out) == 0 else out


class Selection(NamedTuple):
    index: int
    rate: float
    all_idle: bool


def select_uav(links: Sequence[LinkRealization]) -> Selection:
    """Pick the UAV with the largest optimal secrecy rate (lowest index on ties)."""
    if len(links) == 0:
        raise ValueError("select_uav needs at least one link")
    rates = [optimal_secrecy_rate(link) for link in links]
    best = int(np.argmax(rates))
    all_idle = all(bool(is_idle(link)) for link in links)
    return Selection(best, float(rates[best]), all_idle)
