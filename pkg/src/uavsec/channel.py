"""Air-to-ground geometry, LoS-weighted mean path loss and average link SNRs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

SPEED_OF_LIGHT = 3e8

Endpoint = Literal["source", "dest"]


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class EnvironmentParams:
    """Propagation constants of the A2G model (defaults: urban)."""

    omega: float = 9.61
    beta: float = 0.16
    eta_los_db: float = 1.0
    eta_nlos_db: float = 20.0
    alpha: float = 2.0
    carrier_hz: float = 2e9

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if not self.alpha >= 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        if not self.carrier_hz > 0:
            raise ValueError(f"carrier_hz must be > 0, got {self.carrier_hz}")
        if not self.eta_nlos_db >= self.eta_los_db >= 0:
            raise ValueError("need eta_nlos_db >= eta_los_db >= 0")


@dataclass(frozen=True)
class UavNode:
    altitude_m: float
    d_source_m: float
    d_dest_m: float

    def __post_init__(self):
        if not self.altitude_m > 0:
            raise ValueError(f"altitude_m must be > 0, got {self.altitude_m}")
        if not (self.d_source_m >= 0 and self.d_dest_m >= 0):
            raise ValueError("ground distances must be >= 0")

    def ground_distance(self, endpoint: Endpoint) -> float:
        if endpoint == "source":
            return self.d_source_m
        if endpoint == "dest":
            return self.d_dest_m
        raise ValueError(f"endpoint must be 'source' or 'dest', got {endpoint!r}")

    def link_length(self, endpoint: Endpoint) -> float:
        return math.hypot(self.altitude_m, self.ground_distance(endpoint))


@dataclass(frozen=True)
class Scenario:
    """Network description: UAV geometry, powers, noise and fading."""

    uavs: tuple[UavNode, ...]
    p_source_dbm: float = 20.0
    p_uav_dbm: float = 20.0
    noise_uav_dbm: float = -100.0
    noise_dest_dbm: float = -100.0
    inr: float = 1.0
    m: int = 2
    n_antennas: int = 2
    sigma2_s: float = 1.0
    sigma2_d: float = 1.0
    env: EnvironmentParams = field(default_factory=EnvironmentParams)

    def __post_init__(self):
        object.__setattr__(self, "uavs", tuple(self.uavs))
        if len(self.uavs) < 1:
            raise ValueError("a scenario needs at least one UAV")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if int(self.n_antennas) != self.n_antennas or self.n_antennas < 1:
            raise ValueError(f"n_antennas must be a positive integer, got {self.n_antennas}")
        if not self.inr >= 0:
            raise ValueError(f"inr must be >= 0, got {self.inr}")
        for name in ("p_source_dbm", "p_uav_dbm", "noise_uav_dbm", "noise_dest_dbm"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if not (self.sigma2_s > 0 and self.sigma2_d > 0):
            raise ValueError("sigma2_s and sigma2_d must be > 0")

    @property
    def num_uavs(self) -> int:
        return len(self.uavs)

    def with_changes(self, **changes) -> "Scenario":
        return replace(self, **changes)


@dataclass(frozen=True)
class LinkBudget:
    """Average SNRs (Gamma scale parameters) of the two hops via one UAV."""

    gbar_s: float
    gbar_d: float

    def __post_init__(self):
        for name in ("gbar_s", "gbar_d"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")


def elevation_deg(node: UavNode, endpoint: Endpoint) -> float:
    d = node.ground_distance(endpoint)
    if d == 0:
        return 90.0
    return math.degrees(math.atan(node.altitude_m / d))


def los_probability(env: EnvironmentParams, theta_deg: float) -> float:
    return 1.0 / (1.0 + env.omega * math.exp(-env.beta * (theta_deg - env.omega)))


def mean_path_loss(env: EnvironmentParams, node: UavNode, endpoint: Endpoint) -> float:
    """Average linear path loss r^alpha (4 pi f / c)^2 (eta_L p_L + eta_N p_N)."""
    r = node.link_length(endpoint)
    p_los = los_probability(env, elevation_deg(node, endpoint))
    excess = db_to_linear(env.eta_los_db) * p_los + db_to_linear(env.eta_nlos_db) * (1.0 - p_los)
    return r ** env.alpha * (4.0 * math.pi * env.carrier_hz / SPEED_OF_LIGHT) ** 2 * excess


def link_budget(scn: Scenario, i: int) -> LinkBudget:
    if not 0 <= i < scn.num_uavs:
        raise IndexError(f"UAV index {i} out of range for {scn.num_uavs} UAVs")
    node = scn.uavs[i]
    p_s = dbm_to_watts(scn.p_source_dbm)
    p_u = dbm_to_watts(scn.p_uav_dbm)
    noise_u = dbm_to_watts(scn.noise_uav_dbm)
    noise_d = dbm_to_watts(scn.noise_dest_dbm)
    l_s = mean_path_loss(scn.env, node, "source")
    l_d = mean_path_loss(scn.env, node, "dest")
    gbar_s = p_s * scn.sigma2_s / (noise_u * l_s * (scn.inr + 1.0))
    gbar_d = p_u * scn.sigma2_d / (noise_d * l_d)
    return LinkBudget(gbar_s, gbar_d)


def link_budgets(scn: Scenario) -> list[LinkBudget]:
    return [link_budget(scn, i) for i in range(scn.num_uavs)]


def is_homogeneous(budgets: Sequence[LinkBudget], rel_tol: float = 1e-12) -> bool:
    first = budgets[0]
    return all(
        math.isclose(b.gbar_s, first.gbar_s, rel_tol=rel_tol)
        and math.isclose(b.gbar_d, first.gbar_d, rel_tol=rel_tol)
        for b in budgets
    )
