"""Parameter sweeps, UAV placements and the analytic-vs-simulation report.

CSV files use one long-format row per (sweep value, metric)::

    sweep_var,value,metric,estimate,ci_low,ci_high,samples

Analytic metrics leave the CI and sample columns empty. Header lines start with
``#``; the first carries the SHA-256 of the run manifest (timestamp excluded),
so a CSV is byte-identical whenever its manifest hash is.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analytic import (
    asr_heterogeneous,
    asr_network,
    diversity_slope,
    sop_bounds_from_budget,
    sop_network,
)
from .channel import LinkBudget, Scenario, UavNode, is_homogeneous, link_budgets
from .config import ConfigError, SweepSpec, scenario_to_dict, write_text
from .montecarlo import SimConfig, simulate_budgets

CSV_COLUMNS = ("sweep_var", "value", "metric", "estimate", "ci_low", "ci_high", "samples")
LN2 = math.log(2.0)
SLOPE_SNR_DB = tuple(np.arange(50.0, 80.0 + 1e-9, 2.5))
SLOPE_REL_TOL = 0.10


def placement_geometry(distance_m: float, num_uavs: int, scheme: str,
                       base_altitude_m: float) -> tuple[UavNode, ...]:
    """UAV nodes for the two canonical placements over a source-destination span.

    ``equal_division``: common altitude, ground projections at k L/(R+1).
    ``midpoint_stacked``: all projections at L/2, altitudes k * base, k = 1..R.
    """
    if not distance_m > 0:
        raise ValueError(f"distance must be > 0, got {distance_m}")
    if int(num_uavs) != num_uavs or num_uavs < 1:
        raise ValueError(f"num_uavs must be a positive integer, got {num_uavs}")
    L, R = float(distance_m), int(num_uavs)
    if scheme == "equal_division":
        return tuple(UavNode(base_altitude_m, k * L / (R + 1), L - k * L / (R + 1))
                     for k in range(1, R + 1))
    if scheme == "midpoint_stacked":
        return tuple(UavNode(k * base_altitude_m, L / 2, L / 2) for k in range(1, R + 1))
    raise ValueError(f"unknown placement scheme {scheme!r}")


@dataclass(frozen=True)
class Row:
    sweep_var: str
    value: object
    metric: str
    estimate: object
    ci_low: float | None = None
    ci_high: float | None = None
    samples: int | None = None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def format_csv(rows: Sequence[Row], header: Sequence[str]) -> str:
    lines = [f"# {h}" for h in header]
    lines.append(",".join(CSV_COLUMNS))
    for r in rows:
        lines.append(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunManifest:
    scenario: dict
    sweep: dict | None
    simulation: dict
    seed: int
    exact_product: bool
    tool_version: str
    timestamp: str

    def reproducible_part(self) -> dict:
        d = asdict(self)
        d.pop("timestamp")
        return d

    @property
    def digest(self) -> str:
        blob = json.dumps(self.reproducible_part(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def to_json(self) -> str:
        d = asdict(self)
        d["sha256"] = self.digest
        return json.dumps(d, indent=2, sort_keys=True) + "\n"


def _manifest(scn, sweep, sim: SimConfig, exact_product: bool) -> RunManifest:
    return RunManifest(
        scenario=scenario_to_dict(scn),
        sweep=None if sweep is None else sweep.to_dict(),
        simulation={k: v for k, v in asdict(sim).items() if k != "workers"},
        seed=sim.seed,
        exact_product=exact_product,
        tool_version=__version__,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    )


def _csv_header(man: RunManifest) -> list[str]:
    return [f"manifest_sha256={man.digest}", f"tool=uavsec {man.tool_version}",
            f"seed={man.seed}", f"exact_product={str(man.exact_product).lower()}"]


# --------------------------------------------------------------------------
# Sweeps
# --------------------------------------------------------------------------

def _sim_with_overrides(sim: SimConfig, overrides: dict) -> SimConfig:
    return replace(sim, **overrides) if overrides else sim


def scenario_at(scn: Scenario, sweep: SweepSpec, value) -> Scenario:
    """Scenario for one sweep point."""
    var = sweep.variable
    num = sweep.num_uavs or scn.num_uavs
    generated = sweep.placement != "explicit"
    uavs = (placement_geometry(sweep.distance_m, num, sweep.placement, sweep.base_altitude_m)
            if generated else scn.uavs)
    changes: dict = {}
    if var == "p_source_dbm":
        changes["p_source_dbm"] = float(value)
        if sweep.tie_uav_power:
            changes["p_uav_dbm"] = float(value)
    elif var == "altitude_m":
        if generated:
            uavs = placement_geometry(sweep.distance_m, num, sweep.placement, float(value))
        else:
            uavs = tuple(replace(u, altitude_m=float(value)) for u in uavs)
    elif var == "sd_distance_m":
        uavs = placement_geometry(float(value), num, sweep.placement, sweep.base_altitude_m)
    elif var == "num_uavs":
        if generated:
            uavs = placement_geometry(sweep.distance_m, int(value), sweep.placement,
                                      sweep.base_altitude_m)
        else:
            uavs = (uavs[0],) * int(value)
    elif var == "num_antennas":
        changes["n_antennas"] = int(value)
    return scn.with_changes(uavs=tuple(uavs), **changes)


def _asr_analytic(budgets: list[LinkBudget], m: int, n: int, exact_product: bool) -> float:
    """Power form for identical links, per-UAV product otherwise or on request."""
    if exact_product or not is_homogeneous(budgets):
        return asr_heterogeneous(budgets, m, n)
    return asr_network(budgets[0], len(budgets), m, n)


def _point_rows(scn: Scenario, sim: SimConfig, sweep: SweepSpec, value,
                exact_product: bool) -> list[Row]:
    budgets = link_budgets(scn)
    m, n, R = scn.m, scn.n_antennas, scn.num_uavs
    var = sweep.variable
    rows: list[Row] = []
    outs = sweep.outputs
    if "sop_analytic_exact" in outs:
        rows.append(Row(var, value, "sop_analytic_exact", sop_network(budgets, m, n, exact=True)))
    if "sop_analytic_approx" in outs:
        rows.append(Row(var, value, "sop_analytic_approx", sop_network(budgets, m, n, exact=False)))
    if "sop_bounds" in outs:
        per_link = [sop_bounds_from_budget(b, m, n) for b in budgets]
        if not exact_product and is_homogeneous(budgets):
            per_link = [per_link[0]] * R
        rows.append(Row(var, value, "sop_bound_lower", float(np.prod([lo for lo, _ in per_link]))))
        rows.append(Row(var, value, "sop_bound_upper", float(np.prod([up for _, up in per_link]))))
    if "asr_analytic" in outs:
        asr = _asr_analytic(budgets, m, n, exact_product)
        rows.append(Row(var, value, "asr_analytic_nats", asr))
        rows.append(Row(var, value, "asr_analytic_bits", asr / LN2))
    if "sop_mc" in outs or "asr_mc" in outs:
        res = simulate_budgets(budgets, m, n, sim)
        if "sop_mc" in outs:
            e = res.sop
            rows.append(Row(var, value, "sop_mc", e.mean, e.ci95_low, e.ci95_high, e.samples))
        if "asr_mc" in outs:
            e = res.asr
            rows.append(Row(var, value, "asr_mc_nats", e.mean, e.ci95_low, e.ci95_high, e.samples))
            rows.append(Row(var, value, "asr_mc_bits", e.mean / LN2, e.ci95_low / LN2,
                            e.ci95_high / LN2, e.samples))
    return rows


def _validate_sweep(scn: Scenario, sweep: SweepSpec, sim: SimConfig) -> None:
    if sweep.variable == "power_split_a":
        if sim.power_policy == "optimal":
            raise ConfigError("power_split_a sweep conflicts with the optimal power policy; "
                              "set simulation.power_policy to a fixed split")
        if any(not 0.0 <= float(v) <= 1.0 for v in sweep.values):
            raise ConfigError("values: power splits must lie in [0, 1]")
    if "sop_bounds" in sweep.outputs:
        ns = sweep.values if sweep.variable == "num_antennas" else [scn.n_antennas]
        if any(int(v) < 2 for v in ns):
            raise ConfigError("outputs: sop_bounds needs num_antennas >= 2")
    if isinstance(sim.selection, int):
        counts = (sweep.values if sweep.variable == "num_uavs"
                  else [sweep.num_uavs or scn.num_uavs])
        if any(sim.selection >= int(c) for c in counts):
            raise ConfigError("simulation.selection: UAV index out of range")


def run_sweep(scn: Scenario, sweep: SweepSpec, sim: SimConfig, out_path,
              exact_product: bool = False, workers: int = 1) -> RunManifest:
    """Evaluate every sweep point and write ``out_path`` (CSV) plus a manifest.

    Sweep points may run concurrently; rows are written in sweep order. All
    Monte Carlo points share the same seed, so outputs across points (and
    across runs differing only in policy or selection) use common random
    numbers.
    """
    try:
        sim = _sim_with_overrides(sim, sweep.simulation)
    except ValueError as exc:
        raise ConfigError(f"simulation: {exc}") from exc
    _validate_sweep(scn, sweep, sim)

    def point(value):
        point_sim = sim
        if sweep.variable == "power_split_a":
            point_sim = replace(sim, power_policy=float(value))
        try:
            point_scn = scenario_at(scn, sweep, value)
        except ValueError as exc:
            raise ConfigError(f"values: {value!r} gives an invalid scenario: {exc}") from exc
        return _point_rows(point_scn, point_sim, sweep, value, exact_product)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(point, sweep.values))
    else:
        chunks = [point(v) for v in sweep.values]
    rows = [r for chunk in chunks for r in chunk]

    man = _manifest(scn, sweep, sim, exact_product)
    out_path = Path(out_path)
    write_text(out_path, format_csv(rows, _csv_header(man)))
    write_text(out_path.with_suffix(".manifest.json"), man.to_json())
    return man


def read_csv_rows(path) -> list[dict]:
    """Rows of a sweep/compare CSV as dicts (header comments skipped)."""
    import csv

    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# --------------------------------------------------------------------------
# Analytic vs simulation report
# --------------------------------------------------------------------------

def diversity_points(budgets: Sequence[LinkBudget], m: int, n: int, exact_product: bool,
                     snr_db: Sequence[float] = SLOPE_SNR_DB) -> list[tuple[float, float]]:
    """(gbar, network SOP) with every link budget scaled up together.

    gbar is the smallest hop SNR across links after scaling, so all hops are
    at least that strong.
    """
    ref = min(min(b.gbar_s, b.gbar_d) for b in budgets)
    pts = []
    for db in snr_db:
        g = 10.0 ** (db / 10.0)
        k = g / ref
        scaled = [LinkBudget(b.gbar_s * k, b.gbar_d * k) for b in budgets]
        pts.append((g, sop_network(scaled, m, n, exact=exact_product)))
    return pts


def diversity_target(num_uavs: int, m: int, n: int) -> int:
    return 2 * num_uavs * m if n >= 2 else num_uavs * m


@dataclass(frozen=True)
class CompareResult:
    text: str
    ok: bool
    rows: tuple[Row, ...]
    manifest: RunManifest


def compare_report(scn: Scenario, sim: SimConfig, out_dir=None,
                   exact_product: bool = False) -> CompareResult:
    """Closed forms against Monte Carlo for one scenario.

    Flags a disagreement when the simulated SOP or ASR is more than three
    standard errors from its closed form (the SOP error uses the binomial
    standard error at the analytic probability), or when the high-SNR slope
    misses its target by more than 10%.
    """
    budgets = link_budgets(scn)
    m, n, R = scn.m, scn.n_antennas, scn.num_uavs
    homog = is_homogeneous(budgets)
    sim_best = replace(sim, selection="best", power_policy="optimal")

    sop_exact = sop_network(budgets, m, n, exact=True)
    sop_approx = sop_network(budgets, m, n, exact=False) if homog else None
    asr = asr_network(budgets[0], R, m, n) if homog else asr_heterogeneous(budgets, m, n)
    res = simulate_budgets(budgets, m, n, sim_best)
    ns = res.sop.samples
    sop_se = math.sqrt(sop_exact * (1.0 - sop_exact) / ns)
    sop_ok = abs(res.sop.mean - sop_exact) <= 3.0 * sop_se
    asr_ok = abs(res.asr.mean - asr) <= 3.0 * res.asr.std_error

    target = diversity_target(R, m, n)
    try:
        slope = diversity_slope(diversity_points(budgets, m, n, exact_product or not homog))
        slope_ok = abs(slope - target) <= SLOPE_REL_TOL * target
    except ValueError:
        slope, slope_ok = None, False

    var, val = "scenario", "-"
    rows = [
        Row(var, val, "sop_analytic_exact", sop_exact),
        Row(var, val, "sop_analytic_approx", "n/a" if sop_approx is None else sop_approx),
        Row(var, val, "sop_mc", res.sop.mean, res.sop.ci95_low, res.sop.ci95_high, ns),
        Row(var, val, "asr_analytic_nats", asr),
        Row(var, val, "asr_analytic_bits", asr / LN2),
        Row(var, val, "asr_mc_nats", res.asr.mean, res.asr.ci95_low, res.asr.ci95_high, ns),
        Row(var, val, "asr_mc_bits", res.asr.mean / LN2, res.asr.ci95_low / LN2,
            res.asr.ci95_high / LN2, ns),
        Row(var, val, "diversity_slope", "n/a" if slope is None else slope),
        Row(var, val, "diversity_target", target),
    ]
    ok = sop_ok and asr_ok and slope_ok

    def mark(flag):
        return "ok" if flag else "MISMATCH"

    approx_txt = "n/a (heterogeneous UAVs)" if sop_approx is None else f"{sop_approx:.6e}"
    slope_txt = "n/a" if slope is None else f"{slope:.3f}"
    lines = [
        f"UAVs R={R}  m={m}  N={n}  homogeneous={homog}  samples={ns}  seed={sim.seed}",
        f"SOP exact product     {sop_exact:.6e}",
        f"SOP power form        {approx_txt}",
        f"SOP Monte Carlo       {res.sop.mean:.6e} +/- {res.sop.std_error:.2e}"
        f"  [{res.sop.ci95_low:.6e}, {res.sop.ci95_high:.6e}]  {mark(sop_ok)}",
        f"ASR analytic (nats)   {asr:.6f}   ({asr / LN2:.6f} bits)",
        f"ASR Monte Carlo       {res.asr.mean:.6f} +/- {res.asr.std_error:.2e}"
        f"  [{res.asr.ci95_low:.6f}, {res.asr.ci95_high:.6f}]  {mark(asr_ok)}",
        f"diversity slope       {slope_txt}   target {target}  {mark(slope_ok)}",
        f"overall               {'PASS' if ok else 'FAIL'}",
    ]
    text = "\n".join(lines) + "\n"
    man = _manifest(scn, None, sim_best, exact_product)
    if out_dir is not None:
        out = Path(out_dir)
        write_text(out / "compare.csv", format_csv(rows, _csv_header(man)))
        write_text(out / "compare.manifest.json", man.to_json())
        write_text(out / "compare.txt", text)
    return CompareResult(text, ok, tuple(rows), man)
