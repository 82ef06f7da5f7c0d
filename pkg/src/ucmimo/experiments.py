"""Scheme menu, end-to-end runs, sweeps, and study drivers.

A scheme pairs an antenna-selection mode with a power-control mode:

    UC-BPSO-SCA-GP   swarm-selected antennas, SCA power control
    UC-RAS-SCA-GP    random feasible antennas, SCA power control
    UC-BPSO-RPC      swarm-selected antennas, random power
    UC-RAS-RPC       random feasible antennas, random power
    CF-SCA-GP        every antenna on, full cooperation, SCA power control
    CF-RPC           every antenna on, full cooperation, random power

UC schemes live under the strict energy budget (fraction of the all-on
draw); CF schemes are the unconstrained baseline and ignore the budget.
All randomness derives from the run seed, with optimizer streams keyed by
the scheme's menu position so paired schemes share the network but not
each other's draws. CSV output uses shortest round-trip float formatting,
so identical config and seed reproduce identical bytes.
"""

import csv
import dataclasses
import json
import math
import time

import numpy as np

from . import seeding
from .adc_energy import (AdcProfile, SelectionTensor, ap_energy,
                         antenna_states_from_bits, max_system_energy,
                         repair_selection, single_antenna_costs,
                         system_energy)
from .association import Association, select_users, selection_mask
from .config import EnergyConstants, ScenarioConfig
from .network import build_network
from .power import PosyRatioProblem, sca_loop
from .rates import (effective_sum_rate, rate_coefficients, rate_terms, sree,
                    sum_rate)
from .swarm import bpso_sca, exhaustive_search


@dataclasses.dataclass(frozen=True)
class SchemeSpec:
    name: str
    antenna_mode: str   # "bpso" | "random" | "all-on"
    power_mode: str     # "sca" | "random"
    user_centric: bool


SCHEMES = {
    "UC-BPSO-SCA-GP": SchemeSpec("UC-BPSO-SCA-GP", "bpso", "sca", True),
    "UC-RAS-SCA-GP": SchemeSpec("UC-RAS-SCA-GP", "random", "sca", True),
    "UC-BPSO-RPC": SchemeSpec("UC-BPSO-RPC", "bpso", "random", True),
    "UC-RAS-RPC": SchemeSpec("UC-RAS-RPC", "random", "random", True),
    "CF-SCA-GP": SchemeSpec("CF-SCA-GP", "all-on", "sca", False),
    "CF-RPC": SchemeSpec("CF-RPC", "all-on", "random", False),
}

_SCHEME_ID = {name: i for i, name in enumerate(SCHEMES)}


@dataclasses.dataclass(eq=False)
class RunRecord:
    scheme: str
    seed: int
    budget_fraction: float
    sum_rate_bits: float
    energy_watt: float
    budget_watt: float
    sree: float
    effective_sum_rate: float
    feasible: bool
    iterations: int
    evaluations: int
    rates: np.ndarray
    eta: np.ndarray
    trace: np.ndarray
    wall_seconds: float

    CSV_FIELDS = ("scheme", "seed", "budget_fraction", "sum_rate_bits",
                  "energy_watt", "budget_watt", "sree", "effective_sum_rate",
                  "feasible", "iterations", "evaluations")

    def csv_values(self):
        out = []
        for name in self.CSV_FIELDS:
            val = getattr(self, name)
            if isinstance(val, bool):
                out.append(str(int(val)))
            elif isinstance(val, float):
                out.append(repr(float(val)))
            else:
                out.append(str(val))
        return out


def _draw_feasible_selection(mask, profile, budget, rng, constants=None,
                             cap=200):
    """Bernoulli(1/2) selection, redrawn until it fits the budget.

    Falls back to repairing the last draw (random active antennas cleared)
    when rejection stalls, mirroring the swarm initializer.
    """
    cheapest = float(single_antenna_costs(profile, constants).min())
    if not cheapest < budget:
        raise RuntimeError(
            f"budget {budget:.3g} W is below the cheapest single-antenna "
            f"draw ({cheapest:.3g} W); no nonzero selection fits")
    n_bits = int(mask.sum())
    for _ in range(cap):
        bits = (rng.random(n_bits) < 0.5).astype(np.int8)
        states = antenna_states_from_bits(bits, mask)
        if float(ap_energy(states, profile, constants).sum()) < budget:
            break
    else:
        bits = repair_selection(bits, mask, profile, budget, rng, constants)
    d = np.zeros(mask.shape, dtype=np.int8)
    d[mask] = bits
    return SelectionTensor.from_bits(d, mask)


def run_scheme(cfg, scheme_name, budget_fraction, seed, constants=None,
               num_particles=10, max_iterations=50, bpso_tolerance=1e-4,
               bpso_patience=None, sca_v=1e-4, sree_bandwidth_scaled=False):
    """Execute one scheme on one realized network; returns a RunRecord."""
    cfg.validate()
    if scheme_name not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme_name!r}; "
                         f"choose from {sorted(SCHEMES)}")
    scheme = SCHEMES[scheme_name]
    sid = _SCHEME_ID[scheme_name]
    t0 = time.perf_counter()

    instance = build_network(cfg, seed)
    profile = AdcProfile.from_config(cfg)
    if scheme.user_centric:
        assoc = select_users(instance.gamma, cfg.users_per_ap)
    else:
        assoc = Association(theta=np.ones_like(instance.gamma, dtype=int),
                            users_per_ap=cfg.users_per_ap)
    mask = selection_mask(assoc, cfg.antennas_per_ap)
    e_max = max_system_energy(cfg.num_aps, profile, constants)
    budget = budget_fraction * e_max if scheme.user_centric else math.inf

    iterations = 0
    evaluations = 0
    trace = np.array([])
    if scheme.antenna_mode == "bpso":
        result = bpso_sca(instance, profile, assoc, budget, seed,
                          power_mode=scheme.power_mode,
                          num_particles=num_particles,
                          max_iterations=max_iterations,
                          tolerance=bpso_tolerance, patience=bpso_patience,
                          constants=constants, sca_v=sca_v)
        selection, eta = result.selection, result.eta
        iterations, evaluations = result.iterations, result.evaluations
        trace = result.trace
    else:
        if scheme.antenna_mode == "random":
            rng = seeding.substream(seed, seeding.ANTENNA_DRAW, sid)
            selection = _draw_feasible_selection(mask, profile, budget, rng,
                                                 constants)
        elif scheme.antenna_mode == "all-on":
            selection = SelectionTensor.all_on(mask)
        else:
            raise ValueError(f"unknown antenna mode {scheme.antenna_mode!r}")
        if scheme.power_mode == "sca":
            problem = PosyRatioProblem(*rate_coefficients(instance, profile,
                                                          selection))
            sca = sca_loop(problem, v=sca_v)
            eta = sca.eta
            iterations = sca.iterations
            evaluations = sca.iterations
            trace = sca.trace
        else:
            rng = seeding.substream(seed, seeding.POWER_DRAW, sid)
            eta = rng.uniform(0.0, 1.0, size=cfg.num_users)

    breakdown = rate_terms(instance, profile, selection, eta)
    rate_total = sum_rate(breakdown)
    report = system_energy(selection, profile, budget, constants)
    if scheme.user_centric and not report.feasible:
        raise RuntimeError(
            f"scheme {scheme_name} reported an over-budget selection: "
            f"{report.total_watt} W against {budget} W")
    efficiency = sree(rate_total, report.total_watt)
    if sree_bandwidth_scaled:
        efficiency *= cfg.bandwidth_hz
    return RunRecord(scheme=scheme_name, seed=int(seed),
                     budget_fraction=float(budget_fraction),
                     sum_rate_bits=rate_total,
                     energy_watt=report.total_watt,
                     budget_watt=float(budget), sree=efficiency,
                     effective_sum_rate=effective_sum_rate(
                         rate_total, cfg.users_per_ap),
                     feasible=bool(report.feasible),
                     iterations=iterations, evaluations=evaluations,
                     rates=breakdown.rate_bits, eta=np.asarray(eta),
                     trace=trace,
                     wall_seconds=time.perf_counter() - t0)


_AXES = ("M", "K", "L", "kappa")


def _apply_axis(cfg, axis, value):
    if axis == "M":
        return cfg.replace(num_aps=int(value))
    if axis == "K":
        # an AP serving "up to L" users serves everyone when K < L
        return cfg.replace(num_users=int(value),
                           users_per_ap=min(cfg.users_per_ap, int(value)))
    if axis == "L":
        return cfg.replace(users_per_ap=int(value))
    if axis == "kappa":
        # kappa is the high-resolution fraction N2/N
        n = cfg.antennas_per_ap
        n2 = int(round(float(value) * n))
        return cfg.replace(low_res_antennas=n - n2)
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {_AXES}")


@dataclasses.dataclass(eq=False)
class SweepResult:
    axis: str
    values: list
    schemes: list
    num_seeds: int
    rows: list  # (value, scheme, seed_index, RunRecord)

    def records(self, value, scheme):
        return [r for v, s, _, r in self.rows if v == value and s == scheme]

    def metric(self, value, scheme, name):
        return np.array([getattr(r, name) for r in self.records(value, scheme)])

    def summary(self, name="sree"):
        """Per (value, scheme) mean and 95% half-width of a metric."""
        from scipy import stats
        out = {}
        for v in self.values:
            for s in self.schemes:
                x = self.metric(v, s, name)
                hw = 0.0
                if x.size > 1:
                    hw = float(stats.t.ppf(0.975, x.size - 1)
                               * x.std(ddof=1) / math.sqrt(x.size))
                out[(v, s)] = (float(x.mean()), hw)
        return out


def sweep(cfg, axis, values, schemes, budget_fraction, num_seeds,
          base_seed=None, constants=None, **run_kwargs):
    """Cartesian sweep; schemes share per-point seeds so runs are paired."""
    if base_seed is None:
        base_seed = cfg.rng_seed
    unknown = [s for s in schemes if s not in SCHEMES]
    if unknown:
        raise ValueError(f"unknown schemes: {unknown}")
    rows = []
    for p_idx, value in enumerate(values):
        point_cfg = _apply_axis(cfg, axis, value)
        for s_idx in range(num_seeds):
            run_seed = seeding.derive_seed(base_seed, seeding.SWEEP,
                                           p_idx, s_idx)
            for name in schemes:
                rec = run_scheme(point_cfg, name, budget_fraction, run_seed,
                                 constants=constants, **run_kwargs)
                rows.append((value, name, s_idx, rec))
    return SweepResult(axis=axis, values=list(values), schemes=list(schemes),
                       num_seeds=num_seeds, rows=rows)


def convergence_study(cfg, axis, values, seed, budget_fraction=0.75,
                      constants=None, **run_kwargs):
    """Global-best trace of the swarm at each axis point.

    Returns rows (axis, value, iteration, objective). Raises if any trace
    ever decreases, which would falsify the best-so-far bookkeeping.
    """
    rows = []
    for value in values:
        point_cfg = _apply_axis(cfg, axis, value)
        rec = run_scheme(point_cfg, "UC-BPSO-SCA-GP", budget_fraction, seed,
                         constants=constants, **run_kwargs)
        prev = -math.inf
        for it, obj in enumerate(rec.trace, start=1):
            if obj < prev:
                raise AssertionError("swarm best decreased between iterations")
            prev = obj
            rows.append((axis, value, it, float(obj)))
    return rows


def oracle_toy_config(seed=0):
    """The largest scenario the exhaustive oracle can enumerate."""
    return ScenarioConfig(num_aps=3, num_users=3, antennas_per_ap=2,
                          low_res_antennas=1, users_per_ap=3, rng_seed=seed)


@dataclasses.dataclass(eq=False)
class OracleRecord:
    seed: int
    budget_fraction: float
    exhaustive_objective: float
    bpso_objective: float
    ratio: float
    feasible_count: int
    enumerated_count: int
    bpso_iterations: int
    sca_evaluations: int
    iterations_to_98pct: int
    trace: np.ndarray


def oracle_study(seed, cfg=None, budget_fraction=0.75, sca_v=1e-3,
                 num_particles=10, max_iterations=50, bpso_tolerance=1e-4,
                 constants=None):
    """Exhaustive optimum vs the swarm on the same toy instance.

    Both sides run power control at the same (reduced) tolerance so the
    comparison is apples to apples.
    """
    cfg = (cfg or oracle_toy_config(seed)).validate()
    instance = build_network(cfg, seed)
    profile = AdcProfile.from_config(cfg)
    assoc = select_users(instance.gamma, cfg.users_per_ap)
    budget = budget_fraction * max_system_energy(cfg.num_aps, profile,
                                                 constants)
    oracle = exhaustive_search(instance, profile, assoc, budget, sca_v=sca_v,
                               constants=constants)
    swarm = bpso_sca(instance, profile, assoc, budget, seed, power_mode="sca",
                     num_particles=num_particles,
                     max_iterations=max_iterations,
                     tolerance=bpso_tolerance, constants=constants,
                     sca_v=sca_v)
    ratio = (swarm.objective / oracle.objective
             if oracle.objective > 0 else math.inf)
    hits = np.flatnonzero(swarm.trace >= 0.98 * oracle.objective)
    return OracleRecord(seed=int(seed), budget_fraction=float(budget_fraction),
                        exhaustive_objective=oracle.objective,
                        bpso_objective=swarm.objective, ratio=float(ratio),
                        feasible_count=oracle.feasible_count,
                        enumerated_count=oracle.enumerated_count,
                        bpso_iterations=swarm.iterations,
                        sca_evaluations=swarm.evaluations,
                        iterations_to_98pct=int(hits[0]) + 1 if hits.size else -1,
                        trace=swarm.trace)


def rate_validation_cases(seed, tau_p):
    """Small fixed scenario for closed-form vs Monte Carlo checks.

    Four APs with one mid-AP antenna disabled, three users at staggered
    power, serving load 2. tau_p=10 gives orthogonal pilots; tau_p=2
    forces a pilot collision among the three users.
    """
    cfg = ScenarioConfig(num_aps=4, num_users=3, antennas_per_ap=4,
                         low_res_antennas=3, users_per_ap=2,
                         pilot_samples=tau_p, rng_seed=seed).validate()
    instance = build_network(cfg, seed)
    profile = AdcProfile.from_config(cfg)
    assoc = select_users(instance.gamma, cfg.users_per_ap)
    mask = selection_mask(assoc, cfg.antennas_per_ap)
    d = mask.astype(np.int8)
    d[0, 1, :] = 0
    selection = SelectionTensor.from_bits(d, mask)
    eta = np.array([1.0, 0.7, 0.4])
    return instance, profile, selection, eta


def rate_validation_study(seed, trials=100000):
    """Compare every closed-form rate term against Monte Carlo estimates.

    Runs both pilot regimes (orthogonal and colliding) for each user of the
    fixed validation scenario. Returns rows of dicts; the checked column
    marks the terms whose 3-standard-error agreement the study asserts.
    """
    from .rates import closed_form_terms, mc_estimate_terms
    checked = ("ds_sq", "bu_iui", "gn", "qn")
    rows = []
    for r_idx, (regime, tau_p) in enumerate((("orthogonal", 10), ("reuse", 2))):
        instance, profile, selection, eta = rate_validation_cases(seed, tau_p)
        for k in range(instance.num_users):
            closed = closed_form_terms(instance, profile, selection, eta, k)
            mc_seed = seeding.derive_seed(seed, seeding.MC_TERMS, r_idx, k)
            mc = mc_estimate_terms(instance, profile, selection, eta, k,
                                   trials, mc_seed, check_decomposition=True)
            ds_closed = {"ds_sq": closed.ds_sq, "bu": closed.bu,
                         "iui": closed.iui, "bu_iui": closed.bu_iui,
                         "gn": closed.gn, "qn": closed.qn}
            for term, value in ds_closed.items():
                est = getattr(mc, term)
                if est.se > 0:
                    z = (value - est.mean) / est.se
                elif abs(value - est.mean) < 1e-12:
                    z = 0.0
                else:
                    z = math.inf
                rows.append({"regime": regime, "user": k, "term": term,
                             "closed": value, "mc_mean": est.mean,
                             "mc_se": est.se, "z": z,
                             "checked": term in checked})
    return rows


def write_validation_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("regime", "user", "term", "closed", "mc_mean",
                         "mc_se", "z", "checked"))
        for r in rows:
            writer.writerow([r["regime"], r["user"], r["term"],
                             repr(float(r["closed"])),
                             repr(float(r["mc_mean"])),
                             repr(float(r["mc_se"])), repr(float(r["z"])),
                             str(int(r["checked"]))])


def write_run_csv(path, rows):
    """Rows of (axis, axis_value, RunRecord); deterministic bytes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("axis", "axis_value") + RunRecord.CSV_FIELDS)
        for axis, value, rec in rows:
            writer.writerow([axis, value] + rec.csv_values())


def write_trace_csv(path, rows):
    """Rows of (axis, value, iteration, objective)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("axis", "axis_value", "iteration", "objective"))
        for axis, value, it, obj in rows:
            writer.writerow([axis, value, it, repr(float(obj))])


def write_manifest(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
