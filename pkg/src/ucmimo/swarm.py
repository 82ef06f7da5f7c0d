"""Binary particle-swarm antenna/user selection under an energy budget.

Particles move over the admissible selection bits (the association mask
flattened); each evaluation runs power control on the implied selection
and scores the resulting sum rate. Energy-infeasible positions score -inf,
so they can never become personal or global bests; the initial swarm is
rejection-sampled (and, under tight budgets, repaired) to feasibility so a
finite best always exists.

All randomness is drawn from streams keyed by (iteration, particle id),
which makes runs reproducible regardless of evaluation order.
"""

import dataclasses
import math
import warnings

import numpy as np

from . import seeding
from .adc_energy import (SelectionTensor, antenna_states_from_bits, ap_energy,
                         repair_selection, single_antenna_costs)
from .association import selection_mask
from .config import EnergyConstants
from .power import PosyRatioProblem, PowerOptError, sca_loop
from .rates import rate_coefficients, rate_terms, sum_rate

V_MAX = 6.0


class SwarmInitError(RuntimeError):
    pass


def inertia_weight(i, i_max):
    """Linear ramp from 0.9 down to 0.2 over the iteration budget."""
    return 0.9 - i * (0.9 - 0.2) / i_max


def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-np.clip(v, -V_MAX, V_MAX)))


@dataclasses.dataclass(eq=False)
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    local_best_position: np.ndarray
    local_best_value: float
    local_best_eta: np.ndarray
    id: int


@dataclasses.dataclass(eq=False)
class SwarmState:
    particles: list
    global_best_position: np.ndarray
    global_best_value: float
    global_best_eta: np.ndarray
    iteration: int


def init_particles(num_particles, mask, profile, budget, seed,
                   constants=None, rejection_cap=200):
    """Bernoulli(1/2) swarm, rejection-sampled to energy feasibility.

    When the budget is tight enough that rejection stalls (probable once
    many users share each AP), the last draw is repaired by clearing
    random active antennas until it fits, so every particle still starts
    feasible. A budget below the cheapest single-antenna draw is rejected
    outright.
    """
    cheapest = float(single_antenna_costs(profile, constants).min())
    if not cheapest < budget:
        raise SwarmInitError(
            f"budget {budget:.3g} W is below the cheapest single-antenna "
            f"draw ({cheapest:.3g} W); no nonzero selection fits")
    n_bits = int(mask.sum())
    particles = []
    for t in range(num_particles):
        rng = seeding.substream(seed, seeding.SWARM_INIT, t)
        for _ in range(rejection_cap):
            bits = (rng.random(n_bits) < 0.5).astype(np.int8)
            states = antenna_states_from_bits(bits, mask)
            if float(ap_energy(states, profile, constants).sum()) < budget:
                break
        else:
            bits = repair_selection(bits, mask, profile, budget, rng,
                                    constants)
        particles.append(Particle(position=bits,
                                  velocity=np.zeros(n_bits),
                                  local_best_position=bits.copy(),
                                  local_best_value=-math.inf,
                                  local_best_eta=None, id=t))
    return SwarmState(particles=particles, global_best_position=None,
                      global_best_value=-math.inf, global_best_eta=None,
                      iteration=0)


def velocity_update(particle, global_best_position, i, i_max, rng):
    """Inertia plus random pulls toward the personal and global bests."""
    psi1, psi2 = rng.uniform(0.0, 2.0, size=2)
    x = particle.position.astype(float)
    v = (inertia_weight(i, i_max) * particle.velocity
         + psi1 * (particle.local_best_position - x)
         + psi2 * (global_best_position - x))
    return np.clip(v, -V_MAX, V_MAX)


def position_update(velocity, rng):
    """Each bit turns on with probability sigmoid(velocity)."""
    return (rng.random(velocity.size) < sigmoid(velocity)).astype(np.int8)


def materialize(bits, mask):
    """Expand flat masked bits to a SelectionTensor (off-mask bits are 0)."""
    d = np.zeros(mask.shape, dtype=np.int8)
    d[mask] = bits
    return SelectionTensor.from_bits(d, mask)


def evaluate_particle(position, instance, profile, mask, budget,
                      power_mode="sca", rng=None, constants=None,
                      sca_v=1e-4, eta_min=1e-6):
    """Score one selection: (sum rate, power coefficients).

    Energy-infeasible selections return (-inf, None). power_mode "sca"
    optimizes eta (falling back to full power with a warning if the inner
    solver fails); "random" draws eta uniformly from rng.
    """
    selection = materialize(np.asarray(position, dtype=np.int8), mask)
    energy = float(ap_energy(selection.antenna_state, profile, constants).sum())
    if not energy < budget:
        return -math.inf, None
    k_users = instance.num_users
    if power_mode == "random":
        eta = rng.uniform(0.0, 1.0, size=k_users)
    elif power_mode == "sca":
        problem = PosyRatioProblem(*rate_coefficients(instance, profile,
                                                      selection))
        try:
            eta = sca_loop(problem, v=sca_v, eta_min=eta_min).eta
        except PowerOptError:
            warnings.warn("power control failed on a candidate selection; "
                          "scoring it at full power", RuntimeWarning)
            eta = np.ones(k_users)
    else:
        raise ValueError(f"unknown power_mode {power_mode!r}")
    objective = sum_rate(rate_terms(instance, profile, selection, eta))
    return objective, eta


@dataclasses.dataclass(eq=False)
class BpsoResult:
    selection: SelectionTensor
    eta: np.ndarray
    objective: float
    trace: np.ndarray        # global best after each iteration
    per_particle: np.ndarray  # (iterations, T) objective of each evaluation
    iterations: int
    evaluations: int

    def write_trace_csv(self, path):
        import csv
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            t = self.per_particle.shape[1]
            writer.writerow(["iteration", "global_best"]
                            + [f"particle_{i}" for i in range(t)])
            for it in range(self.iterations):
                writer.writerow([it + 1, repr(float(self.trace[it]))]
                                + [repr(float(v)) for v in self.per_particle[it]])


def bpso_sca(instance, profile, association, budget, seed, power_mode="sca",
             num_particles=10, max_iterations=50, tolerance=1e-4,
             patience=None, constants=None, sca_v=1e-4, eta_min=1e-6):
    """Run the swarm; returns the best feasible selection found.

    By default all max_iterations are used (num_particles * max_iterations
    evaluations). Passing patience=p enables the plateau stop rule: quit
    once the global best moves by at most `tolerance` over p consecutive
    iterations. p=1 is the aggressive single-stagnation reading, which
    measurably undershoots the exhaustive optimum: the global best is a
    max-statistic and routinely pauses for an iteration mid-search. The
    returned trace is monotone nondecreasing by construction.
    """
    mask = selection_mask(association, instance.antennas_per_ap)
    state = init_particles(num_particles, mask, profile, budget, seed,
                           constants=constants)
    trace = []
    per_particle = []
    for i in range(1, max_iterations + 1):
        state.iteration = i
        values = []
        for p in state.particles:
            rng = seeding.substream(seed, seeding.SWARM_POWER, i, p.id)
            value, eta = evaluate_particle(
                p.position, instance, profile, mask, budget,
                power_mode=power_mode, rng=rng, constants=constants,
                sca_v=sca_v, eta_min=eta_min)
            values.append(value)
            if value > p.local_best_value:
                p.local_best_value = value
                p.local_best_position = p.position.copy()
                p.local_best_eta = eta
        for p in state.particles:  # id order, so ties keep the lowest id
            if p.local_best_value > state.global_best_value:
                state.global_best_value = p.local_best_value
                state.global_best_position = p.local_best_position.copy()
                state.global_best_eta = p.local_best_eta
        trace.append(state.global_best_value)
        per_particle.append(values)
        if patience is not None and len(trace) > patience and all(
                abs(trace[-j - 1] - trace[-j]) <= tolerance
                for j in range(1, patience + 1)):
            break
        if i == max_iterations:
            break
        for p in state.particles:
            p.velocity = velocity_update(
                p, state.global_best_position, i, max_iterations,
                seeding.substream(seed, seeding.SWARM_VELOCITY, i, p.id))
            p.position = position_update(
                p.velocity,
                seeding.substream(seed, seeding.SWARM_POSITION, i, p.id))
    if state.global_best_position is None:
        raise SwarmInitError("no feasible selection was ever evaluated")
    selection = materialize(state.global_best_position, mask)
    return BpsoResult(selection=selection, eta=state.global_best_eta,
                      objective=state.global_best_value,
                      trace=np.array(trace),
                      per_particle=np.array(per_particle),
                      iterations=len(trace),
                      evaluations=len(trace) * num_particles)


@dataclasses.dataclass(eq=False)
class ExhaustiveResult:
    selection: SelectionTensor
    eta: np.ndarray
    objective: float
    best_index: int
    feasible_count: int
    enumerated_count: int


def exhaustive_search(instance, profile, association, budget, sca_v=1e-3,
                      eta_min=1e-6, constants=None, chunk=1 << 14):
    """Enumerate every masked selection and power-optimize the feasible ones.

    Only viable for toys: requires M * N * K <= 20. Energy feasibility is
    screened vectorized; SCA runs on survivors. Ties in the objective keep
    the lowest selection index, so the result is deterministic.
    """
    m_aps = instance.num_aps
    n_ant = instance.antennas_per_ap
    k_users = instance.num_users
    if m_aps * n_ant * k_users > 20:
        raise ValueError("exhaustive enumeration is capped at M*N*K <= 20 bits")
    mask = selection_mask(association, n_ant)
    coords = np.argwhere(mask)
    n_bits = coords.shape[0]
    total = 1 << n_bits

    consts = constants or EnergyConstants()
    n1 = profile.low_res_antennas
    flat_cost = np.empty(m_aps * n_ant)
    switch_col = np.zeros(m_aps * n_ant, dtype=bool)
    for m in range(m_aps):
        for n in range(n_ant):
            j = m * n_ant + n
            flat_cost[j] = (consts.c0 * 2.0 ** profile.bits[m, n]
                            if n < n1 else consts.c2)
            switch_col[j] = 1 <= n < n1
    onehot = np.zeros((n_bits, m_aps * n_ant), dtype=np.int8)
    onehot[np.arange(n_bits), coords[:, 0] * n_ant + coords[:, 1]] = 1

    best_value = -math.inf
    best_idx = -1
    best_eta = None
    feasible = 0
    shifts = np.arange(n_bits, dtype=np.uint32)
    for start in range(0, total, chunk):
        combos = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        bits = ((combos[:, None] >> shifts) & 1).astype(np.int8)
        states = (bits @ onehot) > 0
        energy = states @ flat_cost
        if switch_col.any():
            sw = states[:, switch_col].reshape(len(combos), m_aps, -1)
            energy = energy + consts.c1_watt * sw.any(axis=2).sum(axis=1)
        for row in np.flatnonzero(energy < budget):
            feasible += 1
            value, eta = evaluate_particle(
                bits[row], instance, profile, mask, budget,
                power_mode="sca", constants=constants, sca_v=sca_v,
                eta_min=eta_min)
            if value > best_value:
                best_value = value
                best_idx = int(combos[row])
                best_eta = eta
    if best_idx < 0:
        raise SwarmInitError("no selection fits the energy budget")
    flat = ((best_idx >> shifts) & 1).astype(np.int8)
    return ExhaustiveResult(selection=materialize(flat, mask), eta=best_eta,
                            objective=best_value, best_index=best_idx,
                            feasible_count=feasible, enumerated_count=total)
