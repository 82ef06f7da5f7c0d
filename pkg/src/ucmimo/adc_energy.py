"""ADC resolution profile, quantization impairment, and power consumption.

Antennas 1..N1 of every AP carry low-resolution ADCs with b = 1..N1 bits
(antenna i gets i bits); the remaining N - N1 antennas are treated as
quantization-free (impairment factor exactly 1). The additive quantization
noise model maps b bits to a gain alpha in (0, 1]: exact tabulated values
up to 5 bits, the uniform-quantizer asymptote 1 - (pi sqrt(3)/2) 4^-b
beyond.

Power model per AP: each active low-resolution antenna costs c0 * 2^b W,
activity on any of the low-resolution antennas 2..N1 adds one switching
overhead of c1 W, and each active high-resolution antenna costs c2 W.
Note the literal trigger set for the switching term: antenna 1 alone never
pays it. That asymmetry is kept deliberately; see the README.
"""

import dataclasses
import math

import numpy as np

from .config import EnergyConstants

# Exact distortion factors for uniform scalar MMSE quantization, 1..5 bits.
_ALPHA_TABLE = {1: 0.6366, 2: 0.8825, 3: 0.96546, 4: 0.990503, 5: 0.997501}

HIGH_RES_BITS = 32  # marker only; energy and impairment never use 2^b for these


def impairment_factor(bits):
    """AQNM gain alpha for a b-bit ADC; tabulated for b <= 5."""
    b = int(bits)
    if b < 1:
        raise ValueError("ADC resolution must be at least 1 bit")
    if b <= 5:
        return _ALPHA_TABLE[b]
    return 1.0 - (math.pi * math.sqrt(3.0) / 2.0) * 4.0 ** (-b)


@dataclasses.dataclass(eq=False)
class AdcProfile:
    """Per-antenna ADC layout of all APs.

    bits[m, n] holds the resolution (HIGH_RES_BITS marks quantization-free
    antennas); alpha[m, n] the impairment factor, exactly 1.0 for
    high-resolution antennas.
    """

    bits: np.ndarray
    alpha: np.ndarray
    low_res_antennas: int

    @classmethod
    def from_counts(cls, num_aps, antennas_per_ap, low_res_antennas):
        n1 = int(low_res_antennas)
        if not 0 <= n1 <= antennas_per_ap:
            raise ValueError("low_res_antennas must lie in [0, antennas_per_ap]")
        row_bits = np.full(antennas_per_ap, HIGH_RES_BITS, dtype=int)
        row_alpha = np.ones(antennas_per_ap)
        for i in range(n1):
            row_bits[i] = i + 1
            row_alpha[i] = impairment_factor(i + 1)
        return cls(bits=np.tile(row_bits, (num_aps, 1)),
                   alpha=np.tile(row_alpha, (num_aps, 1)),
                   low_res_antennas=n1)

    @classmethod
    def from_config(cls, cfg):
        return cls.from_counts(cfg.num_aps, cfg.antennas_per_ap,
                               cfg.low_res_antennas)


@dataclasses.dataclass(eq=False)
class SelectionTensor:
    """Binary antenna/user selection d[m, n, k] with derived antenna states.

    antenna_state[m, n] = 1 iff any user is decoded on that antenna (the OR
    over k of d), recomputed at construction so it can never drift from d.
    d must be zero outside the association mask.
    """

    d: np.ndarray
    antenna_state: np.ndarray
    mask: np.ndarray

    @classmethod
    def from_bits(cls, d, mask):
        d = np.asarray(d)
        mask = np.asarray(mask, dtype=bool)
        if d.shape != mask.shape:
            raise ValueError("selection and mask shapes differ")
        d = (d != 0).astype(np.int8)
        if np.any(d.astype(bool) & ~mask):
            raise ValueError("selection uses antenna/user pairs outside the mask")
        return cls(d=d, antenna_state=d.any(axis=2).astype(np.int8), mask=mask)

    @classmethod
    def all_on(cls, mask):
        return cls.from_bits(np.asarray(mask, dtype=np.int8), mask)

    @property
    def shape(self):
        return self.d.shape

    def to_json(self, path=None):
        import json
        doc = {"d": self.d.tolist(), "antenna_state": self.antenna_state.tolist()}
        if path is None:
            return json.dumps(doc)
        with open(path, "w") as fh:
            json.dump(doc, fh)
        return None


def antenna_states_from_bits(flat_bits, mask):
    """OR per antenna of a flat masked selection vector; returns (M, N)."""
    m, n, _ = mask.shape
    d = np.zeros(mask.shape, dtype=np.int8)
    d[mask] = flat_bits
    return d.any(axis=2).astype(np.int8)


def ap_energy(antenna_state, profile, constants=None):
    """Per-AP power draw (W) for given antenna on/off states (M, N)."""
    consts = constants or EnergyConstants()
    state = np.asarray(antenna_state)
    if state.ndim == 1:
        state = state[None, :]
    n1 = profile.low_res_antennas
    low = state[:, :n1].astype(float)
    high = state[:, n1:].astype(float)
    adc = consts.c0 * (low * 2.0 ** profile.bits[:, :n1]).sum(axis=1)
    # Switching overhead fires on activity among low-res antennas 2..N1 only.
    switching = consts.c1_watt * state[:, 1:n1].any(axis=1).astype(float)
    rf = consts.c2 * high.sum(axis=1)
    return adc + switching + rf


@dataclasses.dataclass
class EnergyReport:
    per_ap_watt: np.ndarray
    total_watt: float
    budget_watt: float
    feasible: bool


def system_energy(selection, profile, budget_watt=math.inf, constants=None):
    """Total power draw of a selection and its strict-budget feasibility."""
    per_ap = ap_energy(selection.antenna_state, profile, constants)
    total = float(per_ap.sum())
    return EnergyReport(per_ap_watt=per_ap, total_watt=total,
                        budget_watt=float(budget_watt),
                        feasible=total < budget_watt)


def max_system_energy(num_aps, profile, constants=None):
    """Power draw with every antenna of every AP switched on."""
    state = np.ones_like(profile.bits[:num_aps])
    return float(ap_energy(state, profile, constants).sum())


def single_antenna_costs(profile, constants=None):
    """Power draw of an AP running exactly one antenna, per antenna slot.

    The minimum of this vector is the cheapest nonzero system draw, which
    lower-bounds any budget that admits a selection at all.
    """
    consts = constants or EnergyConstants()
    n1 = profile.low_res_antennas
    bits_row = np.asarray(profile.bits[0], dtype=float)
    idx = np.arange(bits_row.size)
    cost = np.where(idx < n1, consts.c0 * 2.0 ** bits_row, consts.c2)
    return cost + consts.c1_watt * ((idx >= 1) & (idx < n1))


def repair_selection(bits, mask, profile, budget, rng, constants=None):
    """Clear random active antenna columns until the draw fits the budget.

    Fallback for budgets tight enough that fair-coin draws are practically
    never feasible (with L served users per AP an antenna is active with
    probability 1 - 2^-L, so rejection stalls once M grows). Should the
    removal path bottom out at the empty selection, the cheapest single
    antenna is switched on instead; callers must verify beforehand that
    one affordable antenna exists.
    """
    d = np.zeros(mask.shape, dtype=np.int8)
    d[mask] = bits
    while True:
        state = d.any(axis=2)
        if float(ap_energy(state, profile, constants).sum()) < budget:
            break
        cols = np.argwhere(state)
        m, n = cols[rng.integers(len(cols))]
        d[m, n, :] = 0
    if not d.any():
        n = int(np.argmin(single_antenna_costs(profile, constants)))
        m = int(rng.integers(mask.shape[0]))
        d[m, n, mask[m, n]] = 1
    return d[mask]
