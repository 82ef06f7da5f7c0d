"""Quantizer impairment factors and the power-draw model."""

import math

import numpy as np
import pytest

from ucmimo.adc_energy import (HIGH_RES_BITS, AdcProfile, EnergyConstants,
                               SelectionTensor, antenna_states_from_bits,
                               ap_energy, impairment_factor,
                               max_system_energy, repair_selection,
                               single_antenna_costs, system_energy)

TABLE = {1: 0.6366, 2: 0.8825, 3: 0.96546, 4: 0.990503, 5: 0.997501}


def test_tabulated_impairment_factors():
    for b, alpha in TABLE.items():
        assert impairment_factor(b) == alpha


def test_impairment_formula_beyond_table():
    # 1 - (pi sqrt(3) / 2) 4^-b for b > 5
    for b in (6, 8, 12):
        hand = 1.0 - (math.pi * math.sqrt(3.0) / 2.0) * 4.0 ** (-b)
        assert impairment_factor(b) == pytest.approx(hand, rel=1e-15)
    # the formula nearly meets the table at its edge
    hand5 = 1.0 - (math.pi * math.sqrt(3.0) / 2.0) * 4.0 ** (-5)
    assert abs(hand5 - TABLE[5]) < 2e-4
    assert impairment_factor(HIGH_RES_BITS) == 1.0


def test_impairment_rejects_nonpositive_bits():
    for b in (0, -1):
        with pytest.raises(ValueError):
            impairment_factor(b)


def test_profile_bit_ladder_and_high_res_marker():
    p = AdcProfile.from_counts(3, 4, 3)
    assert p.bits.shape == (3, 4)
    np.testing.assert_array_equal(p.bits[0], [1, 2, 3, HIGH_RES_BITS])
    np.testing.assert_array_equal(p.bits[0], p.bits[2])
    # antenna n runs an (n+1)-bit converter below the split, ideal above
    np.testing.assert_allclose(p.alpha[0, :3],
                               [TABLE[1], TABLE[2], TABLE[3]], rtol=0)
    assert p.alpha[0, 3] == 1.0
    assert p.low_res_antennas == 3


def test_profile_all_high_res():
    p = AdcProfile.from_counts(2, 4, 0)
    assert (p.bits == HIGH_RES_BITS).all()
    assert (p.alpha == 1.0).all()


PROFILE = AdcProfile.from_counts(1, 4, 3)


def test_ap_energy_hand_values():
    consts = EnergyConstants()
    # every antenna on: 3e-5 (2 + 4 + 8) + 0.002 + 0.1229
    on = ap_energy(np.array([[1, 1, 1, 1]]), PROFILE, consts)
    assert on[0] == pytest.approx(0.12532, rel=1e-12)
    # only the 1-bit antenna: no switch cost, no high-res chain
    one_bit = ap_energy(np.array([[1, 0, 0, 0]]), PROFILE, consts)
    assert one_bit[0] == pytest.approx(6e-5, rel=1e-12)
    # only antenna 2 (2-bit): switch cost applies
    two_bit = ap_energy(np.array([[0, 1, 0, 0]]), PROFILE, consts)
    assert two_bit[0] == pytest.approx(3e-5 * 4 + 0.002, rel=1e-12)
    # 1-bit plus the high-res antenna skips the switch cost as well
    ends = ap_energy(np.array([[1, 0, 0, 1]]), PROFILE, consts)
    assert ends[0] == pytest.approx(6e-5 + 0.1229, rel=1e-12)
    off = ap_energy(np.array([[0, 0, 0, 0]]), PROFILE, consts)
    assert off[0] == 0.0


def test_switch_cost_charged_once_per_ap():
    consts = EnergyConstants()
    both = ap_energy(np.array([[0, 1, 1, 0]]), PROFILE, consts)[0]
    parts = (ap_energy(np.array([[0, 1, 0, 0]]), PROFILE, consts)[0]
             + ap_energy(np.array([[0, 0, 1, 0]]), PROFILE, consts)[0])
    assert both == pytest.approx(parts - consts.c1_watt, rel=1e-12)


def test_max_system_energy_scales_with_ap_count():
    p2 = AdcProfile.from_counts(2, 4, 3)
    assert max_system_energy(2, p2) == pytest.approx(2 * 0.12532, rel=1e-12)
    tiny = AdcProfile.from_counts(2, 2, 1)
    # per AP: 3e-5 * 2 + 0.1229, no switch cost with a single low-res antenna
    assert max_system_energy(2, tiny) == pytest.approx(0.24592, rel=1e-12)


def test_budget_is_strict():
    mask = np.ones((1, 4, 2), dtype=bool)
    sel = SelectionTensor.all_on(mask)
    total = system_energy(sel, PROFILE).total_watt
    assert system_energy(sel, PROFILE, budget_watt=total).feasible is False
    assert system_energy(sel, PROFILE, budget_watt=total + 1e-12).feasible
    assert system_energy(sel, PROFILE, budget_watt=total - 1e-12).feasible \
        is False


def test_energy_monotone_in_activation():
    rng = np.random.default_rng(0)
    p = AdcProfile.from_counts(3, 4, 3)
    for _ in range(200):
        state = rng.integers(0, 2, size=(3, 4))
        e0 = ap_energy(state, p).sum()
        grown = state.copy()
        off = np.argwhere(grown == 0)
        if off.size == 0:
            continue
        i, j = off[rng.integers(len(off))]
        grown[i, j] = 1
        assert ap_energy(grown, p).sum() > e0


def test_selection_tensor_mask_rules():
    mask = np.zeros((2, 3, 2), dtype=bool)
    mask[0, :, 0] = True
    mask[1, :, 1] = True
    sel = SelectionTensor.all_on(mask)
    np.testing.assert_array_equal(sel.d.astype(bool), mask)
    np.testing.assert_array_equal(sel.antenna_state, mask.any(axis=2))
    bad = np.ones((2, 3, 2), dtype=np.int8)
    with pytest.raises(ValueError):
        SelectionTensor.from_bits(bad, mask)
    with pytest.raises(ValueError):
        SelectionTensor.from_bits(np.ones((1, 3, 2), dtype=np.int8), mask)


def test_antenna_state_is_or_over_users():
    # Eq-style consistency: an antenna is on iff some served user rides it
    rng = np.random.default_rng(1)
    mask = np.ones((2, 3, 4), dtype=bool)
    mask[1, :, 0] = False
    for _ in range(10000):
        d = (rng.random(mask.shape) < 0.4) & mask
        sel = SelectionTensor.from_bits(d.astype(np.int8), mask)
        np.testing.assert_array_equal(sel.antenna_state, d.any(axis=2))
        np.testing.assert_array_equal(
            antenna_states_from_bits(d[mask].astype(np.int8), mask),
            d.any(axis=2))


def test_single_antenna_costs_default_layout():
    np.testing.assert_allclose(single_antenna_costs(PROFILE),
                               [6e-5, 0.00212, 0.00224, 0.1229], rtol=1e-12)


def antenna_bits_to_tensor(bits, mask):
    d = np.zeros(mask.shape, dtype=np.int8)
    d[mask] = bits
    return d


def test_repair_clears_columns_until_feasible():
    mask = np.ones((2, 4, 3), dtype=bool)
    p = AdcProfile.from_counts(2, 4, 3)
    full = np.ones(int(mask.sum()), dtype=np.int8)
    rng = np.random.default_rng(5)
    bits = repair_selection(full, mask, p, 0.01, rng)
    sel = SelectionTensor.from_bits(antenna_bits_to_tensor(bits, mask), mask)
    assert system_energy(sel, p, budget_watt=0.01).feasible
    # repair only ever clears, never sets
    assert (bits <= full).all()


def test_repair_keeps_a_cheapest_antenna_when_everything_must_go():
    mask = np.ones((2, 4, 3), dtype=bool)
    p = AdcProfile.from_counts(2, 4, 3)
    full = np.ones(int(mask.sum()), dtype=np.int8)
    budget = 7e-5  # only the 1-bit antenna fits
    bits = repair_selection(full, mask, p, budget, np.random.default_rng(2))
    d = antenna_bits_to_tensor(bits, mask)
    state = d.any(axis=2)
    assert state.sum() == 1
    assert float(ap_energy(state, p).sum()) == pytest.approx(6e-5, rel=1e-12)


def test_repair_deterministic_under_seeded_rng():
    mask = np.ones((3, 4, 2), dtype=bool)
    p = AdcProfile.from_counts(3, 4, 3)
    full = np.ones(int(mask.sum()), dtype=np.int8)
    a = repair_selection(full, mask, p, 0.05, np.random.default_rng(7))
    b = repair_selection(full, mask, p, 0.05, np.random.default_rng(7))
    np.testing.assert_array_equal(a, b)


def test_selection_json_round_trip(tmp_path):
    mask = np.ones((2, 4, 2), dtype=bool)
    rng = np.random.default_rng(3)
    d = (rng.random(mask.shape) < 0.5) & mask
    sel = SelectionTensor.from_bits(d.astype(np.int8), mask)
    path = tmp_path / "selection.json"
    sel.to_json(str(path))
    import json
    with open(path) as fh:
        payload = json.load(fh)
    np.testing.assert_array_equal(np.asarray(payload["d"]), sel.d)
