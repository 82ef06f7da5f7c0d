"""Closed-form rate expressions, term split, and the Monte Carlo check."""

import math

import numpy as np
import pytest

from ucmimo.adc_energy import AdcProfile, SelectionTensor
from ucmimo.config import ScenarioConfig
from ucmimo.network import NetworkInstance, build_network
from ucmimo.power import PosyRatioProblem, p3_objective
from ucmimo.rates import (closed_form_terms, effective_sum_rate,
                          mc_estimate_terms, rate_coefficients, rate_terms,
                          sree, sum_rate)


def single_user_instance(beta=2.0, tau_rho=10.0, rho_u=3.0):
    den = tau_rho * beta + 1.0
    return NetworkInstance(
        ap_pos=np.zeros((1, 2)), user_pos=np.zeros((1, 2)),
        beta=np.array([[beta]]),
        gamma=np.array([[tau_rho * beta ** 2 / den]]),
        c_coef=np.array([[math.sqrt(tau_rho) * beta / den]]),
        pilot_gram=np.eye(1), pilot_index=np.zeros(1, dtype=int),
        antennas_per_ap=1, tau_p=10, rho_p=tau_rho / 10.0, rho_u=rho_u)


def all_on(instance):
    shape = (instance.num_aps, instance.antennas_per_ap, instance.num_users)
    return SelectionTensor.all_on(np.ones(shape, dtype=bool))


def test_single_user_single_antenna_hand_rate():
    inst = single_user_instance()
    assert inst.gamma[0, 0] == pytest.approx(1.9047619047619047, rel=1e-15)
    profile = AdcProfile.from_counts(1, 1, 1)  # one 1-bit antenna
    bd = rate_terms(inst, profile, all_on(inst), np.array([0.8]))
    # scalar formula: signal rho eta (a g)^2 over
    # rho eta a^2 g b + a^2 g + a(1-a) g (rho eta (b + g) + 1)
    a, g, b, rho, eta = 0.6366, 40.0 / 21.0, 2.0, 3.0, 0.8
    sig = rho * eta * (a * g) ** 2
    den = (rho * eta * a * a * g * b + a * a * g
           + a * (1 - a) * g * (rho * eta * (b + g) + 1))
    assert bd.rate_bits[0] == pytest.approx(math.log2(1 + sig / den),
                                            rel=1e-14)
    assert bd.rate_bits[0] == pytest.approx(0.4751239912452456, rel=1e-13)
    assert sum_rate(bd) == pytest.approx(bd.rate_bits[0], rel=1e-15)


def test_ideal_adc_removes_quantization_noise():
    inst = single_user_instance()
    profile = AdcProfile.from_counts(1, 1, 0)  # high-res only
    terms = closed_form_terms(inst, profile, all_on(inst), np.array([0.8]), 0)
    assert terms.qn == 0.0
    bd = rate_terms(inst, profile, all_on(inst), np.array([0.8]))
    # alpha = 1: SINR = rho eta g^2 / (rho eta g b + g)
    g, b, rho, eta = 40.0 / 21.0, 2.0, 3.0, 0.8
    assert bd.rate_bits[0] == pytest.approx(
        math.log2(1 + rho * eta * g ** 2 / (rho * eta * g * b + g)),
        rel=1e-14)


def test_zero_power_and_zero_selection_give_zero_rate():
    inst = single_user_instance()
    profile = AdcProfile.from_counts(1, 1, 1)
    bd = rate_terms(inst, profile, all_on(inst), np.array([0.0]))
    assert bd.rate_bits[0] == 0.0
    mask = np.ones((1, 1, 1), dtype=bool)
    off = SelectionTensor.from_bits(np.zeros((1, 1, 1), dtype=np.int8), mask)
    bd = rate_terms(inst, profile, off, np.array([0.8]))
    assert bd.rate_bits[0] == 0.0
    assert sum_rate(bd) == 0.0


def test_eta_validation():
    inst = single_user_instance()
    profile = AdcProfile.from_counts(1, 1, 1)
    for bad in ([1.2], [-0.1], [np.nan], [0.5, 0.5]):
        with pytest.raises(ValueError):
            rate_terms(inst, profile, all_on(inst), np.array(bad))


def small_instance(seed=0, tau_p=2, num_users=3):
    cfg = ScenarioConfig(num_aps=4, num_users=num_users, users_per_ap=2,
                         pilot_samples=tau_p, coherence_samples=10)
    return build_network(cfg, seed), AdcProfile.from_config(cfg)


def test_denominator_identity_against_nested_loops():
    # quadratic-form coefficients recomputed with explicit python loops
    rng = np.random.default_rng(0)
    for trial in range(20):
        inst, profile = small_instance(seed=trial, tau_p=2)
        mask = np.ones((4, 4, 3), dtype=bool)
        d = ((rng.random(mask.shape) < 0.6) & mask).astype(np.int8)
        sel = SelectionTensor.from_bits(d, mask)
        eta = rng.uniform(0.05, 1.0, size=3)
        bd = rate_terms(inst, profile, sel, eta)

        M, K = inst.num_aps, inst.num_users
        alpha = profile.alpha
        chi = inst.pilot_gram
        rho = inst.rho_u
        for k in range(K):
            lam1 = 0.0
            for m in range(M):
                for n in range(inst.antennas_per_ap):
                    lam1 += inst.gamma[m, k] * d[m, n, k] * alpha[m, n]
            denom = lam1
            for i in range(K):
                d1 = d2 = d3_coh = 0.0
                for m in range(M):
                    t1 = t2 = t3 = 0.0
                    for n in range(inst.antennas_per_ap):
                        t1 += d[m, n, k] * alpha[m, n]
                        t2 += d[m, n, k] * alpha[m, n] ** 2
                        t3 += d[m, n, k] * alpha[m, n] * (1 - alpha[m, n])
                    d1 += inst.gamma[m, k] * t1 * inst.beta[m, i]
                    d2 += inst.gamma[m, k] * t3 * inst.gamma[m, i] * chi[k, i]
                    d3_coh += (inst.gamma[m, k] * t1 / inst.beta[m, k]
                               * inst.beta[m, i])
                coeff = rho * (d1 + d2)
                if i != k:
                    coeff += rho * d3_coh ** 2 * chi[k, i]
                denom += coeff * eta[i]
            assert denom == pytest.approx(bd.denominator[k], rel=1e-12)
            sig = rho * eta[k] * lam1 ** 2
            assert sig == pytest.approx(bd.signal[k], rel=1e-12)


def test_term_split_aggregates_to_denominator():
    rng = np.random.default_rng(1)
    for trial in range(10):
        inst, profile = small_instance(seed=trial + 50, tau_p=2)
        mask = np.ones((4, 4, 3), dtype=bool)
        d = ((rng.random(mask.shape) < 0.7) & mask).astype(np.int8)
        sel = SelectionTensor.from_bits(d, mask)
        eta = rng.uniform(0.1, 1.0, size=3)
        for k in range(3):
            t = closed_form_terms(inst, profile, sel, eta, k)
            assert t.bu_iui == pytest.approx(t.bu + t.iui, rel=1e-12)
            assert t.denominator == pytest.approx(t.bu + t.iui + t.gn + t.qn,
                                                  rel=1e-10)
            bd = rate_terms(inst, profile, sel, eta)
            assert t.ds_sq == pytest.approx(bd.signal[k], rel=1e-12)


def test_rate_monotone_in_own_power_decreasing_in_others():
    inst, profile = small_instance(seed=3, tau_p=10)
    sel = all_on(inst)
    etas = np.linspace(0.05, 1.0, 12)
    r_own, r_other = [], []
    for e in etas:
        r_own.append(rate_terms(inst, profile, sel,
                                np.array([e, 0.5, 0.5])).rate_bits[0])
        r_other.append(rate_terms(inst, profile, sel,
                                  np.array([0.5, e, 0.5])).rate_bits[0])
    assert (np.diff(r_own) > 0).all()
    assert (np.diff(r_other) < 0).all()


def test_decoupled_users_add_up():
    # two isolated single-AP cells and orthogonal pilots: rates decouple
    b1, b2 = 1.7, 0.6
    tau_rho = 10.0
    g = lambda b: tau_rho * b ** 2 / (tau_rho * b + 1.0)
    inst = NetworkInstance(
        ap_pos=np.zeros((2, 2)), user_pos=np.zeros((2, 2)),
        beta=np.array([[b1, 0.0], [0.0, b2]]),
        gamma=np.array([[g(b1), 0.0], [0.0, g(b2)]]),
        c_coef=np.zeros((2, 2)), pilot_gram=np.eye(2),
        pilot_index=np.arange(2), antennas_per_ap=1,
        tau_p=10, rho_p=1.0, rho_u=3.0)
    profile = AdcProfile.from_counts(2, 1, 1)
    mask = np.zeros((2, 1, 2), dtype=bool)
    mask[0, 0, 0] = mask[1, 0, 1] = True
    sel = SelectionTensor.all_on(mask)
    bd = rate_terms(inst, profile, sel, np.array([0.8, 0.6]))
    lone_profile = AdcProfile.from_counts(1, 1, 1)
    lone_sel = SelectionTensor.all_on(np.ones((1, 1, 1), dtype=bool))
    lone1 = rate_terms(single_user_instance(beta=b1), lone_profile, lone_sel,
                       np.array([0.8])).rate_bits[0]
    lone2 = rate_terms(single_user_instance(beta=b2), lone_profile, lone_sel,
                       np.array([0.6])).rate_bits[0]
    assert bd.rate_bits[0] == pytest.approx(lone1, rel=1e-12)
    assert bd.rate_bits[1] == pytest.approx(lone2, rel=1e-12)
    assert sum_rate(bd) == pytest.approx(lone1 + lone2, rel=1e-12)


def test_sum_rate_matches_power_objective():
    inst, profile = small_instance(seed=9, tau_p=2)
    sel = all_on(inst)
    eta = np.array([0.9, 0.4, 0.7])
    bd = rate_terms(inst, profile, sel, eta)
    problem = PosyRatioProblem(*rate_coefficients(inst, profile, sel))
    assert sum_rate(bd) == pytest.approx(-math.log2(p3_objective(problem,
                                                                 eta)),
                                         rel=1e-12)


def test_sree_and_effective_rate():
    assert sree(10.0, 2.0) == 5.0
    assert effective_sum_rate(12.0, 3) == 4.0
    with pytest.raises(ValueError):
        sree(10.0, 0.0)
    with pytest.raises(ValueError):
        effective_sum_rate(10.0, 0)


def test_mc_structural_zeroes():
    inst, profile = small_instance(seed=4, tau_p=10)
    sel = all_on(inst)
    eta = np.array([0.0, 0.5, 0.5])
    est = mc_estimate_terms(inst, profile, sel, eta, 0, trials=2000, seed=0)
    assert est.ds_sq.mean == 0.0 and est.bu.mean == 0.0
    cfg = ScenarioConfig(num_aps=4, num_users=3, users_per_ap=2,
                         low_res_antennas=0)
    ideal = build_network(cfg, 4), AdcProfile.from_config(cfg)
    est = mc_estimate_terms(ideal[0], ideal[1], all_on(ideal[0]),
                            np.array([0.5, 0.5, 0.5]), 0, trials=2000, seed=0)
    assert est.qn.mean == 0.0 and est.qn.se == 0.0


def test_mc_agrees_with_closed_form():
    inst, profile = small_instance(seed=4, tau_p=2)
    sel = all_on(inst)
    eta = np.array([0.9, 0.6, 0.8])
    closed = closed_form_terms(inst, profile, sel, eta, 1)
    est = mc_estimate_terms(inst, profile, sel, eta, 1, trials=30000, seed=1,
                            check_decomposition=True)
    for name in ("ds_sq", "bu_iui", "gn", "qn"):
        stat = getattr(est, name)
        ref = getattr(closed, name)
        assert stat.se > 0
        assert abs(stat.mean - ref) < 4 * stat.se, name


def test_mc_deterministic_for_fixed_seed_and_chunking():
    inst, profile = small_instance(seed=5, tau_p=2)
    sel = all_on(inst)
    eta = np.array([0.5, 0.5, 0.5])
    a = mc_estimate_terms(inst, profile, sel, eta, 0, trials=4000, seed=7,
                          chunk_size=1000)
    b = mc_estimate_terms(inst, profile, sel, eta, 0, trials=4000, seed=7,
                          chunk_size=1000)
    assert a.ds_sq.mean == b.ds_sq.mean
    assert a.qn.mean == b.qn.mean
