"""Closed-form uplink rates under MRC with mixed-resolution ADCs.

The achievable rate of user k is the use-and-forget bound

    R_k = log2(1 + Gamma_k / Lambda_k)

where, with t1_mk = sum_n d_mnk alpha_mn, t2_mk = sum_n d_mnk alpha_mn^2,
t3_mk = sum_n d_mnk alpha_mn (1 - alpha_mn), and chi_ki = |phi_k^H phi_i|^2:

    Gamma_k  = rho_u eta_k (sum_m gamma_mk t1_mk)^2
    Lambda_k = sum_i (delta1 + delta2)_ki eta_i
               + sum_{i != k} delta3_ki eta_i + lambda1_k

    delta1_ki = rho_u sum_m gamma_mk beta_mi t1_mk            (channel gain leakage)
    delta2_ki = rho_u chi_ki sum_m gamma_mk gamma_mi t3_mk    (quantization cross term)
    delta3_ki = rho_u chi_ki (sum_m gamma_mk beta_mi/beta_mk t1_mk)^2
                                                              (coherent pilot contamination)
    lambda1_k = sum_m gamma_mk t1_mk                          (filtered thermal noise)

All delta/lambda coefficients are affine data for power control: Lambda_k
and Lambda_k + Gamma_k are posynomials in eta (delta3_kk eta_k = Gamma_k).

The same denominator splits receiver-centrically into beamforming
uncertainty, inter-user interference, filtered noise, and quantization
noise; closed_form_terms computes that split and checks it aggregates back
to Lambda_k. mc_estimate_terms estimates every term from raw channel,
noise, and symbol draws with no reuse of the formulas above.
"""

import dataclasses
import math
from typing import NamedTuple

import numpy as np

from . import seeding
from .network import _crandn


def _selection_traces(selection, profile):
    """Per (m, k) antenna sums t1, t2, t3 of the selected impairments."""
    d = selection.d.astype(float)
    a = profile.alpha
    t1 = np.einsum("mnk,mn->mk", d, a)
    t2 = np.einsum("mnk,mn->mk", d, a * a)
    t3 = np.einsum("mnk,mn->mk", d, a * (1.0 - a))
    return t1, t2, t3


@dataclasses.dataclass(eq=False)
class RateBreakdown:
    """Closed-form rates plus the posynomial coefficients behind them."""

    rate_bits: np.ndarray      # (K,) bits/s/Hz
    signal: np.ndarray         # (K,) Gamma_k
    denominator: np.ndarray    # (K,) Lambda_k
    delta1: np.ndarray         # (K, K)
    delta2: np.ndarray         # (K, K)
    delta3: np.ndarray         # (K, K)
    lambda1: np.ndarray        # (K,)
    eta: np.ndarray            # (K,) power coefficients the rates assume

    def to_json(self):
        import json
        return json.dumps({f.name: getattr(self, f.name).tolist()
                           for f in dataclasses.fields(self)})


def _validated_eta(eta, num_users):
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (num_users,):
        raise ValueError(f"eta must have shape ({num_users},)")
    if np.any(eta < 0) or np.any(eta > 1) or not np.all(np.isfinite(eta)):
        raise ValueError("power coefficients must lie in [0, 1]")
    return eta


def rate_coefficients(instance, profile, selection):
    """The (delta1, delta2, delta3, lambda1) coefficient set."""
    gamma, beta = instance.gamma, instance.beta
    chi = instance.pilot_gram
    rho_u = instance.rho_u
    t1, _, t3 = _selection_traces(selection, profile)

    g1 = gamma * t1                       # (M, K), gamma_mk t1_mk
    lambda1 = g1.sum(axis=0)
    delta1 = rho_u * (g1.T @ beta)
    delta2 = rho_u * ((gamma * t3).T @ gamma) * chi
    # beta ratios: entries with gamma t1 = 0 contribute nothing, guard the 0/0
    safe_beta = np.where(beta > 0, beta, 1.0)
    ratio = (g1 / safe_beta).T @ beta     # (K, K)
    delta3 = rho_u * ratio ** 2 * chi
    return delta1, delta2, delta3, lambda1


def rate_terms(instance, profile, selection, eta):
    """Closed-form rates and coefficients for power coefficients eta.

    eta must lie in [0, 1]^K. Users with no active serving antenna
    (lambda1 = 0) get rate 0.
    """
    eta = _validated_eta(eta, instance.num_users)
    delta1, delta2, delta3, lambda1 = rate_coefficients(
        instance, profile, selection)
    rho_u = instance.rho_u

    signal = rho_u * eta * lambda1 ** 2   # delta3 diagonal times eta
    off3 = delta3 - np.diag(np.diag(delta3))
    denom = (delta1 + delta2) @ eta + off3 @ eta + lambda1
    active = lambda1 > 0
    safe = np.where(active, denom, 1.0)
    rate = np.where(active, np.log2(1.0 + signal / safe), 0.0)
    return RateBreakdown(rate_bits=rate, signal=signal, denominator=denom,
                         delta1=delta1, delta2=delta2, delta3=delta3,
                         lambda1=lambda1, eta=eta)


def sum_rate(breakdown):
    return float(breakdown.rate_bits.sum())


def sree(sum_rate_bits, total_energy_watt):
    """Sum-rate energy efficiency: rate divided by consumed power."""
    if total_energy_watt <= 0:
        raise ValueError("energy must be positive to form an efficiency")
    return float(sum_rate_bits) / float(total_energy_watt)


def effective_sum_rate(sum_rate_bits, users_per_ap):
    """Sum rate discounted by the per-AP serving load L."""
    if users_per_ap < 1:
        raise ValueError("users_per_ap must be at least 1")
    return float(sum_rate_bits) / float(users_per_ap)


class Estimate(NamedTuple):
    mean: float
    se: float


@dataclasses.dataclass(eq=False)
class ClosedFormTerms:
    """Receiver-centric denominator split for one user."""

    ds_sq: float     # coherent signal power (numerator)
    bu: float        # beamforming uncertainty
    iui: float       # inter-user interference
    bu_iui: float    # the two combined
    gn: float        # filtered thermal noise
    qn: float        # quantization noise
    denominator: float


def closed_form_terms(instance, profile, selection, eta, k):
    """Per-term denominator decomposition for user k.

    Raises if the terms fail to aggregate back to Lambda_k, which would
    mean the two derivations have diverged.
    """
    eta = _validated_eta(eta, instance.num_users)
    gamma, beta = instance.gamma, instance.beta
    chi = instance.pilot_gram
    rho_u = instance.rho_u
    t1, t2, t3 = _selection_traces(selection, profile)

    gk, bk = gamma[:, k], beta[:, k]
    t1k, t2k, t3k = t1[:, k], t2[:, k], t3[:, k]

    ds_sq = rho_u * eta[k] * (gk * t1k).sum() ** 2
    bu = rho_u * eta[k] * (gk * bk * t2k).sum()

    safe_bk = np.where(bk > 0, bk, 1.0)
    coherent = ((gk * t1k / safe_bk)[:, None] * beta).sum(axis=0)  # (K,)
    scattered = ((gk * t2k)[:, None] * beta).sum(axis=0)
    per_user = chi[k] * coherent ** 2 + scattered
    iui = rho_u * float((eta * per_user).sum() - eta[k] * per_user[k])

    gn = float((gk * t2k).sum())
    load = rho_u * (eta[None, :] * (beta + gamma * chi[k][None, :])).sum(axis=1)
    qn = float((gk * t3k * (load + 1.0)).sum())

    denom = float(rate_terms(instance, profile, selection, eta).denominator[k])
    total = bu + iui + gn + qn
    if not math.isclose(total, denom, rel_tol=1e-10, abs_tol=1e-300):
        raise AssertionError(
            f"denominator split diverged from the direct form: {total} vs {denom}")
    return ClosedFormTerms(ds_sq=float(ds_sq), bu=float(bu), iui=iui,
                           bu_iui=float(bu) + iui, gn=gn, qn=qn,
                           denominator=denom)


@dataclasses.dataclass(eq=False)
class McTermEstimate:
    """Monte Carlo estimates (mean, standard error) of the rate terms."""

    ds_sq: Estimate
    bu: Estimate
    iui: Estimate
    bu_iui: Estimate
    gn: Estimate
    qn: Estimate
    trials: int


def _mean_se(samples):
    n = samples.size
    return Estimate(float(samples.mean()),
                    float(samples.std(ddof=1) / math.sqrt(n)))


def mc_estimate_terms(instance, profile, selection, eta, k, trials, seed,
                      chunk_size=20000, check_decomposition=False):
    """Estimate user k's rate terms from raw draws.

    Per trial the full uplink is simulated: Rayleigh channels, MMSE
    estimates from actual pilot observations (co-pilot users share pilot
    noise), unit-power symbols, thermal noise, and quantization noise with
    the conditional AQNM covariance. The detector statistic splits into
    desired signal, beamforming uncertainty (relative to the empirical mean
    gain), inter-user interference, filtered noise, and quantization noise;
    squared magnitudes are averaged per term.

    Draws are chunked with one RNG stream per chunk, so results for a given
    (seed, chunk_size) do not depend on how chunks are processed.
    check_decomposition verifies on the first chunk that the five terms
    reassemble the detector output computed directly from the quantized
    observations.
    """
    eta = _validated_eta(eta, instance.num_users)
    m_aps, k_users = instance.beta.shape
    n_ant = instance.antennas_per_ap
    rho_u = instance.rho_u
    alpha = profile.alpha
    dk = selection.d[:, :, k].astype(float)       # (M, N)
    w_a = dk * alpha                               # weights for A-scaled inputs
    same_pilot = (instance.pilot_index[:, None]
                  == instance.pilot_index[None, :]).astype(float)
    scale_p = math.sqrt(instance.tau_p * instance.rho_p)
    sqrt_eta = np.sqrt(eta)

    x_parts, sk_parts, iui_parts, gn_parts, qn_parts = [], [], [], [], []
    done = 0
    chunk_idx = 0
    while done < trials:
        b = min(chunk_size, trials - done)
        rng = seeding.substream(seed, seeding.MC_TERMS, chunk_idx)
        g = _crandn(rng, (b, m_aps, k_users, n_ant)) \
            * np.sqrt(instance.beta)[None, :, :, None]
        pnoise = _crandn(rng, (b, m_aps, instance.tau_p, n_ant))
        proj = np.einsum("bmjn,jk->bmkn", g, same_pilot)
        g_hat_k = instance.c_coef[None, :, k, None] \
            * (scale_p * proj[:, :, k, :] + pnoise[:, :, instance.pilot_index[k], :])
        w = _crandn(rng, (b, m_aps, n_ant))
        s = _crandn(rng, (b, k_users))
        qvar = (alpha * (1.0 - alpha))[None, :, :] \
            * (rho_u * np.einsum("bmin,i->bmn", np.abs(g) ** 2, eta) + 1.0)
        wq = _crandn(rng, (b, m_aps, n_ant)) * np.sqrt(qvar)

        conj_gh = g_hat_k.conj()
        y_all = np.einsum("bmn,mn,bmin->bi", conj_gh, w_a, g)
        x = y_all[:, k]
        gn_t = np.einsum("bmn,mn,bmn->b", conj_gh, w_a, w)
        qn_t = np.einsum("bmn,mn,bmn->b", conj_gh, dk, wq)
        weighted = y_all * sqrt_eta[None, :] * s
        iui_t = math.sqrt(rho_u) * (weighted.sum(axis=1) - weighted[:, k])

        if check_decomposition and chunk_idx == 0:
            tx = math.sqrt(rho_u) * np.einsum(
                "bmin,i,bi->bmn", g, sqrt_eta, s)
            y_quant = alpha[None, :, :] * (tx + w) + wq
            direct = np.einsum("bmn,mn,bmn->b", conj_gh, dk, y_quant)
            recon = (math.sqrt(rho_u) * sqrt_eta[k] * x * s[:, k]
                     + iui_t + gn_t + qn_t)
            err = np.abs(direct - recon).max()
            ref = np.abs(direct).max() + 1e-300
            if err > 1e-8 * ref:
                raise AssertionError(
                    f"detector decomposition broke: max error {err:g}")

        x_parts.append(x)
        sk_parts.append(s[:, k])
        iui_parts.append(np.abs(iui_t) ** 2)
        gn_parts.append(np.abs(gn_t) ** 2)
        qn_parts.append(np.abs(qn_t) ** 2)
        done += b
        chunk_idx += 1

    x_all = np.concatenate(x_parts)
    sk_all = np.concatenate(sk_parts)
    iui_sq = np.concatenate(iui_parts)
    gn_sq = np.concatenate(gn_parts)
    qn_sq = np.concatenate(qn_parts)

    # Desired-signal power rho eta_k |E X|^2: plug-in estimator with a
    # delta-method standard error from the covariance of the complex mean.
    x_mean = x_all.mean()
    cov = np.cov(x_all.real, x_all.imag) / trials
    grad = np.array([2.0 * x_mean.real, 2.0 * x_mean.imag])
    ds_scale = rho_u * eta[k]
    ds = Estimate(float(ds_scale * abs(x_mean) ** 2),
                  float(ds_scale * math.sqrt(max(grad @ cov @ grad, 0.0))))

    bu_sq = ds_scale * np.abs(x_all - x_mean) ** 2 * np.abs(sk_all) ** 2
    return McTermEstimate(ds_sq=ds, bu=_mean_se(bu_sq), iui=_mean_se(iui_sq),
                          bu_iui=_mean_se(bu_sq + iui_sq),
                          gn=_mean_se(gn_sq), qn=_mean_se(qn_sq),
                          trials=int(trials))
