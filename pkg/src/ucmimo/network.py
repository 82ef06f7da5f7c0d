"""Network geometry, large-scale fading, pilots, and channel draws.

Scope is one coherence block of the uplink: M access points with N antennas
each, K single-antenna users dropped uniformly in a D x D km square.
Large-scale gains follow a three-slope path loss with log-normal shadowing;
small-scale fading is i.i.d. Rayleigh. Channel estimation is MMSE from
tau_p-sample pilots drawn from an orthonormal book, so users sharing a pilot
produce fully correlated estimates.
"""

import dataclasses
import json
import math

import numpy as np

from . import seeding
from .config import normalized_snrs, three_slope_constant_db

# Three-slope breakpoints, km.
D_INNER_KM = 0.01
D_OUTER_KM = 0.05


def place_nodes(cfg, seed):
    """Drop M AP and K user positions i.i.d. uniform on the square.

    Returns (ap_pos, user_pos) in km, shapes (M, 2) and (K, 2).
    """
    rng = seeding.substream(seed, seeding.PLACEMENT)
    ap = rng.uniform(0.0, cfg.area_side_km, size=(cfg.num_aps, 2))
    users = rng.uniform(0.0, cfg.area_side_km, size=(cfg.num_users, 2))
    return ap, users


def path_loss_db(distance_km, cfg):
    """Three-slope path loss in dB (gain, so values are negative).

    35 dB/decade beyond 50 m, 20 dB/decade between 10 m and 50 m, constant
    inside 10 m (which also clamps distance 0).
    """
    d = np.asarray(distance_km, dtype=float)
    const = three_slope_constant_db(cfg)
    far = -const - 35.0 * np.log10(np.maximum(d, D_OUTER_KM))
    mid = -const - 15.0 * np.log10(D_OUTER_KM) - 20.0 * np.log10(
        np.clip(d, D_INNER_KM, D_OUTER_KM))
    return np.where(d > D_OUTER_KM, far, mid)


def large_scale_fading(ap_pos, user_pos, cfg, seed):
    """Large-scale gains beta[m, k] = path loss x log-normal shadowing."""
    diff = ap_pos[:, None, :] - user_pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    pl_db = path_loss_db(dist, cfg)
    rng = seeding.substream(seed, seeding.SHADOWING)
    z = rng.standard_normal(pl_db.shape)
    return 10.0 ** ((pl_db + cfg.shadowing_std_db * z) / 10.0)


def assign_pilots(num_users, tau_p, seed):
    """Assign each user a pilot from an orthonormal book of size tau_p.

    With num_users <= tau_p every user gets a distinct pilot; otherwise
    assignments are uniform at random, so some users collide. Returns
    (gram, index): gram[k, i] = |phi_k^H phi_i|^2 in {0, 1} with unit
    diagonal, and index[k] is the book column of user k.
    """
    rng = seeding.substream(seed, seeding.PILOTS)
    if num_users <= tau_p:
        index = rng.permutation(tau_p)[:num_users]
    else:
        index = rng.integers(0, tau_p, size=num_users)
    gram = (index[:, None] == index[None, :]).astype(float)
    return gram, index


def effective_gain(beta, pilot_gram, tau_p, rho_p):
    """MMSE estimation quality gamma and the estimator coefficient c.

    For each AP m and user k,

        den_mk  = tau_p rho_p sum_i beta_mi |phi_i^H phi_k|^2 + 1
        c_mk    = sqrt(tau_p rho_p) beta_mk / den_mk
        gamma_mk = tau_p rho_p beta_mk^2 / den_mk

    Returns (gamma, c), both (M, K). gamma < beta strictly whenever
    beta > 0, and gamma = sqrt(tau_p rho_p) beta c.
    """
    beta = np.asarray(beta, dtype=float)
    den = tau_p * rho_p * (beta @ pilot_gram) + 1.0
    c = math.sqrt(tau_p * rho_p) * beta / den
    gamma = tau_p * rho_p * beta ** 2 / den
    return gamma, c


@dataclasses.dataclass(eq=False)
class NetworkInstance:
    """One realized network: geometry, gains, and pilot structure."""

    ap_pos: np.ndarray          # (M, 2) km
    user_pos: np.ndarray        # (K, 2) km
    beta: np.ndarray            # (M, K) linear
    gamma: np.ndarray           # (M, K) linear
    c_coef: np.ndarray          # (M, K) MMSE estimator coefficient
    pilot_gram: np.ndarray      # (K, K) binary, unit diagonal
    pilot_index: np.ndarray     # (K,) book column per user
    antennas_per_ap: int
    tau_p: int
    rho_p: float                # pilot SNR (noise-normalized)
    rho_u: float                # uplink payload SNR (noise-normalized)

    @property
    def num_aps(self):
        return self.beta.shape[0]

    @property
    def num_users(self):
        return self.beta.shape[1]

    def to_json(self, path=None):
        doc = {
            "ap_pos": self.ap_pos.tolist(),
            "user_pos": self.user_pos.tolist(),
            "beta": self.beta.tolist(),
            "gamma": self.gamma.tolist(),
            "c_coef": self.c_coef.tolist(),
            "pilot_gram": self.pilot_gram.tolist(),
            "pilot_index": self.pilot_index.tolist(),
            "antennas_per_ap": int(self.antennas_per_ap),
            "tau_p": int(self.tau_p),
            "rho_p": float(self.rho_p),
            "rho_u": float(self.rho_u),
        }
        if path is None:
            return json.dumps(doc)
        with open(path, "w") as fh:
            json.dump(doc, fh)
        return None

    @classmethod
    def from_json(cls, text_or_path):
        try:
            doc = json.loads(text_or_path)
        except (json.JSONDecodeError, TypeError):
            with open(text_or_path) as fh:
                doc = json.load(fh)
        return cls(
            ap_pos=np.array(doc["ap_pos"], dtype=float),
            user_pos=np.array(doc["user_pos"], dtype=float),
            beta=np.array(doc["beta"], dtype=float),
            gamma=np.array(doc["gamma"], dtype=float),
            c_coef=np.array(doc["c_coef"], dtype=float),
            pilot_gram=np.array(doc["pilot_gram"], dtype=float),
            pilot_index=np.array(doc["pilot_index"], dtype=int),
            antennas_per_ap=int(doc["antennas_per_ap"]),
            tau_p=int(doc["tau_p"]),
            rho_p=float(doc["rho_p"]),
            rho_u=float(doc["rho_u"]),
        )


def build_network(cfg, seed=None):
    """Realize a NetworkInstance from the scenario config.

    seed defaults to cfg.rng_seed; geometry, shadowing, and pilots each
    use their own stream under it.
    """
    cfg.validate()
    if seed is None:
        seed = cfg.rng_seed
    ap_pos, user_pos = place_nodes(cfg, seed)
    beta = large_scale_fading(ap_pos, user_pos, cfg, seed)
    gram, index = assign_pilots(cfg.num_users, cfg.pilot_samples, seed)
    rho_p, rho_u = normalized_snrs(cfg)
    gamma, c = effective_gain(beta, gram, cfg.pilot_samples, rho_p)
    return NetworkInstance(ap_pos=ap_pos, user_pos=user_pos, beta=beta,
                           gamma=gamma, c_coef=c, pilot_gram=gram,
                           pilot_index=index,
                           antennas_per_ap=cfg.antennas_per_ap,
                           tau_p=cfg.pilot_samples, rho_p=rho_p, rho_u=rho_u)


@dataclasses.dataclass(eq=False)
class ChannelDraw:
    """Small-scale channels and their MMSE decomposition.

    Arrays are (M, K, N) for a single draw, (count, M, K, N) for batches.
    g = g_hat + g_tilde holds exactly; g_hat per entry is CN(0, gamma_mk)
    and estimates of users sharing a pilot are colinear (same observation).
    """

    g: np.ndarray
    g_hat: np.ndarray
    g_tilde: np.ndarray


def _crandn(rng, shape):
    """Standard circular complex normals, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channels(instance, seed, count=None):
    """Draw Rayleigh channels and their MMSE estimates.

    Channel entries g[m, k, :] are CN(0, beta_mk I). The estimate is built
    from the actual pilot observation, so users on the same pilot share the
    (scaled) estimation noise:

        g_hat_mk = c_mk (sqrt(tau_p rho_p) sum_j <phi_j, phi_k> g_mj + w_mk)

    with w_mk the pilot-matched noise, identical for co-pilot users.
    Returns a ChannelDraw; count=None gives (M, K, N) arrays, an integer
    count gives a leading batch axis.
    """
    rng = seeding.substream(seed, seeding.CHANNEL)
    squeeze = count is None
    b = 1 if squeeze else int(count)
    m, k = instance.beta.shape
    n = instance.antennas_per_ap
    g = _crandn(rng, (b, m, k, n)) * np.sqrt(instance.beta)[None, :, :, None]
    # One pilot-matched noise vector per book column actually in use.
    noise = _crandn(rng, (b, m, instance.tau_p, n))
    shared = noise[:, :, instance.pilot_index, :]
    same_pilot = (instance.pilot_index[:, None]
                  == instance.pilot_index[None, :]).astype(float)
    proj = np.einsum("bmjn,jk->bmkn", g, same_pilot)
    scale = math.sqrt(instance.tau_p * instance.rho_p)
    g_hat = instance.c_coef[None, :, :, None] * (scale * proj + shared)
    g_tilde = g - g_hat
    if squeeze:
        return ChannelDraw(g=g[0], g_hat=g_hat[0], g_tilde=g_tilde[0])
    return ChannelDraw(g=g, g_hat=g_hat, g_tilde=g_tilde)
