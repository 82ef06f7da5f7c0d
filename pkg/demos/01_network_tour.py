"""Walk through one random network: drop, large-scale fading, pilots,
estimation quality, and which APs end up serving which users."""

import numpy as np

from ucmimo.association import select_users, selection_mask
from ucmimo.config import ScenarioConfig
from ucmimo.network import build_network, draw_channels


def main():
    cfg = ScenarioConfig(num_aps=8, num_users=4, users_per_ap=2,
                         pilot_samples=2, rng_seed=42)
    inst = build_network(cfg)

    print(f"{cfg.num_aps} APs and {cfg.num_users} users on a "
          f"{cfg.area_side_km} km square, tau_p = {inst.tau_p}")
    print("\nAP positions (km):")
    print(np.round(inst.ap_pos, 3))
    print("\nuser positions (km):")
    print(np.round(inst.user_pos, 3))

    # beta folds path loss and shadowing; gamma is the share the MMSE
    # estimator actually recovers
    print("\nlarge-scale gain beta (dB):")
    print(np.round(10 * np.log10(inst.beta), 1))
    print("\nestimate quality gamma / beta:")
    print(np.round(inst.gamma / inst.beta, 3))

    print("\npilot assignment (4 users, 2 pilots -> collisions):")
    print(inst.pilot_index)
    print("pilot gram matrix (1 = shared pilot):")
    print(inst.pilot_gram.astype(int))

    assoc = select_users(inst.gamma, cfg.users_per_ap)
    print(f"\neach AP serves its top {cfg.users_per_ap} users by gamma:")
    print(assoc.theta.astype(int))
    for k in range(cfg.num_users):
        print(f"  user {k} served by APs "
              f"{[int(m) for m in assoc.serving_aps(k)]}")

    mask = selection_mask(assoc, cfg.antennas_per_ap)
    print(f"\nselection mask shape {mask.shape}, "
          f"{int(mask.sum())} selectable (antenna, user) pairs")

    draw = draw_channels(inst, seed=7, count=2000)
    err = draw.g - draw.g_hat - draw.g_tilde
    print(f"\n2000 channel draws: g shape {draw.g.shape}, "
          f"max |g - ghat - gtilde| = {np.abs(err).max():.1e}")
    emp = np.mean(np.abs(draw.g_hat[:, 0, 0, :]) ** 2)
    print(f"empirical E|ghat|^2 / gamma at AP0,user0: "
          f"{emp / inst.gamma[0, 0]:.3f}")


if __name__ == "__main__":
    main()
