"""Sweep AP count for two schemes and print the paired comparison.

UC-BPSO-SCA-GP is the full pipeline (user-centric serving sets, swarm
antenna selection, SCA/GP power control). UC-RAS-RPC keeps the same serving
sets but draws a random feasible selection and random powers, so the gap is
what the optimization itself buys. Fewer seeds than a production run; this
is a coffee-break version.
"""

import time

from scipy import stats

from ucmimo.config import ScenarioConfig
from ucmimo.experiments import sweep

SCHEMES = ["UC-BPSO-SCA-GP", "UC-RAS-RPC"]


def main():
    cfg = ScenarioConfig(num_users=6, users_per_ap=4)
    values = [10, 20, 30]
    t0 = time.time()
    res = sweep(cfg, "M", values, SCHEMES, budget_fraction=0.75,
                num_seeds=5, base_seed=0)
    elapsed = time.time() - t0

    print(f"{len(res.rows)} runs in {elapsed:.0f} s "
          f"({len(values)} points x {len(SCHEMES)} schemes x 5 seeds)\n")
    print(f"{'M':>4} {'scheme':>16} {'SREE mean':>12} {'95% hw':>9} "
          f"{'sum rate':>9}")
    sree = res.summary("sree")
    rate = res.summary("sum_rate_bits")
    for v in values:
        for s in SCHEMES:
            m, hw = sree[(v, s)]
            print(f"{v:>4} {s:>16} {m:12.4f} {hw:9.4f} "
                  f"{rate[(v, s)][0]:9.4f}")

    print("\npaired one-sided t-test, optimized > random, per point:")
    for v in values:
        a = res.metric(v, SCHEMES[0], "sree")
        b = res.metric(v, SCHEMES[1], "sree")
        p = stats.ttest_rel(a, b, alternative="greater").pvalue
        print(f"  M={v}: p = {p:.2e}")

    print("\nSREE falls with M here: every extra AP burns ADC energy "
          "faster than it adds rate once coverage is dense enough.")


if __name__ == "__main__":
    main()
