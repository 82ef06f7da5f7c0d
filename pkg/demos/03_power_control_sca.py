"""Sum-rate power control on a two-user network, drawn as ASCII art.

With two users the objective can be tabulated on a grid, which makes it easy
to see what the successive convex approximation actually does: each round
condenses the denominators into monomials at the current point and the
geometric program pulls the iterate uphill until nothing moves.
"""

import numpy as np

from ucmimo.adc_energy import AdcProfile, SelectionTensor
from ucmimo.association import select_users, selection_mask
from ucmimo.config import ScenarioConfig
from ucmimo.network import build_network
from ucmimo.power import PosyRatioProblem, p3_objective, sca_loop
from ucmimo.rates import rate_coefficients, rate_terms, sum_rate

GLYPHS = " .:-=+*#%@"


def ascii_surface(problem, axis, marks):
    # higher sum rate = lower objective = denser glyph
    grid = np.stack(np.meshgrid(axis, axis, indexing="ij"), -1).reshape(-1, 2)
    num = grid @ problem.denominator_weights().T + problem.lambda1
    den = grid @ problem.full_weights().T + problem.lambda1
    vals = -np.log2(np.prod(num / den, axis=1)).reshape(axis.size, axis.size)
    lo, hi = vals.min(), vals.max()
    levels = ((vals - lo) / (hi - lo) * (len(GLYPHS) - 1)).astype(int)
    rows = []
    for i in range(axis.size):
        row = [GLYPHS[levels[i, j]] for j in range(axis.size)]
        rows.append(row)
    for tag, (e1, e2) in marks.items():
        i = int(np.abs(axis - e1).argmin())
        j = int(np.abs(axis - e2).argmin())
        rows[i][j] = tag
    print("     eta_2 = 0.01 " + " " * (axis.size - 22) + "eta_2 = 1.0")
    for i, row in enumerate(rows):
        label = f"{axis[i]:4.2f}" if i % 6 == 0 else "    "
        print(f"{label} |{''.join(row)}|")


def main():
    cfg = ScenarioConfig(num_aps=4, num_users=2, users_per_ap=2,
                         antennas_per_ap=4, low_res_antennas=3,
                         pilot_samples=2, rng_seed=7)
    inst = build_network(cfg)
    profile = AdcProfile.from_config(cfg)
    sel = SelectionTensor.all_on(
        selection_mask(select_users(inst.gamma, cfg.users_per_ap),
                       cfg.antennas_per_ap))
    problem = PosyRatioProblem(*rate_coefficients(inst, profile, sel))

    res = sca_loop(problem, v=1e-7, eta_min=0.01)
    print(f"SCA finished in {res.iterations} iterations, "
          f"objective {res.objective:.6f}")
    print(f"optimal eta = {np.round(res.eta, 4)}")
    print(f"sum rate at optimum: "
          f"{sum_rate(rate_terms(inst, profile, sel, res.eta)):.4f} bits/use")
    print(f"sum rate at full power: "
          f"{sum_rate(rate_terms(inst, profile, sel, [1.0, 1.0])):.4f}")

    print("\nobjective trace (product of Lambda/(Lambda+Gamma), lower is "
          "better):")
    shown = list(enumerate(res.trace))
    if len(shown) > 12:
        shown = shown[:8] + [(None, None)] + shown[-3:]
    for i, v in shown:
        print("  ..." if i is None else f"  round {i}: {v:.8f}")

    axis = np.linspace(0.01, 1.0, 41)
    print("\nsum-rate surface, S = start (all-on power), X = SCA optimum:")
    ascii_surface(problem, axis, {"S": (1.0, 1.0), "X": tuple(res.eta)})

    # brute force on a fine grid for reassurance
    fine = np.linspace(0.01, 1.0, 100)
    grid = np.stack(np.meshgrid(fine, fine, indexing="ij"), -1).reshape(-1, 2)
    num = grid @ problem.denominator_weights().T + problem.lambda1
    den = grid @ problem.full_weights().T + problem.lambda1
    vals = np.prod(num / den, axis=1)
    best = grid[vals.argmin()]
    print(f"\n100x100 grid best: eta = {np.round(best, 4)}, "
          f"objective {vals.min():.6f} "
          f"(gap to SCA {res.objective - vals.min():+.2e})")
    assert abs(p3_objective(problem, res.eta) - res.objective) < 1e-12


if __name__ == "__main__":
    main()
