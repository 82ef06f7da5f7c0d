"""User-centric AP/user association.

Each AP serves at most L of the K users. Selection is greedy on the
estimation quality gamma: every AP takes its L best users, then a repair
pass places each unserved user at its strongest AP that can free a slot,
evicting the weakest member still covered elsewhere. Processing order and
tie-breaks are fixed (ascending index, lowest index wins) so the result is
a pure function of gamma.
"""

import dataclasses

import numpy as np


class AssociationError(RuntimeError):
    pass


@dataclasses.dataclass(eq=False)
class Association:
    """Serving map theta[m, k] in {0, 1} with per-AP loads <= L."""

    theta: np.ndarray
    users_per_ap: int

    def served_users(self, m):
        return np.flatnonzero(self.theta[m])

    def serving_aps(self, k):
        return np.flatnonzero(self.theta[:, k])

    def to_csv(self, path):
        np.savetxt(path, self.theta, fmt="%d", delimiter=",")


def select_users(gamma, users_per_ap):
    """Build the serving map from estimation qualities gamma (M, K).

    Requires K <= M * L so that full coverage is achievable. Each repair
    step serves one more user without unserving anyone, so the loop ends
    after at most K swaps; the K * M cap is purely defensive.
    """
    gamma = np.asarray(gamma, dtype=float)
    m_aps, k_users = gamma.shape
    L = int(users_per_ap)
    if not 1 <= L <= k_users:
        raise ValueError("users_per_ap must lie in [1, num_users]")
    if k_users > m_aps * L:
        raise ValueError("coverage impossible: num_users > num_aps * users_per_ap")

    theta = np.zeros((m_aps, k_users), dtype=int)
    # Greedy phase: each AP takes its L strongest users. Stable sort on
    # negated gamma makes ties fall to the lower user index.
    for m in range(m_aps):
        order = np.argsort(-gamma[m], kind="stable")
        theta[m, order[:L]] = 1

    swaps = 0
    while True:
        unserved = np.flatnonzero(theta.sum(axis=0) == 0)
        if unserved.size == 0:
            break
        k = int(unserved[0])
        # Walk candidate APs from strongest to weakest. Evicting a user who
        # is served nowhere else would just move the hole around (two users
        # whose best AP coincides can ping-pong forever), so only members
        # still covered elsewhere are evictable. With K <= M*L some AP always
        # has one: otherwise all M*L slots would hold distinct users besides k.
        placed = False
        counts = theta.sum(axis=0)
        for m_star in np.argsort(-gamma[:, k], kind="stable"):
            members = np.flatnonzero(theta[m_star])
            if members.size < L:
                theta[m_star, k] = 1
                placed = True
                break
            safe = members[counts[members] >= 2]
            if safe.size == 0:
                continue
            k_out = int(safe[np.argmin(gamma[m_star, safe])])
            theta[m_star, k_out] = 0
            theta[m_star, k] = 1
            placed = True
            break
        swaps += 1
        if not placed or swaps > k_users * m_aps:
            raise AssociationError(
                "user selection failed to cover all users within the swap cap; "
                "check gamma for degenerate values")
    return Association(theta=theta, users_per_ap=L)


def selection_mask(association, antennas_per_ap):
    """Boolean (M, N, K) tensor of the antenna/user pairs selection may use.

    True exactly where theta[m, k] = 1, replicated across the AP's antennas;
    np.argwhere of the result lists the admissible (m, n, k) triples.
    """
    theta = association.theta.astype(bool)
    return np.repeat(theta[:, None, :], antennas_per_ap, axis=1)
