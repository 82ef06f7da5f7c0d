"""Deterministic RNG stream derivation.

Every source of randomness in the package draws from its own named stream,
derived from a single master seed via numpy's SeedSequence spawn keys:

    SeedSequence(master_seed, spawn_key=(domain, *subkeys))

Domains:

    0  node placement
    1  shadow fading
    2  pilot assignment
    3  channel draws            (subkey: chunk index)
    4  swarm init               (subkey: particle id)
    5  swarm velocity noise     (subkeys: iteration, particle id)
    6  swarm position sampling  (subkeys: iteration, particle id)
    7  swarm power evaluation   (subkeys: iteration, particle id)
    8  random antenna selection (subkey: scheme id)
    9  random power control     (subkey: scheme id)
    10 Monte Carlo rate terms   (subkey: chunk index)
    11 experiment sweeps        (subkeys: axis point, seed index)

Because streams are keyed rather than drawn in sequence, results do not
depend on evaluation order: any unit of work can be redone or reordered
and still produce identical output.
"""

import numpy as np

PLACEMENT = 0
SHADOWING = 1
PILOTS = 2
CHANNEL = 3
SWARM_INIT = 4
SWARM_VELOCITY = 5
SWARM_POSITION = 6
SWARM_POWER = 7
ANTENNA_DRAW = 8
POWER_DRAW = 9
MC_TERMS = 10
SWEEP = 11


def substream(master_seed, *key):
    """Return a Generator for the stream named by key under master_seed."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def derive_seed(master_seed, *key):
    """Collapse a stream name to a plain uint64 seed (for nested runs)."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])
