"""Counter-based random streams for reproducible Monte Carlo.

Every random quantity consumed by a trial is addressed as
``(master_seed, trial_index, slot)`` and produced by a stateless integer
mixing function.  Two properties follow directly:

* a trial's randomness never depends on how trials are batched or
  scheduled, so estimates are bit-identical for any worker count;
* the same draw can be reproduced in a scalar code path and in a
  vectorized one without sharing generator state.

The mixer is the SplitMix64 finalizer applied as a hash combine over the
three words.  Slot layout used by the trial engine:

====  =======================================================
slot  meaning
====  =======================================================
0     uniform that selects the true state (equal priors)
1, 2  uniforms behind the Box-Muller thermal-offset normals
3+j   uniform behind the j-th inter-click exponential wait
====  =======================================================
"""

from __future__ import annotations

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# uint64 arithmetic wraps silently; keep numpy quiet about it anyway
_ERRSTATE = {"over": "ignore"}


def _mix64(x: np.ndarray | np.uint64) -> np.ndarray | np.uint64:
    """SplitMix64 finalizer: bijective avalanche on 64-bit words."""
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def counter_uniform(seed: int, trial: np.ndarray | int, slot: int):
    """Uniform draw(s) in the open interval (0, 1) for (seed, trial, slot).

    ``trial`` may be a scalar or a uint64 array; the result matches its
    shape.  Values are taken from the top 53 bits of the mixed word and
    offset by half an ulp so that log() and division are always safe.
    """
    t = np.asarray(trial, dtype=np.uint64)
    with np.errstate(**_ERRSTATE):
        h = _mix64(np.uint64(seed % (1 << 64)) ^ _GOLDEN)
        h = _mix64(h ^ (t * _GOLDEN))
        h = _mix64(h ^ (np.uint64(slot) * _MIX1))
    u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (1.0 / 9007199254740992.0)
    if np.isscalar(trial) or np.ndim(trial) == 0:
        return float(u)
    return u


def box_muller(u1, u2):
    """Two independent standard normals from two (0,1) uniforms."""
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)


class TrialStream:
    """Per-trial random stream addressed by (master seed, trial index).

    Wraps :func:`counter_uniform` with the slot layout documented in the
    module docstring.  Wait draws are indexed by an internal cursor so a
    scalar simulation consumes exactly the slots the vectorized engine
    would.
    """

    def __init__(self, master_seed: int, trial_index: int):
        self.master_seed = int(master_seed)
        self.trial_index = int(trial_index)
        self._next_wait = 0

    def true_state_uniform(self) -> float:
        return counter_uniform(self.master_seed, self.trial_index, 0)

    def offset_normals(self) -> tuple[float, float]:
        u1 = counter_uniform(self.master_seed, self.trial_index, 1)
        u2 = counter_uniform(self.master_seed, self.trial_index, 2)
        z1, z2 = box_muller(u1, u2)
        return float(z1), float(z2)

    def wait_uniform(self) -> float:
        u = counter_uniform(self.master_seed, self.trial_index, 3 + self._next_wait)
        self._next_wait += 1
        return u
