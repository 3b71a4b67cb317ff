"""Signal constellation geometry and displaced mean photon rates.

An M-ary PSK alphabet consists of coherent states |alpha e^{i theta_k}>
with theta_k = 2 pi (k-1)/M, k = 1..M, all of amplitude ``alpha`` and
mean photon number alpha^2 per pulse (pulse duration normalized to 1).

The receiver interferes the incoming pulse with a displacement field so
that one hypothesis -- the *probed* state -- lands close to the vacuum.
With a real displacement surplus ``beta`` >= 0 the receiver field while
probing state p is

    d_p = -(alpha + beta) * e^{i theta_p},

i.e. the probed state is displaced *past* the vacuum to amplitude -beta
(overshoot).  The resulting mean photon number of state k is

    n_k = |alpha e^{i theta_k} + d_p|^2
        = alpha^2 + (alpha+beta)^2 - 2 alpha (alpha+beta) cos(theta_k - theta_p).

Sign convention
---------------
Overshoot (probed state -> amplitude -beta) is the only real-beta
convention for which the state adjacent to the probed one has rate
(alpha+beta)^2 + alpha^2 and the opposite one (2 alpha + beta)^2.  The
undershoot alternative (probed state -> +beta, receiver field
-(alpha-beta) e^{i theta_p}) gives (alpha-beta)^2 + alpha^2 for the
adjacent state, i.e. a *weaker* click rate for the non-probed states,
which defeats the purpose of the surplus displacement.  beta = 0
recovers exact nulling.

Rates are computed from the probe-relative phase offset
d = (k - p) mod M, which makes two exact identities hold bitwise:

* ``rates[probe] == beta**2`` (the d = 0 entry is special-cased), and
* reflection symmetry ``rates[probe+j] == rates[probe-j]`` (the cosine
  is evaluated at ``min(d, M-d)`` so mirror offsets share one argument).

The second identity matters downstream: Bayesian probing breaks ties
between mirror-symmetric hypotheses, and those ties must be exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np


@dataclass(frozen=True)
class PskAlphabet:
    """M coherent states of real amplitude ``alpha`` spaced by 2 pi / M.

    State k (1-based) has field amplitude alpha * e^{i phases[k-1]} and
    phases[0] = 0.
    """

    M: int
    alpha: float

    def __post_init__(self):
        if self.M < 2:
            raise ValueError(f"alphabet needs at least 2 states, got M={self.M}")
        if not self.alpha >= 0.0:
            raise ValueError(f"amplitude must be >= 0, got {self.alpha}")

    @classmethod
    def from_power(cls, M: int, alpha_sq: float) -> "PskAlphabet":
        """Build from the mean photon number |alpha|^2 per pulse."""
        if not alpha_sq >= 0.0:
            raise ValueError(f"mean photon number must be >= 0, got {alpha_sq}")
        return cls(M, sqrt(alpha_sq))

    @property
    def phases(self) -> np.ndarray:
        """theta_k = 2 pi (k-1)/M for k = 1..M, strictly increasing in [0, 2 pi)."""
        return 2.0 * np.pi * np.arange(self.M) / self.M

    @property
    def amplitudes(self) -> np.ndarray:
        """Complex field amplitudes alpha * e^{i theta_k}, k = 1..M."""
        return self.alpha * np.exp(1j * self.phases)


def _check_probe(alphabet: PskAlphabet, probe: int) -> None:
    if not 1 <= probe <= alphabet.M:
        raise ValueError(f"probe index {probe} outside 1..{alphabet.M}")


def probe_relative_rates(alphabet: PskAlphabet, beta: float) -> np.ndarray:
    """Mean photon numbers by phase offset from the probed state.

    Entry d (0-based, d = (k - probe) mod M) is the rate of the state d
    phase steps ahead of the probed one; entry 0 is exactly beta**2.
    Every probe choice is a cyclic relabeling of this table.
    """
    if not beta >= 0.0:
        raise ValueError(f"displacement surplus must be >= 0, got {beta}")
    a, c = alphabet.alpha, alphabet.alpha + beta
    d = np.arange(alphabet.M)
    d_mirror = np.minimum(d, alphabet.M - d)
    rates = a * a + c * c - 2.0 * a * c * np.cos(2.0 * np.pi * d_mirror / alphabet.M)
    rates[0] = beta * beta
    return rates


def displaced_rates(alphabet: PskAlphabet, probe: int, beta: float) -> np.ndarray:
    """Mean photon numbers of all M states while probing state ``probe``.

    rates[k-1] = |alpha e^{i theta_k} - (alpha+beta) e^{i theta_probe}|^2.
    """
    _check_probe(alphabet, probe)
    table = probe_relative_rates(alphabet, beta)
    return np.roll(table, probe - 1)


def noisy_rates(
    alphabet: PskAlphabet, probe: int, beta: float, offset: complex
) -> np.ndarray:
    """Mean photon numbers under a realized thermal amplitude offset.

    rates[k-1] = |alpha e^{i theta_k} + offset - (alpha+beta) e^{i theta_probe}|^2.
    A zero offset reduces exactly to :func:`displaced_rates`.
    """
    _check_probe(alphabet, probe)
    if not beta >= 0.0:
        raise ValueError(f"displacement surplus must be >= 0, got {beta}")
    offset = complex(offset)
    if offset == 0:
        return displaced_rates(alphabet, probe, beta)
    fields = (
        alphabet.amplitudes
        + offset
        - (alphabet.alpha + beta) * np.exp(1j * alphabet.phases[probe - 1])
    )
    return fields.real**2 + fields.imag**2
