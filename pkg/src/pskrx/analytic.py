"""Closed-form photon counting statistics for rate-switching detection.

A coherent pulse of mean photon number n on the unit interval produces
Poissonian counts, P_m(n) = n^m e^{-n} / m!.  An adaptive receiver
changes its displacement after every detection, so the instantaneous
rate is piecewise constant in the *count*: rate seq[j] applies after j
clicks.  The density of the m-th click time then obeys the recurrence

    f_1(t)     = seq[0] exp(-seq[0] t)
    f_{k+1}(t) = integral_0^t f_k(s) seq[k] exp(-seq[k](t-s)) ds

and the probability of exactly m counts in the pulse is

    P_m = integral_0^1 f_m(t) exp(-seq[m](1-t)) dt.

Each f_k is a finite mixture of terms c * t^p * exp(-r t), which is
closed under the convolution above; the whole calculation is exact up
to floating point.  The mixture representation is, however, singular
when two rates coincide: the partial-fraction coefficients carry
1/(r_i - r_j) powers.  Two safeguards keep it well conditioned:

* rates closer than ``CONFLUENCE_RTOL`` (relative) are merged before
  any convolution, switching those terms to polynomial-in-t form;
* coefficient growth is monitored during the cascade, and if the
  estimated rounding noise exceeds ``COEFF_NOISE_TOL`` the cascade is
  rerun in arbitrary precision (mpmath), which only happens for nearly
  degenerate rate sets (weak-signal regime).

The module also provides the cyclic-probing average error probability:
with probe rotation 1 -> 2 -> ... -> M -> 1 on each click, the decision
is correct for true state k exactly when the count is (k-1) + M*j, so

    P_err = 1 - (1/M) sum_k sum_j P_{(k-1)+Mj}(seq_k).

The j-series is truncated with a rigorous bound: counts are
stochastically dominated by a Poisson at the maximum displaced rate.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import exp, expm1, isfinite, lgamma, log
from typing import Sequence

import mpmath
from scipy import stats

from .core import PskAlphabet, probe_relative_rates
from .errors import PrecisionError

#: Relative spacing below which two detection rates are treated as equal.
CONFLUENCE_RTOL = 1e-9

#: Mixture terms with |coeff| * max(1, exp(-rate)) below this are dropped.
PRUNE_THRESHOLD = 1e-30

#: Estimated cascade rounding noise above which precision is escalated.
COEFF_NOISE_TOL = 1e-6

#: Allowed slack on the completeness residual of an accepted cascade.
_RESIDUAL_TOL = 1e-10

DEFAULT_TAIL_TOL = 1e-12


def poisson_pmf(n: float, m: int) -> float:
    """P_m(n) = n^m e^{-n} / m!, evaluated in log space.

    Stable for mean photon numbers up to ~50 and counts up to ~100.
    """
    if not n >= 0.0:
        raise ValueError(f"mean photon number must be >= 0, got {n}")
    if m < 0:
        raise ValueError(f"count must be >= 0, got {m}")
    if n == 0.0:
        return 1.0 if m == 0 else 0.0
    return exp(m * log(n) - n - lgamma(m + 1))


def click_density(n: float, t: float) -> float:
    """Temporal density n e^{-n t} of the first detection at time t."""
    if not n >= 0.0:
        raise ValueError(f"rate must be >= 0, got {n}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"time {t} outside the pulse interval [0, 1]")
    return n * exp(-n * t)


def poisson_tail(n: float, m: int) -> float:
    """P(X > m) for X ~ Poisson(n); the count-truncation bound."""
    return float(stats.poisson.sf(m, n))


# ---------------------------------------------------------------------------
# exponential-polynomial mixtures
# ---------------------------------------------------------------------------


def _exp(x):
    if isinstance(x, mpmath.mpf):
        return mpmath.exp(x)
    return exp(x)


def _series_eps(one) -> float:
    # truncation must track the working precision: the mixture terms can
    # cancel by many orders, so a fixed cutoff would cap the accuracy of
    # the arbitrary-precision path
    if isinstance(one, mpmath.mpf):
        return max(float(mpmath.mp.eps) * 0.1, 1e-300)
    return 2.3e-17


def _poly_exp_integral(p: int, delta, one):
    """integral_0^1 t^p e^{-delta t} dt via all-positive series.

    For delta >= 0 uses  e^{-delta} * sum_i delta^i p! / (p+1+i)!,
    for delta < 0 the direct expansion sum_i (-delta)^i / (i! (p+i+1)).
    Both have nonnegative terms only, so there is no cancellation for
    any sign or magnitude of delta.  ``one`` fixes the arithmetic type.
    """
    eps = _series_eps(one)
    if delta >= 0:
        term = one / (p + 1)
        total = term
        i = 1
        while True:
            term = term * delta / (p + 1 + i)
            total += term
            if term < total * eps and i > delta:
                break
            i += 1
            if i > 100000:  # pragma: no cover - series always terminates
                raise PrecisionError("poly-exp integral series did not converge")
        return _exp(-delta) * total
    x = -delta
    term = one / (p + 1)
    total = term
    i = 1
    while True:
        term = term * x * (p + i) / (i * (p + i + 1))
        total += term
        if term < total * eps and i > x:
            break
        i += 1
        if i > 100000:  # pragma: no cover
            raise PrecisionError("poly-exp integral series did not converge")
    return total


@dataclass(frozen=True)
class ExpPolyMix:
    """Mixture f(t) = sum_i coeff_i * t^power_i * exp(-rate_i t) on [0, 1].

    Closed under convolution with lam*exp(-lam t) and multiplication by
    exp(-lam t).  Rates are compared exactly inside the calculus; callers
    merge nearly equal rates first (see :func:`merge_confluent_rates`).
    """

    terms: tuple[tuple[float, int, float], ...]

    @classmethod
    def first_click_density(cls, rate) -> "ExpPolyMix":
        """f_1(t) = rate * exp(-rate t)."""
        return cls(((rate, 0, rate),))

    def evaluate(self, t) -> float:
        return sum(c * t**p * _exp(-r * t) for c, p, r in self.terms)

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c, _, _ in self.terms), default=0.0)

    def convolve_exp(self, lam) -> "ExpPolyMix":
        """Mixture of integral_0^t f(s) * lam * exp(-lam (t-s)) ds."""
        out: dict = {}
        for c, p, mu in self.terms:
            if mu == lam:
                _accumulate(out, p + 1, lam, c * lam / (p + 1))
            else:
                delta = mu - lam
                # A = c * lam * p! / delta^(p+1), built without factorials
                a = c * lam / delta
                for j in range(1, p + 1):
                    a = a * j / delta
                _accumulate(out, 0, lam, a)
                b = a
                _accumulate(out, 0, mu, -b)
                for j in range(1, p + 1):
                    b = b * delta / j
                    _accumulate(out, j, mu, -b)
        return ExpPolyMix(_pruned(out))

    def times_exp(self, lam) -> "ExpPolyMix":
        """Mixture of f(t) * exp(-lam t)."""
        return ExpPolyMix(tuple((c, p, r + lam) for c, p, r in self.terms))

    def survival_integral(self, end_rate, _cache: dict | None = None) -> float:
        """integral_0^1 f(t) * exp(-end_rate (1-t)) dt.

        The trailing factor is the no-click probability on (t, 1] at
        rate ``end_rate``.  ``_cache`` memoizes the per-term integrals
        across repeated calls with recurring (power, rate) pairs, which
        dominates the cost of long cascades.
        """
        total = 0.0
        for c, p, r in self.terms:
            delta = r - end_rate
            key = (p, delta)
            if _cache is not None and key in _cache:
                g = _cache[key]
            else:
                one = c / c if c else 1.0  # preserves mpf arithmetic
                g = _poly_exp_integral(p, delta, one)
                if _cache is not None:
                    _cache[key] = g
            total = total + c * g
        return _exp(-end_rate) * total


def _accumulate(out: dict, power: int, rate, coeff) -> None:
    key = (power, rate)
    out[key] = out.get(key, 0) + coeff


def _pruned(out: dict) -> tuple:
    kept = []
    for (power, rate), coeff in out.items():
        if abs(coeff) * max(1.0, _exp(-rate)) > PRUNE_THRESHOLD:
            kept.append((coeff, power, rate))
    return tuple(kept)


def merge_confluent_rates(seq: Sequence[float]) -> list[float]:
    """Snap rates within CONFLUENCE_RTOL (relative) to one representative.

    Prevents the ill-conditioned nearly-cancelling exponential pairs the
    partial-fraction form produces at (almost) equal rates.
    """
    reps: list[float] = []
    snapped = []
    for r in seq:
        r = float(r)
        for rep in reps:
            if abs(r - rep) <= CONFLUENCE_RTOL * max(r, rep):
                snapped.append(rep)
                break
        else:
            reps.append(r)
            snapped.append(r)
    return snapped


def _cascade(seq, m_max: int, ctx):
    """All count probabilities P_0..P_m_max for one rate sequence.

    Returns (probs, max_abs_coeff) where the second entry feeds the
    rounding-noise estimate used to decide precision escalation.
    """
    lam = [ctx.mpf(r) for r in seq]
    probs = [_exp(-lam[0])]
    if m_max == 0:
        return probs, 0.0
    cache: dict = {}
    mix = ExpPolyMix.first_click_density(lam[0])
    max_coeff = mix.max_abs_coeff()
    for m in range(1, m_max + 1):
        probs.append(mix.survival_integral(lam[m], cache))
        if m < m_max:
            mix = mix.convolve_exp(lam[m])
            max_coeff = max(max_coeff, mix.max_abs_coeff())
    return probs, max_coeff


def _count_probabilities(seq: Sequence[float], m_max: int) -> list[float]:
    """Escalating-precision wrapper around the mixture cascade.

    A cascade is accepted when (a) the coefficient-scale rounding-noise
    estimate is below COEFF_NOISE_TOL and (b) the distribution passes
    the completeness check: total mass within the rigorous Poisson
    truncation bound of 1, every entry a probability.  When float64
    fails, the working precision is chosen from the observed
    coefficient blow-up, which only happens for nearly degenerate rate
    sets (weak signals).
    """
    seq = merge_confluent_rates(seq)
    n_max = max(seq[: m_max + 1])
    tail = poisson_tail(n_max, m_max)

    def _acceptable(probs, max_coeff, eps):
        noise = max_coeff * eps * 4.0 * (m_max + 1)
        if not (noise < COEFF_NOISE_TOL):
            return False
        if not all(isfinite(p) and -_RESIDUAL_TOL <= p <= 1 + _RESIDUAL_TOL for p in probs):
            return False
        residual = 1.0 - sum(probs)
        return -_RESIDUAL_TOL <= residual <= tail + _RESIDUAL_TOL

    probs, max_coeff = _cascade(seq, m_max, mpmath.fp)
    if _acceptable(probs, max_coeff, 2.3e-16):
        return probs
    if isfinite(max_coeff) and max_coeff > 0:
        base_dps = max(40, int(log(max_coeff) / log(10.0)) + 25)
    else:
        base_dps = 80
    for dps in (base_dps, base_dps + 40):
        with mpmath.workdps(dps):
            probs, max_coeff = _cascade(seq, m_max, mpmath.mp)
            if _acceptable(probs, max_coeff, mpmath.mpf(10) ** (-dps)):
                return [float(p) for p in probs]
    raise PrecisionError(
        f"count distribution for rates {seq[:4]}... did not stabilize; "
        f"max coefficient {float(max_coeff):.3g}"
    )


def m_click_probability(seq: Sequence[float], m: int) -> float:
    """Probability of exactly m detections with count-switched rates.

    ``seq[j]`` is the rate in force after j detections; entries beyond
    ``seq[m]`` are irrelevant and ignored.
    """
    if m < 0:
        raise ValueError(f"count must be >= 0, got {m}")
    if len(seq) < m + 1:
        raise ValueError(f"need {m + 1} rates for m={m} clicks, got {len(seq)}")
    for r in seq[: m + 1]:
        if not r >= 0.0:
            raise ValueError(f"rates must be >= 0, got {r}")
    return _count_probabilities(list(seq[: m + 1]), m)[m]


# ---------------------------------------------------------------------------
# receiver error probabilities
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CyclicError:
    """Cyclic-probing average error with its series-truncation bound.

    The exact error lies in [p_err - tail_bound, p_err]: truncating the
    count series can only discard correct-decision mass.
    """

    p_err: float
    tail_bound: float
    m_max: int

    def __float__(self) -> float:
        return self.p_err


def _truncation_count(n_max: float, tail_tol: float) -> int:
    """Smallest m with P(Poisson(n_max) > m) < tail_tol."""
    if n_max == 0.0:
        return 0
    m = max(0, int(stats.poisson.isf(tail_tol, n_max)))
    while poisson_tail(n_max, m) >= tail_tol:
        m += 1
    return m


def cyclic_error_probability(
    alphabet: PskAlphabet, beta: float, tail_tol: float = DEFAULT_TAIL_TOL
) -> CyclicError:
    """Average error of the cyclic-probing receiver at surplus ``beta``.

    Sums the correct-count probabilities P_{(k-1)+Mj} for every true
    state k with the exact mixture cascade; the j-series stops once the
    dominating Poisson tail at the maximum displaced rate drops below
    ``tail_tol``.
    """
    if not 0.0 < tail_tol <= 1e-3:
        raise ValueError(f"tail_tol must be in (0, 1e-3], got {tail_tol}")
    table = probe_relative_rates(alphabet, beta)
    M = alphabet.M
    n_max = float(table.max())
    m_max = _truncation_count(n_max, tail_tol)
    correct = 0.0
    for k in range(1, M + 1):
        seq = [float(table[(k - 1 - j) % M]) for j in range(m_max + 1)]
        probs = _count_probabilities(seq, m_max)
        correct += sum(probs[m] for m in range((k - 1) % M, m_max + 1, M))
    return CyclicError(
        p_err=1.0 - correct / M,
        tail_bound=poisson_tail(n_max, m_max),
        m_max=m_max,
    )


def kennedy_error_probability(alpha: float, beta: float) -> float:
    """Binary PSK click/no-click error with overshoot displacement.

    One state is displaced to amplitude -beta (click rate beta^2), the
    other to -(2 alpha + beta).  With equal priors the decision "click
    => bright state" errs with probability
    (1 - e^{-beta^2})/2 + e^{-(2 alpha + beta)^2}/2.  beta = 0 is the
    exact-nulling receiver with error e^{-4 alpha^2}/2.
    """
    if not alpha >= 0.0:
        raise ValueError(f"amplitude must be >= 0, got {alpha}")
    if not beta >= 0.0:
        raise ValueError(f"displacement surplus must be >= 0, got {beta}")
    return 0.5 * (-expm1(-beta * beta) + exp(-((2 * alpha + beta) ** 2)))
