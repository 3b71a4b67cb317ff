"""Monte Carlo trial engine with deterministic, worker-independent runs.

A trial simulates one pulse on [0, 1]:

1. one thermal amplitude offset is drawn per pulse (independent
   Gaussian quadratures of variance n_th/2 each -- noise bandwidth of
   the order of the repetition rate, so constant within the pulse);
2. while probing state p the detector clicks at rate
   eta * |alpha_k + eps + d_p|^2 + dark_rate;
3. inter-click waits are exponential at the current rate (the rate only
   changes at recorded clicks, so memorylessness applies);
4. each recorded click triggers the strategy's feedback immediately and
   blinds the detector for ``dead_time`` (arrivals in the blind window
   are lost; the next recorded click is resume + Exp(rate));
5. at t = 1 the strategy finalizes.

Receiver knowledge: Bayesian updates use the *nominal* rates
eta * n_k + dark_rate (the receiver is calibrated for its efficiency
and dark counts) with exposure times that exclude blind windows (the
receiver knows its own detector); the realized thermal offset is *not*
known to the receiver, so excess noise acts purely as a channel
impairment.  In the degenerate case where every nominal rate is zero a
click carries no information and leaves the posterior unchanged.

Randomness is addressed per trial through counter-based streams
(see :mod:`pskrx._rng`), so ``estimate_error`` returns bit-identical
results for any worker count, and the scalar :func:`simulate_trial`
reproduces exactly the trial the vectorized engine runs.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from math import sqrt

import numpy as np

from ._rng import TrialStream, box_muller, counter_uniform
from .core import PskAlphabet, probe_relative_rates
from .strategy import (
    Hypothesis,
    PosteriorState,
    bayes_click_update,
    bayes_finalize,
    cyclic_finalize,
    initial_posterior,
)

_BLOCK = 1 << 15

STRATEGIES = ("cyclic", "bayes")


@dataclass(frozen=True)
class ImperfectionModel:
    """Detector and channel imperfections; defaults are ideal.

    eta: quantum efficiency of the photon counter in [0, 1].
    n_th: mean thermal photons per pulse (excess noise), >= 0.
    dead_time: post-click blind window as a fraction of the pulse, in [0, 1).
    dark_rate: mean dark counts per pulse, >= 0.
    """

    eta: float = 1.0
    n_th: float = 0.0
    dead_time: float = 0.0
    dark_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"quantum efficiency {self.eta} outside [0, 1]")
        if not self.n_th >= 0.0:
            raise ValueError(f"thermal photon number {self.n_th} must be >= 0")
        if not 0.0 <= self.dead_time < 1.0:
            raise ValueError(f"dead time {self.dead_time} outside [0, 1)")
        if not self.dark_rate >= 0.0:
            raise ValueError(f"dark rate {self.dark_rate} must be >= 0")


IDEAL = ImperfectionModel()


@dataclass(frozen=True)
class TrialOutcome:
    """Full record of one simulated pulse."""

    true_state: int
    click_times: tuple[float, ...]
    probe_sequence: tuple[int, ...]
    hypothesis: Hypothesis
    correct: bool


@dataclass(frozen=True)
class ErrorEstimate:
    """Estimated average error probability with binomial standard error."""

    p_err: float
    std_err: float
    trials: int
    seed: int


def _check_strategy(strategy: str) -> None:
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; use one of {STRATEGIES}")


def nominal_rate_table(
    alphabet: PskAlphabet, beta: float, imperfections: ImperfectionModel
) -> np.ndarray:
    """Click rates the receiver assumes, by phase offset from the probe.

    eta * n_d + dark_rate; never below eta * n_d since dark counts only
    add to the optical rate.
    """
    return imperfections.eta * probe_relative_rates(alphabet, beta) + imperfections.dark_rate


def sample_thermal_offset(n_th: float, trial_rng: TrialStream) -> complex:
    """One realized thermal amplitude offset for a pulse.

    Independent zero-mean Gaussian quadratures of variance n_th/2, so the
    offset adds n_th photons on average.
    """
    if not n_th >= 0.0:
        raise ValueError(f"thermal photon number {n_th} must be >= 0")
    z1, z2 = trial_rng.offset_normals()
    sigma = sqrt(n_th / 2.0)
    return complex(sigma * z1, sigma * z2)


def simulate_trial(
    true_state: int,
    alphabet: PskAlphabet,
    beta: float,
    strategy: str,
    imperfections: ImperfectionModel,
    trial_rng: TrialStream,
) -> TrialOutcome:
    """Simulate one pulse; the scalar reference for the block engine."""
    _check_strategy(strategy)
    M = alphabet.M
    if not 1 <= true_state <= M:
        raise ValueError(f"true state {true_state} outside 1..{M}")
    imp = imperfections
    amps = alphabet.amplitudes
    recv = -(alphabet.alpha + beta) * np.exp(1j * alphabet.phases)
    nominal = nominal_rate_table(alphabet, beta, imp)
    eps = sample_thermal_offset(imp.n_th, trial_rng)

    ps = initial_posterior(M) if strategy == "bayes" else None
    probe = 1
    count = 0
    resume = 0.0
    click_times: list[float] = []
    probes: list[int] = [1]

    while resume < 1.0:
        f = amps[true_state - 1] + eps + recv[probe - 1]
        rate = imp.eta * (f.real**2 + f.imag**2) + imp.dark_rate
        u = trial_rng.wait_uniform()
        with np.errstate(divide="ignore"):
            t = resume + -np.log(u) / rate
        if not t < 1.0:
            break
        if strategy == "bayes":
            rates = nominal[(np.arange(M) - (probe - 1)) % M]
            if rates.max() > 0.0:
                ps = bayes_click_update(ps, float(t), rates)
                probe = ps.probe
            else:  # uninformative click: posterior and probe unchanged
                ps = PosteriorState(ps.probs, ps.probe, float(t), ps.click_count + 1)
        count += 1
        if strategy == "cyclic":
            probe = 1 + count % M
        click_times.append(float(t))
        probes.append(probe)
        resume = min(float(t) + imp.dead_time, 1.0)
        if strategy == "bayes":
            ps = PosteriorState(ps.probs, ps.probe, resume, ps.click_count)

    if strategy == "bayes":
        rates = nominal[(np.arange(M) - (probe - 1)) % M]
        hyp = bayes_finalize(ps, rates)
    else:
        hyp = cyclic_finalize(count, M)
    return TrialOutcome(
        true_state=true_state,
        click_times=tuple(click_times),
        probe_sequence=tuple(probes),
        hypothesis=hyp,
        correct=hyp.state == true_state,
    )


# ---------------------------------------------------------------------------
# vectorized block engine
# ---------------------------------------------------------------------------


def _map_pick(w: np.ndarray, probe0: np.ndarray, M: int):
    """Vectorized MAP pick with the smallest-phase-step tie-break."""
    order = (probe0[:, None] + np.arange(M)[None, :]) % M
    vals = np.take_along_axis(w, order, axis=1)
    step = np.argmax(vals, axis=1)
    pick = np.take_along_axis(order, step[:, None], axis=1)[:, 0]
    conf = np.take_along_axis(vals, step[:, None], axis=1)[:, 0]
    return pick, conf


def _run_block(
    alphabet: PskAlphabet,
    beta: float,
    strategy: str,
    imp: ImperfectionModel,
    master_seed: int,
    lo: int,
    hi: int,
    collect: bool = False,
):
    """Simulate trials [lo, hi); returns (n_err, collected payload or None)."""
    M = alphabet.M
    n = hi - lo
    idx = np.arange(lo, hi, dtype=np.uint64)
    bayes = strategy == "bayes"

    u0 = counter_uniform(master_seed, idx, 0)
    true0 = np.minimum((u0 * M).astype(np.int64), M - 1)
    z1, z2 = box_muller(
        counter_uniform(master_seed, idx, 1), counter_uniform(master_seed, idx, 2)
    )
    sigma = sqrt(imp.n_th / 2.0)
    eps = sigma * z1 + 1j * (sigma * z2)

    amps = alphabet.amplitudes
    recv = -(alphabet.alpha + beta) * np.exp(1j * alphabet.phases)
    nominal = nominal_rate_table(alphabet, beta, imp)
    informative = nominal.max() > 0.0
    states = np.arange(M)[None, :]

    probe0 = np.zeros(n, dtype=np.int64)
    count = np.zeros(n, dtype=np.int64)
    resume = np.zeros(n)
    w = np.full((n, M), 1.0 / M) if bayes else None
    hyp0 = np.empty(n, dtype=np.int64)
    conf = np.ones(n)

    clicks_trial: list[np.ndarray] = []
    clicks_time: list[np.ndarray] = []
    clicks_probe: list[np.ndarray] = []
    clicks_round: list[np.ndarray] = []

    def _finalize(rows):
        if not rows.size:
            return
        if bayes:
            dt = 1.0 - resume[rows]
            rates = nominal[(states - probe0[rows][:, None]) % M]
            wf = w[rows] * np.exp(-rates * dt[:, None])
            wf /= wf.sum(axis=1, keepdims=True)
            hyp0[rows], conf[rows] = _map_pick(wf, probe0[rows], M)
        else:
            hyp0[rows] = count[rows] % M

    act = np.arange(n)
    rnd = 0
    while act.size:
        f = amps[true0[act]] + eps[act] + recv[probe0[act]]
        rate = imp.eta * (f.real**2 + f.imag**2) + imp.dark_rate
        u = counter_uniform(master_seed, idx[act], 3 + rnd)
        with np.errstate(divide="ignore"):
            t_click = resume[act] + -np.log(u) / rate
        clicked = t_click < 1.0
        _finalize(act[~clicked])

        pos = act[clicked]
        if pos.size:
            tc = t_click[clicked]
            if bayes and informative:
                dt = tc - resume[pos]
                rates = nominal[(states - probe0[pos][:, None]) % M]
                wc = w[pos] * rates * np.exp(-rates * dt[:, None])
                wc /= wc.sum(axis=1, keepdims=True)
                w[pos] = wc
                probe0[pos], _ = _map_pick(wc, probe0[pos], M)
            count[pos] += 1
            if not bayes:
                probe0[pos] = count[pos] % M
            resume[pos] = np.minimum(tc + imp.dead_time, 1.0)
            if collect:
                clicks_trial.append(pos)
                clicks_time.append(tc)
                clicks_probe.append(probe0[pos].copy())
                clicks_round.append(np.full(pos.size, rnd))
            blocked = resume[pos] >= 1.0
            _finalize(pos[blocked])
            pos = pos[~blocked]
        act = pos
        rnd += 1

    n_err = int(np.sum(hyp0 != true0))
    if not collect:
        return n_err, None
    payload = {
        "true0": true0,
        "count": count,
        "hyp0": hyp0,
        "conf": conf,
        "clicks_trial": np.concatenate(clicks_trial) if clicks_trial else np.empty(0, int),
        "clicks_time": np.concatenate(clicks_time) if clicks_time else np.empty(0),
        "clicks_probe": np.concatenate(clicks_probe) if clicks_probe else np.empty(0, int),
        "clicks_round": np.concatenate(clicks_round) if clicks_round else np.empty(0, int),
    }
    return n_err, payload


def _block_errors(args) -> int:
    alphabet, beta, strategy, imp, master_seed, lo, hi = args
    n_err, _ = _run_block(alphabet, beta, strategy, imp, master_seed, lo, hi)
    return n_err


def estimate_error(
    alphabet: PskAlphabet,
    beta: float,
    strategy: str,
    imperfections: ImperfectionModel | None,
    trials: int,
    master_seed: int,
    workers: int = 1,
) -> ErrorEstimate:
    """Average error probability over equiprobable true states.

    Bit-identical for fixed (master_seed, trials) whatever ``workers``
    is: trials are partitioned into fixed blocks and every random draw
    is addressed by (master_seed, trial index), so scheduling cannot
    change any outcome and aggregation is plain counting.
    """
    _check_strategy(strategy)
    if trials < 1:
        raise ValueError(f"need at least one trial, got {trials}")
    imp = imperfections if imperfections is not None else IDEAL
    spans = [(lo, min(lo + _BLOCK, trials)) for lo in range(0, trials, _BLOCK)]
    jobs = [(alphabet, beta, strategy, imp, master_seed, lo, hi) for lo, hi in spans]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            n_err = sum(pool.map(_block_errors, jobs, chunksize=1))
    else:
        n_err = sum(_block_errors(j) for j in jobs)
    p = n_err / trials
    return ErrorEstimate(
        p_err=p,
        std_err=sqrt(p * (1.0 - p) / trials),
        trials=trials,
        seed=master_seed,
    )


def simulate_outcomes(
    alphabet: PskAlphabet,
    beta: float,
    strategy: str,
    imperfections: ImperfectionModel | None,
    trials: int,
    master_seed: int,
) -> list[TrialOutcome]:
    """Full trial records for modest trial counts (tracing, tests, CLI)."""
    _check_strategy(strategy)
    imp = imperfections if imperfections is not None else IDEAL
    outcomes: list[TrialOutcome] = []
    for lo in range(0, trials, _BLOCK):
        hi = min(lo + _BLOCK, trials)
        _, payload = _run_block(alphabet, beta, strategy, imp, master_seed, lo, hi, collect=True)
        order = np.lexsort((payload["clicks_round"], payload["clicks_trial"]))
        ct = payload["clicks_trial"][order]
        tt = payload["clicks_time"][order]
        pp = payload["clicks_probe"][order]
        bounds = np.searchsorted(ct, np.arange(hi - lo + 1))
        for i in range(hi - lo):
            s, e = bounds[i], bounds[i + 1]
            hyp = Hypothesis(int(payload["hyp0"][i]) + 1, float(payload["conf"][i]))
            outcomes.append(
                TrialOutcome(
                    true_state=int(payload["true0"][i]) + 1,
                    click_times=tuple(float(x) for x in tt[s:e]),
                    probe_sequence=(1, *(int(x) + 1 for x in pp[s:e])),
                    hypothesis=hyp,
                    correct=bool(hyp.state == int(payload["true0"][i]) + 1),
                )
            )
    return outcomes
