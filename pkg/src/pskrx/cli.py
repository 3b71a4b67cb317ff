"""Command-line front end: sweeps, traces, bounds, optimization, trials.

Subcommands
-----------
sweep     error probability vs. signal power for one receiver setup
trace     posterior trace for a given click record (ideal receiver)
bench     SQL and Helstrom reference curves
optimize  optimal displacement surplus vs. signal power
simulate  raw per-trial records

Every option can also be supplied through a flat ``key = value`` spec
file (``--spec FILE``); explicit flags override file entries, and
``--dump-spec FILE`` records the fully resolved configuration (seed
included) so the run can be reproduced byte for byte.  Randomized
commands honor ``--seed``; when it is omitted a fresh seed is drawn,
printed on stderr, and written into the outputs.  ``--workers`` caps
the Monte Carlo parallelism (default: PSKRX_WORKERS or the CPU count);
the output is identical for any worker count.

Exit codes: 0 success, 2 argument error, 3 precision/convergence
error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from math import sqrt

from . import bench as bench_mod
from .core import PskAlphabet, displaced_rates
from .errors import PrecisionError
from .mc import ImperfectionModel, estimate_error, simulate_outcomes
from .optimize import optimize_beta_analytic, optimize_beta_mc
from .strategy import (
    bayes_click_update,
    bayes_silence_update,
    initial_posterior,
    select_probe,
)

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_PRECISION = 3
EXIT_IO = 4

_DEFAULT_POWERS = "0.1,0.25,0.5,1,1.5,2"

# option schema per subcommand: name -> (converter, default, help)
_FLOATS = "floats"
_SCHEMA: dict[str, dict[str, tuple]] = {
    "sweep": {
        "m": (int, 4, "alphabet size M"),
        "alpha_sq": (_FLOATS, _DEFAULT_POWERS, "signal powers |alpha|^2, comma list"),
        "strategy": (str, "cyclic", "probing strategy: cyclic or bayes"),
        "beta_policy": (str, "analytic", "displacement: fixed, zero, analytic or mc"),
        "beta_sq": (float, 0.0, "surplus photon number for --beta-policy fixed"),
        "trials": (int, 100_000, "Monte Carlo trials per grid point"),
        "opt_trials": (int, 100_000, "trials per candidate for --beta-policy mc"),
        "eta": (float, 1.0, "detector quantum efficiency"),
        "n_th": (float, 0.0, "mean thermal photons per pulse"),
        "dead_time": (float, 0.0, "detector dead time, fraction of the pulse"),
        "dark_rate": (float, 0.0, "mean dark counts per pulse"),
        "seed": (int, None, "master seed (omit for a fresh printed one)"),
        "workers": (int, None, "worker processes for the trial engine"),
        "format": (str, "csv", "output format: csv or json"),
        "out": (str, None, "output path (default stdout)"),
    },
    "trace": {
        "m": (int, 4, "alphabet size M"),
        "alpha_sq": (_FLOATS, "0.5", "signal power |alpha|^2 (single value)"),
        "beta_sq": (float, 0.23, "displacement surplus photon number"),
        "clicks": (_FLOATS, "", "detection times, comma list in (0,1)"),
        "format": (str, "csv", "output format: csv or json"),
        "out": (str, None, "output path (default stdout)"),
    },
    "bench": {
        "m": (int, 4, "alphabet size M"),
        "alpha_sq": (_FLOATS, _DEFAULT_POWERS, "signal powers, comma list"),
        "format": (str, "csv", "output format: csv or json"),
        "out": (str, None, "output path (default stdout)"),
    },
    "optimize": {
        "m": (int, 4, "alphabet size M"),
        "alpha_sq": (_FLOATS, _DEFAULT_POWERS, "signal powers, comma list"),
        "strategy": (str, "cyclic", "probing strategy: cyclic or bayes"),
        "objective": (str, "auto", "auto, analytic or mc"),
        "trials": (int, 100_000, "trials per candidate (mc objective)"),
        "beta_grid": (_FLOATS, "", "candidate surplus amplitudes (mc objective)"),
        "eta": (float, 1.0, "detector quantum efficiency"),
        "n_th": (float, 0.0, "mean thermal photons per pulse"),
        "dead_time": (float, 0.0, "detector dead time, fraction of the pulse"),
        "dark_rate": (float, 0.0, "mean dark counts per pulse"),
        "seed": (int, None, "master seed"),
        "workers": (int, None, "worker processes"),
        "format": (str, "csv", "output format: csv or json"),
        "out": (str, None, "output path (default stdout)"),
    },
    "simulate": {
        "m": (int, 4, "alphabet size M"),
        "alpha_sq": (_FLOATS, "0.5", "signal power |alpha|^2 (single value)"),
        "beta_sq": (float, 0.0, "displacement surplus photon number"),
        "strategy": (str, "cyclic", "probing strategy: cyclic or bayes"),
        "trials": (int, 10, "number of trials to record"),
        "eta": (float, 1.0, "detector quantum efficiency"),
        "n_th": (float, 0.0, "mean thermal photons per pulse"),
        "dead_time": (float, 0.0, "detector dead time, fraction of the pulse"),
        "dark_rate": (float, 0.0, "mean dark counts per pulse"),
        "seed": (int, None, "master seed"),
        "format": (str, "csv", "output format: csv or json"),
        "out": (str, None, "output path (default stdout)"),
    },
}

_RANDOMIZED = {"sweep", "optimize", "simulate"}


def _fmt(x: float) -> str:
    """Floats are serialized with 17 significant digits (round-trip safe)."""
    return format(float(x), ".17g")


def _parse_floats(text: str) -> list[float]:
    return [float(part) for part in str(text).split(",") if part.strip()]


def _convert(name: str, conv, raw):
    if raw is None:
        return None
    try:
        if conv is _FLOATS:
            return _parse_floats(raw)
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"bad value for {name!r}: {raw!r}") from exc


def _read_spec(path: str, command: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    declared = values.pop("command", command)
    if declared != command:
        raise ValueError(
            f"spec file {path} is for command {declared!r}, not {command!r}"
        )
    unknown = set(values) - set(_SCHEMA[command])
    if unknown:
        raise ValueError(f"unknown spec keys for {command}: {sorted(unknown)}")
    return values


def _dump_spec(path: str, command: str, resolved: dict) -> None:
    lines = [f"command = {command}"]
    for name, (conv, _, _) in _SCHEMA[command].items():
        value = resolved[name]
        if value is None:
            continue
        if conv is _FLOATS:
            text = ",".join(_fmt(v) for v in value)
        elif conv is float:
            text = _fmt(value)
        else:
            text = str(value)
        lines.append(f"{name} = {text}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _resolve(command: str, args: argparse.Namespace) -> dict:
    """Merge defaults, spec file, and explicit flags (flags win)."""
    schema = _SCHEMA[command]
    spec_values = _read_spec(args.spec, command) if args.spec else {}
    resolved = {}
    for name, (conv, default, _) in schema.items():
        value = getattr(args, name)
        if value is None:
            value = spec_values.get(name, default)
        resolved[name] = _convert(name, conv, value) if value is not None else None
    if command in _RANDOMIZED and resolved.get("seed") is None:
        resolved["seed"] = int.from_bytes(os.urandom(6), "big")
        print(f"seed: {resolved['seed']}", file=sys.stderr)
    if "workers" in schema and resolved.get("workers") is None:
        resolved["workers"] = int(os.environ.get("PSKRX_WORKERS", os.cpu_count() or 1))
    if "format" in schema and resolved["format"] not in ("csv", "json"):
        raise ValueError(f"unknown format {resolved['format']!r}; use csv or json")
    if "strategy" in schema and resolved.get("strategy") not in (None, "cyclic", "bayes"):
        raise ValueError(f"unknown strategy {resolved['strategy']!r}")
    return resolved


def _imperfections(cfg: dict) -> ImperfectionModel:
    return ImperfectionModel(
        eta=cfg["eta"],
        n_th=cfg["n_th"],
        dead_time=cfg["dead_time"],
        dark_rate=cfg["dark_rate"],
    )


def _single_power(cfg: dict) -> float:
    powers = cfg["alpha_sq"]
    if len(powers) != 1:
        raise ValueError(f"this command takes a single alpha_sq, got {powers}")
    return powers[0]


def _write_rows(cfg: dict, header: list[str], rows: list[dict]) -> None:
    if cfg["format"] == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = []
        out = csv.writer(_ListWriter(buf), lineterminator="\n")
        out.writerow(header)
        for row in rows:
            out.writerow(
                [_fmt(v) if isinstance(v, float) else v for v in (row[h] for h in header)]
            )
        text = "".join(buf)
    if cfg["out"] is None:
        sys.stdout.write(text)
    else:
        with open(cfg["out"], "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


class _ListWriter:
    def __init__(self, buf: list[str]):
        self.buf = buf

    def write(self, text: str) -> None:
        self.buf.append(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

_BETA_POLICIES = ("fixed", "zero", "analytic", "mc")


def _check_power_grid(powers) -> None:
    if not powers:
        raise ValueError("empty alpha_sq grid")
    if any(b <= a for a, b in zip(powers, powers[1:])):
        raise ValueError(f"alpha_sq grid must be strictly increasing: {powers}")


@dataclass(frozen=True)
class SweepSpec:
    """One fully resolved sweep: the receiver, its grid, and the run knobs."""

    M: int
    powers: tuple[float, ...]
    strategy: str
    imperfections: ImperfectionModel
    trials: int
    seed: int
    beta_policy: str
    beta_sq: float
    opt_trials: int
    workers: int

    def __post_init__(self):
        _check_power_grid(self.powers)
        if self.trials < 1:
            raise ValueError(f"need at least one trial, got {self.trials}")
        if self.beta_policy not in _BETA_POLICIES:
            raise ValueError(f"unknown beta policy {self.beta_policy!r}")

    @classmethod
    def from_config(cls, cfg: dict) -> "SweepSpec":
        return cls(
            M=cfg["m"],
            powers=tuple(cfg["alpha_sq"]),
            strategy=cfg["strategy"],
            imperfections=_imperfections(cfg),
            trials=cfg["trials"],
            seed=cfg["seed"],
            beta_policy=cfg["beta_policy"],
            beta_sq=cfg["beta_sq"],
            opt_trials=cfg["opt_trials"],
            workers=cfg["workers"],
        )

    def resolve_beta(self, alphabet: PskAlphabet) -> float:
        if self.beta_policy == "zero":
            return 0.0
        if self.beta_policy == "fixed":
            return sqrt(self.beta_sq)
        if self.beta_policy == "analytic":
            return optimize_beta_analytic(alphabet).beta_opt
        return optimize_beta_mc(
            alphabet,
            self.strategy,
            self.imperfections,
            self.opt_trials,
            self.seed + 1,  # decoupled from the final-estimate stream
            workers=self.workers,
        ).beta_opt


@dataclass(frozen=True)
class SweepRow:
    """One sweep grid point next to its reference bounds."""

    alpha_sq: float
    beta_sq: float
    p_err: float
    std_err: float
    sql: float
    helstrom: float
    trials: int
    seed: int

    def __post_init__(self):
        if not 0.0 <= self.p_err <= 1.0:
            raise ValueError(f"error probability {self.p_err} outside [0, 1]")
        if self.helstrom > self.sql + 1e-12:
            raise ValueError("quantum bound above the classical one")


def cmd_sweep(cfg: dict) -> None:
    spec = SweepSpec.from_config(cfg)
    header = ["alpha_sq", "beta_sq", "p_err", "std_err", "sql", "helstrom", "trials", "seed"]
    rows = []
    for alpha_sq in spec.powers:
        alphabet = PskAlphabet.from_power(spec.M, alpha_sq)
        beta = spec.resolve_beta(alphabet)
        est = estimate_error(
            alphabet, beta, spec.strategy, spec.imperfections,
            spec.trials, spec.seed, spec.workers,
        )
        rows.append(
            SweepRow(
                alpha_sq=float(alpha_sq),
                beta_sq=beta * beta,
                p_err=est.p_err,
                std_err=est.std_err,
                sql=bench_mod.sql_heterodyne(alphabet.alpha, spec.M),
                helstrom=bench_mod.helstrom_mpsk(alphabet.alpha, spec.M),
                trials=spec.trials,
                seed=spec.seed,
            ).__dict__
        )
    _write_rows(cfg, header, rows)


def trace_rows(M: int, alpha_sq: float, beta_sq: float, clicks: list[float]) -> list[dict]:
    """Posterior after each click and at t = 1 for an ideal receiver.

    Each row carries the probe active on the interval *starting* at the
    row's time; the receiver always begins by probing state 1.
    """
    if any(not 0.0 < t < 1.0 for t in clicks):
        raise ValueError(f"click times must lie strictly inside (0, 1): {clicks}")
    if any(later <= earlier for earlier, later in zip(clicks, clicks[1:])):
        raise ValueError(f"click times must be strictly increasing: {clicks}")
    alphabet = PskAlphabet.from_power(M, alpha_sq)
    beta = sqrt(beta_sq)
    ps = initial_posterior(M)
    rows = []

    def _row(t: float, state) -> dict:
        row = {"t": t, "probe": state.probe}
        for k in range(M):
            row[f"p{k + 1}"] = float(state.probs[k])
        row["map_state"] = select_probe(state.probs, state.probe)
        return row

    for t in clicks:
        rates = displaced_rates(alphabet, ps.probe, beta)
        ps = bayes_click_update(ps, t, rates)
        rows.append(_row(t, ps))
    rates = displaced_rates(alphabet, ps.probe, beta)
    final = bayes_silence_update(ps, 1.0, rates)
    rows.append(_row(1.0, final))
    return rows


def cmd_trace(cfg: dict) -> None:
    M = cfg["m"]
    rows = trace_rows(M, _single_power(cfg), cfg["beta_sq"], cfg["clicks"])
    header = ["t", "probe"] + [f"p{k + 1}" for k in range(M)] + ["map_state"]
    _write_rows(cfg, header, rows)


def cmd_bench(cfg: dict) -> None:
    _check_power_grid(cfg["alpha_sq"])
    header = ["alpha_sq", "sql", "helstrom"]
    rows = []
    for alpha_sq in cfg["alpha_sq"]:
        alpha = sqrt(alpha_sq)
        rows.append(
            {
                "alpha_sq": float(alpha_sq),
                "sql": bench_mod.sql_heterodyne(alpha, cfg["m"]),
                "helstrom": bench_mod.helstrom_mpsk(alpha, cfg["m"]),
            }
        )
    _write_rows(cfg, header, rows)


def cmd_optimize(cfg: dict) -> None:
    _check_power_grid(cfg["alpha_sq"])
    imp = _imperfections(cfg)
    objective = cfg["objective"]
    if objective == "auto":
        ideal = imp == ImperfectionModel()
        objective = "analytic" if (cfg["strategy"] == "cyclic" and ideal) else "mc"
    header = ["alpha_sq", "beta_opt_sq", "p_err"]
    rows = []
    for alpha_sq in cfg["alpha_sq"]:
        alphabet = PskAlphabet.from_power(cfg["m"], alpha_sq)
        if objective == "analytic":
            res = optimize_beta_analytic(alphabet)
        elif objective == "mc":
            grid = cfg["beta_grid"] or None
            res = optimize_beta_mc(
                alphabet,
                cfg["strategy"],
                imp,
                cfg["trials"],
                cfg["seed"],
                grid=grid,
                workers=cfg["workers"],
            )
        else:
            raise ValueError(f"unknown objective {objective!r}")
        rows.append(
            {
                "alpha_sq": float(alpha_sq),
                "beta_opt_sq": res.beta_opt_sq,
                "p_err": res.p_err_at_opt,
            }
        )
    _write_rows(cfg, header, rows)


def cmd_simulate(cfg: dict) -> None:
    alphabet = PskAlphabet.from_power(cfg["m"], _single_power(cfg))
    outcomes = simulate_outcomes(
        alphabet,
        sqrt(cfg["beta_sq"]),
        cfg["strategy"],
        _imperfections(cfg),
        cfg["trials"],
        cfg["seed"],
    )
    header = [
        "trial",
        "true_state",
        "hypothesis",
        "confidence",
        "correct",
        "n_clicks",
        "click_times",
        "probes",
    ]
    rows = []
    for i, oc in enumerate(outcomes):
        rows.append(
            {
                "trial": i,
                "true_state": oc.true_state,
                "hypothesis": oc.hypothesis.state,
                "confidence": oc.hypothesis.confidence,
                "correct": int(oc.correct),
                "n_clicks": len(oc.click_times),
                "click_times": ";".join(_fmt(t) for t in oc.click_times),
                "probes": ";".join(str(p) for p in oc.probe_sequence),
            }
        )
    _write_rows(cfg, header, rows)


_COMMANDS = {
    "sweep": cmd_sweep,
    "trace": cmd_trace,
    "bench": cmd_bench,
    "optimize": cmd_optimize,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pskrx",
        description="Adaptive displacement receivers for M-ary PSK coherent states.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command, schema in _SCHEMA.items():
        p = sub.add_parser(command, help=f"run the {command} command")
        p.add_argument("--spec", default=None, help="flat key=value config file")
        p.add_argument("--dump-spec", default=None, help="write the resolved config here")
        for name, (_, default, help_text) in schema.items():
            p.add_argument(
                f"--{name.replace('_', '-')}",
                dest=name,
                default=None,
                help=f"{help_text} (default: {default})",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args.command, args)
        if args.dump_spec:
            _dump_spec(args.dump_spec, args.command, cfg)
        _COMMANDS[args.command](cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except PrecisionError as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
