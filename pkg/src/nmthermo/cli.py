"""Command-line front end.

    nmthermo example1 --beta 1 --omega 1 --profile const --gamma0 1
    nmthermo example2 --beta 0.1 --eps 1 --lam 1 --horizon 10 --grid 2000
    nmthermo example3 --s 4 --beta 0.01 --lam 0.05 --output deph.csv
    nmthermo classify --profile osc --gamma0 1 --a 1.5 --nu 5 --horizon 10
    nmthermo sweep --count 10000 --seed 7 --workers 4
    nmthermo fig1 --output fig1.csv --plot fig1.png

Parameters come from the built-in defaults, then an optional ``--config``
file of ``key = value`` lines, then the flags.  Exit status is 0 on success,
2 for invalid input and 3 when a numerical method fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .damping_map import (
    DampingParams,
    DampingProfile,
    SignCheck,
    classify_divisibility,
    damping_series,
    evolve_damping,
    sign_theorem_sweep,
)
from .dephasing import DephasingConfig, SpectralDensity, dephasing_table, find_negative_window
from .errors import GridTooCoarse, NumericalError, ParameterOutOfRange, ValidationError
from .gad_map import GadSchedule, evolve_gad, fig1_scan, gad_series, sigma_integrated_gad, sigma_minimum
from .numerics import DEFAULT_SEED
from .qstate import GibbsSpec, QubitState
from .thermo import ThermoSample, integrated_entropy_production

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

SWEEP_CHUNK = 1000
# I/O destinations are not part of the experiment record
_NOT_RECORDED = ("output", "plot", "config")

# key -> (type, help)
PARAMETERS: dict[str, tuple[type, str]] = {
    "beta": (float, "inverse bath temperature"),
    "omega": (float, "qubit splitting (H = omega/2 sz)"),
    "profile": (str, "damping profile: const, osc or sampled"),
    "gamma0": (float, "damping scale"),
    "a": (float, "oscillation amplitude of the osc profile"),
    "nu": (float, "oscillation frequency of the osc profile"),
    "samples": (str, "sampled profile as 't:gamma,t:gamma,...'"),
    "eps": (float, "bump frequency of the GAD schedule"),
    "lam": (float, "GAD relaxation rate, or system-bath coupling for example3"),
    "s": (float, "ohmicity of the spectral density"),
    "omega_c": (float, "cutoff frequency"),
    "rho0": (str, "initial Bloch vector 'x,y,z'"),
    "grid": (int, "number of time samples"),
    "horizon": (float, "final time"),
    "seed": (int, "random seed"),
    "count": (int, "number of random configurations"),
    "workers": (int, "worker threads"),
    "format": (str, "csv or json"),
    "output": (str, "output file, '-' for stdout"),
    "plot": (str, "also render a PNG figure to this path"),
}

_IO = {"format": "csv", "output": "-", "plot": ""}
_PROFILE = {"profile": "osc", "gamma0": 1.0, "a": 1.5, "nu": 5.0, "samples": ""}

DEFAULTS: dict[str, dict[str, object]] = {
    "example1": {"beta": 1.0, "omega": 1.0, **_PROFILE, "rho0": "0.5,0,0.5",
                 "grid": 2000, "horizon": 10.0, **_IO},
    "example2": {"beta": 0.1, "eps": 1.0, "lam": 1.0, "rho0": "0,0,0", "grid": 2000, "horizon": 10.0, **_IO},
    "example3": {"s": 4.0, "omega_c": 1.0, "beta": 0.01, "lam": 0.05, "rho0": "0.8,0,0",
                 "grid": 2000, "horizon": 20.0, **_IO},
    "classify": {**_PROFILE, "grid": 2000, "horizon": 10.0, **_IO},
    "sweep": {"count": 10000, "seed": DEFAULT_SEED, "workers": 4, **_IO},
    "fig1": {"beta": 0.1, "eps": 1.0, "lam": 1.0, "grid": 2000, "horizon": 10.0, **_IO},
}


@dataclass
class RunConfig:
    command: str
    parameters: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.parameters[key]

    def recorded(self) -> dict:
        params = {k: v for k, v in self.parameters.items() if k not in _NOT_RECORDED}
        return {"command": self.command, "version": __version__, **params}


@dataclass
class RunResult:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    plot: Callable[[str], None] | None = None
    message: str = ""


# ---------------------------------------------------------------- parsing

def _convert(key: str, raw) -> object:
    kind = PARAMETERS[key][0]
    try:
        if kind is int:
            value = float(raw)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return kind(raw)
    except (TypeError, ValueError):
        raise ParameterOutOfRange(f"{key}: cannot read {raw!r} as {kind.__name__}") from None


def read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path!r}: {exc.strerror}") from None
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{num}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def resolve(command: str, file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults <- config file <- flags and convert every value."""
    if command not in DEFAULTS:
        raise ValidationError(f"unknown command {command!r}")
    allowed = DEFAULTS[command]
    unknown = sorted(set(file_values) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown keys for {command}: {', '.join(unknown)}")
    params = dict(allowed)
    params.update(file_values)
    params.update({k: v for k, v in flag_values.items() if v is not None})
    return RunConfig(command, {k: _convert(k, v) for k, v in params.items()})


def parse_rho0(text: str) -> QubitState:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ParameterOutOfRange(f"rho0 must be 'x,y,z', got {text!r}")
    try:
        x, y, z = (float(p) for p in parts)
    except ValueError:
        raise ParameterOutOfRange(f"rho0 must be three numbers, got {text!r}") from None
    return QubitState(x, y, z)


def parse_samples(text: str) -> tuple:
    rows = []
    for item in filter(None, text.replace(" ", "").split(",")):
        try:
            t, g = item.split(":")
            rows.append((float(t), float(g)))
        except ValueError:
            raise ParameterOutOfRange(f"samples entry {item!r} is not 't:gamma'") from None
    return tuple(rows)


def _profile(cfg: RunConfig) -> DampingProfile:
    return DampingProfile(cfg["profile"], cfg["gamma0"], cfg["a"], cfg["nu"], parse_samples(cfg["samples"]))


def _grid(cfg: RunConfig) -> np.ndarray:
    if cfg["grid"] < 2:
        raise ParameterOutOfRange("grid must be >= 2")
    if not (cfg["horizon"] > 0 and math.isfinite(cfg["horizon"])):
        raise ParameterOutOfRange("horizon must be > 0")
    return np.linspace(0.0, cfg["horizon"], cfg["grid"])


def _common(cfg: RunConfig) -> None:
    if cfg["format"] not in ("csv", "json"):
        raise ParameterOutOfRange(f"format must be csv or json, got {cfg['format']!r}")


# ---------------------------------------------------------------- output

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_value(value):
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def render(columns: Sequence[str], rows: Sequence[Sequence], fmt: str, metadata: dict) -> str:
    if not rows:
        raise ValidationError("refusing to write an empty series")
    if fmt == "json":
        records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
        return json.dumps({"metadata": metadata, "records": records}, indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(metadata["config"], sort_keys=True) + "\n")
    extra = {k: v for k, v in metadata.items() if k != "config"}
    if extra:
        buf.write("# result: " + json.dumps(extra, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows([_fmt(v) for v in row] for row in rows)
    return buf.getvalue()


def emit_series(samples: Sequence[ThermoSample], fmt: str, path: str, metadata: dict | None = None) -> None:
    """Write a thermodynamic time series as CSV or JSON (``path='-'`` for stdout)."""
    metadata = metadata if metadata is not None else {"config": {}}
    text = render(ThermoSample.columns(), [s.values() for s in samples], fmt, metadata)
    _write(text, path)


def _write(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ValidationError(f"cannot write {path!r}: {exc.strerror}") from None


# ---------------------------------------------------------------- commands

def _thermo_result(samples: list[ThermoSample], metadata: dict, title: str) -> RunResult:
    cols = ThermoSample.columns()
    rows = [s.values() for s in samples]

    def plot(path):
        from .plotting import plot_columns

        data = {c: [r[i] for r in rows] for i, c in enumerate(cols)}
        plot_columns(data, "tau", [["sigma"], ["Sigma", "relent"], ["x", "y", "z"]], path, title)

    return RunResult(cols, rows, metadata, plot)


def _check_integrated(samples, spec, rho0, final, metadata) -> None:
    try:
        got = integrated_entropy_production(samples, spec, rho0, final)
        metadata["Sigma_relent_difference"] = got.relent_difference
    except GridTooCoarse as exc:
        from .qstate import relative_entropy_to_gibbs

        metadata["Sigma_relent_difference"] = (relative_entropy_to_gibbs(rho0, spec)
                                               - relative_entropy_to_gibbs(final, spec))
        metadata["warning"] = str(exc)
        print(f"warning: {exc}; refine --grid", file=sys.stderr)


def run_example1(cfg: RunConfig) -> RunResult:
    params = DampingParams(_profile(cfg), GibbsSpec(cfg["beta"], cfg["omega"]))
    rho0 = parse_rho0(cfg["rho0"])
    taus = _grid(cfg)
    samples = damping_series(rho0, params, taus)
    meta = {"min_sigma": min(s.sigma for s in samples), "min_Sigma": min(s.Sigma for s in samples)}
    _check_integrated(samples, params.spec, rho0, evolve_damping(rho0, params, float(taus[-1])), meta)
    return _thermo_result(samples, meta, "damping map")


def run_example2(cfg: RunConfig) -> RunResult:
    sched = GadSchedule(cfg["eps"], cfg["lam"], cfg["beta"])
    rho0 = parse_rho0(cfg["rho0"])
    taus = _grid(cfg)
    samples = gad_series(rho0, sched, taus)
    windows = fig1_scan(sched, cfg["grid"], cfg["horizon"], rho0).windows
    meta = {"min_Sigma": min(s.Sigma for s in samples), "negative_windows": [list(w) for w in windows]}
    _check_integrated(samples, sched.spec, rho0, evolve_gad(rho0, sched, float(taus[-1])), meta)
    return _thermo_result(samples, meta, "generalized amplitude damping")


def run_fig1(cfg: RunConfig) -> RunResult:
    sched = GadSchedule(cfg["eps"], cfg["lam"], cfg["beta"])
    rho0 = QubitState(0.0, 0.0, 0.0)
    taus = _grid(cfg)
    samples = gad_series(rho0, sched, taus)
    # Sigma from the exact relative-entropy drop rather than the running trapezoid
    samples = [
        ThermoSample(s.tau, s.x, s.y, s.z, s.S, s.dS, s.dQ, s.sigma, sigma_integrated_gad(rho0, sched, s.tau), s.relent)
        for s in samples
    ]
    tau_star, sigma_star = sigma_minimum(sched, cfg["grid"], cfg["horizon"], rho0)
    windows = fig1_scan(sched, cfg["grid"], cfg["horizon"], rho0).windows
    meta = {"tau_min": tau_star, "Sigma_min": sigma_star, "negative_windows": [list(w) for w in windows]}
    return _thermo_result(samples, meta, "integrated entropy production, maximally mixed start")


def run_example3(cfg: RunConfig) -> RunResult:
    conf = DephasingConfig(SpectralDensity(cfg["s"], cfg["omega_c"]), cfg["beta"], cfg["lam"], parse_rho0(cfg["rho0"]))
    taus = _grid(cfg)
    table = dephasing_table(conf, taus)
    cols = list(table)
    rows = [tuple(float(table[c][i]) for c in cols) for i in range(len(taus))]
    windows = find_negative_window(conf, (float(taus[0]), float(taus[-1])), grid=cfg["grid"])
    meta = {"negative_windows": [list(w) for w in windows], "min_cumulative": float(np.min(table["cumulative"]))}

    def plot(path):
        from .plotting import plot_columns

        plot_columns(table, "tau", [["dS_S", "dS_B"], ["dQ_B", "dU_chi"], ["cumulative"]], path, "dephasing")

    return RunResult(cols, rows, meta, plot)


def run_classify(cfg: RunConfig) -> RunResult:
    profile = _profile(cfg)
    label = classify_divisibility(profile, cfg["horizon"], cfg["grid"]).value
    taus = _grid(cfg)
    rates = profile.rate(taus)

    def plot(path):
        from .damping_map import rate_integral
        from .plotting import plot_columns

        steps = [rate_integral(profile, a, b) for a, b in zip(taus[:-1], taus[1:])]
        data = {"tau": taus, "gamma": rates, "integral": np.concatenate(([0.0], np.cumsum(steps)))}
        plot_columns(data, "tau", [["gamma"], ["integral"]], path, label)

    return RunResult(["classification", "min_gamma"], [(label, float(rates.min()))], {}, plot, label)


def _sweep_chunk(args) -> list[SignCheck]:
    seed, stream, count = args
    return sign_theorem_sweep(count, seed, stream)


def run_sweep(cfg: RunConfig) -> RunResult:
    count, workers = cfg["count"], cfg["workers"]
    if count < 1 or workers < 1:
        raise ParameterOutOfRange("count and workers must be >= 1")
    # fixed chunking: each chunk has its own random stream, so the result
    # does not depend on the number of workers
    jobs = [(cfg["seed"], k, min(SWEEP_CHUNK, count - k * SWEEP_CHUNK)) for k in range(-(-count // SWEEP_CHUNK))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        checks = [c for chunk in pool.map(_sweep_chunk, jobs) for c in chunk]
    cols = [f.name for f in fields(SignCheck)] + ["consistent"]
    rows = [tuple(asdict(c).values()) + (c.consistent,) for c in checks]
    bad = sum(not c.consistent for c in checks)
    meta = {"inconsistent": bad, "min_abc": min(c.abc for c in checks)}

    def plot(path):
        from .plotting import plot_scatter

        plot_scatter([c.rate for c in checks], [c.sigma for c in checks], "gamma_tau", "sigma_tau", path,
                     f"{len(checks)} configurations, {bad} sign mismatches")

    return RunResult(cols, rows, meta, plot, f"{len(checks)} configurations, {bad} sign mismatches")


COMMANDS: dict[str, Callable[[RunConfig], RunResult]] = {
    "example1": run_example1,
    "example2": run_example2,
    "example3": run_example3,
    "classify": run_classify,
    "sweep": run_sweep,
    "fig1": run_fig1,
}

HELP = {
    "example1": "time-dependent damping rate",
    "example2": "generalized amplitude damping with a bump schedule",
    "example3": "pure dephasing by a bosonic bath",
    "classify": "divisibility class of a damping profile",
    "sweep": "random check of sign(sigma) = sign(gamma)",
    "fig1": "integrated entropy production of a maximally mixed start",
}


def run(cfg: RunConfig) -> int:
    _common(cfg)
    result = COMMANDS[cfg.command](cfg)
    metadata = {"config": cfg.recorded(), **result.metadata}
    _write(render(result.columns, result.rows, cfg["format"], metadata), cfg["output"])
    if result.message and cfg["output"] != "-":
        print(result.message)
    if cfg["plot"]:
        result.plot(cfg["plot"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nmthermo", description=__doc__.split("\n\n")[0],
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, defaults in DEFAULTS.items():
        p = sub.add_parser(name, help=HELP[name], allow_abbrev=False)
        p.add_argument("--config", help="key = value file supplying defaults")
        for key in defaults:
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None,
                           help=f"{PARAMETERS[key][1]} (default {defaults[key]!r})")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        file_values = read_config_file(args.config) if args.config else {}
        cfg = resolve(args.command, file_values, flags)
        return run(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
