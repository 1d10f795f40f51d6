"""Monte Carlo experiment engine: seeded scenarios, per-trial solves, CSV output."""

import csv
import dataclasses
import io
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from . import discrete
from .baselines import baseline_solve, validate_ris_only
from .channels import PLACEMENTS, FadingParams, SystemGeometry, generate_scenario
from .exceptions import ConvergenceError, DomainError, InfeasibleError
from .full_duplex import solve_full_duplex, validate_full_duplex
from .half_duplex import RELAY_SOLVERS, solve_half_duplex, validate_half_duplex

__all__ = [
    "ExperimentConfig",
    "ExperimentResult",
    "MODES",
    "PHASE_SOLVERS",
    "RESULT_FIELDS",
    "ResultRow",
    "SUMMARY_FIELDS",
    "SWEEP_VARIABLES",
    "baseline_solve",
    "format_value",
    "load_config",
    "mw_to_dbm",
    "read_rows",
    "run_experiment",
    "run_trial",
    "summarize",
    "summary_path",
    "write_results",
]

logger = logging.getLogger(__name__)

MODES = ("hd", "fd", "relay-only", "ris-only")
PHASE_SOLVERS = ("continuous", "quantized", "refinement")
SWEEP_VARIABLES = ("rth", "L", "K")
SIG_DIGITS = 12
QOS_TOL = 1e-6

RESULT_FIELDS = (
    "mode",
    "solver",
    "phase_solver",
    "sweep_value",
    "trial",
    "seed",
    "total_power_mw",
    "total_power_dbm",
    "outer_iterations",
    "converged",
    "achieved_min_rate",
)

# the two power columns name the averaging convention: linear mean first
SUMMARY_FIELDS = (
    "mode",
    "solver",
    "phase_solver",
    "sweep_variable",
    "sweep_value",
    "rate_threshold",
    "trials",
    "feasible_trials",
    "converged_trials",
    "mean_power_mw_linear",
    "mean_power_dbm_of_linear_mean",
)


def mw_to_dbm(p_mw):
    """``10 log10(p)``; non-positive or NaN powers map to NaN or -inf as numpy does."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return float(10.0 * np.log10(p_mw))


def format_value(value):
    """Render a cell: floats with 12 significant digits, booleans lowercase."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{SIG_DIGITS}g}"
    return str(value)


def _as_list(value, cast):
    if isinstance(value, str):
        value = [v for v in value.replace(",", " ").split() if v]
    if np.isscalar(value):
        value = [value]
    return [cast(v) for v in value]


def _int_value(v):
    f = float(v)
    if not f.is_integer():
        raise DomainError(f"expected an integer, got {v!r}")
    return int(f)


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one experiment table.

    Exactly one of ``rth``, ``L`` and ``K`` is swept: ``sweep`` names it and
    ``values`` lists its points, while the scalar fields give the fixed value
    of the other two. ``relay_only_duplex`` selects the relay mode used by
    the ``relay-only`` benchmark.
    """

    mode: str = "fd"
    solver: str = "duality"
    phase_solver: str = "continuous"
    b: int = 1
    sweep: str = "rth"
    values: list = field(default_factory=lambda: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    rth: float = 2.0
    M: int = 5
    N: int = 5
    K: int = 4
    L: int = 50
    trials: int = 100
    seed: int = 0
    placement: str = "users-center"
    distance: float = 300.0
    fading: FadingParams = field(default_factory=FadingParams)
    relay_only_duplex: str = "fd"
    tol: float = 1e-4
    max_outer: int = 50
    out: str = None

    def __post_init__(self):
        if isinstance(self.fading, dict):
            self.fading = FadingParams(**self.fading)
        for name, choices in (
            ("mode", MODES),
            ("solver", RELAY_SOLVERS),
            ("phase_solver", PHASE_SOLVERS),
            ("sweep", SWEEP_VARIABLES),
            ("placement", PLACEMENTS),
            ("relay_only_duplex", ("hd", "fd")),
        ):
            if getattr(self, name) not in choices:
                raise DomainError(f"{name} must be one of {choices}, got {getattr(self, name)!r}")
        cast = float if self.sweep == "rth" else _int_value
        self.values = _as_list(self.values, cast)
        if not self.values:
            raise DomainError("sweep values must not be empty")
        for name in ("M", "N", "K", "L", "trials", "seed", "b", "max_outer"):
            setattr(self, name, _int_value(getattr(self, name)))
        self.rth = float(self.rth)
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.b < 1:
            raise DomainError("b must be >= 1")
        if self.seed < 0:
            raise DomainError("seed must be >= 0")
        # catches bad sizes early rather than inside the first trial
        for value in self.values:
            self.geometry(value)
            if self.sweep == "rth" and (not math.isfinite(value) or value < 0):
                raise DomainError("rate thresholds must be finite and >= 0")

    @classmethod
    def from_dict(cls, data):
        """Build from a JSON-style mapping.

        A list under ``rth``, ``L`` or ``K`` is shorthand for sweeping that
        variable; at most one may be given.
        """
        data = dict(data)
        unknown = set(data) - {f.name for f in dataclasses.fields(cls)}
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        listed = [k for k in SWEEP_VARIABLES if isinstance(data.get(k), (list, tuple))]
        if len(listed) > 1:
            raise DomainError(f"only one sweep variable allowed, got {listed}")
        if listed:
            name = listed[0]
            if data.get("sweep", name) != name or "values" in data:
                raise DomainError(f"{name} list conflicts with sweep/values entries")
            data["sweep"] = name
            data["values"] = data.pop(name)
        return cls(**data)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["fading"] = dataclasses.asdict(self.fading)
        return d

    def with_overrides(self, **overrides):
        """Copy with non-``None`` overrides applied (same rules as :meth:`from_dict`)."""
        d = self.to_dict()
        listed = [k for k in SWEEP_VARIABLES if overrides.get(k) is not None]
        if len(listed) > 1:
            raise DomainError(f"only one sweep variable allowed, got {listed}")
        for name in listed:
            d["sweep"] = name
            d["values"] = overrides.pop(name)
        d.update({k: v for k, v in overrides.items() if v is not None})
        return type(self)(**d)

    def rate_threshold(self, value):
        return float(value) if self.sweep == "rth" else self.rth

    def geometry(self, value):
        sizes = dict(M=self.M, N=self.N, K=self.K, L=self.L)
        if self.sweep in ("L", "K"):
            sizes[self.sweep] = int(value)
        return SystemGeometry.preset(self.placement, self.distance, **sizes)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


@dataclass(frozen=True)
class ResultRow:
    mode: str
    solver: str
    phase_solver: str
    sweep_value: float
    trial: int
    seed: int
    total_power_mw: float
    total_power_dbm: float
    outer_iterations: int
    converged: bool
    achieved_min_rate: float

    def cells(self):
        return [format_value(getattr(self, name)) for name in RESULT_FIELDS]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    summary: list

    def to_csv(self):
        return _csv_text(RESULT_FIELDS, [r.cells() for r in self.rows])

    def summary_csv(self):
        return _csv_text(SUMMARY_FIELDS, [[format_value(r[k]) for k in SUMMARY_FIELDS] for r in self.summary])


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _validate(ch, mode, config, solution, rth):
    if mode == "ris-only":
        return validate_ris_only(ch, solution, rth)
    if mode == "relay-only":
        dead = ch.without_ris()
        if config.relay_only_duplex == "hd":
            return validate_half_duplex(dead, solution, rth)
        return validate_full_duplex(dead, solution, rth)
    if mode == "hd":
        return validate_half_duplex(ch, solution, rth)
    return validate_full_duplex(ch, solution, rth)


def _solve(ch, config, rth):
    """Return ``(solution, outer_iterations, converged)`` for one scenario."""
    mode = config.mode
    opts = dict(tol=config.tol, max_outer=config.max_outer)
    if mode == "relay-only":
        sol = baseline_solve(ch, mode, rth, duplex=config.relay_only_duplex, relay_solver=config.solver, **opts)
        return sol, sol.outer_iterations, sol.converged
    if mode == "ris-only":
        sol = baseline_solve(ch, mode, rth, **opts)
    elif mode == "hd":
        sol = solve_half_duplex(ch, rth, relay_solver=config.solver, **opts)
    else:
        sol = solve_full_duplex(ch, rth, relay_solver=config.solver, **opts)
    if config.phase_solver == "continuous":
        return sol, sol.outer_iterations, sol.converged
    if config.phase_solver == "quantized":
        idx = discrete.quantize_solution(sol.phases, config.b)
        q = discrete.discrete_objective(ch, mode, rth, config.b, idx, relay_solver=config.solver)
        return q, sol.outer_iterations, sol.converged
    ref = discrete.successive_refinement(
        ch, mode, rth, config.b, init=sol.phases, relay_solver=config.solver
    )
    return ref.solution, ref.sweeps, ref.converged


def run_trial(config, value, trial):
    """Generate the scenario for ``(value, trial)``, solve, validate and report a row."""
    seed = config.seed + trial
    rth = config.rate_threshold(value)
    ch = generate_scenario(config.geometry(value), config.fading, seed)
    try:
        sol, iters, converged = _solve(ch, config, rth)
    except (InfeasibleError, ConvergenceError) as exc:
        logger.warning("trial %d at %s=%s failed: %s", trial, config.sweep, value, exc)
        p = float("nan")
        return ResultRow(
            config.mode, config.solver, config.phase_solver, float(value), trial, seed,
            p, p, 0, False, float("nan"),
        )
    report = _validate(ch, config.mode, config, sol, rth)
    if converged and not report.ok:
        logger.warning("trial %d at %s=%s violates its constraints by %g", trial, config.sweep, value, -report.min_margin)
        converged = False
    p = float(sol.total_power)
    return ResultRow(
        mode=config.mode,
        solver=config.solver,
        phase_solver=config.phase_solver,
        sweep_value=float(value),
        trial=trial,
        seed=seed,
        total_power_mw=p,
        total_power_dbm=mw_to_dbm(p),
        outer_iterations=int(iters),
        converged=bool(converged),
        achieved_min_rate=float(sol.achieved_min_rate),
    )


def summarize(config, rows):
    """Per-sweep-value means; powers are averaged in mW, then converted to dBm."""
    out = []
    for value in config.values:
        sel = [r for r in rows if r.sweep_value == float(value)]
        powers = np.array([r.total_power_mw for r in sel], dtype=float)
        ok = powers[np.isfinite(powers)]
        mean = float(np.mean(ok)) if ok.size else float("nan")
        out.append(
            dict(
                mode=config.mode,
                solver=config.solver,
                phase_solver=config.phase_solver,
                sweep_variable=config.sweep,
                sweep_value=float(value),
                rate_threshold=config.rate_threshold(value),
                trials=len(sel),
                feasible_trials=int(ok.size),
                converged_trials=sum(r.converged for r in sel),
                mean_power_mw_linear=mean,
                mean_power_dbm_of_linear_mean=mw_to_dbm(mean),
            )
        )
    return out


def run_experiment(config, write=True):
    """Run every (sweep value, trial) pair in order and collect the rows.

    Trial ``t`` uses seed ``config.seed + t`` for every sweep value, so
    different modes and sweep points see the same channel draws. Results are
    written to ``config.out`` (plus a summary sidecar) when it is set and
    ``write`` is true.
    """
    if not isinstance(config, ExperimentConfig):
        config = ExperimentConfig.from_dict(config)
    if write and config.out:
        _check_writable(config.out)
    rows = [run_trial(config, v, t) for v in config.values for t in range(config.trials)]
    result = ExperimentResult(config=config, rows=rows, summary=summarize(config, rows))
    if write and config.out:
        write_results(result, config.out)
    return result


def summary_path(path):
    root, ext = os.path.splitext(path)
    return f"{root}.summary{ext or '.csv'}"


def _check_writable(path):
    folder = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(folder) or not os.access(folder, os.W_OK):
        raise OSError(f"cannot write results to {path!r}")


def write_results(result, path):
    """Write the row table to ``path`` and the summary next to it."""
    _check_writable(path)
    for target, text in ((path, result.to_csv()), (summary_path(path), result.summary_csv())):
        with open(target, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    return path, summary_path(path)


def _parse_cell(name, text):
    if name in ("mode", "solver", "phase_solver", "sweep_variable"):
        return text
    if name == "converged":
        if text not in ("true", "false"):
            raise DomainError(f"converged must be true/false, got {text!r}")
        return text == "true"
    if name in ("trial", "seed", "outer_iterations", "trials", "feasible_trials", "converged_trials"):
        return int(text)
    return float(text)


def read_rows(path, fields=RESULT_FIELDS):
    """Parse a result (or summary) CSV, checking the header exactly."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != tuple(fields):
            raise DomainError(f"{path}: header {header} does not match {list(fields)}")
        return [{k: _parse_cell(k, v) for k, v in zip(fields, line)} for line in reader]
