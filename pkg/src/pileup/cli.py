"""Command-line front end.

Usage::

    pileup <command> --config run.json [--out PATH] [--format csv|json]
           [--jobs K] [--tolerance EPS] [--exclusion F] [--regime 1..5] [--seed S]

Commands: classify, solve-discrete, solve-efn, solve-continuum, compare, sweep.

The configuration is a JSON object.  Problem keys (``K, h, sigma, n``, or
``G, b, nu`` instead of ``K``, or ``beta`` instead of ``sigma``) may sit at
the top level or inside ``"problem"``.  Optional sections: ``solver``,
``continuum``, ``thresholds``, ``output``, ``sweep``.  Unknown keys are
rejected.

CSV columns, fixed per command:

classify         regime, regime_index, beta, alpha, length_scale, n_beta, margin_beta, frame
solve-discrete   index, position, discrete_density, frame
solve-efn        index, position, discrete_density, frame
solve-continuum  index, position, density, frame
compare          curve, index, position, density, frame  (report in <out>.report.json)
sweep            instance, K, h, sigma, n, regime, beta, alpha, length_scale,
                 bulk_error_l2, bulk_error_max, frame

Exit status: 0 success, 2 invalid configuration, 3 solver failure, 4 I/O error.
"""

import argparse
import concurrent.futures
import csv
import dataclasses
import io
import json
import math
import sys
import time
from dataclasses import dataclass, field

from . import compare
from . import continuum as continuum_mod
from . import discrete as discrete_mod
from .density import DIMENSIONAL, DIMENSIONLESS, FRAMES
from .errors import ConvergenceError, PileupError, SolverFailure
from .params import MaterialParams
from .scaling import ClassifierThresholds, Regime, classify

COMMANDS = ("classify", "solve-discrete", "solve-efn", "solve-continuum", "compare", "sweep")
SWEEP_COMMANDS = ("classify", "solve-discrete", "compare")
FORMATS = ("csv", "json")

PROBLEM_KEYS = ("K", "h", "sigma", "n", "G", "b", "nu", "beta")
SOLVER_KEYS = ("residual_tolerance", "max_iterations", "line_search_shrink",
               "initial_guess", "initial_positions")
CONTINUUM_KEYS = ("grid_size", "grid_stretch", "linear_system_tolerance",
                  "domain_cutoff", "density_floor")
TOP_KEYS = ("command", "problem", "solver", "continuum", "thresholds", "regime",
            "exclusion", "frame", "output", "sweep", "sweep_command", "jobs") + PROBLEM_KEYS

COLUMNS = {
    "classify": ("regime", "regime_index", "beta", "alpha", "length_scale", "n_beta",
                 "margin_beta", "frame"),
    "solve-discrete": ("index", "position", "discrete_density", "frame"),
    "solve-efn": ("index", "position", "discrete_density", "frame"),
    "solve-continuum": ("index", "position", "density", "frame"),
    "compare": ("curve", "index", "position", "density", "frame"),
    "sweep": ("instance", "K", "h", "sigma", "n", "regime", "beta", "alpha", "length_scale",
              "bulk_error_l2", "bulk_error_max", "frame"),
}

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class RunConfig:
    problem: MaterialParams
    command: str
    solver: discrete_mod.SolveSettings = field(default_factory=discrete_mod.SolveSettings)
    continuum: continuum_mod.IntegralSolveSettings = field(
        default_factory=continuum_mod.IntegralSolveSettings)
    thresholds: ClassifierThresholds = field(default_factory=ClassifierThresholds)
    regime: Regime | None = None
    exclusion: float = 0.1
    frame: str | None = None
    output_format: str = "csv"
    output_path: str | None = None
    sweep: tuple = ()
    sweep_command: str = "compare"
    jobs: int = 1
    raw_problem: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("command", f"must be one of {COMMANDS}")
        if self.command == "sweep" and not self.sweep:
            raise ConfigError("sweep", "must be a non-empty list for the sweep command")
        if self.output_format not in FORMATS:
            raise ConfigError("output.format", f"must be one of {FORMATS}")
        if not 0 <= self.exclusion < 0.5:
            raise ConfigError("exclusion", "must lie in [0, 0.5)")
        if self.jobs < 1:
            raise ConfigError("jobs", "must be >= 1")
        if self.frame is not None and self.frame not in FRAMES:
            raise ConfigError("frame", f"must be one of {FRAMES}")
        if self.sweep_command not in SWEEP_COMMANDS:
            raise ConfigError("sweep_command", f"must be one of {SWEEP_COMMANDS}")


def _join(path, key):
    return f"{path}.{key}" if path else key


def _check_keys(doc, allowed, path):
    if not isinstance(doc, dict):
        raise ConfigError(path, "must be a JSON object")
    for key in doc:
        if key not in allowed:
            raise ConfigError(_join(path, key), "unknown key")


def _number(doc, key, path, kind=float):
    value = doc[key]
    where = _join(path, key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(where, "must be a number")
    if kind is int and int(value) != value:
        raise ConfigError(where, "must be an integer")
    return kind(value)


def build_problem(raw, path="problem"):
    """MaterialParams from a problem mapping; errors name the offending key."""
    _check_keys(raw, PROBLEM_KEYS, path)
    vals = {k: _number(raw, k, path, int if k == "n" else float) for k in raw}
    for key in ("n", "h"):
        if key not in vals:
            raise ConfigError(_join(path, key), "missing required field")
    for key in ("K", "h", "sigma", "beta", "G", "b"):
        if key in vals and not (math.isfinite(vals[key]) and vals[key] > 0):
            raise ConfigError(_join(path, key), "must be positive and finite")
    if vals["n"] < 1:
        raise ConfigError(_join(path, 'n'), "must be >= 1")
    elastic = [k for k in ("G", "b", "nu") if k in vals]
    if elastic and len(elastic) != 3:
        raise ConfigError(_join(path, elastic[0]), "G, b and nu must be given together")
    if elastic and not 0 <= vals["nu"] < 0.5:
        raise ConfigError(_join(path, 'nu'), "must lie in [0, 0.5)")
    if "beta" in vals and "sigma" in vals:
        raise ConfigError(_join(path, 'beta'), "give either sigma or beta, not both")
    if "beta" not in vals and "sigma" not in vals:
        raise ConfigError(_join(path, 'sigma'), "missing required field")
    h = vals["h"]
    if elastic:
        if "K" in vals:
            raise ConfigError(_join(path, 'K'), "give either K or G, b, nu, not both")
        K = math.pi * vals["G"] * vals["b"] / (2 * (1 - vals["nu"]))
    else:
        if "K" not in vals:
            raise ConfigError(_join(path, 'K'), "missing required field")
        K = vals["K"]
    sigma = vals["sigma"] if "sigma" in vals else K / (vals["n"] * h * vals["beta"] ** 2)
    if elastic:
        return MaterialParams(K=K, h=h, sigma=sigma, n=vals["n"],
                              G=vals["G"], b=vals["b"], nu=vals["nu"])
    return MaterialParams(K=K, h=h, sigma=sigma, n=vals["n"])


def _merge_problem(base, override):
    merged = dict(base)
    if "beta" in override:
        merged.pop("sigma", None)
    if "sigma" in override:
        merged.pop("beta", None)
    if "K" in override:
        for key in ("G", "b", "nu"):
            merged.pop(key, None)
    if any(k in override for k in ("G", "b", "nu")):
        merged.pop("K", None)
    merged.update(override)
    return merged


def _settings(doc, keys, path, cls):
    _check_keys(doc, keys, path)
    try:
        return cls(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_config(source, command=None):
    """Validate a JSON configuration document and fill in defaults.

    Parameters
    ----------
    source : str
        JSON text.
    command : str, optional
        Command from the command line; must agree with ``"command"`` in the
        document when both are present.
    """
    try:
        doc = json.loads(source)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"malformed JSON: {exc}") from exc
    _check_keys(doc, TOP_KEYS, "")
    doc_command = doc.get("command")
    if command and doc_command and command != doc_command:
        raise ConfigError("command", f"document says {doc_command!r}, command line {command!r}")
    command = command or doc_command
    if command is None:
        raise ConfigError("command", "missing required field")
    flat = {k: doc[k] for k in PROBLEM_KEYS if k in doc}
    if flat and "problem" in doc:
        raise ConfigError(next(iter(flat)), "problem keys given both at top level and in 'problem'")
    raw_problem = flat or doc.get("problem")
    if raw_problem is None:
        raise ConfigError("problem", "missing required field")
    problem = build_problem(raw_problem, "problem" if "problem" in doc else "")

    solver = _settings(doc.get("solver", {}), SOLVER_KEYS, "solver", discrete_mod.SolveSettings)
    cont = _settings(doc.get("continuum", {}), CONTINUUM_KEYS, "continuum",
                     continuum_mod.IntegralSolveSettings)
    thresholds = _settings(doc.get("thresholds", {}), ("low_band", "high_band"),
                           "thresholds", ClassifierThresholds)
    regime = None
    if doc.get("regime") is not None:
        try:
            regime = Regime.parse(doc["regime"])
        except (ValueError, TypeError) as exc:
            raise ConfigError("regime", str(exc)) from exc
    output = doc.get("output", {})
    _check_keys(output, ("format", "path"), "output")
    sweep = doc.get("sweep", [])
    if not isinstance(sweep, list):
        raise ConfigError("sweep", "must be a list of problem overrides")
    for i, item in enumerate(sweep):
        build_problem(_merge_problem(raw_problem, item), f"sweep[{i}]")
    exclusion = _number(doc, "exclusion", "") if "exclusion" in doc else 0.1
    jobs = _number(doc, "jobs", "", int) if "jobs" in doc else 1
    return RunConfig(problem=problem, command=command, solver=solver, continuum=cont,
                     thresholds=thresholds, regime=regime, exclusion=exclusion,
                     frame=doc.get("frame"), output_format=output.get("format", "csv"),
                     output_path=output.get("path"), sweep=tuple(sweep),
                     sweep_command=doc.get("sweep_command", "compare"), jobs=jobs,
                     raw_problem=dict(raw_problem))


# -- execution ---------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _csv_text(columns, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _json_text(data):
    return json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n"


def _classification_row(cls):
    d = cls.to_dict()
    return {**d, "frame": DIMENSIONAL}


def _curve_rows(field, name=None):
    rows = []
    for i, (x, v) in enumerate(zip(field.grid, field.values)):
        row = {"index": i, "position": float(x), "frame": field.frame}
        if name is None:
            row["density"] = float(v)
        else:
            row.update(curve=name, density=float(v))
        rows.append(row)
    return rows


def _solve_walls(config, efn):
    solver = config.solver
    if config.regime is not None:
        solver = dataclasses.replace(solver, regime=config.regime)
    fn = discrete_mod.solve_efn if efn else discrete_mod.solve_equilibrium
    return fn(config.problem, solver)


def _comparison(config, params=None):
    return compare.run_comparison(params or config.problem, config.solver, config.continuum,
                                  config.exclusion, config.thresholds, config.regime,
                                  frame=config.frame or DIMENSIONLESS)


def _sweep_instance(args):
    config, index, override = args
    params = build_problem(_merge_problem(config.raw_problem, override), f"sweep[{index}]")
    cls = classify(params, config.thresholds, config.regime)
    row = {"instance": index, **params.to_dict(), "regime": cls.regime.label,
           "beta": cls.beta, "alpha": cls.alpha, "length_scale": cls.length_scale,
           "bulk_error_l2": math.nan, "bulk_error_max": math.nan, "frame": DIMENSIONAL}
    if config.sweep_command == "solve-discrete":
        cfg = dataclasses.replace(config, problem=params)
        walls = _solve_walls(cfg, efn=False)
        row["iterations"] = walls.info["iterations"]
    elif config.sweep_command == "compare":
        report = _comparison(config, params)
        row["bulk_error_l2"] = report.bulk_error_l2
        row["bulk_error_max"] = report.bulk_error_max
    return row


def execute(config):
    """Run a configuration and return ``(text, extra_files, provenance)``.

    ``extra_files`` maps a filename suffix to file content written next to
    the main output.  Nothing here touches the file system.
    """
    cmd = config.command
    fmt = config.output_format
    provenance = {"command": cmd, "problem": config.problem.to_dict()}
    extra = {}
    if cmd == "classify":
        cls = classify(config.problem, config.thresholds, config.regime)
        if fmt == "csv":
            return _csv_text(COLUMNS[cmd], [_classification_row(cls)]), extra, provenance
        return _json_text({"classification": cls.to_dict(), "frame": DIMENSIONAL,
                           "problem": config.problem.to_dict()}), extra, provenance

    if cmd in ("solve-discrete", "solve-efn"):
        walls = _solve_walls(config, efn=cmd == "solve-efn")
        rho = discrete_mod.discrete_density(walls)
        rows = [{"index": i + 1, "position": float(x), "discrete_density": float(v),
                 "frame": DIMENSIONAL} for i, (x, v) in enumerate(zip(rho.grid, rho.values))]
        if fmt == "csv":
            return _csv_text(COLUMNS[cmd], rows), extra, provenance
        return _json_text({"problem": config.problem.to_dict(), "frame": DIMENSIONAL,
                           "regime": walls.info["regime"], "kernel": walls.info["kernel"],
                           "iterations": walls.info["iterations"],
                           "residual_norm": walls.info["residual_norm"],
                           "walls": rows}), extra, provenance

    if cmd == "solve-continuum":
        cls = classify(config.problem, config.thresholds, config.regime)
        field = continuum_mod.continuum_density(config.problem, cls.regime, config.continuum,
                                            frame=config.frame or DIMENSIONLESS)
        rows = _curve_rows(field)
        if fmt == "csv":
            return _csv_text(COLUMNS[cmd], rows), extra, provenance
        meta = {k: v for k, v in field.meta.items() if isinstance(v, (int, float, str))}
        return _json_text({"problem": config.problem.to_dict(),
                           "classification": cls.to_dict(), "frame": field.frame,
                           "meta": meta, "density": rows}), extra, provenance

    if cmd == "compare":
        report = _comparison(config)
        summary = report.to_dict()
        provenance["timings_seconds"] = summary["run_metadata"].pop("timings_seconds")
        rows = _curve_rows(report.discrete, "discrete") + _curve_rows(report.continuum,
                                                                        "continuum")
        if fmt == "csv":
            extra[".report.json"] = _json_text(summary)
            return _csv_text(COLUMNS[cmd], rows), extra, provenance
        return _json_text({"report": summary, "curves": rows}), extra, provenance

    # sweep
    tasks = [(config, i, item) for i, item in enumerate(config.sweep)]
    if config.jobs == 1:
        rows = [_sweep_instance(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=config.jobs) as pool:
            rows = list(pool.map(_sweep_instance, tasks))
    if fmt == "csv":
        return _csv_text(COLUMNS[cmd], rows), extra, provenance
    return _json_text({"sweep_command": config.sweep_command, "rows": rows}), extra, provenance


def run(config, stdout=None, stderr=None):
    """Execute ``config`` and write its artifacts.

    Data go to ``config.output_path`` (or stdout).  For JSON output a
    ``provenance`` block with a timestamp and timings is appended; all other
    bytes are deterministic for a fixed configuration.

    Returns
    -------
    int
        Exit status.
    """
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        text, extra, provenance = execute(config)
    except ConvergenceError as exc:
        print(f"error [stage={exc.stage}]: {exc} (iterations={exc.iterations})", file=stderr)
        return EXIT_SOLVER
    except SolverFailure as exc:
        print(f"error [stage={exc.stage}]: {exc}", file=stderr)
        return EXIT_SOLVER
    except PileupError as exc:
        print(f"error [stage={config.command}]: {exc}", file=stderr)
        return EXIT_SOLVER
    if config.output_format == "json":
        data = json.loads(text)
        provenance["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        text = _json_text({"data": data, "provenance": provenance})
    try:
        if config.output_path:
            with open(config.output_path, "w", encoding="utf-8") as fh:
                fh.write(text)
            for suffix, content in extra.items():
                with open(config.output_path + suffix, "w", encoding="utf-8") as fh:
                    fh.write(content)
        else:
            stdout.write(text)
            for suffix, content in extra.items():
                stdout.write(content)
    except OSError as exc:
        print(f"error [stage=write-output]: {exc}", file=stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pileup", description="Dislocation-wall pile-up equilibria and continuum limits.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="JSON configuration file")
    parser.add_argument("--out", help="output path (default: stdout)")
    parser.add_argument("--format", choices=FORMATS, help="output format")
    parser.add_argument("--jobs", type=int, help="parallel sweep workers")
    parser.add_argument("--tolerance", type=float, help="discrete residual tolerance")
    parser.add_argument("--exclusion", type=float, help="boundary fraction trimmed per side")
    parser.add_argument("--regime", help="override the classifier (1..5 or a regime name)")
    parser.add_argument("--seed", type=int, help="accepted and ignored; nothing is random")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config, encoding="utf-8") as fh:
            source = fh.read()
    except OSError as exc:
        print(f"error [stage=read-config]: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        config = parse_config(source, args.command)
        changes = {}
        if args.out is not None:
            changes["output_path"] = args.out
        if args.format is not None:
            changes["output_format"] = args.format
        if args.jobs is not None:
            changes["jobs"] = args.jobs
        if args.exclusion is not None:
            changes["exclusion"] = args.exclusion
        if args.regime is not None:
            try:
                changes["regime"] = Regime.parse(args.regime)
            except ValueError as exc:
                raise ConfigError("--regime", str(exc)) from exc
        if args.tolerance is not None:
            try:
                changes["solver"] = dataclasses.replace(config.solver,
                                                        residual_tolerance=args.tolerance)
            except ValueError as exc:
                raise ConfigError("--tolerance", str(exc)) from exc
        config = dataclasses.replace(config, **changes)
    except ConfigError as exc:
        print(f"error [stage=config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)
