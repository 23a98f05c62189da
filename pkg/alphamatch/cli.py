"""Command-line front end.

Each subcommand is a thin layer over the library: it validates its flags through a
`ParameterSet`, runs one experiment and writes the result as CSV (headed by a
manifest line `# alphamatch <command> k=v ...`) or as JSON.

Commands:
    tree         matching intervals, gaps and coverage of the matching tree
    entropy      Birkhoff entropy estimates on a grid of parameters
    scan         matching intervals from random rational seeds
    chain        the period-doubling chain and its cluster point
    density      invariant density histogram and hyperbola fits
    extrapolate  logarithmic against linear entropy extrapolation

Exit codes:
    0 on success, 1 on usage errors or output that cannot be written, 2 when a gap's
    pseudocenter interval is not a matching interval (a certificate is written next
    to `--out`), 3 on any other verification or exact-arithmetic failure.
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NoReturn, TextIO

import mpmath
import pandas as pd

from .cfrac import CFString, Interval
from .entropy import (
    EstimatorConfig,
    RestartPolicy,
    compare_extrapolations,
    density_histogram,
    fit_extrapolation,
    fit_hyperbola,
    fit_windows,
    linear_fit,
    sigma_profile,
)
from .exceptions import (
    AlphaMatchError,
    ConfigurationError,
    ConjectureCounterexampleError,
    IllConditionedError,
    InvalidStringError,
    ValidationError,
)
from .exactnum import to_surd
from .matching import (
    DEFAULT_KMAX,
    MAX_SCAN_K,
    MatchingCandidate,
    matching_exponents,
    scan_pipeline,
    solve_matching,
)
from .params import (
    BoundedFloatConstraint,
    BoundedIntConstraint,
    IntervalConstraint,
    LiteralStrConstraint,
    ParameterSet,
    WindowConstraint,
)
from .tree import (
    CoverageReport,
    Verification,
    cluster_point,
    coverage,
    doubling_chain,
    generate_tree,
    size_records,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_COUNTEREXAMPLE = 2
EXIT_VERIFICATION = 3

PARAMETER_RANGE = IntervalConstraint(0.0, 1.0, lower_open=True)

RUN_SCHEMA = {
    "window": WindowConstraint(PARAMETER_RANGE),
    "fit_window": WindowConstraint(PARAMETER_RANGE),
    "depth": BoundedIntConstraint(0, 40),
    "grid": BoundedIntConstraint(1, 10**6),
    "iters": BoundedIntConstraint(1, 10**12),
    "samples": BoundedIntConstraint(1, 10**12),
    "points": BoundedIntConstraint(1, 10**12),
    "epsilon": BoundedFloatConstraint(0.0, 1.0, lower_open=True),
    "seed": BoundedIntConstraint(0, 2**64 - 1),
    "restart": LiteralStrConstraint([p.value for p in RestartPolicy]),
    "threads": BoundedIntConstraint(1, 1024),
    "kmax": BoundedIntConstraint(1, MAX_SCAN_K),
    "seeds": BoundedIntConstraint(1, 10**8),
    "bins": BoundedIntConstraint(10, 10**7),
    "alpha": BoundedFloatConstraint(0.0, 1.0, lower_open=True),
    "levels": BoundedIntConstraint(1, 20),
    "verify": LiteralStrConstraint(["solve", "spot"]),
    "format": LiteralStrConstraint(["csv", "json"]),
}

type Tables = dict[str, pd.DataFrame]


class _Parser(argparse.ArgumentParser):
    """An argument parser that reports usage errors as `ValidationError`."""

    def error(self, message: str) -> NoReturn:
        raise ValidationError(message)


# -------------------------------------------------------------------------------------
#   Run configuration
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RunConfig:
    """The validated flags of one command.

    Attributes:
        command: Name of the subcommand.
        params: Every numeric or categorical flag that was given, validated against
            `RUN_SCHEMA`.
        alpha: The exact parameter given by `--alpha`, if any.
        start: The initial string of a doubling chain, if any.
        out: Output path, or None for standard output.
    """

    command: str
    params: ParameterSet
    alpha: Fraction | None = None
    start: CFString | None = None
    out: Path | None = None

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        """Validate the parsed flags.

        Raises:
            ValidationError: If a flag is out of range or the output directory does
                not exist.
        """
        values = {
            k: v for k, v in vars(ns).items() if k in RUN_SCHEMA and v is not None
        }
        alpha = getattr(ns, "alpha", None)
        if alpha is not None:
            values["alpha"] = float(alpha)
        out = ns.out
        if out is not None and not out.parent.is_dir():
            msg = f"Invalid output path: directory {out.parent} does not exist"
            raise ValidationError(msg)
        params = ParameterSet(RUN_SCHEMA, values)
        return cls(ns.command, params, alpha, getattr(ns, "start", None), out)

    def get[T](self, name: str, cls: type[T]) -> T:
        value = self.params[name]
        if not isinstance(value, cls):
            msg = f"Parameter {name!r}: expected {cls.__name__}, got {value!r}"
            raise ConfigurationError(msg)
        return value

    def window(self, name: str = "window") -> tuple[float, float]:
        lo, hi = self.get(name, tuple)
        return (float(lo), float(hi))

    def estimator(self) -> EstimatorConfig:
        return EstimatorConfig(
            iterations=self.get("iters", int),
            samples=self.get("samples", int),
            epsilon=self.get("epsilon", float),
            rng_seed=self.get("seed", int),
            restart_policy=RestartPolicy(self.get("restart", str)),
        )

    @property
    def manifest(self) -> str:
        parts = [self.command, self.params.manifest()]
        if self.alpha is not None:
            parts.append(f"alpha_exact={self.alpha}")
        if self.start is not None:
            parts.append(f"start={self.start}")
        return " ".join(["# alphamatch", *(p for p in parts if p)])


# -------------------------------------------------------------------------------------
#   Output
# -------------------------------------------------------------------------------------


def _table_path(out: Path, name: str) -> Path:
    return out if not name else out.with_name(f"{out.stem}_{name}{out.suffix}")


def _write_table(stream: TextIO, cfg: RunConfig, name: str, df: pd.DataFrame) -> None:
    if cfg.get("format", str) == "json":
        payload = {
            "manifest": cfg.manifest,
            "table": name or cfg.command,
            "rows": json.loads(df.to_json(orient="records")),
        }
        json.dump(payload, stream, indent=2)
        stream.write("\n")
        return
    stream.write(cfg.manifest + "\n")
    df.to_csv(stream, index=False)


def write_tables(cfg: RunConfig, tables: Tables) -> list[Path]:
    """Write each table to its own file next to `--out`, or all to stdout.

    The first table goes to `--out` itself; the others get a `_<name>` suffix.
    """
    if cfg.out is None:
        for name, df in tables.items():
            _write_table(sys.stdout, cfg, name, df)
        return []
    paths: list[Path] = []
    for i, (name, df) in enumerate(tables.items()):
        path = _table_path(cfg.out, "" if i == 0 else name)
        with path.open("w", encoding="utf-8") as stream:
            _write_table(stream, cfg, name, df)
        paths.append(path)
    logger.info("Wrote %s", ", ".join(str(p) for p in paths))
    return paths


def write_certificate(cfg: RunConfig, certificate: Mapping[str, object]) -> Path | None:
    if cfg.out is None:
        return None
    path = _table_path(cfg.out.with_suffix(".json"), "certificate")
    data = {"manifest": cfg.manifest, **{k: str(v) for k, v in certificate.items()}}
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")
    return path


# -------------------------------------------------------------------------------------
#   Commands
# -------------------------------------------------------------------------------------


def _window_interval(window: tuple[float, float]) -> Interval:
    lo, hi = (to_surd(Fraction(str(x))) for x in window)
    return Interval(lo, hi, lo_closed=True, hi_closed=True)


def _verification(cfg: RunConfig) -> Verification:
    return "spot" if cfg.get("verify", str) == "spot" else "solve"


def cmd_tree(cfg: RunConfig) -> Tables:
    window = cfg.window() if "window" in cfg.params else None
    area = None if window is None else _window_interval(window)
    tree = generate_tree(
        cfg.get("depth", int),
        window=area,
        verification=_verification(cfg),
        threads=cfg.get("threads", int),
    )
    intervals = sorted(tree.all_intervals(), key=lambda m: m.lo)
    measured = Interval.of(0, 1, hi_closed=True) if area is None else area
    report = coverage(intervals, measured)
    logger.info("Coverage of %s: %s", measured, report.value)
    return {
        "intervals": pd.DataFrame([m.to_row() for m in intervals]),
        "gaps": pd.DataFrame([g.to_row() for g in tree.gaps]),
        "sizes": pd.DataFrame(size_records(intervals)),
        "coverage": pd.DataFrame([coverage_row(measured, report)]),
    }


def coverage_row(window: Interval, report: CoverageReport) -> dict[str, object]:
    return {
        "window": str(window),
        "lower": float(report.lower),
        "upper": float(report.upper),
        "value": mpmath.nstr(report.value, 12),
        "intervals": report.intervals,
    }


def cmd_entropy(cfg: RunConfig) -> Tables:
    estimates = sigma_profile(
        cfg.window(),
        cfg.get("grid", int),
        cfg.estimator(),
        threads=cfg.get("threads", int),
    )
    return {"entropy": pd.DataFrame([e.to_row() for e in estimates])}


def cmd_scan(cfg: RunConfig) -> Tables:
    report = scan_pipeline(
        cfg.window(),
        cfg.get("seeds", int),
        kmax=cfg.get("kmax", int),
        rng_seed=cfg.get("seed", int),
    )
    logger.info(
        "%d intervals, %d unmatched seeds, %d rejected",
        len(report.intervals),
        report.unmatched,
        len(report.failures),
    )
    return {"intervals": pd.DataFrame([m.to_row() for m in report.intervals])}


def cmd_chain(cfg: RunConfig) -> Tables:
    s0 = CFString.of(1) if cfg.start is None else cfg.start
    levels = cfg.get("levels", int)
    chain = doubling_chain(s0, levels, _verification(cfg))
    point = cluster_point(s0, levels)
    logger.info("Cluster point: %s", point.decimal)
    rows = [{"level": i, **m.to_row()} for i, m in enumerate(chain, start=1)]
    cluster = {"prefix": str(point.prefix), "decimal": point.decimal}
    return {"chain": pd.DataFrame(rows), "cluster": pd.DataFrame([cluster])}


def _require_alpha(cfg: RunConfig) -> Fraction:
    if cfg.alpha is None:
        msg = f"Parameter 'alpha': required by {cfg.command}"
        raise ValidationError(msg)
    return cfg.alpha


def _exponents(alpha: Fraction, kmax: int) -> tuple[int, int]:
    exponents = matching_exponents(alpha, kmax)
    if exponents is None:
        msg = f"Invalid alpha: no verified matching at {alpha} within kmax={kmax}"
        raise ValidationError(msg)
    return exponents


def cmd_density(cfg: RunConfig) -> Tables:
    alpha = _require_alpha(cfg)
    hist = density_histogram(
        float(alpha),
        cfg.get("points", int),
        cfg.get("bins", int),
        rng_seed=cfg.get("seed", int),
    )
    tables: Tables = {
        "density": pd.DataFrame({"x": hist.centers, "density": hist.density}),
    }
    exponents = matching_exponents(alpha, cfg.get("kmax", int))
    if exponents is None:
        logger.warning("No verified matching at %s; skipping density fits", alpha)
        return tables
    fits = []
    windows = fit_windows(alpha, *exponents)
    for branch, window in zip(("right", "left"), windows, strict=True):
        try:
            fit = fit_hyperbola(hist, window)
        except (ConfigurationError, IllConditionedError) as e:
            logger.warning("No %s fit at %s: %s", branch, alpha, e)
            continue
        fits.append({"branch": branch, **fit.to_row()})
    tables["fits"] = pd.DataFrame(fits)
    return tables


def cmd_extrapolate(cfg: RunConfig) -> Tables:
    alpha = _require_alpha(cfg)
    k1, k2 = _exponents(alpha, cfg.get("kmax", int))
    interval = solve_matching(MatchingCandidate(alpha, k1, k2))
    if "fit_window" in cfg.params:
        fit_window = cfg.window("fit_window")
    else:
        lo, hi = interval.lo.to_float, interval.hi.to_float
        fit_window = (lo, lo + (hi - lo) / 50)
    hist = density_histogram(
        float(alpha),
        cfg.get("points", int),
        cfg.get("bins", int),
        rng_seed=cfg.get("seed", int),
    )
    fit = fit_hyperbola(hist, fit_windows(alpha, k1, k2)[0])
    logger.info("Right branch at %s: A=%.5f B=%.5f", alpha, fit.A, fit.B)
    estimator = cfg.estimator()
    threads = cfg.get("threads", int)
    grid = cfg.get("grid", int)
    fitted = sigma_profile(fit_window, grid, estimator, threads)
    alphas = [e.alpha for e in fitted]
    means = [e.mean for e in fitted]
    model = fit_extrapolation(
        alphas, means, float(alpha), k1, k2, fit.A, fit.B, interval.interval
    )
    line = linear_fit(alphas, means)
    compared = sigma_profile(cfg.window(), grid, estimator, threads)
    comparison = compare_extrapolations(model, line, compared)
    logger.info(
        "h0=%.5f rms log=%.2e rms linear=%.2e",
        model.h0,
        comparison.rms_logarithmic,
        comparison.rms_linear,
    )
    return {"comparison": pd.DataFrame(comparison.rows())}


COMMANDS: dict[str, Callable[[RunConfig], Tables]] = {
    "tree": cmd_tree,
    "entropy": cmd_entropy,
    "scan": cmd_scan,
    "chain": cmd_chain,
    "density": cmd_density,
    "extrapolate": cmd_extrapolate,
}


# -------------------------------------------------------------------------------------
#   Argument parsing
# -------------------------------------------------------------------------------------


def parse_window(text: str) -> tuple[float, float]:
    """Read `a,b` as a pair of floats."""
    parts = text.split(",")
    if len(parts) != 2:
        msg = f"expected 'a,b', got {text!r}"
        raise argparse.ArgumentTypeError(msg)
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError as e:
        msg = f"expected two numbers, got {text!r}"
        raise argparse.ArgumentTypeError(msg) from e


def parse_alpha(text: str) -> Fraction:
    """Read a parameter such as `0.338` or `41/100` exactly."""
    try:
        return Fraction(text)
    except ValueError as e:
        msg = f"expected a rational number, got {text!r}"
        raise argparse.ArgumentTypeError(msg) from e


def parse_string(text: str) -> CFString:
    """Read a string of partial quotients such as `2,1,1`."""
    try:
        return CFString.parse(text)
    except InvalidStringError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, help="output path (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kmax", type=int, default=DEFAULT_KMAX)


def _add_estimator(p: argparse.ArgumentParser, grid: int) -> None:
    p.add_argument("--grid", type=int, default=grid)
    p.add_argument("--iters", type=int, default=10**4, help="orbit length N")
    p.add_argument("--samples", type=int, default=10**4, help="starting points M")
    p.add_argument("--epsilon", type=float, default=1e-16)
    p.add_argument(
        "--restart",
        choices=[p.value for p in RestartPolicy],
        default=RestartPolicy.RESTART_POINT.value,
    )


def _add_density(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=parse_alpha, required=True)
    p.add_argument("--points", type=int, default=10**7, help="orbit points recorded")
    p.add_argument("--bins", type=int, default=1000)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="alphamatch", description=__doc__.splitlines()[0])
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true")
    verbosity.add_argument("-q", "--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    tree = sub.add_parser("tree", help="matching intervals and gaps")
    tree.add_argument("--depth", type=int, default=4)
    tree.add_argument("--window", type=parse_window)
    tree.add_argument("--verify", choices=["solve", "spot"], default="solve")

    entropy = sub.add_parser("entropy", help="Birkhoff entropy on a grid")
    entropy.add_argument("--window", type=parse_window, required=True)
    _add_estimator(entropy, grid=100)

    scan = sub.add_parser("scan", help="matching intervals from random seeds")
    scan.add_argument("--window", type=parse_window, required=True)
    scan.add_argument("--seeds", type=int, default=1000)

    chain = sub.add_parser("chain", help="period-doubling chain")
    chain.add_argument("--levels", type=int, default=6)
    chain.add_argument("--start", type=parse_string, default=CFString.of(1))
    chain.add_argument("--verify", choices=["solve", "spot"], default="solve")

    density = sub.add_parser("density", help="invariant density and fits")
    _add_density(density)

    extrapolate = sub.add_parser("extrapolate", help="entropy extrapolation")
    _add_density(extrapolate)
    extrapolate.add_argument("--window", type=parse_window, required=True)
    extrapolate.add_argument("--fit-window", dest="fit_window", type=parse_window)
    _add_estimator(extrapolate, grid=20)

    for p in (tree, entropy, scan, chain, density, extrapolate):
        _add_common(p)
    return parser


def _configure_logging(ns: argparse.Namespace) -> None:
    level = logging.INFO
    if ns.verbose:
        level = logging.DEBUG
    elif ns.quiet:
        level = logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command and return its exit code."""
    cfg: RunConfig | None = None
    try:
        ns = build_parser().parse_args(argv)
        _configure_logging(ns)
        cfg = RunConfig.from_namespace(ns)
        write_tables(cfg, COMMANDS[cfg.command](cfg))
    except (ValidationError, ConfigurationError) as e:
        logger.error("Usage error: %s", e)  # noqa: TRY400
        return EXIT_USAGE
    except OSError as e:
        logger.error("Output error: %s", e)  # noqa: TRY400
        return EXIT_USAGE
    except ConjectureCounterexampleError as e:
        path = None if cfg is None else write_certificate(cfg, e.certificate)
        logger.error("Counterexample: %s (certificate: %s)", e, path)  # noqa: TRY400
        return EXIT_COUNTEREXAMPLE
    except AlphaMatchError as e:
        logger.error("Verification failed: %s", e)  # noqa: TRY400
        return EXIT_VERIFICATION
    return EXIT_OK
