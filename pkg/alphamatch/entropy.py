"""Entropy of the alpha-continued fraction maps.

Estimator:
    By Rohlin's formula the entropy of `T_alpha` is the integral of `-2 log|x|`
    against the invariant measure. It is estimated by Birkhoff averages

        h(alpha, N, x) = (1/N) * sum_{j < N} f(T_alpha^j(x)),
        f(x) = -2 log|x| for |x| > epsilon, 0 otherwise,

    over `M` uniform starting points `x`. The estimate is the mean of the `M`
    averages and its spread is their population standard deviation. When an orbit
    comes within `epsilon` of 0 the point contributes 0 and the orbit continues from
    a fresh uniform point (`RestartPolicy.RESTART_POINT`); alternatively the whole
    orbit is discarded and restarted (`RestartPolicy.DISCARD_ORBIT`).

Reproducibility:
    Samples are processed in blocks; block `b` draws from
    `SeedSequence(entropy=rng_seed, spawn_key=(b,))`. Results therefore depend on the
    seed and the block size only, never on the number of worker threads. Every
    parameter of a grid uses the same random numbers.

Densities:
    `density_histogram` follows many walkers after a burn-in and records where they
    land. Near `alpha` and `alpha - 1` the density is a hyperbola `A/(x + B)`;
    `fit_hyperbola` recovers `A` and `B` by weighted least squares on `1/rho`, refined
    by `scipy.optimize.curve_fit`. The windows come from the exact orbit points of
    `alpha` and `alpha - 1` before they match (`fit_windows`).

Extrapolation:
    On a matching interval with exponents `(k1, k2)` the entropy is

        h(x) = h(alpha0) / (1 + (k2 - k1) * A * log((B + alpha0)/(B + x))),

    with `A, B` from the right-hand density branch at `alpha0`.
"""

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
import numpy.typing as npt
from scipy.optimize import curve_fit

from .alphamap import AlphaParam, expand_alpha, expand_alpha_minus_one, float_step
from .cfrac import CFString, Interval
from .exactnum import QuadSurd
from .exceptions import (
    ConfigurationError,
    IllConditionedError,
    OutsideMatchingIntervalError,
    ValidationError,
)
from .matching import matching_exponents
from .params import (
    BoundedFloatConstraint,
    BoundedIntConstraint,
    LiteralStrConstraint,
    ParameterSet,
)
from .tree import cluster_point

logger = logging.getLogger(__name__)

type FloatArray = npt.NDArray[np.float64]
type Window = tuple[float, float]

DEFAULT_EPSILON = 1e-16
DEFAULT_BLOCK_SIZE = 4096
DEFAULT_WALKERS = 10_000
BURN_IN = 1000
MIN_FIT_BINS = 5
CHI2_LIMIT = 50.0

GOLDEN_CONJUGATE = QuadSurd(-1, 1, 5, 2)


class RestartPolicy(Enum):
    """What to do when an orbit comes within `epsilon` of 0."""

    RESTART_POINT = "restart-point"
    DISCARD_ORBIT = "discard-orbit"


ESTIMATOR_SCHEMA = {
    "iterations": BoundedIntConstraint(1, 10**12),
    "samples": BoundedIntConstraint(1, 10**12),
    "epsilon": BoundedFloatConstraint(0.0, 1.0, lower_open=True),
    "rng_seed": BoundedIntConstraint(0, 2**64 - 1),
    "restart_policy": LiteralStrConstraint([p.value for p in RestartPolicy]),
    "block_size": BoundedIntConstraint(1, 10**7),
}


@dataclass(frozen=True, slots=True)
class EstimatorConfig:
    """Parameters of the Birkhoff estimator, validated on construction.

    Raises:
        ValidationError: If a parameter violates `ESTIMATOR_SCHEMA`.
    """

    iterations: int
    samples: int
    epsilon: float = DEFAULT_EPSILON
    rng_seed: int = 0
    restart_policy: RestartPolicy = RestartPolicy.RESTART_POINT
    block_size: int = DEFAULT_BLOCK_SIZE
    _params: ParameterSet = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        params = ParameterSet(
            ESTIMATOR_SCHEMA,
            {
                "iterations": self.iterations,
                "samples": self.samples,
                "epsilon": self.epsilon,
                "rng_seed": self.rng_seed,
                "restart_policy": self.restart_policy.value,
                "block_size": self.block_size,
            },
        )
        object.__setattr__(self, "_params", params)

    def manifest(self) -> str:
        return self._params.manifest()

    def blocks(self) -> list[tuple[int, int]]:
        """Return `(block index, block size)` covering all samples."""
        count = math.ceil(self.samples / self.block_size)
        return [
            (b, min(self.block_size, self.samples - b * self.block_size))
            for b in range(count)
        ]


def block_rng(rng_seed: int, block: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=rng_seed, spawn_key=(block,))
    return np.random.default_rng(seq)


# -------------------------------------------------------------------------------------
#   Birkhoff estimator
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class EntropyEstimate:
    alpha: float
    mean: float
    std: float
    iterations: int
    samples: int
    epsilon: float = DEFAULT_EPSILON
    seed: int = 0

    @property
    def standard_error(self) -> float:
        return self.std / math.sqrt(self.samples)

    def to_row(self) -> dict[str, object]:
        return {
            "alpha": self.alpha,
            "mean": self.mean,
            "std": self.std,
            "N": self.iterations,
            "M": self.samples,
            "epsilon": self.epsilon,
            "seed": self.seed,
        }


def _f_epsilon(
    x: FloatArray,
    epsilon: float,
) -> tuple[FloatArray, npt.NDArray[np.bool_]]:
    magnitude = np.abs(x)
    small = magnitude <= epsilon
    return (np.where(small, 0.0, -2.0 * np.log(np.where(small, 1.0, magnitude))), small)


def _block_averages(
    alpha: float,
    cfg: EstimatorConfig,
    block: int,
    size: int,
) -> FloatArray:
    rng = block_rng(cfg.rng_seed, block)
    x = alpha - 1.0 + rng.random(size)
    sums = np.zeros(size)
    if cfg.restart_policy is RestartPolicy.RESTART_POINT:
        for _ in range(cfg.iterations):
            values, small = _f_epsilon(x, cfg.epsilon)
            sums += values
            x = float_step(alpha, x)[0]
            if small.any():
                x[small] = alpha - 1.0 + rng.random(int(small.sum()))
        return sums / cfg.iterations
    counts = np.zeros(size, dtype=np.int64)
    active = np.ones(size, dtype=bool)
    while active.any():
        values, small = _f_epsilon(x, cfg.epsilon)
        sums += np.where(active, values, 0.0)
        counts += active
        reset = small & active
        x = float_step(alpha, x)[0]
        if reset.any():
            sums[reset] = 0.0
            counts[reset] = 0
            x[reset] = alpha - 1.0 + rng.random(int(reset.sum()))
        active = counts < cfg.iterations
    return sums / cfg.iterations


def sample_averages(alpha: float, cfg: EstimatorConfig, threads: int = 1) -> FloatArray:
    """Return the `M` Birkhoff averages `h(alpha, N, x_i)`, in sample order."""
    if not 0 < alpha <= 1:
        msg = f"Invalid alpha: {alpha} not in (0, 1]"
        raise ValidationError(msg)
    blocks = cfg.blocks()
    if threads <= 1:
        parts = [_block_averages(alpha, cfg, b, size) for b, size in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda bs: _block_averages(alpha, cfg, *bs), blocks))
    return np.concatenate(parts)


def birkhoff_entropy(
    alpha: float,
    cfg: EstimatorConfig,
    threads: int = 1,
) -> EntropyEstimate:
    """Estimate the entropy of `T_alpha` by Birkhoff averages."""
    averages = sample_averages(alpha, cfg, threads)
    estimate = EntropyEstimate(
        alpha=float(alpha),
        mean=float(np.mean(averages)),
        std=float(np.std(averages)),
        iterations=cfg.iterations,
        samples=cfg.samples,
        epsilon=cfg.epsilon,
        seed=cfg.rng_seed,
    )
    logger.debug(
        "h(%.6f) = %.6f +- %.2e", alpha, estimate.mean, estimate.standard_error
    )
    return estimate


def sigma_profile(
    window: Window,
    grid: int,
    cfg: EstimatorConfig,
    threads: int = 1,
) -> list[EntropyEstimate]:
    """Estimate entropy and spread on `grid` evenly spaced parameters in `window`."""
    if grid < 1:
        msg = f"Invalid grid: {grid} < 1"
        raise ValidationError(msg)
    alphas = np.linspace(window[0], window[1], grid)
    return [birkhoff_entropy(float(a), cfg, threads) for a in alphas]


# -------------------------------------------------------------------------------------
#   Densities
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DensityHistogram:
    """Occupation frequencies on `[alpha - 1, alpha]`, normalised to unit mass."""

    alpha: float
    edges: FloatArray
    counts: FloatArray
    total: float

    @property
    def widths(self) -> FloatArray:
        return np.diff(self.edges)

    @property
    def centers(self) -> FloatArray:
        return (self.edges[:-1] + self.edges[1:]) / 2

    @property
    def density(self) -> FloatArray:
        return self.counts / (self.total * self.widths)

    @property
    def mass(self) -> float:
        return float(np.sum(self.density * self.widths))

    def density_errors(self) -> FloatArray:
        return np.sqrt(self.counts) / (self.total * self.widths)


def density_histogram(
    alpha: float,
    points: int,
    bins: int,
    rng_seed: int = 0,
    walkers: int = DEFAULT_WALKERS,
    epsilon: float = DEFAULT_EPSILON,
) -> DensityHistogram:
    """Histogram about `points` orbit points of `walkers` orbits after burn-in."""
    if bins < 10:
        msg = f"Invalid bins: {bins} < 10"
        raise ValidationError(msg)
    if points < walkers:
        walkers = points
    edges = np.linspace(alpha - 1.0, alpha, bins + 1)
    counts = np.zeros(bins)
    rng = block_rng(rng_seed, 0)
    x = alpha - 1.0 + rng.random(walkers)
    steps = math.ceil(points / walkers)
    for step in range(BURN_IN + steps):
        x = float_step(alpha, x)[0]
        small = np.abs(x) <= epsilon
        if small.any():
            x[small] = alpha - 1.0 + rng.random(int(small.sum()))
        if step >= BURN_IN:
            counts += np.histogram(x, bins=edges)[0]
    return DensityHistogram(alpha, edges, counts, float(counts.sum()))


def fit_windows(alpha: Fraction | float, k1: int, k2: int) -> tuple[Window, Window]:
    """Return the right and left fit windows `[max S, alpha]` and `[alpha - 1, min S]`.

    `S` holds the exact points `T^m(alpha)`, `1 <= m < k1`, and `T^n(alpha - 1)`,
    `1 <= n < k2`.
    """
    exact = Fraction(str(alpha)) if isinstance(alpha, float) else alpha
    param = AlphaParam.of(exact)
    points = [*expand_alpha(param, k1 - 1).points[1:]]
    points += expand_alpha_minus_one(param, k2 - 1).points[1:]
    if not points:
        msg = f"Empty orbit set for exponents ({k1}, {k2})"
        raise ValidationError(msg)
    values = [float(p) if isinstance(p, Fraction) else p.to_float for p in points]
    return ((max(values), float(exact)), (float(exact) - 1.0, min(values)))


@dataclass(frozen=True, slots=True)
class HyperbolaFit:
    """The fit `rho(x) = A/(x + B)` on `window`.

    `residual` is the reduced chi-square of the fit.
    """

    A: float  # noqa: N815
    B: float  # noqa: N815
    window: Window
    residual: float
    bins: int

    def __call__(self, x: float | FloatArray) -> float | FloatArray:
        return self.A / (x + self.B)

    def to_row(self) -> dict[str, object]:
        return {
            "A": self.A,
            "B": self.B,
            "window_lo": self.window[0],
            "window_hi": self.window[1],
            "residual": self.residual,
        }


def _hyperbola(x: FloatArray, a: float, b: float) -> FloatArray:
    return a / (x + b)


def fit_hyperbola(
    hist: DensityHistogram,
    window: Window,
    chi2_limit: float = CHI2_LIMIT,
) -> HyperbolaFit:
    """Fit `A/(x + B)` to the bins lying inside `window`.

    Raises:
        ConfigurationError: If fewer than `MIN_FIT_BINS` nonempty bins lie inside.
        IllConditionedError: If the reduced chi-square exceeds `chi2_limit`, as it
            does when the window spans a jump of the density, or if `x + B` is not
            positive on the window.
    """
    lo, hi = window
    inside = (hist.edges[:-1] >= lo) & (hist.edges[1:] <= hi) & (hist.counts > 0)
    n = int(inside.sum())
    if n < MIN_FIT_BINS:
        msg = f"Invalid fit window: {n} bins in [{lo}, {hi}], need {MIN_FIT_BINS}"
        raise ConfigurationError(msg)
    x = hist.centers[inside]
    rho = hist.density[inside]
    sigma = hist.density_errors()[inside]
    # 1/rho = x/A + B/A, weighted by the inverse error of 1/rho
    slope, intercept = np.polyfit(x, 1.0 / rho, 1, w=rho**2 / sigma)
    start = (1.0 / slope, intercept / slope)
    (a, b), _ = curve_fit(
        _hyperbola, x, rho, p0=start, sigma=sigma, absolute_sigma=True
    )
    residual = float(np.sum(((rho - _hyperbola(x, a, b)) / sigma) ** 2) / max(n - 2, 1))
    fit = HyperbolaFit(float(a), float(b), (lo, hi), residual, n)
    if lo + fit.B <= 0:
        msg = f"Ill-conditioned fit: x + B vanishes on the window, B = {fit.B}"
        raise IllConditionedError(msg)
    if residual > chi2_limit:
        msg = f"Ill-conditioned fit on [{lo}, {hi}]: reduced chi-square {residual:.3g}"
        raise IllConditionedError(msg)
    return fit


# Right and left branches at alpha in the (2, 3) interval: (A+, B+, A-, B-)
DENSITY_FIT_TABLE: dict[str, tuple[float, float, float, float, float]] = {
    "0.310": (0.310, 1.76114, 1.64768, 1.77289, 2.66097),
    "0.320": (0.320, 1.76525, 1.63487, 1.78874, 2.66081),
    "1/3": (1 / 3, 1.77603, 1.62374, 1.81488, 2.66583),
    "0.338": (0.338, 1.78963, 1.62987, 1.82411, 2.66751),
    "0.350": (0.350, 1.81981, 1.64092, 1.84562, 2.66915),
    "0.360": (0.360, 1.84658, 1.65138, 1.85959, 2.6658),
}


# -------------------------------------------------------------------------------------
#   Extrapolation
# -------------------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ExtrapolationModel:
    """The logarithmic entropy model on one matching interval."""

    alpha0: float
    h0: float
    k1: int
    k2: int
    A: float  # noqa: N815
    B: float  # noqa: N815
    interval: Interval | None = None

    def factor(self, x: float | FloatArray) -> float | FloatArray:
        """The denominator's reciprocal, so that `h(x) = h0 * factor(x)`."""
        log_term = np.log((self.B + self.alpha0) / (self.B + np.asarray(x)))
        return 1.0 / (1.0 + (self.k2 - self.k1) * self.A * log_term)


def entropy_extrapolate(model: ExtrapolationModel, x: float) -> float:
    """Evaluate the logarithmic model at `x`.

    Raises:
        OutsideMatchingIntervalError: If `x` is outside the model's interval.
    """
    if model.interval is not None and not model.interval.contains(Fraction(x)):
        msg = f"Outside matching interval: {x} not in {model.interval}"
        raise OutsideMatchingIntervalError(msg)
    if model.k1 == model.k2:
        return model.h0
    return float(model.h0 * model.factor(x))


def fit_extrapolation(
    alphas: Sequence[float],
    entropies: Sequence[float],
    alpha0: float,
    k1: int,
    k2: int,
    a: float,
    b: float,
    interval: Interval | None = None,
) -> ExtrapolationModel:
    """Least-squares `h0` for the logarithmic model with `A` and `B` held fixed."""
    template = ExtrapolationModel(alpha0, 1.0, k1, k2, a, b, interval)
    g = np.asarray(template.factor(np.asarray(alphas, dtype=float)))
    h = np.asarray(entropies, dtype=float)
    h0 = float(np.sum(g * h) / np.sum(g * g))
    return ExtrapolationModel(alpha0, h0, k1, k2, a, b, interval)


def linear_fit(
    alphas: Sequence[float],
    entropies: Sequence[float],
) -> tuple[float, float]:
    """Return `(slope, intercept)` of the least-squares line."""
    slope, intercept = np.polyfit(np.asarray(alphas), np.asarray(entropies), 1)
    return (float(slope), float(intercept))


@dataclass(frozen=True, slots=True)
class ExtrapolationComparison:
    """RMS deviations of the logarithmic and linear predictions from estimates."""

    alphas: tuple[float, ...]
    estimates: tuple[float, ...]
    logarithmic: tuple[float, ...]
    linear: tuple[float, ...]

    @property
    def rms_logarithmic(self) -> float:
        diff = np.subtract(self.logarithmic, self.estimates)
        return float(np.sqrt(np.mean(diff**2)))

    @property
    def rms_linear(self) -> float:
        diff = np.subtract(self.linear, self.estimates)
        return float(np.sqrt(np.mean(diff**2)))

    def rows(self) -> list[dict[str, object]]:
        return [
            {"alpha": a, "estimate": e, "logarithmic": g, "linear": line}
            for a, e, g, line in zip(
                self.alphas,
                self.estimates,
                self.logarithmic,
                self.linear,
                strict=True,
            )
        ]


def compare_extrapolations(
    model: ExtrapolationModel,
    line: tuple[float, float],
    estimates: Sequence[EntropyEstimate],
) -> ExtrapolationComparison:
    alphas = tuple(e.alpha for e in estimates)
    return ExtrapolationComparison(
        alphas=alphas,
        estimates=tuple(e.mean for e in estimates),
        logarithmic=tuple(entropy_extrapolate(model, a) for a in alphas),
        linear=tuple(line[0] * a + line[1] for a in alphas),
    )


# -------------------------------------------------------------------------------------
#   Closed form and derivatives
# -------------------------------------------------------------------------------------


def plateau_entropy(dps: int = 30) -> mpmath.mpf:
    """The value `pi^2 / (6 log((1 + sqrt5)/2))`."""
    with mpmath.workdps(dps):
        return mpmath.pi**2 / (6 * mpmath.log((1 + mpmath.sqrt(5)) / 2))


@lru_cache(maxsize=1)
def _plateau_start() -> tuple[Fraction, Fraction]:
    point = cluster_point(CFString.of(1), 10)
    return (point.lower, point.upper)


def closed_form_entropy(alpha: QuadSurd | Fraction, dps: int = 30) -> mpmath.mpf | None:
    """Return the entropy where it is known in closed form, else None.

    The entropy equals `pi^2 / (6 log((1 + sqrt5)/2))` on `[alpha_hat, (sqrt5 - 1)/2]`,
    where `alpha_hat` is the cluster point of the `{1}` doubling chain. Parameters
    inside the certified enclosure of `alpha_hat` are undecided and give None.
    """
    lower, upper = _plateau_start()
    if alpha > GOLDEN_CONJUGATE or alpha < lower:
        return None
    if alpha <= upper:
        logger.warning("Undecided closed form at %s: inside the enclosure", alpha)
        return None
    return plateau_entropy(dps)


@dataclass(frozen=True, slots=True)
class DerivativeReport:
    """One-sided slopes of the entropy against the predictions from the density."""

    alpha: float
    k1: int
    k2: int
    slope_left: float
    slope_right: float
    predicted_left: float
    predicted_right: float
    noise: float

    @property
    def ratio_left(self) -> float:
        if not self.predicted_left:
            return math.nan
        return self.slope_left / self.predicted_left

    @property
    def ratio_right(self) -> float:
        if not self.predicted_right:
            return math.nan
        return self.slope_right / self.predicted_right


def derivative_check(
    alpha: Fraction,
    h_step: float,
    cfg: EstimatorConfig,
    bins: int = 400,
    points: int = 10**7,
    edge_bins: int = 3,
    threads: int = 1,
) -> DerivativeReport:
    """Compare finite-difference slopes with `h (k2 - k1) rho` at both ends.

    The left slope is predicted by the density just below `alpha` and the right slope
    by the density just above `alpha - 1`.

    Raises:
        ValidationError: If `alpha` has no verified matching.
    """
    exponents = matching_exponents(alpha)
    if exponents is None:
        msg = f"Invalid alpha: no verified matching at {alpha}"
        raise ValidationError(msg)
    k1, k2 = exponents
    a = float(alpha)
    left, mid, right = (
        birkhoff_entropy(x, cfg, threads) for x in (a - h_step, a, a + h_step)
    )
    hist = density_histogram(a, points, bins, cfg.rng_seed)
    rho_top = float(np.mean(hist.density[-edge_bins:]))
    rho_bottom = float(np.mean(hist.density[:edge_bins]))
    scale = mid.mean * (k2 - k1)
    noise = math.hypot(left.standard_error, mid.standard_error) / h_step
    return DerivativeReport(
        alpha=a,
        k1=k1,
        k2=k2,
        slope_left=(mid.mean - left.mean) / h_step,
        slope_right=(right.mean - mid.mean) / h_step,
        predicted_left=scale * rho_top,
        predicted_right=scale * rho_bottom,
        noise=noise,
    )
