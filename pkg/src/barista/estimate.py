"""Estimation for the three-stage process.

Four routes are implemented, in increasing cost:

* a closed-form maximum-likelihood estimator for the one-stage special case,
* a "quick and crude" method that reads exponents and changepoints off CDF
  differences at hand-picked safe evaluation points,
* an exhaustive grid search of the conditional log-likelihood, and
* a real-valued genetic algorithm over the same objective.

The conditional log-likelihood treats the observed count as given, so the
scale c drops out; it is recovered afterwards by matching the expected total
count to n (estimate_c).  Analytic first and second derivatives in the three
exponents are provided for diagnostics and standard-error work; both are
derived from the normalization constant written as A/B and are checked against
finite differences in the test suite.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .process import (
    BaristaParams,
    ModelFamily,
    OneStage,
    ThreeStage,
    TwoStage,
    mean_count,
)
from .sample import BidSample

__all__ = [
    "EstimationError",
    "QcConfig",
    "GaConfig",
    "FitResult",
    "default_qc_config",
    "ecdf",
    "qc_alpha",
    "qc_alpha3_survival",
    "qc_changepoints",
    "qc_fit",
    "loglik",
    "loglik_gradient",
    "loglik_hessian",
    "mle_nhpp1",
    "estimate_c",
    "grid_search",
    "ga_fit",
    "default_bounds",
    "bootstrap_se",
]

FAMILY_TAGS = ("one-stage", "two-stage", "three-stage")


class EstimationError(RuntimeError):
    """Raised when data do not support the requested estimate.

    The optional stage attribute names the step that failed so callers (and
    the CLI error object) can say where things went wrong.
    """

    def __init__(self, message: str, stage: str | None = None) -> None:
        super().__init__(message)
        self.stage = stage


# ---------------------------------------------------------------------------
# empirical CDF
# ---------------------------------------------------------------------------

def ecdf(sample: BidSample, t):
    """Fraction of sample times <= t; accepts scalars or arrays."""
    if sample.n == 0:
        raise EstimationError("empirical CDF of an empty sample", stage="ecdf")
    arr = np.asarray(t, dtype=float)
    scalar = arr.ndim == 0
    counts = np.searchsorted(sample.times, np.atleast_1d(arr), side="right")
    out = counts / sample.n
    return float(out[0]) if scalar else out


def _cdf_accessor(sample: BidSample) -> Callable[[float], float]:
    times, n = sample.times, sample.n
    return lambda t: float(np.searchsorted(times, t, side="right")) / n


# ---------------------------------------------------------------------------
# quick and crude
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QcConfig:
    """Evaluation points for the quick-and-crude route, in forward time.

    stage1_window and stage2_window are (lo, hi) intervals believed to lie
    inside the first and middle stage; stage3_points are two distinct times
    believed inside the final stage; safe_points = (t1, t2a, t2b, t3) are a
    stage-1 point, two stage-2 points and a stage-3 point used for the
    changepoint formulas.
    """

    stage1_window: tuple[float, float]
    stage2_window: tuple[float, float]
    stage3_points: tuple[float, float]
    safe_points: tuple[float, float, float, float]

    def __post_init__(self) -> None:
        for name in ("stage1_window", "stage2_window", "stage3_points"):
            lo, hi = getattr(self, name)
            if not (0 <= lo < hi):
                raise ValueError(f"{name} must be ordered and nonnegative, got ({lo}, {hi})")
        t1, t2a, t2b, t3 = self.safe_points
        if not (0 < t1 and t1 <= t2a < t2b <= t3):
            raise ValueError(f"safe_points must be ordered, got {self.safe_points}")


def default_qc_config(T: float) -> QcConfig:
    """Evaluation points scaled to the horizon.

    The early window hugs the opening, the middle window spans most of the
    auction, and the late points sit one and two ten-thousandths of the
    horizon before the close (1 and 2 minutes on a 7-day auction), where the
    final stage of a hard-close process lives.
    """
    if not T > 0:
        raise ValueError(f"horizon must be positive, got {T}")
    u = T / 7.0
    tick = T / 10080.0
    return QcConfig(
        stage1_window=(0.001 * u, u),
        stage2_window=(3.0 * u, 6.9 * u),
        stage3_points=(T - 2.0 * tick, T - tick),
        safe_points=(u, 3.0 * u, 6.0 * u, T - 2.0 * tick),
    )


def qc_alpha(F: Callable[[float], float], T: float, t: float, s: float) -> float:
    """Stage exponent from CDF differences at three reverse-time offsets.

    t and s are offsets from the horizon (t > s > 0); the evaluation points
    T-t, T-sqrt(s t), T-s must lie inside a single stage, where the CDF is a
    shifted power of the remaining time.  Both differences are negative going
    backward in time; magnitudes are used and a sign agreement is enforced.
    """
    if not (0.0 < s < t <= T):
        raise ValueError(f"need 0 < s < t <= T, got t={t}, s={s}, T={T}")
    mid = math.sqrt(s * t)
    f_lo, f_mid, f_hi = F(T - t), F(T - mid), F(T - s)
    num = f_mid - f_lo
    den = f_hi - f_mid
    if num <= 0.0 or den <= 0.0:
        raise EstimationError(
            f"CDF differences must be positive and share sign, got {num} and {den}",
            stage="qc_alpha",
        )
    est = 2.0 * (math.log(num) - math.log(den)) / (math.log(t) - math.log(s))
    # equal differences give a zero exponent; no power law fits such a window
    if est <= 0.0:
        raise EstimationError(
            f"window differences imply a non-positive exponent ({est})",
            stage="qc_alpha",
        )
    return est


def qc_alpha3_survival(F: Callable[[float], float], T: float, t3: float, t3p: float) -> float:
    """Final-stage exponent from the survival ratio at two late times t3 < t3p."""
    if not (0.0 < t3 < t3p < T):
        raise ValueError(f"need 0 < t3 < t3p < T, got {t3}, {t3p}")
    r3, r3p = 1.0 - F(t3), 1.0 - F(t3p)
    if r3 <= 0.0 or r3p <= 0.0 or r3 <= r3p:
        raise EstimationError(
            f"survival must be positive and decreasing, got {r3} and {r3p}",
            stage="qc_alpha3",
        )
    return math.log(r3 / r3p) / math.log((T - t3) / (T - t3p))


def qc_changepoints(
    F: Callable[[float], float],
    alphas: tuple[float, float, float],
    safe: tuple[float, float, float, float],
    T: float,
) -> tuple[float, float]:
    """Closed-form changepoints given the exponents and safe CDF points.

    Solving the stage-1 and stage-3 CDF branches for the changepoints gives

        1 - d1/T = { (a1/a2) * F(t1)/(F(t2b)-F(t2a))
                     * ((1-t2a/T)^a2 - (1-t2b/T)^a2) / (1-(1-t1/T)^a1) }^(1/(a2-a1))
        d2/T     = { (a3/a2) * (1-F(t3))/(F(t2b)-F(t2a))
                     * ((1-t2a/T)^a2 - (1-t2b/T)^a2) / (1-t3/T)^a3 }^(1/(a2-a3))

    A d1 solution below 0 is clamped to 0 (no early stage).
    """
    a1, a2, a3 = alphas
    t1, t2a, t2b, t3 = safe
    if a1 == a2 or a2 == a3:
        raise EstimationError(
            "changepoint formulas need alpha1 != alpha2 and alpha2 != alpha3",
            stage="qc_changepoints",
        )
    f1 = F(t1)
    df2 = F(t2b) - F(t2a)
    sf3 = 1.0 - F(t3)
    mid_pow = (1.0 - t2a / T) ** a2 - (1.0 - t2b / T) ** a2
    if f1 <= 0.0 or df2 <= 0.0 or sf3 <= 0.0:
        raise EstimationError(
            f"safe-point CDF values must be strictly increasing, got F(t1)={f1}, "
            f"dF2={df2}, 1-F(t3)={sf3}",
            stage="qc_changepoints",
        )
    den1 = 1.0 - (1.0 - t1 / T) ** a1
    den3 = (1.0 - t3 / T) ** a3
    # tiny exponent estimates can underflow these to zero
    if den1 <= 0.0 or den3 <= 0.0:
        raise EstimationError(
            f"degenerate exponents for the changepoint formulas: "
            f"alpha1={a1}, alpha3={a3}",
            stage="qc_changepoints",
        )
    brace1 = (a1 / a2) * (f1 / df2) * mid_pow / den1
    brace2 = (a3 / a2) * (sf3 / df2) * mid_pow / den3
    if brace1 <= 0.0 or brace2 <= 0.0:
        raise EstimationError("bracketed expressions must be positive", stage="qc_changepoints")
    d1 = T - T * brace1 ** (1.0 / (a2 - a1))
    d2 = T * brace2 ** (1.0 / (a2 - a3))
    d1 = max(d1, 0.0)
    if not d1 < T - d2:
        raise EstimationError(
            f"estimated changepoints overlap: d1={d1}, T-d2={T - d2}",
            stage="qc_changepoints",
        )
    return d1, d2


def qc_fit(sample: BidSample, cfg: QcConfig) -> "FitResult":
    """Quick-and-crude three-stage fit from empirical CDF differences."""
    if sample.n < 2:
        raise EstimationError("quick-and-crude fit needs at least 2 events", stage="qc_fit")
    T = sample.T
    for name in ("stage1_window", "stage2_window", "stage3_points", "safe_points"):
        if max(getattr(cfg, name)) >= T:
            raise ValueError(f"{name} must lie inside [0, T), horizon is {T}")
    F = _cdf_accessor(sample)
    lo, hi = cfg.stage1_window
    a1 = qc_alpha(F, T, T - lo, T - hi)
    lo, hi = cfg.stage2_window
    a2 = qc_alpha(F, T, T - lo, T - hi)
    a3 = qc_alpha3_survival(F, T, *cfg.stage3_points)
    d1, d2 = qc_changepoints(F, (a1, a2, a3), cfg.safe_points, T)
    try:
        shape = BaristaParams(a1, a2, a3, d1, d2, 1.0, T)
    except ValueError as exc:
        raise EstimationError(f"estimates are not a valid parameter vector: {exc}",
                              stage="qc_fit") from exc
    c_hat = estimate_c(shape, sample.n)
    fitted = shape.with_c(c_hat)
    return FitResult(
        family=ThreeStage(fitted),
        loglik=loglik(sample, fitted),
        method="quick-crude",
        c_hat=c_hat,
    )


# ---------------------------------------------------------------------------
# conditional log-likelihood and derivatives
# ---------------------------------------------------------------------------

class _CondLoglik:
    """Prefix-summed sample so the conditional log-likelihood is O(log n).

    The per-event terms only enter through the branch counts (n1, n3) and the
    branch sums of log(1 - x/T); caching the sorted cumulative sums makes
    repeated evaluation at different parameters (grid, GA) cheap.
    """

    def __init__(self, sample: BidSample) -> None:
        self.T = float(sample.T)
        self.n = sample.n
        self.times = sample.times
        logrem = np.log1p(-self.times / self.T)
        self.prefix = np.concatenate([[0.0], np.cumsum(logrem)])

    def values(self, a1, a2, a3, d1, d2) -> np.ndarray:
        """Vectorized conditional log-likelihood; -inf where invalid."""
        a1, a2, a3, d1, d2 = np.broadcast_arrays(
            *(np.atleast_1d(np.asarray(x, dtype=float)) for x in (a1, a2, a3, d1, d2))
        )
        T, n = self.T, self.n
        valid = (a1 > 0) & (a2 > 0) & (a3 > 0) & (d1 >= 0) & (d2 >= 0) & (d1 < T - d2)
        # sanitized copies keep the vector arithmetic clean off the valid set
        d1s = np.where(valid, d1, 0.0)
        d2s = np.where(valid, d2, 0.0)
        q1 = 1.0 - d1s / T
        q2 = d2s / T
        B = (
            a2 * a3 * q1 ** (a2 - a1)
            + a3 * (a1 - a2) * q1 ** a2
            + a1 * (a2 - a3) * q2 ** a2
        )
        with np.errstate(divide="ignore", invalid="ignore"):
            logC = np.log(a1 * a2 * a3 / T) - np.log(B)
        i1 = np.searchsorted(self.times, d1s, side="right")
        i2 = np.searchsorted(self.times, T - d2s, side="right")
        n1 = i1.astype(float)
        n3 = float(n) - i2.astype(float)
        S1 = self.prefix[i1]
        S2 = self.prefix[i2] - self.prefix[i1]
        S3 = self.prefix[n] - self.prefix[i2]
        logq2 = np.where(q2 > 0, np.log(np.where(q2 > 0, q2, 1.0)), 0.0)
        ll = (
            n * logC
            + n1 * (a2 - a1) * np.log(q1)
            + n3 * (a2 - a3) * logq2
            + (a1 - 1.0) * S1
            + (a2 - 1.0) * S2
            + (a3 - 1.0) * S3
        )
        return np.where(valid & np.isfinite(ll), ll, -np.inf)

    def value(self, a1: float, a2: float, a3: float, d1: float, d2: float) -> float:
        return float(self.values(a1, a2, a3, d1, d2)[0])

    def parts(self, d1: float, d2: float) -> tuple[int, int, float, float, float]:
        """(n1, n3, S1, S2, S3) for the branch split at (d1, T - d2)."""
        i1 = int(np.searchsorted(self.times, d1, side="right"))
        i2 = int(np.searchsorted(self.times, self.T - d2, side="right"))
        return (
            i1,
            self.n - i2,
            float(self.prefix[i1]),
            float(self.prefix[i2] - self.prefix[i1]),
            float(self.prefix[self.n] - self.prefix[i2]),
        )


def _check_horizon(sample: BidSample, p: BaristaParams) -> None:
    if sample.T != p.T:
        raise ValueError(f"sample horizon {sample.T} != parameter horizon {p.T}")


def loglik(sample: BidSample, p: BaristaParams) -> float:
    """Conditional log-likelihood of the event times given the count.

    Equals the sum of log densities; the scale c never enters because the
    normalization constant is c-free.
    """
    _check_horizon(sample, p)
    if sample.n == 0:
        return 0.0
    return _CondLoglik(sample).value(p.alpha1, p.alpha2, p.alpha3, p.d1, p.d2)


def _B_derivatives(p: BaristaParams) -> tuple[float, np.ndarray, np.ndarray]:
    """B and its first/second derivatives in (alpha1, alpha2, alpha3).

    B is the shape-only denominator with m(T) = T c B/(a1 a2 a3).  Terms in
    q2^a2 * log(q2) vanish as d2 -> 0 and are forced to 0 there.
    """
    a1, a2, a3 = p.alpha1, p.alpha2, p.alpha3
    q1 = 1.0 - p.d1 / p.T
    q2 = p.d2 / p.T
    L1 = math.log(q1)
    L2 = math.log(q2) if q2 > 0 else 0.0
    p1 = q1 ** (a2 - a1)
    p2 = q1 ** a2
    p3 = q2 ** a2

    B = a2 * a3 * p1 + a3 * (a1 - a2) * p2 + a1 * (a2 - a3) * p3
    B1 = -a2 * a3 * L1 * p1 + a3 * p2 + (a2 - a3) * p3
    B2 = (
        a3 * p1 * (1.0 + a2 * L1)
        + a3 * p2 * ((a1 - a2) * L1 - 1.0)
        + a1 * p3 * (1.0 + (a2 - a3) * L2)
    )
    B3 = a2 * p1 + (a1 - a2) * p2 - a1 * p3
    B11 = a2 * a3 * L1 * L1 * p1
    B12 = -a3 * L1 * p1 * (1.0 + a2 * L1) + a3 * L1 * p2 + p3 * (1.0 + (a2 - a3) * L2)
    B13 = -a2 * L1 * p1 + p2 - p3
    B22 = (
        a3 * L1 * p1 * (2.0 + a2 * L1)
        + a3 * L1 * p2 * ((a1 - a2) * L1 - 2.0)
        + a1 * L2 * p3 * (2.0 + (a2 - a3) * L2)
    )
    B23 = (1.0 + a2 * L1) * p1 + ((a1 - a2) * L1 - 1.0) * p2 - a1 * L2 * p3
    B33 = 0.0
    grad = np.array([B1, B2, B3])
    hess = np.array([[B11, B12, B13], [B12, B22, B23], [B13, B23, B33]])
    return B, grad, hess


def loglik_gradient(sample: BidSample, p: BaristaParams) -> np.ndarray:
    """Partial derivatives of loglik in (alpha1, alpha2, alpha3).

    With C = A/B and A = a1 a2 a3 / T, d(log C)/d(a_j) = 1/a_j - B_j/B, so the
    j-th component is n (1/a_j - B_j/B) plus the branch data terms.
    """
    _check_horizon(sample, p)
    cache = _CondLoglik(sample)
    n1, n3, S1, S2, S3 = cache.parts(p.d1, p.d2)
    n = cache.n
    B, Bg, _ = _B_derivatives(p)
    dlogC = 1.0 / np.array([p.alpha1, p.alpha2, p.alpha3]) - Bg / B
    L1 = math.log(1.0 - p.d1 / p.T)
    L2 = math.log(p.d2 / p.T) if (p.d2 > 0 and n3 > 0) else 0.0
    return n * dlogC + np.array([-n1 * L1 + S1, n1 * L1 + n3 * L2 + S2, -n3 * L2 + S3])


def loglik_hessian(sample: BidSample, p: BaristaParams) -> np.ndarray:
    """Second derivatives of loglik in the exponents.

    The data terms are linear in the alphas, so the Hessian is n times the
    Hessian of log C:  H_jk = n (-delta_jk / a_j^2 - B_jk/B + B_j B_k / B^2).
    """
    _check_horizon(sample, p)
    n = sample.n
    B, Bg, Bh = _B_derivatives(p)
    alphas = np.array([p.alpha1, p.alpha2, p.alpha3])
    return n * (-np.diag(1.0 / alphas**2) - Bh / B + np.outer(Bg, Bg) / B**2)


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def mle_nhpp1(sample: BidSample) -> tuple[float, float]:
    """Exact MLE of the one-stage process: alpha then c.

    alpha_hat = -n / sum(log(1 - x_i/T)); c_hat = n alpha_hat / T.
    """
    if sample.n == 0:
        raise EstimationError("MLE needs at least one event", stage="mle_nhpp1")
    s = float(np.sum(np.log1p(-sample.times / sample.T)))
    if s >= 0.0:
        raise EstimationError("all events at time 0; exponent diverges", stage="mle_nhpp1")
    alpha_hat = -sample.n / s
    return alpha_hat, sample.n * alpha_hat / sample.T


def estimate_c(shape: BaristaParams, n: int) -> float:
    """Scale that makes the expected total count match the observed n.

    Only the shape of the argument matters; its c is ignored.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return n / mean_count(shape.with_c(1.0), shape.T)


# ---------------------------------------------------------------------------
# fit containers and family plumbing
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    """A fitted family with its maximized conditional log-likelihood."""

    family: ModelFamily
    loglik: float
    method: str  # "quick-crude" | "grid" | "ga" | "closed-form"
    c_hat: float
    stderrs: dict[str, float] | None = None
    history: tuple[float, ...] | None = None  # GA best-so-far per generation

    @property
    def params(self) -> dict[str, float]:
        """Estimated free parameters plus the recovered scale."""
        vals = dict(self.family.free_values())
        vals["c"] = self.c_hat
        return vals


def _genes_to_vector(tag: str, genes: Sequence[float]) -> tuple[float, float, float, float, float]:
    """(alpha1, alpha2, alpha3, d1, d2) for a family's free-gene vector."""
    if tag == "one-stage":
        (a,) = genes
        return a, a, a, 0.0, 0.0
    if tag == "two-stage":
        a2, a3, d2 = genes
        return a2, a2, a3, 0.0, d2
    if tag == "three-stage":
        a1, a2, a3, d1, d2 = genes
        return a1, a2, a3, d1, d2
    raise ValueError(f"unknown family tag {tag!r}; expected one of {FAMILY_TAGS}")


def _family_names(tag: str) -> tuple[str, ...]:
    for cls in (OneStage, TwoStage, ThreeStage):
        if cls.tag == tag:
            return cls.free_names
    raise ValueError(f"unknown family tag {tag!r}; expected one of {FAMILY_TAGS}")


def _build_family(tag: str, genes: Sequence[float], c: float, T: float) -> ModelFamily:
    if tag == "one-stage":
        return OneStage(genes[0], c, T)
    if tag == "two-stage":
        return TwoStage(genes[0], genes[1], genes[2], c, T)
    a1, a2, a3, d1, d2 = genes
    return ThreeStage(BaristaParams(a1, a2, a3, d1, d2, c, T))


def _finish_fit(tag: str, genes: Sequence[float], ll: float, method: str,
                sample: BidSample, history: tuple[float, ...] | None = None) -> FitResult:
    vec = _genes_to_vector(tag, genes)
    shape = BaristaParams(*vec, 1.0, sample.T)
    c_hat = estimate_c(shape, sample.n)
    return FitResult(
        family=_build_family(tag, genes, c_hat, sample.T),
        loglik=ll,
        method=method,
        c_hat=c_hat,
        history=history,
    )


# ---------------------------------------------------------------------------
# grid search
# ---------------------------------------------------------------------------

def grid_search(sample: BidSample, family: str, grid: Mapping[str, Iterable[float]]) -> FitResult:
    """Best conditional log-likelihood over a cartesian parameter grid.

    grid maps each free parameter of the family to its candidate values; the
    scan runs in lexicographic order over the family's parameter order and
    ties keep the first point found.  Grid points that violate the parameter
    constraints are skipped.
    """
    if sample.n == 0:
        raise EstimationError("cannot fit an empty sample", stage="grid_search")
    names = _family_names(family)
    missing = set(names) - set(grid)
    if missing:
        raise ValueError(f"grid is missing values for {sorted(missing)}")
    axes = [np.asarray(list(grid[name]), dtype=float) for name in names]
    if any(ax.size == 0 for ax in axes):
        raise ValueError("every grid axis needs at least one value")
    cache = _CondLoglik(sample)
    best_ll = -np.inf
    best_genes: tuple[float, ...] | None = None
    for genes in itertools.product(*axes):
        ll = cache.value(*_genes_to_vector(family, genes))
        if ll > best_ll:
            best_ll, best_genes = ll, genes
    if best_genes is None or not np.isfinite(best_ll):
        raise EstimationError("no feasible grid point", stage="grid_search")
    return _finish_fit(family, best_genes, best_ll, "grid", sample)


# ---------------------------------------------------------------------------
# genetic algorithm
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaConfig:
    """Settings for the real-valued genetic search.

    bounds is one (lo, hi) box per free parameter, in the family's parameter
    order; mutation_scale defaults to (hi - lo)/20 per coordinate.  Exponent
    bounds must stay positive, since a nonpositive exponent is outside the
    model.
    """

    bounds: tuple[tuple[float, float], ...]
    generations: int = 500
    population_size: int = 100
    elite_fraction: float = 0.10
    offspring_pairs: int = 50
    mutation_scale: tuple[float, ...] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if not (0.0 < self.elite_fraction <= 1.0):
            raise ValueError("elite_fraction must lie in (0, 1]")
        if self.offspring_pairs < 1:
            raise ValueError("offspring_pairs must be >= 1")
        if self.generations < 0:
            raise ValueError("generations must be >= 0")
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ValueError(f"bad bound ({lo}, {hi})")
        if self.mutation_scale is not None:
            if len(self.mutation_scale) != len(self.bounds):
                raise ValueError("mutation_scale must match bounds length")
            if any(s < 0 for s in self.mutation_scale):
                raise ValueError("mutation_scale entries must be >= 0")


def default_bounds(family: str, T: float) -> tuple[tuple[float, float], ...]:
    """Search boxes, scaled to the horizon.

    Exponent boxes are fixed; changepoint boxes scale linearly with T.  The
    three-stage box puts the early changepoint in [T/7, 5T/7] and the late one
    within T/700 of the close (about 14 minutes on a 7-day horizon), matching
    the short final stages these processes exhibit.
    """
    if family == "one-stage":
        return ((0.1, 15.0),)
    if family == "two-stage":
        return ((0.1, 1.0), (0.5, 15.0), (0.0, T / 700.0))
    if family == "three-stage":
        return ((1.0, 15.0), (0.1, 1.0), (0.5, 15.0), (T / 7.0, 5.0 * T / 7.0), (0.0, T / 700.0))
    raise ValueError(f"unknown family tag {family!r}; expected one of {FAMILY_TAGS}")


def ga_fit(sample: BidSample, family: str, cfg: GaConfig) -> FitResult:
    """Genetic maximization of the conditional log-likelihood.

    Per generation: rank the population, keep the top elite_fraction, draw
    parent pairs uniformly from the elite, blend each coordinate with a fresh
    U(0,1) weight (each pair yields the blend and its mirror), add Gaussian
    mutation clipped to the bounds, then truncate elite + offspring back to
    population_size by fitness.  The elite always survives, so the best-so-far
    fitness (recorded in FitResult.history) never decreases.
    """
    if sample.n == 0:
        raise EstimationError("cannot fit an empty sample", stage="ga_fit")
    names = _family_names(family)
    if len(cfg.bounds) != len(names):
        raise ValueError(f"{family} needs {len(names)} bounds, got {len(cfg.bounds)}")
    lo = np.array([b[0] for b in cfg.bounds])
    hi = np.array([b[1] for b in cfg.bounds])
    scale = (
        np.asarray(cfg.mutation_scale, dtype=float)
        if cfg.mutation_scale is not None
        else (hi - lo) / 20.0
    )
    cache = _CondLoglik(sample)

    def fitness(block: np.ndarray) -> np.ndarray:
        vecs = np.array([_genes_to_vector(family, g) for g in block])
        return cache.values(*vecs.T)

    rng = np.random.default_rng(cfg.seed)
    pop = rng.uniform(lo, hi, size=(cfg.population_size, lo.size))
    fit = fitness(pop)
    order = np.argsort(-fit, kind="stable")
    pop, fit = pop[order], fit[order]
    history = [float(fit[0])]

    n_elite = max(1, int(cfg.population_size * cfg.elite_fraction))
    for _ in range(cfg.generations):
        elite, elite_fit = pop[:n_elite], fit[:n_elite]
        ia = rng.integers(0, n_elite, size=cfg.offspring_pairs)
        ib = rng.integers(0, n_elite, size=cfg.offspring_pairs)
        u = rng.random((cfg.offspring_pairs, lo.size))
        kids = np.vstack([
            u * elite[ia] + (1.0 - u) * elite[ib],
            (1.0 - u) * elite[ia] + u * elite[ib],
        ])
        kids += rng.normal(0.0, 1.0, size=kids.shape) * scale
        np.clip(kids, lo, hi, out=kids)
        pool_genes = np.vstack([elite, kids])
        pool_fit = np.concatenate([elite_fit, fitness(kids)])
        order = np.argsort(-pool_fit, kind="stable")[: cfg.population_size]
        pop, fit = pool_genes[order], pool_fit[order]
        history.append(float(fit[0]))

    if not np.isfinite(fit[0]):
        raise EstimationError("no feasible genome found", stage="ga_fit")
    return _finish_fit(family, tuple(pop[0]), float(fit[0]), "ga", sample,
                       history=tuple(history))


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------

def bootstrap_se(
    sample: BidSample,
    fitter: Callable[[BidSample], FitResult],
    n_replicates: int,
    seed: int,
    max_failure_fraction: float = 0.2,
) -> dict[str, float]:
    """Standard errors of a fitter's parameters over resampled event times.

    Each replicate resamples n times with replacement, refits, and the SE of
    each reported parameter is the ddof=1 standard deviation across the
    replicates.  Replicates where the fitter raises are tolerated up to
    max_failure_fraction of n_replicates; beyond that an error reports the
    observed failure fraction.  Deterministic for a given seed.
    """
    if n_replicates < 2:
        raise ValueError("need at least 2 replicates")
    if sample.n == 0:
        raise EstimationError("cannot bootstrap an empty sample", stage="bootstrap")
    children = np.random.SeedSequence(seed).spawn(n_replicates)
    draws: list[dict[str, float]] = []
    failures = 0
    for child in children:
        rng = np.random.default_rng(child)
        idx = rng.integers(0, sample.n, size=sample.n)
        boot = BidSample(times=np.sort(sample.times[idx]), T=sample.T)
        try:
            draws.append(fitter(boot).params)
        except (EstimationError, ValueError):
            failures += 1
    frac = failures / n_replicates
    if frac > max_failure_fraction or len(draws) < 2:
        raise EstimationError(
            f"bootstrap refit failed on {failures}/{n_replicates} replicates "
            f"({frac:.0%} > {max_failure_fraction:.0%} allowed)",
            stage="bootstrap",
        )
    return {
        k: float(np.std([d[k] for d in draws], ddof=1))
        for k in draws[0]
    }
