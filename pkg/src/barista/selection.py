"""Nested model selection across the one/two/three-stage families.

Each step doubles the stage count's flexibility by freeing two parameters
(an exponent and a changepoint), so the likelihood-ratio statistic is referred
to a chi-squared distribution with 2 degrees of freedom at both steps.
Selection runs forward: stop at the first test whose p-value exceeds the
level, otherwise move to the richer family.

The families nest exactly: a one-stage process is a two-stage process with
equal exponents, and a two-stage process is a three-stage one with the early
exponent tied and d1 arbitrary.  A richer family's search can still return a
worse optimum than the smaller family's (finite search budget), which would
make the statistic negative; the fitted value is floored at the embedded
smaller model and, if the flag persists, refined once on a local grid around
that embedding before giving up and clamping.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .estimate import (
    FitResult,
    GaConfig,
    _CondLoglik,
    _finish_fit,
    _genes_to_vector,
    default_bounds,
    ga_fit,
)
from .process import ModelFamily, OneStage, TwoStage
from .sample import BidSample

__all__ = [
    "LrTest",
    "SelectionResult",
    "lr_statistic",
    "lr_test",
    "chi2_sf_2df",
    "select_model",
]

# a fitted pair whose raw statistic dips below this is flagged as a search
# failure rather than rounding noise
_NEGATIVE_TOL = -1e-6


@dataclass(frozen=True)
class LrTest:
    """One likelihood-ratio comparison of nested fits."""

    statistic: float
    p_value: float
    df: int = 2
    negative_flag: bool = False


@dataclass(frozen=True)
class SelectionResult:
    chosen: ModelFamily
    fits: dict[str, FitResult]
    lr_one_two: LrTest
    lr_two_three: LrTest | None
    alpha_level: float


def chi2_sf_2df(x: float) -> float:
    """Survival function of chi-squared with 2 df: exp(-x/2)."""
    if x < 0:
        raise ValueError(f"statistic must be >= 0, got {x}")
    return math.exp(-x / 2.0)


def lr_statistic(loglik_small: float, loglik_big: float) -> float:
    """-2 (ll_small - ll_big), floored at zero."""
    return max(0.0, -2.0 * (loglik_small - loglik_big))


def lr_test(loglik_small: float, loglik_big: float, df: int = 2) -> LrTest:
    raw = -2.0 * (loglik_small - loglik_big)
    stat = max(0.0, raw)
    return LrTest(
        statistic=stat,
        p_value=chi2_sf_2df(stat),
        df=df,
        negative_flag=raw < _NEGATIVE_TOL,
    )


def _embedding_genes(tag: str, smaller: FitResult) -> tuple[float, ...]:
    """Genes in family `tag` that reproduce the smaller fit exactly."""
    params = smaller.family
    if tag == "two-stage":
        assert isinstance(params, OneStage)
        return (params.alpha, params.alpha, 0.0)
    assert isinstance(params, TwoStage)
    # d1 is free once alpha1 == alpha2; put it mid-early-window for the
    # refinement grid to perturb
    return (params.alpha2, params.alpha2, params.alpha3, params.T / 4.0, params.d2)


def _refine_around(sample: BidSample, tag: str, genes: tuple[float, ...]) -> FitResult:
    """Best point on a small multiplicative grid around a genome.

    Keeps the genome itself in the grid, so the result is never worse than
    the starting point.
    """
    cache = _CondLoglik(sample)
    factors = (0.9, 1.0, 1.1)
    best_ll = -np.inf
    best: tuple[float, ...] | None = None
    # perturb one coordinate at a time; full product over 5 genes would be 243
    # points of mostly redundant work
    candidates = [genes]
    for i in range(len(genes)):
        for f in factors:
            if f == 1.0:
                continue
            g = list(genes)
            g[i] = g[i] * f if g[i] != 0.0 else (f - 1.0) * 1e-3 * sample.T
            candidates.append(tuple(g))
    for g in candidates:
        ll = cache.value(*_genes_to_vector(tag, g))
        if ll > best_ll:
            best_ll, best = ll, g
    assert best is not None
    return _finish_fit(tag, best, best_ll, "ga", sample)


def _fit_with_floor(sample: BidSample, tag: str, cfg: GaConfig, smaller: FitResult) -> FitResult:
    """GA fit of the bigger family, floored at the smaller fit's embedding."""
    fit = ga_fit(sample, tag, cfg)
    if fit.loglik >= smaller.loglik:
        return fit
    genes = _embedding_genes(tag, smaller)
    refined = _refine_around(sample, tag, genes)
    return refined if refined.loglik > fit.loglik else fit


def _default_configs(sample: BidSample, seed: int) -> dict[str, GaConfig]:
    root = np.random.SeedSequence(seed)
    seeds = root.generate_state(3)
    return {
        tag: GaConfig(bounds=default_bounds(tag, sample.T), seed=int(s))
        for tag, s in zip(("one-stage", "two-stage", "three-stage"), seeds)
    }


def select_model(
    sample: BidSample,
    configs: dict[str, GaConfig] | None = None,
    alpha_level: float = 0.05,
    seed: int = 0,
) -> SelectionResult:
    """Forward stepwise selection: one stage, then two, then three.

    configs may override the GA settings per family tag; missing tags fall
    back to defaults derived from `seed`.  At each step the richer family is
    adopted only when the LR test rejects at alpha_level.
    """
    if not (0.0 < alpha_level < 1.0):
        raise ValueError(f"alpha_level must lie in (0, 1), got {alpha_level}")
    defaults = _default_configs(sample, seed)
    if configs:
        unknown = set(configs) - set(defaults)
        if unknown:
            raise ValueError(f"unknown family tags {sorted(unknown)}")
        defaults.update(configs)

    fit1 = ga_fit(sample, "one-stage", defaults["one-stage"])
    fit2 = _fit_with_floor(sample, "two-stage", defaults["two-stage"], fit1)
    test12 = lr_test(fit1.loglik, fit2.loglik)
    fits = {"one-stage": fit1, "two-stage": fit2}
    if test12.p_value > alpha_level:
        return SelectionResult(fit1.family, fits, test12, None, alpha_level)

    fit3 = _fit_with_floor(sample, "three-stage", defaults["three-stage"], fit2)
    fits["three-stage"] = fit3
    test23 = lr_test(fit2.loglik, fit3.loglik)
    chosen = fit2.family if test23.p_value > alpha_level else fit3.family
    return SelectionResult(chosen, fits, test12, test23, alpha_level)
