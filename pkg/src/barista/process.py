"""Three-stage power-law arrival process: parameters and closed-form evaluation.

The process is a nonhomogeneous Poisson process on [0, T] whose intensity is a
power law in the remaining time T - s, with different exponents in an early,
a middle and a late stage and continuous joins at the changepoints d1 and
T - d2:

    lambda(s) = c * (1 - d1/T)^(alpha2 - alpha1) * (1 - s/T)^(alpha1 - 1)   on [0, d1)
    lambda(s) = c * (1 - s/T)^(alpha2 - 1)                                  on [d1, T - d2)
    lambda(s) = c * (d2/T)^(alpha2 - alpha3) * (1 - s/T)^(alpha3 - 1)       on [T - d2, T]

Everything downstream (mean count, CDF, density, quantiles) has a closed form,
implemented here.  The normalized event-time density is f(s) = C * b(s) where
b is the bracketed power term of the intensity and C = c / m(T) depends only on
the shape parameters, not on c.

All evaluation functions accept scalars or numpy arrays and return matching
shapes.  Parameter containers are frozen dataclasses validated at construction,
so an instance that exists is usable.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "BaristaParams",
    "OneStage",
    "TwoStage",
    "ThreeStage",
    "ModelFamily",
    "normalization_constant",
    "intensity",
    "mean_count",
    "cdf",
    "pdf",
    "inverse_cdf",
    "restrict",
    "superpose",
]

# Tolerance for declaring two shape-parameter sets equal in superpose().
_SHAPE_MATCH_RTOL = 1e-9


@dataclass(frozen=True)
class BaristaParams:
    """Full parameter vector of the three-stage process.

    Attributes:
        alpha1: early-stage exponent (> 0).
        alpha2: mid-stage exponent (> 0).
        alpha3: late-stage exponent (> 0).
        d1: length of the early stage, measured from 0 (>= 0).
        d2: length of the late stage, measured back from T (>= 0).
        c: intensity scale (> 0).
        T: horizon (> 0).  The stages must be ordered: d1 < T - d2 <= T.
    """

    alpha1: float
    alpha2: float
    alpha3: float
    d1: float
    d2: float
    c: float
    T: float

    def __post_init__(self) -> None:
        for name in ("alpha1", "alpha2", "alpha3", "c", "T"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if not (math.isfinite(self.d1) and self.d1 >= 0):
            raise ValueError(f"d1 must be finite and >= 0, got {self.d1}")
        if not (math.isfinite(self.d2) and self.d2 >= 0):
            raise ValueError(f"d2 must be finite and >= 0, got {self.d2}")
        if not self.d1 < self.T - self.d2:
            raise ValueError(
                f"stages must satisfy d1 < T - d2, got d1={self.d1}, "
                f"T - d2={self.T - self.d2}"
            )

    def with_c(self, c: float) -> "BaristaParams":
        """Same shape with a different intensity scale."""
        return replace(self, c=c)


@dataclass(frozen=True)
class OneStage:
    """Single power-law stage: lambda(s) = c (1 - s/T)^(alpha - 1) on [0, T]."""

    alpha: float
    c: float
    T: float

    tag = "one-stage"
    free_names = ("alpha",)

    def as_barista(self) -> BaristaParams:
        return BaristaParams(self.alpha, self.alpha, self.alpha, 0.0, 0.0, self.c, self.T)

    def free_values(self) -> dict[str, float]:
        return {"alpha": self.alpha}


@dataclass(frozen=True)
class TwoStage:
    """Mid and late stage only (no early stage): d1 = 0, alpha1 = alpha2."""

    alpha2: float
    alpha3: float
    d2: float
    c: float
    T: float

    tag = "two-stage"
    free_names = ("alpha2", "alpha3", "d2")

    def as_barista(self) -> BaristaParams:
        return BaristaParams(self.alpha2, self.alpha2, self.alpha3, 0.0, self.d2, self.c, self.T)

    def free_values(self) -> dict[str, float]:
        return {"alpha2": self.alpha2, "alpha3": self.alpha3, "d2": self.d2}


@dataclass(frozen=True)
class ThreeStage:
    """All three stages free; wraps a full parameter vector."""

    params: BaristaParams

    tag = "three-stage"
    free_names = ("alpha1", "alpha2", "alpha3", "d1", "d2")

    @property
    def c(self) -> float:
        return self.params.c

    @property
    def T(self) -> float:
        return self.params.T

    def as_barista(self) -> BaristaParams:
        return self.params

    def free_values(self) -> dict[str, float]:
        p = self.params
        return {
            "alpha1": p.alpha1,
            "alpha2": p.alpha2,
            "alpha3": p.alpha3,
            "d1": p.d1,
            "d2": p.d2,
        }


ModelFamily = OneStage | TwoStage | ThreeStage

# Free shape-parameter counts drive the likelihood-ratio degrees of freedom.
N_FREE = {"one-stage": 1, "two-stage": 3, "three-stage": 5}


# ---------------------------------------------------------------------------
# internal pieces
# ---------------------------------------------------------------------------

def _ratios(p: BaristaParams) -> tuple[float, float]:
    """(q1, q2) = (1 - d1/T, d2/T); q1 > 0 always, q2 may be 0."""
    return 1.0 - p.d1 / p.T, p.d2 / p.T


def _denominator(p: BaristaParams) -> float:
    """B such that m(T) = T c B / (alpha1 alpha2 alpha3); positive for valid p."""
    q1, q2 = _ratios(p)
    a1, a2, a3 = p.alpha1, p.alpha2, p.alpha3
    return a2 * a3 * q1 ** (a2 - a1) + a3 * (a1 - a2) * q1 ** a2 + a1 * (a2 - a3) * q2 ** a2


def _stage_masks(p: BaristaParams, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # Half-open branches [0, d1), [d1, T-d2), [T-d2, T].  With d2 = 0 the last
    # stage is empty and s = T is evaluated on the middle branch, whose closed
    # form remains the correct limit there.
    if p.d2 > 0:
        m3 = s >= p.T - p.d2
    else:
        m3 = np.zeros(s.shape, dtype=bool)
    m1 = s < p.d1
    m2 = ~(m1 | m3)
    return m1, m2, m3


def _branch_power(p: BaristaParams, s: np.ndarray) -> np.ndarray:
    """Power term b(s) with lambda = c*b and pdf = C*b."""
    q1, q2 = _ratios(p)
    rem = 1.0 - s / p.T
    m1, m2, m3 = _stage_masks(p, s)
    out = np.empty_like(s, dtype=float)
    with np.errstate(divide="ignore"):
        # 0^0 -> 1 and 0^negative -> inf are the intended limits at s = T.
        out[m1] = q1 ** (p.alpha2 - p.alpha1) * rem[m1] ** (p.alpha1 - 1.0)
        out[m2] = rem[m2] ** (p.alpha2 - 1.0)
        if m3.any():
            # the mask is nonempty only when d2 > 0, so q2 > 0 here
            out[m3] = q2 ** (p.alpha2 - p.alpha3) * rem[m3] ** (p.alpha3 - 1.0)
    return out


def _as_array(s, lo: float, hi: float, what: str) -> tuple[np.ndarray, bool]:
    arr = np.asarray(s, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if arr.size and (np.any(arr < lo) or np.any(arr > hi) or not np.all(np.isfinite(arr))):
        raise ValueError(f"{what} must lie in [{lo}, {hi}]")
    return arr, scalar


def _ret(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# public evaluation
# ---------------------------------------------------------------------------

def normalization_constant(p: BaristaParams) -> float:
    """C = c / m(T), written so that c cancels.

    Depends only on (alpha1, alpha2, alpha3, d1, d2, T); the event-time density
    is f(s) = C * b(s) with b the intensity power term.
    """
    return (p.alpha1 * p.alpha2 * p.alpha3 / p.T) / _denominator(p)


def intensity(p: BaristaParams, s):
    """Arrival intensity lambda(s) for s in [0, T].

    May return inf at s = T when the final exponent is below 1; the
    singularity is integrable.
    """
    arr, scalar = _as_array(s, 0.0, p.T, "s")
    return _ret(p.c * _branch_power(p, arr), scalar)


def mean_count(p: BaristaParams, s):
    """Expected number of events in [0, s]: m(s) = integral of the intensity."""
    arr, scalar = _as_array(s, 0.0, p.T, "s")
    q1, q2 = _ratios(p)
    a1, a2, a3 = p.alpha1, p.alpha2, p.alpha3
    K = (p.T * p.c / a1) * q1 ** (a2 - a1)
    m_at_d1 = K * (1.0 - q1 ** a1)
    # cumulative mass of the middle stage up to its end
    m_at_cut = m_at_d1 + (p.T * p.c / a2) * (q1 ** a2 - q2 ** a2)

    rem = 1.0 - arr / p.T
    m1, m2, m3 = _stage_masks(p, arr)
    out = np.empty_like(arr, dtype=float)
    out[m1] = K * (1.0 - rem[m1] ** a1)
    out[m2] = m_at_d1 + (p.T * p.c / a2) * (q1 ** a2 - rem[m2] ** a2)
    if np.any(m3):
        # written via r = (1 - s/T)/q2 in [0, 1] to stay finite for tiny q2
        r = rem[m3] / q2
        out[m3] = m_at_cut + (p.T * p.c / a3) * q2 ** a2 * (1.0 - r ** a3)
    return _ret(out, scalar)


def cdf(p: BaristaParams, s):
    """Distribution function of a single event time, F(s) = m(s) / m(T)."""
    arr, scalar = _as_array(s, 0.0, p.T, "s")
    C = normalization_constant(p)
    q1, q2 = _ratios(p)
    a1, a2, a3 = p.alpha1, p.alpha2, p.alpha3
    CT = C * p.T
    F_at_d1 = (CT / a1) * q1 ** (a2 - a1) * (1.0 - q1 ** a1)

    rem = 1.0 - arr / p.T
    m1, m2, m3 = _stage_masks(p, arr)
    out = np.empty_like(arr, dtype=float)
    out[m1] = (CT / a1) * q1 ** (a2 - a1) * (1.0 - rem[m1] ** a1)
    out[m2] = F_at_d1 + (CT / a2) * (q1 ** a2 - rem[m2] ** a2)
    if np.any(m3):
        r = rem[m3] / q2
        out[m3] = 1.0 - (CT / a3) * q2 ** a2 * r ** a3
    # F(T) = 1 exactly; the branch algebra can drift by an ulp
    out[arr == p.T] = 1.0
    return _ret(np.clip(out, 0.0, 1.0), scalar)


def pdf(p: BaristaParams, s):
    """Density of a single event time: f(s) = C * b(s) = lambda(s) / m(T)."""
    arr, scalar = _as_array(s, 0.0, p.T, "s")
    return _ret(normalization_constant(p) * _branch_power(p, arr), scalar)


def inverse_cdf(p: BaristaParams, u):
    """Quantile function F^{-1}(u) for u in [0, 1], by branch-wise inversion.

    The branch is chosen by comparing u with F(d1) and F(T - d2); each branch
    of F is a shifted power and inverts in closed form.
    """
    arr, scalar = _as_array(u, 0.0, 1.0, "u")
    C = normalization_constant(p)
    q1, q2 = _ratios(p)
    a1, a2, a3 = p.alpha1, p.alpha2, p.alpha3
    CT = C * p.T
    F1 = cdf(p, p.d1) if p.d1 > 0 else 0.0
    F2 = cdf(p, p.T - p.d2) if p.d2 > 0 else 1.0

    out = np.empty_like(arr, dtype=float)
    m1 = arr <= F1
    m3 = arr > F2
    m2 = ~(m1 | m3)
    if np.any(m1):
        inner = 1.0 - arr[m1] * (a1 / CT) * q1 ** (a1 - a2)
        out[m1] = p.T * (1.0 - np.maximum(inner, 0.0) ** (1.0 / a1))
    if np.any(m2):
        inner = q1 ** a2 - (a2 / CT) * (arr[m2] - F1)
        out[m2] = p.T * (1.0 - np.maximum(inner, 0.0) ** (1.0 / a2))
    if np.any(m3):
        inner = (1.0 - arr[m3]) * (a3 / CT) * q2 ** (a3 - a2)
        out[m3] = p.T * (1.0 - np.maximum(inner, 0.0) ** (1.0 / a3))
    return _ret(np.clip(out, 0.0, p.T), scalar)


def restrict(p: BaristaParams, beta: float) -> BaristaParams:
    """Parameters of the process observed from time beta*T onward.

    Restarting the clock at beta*T leaves a process of the same family on the
    shorter horizon T' = (1 - beta)T with

        c' = c (1 - beta)^(alpha2 - 1),  d1' = max(d1 - beta T, 0),
        d2' = min(d2, T'),

    and the same exponents; intensity'(s) = intensity(beta*T + s) exactly.
    Requires beta*T < T - d2 (the remaining window must start before the last
    stage), otherwise the mapped vector degenerates to d1' = T' - d2'.
    """
    if not (0.0 <= beta < 1.0):
        raise ValueError(f"beta must lie in [0, 1), got {beta}")
    if beta * p.T >= p.T - p.d2:
        raise ValueError(
            "restriction must start before the final stage: "
            f"beta*T={beta * p.T} >= T - d2={p.T - p.d2}"
        )
    T_new = (1.0 - beta) * p.T
    return BaristaParams(
        alpha1=p.alpha1,
        alpha2=p.alpha2,
        alpha3=p.alpha3,
        d1=max(p.d1 - beta * p.T, 0.0),
        d2=min(p.d2, T_new),
        c=p.c * (1.0 - beta) ** (p.alpha2 - 1.0),
        T=T_new,
    )


def superpose(components: list[BaristaParams] | tuple[BaristaParams, ...]) -> BaristaParams:
    """Pool independent processes with a common shape: scales add.

    All components must share (alpha1, alpha2, alpha3, d1, d2, T) to relative
    tolerance 1e-9; the result keeps the first component's shape and sums c.
    """
    if not components:
        raise ValueError("superpose needs at least one component")
    ref = components[0]
    fields = ("alpha1", "alpha2", "alpha3", "d1", "d2", "T")
    for i, q in enumerate(components[1:], start=1):
        for name in fields:
            a, b = getattr(ref, name), getattr(q, name)
            if not math.isclose(a, b, rel_tol=_SHAPE_MATCH_RTOL, abs_tol=1e-12 * ref.T):
                raise ValueError(
                    f"component {i} differs from component 0 in {name}: {b} vs {a}"
                )
    return ref.with_c(sum(q.c for q in components))
