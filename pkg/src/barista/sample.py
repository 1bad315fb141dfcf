"""Containers for observed bid times."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["BidSample", "pool"]


@dataclass(frozen=True)
class BidSample:
    """Sorted bid times on a common horizon.

    times are offsets from auction start, each in [0, T); ties are kept in the
    order supplied.  sources, when present, aligns an auction identifier with
    each time so pooled samples stay traceable.
    """

    times: np.ndarray
    T: float
    sources: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", t)
        if t.ndim != 1:
            raise ValueError("times must be a 1-d array")
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValueError(f"T must be finite and > 0, got {self.T}")
        if t.size:
            if not np.all(np.isfinite(t)):
                raise ValueError("times must be finite")
            if np.any(t < 0) or np.any(t >= self.T):
                raise ValueError("times must lie in [0, T)")
            if np.any(np.diff(t) < 0):
                raise ValueError("times must be sorted nondecreasing")
        if self.sources is not None:
            object.__setattr__(self, "sources", tuple(str(s) for s in self.sources))
            if len(self.sources) != t.size:
                raise ValueError("sources must align with times")

    @property
    def n(self) -> int:
        return int(self.times.size)

    def per_source_counts(self) -> dict[str, int]:
        """Bid counts keyed by auction identifier ({'': n} when untagged)."""
        if self.sources is None:
            return {"": self.n}
        counts: dict[str, int] = {}
        for s in self.sources:
            counts[s] = counts.get(s, 0) + 1
        return counts


def pool(samples: list[BidSample] | tuple[BidSample, ...]) -> BidSample:
    """Merge samples observed on the same horizon into one sorted sample.

    Horizons must match exactly; differing T values are a modeling error, not
    something to silently rescale.
    """
    if not samples:
        raise ValueError("pool needs at least one sample")
    T = samples[0].T
    for i, s in enumerate(samples):
        if s.T != T:
            raise ValueError(f"sample {i} has horizon {s.T}, expected {T}")
    times = np.concatenate([s.times for s in samples]) if samples else np.empty(0)
    tagged = all(s.sources is not None for s in samples)
    if tagged:
        src = [x for s in samples for x in s.sources]  # type: ignore[union-attr]
    else:
        src = None
    order = np.argsort(times, kind="stable")
    return BidSample(
        times=times[order],
        T=T,
        sources=tuple(src[i] for i in order) if src is not None else None,
    )
