"""SERP overlap between result lists: set Jaccard and rank-biased overlap.

RBO follows the equal-length formulation: both lists are truncated to
k = min(depth, |a|, |b|) before the series is summed. The extrapolated
variant assumes the depth-k agreement continues indefinitely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError

__all__ = ["RboParams", "serp_jaccard", "rbo"]

RBO_VARIANTS = ("base", "extrapolated")


@dataclass(frozen=True)
class RboParams:
    p: float = 0.9
    depth: int = 10
    variant: str = "extrapolated"

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise ConfigError(f"RBO persistence must lie in (0,1), got {self.p}")
        if self.depth < 1:
            raise ConfigError(f"RBO depth must be >= 1, got {self.depth}")
        if self.variant not in RBO_VARIANTS:
            raise ConfigError(f"unknown RBO variant '{self.variant}'")


def serp_jaccard(a, b, k: int | None = None) -> float | None:
    """Set overlap of the (optionally truncated) doc-id lists; undefined
    when both truncated lists are empty."""
    docs_a = set(a[:k] if k is not None else a)
    docs_b = set(b[:k] if k is not None else b)
    if not docs_a and not docs_b:
        return None
    return len(docs_a & docs_b) / len(docs_a | docs_b)


def rbo(a, b, params: RboParams = RboParams()) -> float | None:
    """Rank-biased overlap at k = min(depth, |a|, |b|); undefined when
    either list is empty at that depth.

    The series is summed over per-depth disagreement (1 - A_d) rather
    than agreement, so identical prefixes contribute exact zeros and
    rbo(a, a) comes out as exactly 1.0; the base score is then recovered
    by subtracting the extrapolation tail, which keeps
    base <= extrapolated <= 1 true even at floating-point resolution.
    """
    k = min(params.depth, len(a), len(b))
    if k < 1:
        return None
    p = params.p
    seen_a: set = set()
    seen_b: set = set()
    overlap = 0
    disagreement_terms = []  # (1 - A_d) * p^(d-1)
    power = 1.0
    for d in range(1, k + 1):
        doc_a, doc_b = a[d - 1], b[d - 1]
        if doc_a == doc_b:
            overlap += 1
        else:
            if doc_a in seen_b:
                overlap += 1
            if doc_b in seen_a:
                overlap += 1
        seen_a.add(doc_a)
        seen_b.add(doc_b)
        disagreement_terms.append(((d - overlap) / d) * power)
        power *= p
    # power has advanced to p^k; depth-k agreement is carried forward.
    # Both scores are >= 0 exactly; max() only absorbs rounding spill.
    tail = ((k - overlap) / k) * power
    extrapolated = max(0.0, 1.0 - ((1.0 - p) * math.fsum(disagreement_terms) + tail))
    if params.variant == "base":
        return max(0.0, extrapolated - (overlap / k) * power)
    return extrapolated
