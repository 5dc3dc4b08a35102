"""Log-likelihood-ratio scalar algebra.

LLRs are plain floats on the extended real line: +inf means "certainly 0",
-inf means "certainly 1", 0 means "no information".  NaN is never a valid
LLR and is never produced by the operations here.
"""

from __future__ import annotations

import math
from typing import Iterable, Optional

import numpy as np

__all__ = ["boxplus", "boxplus_fold", "hard_decision"]


def boxplus(a: float, b: float) -> float:
    """Combine two LLRs observed through a parity (check-node) constraint.

    Mathematically 2*atanh(tanh(a/2)*tanh(b/2)), computed in the stable form

        sgn(a)*sgn(b) * [ min(|a|,|b|) + log1p(e^-(|a|+|b|)) - log1p(e^-||a|-|b||) ]

    which stays finite and accurate for large magnitudes where the tanh
    product saturates.  Conventions: x [+] 0 = 0 (an unknown absorbs),
    x [+] +inf = x (a known bit is transparent), and the doubly-infinite
    corner 0-vs-inf resolves to 0.
    """
    aa = abs(a)
    ab = abs(b)
    if aa > ab:
        aa, ab = ab, aa
    # aa = min magnitude. Sign of the result follows the sign product.
    s = 1.0
    if (a < 0.0) != (b < 0.0):
        s = -1.0
    if math.isinf(aa):
        # both infinite: certainty combines to certainty
        return s * math.inf
    if math.isinf(ab):
        # one infinite argument drops out of both correction terms
        return s * aa
    mag = aa + math.log1p(math.exp(-(aa + ab))) - math.log1p(math.exp(-(ab - aa)))
    return s * mag


def boxplus_fold(values: Iterable[float]) -> float:
    """Left fold of :func:`boxplus` over a non-empty sequence of LLRs."""
    it = iter(values)
    try:
        acc = float(next(it))
    except StopIteration:
        raise ValueError("boxplus_fold requires at least one LLR") from None
    for v in it:
        acc = boxplus(acc, float(v))
    return acc


def hard_decision(llr: float, tie_rng: Optional[np.random.Generator] = None) -> int:
    """Map an LLR to a bit: 0 if llr > 0, 1 if llr < 0, fair coin at 0.

    The coin comes from ``tie_rng`` so that callers control reproducibility;
    exact ties do occur with discrete channels (e.g. cancelling BSC LLRs).
    """
    if llr > 0.0:
        return 0
    if llr < 0.0:
        return 1
    if tie_rng is None:
        raise ValueError("hard_decision on an exact tie requires tie_rng")
    return int(tie_rng.integers(0, 2))
