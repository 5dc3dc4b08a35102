"""Code construction by density evolution and the union-type FER bound.

The channel-output LLR density is pushed down the transform recursion:
an even-index child is the box convolution of the parent with itself, an
odd-index child the star convolution.  Per-bit error probabilities E_i
come out at the message layer; freezing the worst N-K of them yields the
code and sum of the kept E_i bounds the SC frame error rate.

Erasure channels admit the same recursion on the erasure parameter alone
(box: 2p-p^2, star: p^2), kept in exact rational arithmetic here and used
as a cross-check oracle for the quantized path.
"""

from __future__ import annotations

import io
from fractions import Fraction

import numpy as np

from .channels import DiscreteSymmetricChannel
from .density import LlrGrid, QuantizedDensity, conv_box, conv_box_fast, conv_star, error_prob
from .polar import PolarCodeSpec

__all__ = [
    "BitErrorProfile",
    "de_bit_errors",
    "de_bit_densities",
    "bec_bit_errors",
    "choose_frozen",
    "fer_upper_bound",
    "analyze",
    "write_profile",
    "read_profile",
]


class BitErrorProfile:
    """Per-bit SC error probabilities E_i, message index order."""

    __slots__ = ("e",)

    def __init__(self, e):
        e = np.ascontiguousarray(e, dtype=np.float64)
        if e.ndim != 1 or e.size == 0 or e.size & (e.size - 1):
            raise ValueError("profile length must be a power of two")
        if e.min() < 0.0 or e.max() > 1.0 + 1e-12:
            raise ValueError("E_i values must lie in [0, 1]")
        self.e = e

    @property
    def n(self) -> int:
        return self.e.size.bit_length() - 1

    def __len__(self):
        return self.e.size

    def __repr__(self):
        return f"BitErrorProfile(N={self.e.size}, sum={self.e.sum():.4g})"


def de_bit_errors(f0: QuantizedDensity, n: int,
                  box_mode: str = "fast") -> BitErrorProfile:
    """Density evolution from the channel density f0 down n levels.

    Walks the 2^(n+1)-1 distinct densities depth-first, box child before
    star child, so E_i stream out in index order and only one density per
    level is alive at a time.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if box_mode == "exact":
        box = conv_box
    elif box_mode == "fast":
        box = conv_box_fast
    else:
        raise ValueError("box_mode must be 'exact' or 'fast'")
    out = np.empty(1 << n)
    pos = 0

    def walk(f: QuantizedDensity, depth: int) -> None:
        nonlocal pos
        if depth == 0:
            out[pos] = error_prob(f)
            pos += 1
            return
        walk(box(f, f), depth - 1)
        walk(conv_star(f, f), depth - 1)

    walk(f0, n)
    return BitErrorProfile(out)


def de_bit_densities(f0: QuantizedDensity, n: int,
                     box_mode: str = "fast") -> list[QuantizedDensity]:
    """Like de_bit_errors but keeps the 2^n message-layer densities
    themselves, index order.  Memory is 2^n full grids, so this is for
    small n (outer-code design), not large-N construction."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if box_mode == "exact":
        box = conv_box
    elif box_mode == "fast":
        box = conv_box_fast
    else:
        raise ValueError("box_mode must be 'exact' or 'fast'")
    out: list[QuantizedDensity] = []

    def walk(f: QuantizedDensity, depth: int) -> None:
        if depth == 0:
            out.append(f)
            return
        walk(box(f, f), depth - 1)
        walk(conv_star(f, f), depth - 1)

    walk(f0, n)
    return out


def bec_bit_errors(p: float, n: int) -> BitErrorProfile:
    """Erasure-channel profile, exact in rational arithmetic; E_i is half
    the bit's erasure parameter."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("erasure probability must lie in [0, 1]")
    if n < 0:
        raise ValueError("n must be nonnegative")
    out = np.empty(1 << n)
    pos = 0

    def walk(q: Fraction, depth: int) -> None:
        nonlocal pos
        if depth == 0:
            out[pos] = float(q) / 2.0
            pos += 1
            return
        walk(2 * q - q * q, depth - 1)
        walk(q * q, depth - 1)

    walk(Fraction(p), n)
    return BitErrorProfile(out)


def choose_frozen(profile: BitErrorProfile, K: int) -> np.ndarray:
    """Indices of the N-K largest E_i (ties freeze the smaller index),
    sorted ascending."""
    N = len(profile)
    if not 0 <= K <= N:
        raise ValueError(f"K must lie in [0, {N}]")
    # stable sort on -E keeps smaller indices first among equals
    order = np.argsort(-profile.e, kind="stable")
    return np.sort(order[:N - K]).astype(np.int64)


def fer_upper_bound(profile: BitErrorProfile, frozen) -> float:
    """Sum of E_i over unfrozen indices; can exceed 1, reported as-is."""
    mask = np.ones(len(profile), dtype=bool)
    fr = np.asarray(list(frozen), dtype=np.int64)
    if fr.size:
        if fr.min() < 0 or fr.max() >= len(profile):
            raise ValueError("frozen index out of range")
        mask[fr] = False
    return float(profile.e[mask].sum())


def analyze(spec: PolarCodeSpec, channel: DiscreteSymmetricChannel,
            grid: LlrGrid, box_mode: str = "fast") -> float:
    """FER bound of an existing code on an arbitrary channel: rerun the
    evolution there and sum E_i over the code's information positions."""
    profile = de_bit_errors(channel.initial_density(grid), spec.n, box_mode)
    return fer_upper_bound(profile, spec.frozen)


def write_profile(profile: BitErrorProfile, path) -> None:
    """Text dump, one E_i per line."""
    def emit(fh):
        for v in profile.e:
            fh.write(f"{float(v)!r}\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)


def read_profile(path) -> BitErrorProfile:
    if isinstance(path, io.TextIOBase):
        vals = path.read().split()
    else:
        with open(path) as fh:
            vals = fh.read().split()
    return BitErrorProfile(np.array([float(v) for v in vals]))
