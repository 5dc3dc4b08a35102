"""Quantized LLR-density arithmetic.

Densities of log-likelihood ratios live on a symmetric grid of 2Q+1 cells,
cell i centered at i*delta, with the outermost cells absorbing everything
beyond +-(A - delta/2), A = Q*delta.  Two convolutions drive density
evolution: the variable-node sum (`conv_star`) and the check-node box-plus
(`conv_box`, with a banded fast variant).  Erasure-channel densities stay
two-atom forever, so they also get an exact symbolic form (`BecDensity`).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from . import _jit

__all__ = [
    "LlrGrid",
    "QuantizedDensity",
    "BecDensity",
    "nearest",
    "project",
    "conv_star",
    "conv_box",
    "conv_box_fast",
    "error_prob",
    "bec_star",
    "bec_box",
    "write_density",
    "read_density",
]

# direct pairwise conv_star whenever nnz(f)*nnz(g) is below this; keeps
# few-atom densities (erasure channels) bit-exact instead of FFT-noisy
_SPARSE_PAIR_LIMIT = 1 << 16


class LlrGrid:
    """Uniform LLR quantization grid: 2Q+1 cells of width delta."""

    __slots__ = ("Q", "delta", "_tn", "_band")

    def __init__(self, Q: int, delta: float):
        if Q < 1 or delta <= 0.0:
            raise ValueError("grid needs Q >= 1 and delta > 0")
        self.Q = int(Q)
        self.delta = float(delta)
        self._tn = None
        self._band = None

    @classmethod
    def default(cls) -> "LlrGrid":
        # A = 60 with 2^13 levels per side
        return cls(8192, 60.0 / 8192.0)

    @property
    def A(self) -> float:
        """Saturation bound Q*delta."""
        return self.Q * self.delta

    @property
    def ncells(self) -> int:
        return 2 * self.Q + 1

    def __eq__(self, other):
        return (isinstance(other, LlrGrid)
                and self.Q == other.Q and self.delta == other.delta)

    def __hash__(self):
        return hash((self.Q, self.delta))

    def __repr__(self):
        return f"LlrGrid(Q={self.Q}, delta={self.delta!r})"

    def nearest(self, x: float) -> int:
        """Cell index of x; +-inf go to the saturation cells +-Q."""
        if x != x:
            raise ValueError("nan is not a valid LLR")
        if x >= 0.0:
            k = int(math.floor(x / self.delta + 0.5)) if x != math.inf else self.Q
            return min(k, self.Q)
        k = int(math.floor(-x / self.delta + 0.5)) if x != -math.inf else self.Q
        return -min(k, self.Q)

    def output_window(self) -> int:
        """Cells below min(|i|,|j|) that a box output can land on."""
        return int(math.ceil(math.log(2.0) / self.delta - 0.5))

    def correction_table(self) -> np.ndarray:
        """tn[m] = log1p(exp(-m*delta))/delta for m = 0..2Q.

        The box-plus magnitude of cell pair (a, b), a <= b, in units of
        delta, is a + tn[a+b] - tn[b-a]; rounding that to the nearest
        integer classifies the pair's output cell.
        """
        if self._tn is None:
            m = np.arange(2 * self.Q + 1, dtype=np.float64)
            self._tn = np.log1p(np.exp(-m * self.delta)) / self.delta
        return self._tn

    def fast_band_width(self) -> int:
        """Magnitude-difference band inside which pairs are classified
        individually by conv_box_fast.

        Past the band the correction tn[b-a] - tn[a+b] stays below a
        quarter cell, so rounding provably returns the smaller magnitude's
        own cell and the pair can be folded into a suffix sum.
        """
        if self._band is None:
            w = 1
            quarter = self.delta / 4.0
            while w < self.Q and math.log1p(math.exp(-w * self.delta)) >= quarter:
                w += 1
            self._band = min(w + 2, self.Q)
        return self._band


class QuantizedDensity:
    """Probability masses on the cells of an LlrGrid, index -Q..Q."""

    __slots__ = ("grid", "mass")

    def __init__(self, grid: LlrGrid, mass, *, validate: bool = True):
        mass = np.ascontiguousarray(mass, dtype=np.float64)
        if mass.shape != (grid.ncells,):
            raise ValueError(f"mass must have {grid.ncells} entries")
        if validate:
            if mass.min() < -1e-12:
                raise ValueError("negative mass")
            s = mass.sum()
            if abs(s - 1.0) > 1e-9:
                raise ValueError(f"mass sums to {s!r}, expected 1")
            mass = np.maximum(mass, 0.0)
        self.grid = grid
        self.mass = mass

    def at(self, i: int) -> float:
        """Mass of cell i (signed index)."""
        return float(self.mass[self.grid.Q + i])

    @classmethod
    def point(cls, grid: LlrGrid, llr: float) -> "QuantizedDensity":
        m = np.zeros(grid.ncells)
        m[grid.Q + grid.nearest(llr)] = 1.0
        return cls(grid, m, validate=False)

    def __repr__(self):
        nz = int(np.count_nonzero(self.mass))
        return f"QuantizedDensity(Q={self.grid.Q}, nonzero_cells={nz})"


@dataclass(frozen=True)
class BecDensity:
    """Erasure-channel LLR density: mass p at 0, mass 1-p at +inf."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("erasure probability must lie in [0, 1]")

    def to_quantized(self, grid: LlrGrid) -> QuantizedDensity:
        m = np.zeros(grid.ncells)
        m[grid.Q] = self.p
        m[2 * grid.Q] += 1.0 - self.p
        return QuantizedDensity(grid, m, validate=False)


def nearest(grid: LlrGrid, x: float) -> int:
    return grid.nearest(x)


def project(points, grid: LlrGrid) -> QuantizedDensity:
    """Drop a finite set of (llr, mass) atoms onto the grid."""
    m = np.zeros(grid.ncells)
    total = 0.0
    for llr, w in points:
        if w < 0.0:
            raise ValueError("negative mass")
        m[grid.Q + grid.nearest(llr)] += w
        total += w
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"masses sum to {total!r}, expected 1")
    return QuantizedDensity(grid, m, validate=False)


def _require_same_grid(f: QuantizedDensity, g: QuantizedDensity) -> LlrGrid:
    if f.grid != g.grid:
        raise ValueError("density grids differ")
    return f.grid


def conv_star(f: QuantizedDensity, g: QuantizedDensity) -> QuantizedDensity:
    """Density of the sum of independent LLRs, tails folded onto +-Q.

    FFT for dense inputs; exact pairwise accumulation when the product of
    support sizes is small, so few-atom densities never pick up FFT noise.
    """
    grid = _require_same_grid(f, g)
    Q = grid.Q
    fi = np.flatnonzero(f.mass)
    gi = np.flatnonzero(g.mass)
    if fi.size * gi.size <= _SPARSE_PAIR_LIMIT:
        out = np.zeros(grid.ncells)
        gv = g.mass[gi]
        for p in fi:
            np.add.at(out, np.clip(p + gi - Q, 0, 2 * Q), f.mass[p] * gv)
        return QuantizedDensity(grid, out, validate=False)
    full = fftconvolve(f.mass, g.mass)  # length 4Q+1, center at 2Q
    out = np.empty(grid.ncells)
    out[0] = full[:Q + 1].sum()
    out[1:2 * Q] = full[Q + 1:3 * Q]
    out[2 * Q] = full[3 * Q:].sum()
    np.maximum(out, 0.0, out=out)
    return QuantizedDensity(grid, out, validate=False)


def conv_box(f: QuantizedDensity, g: QuantizedDensity) -> QuantizedDensity:
    """Box-plus convolution, every cell pair classified individually."""
    grid = _require_same_grid(f, g)
    out = _jit.conv_box_exact(f.mass, g.mass, grid.Q, grid.correction_table())
    return QuantizedDensity(grid, out, validate=False)


def conv_box_fast(f: QuantizedDensity, g: QuantizedDensity) -> QuantizedDensity:
    """Banded box-plus convolution; agrees with conv_box to TV <= 1e-10."""
    grid = _require_same_grid(f, g)
    out = _jit.conv_box_fast(f.mass, g.mass, grid.Q, grid.correction_table(),
                             grid.fast_band_width())
    return QuantizedDensity(grid, out, validate=False)


def error_prob(f) -> float:
    """Pr{L < 0} + Pr{L = 0}/2 under f.  Accepts quantized or BEC form."""
    if isinstance(f, BecDensity):
        return f.p / 2.0
    Q = f.grid.Q
    return float(f.mass[:Q].sum() + 0.5 * f.mass[Q])


def bec_star(a: BecDensity, b: BecDensity) -> BecDensity:
    return BecDensity(a.p * b.p)


def bec_box(a: BecDensity, b: BecDensity) -> BecDensity:
    return BecDensity(a.p + b.p - a.p * b.p)


def write_density(f: QuantizedDensity, path) -> None:
    """Text dump: header line `Q delta`, then the 2Q+1 masses, -Q..Q."""
    def emit(fh):
        fh.write(f"{f.grid.Q} {f.grid.delta!r}\n")
        for v in f.mass:
            fh.write(f"{float(v)!r}\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)


def read_density(path, grid: LlrGrid | None = None) -> QuantizedDensity:
    if isinstance(path, io.TextIOBase):
        lines = path.read().split()
    else:
        with open(path) as fh:
            lines = fh.read().split()
    if len(lines) < 2:
        raise ValueError("density file: missing header")
    Q = int(lines[0])
    delta = float(lines[1])
    got = LlrGrid(Q, delta)
    if grid is not None and grid != got:
        raise ValueError(f"density file grid {got!r} does not match {grid!r}")
    vals = np.array([float(v) for v in lines[2:]])
    if vals.size != got.ncells:
        raise ValueError(f"density file: expected {got.ncells} masses, got {vals.size}")
    return QuantizedDensity(got, vals)
