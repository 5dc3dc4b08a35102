"""Binary-input symmetric channel models.

A channel is stored as its output alphabet with the conditional law under
input 0 only; symmetry supplies W(y|1) = W(-y|0).  The alphabet must be
closed under negation.  LLRs come from the mass ratio of a symbol and its
mirror, so discretized channels stay exactly antisymmetric.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .density import LlrGrid, QuantizedDensity, project

__all__ = [
    "DiscreteSymmetricChannel",
    "ChannelParam",
    "make_bsc",
    "make_bec",
    "discretize_awgn",
    "make_channel",
    "parse_channel",
    "llr_of",
    "initial_density",
    "sample",
    "write_channel",
    "read_channel",
]

AWGN_DEFAULT_BINS = 512
AWGN_DEFAULT_RANGE = 8.0


class DiscreteSymmetricChannel:
    """Finite output alphabet with W(y|0); mirror symmetry implied."""

    __slots__ = ("name", "symbols", "w0", "_mirror", "_llr", "_cum",
                 "mc_kind", "mc_par")

    def __init__(self, symbols, w0, name: str = "channel"):
        symbols = np.asarray(symbols, dtype=np.float64)
        w0 = np.asarray(w0, dtype=np.float64)
        if symbols.ndim != 1 or symbols.shape != w0.shape or symbols.size == 0:
            raise ValueError("symbols and w0 must be equal-length 1-d arrays")
        if np.unique(symbols).size != symbols.size:
            raise ValueError("duplicate output symbols")
        if w0.min() < 0.0:
            raise ValueError("negative probability")
        if abs(w0.sum() - 1.0) > 1e-12:
            raise ValueError(f"W(.|0) sums to {w0.sum()!r}, expected 1")
        order = np.argsort(symbols)
        self.symbols = symbols[order]
        self.w0 = w0[order]
        self.name = name
        # negation closure; binary float negation is exact, so match exactly
        mirror = np.searchsorted(self.symbols, -self.symbols)
        if (mirror >= symbols.size).any() or \
                not np.array_equal(self.symbols[mirror], -self.symbols):
            raise ValueError("alphabet is not closed under negation")
        self._mirror = mirror
        with np.errstate(divide="ignore"):
            lw = np.log(self.w0)
        llr = lw - lw[mirror]
        llr[np.isnan(llr)] = 0.0  # dead symbols (zero mass on both sides)
        self._llr = llr
        cum = np.cumsum(self.w0)
        cum[-1] = 1.0
        self._cum = cum
        # generic inverse-CDF sampling; constructors override with fast paths
        self.mc_kind = 3
        self.mc_par = (0.0, 0.0, 0.0)

    def llr_of(self, y: float) -> float:
        i = np.searchsorted(self.symbols, y)
        if i >= self.symbols.size or self.symbols[i] != y:
            raise ValueError(f"symbol {y!r} not in alphabet of {self.name}")
        return float(self._llr[i])

    def initial_density(self, grid: LlrGrid) -> QuantizedDensity:
        """Channel-output LLR density under the all-zero assumption."""
        return project(zip(self._llr, self.w0), grid)

    def sample(self, bit: int, rng) -> tuple[float, float]:
        """Draw (y, llr_of(y)) with y ~ W(.|bit)."""
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        i = int(np.searchsorted(self._cum, rng.random(), side="right"))
        if i >= self.symbols.size:
            i = self.symbols.size - 1
        if bit:
            i = self._mirror[i]
        return float(self.symbols[i]), float(self._llr[i])

    def hard_error_prob(self) -> float:
        """Raw hard-decision bit error: mass with llr<0 plus half of llr=0."""
        return float(self.w0[self._llr < 0].sum() + 0.5 * self.w0[self._llr == 0].sum())

    def mc_tables(self):
        """(kind, par1, par2, par3, cum, llr_tab) for the compiled samplers."""
        p1, p2, p3 = self.mc_par
        return self.mc_kind, p1, p2, p3, self._cum, self._llr

    def __repr__(self):
        return f"DiscreteSymmetricChannel({self.name}, {self.symbols.size} outputs)"


@dataclass(frozen=True)
class ChannelParam:
    """Parsed channel request: kind in {'bsc', 'bec', 'awgn'} plus value."""

    kind: str
    value: float

    def __post_init__(self):
        if self.kind == "bsc":
            if not 0.0 <= self.value <= 0.5:
                raise ValueError("BSC crossover must lie in [0, 1/2]")
        elif self.kind == "bec":
            if not 0.0 <= self.value <= 1.0:
                raise ValueError("BEC erasure probability must lie in [0, 1]")
        elif self.kind == "awgn":
            if not math.isfinite(self.value):
                raise ValueError("AWGN SNR must be finite")
        else:
            raise ValueError(f"unknown channel kind {self.kind!r}")

    def label(self) -> str:
        return f"{self.kind}:{self.value:g}"


def make_bsc(p: float) -> DiscreteSymmetricChannel:
    if not 0.0 <= p <= 0.5:
        raise ValueError("BSC crossover must lie in [0, 1/2]")
    ch = DiscreteSymmetricChannel([-1.0, 1.0], [p, 1.0 - p], name=f"bsc({p:g})")
    ch.mc_kind = 0
    ch.mc_par = (p, abs(float(ch._llr[1])), 0.0)
    return ch


def make_bec(p: float) -> DiscreteSymmetricChannel:
    if not 0.0 <= p <= 1.0:
        raise ValueError("BEC erasure probability must lie in [0, 1]")
    ch = DiscreteSymmetricChannel([-1.0, 0.0, 1.0], [0.0, p, 1.0 - p],
                                  name=f"bec({p:g})")
    ch.mc_kind = 1
    ch.mc_par = (p, 0.0, 0.0)
    return ch


def discretize_awgn(snr_db: float, bins: int = AWGN_DEFAULT_BINS,
                    range_: float = AWGN_DEFAULT_RANGE) -> DiscreteSymmetricChannel:
    """BPSK-AWGN at SNR(dB) = 10*log10(1/sigma^2), cut into `bins` uniform
    intervals over [-range_, range_] plus two absorbing tails."""
    if bins < 1 or range_ <= 0.0:
        raise ValueError("need bins >= 1 and range > 0")
    sigma2 = 10.0 ** (-snr_db / 10.0)
    sigma = math.sqrt(sigma2)
    edges = np.linspace(-range_, range_, bins + 1)
    cdf = ndtr((edges - 1.0) / sigma)
    w0 = np.empty(bins + 2)
    w0[0] = cdf[0]
    w0[1:-1] = np.diff(cdf)
    w0[-1] = 1.0 - cdf[-1]
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = range_ / bins
    symbols = np.concatenate(([-range_ - half], mids, [range_ + half]))
    ch = DiscreteSymmetricChannel(symbols, w0, name=f"awgn({snr_db:g}dB)")
    ch.mc_kind = 2
    ch.mc_par = (sigma, range_, float(bins))
    return ch


def make_channel(param: ChannelParam) -> DiscreteSymmetricChannel:
    if param.kind == "bsc":
        return make_bsc(param.value)
    if param.kind == "bec":
        return make_bec(param.value)
    return discretize_awgn(param.value)


def parse_channel(text: str) -> ChannelParam:
    """Parse 'bsc:0.06', 'bec:0.5' or 'awgn:3' (AWGN value in dB)."""
    kind, sep, val = text.strip().lower().partition(":")
    if not sep:
        raise ValueError(f"channel spec {text!r}: expected kind:value")
    try:
        value = float(val)
    except ValueError:
        raise ValueError(f"channel spec {text!r}: bad numeric value") from None
    return ChannelParam(kind, value)


def llr_of(ch: DiscreteSymmetricChannel, y: float) -> float:
    return ch.llr_of(y)


def initial_density(ch: DiscreteSymmetricChannel, grid: LlrGrid) -> QuantizedDensity:
    return ch.initial_density(grid)


def sample(ch: DiscreteSymmetricChannel, bit: int, rng) -> tuple[float, float]:
    return ch.sample(bit, rng)


def write_channel(ch: DiscreteSymmetricChannel, path) -> None:
    """Text dump: one `symbol w0` line per output."""
    def emit(fh):
        for y, w in zip(ch.symbols, ch.w0):
            fh.write(f"{float(y)!r} {float(w)!r}\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)


def read_channel(path, name: str = "file") -> DiscreteSymmetricChannel:
    if isinstance(path, io.TextIOBase):
        lines = path.read().splitlines()
    else:
        with open(path) as fh:
            lines = fh.read().splitlines()
    symbols = []
    w0 = []
    for ln in lines:
        ln = ln.strip()
        if not ln or ln.startswith("#"):
            continue
        parts = ln.split()
        if len(parts) != 2:
            raise ValueError(f"channel file: bad line {ln!r}")
        symbols.append(float(parts[0]))
        w0.append(float(parts[1]))
    return DiscreteSymmetricChannel(symbols, w0, name=name)
