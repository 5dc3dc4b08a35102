"""Monte-Carlo frame-error-rate engine.

Trials are split over deterministic shards; each shard draws its noise
from a counter-based stream keyed by (seed, shard), so results are
reproducible for a fixed (seed, shards) pair and shards can run in any
order.  Symmetric decoders are exercised on the all-zero codeword by
default; a flag switches to fully random messages for validation.
"""

from __future__ import annotations

import io
import math

import numpy as np

from . import _jit
from .channels import ChannelParam, DiscreteSymmetricChannel, make_channel
from .concat import (ConcatSpec, column_error_table, concat_decode,
                     concat_encode, concat_fer_bound, decode_workspace)
from .construct import analyze, de_bit_densities
from .density import LlrGrid
from .polar import PolarCodeSpec, encode as polar_encode, sc_decode
from .shortcodes import LinearBlockCode, ml_decode

__all__ = [
    "McResult",
    "PolarCodec",
    "ConcatCodec",
    "ShortCodeCodec",
    "run_mc",
    "sweep",
    "write_sweep_csv",
]

_STREAM_SALT = np.uint64(0x9E2FD4B17C33A05B)


class McResult:
    """Outcome of one Monte-Carlo run."""

    __slots__ = ("trials", "errors", "fer", "ci_radius", "seed")

    def __init__(self, trials: int, errors: int, seed: int):
        if trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= errors <= trials:
            raise ValueError("errors must lie in [0, trials]")
        self.trials = trials
        self.errors = errors
        self.fer = errors / trials
        if trials > 1:
            var = trials / (trials - 1) * self.fer * (1.0 - self.fer)
        else:
            var = 0.0
        self.ci_radius = 1.96 * math.sqrt(var / trials)
        self.seed = seed

    def __repr__(self):
        return (f"McResult(trials={self.trials}, errors={self.errors}, "
                f"fer={self.fer:.3e}, ci={self.ci_radius:.2e})")


def _shard_key(seed: int, shard: int) -> np.uint64:
    base = _jit.mix64(np.uint64(seed % (1 << 64)) ^ _STREAM_SALT)
    step = (int(base) + shard * int(_jit._GOLDEN)) % (1 << 64)
    return _jit.mix64(np.uint64(step))


def _shard_sizes(trials: int, shards: int) -> list[int]:
    base, extra = divmod(trials, shards)
    return [base + (j < extra) for j in range(shards)]


class PolarCodec:
    """Plain polar code under SC decoding."""

    symmetric = True

    def __init__(self, spec: PolarCodeSpec):
        self.spec = spec
        mask = np.zeros(spec.N, dtype=np.int8)
        mask[spec.frozen] = 1
        self._frozen_mask = mask
        self._L = np.empty((spec.n + 1, spec.N))
        self._B = np.empty((spec.n + 1, spec.N, 2), dtype=np.int8)

    def mc_zero(self, trials: int, stream_key,
                channel: DiscreteSymmetricChannel) -> int:
        kind, p1, p2, p3, cum, llr_tab = channel.mc_tables()
        return int(_jit.mc_polar_zero(
            trials, np.uint64(stream_key), kind, p1, p2, p3, cum, llr_tab,
            self._frozen_mask, self.spec.n, self._L, self._B))

    def mc_random(self, trials: int, channel: DiscreteSymmetricChannel,
                  rng) -> int:
        errors = 0
        for _ in range(trials):
            info = rng.integers(0, 2, self.spec.K).astype(np.int8)
            x = polar_encode(info, self.spec)
            lam = np.array([channel.sample(int(b), rng)[1] for b in x])
            res = sc_decode(lam, self.spec, tie_rng=rng)
            errors += int((res.info != info).any())
        return errors

    def de_bound(self, channel: DiscreteSymmetricChannel, grid: LlrGrid,
                 box_mode: str = "fast") -> float:
        return analyze(self.spec, channel, grid, box_mode)


class ConcatCodec:
    """Concatenated polar code under the alternating SC/ML decoder."""

    symmetric = True

    def __init__(self, spec: ConcatSpec):
        self.spec = spec
        self._ws = decode_workspace(spec)

    def mc_zero(self, trials: int, stream_key,
                channel: DiscreteSymmetricChannel) -> int:
        kind, p1, p2, p3, cum, llr_tab = channel.mc_tables()
        pack = self.spec.trellis_pack()
        ws = self._ws
        return int(_jit.mc_concat_zero(
            trials, np.uint64(stream_key), kind, p1, p2, p3, cum, llr_tab,
            self.spec.n, ws["col_code"],
            pack["nst"], pack["stoff"], pack["hs"], pack["boff"],
            pack["nxt"], pack["outb"], pack["st_base"], pack["br_base"],
            pack["dy"],
            ws["L"], ws["B"], ws["colbuf"],
            ws["met"], ws["sec"], ws["met2"], ws["sec2"],
            ws["bp_prev"], ws["bp_bit"], ws["vhat"]))

    def mc_random(self, trials: int, channel: DiscreteSymmetricChannel,
                  rng) -> int:
        from .polar import polar_transform
        errors = 0
        for _ in range(trials):
            info = rng.integers(0, 2, self.spec.K).astype(np.int8)
            X = concat_encode(info, self.spec)
            lam = np.empty(X.shape)
            for r in range(X.shape[0]):
                for i in range(X.shape[1]):
                    lam[r, i] = channel.sample(int(X[r, i]), rng)[1]
            vhat = concat_decode(lam, self.spec, self._ws)
            V = np.array([polar_transform(row) for row in X])
            errors += int((vhat != V).any())
        return errors

    def de_bound(self, channel: DiscreteSymmetricChannel, grid: LlrGrid,
                 box_mode: str = "fast") -> float:
        dens = de_bit_densities(channel.initial_density(grid), self.spec.n,
                                box_mode)
        E = column_error_table(dens, self.spec.table)
        return concat_fer_bound(E, self.spec.assignment)


class ShortCodeCodec:
    """A length-32-style block code alone, under exact ML decoding."""

    symmetric = True

    def __init__(self, code: LinearBlockCode):
        if code.K == 0:
            raise ValueError("zero code has no information to err on")
        self.code = code

    def mc_zero(self, trials: int, stream_key,
                channel: DiscreteSymmetricChannel) -> int:
        rng = np.random.default_rng(int(stream_key))
        errors = 0
        for _ in range(trials):
            lam = np.array([channel.sample(0, rng)[1]
                            for _ in range(self.code.M)])
            errors += int(ml_decode(self.code, lam).any())
        return errors

    def mc_random(self, trials: int, channel: DiscreteSymmetricChannel,
                  rng) -> int:
        errors = 0
        for _ in range(trials):
            info = rng.integers(0, 2, self.code.K).astype(np.int8)
            cw = info @ self.code.gen % 2
            lam = np.array([channel.sample(int(b), rng)[1] for b in cw])
            errors += int((ml_decode(self.code, lam) != cw).any())
        return errors

    def de_bound(self, channel: DiscreteSymmetricChannel, grid: LlrGrid,
                 box_mode: str = "fast") -> float:
        from .concat import column_error_estimate
        return column_error_estimate(channel.initial_density(grid), self.code)


def run_mc(codec, channel: DiscreteSymmetricChannel, trials: int,
           seed: int, shards: int = 1, force_random: bool = False) -> McResult:
    """Count frame errors over `trials` noisy frames.

    The all-zero word is transmitted when the codec declares symmetry
    and force_random is off.  Shard j of k draws from an independent
    stream keyed by (seed, j); the total is the sum over shards, so the
    result is a pure function of (seed, shards, trials).
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if shards < 1:
        raise ValueError("shards must be >= 1")
    errors = 0
    for j, tj in enumerate(_shard_sizes(trials, shards)):
        if tj == 0:
            continue
        if force_random or not codec.symmetric:
            rng = np.random.default_rng([seed, j, 0x51])
            errors += codec.mc_random(tj, channel, rng)
        else:
            errors += codec.mc_zero(tj, _shard_key(seed, j), channel)
    return McResult(trials, errors, seed)


def sweep(codec, kind: str, values, trials: int, seed: int, grid: LlrGrid,
          shards: int = 1, box_mode: str = "fast",
          force_random: bool = False):
    """One MC run plus the analytical bound per channel parameter."""
    out = []
    for v in values:
        channel = make_channel(ChannelParam(kind, float(v)))
        res = run_mc(codec, channel, trials, seed, shards, force_random)
        bound = codec.de_bound(channel, grid, box_mode)
        out.append((float(v), res, bound))
    return out


def write_sweep_csv(rows, path) -> None:
    """Columns: param, trials, errors, fer, ci_radius, de_bound."""
    def emit(fh):
        fh.write("param,trials,errors,fer,ci_radius,de_bound\n")
        for v, res, bound in rows:
            fh.write(f"{v:g},{res.trials},{res.errors},{res.fer:.6e},"
                     f"{res.ci_radius:.6e},{bound:.6e}\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)
