"""Polar transform, frozen-set codes and successive-cancellation decoding.

The length-2^n transform is u -> u . (G2 kron-power n, then bit reversal),
G2 = [[1,0],[1,1]].  A code is the transform restricted to zeroed frozen
positions.  The SC decoder walks message bits in natural order keeping one
live LLR and one bit pair per (layer, group), O(N) state and exactly
N*log2(N) box/sum evaluations per word.
"""

from __future__ import annotations

import io

import numpy as np

from . import _jit

__all__ = [
    "PolarCodeSpec",
    "bit_reversal_perm",
    "polar_transform",
    "generator",
    "encode",
    "sc_decode",
    "ScResult",
    "ScDecoder",
    "write_frozen_set",
    "read_frozen_set",
    "write_bits",
    "read_bits",
]


def _as_bits(v, length: int | None = None) -> np.ndarray:
    a = np.asarray(v)
    if a.ndim != 1:
        raise ValueError("expected a 1-d bit vector")
    if length is not None and a.size != length:
        raise ValueError(f"expected {length} bits, got {a.size}")
    a = a.astype(np.int8)
    if ((a != 0) & (a != 1)).any():
        raise ValueError("bits must be 0 or 1")
    return a


class PolarCodeSpec:
    """Code of length N = 2^n with a frozen index set."""

    __slots__ = ("n", "N", "K", "frozen", "frozen_mask", "info_positions")

    def __init__(self, n: int, frozen):
        if n < 0:
            raise ValueError("n must be nonnegative")
        self.n = int(n)
        self.N = 1 << self.n
        fr = np.array(sorted(int(i) for i in frozen), dtype=np.int64)
        if fr.size and (fr[0] < 0 or fr[-1] >= self.N):
            raise ValueError("frozen index out of range")
        if np.unique(fr).size != fr.size:
            raise ValueError("duplicate frozen index")
        self.frozen = fr
        self.K = self.N - fr.size
        mask = np.zeros(self.N, dtype=np.int8)
        mask[fr] = 1
        self.frozen_mask = mask
        self.info_positions = np.flatnonzero(mask == 0)

    def __repr__(self):
        return f"PolarCodeSpec(n={self.n}, N={self.N}, K={self.K})"

    def __eq__(self, other):
        return (isinstance(other, PolarCodeSpec) and self.n == other.n
                and np.array_equal(self.frozen, other.frozen))

    def __hash__(self):
        return hash((self.n, self.frozen.tobytes()))


def bit_reversal_perm(n: int) -> np.ndarray:
    """Involutive permutation reversing the n-bit expansion of each index."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    perm = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        perm = np.concatenate([2 * perm, 2 * perm + 1])
    # after k doublings perm[i] reads i's bits low-to-high
    return perm


def polar_transform(u) -> np.ndarray:
    """Length-preserving transform; n in-place butterfly passes plus the
    bit-reversal gather."""
    x = _as_bits(u).copy()
    N = x.size
    if N == 0 or N & (N - 1):
        raise ValueError("length must be a power of two")
    n = N.bit_length() - 1
    h = N >> 1
    while h:
        v = x.reshape(-1, 2 * h)
        v[:, :h] ^= v[:, h:]
        h >>= 1
    return x[bit_reversal_perm(n)]


def generator(spec: PolarCodeSpec) -> np.ndarray:
    """K x N matrix whose rows are the transforms of the unfrozen unit
    vectors, increasing index order."""
    rows = np.zeros((spec.K, spec.N), dtype=np.int8)
    for r, i in enumerate(spec.info_positions):
        u = np.zeros(spec.N, dtype=np.int8)
        u[i] = 1
        rows[r] = polar_transform(u)
    return rows


def encode(info, spec: PolarCodeSpec) -> np.ndarray:
    info = _as_bits(info, spec.K)
    u = np.zeros(spec.N, dtype=np.int8)
    u[spec.info_positions] = info
    return polar_transform(u)


class ScResult:
    """SC decoding output; iterates as the pair (info, u)."""

    __slots__ = ("info", "u", "llr", "codeword", "ops")

    def __init__(self, info, u, llr, codeword, ops):
        self.info = info          # decided unfrozen bits, index order
        self.u = u                # all N decided bits
        self.llr = llr            # decision LLR seen at each bit
        self.codeword = codeword  # re-encoded estimate, transform of u
        self.ops = ops            # LLR evaluations spent

    def __iter__(self):
        return iter((self.info, self.u))


def sc_decode(lam, spec: PolarCodeSpec, tie_rng=None) -> ScResult:
    """Successive cancellation: frozen bits forced to 0, the rest decided
    by LLR sign in index order; exact zeros fall to coin flips from
    tie_rng (a fresh unseeded generator when omitted)."""
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    if lam.shape != (spec.N,):
        raise ValueError(f"expected {spec.N} channel LLRs")
    if tie_rng is None:
        tie_rng = np.random.default_rng()
    tie_key = np.uint64(tie_rng.integers(0, 2 ** 64, dtype=np.uint64))
    n = spec.n
    L = np.empty((n + 1, spec.N))
    B = np.empty((n + 1, spec.N, 2), dtype=np.int8)
    u = np.empty(spec.N, dtype=np.int8)
    llr = np.empty(spec.N)
    ops = _jit.sc_decode_full(lam, spec.frozen_mask, n, tie_key, L, B, u, llr)
    codeword = B[n, :, 0].copy()
    return ScResult(u[spec.info_positions].copy(), u, llr, codeword, int(ops))


class ScDecoder:
    """Stepwise SC decoder: ask for the next bit's LLR, then commit a value.

    The concatenated decoder drives many of these in lockstep, overriding
    decisions with column-code choices.  Bits must advance 0..N-1.
    """

    __slots__ = ("spec", "_L", "_B", "_next")

    def __init__(self, spec: PolarCodeSpec, lam):
        lam = np.ascontiguousarray(lam, dtype=np.float64)
        if lam.shape != (spec.N,):
            raise ValueError(f"expected {spec.N} channel LLRs")
        self.spec = spec
        self._L = np.empty((spec.n + 1, spec.N))
        self._B = np.empty((spec.n + 1, spec.N, 2), dtype=np.int8)
        self._next = 0
        _jit.sc_init(lam, spec.n, self._L)

    def next_llr(self) -> float:
        if self._next >= self.spec.N:
            raise ValueError("all bits already decided")
        l, _ = _jit.sc_step_llr(self.spec.n, self._L, self._B, self._next)
        return float(l)

    def commit(self, bit: int) -> None:
        if bit not in (0, 1):
            raise ValueError("bit must be 0 or 1")
        _jit.sc_step_commit(self.spec.n, self._B, self._next, np.int8(bit))
        self._next += 1

    @property
    def position(self) -> int:
        return self._next

    def codeword(self) -> np.ndarray:
        if self._next != self.spec.N:
            raise ValueError("decoding not finished")
        return self._B[self.spec.n, :, 0].copy()


def write_frozen_set(spec: PolarCodeSpec, path) -> None:
    """Line 1 `n K`, then the sorted frozen indices one per line."""
    def emit(fh):
        fh.write(f"{spec.n} {spec.K}\n")
        for i in spec.frozen:
            fh.write(f"{int(i)}\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)


def read_frozen_set(path) -> PolarCodeSpec:
    if isinstance(path, io.TextIOBase):
        tokens = path.read().split()
    else:
        with open(path) as fh:
            tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError("frozen-set file: missing header")
    n, K = int(tokens[0]), int(tokens[1])
    idx = [int(t) for t in tokens[2:]]
    spec = PolarCodeSpec(n, idx)
    if spec.K != K:
        raise ValueError(f"frozen-set file: header says K={K}, "
                         f"indices give K={spec.K}")
    return spec


def write_bits(bits, path) -> None:
    """Raw 0/1 character dump."""
    text = "".join("1" if b else "0" for b in _as_bits(bits)) + "\n"
    if isinstance(path, io.TextIOBase):
        path.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def read_bits(path) -> np.ndarray:
    if isinstance(path, io.TextIOBase):
        text = path.read()
    else:
        with open(path) as fh:
            text = fh.read()
    bits = [c for c in text if not c.isspace()]
    if any(c not in "01" for c in bits):
        raise ValueError("bit file must contain only 0/1 characters")
    return np.array([int(c) for c in bits], dtype=np.int8)
