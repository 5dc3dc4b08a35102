"""Short binary linear block codes with exact distance and exact ML decoding.

The concatenated scheme needs, per column, a length-32 code of prescribed
dimension together with its true minimum distance, weight-d multiplicity
and a maximum-likelihood decoder for the LLR functional sum(c_t*lam_t).
Distances come from a Gray-code walk over all messages (or the dual
spectrum plus the MacWilliams identity when the dimension is large), ML
from codebook enumeration or a Viterbi pass over the minimal-span trellis.
"""

from __future__ import annotations

import io
import math
from math import comb

import numpy as np

from . import _jit

__all__ = [
    "LinearBlockCode",
    "CodeTable",
    "UnsupportedCodeError",
    "min_distance",
    "ml_decode",
    "load_code_table",
    "write_code_table",
]

ENUM_MAX_K = 16        # codebook enumeration limit for ML
TRELLIS_MAX_CHECKS = 16  # trellis ML limit on M-K
GRAY_MAX_K = 20        # direct weight enumeration limit


class UnsupportedCodeError(ValueError):
    """No exact decoding route applies to this code's parameters."""


def _gf2_rank(rows: np.ndarray) -> int:
    basis = []
    for r in rows:
        v = int("".join(str(int(b)) for b in r), 2)
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
            basis.sort(reverse=True)
    return len(basis)


def _pack_rows(gen: np.ndarray) -> np.ndarray:
    """Rows as uint64 bit masks, bit t = column t."""
    M = gen.shape[1]
    if M > 64:
        raise ValueError("packed enumeration supports length <= 64")
    weights = (np.uint64(1) << np.arange(M, dtype=np.uint64))
    return (gen.astype(np.uint64) * weights).sum(axis=1).astype(np.uint64)


class LinearBlockCode:
    """Binary [M, K] code given by a full-rank generator matrix."""

    __slots__ = ("M", "K", "gen", "d", "m", "_trellis", "_codebook")

    def __init__(self, gen, M: int | None = None, d=None, m=None):
        gen = np.asarray(gen, dtype=np.int8)
        if gen.size == 0:
            if M is None:
                raise ValueError("zero code needs an explicit length")
            gen = gen.reshape(0, M)
        if gen.ndim != 2:
            raise ValueError("generator must be a 2-d bit matrix")
        if ((gen != 0) & (gen != 1)).any():
            raise ValueError("generator entries must be 0 or 1")
        self.M = gen.shape[1]
        self.K = gen.shape[0]
        if self.K and _gf2_rank(gen) != self.K:
            raise ValueError(f"generator rank below K={self.K}")
        self.gen = gen.copy()
        self.d = d
        self.m = m
        self._trellis = None
        self._codebook = None

    def __repr__(self):
        return f"LinearBlockCode(M={self.M}, K={self.K}, d={self.d})"

    # -- distance ----------------------------------------------------------

    def min_distance(self) -> tuple[float, int]:
        """Exact (d, multiplicity).  The zero code reports (inf, 0)."""
        if self.K == 0:
            return math.inf, 0
        if self.K <= GRAY_MAX_K:
            d, m = _jit.min_weight_gray(_pack_rows(self.gen))
            return int(d), int(m)
        spec = self.weight_spectrum()
        for w in range(1, self.M + 1):
            if spec[w]:
                return w, int(spec[w])
        raise AssertionError("nonzero code with empty spectrum")

    def weight_spectrum(self) -> np.ndarray:
        """Full weight enumerator; via the dual code and MacWilliams when
        direct enumeration is too large."""
        if self.K <= GRAY_MAX_K:
            if self.K == 0:
                spec = np.zeros(self.M + 1, dtype=np.int64)
                spec[0] = 1
                return spec
            return np.asarray(
                _jit.weight_spectrum_gray(_pack_rows(self.gen), self.M))
        dual = self.dual_generator()
        if dual.shape[0] > GRAY_MAX_K:
            raise UnsupportedCodeError(
                f"[{self.M},{self.K}]: both K and M-K exceed the "
                f"enumeration limit {GRAY_MAX_K}")
        dual_spec = LinearBlockCode(dual, M=self.M).weight_spectrum()
        return _macwilliams(dual_spec, self.M, self.M - self.K)

    def dual_generator(self) -> np.ndarray:
        """Basis of the null space of gen over GF(2)."""
        # eliminate on a copy, track pivot columns
        a = self.gen.copy()
        M = self.M
        pivots = []
        r = 0
        for col in range(M):
            sel = None
            for i in range(r, a.shape[0]):
                if a[i, col]:
                    sel = i
                    break
            if sel is None:
                continue
            if sel != r:
                a[[r, sel]] = a[[sel, r]]
            for i in range(a.shape[0]):
                if i != r and a[i, col]:
                    a[i] ^= a[r]
            pivots.append(col)
            r += 1
        free = [c for c in range(M) if c not in pivots]
        rows = np.zeros((len(free), M), dtype=np.int8)
        for j, fc in enumerate(free):
            rows[j, fc] = 1
            for ri, pc in enumerate(pivots):
                rows[j, pc] = a[ri, fc]
        return rows

    # -- decoding ----------------------------------------------------------

    def codebook(self) -> np.ndarray:
        """All 2^K codewords (enumeration route only)."""
        if self.K > ENUM_MAX_K:
            raise UnsupportedCodeError(f"codebook of 2^{self.K} words refused")
        if self._codebook is None:
            msgs = ((np.arange(1 << self.K)[:, None] >> np.arange(self.K)[None, :]) & 1)
            self._codebook = (msgs.astype(np.uint8) @ self.gen.astype(np.uint8) % 2).astype(np.int8)
        return self._codebook

    def trellis(self) -> dict:
        """Minimal-span trellis pack (built once, shared read-only)."""
        if self.M - self.K > TRELLIS_MAX_CHECKS and self.K > 24:
            raise UnsupportedCodeError(
                f"[{self.M},{self.K}]: trellis would be too wide")
        if self._trellis is None:
            self._trellis = build_trellis(self.gen, self.M)
        return self._trellis


def _macwilliams(dual_spec: np.ndarray, M: int, dual_dim: int) -> np.ndarray:
    """Primal weight enumerator from the dual's, exact integer arithmetic."""
    out = np.zeros(M + 1, dtype=np.int64)
    scale = 1 << dual_dim
    for w in range(M + 1):
        acc = 0
        for j in range(M + 1):
            aj = int(dual_spec[j])
            if aj == 0:
                continue
            kw = sum((-1) ** s * comb(j, s) * comb(M - j, w - s)
                     for s in range(0, min(j, w) + 1))
            acc += aj * kw
        q, r = divmod(acc, scale)
        if r:
            raise AssertionError("MacWilliams sum not divisible; bad dual spectrum")
        out[w] = q
    return out


def _minimal_span_form(gen: np.ndarray) -> np.ndarray:
    """Row-equivalent generator with all row starts and all row ends
    distinct (the minimal-span property)."""
    a = gen.copy()
    K, M = a.shape
    # reduced row echelon: starts become the distinct pivot columns
    r = 0
    for col in range(M):
        sel = None
        for i in range(r, K):
            if a[i, col]:
                sel = i
                break
        if sel is None:
            continue
        if sel != r:
            a[[r, sel]] = a[[sel, r]]
        for i in range(K):
            if i != r and a[i, col]:
                a[i] ^= a[r]
        r += 1
    if r != K:
        raise ValueError("generator rank below K")
    # make ends distinct: fold the later-starting row into the earlier one
    def end(row):
        return int(np.flatnonzero(row)[-1])
    changed = True
    while changed:
        changed = False
        ends = {}
        for i in range(K):
            e = end(a[i])
            if e in ends:
                j = ends[e]
                first, second = (j, i) if _start(a[j]) < _start(a[i]) else (i, j)
                a[first] ^= a[second]
                changed = True
                break
            ends[e] = i
    return a


def _start(row) -> int:
    return int(np.flatnonzero(row)[0])


def build_trellis(gen: np.ndarray, M: int) -> dict:
    """Branch/state arrays for the Viterbi kernel.

    States at boundary t are the bit assignments of generator rows whose
    span straddles t; a row starting at t contributes the position's only
    free input, a row ending at t drops out of the next boundary.
    """
    K = gen.shape[0]
    if K:
        msf = _minimal_span_form(gen)
        starts = [_start(r) for r in msf]
        ends = [int(np.flatnonzero(r)[-1]) for r in msf]
    else:
        msf = gen.reshape(0, M)
        starts, ends = [], []
    live = []
    for t in range(M + 1):
        live.append([r for r in range(K) if starts[r] < t <= ends[r]])
    starter = [-1] * M
    for r in range(K):
        starter[starts[r]] = r
    nst = np.array([1 << len(lv) for lv in live], dtype=np.int32)
    stoff = np.zeros(M + 2, dtype=np.int32)
    np.cumsum(nst, out=stoff[1:])
    boff = np.zeros(M + 1, dtype=np.int32)
    np.cumsum(2 * nst[:-1], out=boff[1:])
    hs = np.array([1 if starter[t] >= 0 else 0 for t in range(M)], dtype=np.int8)
    nxt = np.zeros(boff[M], dtype=np.int32)
    outb = np.zeros(boff[M], dtype=np.int8)
    for t in range(M):
        cur, nex = live[t], live[t + 1]
        nex_pos = {r: i for i, r in enumerate(nex)}
        st = starter[t]
        for s in range(nst[t]):
            bits = {r: (s >> i) & 1 for i, r in enumerate(cur)}
            for b in range(2 if st >= 0 else 1):
                if st >= 0:
                    bits[st] = b
                out = 0
                ns = 0
                for r, v in bits.items():
                    if v and msf[r, t]:
                        out ^= 1
                for r, i in nex_pos.items():
                    if bits[r]:
                        ns |= 1 << i
                e = boff[t] + 2 * s + b
                nxt[e] = ns
                outb[e] = out
    return {
        "nst": nst,
        "stoff": stoff[:M + 1].copy(),
        "hs": hs,
        "boff": boff,
        "nxt": nxt,
        "outb": outb,
        "total_states": int(stoff[M + 1]),
        "max_states": int(nst.max()),
    }


def _dyadic_weights(M: int) -> np.ndarray:
    return 0.5 ** (np.arange(M) + 1)


def min_distance(code: LinearBlockCode) -> tuple[float, int]:
    return code.min_distance()


def ml_decode(code: LinearBlockCode, lam, method: str | None = None) -> np.ndarray:
    """Exact ML codeword minimizing sum(c_t * lam_t).

    Ties break toward the lexicographically smallest codeword.  Route:
    trellis Viterbi when M-K <= 16, else codebook enumeration when
    K <= 16, else UnsupportedCodeError.
    """
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    if lam.shape != (code.M,):
        raise ValueError(f"expected {code.M} LLRs")
    if code.K == 0:
        return np.zeros(code.M, dtype=np.int8)
    if method is None:
        if code.M - code.K <= TRELLIS_MAX_CHECKS:
            method = "trellis"
        elif code.K <= ENUM_MAX_K:
            method = "enum"
        else:
            raise UnsupportedCodeError(
                f"[{code.M},{code.K}]: neither K <= {ENUM_MAX_K} nor "
                f"M-K <= {TRELLIS_MAX_CHECKS}")
    if method == "enum":
        cb = code.codebook()
        phi = cb @ lam
        best = phi.min()
        cand = np.flatnonzero(phi == best)
        if cand.size > 1:
            # lexicographic order: column 0 most significant
            keys = (cb[cand].astype(np.uint64)
                    * (np.uint64(1) << np.arange(code.M - 1, -1, -1, dtype=np.uint64))).sum(axis=1)
            cand = cand[[int(np.argmin(keys))]]
        return cb[int(cand[0])].copy()
    if method != "trellis":
        raise ValueError("method must be 'enum' or 'trellis'")
    tr = code.trellis()
    ms = tr["max_states"]
    met = np.empty(ms)
    sec = np.empty(ms)
    met2 = np.empty(ms)
    sec2 = np.empty(ms)
    bp_prev = np.zeros(tr["total_states"], dtype=np.int32)
    bp_bit = np.zeros(tr["total_states"], dtype=np.int8)
    cw = np.empty(code.M, dtype=np.int8)
    _jit.viterbi_ml(lam, tr["nst"], tr["stoff"], tr["hs"], tr["boff"],
                    tr["nxt"], tr["outb"], _dyadic_weights(code.M),
                    met, sec, met2, sec2, bp_prev, bp_bit, cw)
    return cw


class CodeTable:
    """The shipped family of length-32 codes, one per dimension entry."""

    def __init__(self, codes):
        self.codes = list(codes)
        self.by_K = {c.K: c for c in self.codes}
        if len(self.by_K) != len(self.codes):
            raise ValueError("duplicate dimensions in code table")

    def __len__(self):
        return len(self.codes)

    def __iter__(self):
        return iter(self.codes)

    def entry(self, K: int) -> LinearBlockCode:
        try:
            return self.by_K[K]
        except KeyError:
            raise KeyError(f"no table entry with K={K}") from None

    def dimensions(self) -> list[int]:
        return sorted(self.by_K)


def _format_d(d) -> str:
    return "inf" if math.isinf(d) else str(int(d))


def write_code_table(table: CodeTable, path) -> None:
    """Per code: header `K d m`, then K generator rows of 0/1 characters."""
    def emit(fh):
        for c in sorted(table.codes, key=lambda c: c.K):
            fh.write(f"{c.K} {_format_d(c.d)} {c.m}\n")
            for row in c.gen:
                fh.write("".join(str(int(b)) for b in row) + "\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)


def load_code_table(source=None, length: int | None = None,
                    verify: bool = True) -> CodeTable:
    """Read and fully re-verify a code table.

    Every entry's declared distance and multiplicity is recomputed
    exactly; any mismatch, rank defect or malformed row fails loudly.
    `source` defaults to the packaged table; the block length is taken
    from the file's generator rows unless given explicitly.
    """
    if source is None:
        from importlib.resources import files
        text = files("polarfec").joinpath("data/codes32.txt").read_text()
    elif isinstance(source, io.TextIOBase):
        text = source.read()
    else:
        with open(source) as fh:
            text = fh.read()
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    entries = []
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if len(parts) != 3:
            raise ValueError(f"code table: bad header line {lines[i]!r}")
        K = int(parts[0])
        d = math.inf if parts[1] == "inf" else int(parts[1])
        m = int(parts[2])
        i += 1
        if i + K > len(lines):
            raise ValueError(f"code table: truncated entry for K={K}")
        entries.append((K, d, m, lines[i:i + K]))
        i += K
    if length is None:
        length = next((len(r[0]) for _, _, _, r in entries if r), None)
        if length is None:
            raise ValueError("code table: only zero-K entries, "
                             "block length cannot be inferred")
    codes = []
    for K, d, m, row_lines in entries:
        for ln in row_lines:
            if len(ln) != length or set(ln) - {"0", "1"}:
                raise ValueError(f"code table: bad generator row for K={K}")
        gen = np.array([[int(c) for c in ln] for ln in row_lines],
                       dtype=np.int8).reshape(K, length)
        code = LinearBlockCode(gen, M=length, d=d, m=m)
        if verify:
            dc, mc = code.min_distance()
            if dc != d or mc != m:
                raise ValueError(
                    f"code table: [{length},{K}] declares (d={d}, m={m}) "
                    f"but has (d={dc}, m={mc})")
        codes.append(code)
    return CodeTable(codes)
