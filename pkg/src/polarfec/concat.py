"""Concatenated polar codes: short block codes down the columns.

The codeword is an M×N matrix.  Column i carries a codeword of the
length-M code picked by assignment a_i; every row then goes through the
rate-1 length-N polar transform.  Decoding alternates: all M row
decoders surface their LLR for position i, the column is ML-decoded,
and the hard decision is committed back into every row state.

Design side: the per-column error estimate is m_k * P(f_i, d_k), where
f_i is the i-th message-layer density from density evolution and P(f,w)
is the probability that a w-fold star convolution lands at or below
zero.  A dynamic program then spends the information budget over the
columns to minimize the summed estimate.
"""

from __future__ import annotations

import io
import math

import numpy as np

from . import _jit
from .density import QuantizedDensity, conv_star
from .polar import polar_transform
from .shortcodes import CodeTable, LinearBlockCode, _dyadic_weights

__all__ = [
    "ConcatSpec",
    "ColumnErrorTable",
    "DpTables",
    "CalibrationError",
    "concat_encode",
    "concat_decode",
    "p_f_w",
    "column_error_estimate",
    "column_error_table",
    "calibrate_multiplier",
    "dp_allocate",
    "concat_fer_bound",
    "write_assignment",
    "read_assignment",
    "design_report",
]


class CalibrationError(RuntimeError):
    """Raised when the Monte-Carlo sweep saw too few errors to fit."""


class ConcatSpec:
    """Concatenation layout: table, per-column assignment, polar levels.

    assignment entries are 1-based indices into the table's code list
    (index order = the table's own order, ascending K for shipped
    tables).
    """

    __slots__ = ("table", "n", "N", "M", "assignment", "_pack")

    def __init__(self, table: CodeTable, n: int, assignment):
        if n < 0:
            raise ValueError("n must be nonnegative")
        a = np.asarray(assignment, dtype=np.int64)
        if a.ndim != 1 or a.size != 1 << n:
            raise ValueError(f"assignment must have length {1 << n}")
        q = len(table)
        if a.size and (a.min() < 1 or a.max() > q):
            raise ValueError(f"assignment entries must lie in 1..{q}")
        lengths = {c.M for c in table}
        if len(lengths) != 1:
            raise ValueError("table codes must share one length")
        self.table = table
        self.n = n
        self.N = 1 << n
        self.M = lengths.pop()
        self.assignment = a
        self._pack = None

    @property
    def K(self) -> int:
        return int(sum(self.table.codes[ai - 1].K for ai in self.assignment))

    @property
    def rate(self) -> float:
        return self.K / (self.M * self.N)

    def codes(self):
        """Per-column code objects, index order."""
        return [self.table.codes[ai - 1] for ai in self.assignment]

    def trellis_pack(self) -> dict:
        if self._pack is None:
            self._pack = _build_pack(self.table, self.M)
        return self._pack

    def __repr__(self):
        return (f"ConcatSpec(M={self.M}, N={self.N}, K={self.K}, "
                f"q={len(self.table)})")


def _build_pack(table: CodeTable, M: int) -> dict:
    """Stack every code's trellis into flat arrays for the decoder kernel."""
    trs = [c.trellis() for c in table.codes]
    q = len(trs)
    nst = np.zeros((q, M + 1), dtype=np.int32)
    stoff = np.zeros((q, M + 1), dtype=np.int32)
    hs = np.zeros((q, M), dtype=np.int8)
    boff = np.zeros((q, M + 1), dtype=np.int32)
    st_base = np.zeros(q, dtype=np.int64)
    br_base = np.zeros(q, dtype=np.int64)
    nxt_parts = []
    outb_parts = []
    st_acc = 0
    br_acc = 0
    for c, tr in enumerate(trs):
        nst[c] = tr["nst"]
        stoff[c] = tr["stoff"]
        hs[c] = tr["hs"]
        boff[c] = tr["boff"][:M + 1]
        st_base[c] = st_acc
        br_base[c] = br_acc
        st_acc += tr["total_states"]
        br_acc += len(tr["nxt"])
        nxt_parts.append(tr["nxt"])
        outb_parts.append(tr["outb"])
    return {
        "nst": nst,
        "stoff": stoff,
        "hs": hs,
        "boff": boff,
        "nxt": np.concatenate(nxt_parts),
        "outb": np.concatenate(outb_parts),
        "st_base": st_base,
        "br_base": br_base,
        "dy": _dyadic_weights(M),
        "total_states": st_acc,
        "max_states": max(tr["max_states"] for tr in trs),
    }


def decode_workspace(spec: ConcatSpec) -> dict:
    """Scratch arrays sized for spec, reusable across frames."""
    pack = spec.trellis_pack()
    M, n, N = spec.M, spec.n, spec.N
    ms = pack["max_states"]
    return {
        "col_code": (spec.assignment - 1).astype(np.int64),
        "L": np.empty((M, n + 1, N)),
        "B": np.empty((M, n + 1, N, 2), dtype=np.int8),
        "colbuf": np.empty(M),
        "met": np.empty(ms),
        "sec": np.empty(ms),
        "met2": np.empty(ms),
        "sec2": np.empty(ms),
        "bp_prev": np.zeros(pack["total_states"], dtype=np.int32),
        "bp_bit": np.zeros(pack["total_states"], dtype=np.int8),
        "vhat": np.empty((M, N), dtype=np.int8),
    }


def concat_encode(info, spec: ConcatSpec) -> np.ndarray:
    """info -> M×N codeword matrix; columns first, then row transforms."""
    info = np.asarray(info, dtype=np.int8)
    if info.ndim != 1 or info.size != spec.K:
        raise ValueError(f"info length must be {spec.K}")
    if ((info != 0) & (info != 1)).any():
        raise ValueError("info bits must be 0 or 1")
    V = np.zeros((spec.M, spec.N), dtype=np.int8)
    pos = 0
    for i, code in enumerate(spec.codes()):
        if code.K:
            u = info[pos:pos + code.K]
            V[:, i] = u @ code.gen % 2
            pos += code.K
    X = np.empty_like(V)
    for r in range(spec.M):
        X[r] = polar_transform(V[r])
    return X


def concat_decode(lam, spec: ConcatSpec, workspace: dict | None = None) -> np.ndarray:
    """M×N channel LLRs -> decoded V̂ (the column codewords).

    Column order i = 0..N−1; each column's ML decision is committed as
    hard bits into all M row decoders before the next column's LLRs are
    formed.
    """
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    if lam.shape != (spec.M, spec.N):
        raise ValueError(f"LLR matrix must be {spec.M}×{spec.N}")
    ws = workspace if workspace is not None else decode_workspace(spec)
    pack = spec.trellis_pack()
    _jit.concat_decode_frame(
        lam, spec.n, ws["col_code"],
        pack["nst"], pack["stoff"], pack["hs"], pack["boff"],
        pack["nxt"], pack["outb"], pack["st_base"], pack["br_base"],
        pack["dy"],
        ws["L"], ws["B"], ws["colbuf"],
        ws["met"], ws["sec"], ws["met2"], ws["sec2"],
        ws["bp_prev"], ws["bp_bit"], ws["vhat"])
    return ws["vhat"].copy()


# ------------------------------------------------------------ estimation

def p_f_w(f: QuantizedDensity, w: int) -> float:
    """Mass of the w-fold star convolution at or below LLR zero.

    The zero cell counts fully: a tied LLR sum is scored as a decoder
    error on the analysis side.
    """
    if w < 1 or w != int(w):
        raise ValueError("w must be a positive integer")
    w = int(w)
    acc = None
    sq = f
    while True:
        if w & 1:
            acc = sq if acc is None else conv_star(acc, sq)
        w >>= 1
        if not w:
            break
        sq = conv_star(sq, sq)
    Q = acc.grid.Q
    return float(acc.mass[:Q + 1].sum())


def column_error_estimate(f: QuantizedDensity, code: LinearBlockCode) -> float:
    """m_k · P(f, d_k); the zero code contributes nothing."""
    if code.K == 0:
        return 0.0
    d, m = code.d, code.m
    if d is None or m is None:
        d, m = code.min_distance()
    return m * p_f_w(f, int(d))


class ColumnErrorTable:
    """E[i][k]: estimated decode-error probability of code k in column i."""

    __slots__ = ("E", "table")

    def __init__(self, E, table: CodeTable):
        E = np.ascontiguousarray(E, dtype=np.float64)
        if E.ndim != 2 or E.shape[1] != len(table):
            raise ValueError("E must be N×q for the given table")
        if (E < 0).any() or np.isnan(E).any():
            raise ValueError("estimates must be nonnegative")
        self.E = E
        self.table = table

    @property
    def N(self) -> int:
        return self.E.shape[0]

    def __repr__(self):
        return f"ColumnErrorTable({self.E.shape[0]}×{self.E.shape[1]})"


def column_error_table(densities, table: CodeTable) -> ColumnErrorTable:
    """Estimates for every (column density, code) pair."""
    E = np.zeros((len(densities), len(table)))
    for i, f in enumerate(densities):
        for k, code in enumerate(table.codes):
            E[i, k] = column_error_estimate(f, code)
    return ColumnErrorTable(E, table)


def calibrate_multiplier(code: LinearBlockCode, channels, grid,
                         trials: int = 2000, seed: int = 1) -> float:
    """Empirical multiplier m̂ from ML-decoding the code alone.

    Least-squares fit of log FER ≈ log m̂ + log P(f, d) over the channel
    sweep; channels yielding no errors are dropped, fewer than two
    usable points raise CalibrationError.
    """
    from .shortcodes import ml_decode

    if code.K == 0:
        raise ValueError("cannot calibrate the zero code")
    d = code.d if code.d is not None else code.min_distance()[0]
    logs = []
    rng = np.random.default_rng(seed)
    for ch in channels:
        errs = 0
        for _ in range(trials):
            lam = np.array([ch.sample(0, rng)[1] for _ in range(code.M)])
            if ml_decode(code, lam).any():
                errs += 1
        if errs == 0:
            continue
        P = p_f_w(ch.initial_density(grid), int(d))
        if P <= 0.0:
            continue
        logs.append(math.log(errs / trials) - math.log(P))
    if len(logs) < 2:
        raise CalibrationError(
            f"only {len(logs)} channel(s) produced errors; need 2")
    return float(math.exp(np.mean(logs)))


# ------------------------------------------------------------ allocation

class DpTables:
    """Forward values and argmin choices of the budget-spending DP.

    F has N+1 rows; row 0 is the base (only budget 0 reachable), row s+1
    covers columns 0..s.  A[s][t] is the 1-based code choice at column s
    for budget t, 0 where unreachable.
    """

    __slots__ = ("F", "A")

    def __init__(self, F, A):
        self.F = F
        self.A = A


def dp_allocate(E: ColumnErrorTable, K_target: int):
    """Cheapest assignment with exactly K_target information bits.

    Returns (assignment, tables); assignment is None when the budget is
    unreachable.  Ties break toward the smaller code index.
    """
    if K_target < 0:
        raise ValueError("K_target must be nonnegative")
    N = E.N
    ks = [c.K for c in E.table.codes]
    F = np.full((N + 1, K_target + 1), np.inf)
    A = np.zeros((N, K_target + 1), dtype=np.int64)
    F[0, 0] = 0.0
    for s in range(N):
        for l, kl in enumerate(ks):
            cost = E.E[s, l]
            for t in range(kl, K_target + 1):
                v = F[s, t - kl] + cost
                if v < F[s + 1, t]:
                    F[s + 1, t] = v
                    A[s, t] = l + 1
    tables = DpTables(F, A)
    if not np.isfinite(F[N, K_target]):
        return None, tables
    assignment = np.zeros(N, dtype=np.int64)
    t = K_target
    for s in range(N - 1, -1, -1):
        l = int(A[s, t])
        assignment[s] = l
        t -= ks[l - 1]
    assert t == 0
    return assignment, tables


def concat_fer_bound(E: ColumnErrorTable, assignment) -> float:
    """Union-style frame bound: sum of the assigned per-column estimates."""
    a = np.asarray(assignment, dtype=np.int64)
    if a.ndim != 1 or a.size != E.N:
        raise ValueError(f"assignment must have length {E.N}")
    if a.size and (a.min() < 1 or a.max() > len(E.table)):
        raise ValueError("assignment index out of table range")
    return float(E.E[np.arange(E.N), a - 1].sum())


# ------------------------------------------------------------ files

def write_assignment(assignment, path) -> None:
    """One 1-based code index per line."""
    a = np.asarray(assignment, dtype=np.int64)

    def emit(fh):
        for v in a:
            fh.write(f"{int(v)}\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)


def read_assignment(path, table: CodeTable | None = None) -> np.ndarray:
    if isinstance(path, io.TextIOBase):
        vals = path.read().split()
    else:
        with open(path) as fh:
            vals = fh.read().split()
    a = np.array([int(v) for v in vals], dtype=np.int64)
    if a.size == 0:
        raise ValueError("empty assignment file")
    if a.min() < 1:
        raise ValueError("assignment indices are 1-based")
    if table is not None and a.max() > len(table):
        raise ValueError("assignment index exceeds table size")
    return a


def design_report(spec: ConcatSpec, E: ColumnErrorTable,
                  K_target: int) -> str:
    """Human-readable design summary for one allocation."""
    lines = [
        f"columns N = {spec.N}, column length M = {spec.M}",
        f"K_target = {K_target}, achieved K = {spec.K}, "
        f"rate = {spec.rate:.6g}",
        "column  code_index  K  estimate",
    ]
    for i, ai in enumerate(spec.assignment):
        code = spec.table.codes[ai - 1]
        lines.append(f"{i:6d}  {int(ai):10d}  {code.K:2d}  "
                     f"{E.E[i, ai - 1]:.6e}")
    lines.append(f"total bound = {concat_fer_bound(E, spec.assignment):.6e}")
    return "\n".join(lines) + "\n"
