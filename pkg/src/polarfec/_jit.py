"""Compiled hot loops (numba) shared by the density, polar, shortcodes and sim modules.

Everything here operates on plain numpy arrays so the kernels stay
allocation-free inside their loops; the Python drivers own all buffers.
Falls back to pure Python (slow but correct) when numba is unavailable.

RNG: all randomness inside kernels comes from counter-based splitmix64
streams, `rnd64(key, ctr)`.  A (key, counter) pair fully determines every
draw, which is what makes sharded Monte-Carlo runs reproducible and
mergeable.  Key derivation is documented in :mod:`polarfec.sim`.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a hard dependency, shim for safety
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap

U64 = np.uint64
_GOLDEN = U64(0x9E3779B97F4A7C15)
_MASK64 = U64(0xFFFFFFFFFFFFFFFF)
_TIE_SALT = U64(0xC2B2AE3D27D4EB4F)


# ---------------------------------------------------------------------------
# splitmix64 counter streams
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def mix64(z):
    z = U64(z)
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def rnd64(key, ctr):
    """Random uint64 number `ctr` of the stream named `key`."""
    return mix64(U64(key) + (U64(ctr) + U64(1)) * _GOLDEN)


@njit(cache=True, inline="always")
def rnd_unit(key, ctr):
    """Uniform double in [0, 1)."""
    return (rnd64(key, ctr) >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def rnd_gauss(key, ctr):
    """Standard normal via Box-Muller; consumes counters 2*ctr and 2*ctr+1."""
    c = U64(ctr) * U64(2)
    # (0,1] for the log argument
    u1 = ((rnd64(key, c) >> U64(11)) + U64(1)) * (1.0 / 9007199254740992.0)
    u2 = rnd_unit(key, c + U64(1))
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(6.283185307179586 * u2)


@njit(cache=True, inline="always")
def tie_bit(tie_key, i):
    """Per-index fair coin used only on exact decision ties."""
    return np.int8((rnd64(tie_key, i) >> U64(32)) & U64(1))


# ---------------------------------------------------------------------------
# scalar box-plus
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def box2(a, b):
    aa = abs(a)
    ab = abs(b)
    if aa > ab:
        aa, ab = ab, aa
    s = -1.0 if (a < 0.0) != (b < 0.0) else 1.0
    if aa == np.inf:
        return s * np.inf
    if ab == np.inf:
        return s * aa
    return s * (aa + np.log1p(np.exp(-(aa + ab))) - np.log1p(np.exp(-(ab - aa))))


# ---------------------------------------------------------------------------
# quantized box convolution
# ---------------------------------------------------------------------------
#
# Cell index i of a (2Q+1)-cell grid lives at array position i+Q.  The output
# cell of a pair of magnitudes (a, b), a <= b, is classified with the
# normalized correction table tn[m] = log1p(exp(-m*delta))/delta:
#
#     k = int(a + tn[a+b] - tn[b-a] + 0.5)
#
# which is the stable box-plus magnitude divided by delta, fed to the
# round-to-nearest cell rule.  Both kernels below share this classifier
# bit for bit, so the banded version differs from the exact one only by
# floating-point summation order (and by provably-classified tail pairs).

@njit(cache=True)
def conv_box_exact(f, g, Q, tn):
    """Literal all-pairs box convolution: O(Q^2), the reference route."""
    n = 2 * Q + 1
    out = np.zeros(n)
    for p in range(n):
        fv = f[p]
        if fv == 0.0:
            continue
        ai = p - Q if p >= Q else Q - p
        ineg = p < Q
        for q in range(n):
            gv = g[q]
            if gv == 0.0:
                continue
            aj = q - Q if q >= Q else Q - q
            if ai <= aj:
                lo = ai
                d = aj - ai
            else:
                lo = aj
                d = ai - aj
            k = int(lo + tn[lo + lo + d] - tn[d] + 0.5)
            if ineg != (q < Q):
                out[Q - k] += fv * gv
            else:
                out[Q + k] += fv * gv
    return out


@njit(cache=True)
def conv_box_fast(f, g, Q, tn, w):
    """Banded box convolution.

    Pairs of magnitudes closer than `w` cells are classified exactly like
    conv_box_exact; beyond `w` the output provably lands on the smaller
    magnitude's own cell (deviation < delta/4), so those pairs collapse to
    suffix-sum tail mass.  O(Q*w) arithmetic.
    """
    n = 2 * Q + 1
    out = np.zeros(n)
    sf = 0.0
    sg = 0.0
    for p in range(n):
        sf += f[p]
        sg += g[p]
    # any pair involving the zero cell lands on the zero cell
    out[Q] += f[Q] * sg + g[Q] * sf - f[Q] * g[Q]
    # suffix sums over magnitudes, sentinel at Q+1
    sfp = np.zeros(Q + 2)
    sfm = np.zeros(Q + 2)
    sgp = np.zeros(Q + 2)
    sgm = np.zeros(Q + 2)
    for a in range(Q, 0, -1):
        sfp[a] = sfp[a + 1] + f[Q + a]
        sfm[a] = sfm[a + 1] + f[Q - a]
        sgp[a] = sgp[a + 1] + g[Q + a]
        sgm[a] = sgm[a + 1] + g[Q - a]
    for a in range(1, Q + 1):
        bhi = a + w
        if bhi > Q:
            bhi = Q
        fpa = f[Q + a]
        fma = f[Q - a]
        gpa = g[Q + a]
        gma = g[Q - a]
        for b in range(a, bhi + 1):
            d = b - a
            k = int(a + tn[a + a + d] - tn[d] + 0.5)
            wsame = fpa * g[Q + b] + fma * g[Q - b]
            wopp = fpa * g[Q - b] + fma * g[Q + b]
            if b > a:
                wsame += f[Q + b] * gpa + f[Q - b] * gma
                wopp += f[Q - b] * gpa + f[Q + b] * gma
            out[Q + k] += wsame
            out[Q - k] += wopp
        t = a + w + 1
        if t <= Q:
            out[Q + a] += fpa * sgp[t] + fma * sgm[t] + gpa * sfp[t] + gma * sfm[t]
            out[Q - a] += fpa * sgm[t] + fma * sgp[t] + gpa * sfm[t] + gma * sfp[t]
    return out


# ---------------------------------------------------------------------------
# successive cancellation decoding
# ---------------------------------------------------------------------------
#
# Rolling-column state: L[k][j] holds the layer-k LLR of group j at the
# local index currently being worked, B[k][j][0/1] the committed bits of the
# group's current even/odd pair.  Layer 0 is the message end, layer n the
# channel end; L[n][:] is the received vector.  Bits must be processed in
# natural order 0..N-1: an LLR step for bit i, then a commit of bit i.

@njit(cache=True, inline="always")
def _tz(i):
    c = 0
    while not (i >> c) & 1:
        c += 1
    return c


@njit(cache=True)
def sc_init(lam, n, L):
    N = lam.shape[0]
    for j in range(N):
        L[n, j] = lam[j]


@njit(cache=True)
def sc_step_llr(n, L, B, i):
    """Decision LLR for bit i given bits 0..i-1 committed.  Returns (llr, ops)."""
    ktop = n - 1 if i == 0 else _tz(i)
    ops = 0
    for k in range(ktop, -1, -1):
        groups = 1 << k
        if (i >> k) & 1:
            for j in range(groups):
                l0 = L[k + 1, 2 * j]
                l1 = L[k + 1, 2 * j + 1]
                t = l1 - l0 if B[k, j, 0] else l1 + l0
                if np.isnan(t):
                    # contradictory certainties (possible only with forced
                    # commits, e.g. concatenated decoding on erasure channels)
                    t = 0.0
                L[k, j] = t
        else:
            for j in range(groups):
                L[k, j] = box2(L[k + 1, 2 * j], L[k + 1, 2 * j + 1])
        ops += groups
    return L[0, 0], ops


@njit(cache=True)
def sc_step_commit(n, B, i, u):
    """Commit bit i and push completed pairs toward the channel side."""
    B[0, 0, i & 1] = u
    k = 0
    while (i >> k) & 1:
        slot = (i >> (k + 1)) & 1
        for j in range(1 << k):
            be = B[k, j, 0]
            bo = B[k, j, 1]
            B[k + 1, 2 * j, slot] = be ^ bo
            B[k + 1, 2 * j + 1, slot] = bo
        k += 1


@njit(cache=True)
def sc_decode_full(lam, frozen, n, tie_key, L, B, u_out, llr_out):
    """Full SC pass.  frozen: int8[N] mask.  Returns total LLR evaluations.

    After the call B[n,:,0] holds the re-encoded codeword estimate.
    """
    N = lam.shape[0]
    sc_init(lam, n, L)
    ops = 0
    for i in range(N):
        l, o = sc_step_llr(n, L, B, i)
        ops += o
        llr_out[i] = l
        if frozen[i]:
            u = np.int8(0)
        elif l > 0.0:
            u = np.int8(0)
        elif l < 0.0:
            u = np.int8(1)
        else:
            u = tie_bit(tie_key, i)
        u_out[i] = u
        sc_step_commit(n, B, i, u)
    return ops


@njit(cache=True)
def sc_zero_frame_errs(lam, frozen, n, tie_key, L, B):
    """1 if SC decoding of `lam` flips any information bit, else 0.

    All-zero transmission is assumed, so any 1 decision on an unfrozen
    index is a frame error and decoding can stop there.
    """
    N = lam.shape[0]
    sc_init(lam, n, L)
    for i in range(N):
        l, _ = sc_step_llr(n, L, B, i)
        if frozen[i]:
            u = np.int8(0)
        elif l > 0.0:
            u = np.int8(0)
        elif l < 0.0:
            return 1
        else:
            u = tie_bit(tie_key, i)
            if u:
                return 1
        sc_step_commit(n, B, i, u)
    return 0


# ---------------------------------------------------------------------------
# channel sampling (all-zero transmission)
# ---------------------------------------------------------------------------
#
# kind 0: BSC(p), par1 = p, par2 = |llr|
# kind 1: BEC(p), par1 = p
# kind 2: discretized AWGN, par1 = sigma, par2 = ymax, par3 = nbins
#         (interior bins uniform over [-ymax, ymax], llr_tab indexed
#          tail_lo, bins..., tail_hi)
# kind 3: generic discrete channel, cum = CDF over outputs, llr_tab per output

@njit(cache=True, inline="always")
def sample_llr(kind, par1, par2, par3, cum, llr_tab, fkey, ctr):
    if kind == 0:
        return -par2 if rnd_unit(fkey, ctr) < par1 else par2
    elif kind == 1:
        return 0.0 if rnd_unit(fkey, ctr) < par1 else np.inf
    elif kind == 2:
        y = 1.0 + par1 * rnd_gauss(fkey, ctr)
        nb = int(par3)
        if y < -par2:
            return llr_tab[0]
        if y >= par2:
            return llr_tab[nb + 1]
        idx = int((y + par2) * nb / (2.0 * par2))
        if idx >= nb:
            idx = nb - 1
        return llr_tab[1 + idx]
    else:
        u = rnd_unit(fkey, ctr)
        lo = 0
        hi = cum.shape[0] - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if u < cum[mid]:
                hi = mid
            else:
                lo = mid + 1
        return llr_tab[lo]


@njit(cache=True)
def mc_polar_zero(trials, stream_key, kind, par1, par2, par3, cum, llr_tab,
                  frozen, n, L, B):
    """Frame errors over `trials` all-zero frames of a polar code."""
    N = frozen.shape[0]
    lam = np.empty(N)
    errors = 0
    for t in range(trials):
        fkey = mix64(U64(stream_key) + U64(t) * _GOLDEN)
        tkey = mix64(fkey ^ _TIE_SALT)
        for j in range(N):
            lam[j] = sample_llr(kind, par1, par2, par3, cum, llr_tab, fkey, j)
        errors += sc_zero_frame_errs(lam, frozen, n, tkey, L, B)
    return errors


# ---------------------------------------------------------------------------
# Viterbi over a packed minimal-span trellis
# ---------------------------------------------------------------------------
#
# Per-code pack (positions t = 0..M-1, boundaries 0..M):
#   nst[t]    : state count at boundary t (nst[0] = nst[M] = 1)
#   stoff[t]  : prefix offset of boundary t into state-indexed scratch
#   hs[t]     : 1 if a generator row starts at t (two input branches)
#   nxt[boff[t] + 2s + b], outb[...] : branch next-state / output bit
# Metric minimized is sum of c_t * lam[t]; ties resolved toward the
# lexicographically smallest codeword via an exact dyadic secondary
# metric sum of c_t * 2^-(t+1).

@njit(cache=True)
def viterbi_ml(lam, nst, stoff, hs, boff, nxt, outb, dy,
               met, sec, met2, sec2, bp_prev, bp_bit, cw_out):
    M = lam.shape[0]
    met[0] = 0.0
    sec[0] = 0.0
    for t in range(M):
        n_next = nst[t + 1]
        for s in range(n_next):
            met2[s] = np.inf
            sec2[s] = np.inf
        nb = 2 if hs[t] else 1
        base = boff[t]
        for s in range(nst[t]):
            m0 = met[s]
            if m0 == np.inf and sec[s] == np.inf:
                continue
            s0 = sec[s]
            for b in range(nb):
                e = base + 2 * s + b
                ns = nxt[e]
                ob = outb[e]
                if ob:
                    nm = m0 + lam[t]
                    nsc = s0 + dy[t]
                else:
                    nm = m0
                    nsc = s0
                if nm < met2[ns] or (nm == met2[ns] and nsc < sec2[ns]):
                    met2[ns] = nm
                    sec2[ns] = nsc
                    bp_prev[stoff[t + 1] + ns] = s
                    bp_bit[stoff[t + 1] + ns] = ob
        for s in range(n_next):
            met[s] = met2[s]
            sec[s] = sec2[s]
    # backtrack from the single terminal state
    s = 0
    for t in range(M - 1, -1, -1):
        cw_out[t] = bp_bit[stoff[t + 1] + s]
        s = bp_prev[stoff[t + 1] + s]
    return met[0]


# ---------------------------------------------------------------------------
# concatenated decoding
# ---------------------------------------------------------------------------

@njit(cache=True)
def concat_decode_frame(lam2d, n, col_code,
                        nst, stoff, hs, boff, nxt, outb, st_base, br_base, dy,
                        L, B, colbuf, met, sec, met2, sec2, bp_prev, bp_bit,
                        vhat):
    """One alternating row-SC / column-ML pass.

    lam2d: (M, N) channel LLRs, row-major (row = inner polar block).
    col_code: per-column index into the stacked trellis pack arrays.
    vhat: (M, N) output, the committed column codewords.
    """
    Mrows, N = lam2d.shape
    for r in range(Mrows):
        sc_init(lam2d[r], n, L[r])
    cw = np.empty(Mrows, dtype=np.int8)
    for i in range(N):
        for r in range(Mrows):
            l, _ = sc_step_llr(n, L[r], B[r], i)
            colbuf[r] = l
        c = col_code[i]
        viterbi_ml(colbuf, nst[c], stoff[c], hs[c], boff[c],
                   nxt[br_base[c]:], outb[br_base[c]:], dy,
                   met, sec, met2, sec2,
                   bp_prev[st_base[c]:], bp_bit[st_base[c]:], cw)
        for r in range(Mrows):
            vhat[r, i] = cw[r]
            sc_step_commit(n, B[r], i, cw[r])


@njit(cache=True)
def mc_concat_zero(trials, stream_key, kind, par1, par2, par3, cum, llr_tab,
                   n, col_code,
                   nst, stoff, hs, boff, nxt, outb, st_base, br_base, dy,
                   L, B, colbuf, met, sec, met2, sec2, bp_prev, bp_bit, vhat):
    Mrows = L.shape[0]
    N = 1 << n
    lam2d = np.empty((Mrows, N))
    errors = 0
    for t in range(trials):
        fkey = mix64(U64(stream_key) + U64(t) * _GOLDEN)
        for r in range(Mrows):
            for j in range(N):
                lam2d[r, j] = sample_llr(kind, par1, par2, par3, cum, llr_tab,
                                         fkey, r * N + j)
        concat_decode_frame(lam2d, n, col_code,
                            nst, stoff, hs, boff, nxt, outb, st_base, br_base,
                            dy, L, B, colbuf, met, sec, met2, sec2,
                            bp_prev, bp_bit, vhat)
        bad = 0
        for r in range(Mrows):
            for i in range(N):
                if vhat[r, i]:
                    bad = 1
                    break
            if bad:
                break
        errors += bad
    return errors


# ---------------------------------------------------------------------------
# weight enumeration (Gray-code walk over all messages)
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def popcount64(v):
    v = U64(v)
    v = v - ((v >> U64(1)) & U64(0x5555555555555555))
    v = (v & U64(0x3333333333333333)) + ((v >> U64(2)) & U64(0x3333333333333333))
    v = (v + (v >> U64(4))) & U64(0x0F0F0F0F0F0F0F0F)
    return int((v * U64(0x0101010101010101)) >> U64(56))


@njit(cache=True)
def min_weight_gray(rows):
    """(min nonzero weight, multiplicity) of the span of bit-packed rows."""
    K = rows.shape[0]
    cur = U64(0)
    best = 1 << 30
    count = 0
    for x in range(1, 1 << K):
        cur ^= rows[_tz(x)]
        w = popcount64(cur)
        if w < best:
            best = w
            count = 1
        elif w == best:
            count += 1
    return best, count


@njit(cache=True)
def weight_spectrum_gray(rows, M):
    """Full weight enumerator A_0..A_M of the span of bit-packed rows."""
    K = rows.shape[0]
    spec = np.zeros(M + 1, dtype=np.int64)
    spec[0] = 1
    cur = U64(0)
    for x in range(1, 1 << K):
        cur ^= rows[_tz(x)]
        spec[popcount64(cur)] += 1
    return spec
