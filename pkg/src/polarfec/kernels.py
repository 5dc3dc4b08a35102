"""Polarization kernels beyond the 2x2 base case.

Any invertible binary l x l matrix can polarize; single decoding steps for
an arbitrary kernel are evaluated by brute-force log-sum-exp over the 2^l
codeword completions.  The 3x3 kernel additionally gets closed-form LLR
steps and the matching one-level density evolution, which the exhaustive
route cross-checks.
"""

from __future__ import annotations

import io

import numpy as np
from scipy.special import logsumexp

from .density import QuantizedDensity, conv_box, conv_star
from .llr import boxplus

__all__ = [
    "Kernel",
    "G2",
    "G3",
    "kernel_llr_exhaustive",
    "g3_llr_step",
    "g3_density_step",
    "write_kernel",
    "read_kernel",
]

MAX_EXHAUSTIVE_SIZE = 8


def _gf2_inverse(G: np.ndarray) -> np.ndarray:
    l = G.shape[0]
    a = np.concatenate([G.astype(np.int8) & 1, np.eye(l, dtype=np.int8)], axis=1)
    for col in range(l):
        piv = None
        for r in range(col, l):
            if a[r, col]:
                piv = r
                break
        if piv is None:
            raise ValueError("kernel matrix is singular over GF(2)")
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
        for r in range(l):
            if r != col and a[r, col]:
                a[r] ^= a[col]
    return a[:, l:].copy()


class Kernel:
    """Invertible binary matrix with its GF(2) inverse precomputed."""

    __slots__ = ("l", "G", "Ginv")

    def __init__(self, G):
        G = np.asarray(G, dtype=np.int8)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or G.shape[0] < 1:
            raise ValueError("kernel must be a square matrix")
        if ((G != 0) & (G != 1)).any():
            raise ValueError("kernel entries must be 0 or 1")
        self.l = G.shape[0]
        self.G = G.copy()
        self.Ginv = _gf2_inverse(G)
        assert ((self.G @ self.Ginv) % 2 == np.eye(self.l, dtype=np.int8)).all()

    def __repr__(self):
        return f"Kernel(l={self.l})"


G2 = Kernel([[1, 0], [1, 1]])
G3 = Kernel([[1, 0, 0], [1, 1, 0], [1, 0, 1]])


def kernel_llr_exhaustive(kernel: Kernel, m: int, prior, chan_llrs) -> float:
    """Decision LLR of input bit m given bits 0..m-1, brute force.

    Sums channel likelihoods over the codewords x whose message x.Ginv
    starts with the known prefix, split by the value of bit m; the two
    sums have equal cardinality 2^(l-m-1) for invertible kernels, so the
    uniform prior cancels in the ratio.
    """
    l = kernel.l
    if l > MAX_EXHAUSTIVE_SIZE:
        raise ValueError(f"exhaustive evaluation capped at l <= {MAX_EXHAUSTIVE_SIZE}")
    if not 0 <= m < l:
        raise ValueError(f"bit index {m} out of range for l={l}")
    prior = np.asarray(prior, dtype=np.int8)
    if prior.shape != (m,):
        raise ValueError(f"expected {m} prior bits")
    lam = np.asarray(chan_llrs, dtype=np.float64)
    if lam.shape != (l,):
        raise ValueError(f"expected {l} channel LLRs")
    # all x in GF(2)^l and their messages u = x . Ginv
    x = ((np.arange(1 << l)[:, None] >> np.arange(l)[None, :]) & 1).astype(np.int8)
    u = (x @ kernel.Ginv) % 2
    keep = (u[:, :m] == prior).all(axis=1)
    # log W(y_t|x_t) up to a constant common to all x: (1-2*x_t)*lam_t/2
    with np.errstate(invalid="ignore"):
        logw = ((1 - 2 * x) * (lam / 2.0)).sum(axis=1)
    lse0 = logsumexp(logw[keep & (u[:, m] == 0)])
    lse1 = logsumexp(logw[keep & (u[:, m] == 1)])
    return float(lse0 - lse1)


def g3_llr_step(m: int, prior, chan_llrs) -> float:
    """Closed-form single step for the 3x3 kernel, bit m of {0,1,2}."""
    l0, l1, l2 = (float(v) for v in chan_llrs)
    if m == 0:
        return boxplus(boxplus(l0, l1), l2)
    if m == 1:
        (u0,) = (int(b) for b in prior)
        s = -1.0 if u0 else 1.0
        return l1 + s * boxplus(l0, l2)
    if m == 2:
        u0, u1 = (int(b) for b in prior)
        s = -1.0 if (u0 ^ u1) else 1.0
        return l2 + s * l0
    raise ValueError("bit index must be 0, 1 or 2")


def g3_density_step(f: QuantizedDensity):
    """One level of density evolution under the 3x3 kernel."""
    bb = conv_box(f, f)
    f0 = conv_box(bb, f)
    f1 = conv_star(f, bb)
    f2 = conv_star(f, f)
    return f0, f1, f2


def write_kernel(kernel: Kernel, path) -> None:
    """Text dump: l, then l generator rows as 0/1 characters."""
    def emit(fh):
        fh.write(f"{kernel.l}\n")
        for row in kernel.G:
            fh.write("".join(str(int(b)) for b in row) + "\n")
    if isinstance(path, io.TextIOBase):
        emit(path)
    else:
        with open(path, "w") as fh:
            emit(fh)


def read_kernel(path) -> Kernel:
    if isinstance(path, io.TextIOBase):
        tokens = path.read().split()
    else:
        with open(path) as fh:
            tokens = fh.read().split()
    if not tokens:
        raise ValueError("kernel file is empty")
    l = int(tokens[0])
    rows = tokens[1:]
    if len(rows) != l or any(len(r) != l for r in rows):
        raise ValueError(f"kernel file: expected {l} rows of {l} bits")
    G = np.array([[int(c) for c in r] for r in rows], dtype=np.int8)
    return Kernel(G)
