import io
import math

import numpy as np
import pytest

from polarfec.polar import (PolarCodeSpec, ScDecoder, bit_reversal_perm,
                            encode, generator, polar_transform, read_bits,
                            read_frozen_set, sc_decode, write_bits,
                            write_frozen_set)


def reference_codeword_map(n):
    """N x N transform matrix built from scratch: Kronecker power of the
    2x2 lower-triangular kernel, columns then bit-reversed."""
    G = np.array([[1]], dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, np.array([[1, 0], [1, 1]], dtype=np.int64))
    N = 1 << n
    rev = np.array([int(format(i, f"0{n}b")[::-1], 2) if n else 0
                    for i in range(N)])
    return G[:, rev] if n else G


def sc_llr_oracle(lam, i, prefix):
    """Exact conditional LLR of bit i by summing channel likelihoods over
    all messages extending the prefix."""
    N = lam.size
    n = N.bit_length() - 1
    G = reference_codeword_map(n)
    p0 = 1.0 / (1.0 + np.exp(-lam))
    p1 = 1.0 - p0
    tails = N - i - 1
    tot = [0.0, 0.0]
    u = np.zeros(N, dtype=np.int64)
    u[:i] = prefix
    for ui in (0, 1):
        u[i] = ui
        acc = 0.0
        for t in range(1 << tails):
            u[i + 1:] = (t >> np.arange(tails)) & 1
            x = (u @ G) % 2
            acc += np.prod(np.where(x == 0, p0, p1))
        tot[ui] = acc
    return math.log(tot[0] / tot[1])


class TestTransform:
    def test_matches_reference_map(self, rng):
        for n in range(5):
            N = 1 << n
            G = reference_codeword_map(n)
            for _ in range(20):
                u = rng.integers(0, 2, N)
                assert np.array_equal(polar_transform(u), (u @ G) % 2)

    def test_involution(self, rng):
        for n in (0, 1, 3, 6):
            u = rng.integers(0, 2, 1 << n)
            assert np.array_equal(polar_transform(polar_transform(u)), u)

    def test_linearity(self, rng):
        u, v = rng.integers(0, 2, (2, 32))
        assert np.array_equal(polar_transform(u ^ v),
                              polar_transform(u) ^ polar_transform(v))

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            polar_transform([1, 0, 1])

    def test_bit_reversal_is_involution(self):
        for n in range(7):
            p = bit_reversal_perm(n)
            assert np.array_equal(p[p], np.arange(1 << n))


class TestSpecEncode:
    def test_spec_basics(self):
        spec = PolarCodeSpec(3, [0, 1, 2, 4])
        assert spec.N == 8 and spec.K == 4
        assert np.array_equal(spec.info_positions, [3, 5, 6, 7])
        with pytest.raises(ValueError):
            PolarCodeSpec(2, [0, 0, 1])
        with pytest.raises(ValueError):
            PolarCodeSpec(2, [4])

    def test_encode_embeds_info(self, rng):
        spec = PolarCodeSpec(4, sorted(rng.choice(16, 7, replace=False)))
        info = rng.integers(0, 2, spec.K)
        x = encode(info, spec)
        u = polar_transform(x)  # involution inverts
        assert np.array_equal(u[spec.info_positions], info)
        assert not u[spec.frozen].any()

    def test_generator_rows(self, rng):
        spec = PolarCodeSpec(3, [0, 2, 5])
        Gm = generator(spec)
        assert Gm.shape == (5, 8)
        info = rng.integers(0, 2, 5)
        assert np.array_equal(encode(info, spec), (info @ Gm) % 2)


class TestScDecode:
    def test_noiseless_roundtrip(self, rng):
        for n in (1, 3, 5):
            N = 1 << n
            spec = PolarCodeSpec(n, sorted(rng.choice(N, N // 2,
                                                      replace=False)))
            info = rng.integers(0, 2, spec.K)
            x = encode(info, spec)
            lam = np.where(x == 0, 9.0, -9.0)
            res = sc_decode(lam, spec)
            assert np.array_equal(res.info, info)
            assert np.array_equal(res.codeword, x)

    def test_llrs_match_marginalization_oracle(self, rng):
        # decision LLRs on the true path, every bit, all-info code
        for n in (1, 2, 3, 4):
            N = 1 << n
            spec = PolarCodeSpec(n, [])
            for _ in range(4):
                lam = rng.normal(0.0, 3.0, N)
                dec = ScDecoder(spec, lam)
                u_true = rng.integers(0, 2, N)
                for i in range(N):
                    got = dec.next_llr()
                    want = sc_llr_oracle(lam, i, u_true[:i])
                    assert got == pytest.approx(want, rel=1e-9, abs=1e-9)
                    dec.commit(int(u_true[i]))

    def test_frozen_bits_steer_decisions(self, rng):
        # a frozen bit known to be zero overrides a hostile channel
        spec = PolarCodeSpec(2, [0, 1, 2])
        lam = np.array([-4.0, -4.0, -4.0, 4.0])
        res = sc_decode(lam, spec)
        assert not res.u[spec.frozen].any()

    def test_stepwise_equals_batch(self, rng):
        spec = PolarCodeSpec(4, [0, 1, 2, 4, 8])
        lam = rng.normal(0.0, 2.0, 16)
        res = sc_decode(lam, spec)
        dec = ScDecoder(spec, lam)
        for i in range(16):
            llr = dec.next_llr()
            if i in set(spec.frozen.tolist()):
                dec.commit(0)
            else:
                dec.commit(0 if llr > 0 else 1)
        assert np.array_equal(dec.codeword(), res.codeword)

    def test_wrong_length_rejected(self):
        spec = PolarCodeSpec(2, [0])
        with pytest.raises(ValueError):
            sc_decode(np.zeros(5), spec)


class TestFileIO:
    def test_frozen_roundtrip(self, tmp_path):
        spec = PolarCodeSpec(4, [0, 1, 2, 3, 4, 8])
        p = tmp_path / "frozen.txt"
        write_frozen_set(spec, str(p))
        assert read_frozen_set(str(p)) == spec

    def test_bits_roundtrip(self, tmp_path, rng):
        bits = rng.integers(0, 2, 37)
        p = tmp_path / "bits.txt"
        write_bits(bits, str(p))
        assert np.array_equal(read_bits(str(p)), bits)

    def test_bits_reject_garbage(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0 1 2\n")
        with pytest.raises(ValueError):
            read_bits(str(p))

    def test_stringio_paths(self):
        buf = io.StringIO()
        write_bits([1, 0, 1], buf)
        buf.seek(0)
        assert np.array_equal(read_bits(buf), [1, 0, 1])
