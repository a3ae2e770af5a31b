import numpy as np
import pytest

from ekstat.errors import (
    CacheChecksumError,
    CacheFormatError,
    CacheTruncatedError,
    ConfigurationError,
    PreconditionError,
)
from ekstat.sieve import (
    DIM,
    JointHistogram,
    SieveConfig,
    build_histogram,
    build_prime_basis,
    load_histogram,
    paper_w,
    save_histogram,
    sieve_segment,
)

from conftest import oracle_histogram


class TestPrimeBasis:
    def test_small(self):
        assert list(build_prime_basis(10).primes) == [2, 3, 5, 7]

    def test_smallest(self):
        assert list(build_prime_basis(2).primes) == [2]

    def test_classical_count(self):
        assert len(build_prime_basis(10 ** 6)) == 78498

    def test_strictly_increasing_from_two(self):
        basis = build_prime_basis(10 ** 4)
        ps = basis.primes
        assert ps[0] == 2
        assert np.all(np.diff(ps) > 0)
        assert ps[-1] <= basis.limit

    @pytest.mark.parametrize("limit", [1, 0, -5, 10 ** 9 + 1])
    def test_limit_out_of_range(self, limit):
        with pytest.raises(ConfigurationError):
            build_prime_basis(limit)


class TestSieveSegment:
    def test_12_with_w2(self):
        basis = build_prime_basis(10)
        omega, trunc = sieve_segment(12, 13, basis, 2)
        assert omega[0] == 2      # 12 = 2^2 * 3
        assert trunc[0] == 1

    def test_9_truncations(self):
        basis = build_prime_basis(10)
        omega, trunc = sieve_segment(9, 10, basis, 3)
        assert omega[0] == 1 and trunc[0] == 1
        _, trunc2 = sieve_segment(9, 10, basis, 2)
        assert trunc2[0] == 0

    def test_first_segment_against_trial_division(self, factor_table):
        basis = build_prime_basis(10)
        omega, trunc = sieve_segment(2, 100, basis, 97)
        for n in range(2, 100):
            assert omega[n - 2] == len(factor_table[n])
            assert trunc[n - 2] == len(factor_table[n])  # w covers everything

    @pytest.mark.parametrize("w", [2, 10, 316, 10 ** 5])
    def test_exhaustive_oracle(self, factor_table, w):
        basis = build_prime_basis(317)
        omega, trunc = sieve_segment(2, 10 ** 5, basis, w)
        expect_full = np.array([len(factor_table[n])
                                for n in range(2, 10 ** 5)], dtype=np.uint8)
        expect_trunc = np.array([sum(1 for p in factor_table[n] if p <= w)
                                 for n in range(2, 10 ** 5)], dtype=np.uint8)
        assert np.array_equal(omega, expect_full)
        assert np.array_equal(trunc, expect_trunc)

    def test_random_windows(self, factor_table):
        rng = np.random.RandomState(42)
        basis = build_prime_basis(317)
        for _ in range(20):
            lo = int(rng.randint(2, 10 ** 5 - 500))
            hi = lo + int(rng.randint(1, 500))
            w = int(rng.choice([2, 7, 100, 4000, 10 ** 5]))
            omega, trunc = sieve_segment(lo, hi, basis, w)
            for n in range(lo, hi):
                assert omega[n - lo] == len(factor_table[n])
                assert trunc[n - lo] == sum(1 for p in factor_table[n] if p <= w)

    def test_basis_too_small(self):
        basis = build_prime_basis(10)
        with pytest.raises(PreconditionError):
            sieve_segment(2, 1000, basis, 10)

    def test_bad_bounds(self):
        basis = build_prime_basis(100)
        with pytest.raises(PreconditionError):
            sieve_segment(1, 50, basis, 10)
        with pytest.raises(PreconditionError):
            sieve_segment(50, 50, basis, 10)


class TestBuildHistogram:
    def test_hand_enumeration_x10_w10(self, hist_cache):
        h = hist_cache(10, 10)
        assert h.counts[2][1][1] == 2     # n = 6 and n = 10
        assert h.total == 9

    def test_hand_enumeration_x10_w3(self, hist_cache):
        h = hist_cache(10, 3)
        assert h.counts[2][0][1] == 1     # n = 6: omega(5, 3) = 0
        assert h.counts[2][1][1] == 1     # n = 10: omega(9, 3) = 1

    def test_n2_lands_in_ell0_m0(self, hist_cache):
        h = hist_cache(10, 10)
        assert h.counts[1][0][0] == 1     # n = 2, omega(1) = 0

    @pytest.mark.parametrize("x,w", [(10, 10), (5000, 50), (10 ** 4, 10 ** 4)])
    def test_total_mass(self, hist_cache, x, w):
        assert hist_cache(x, w).total == x - 1

    def test_matches_oracle(self, hist_cache, factor_table):
        h = hist_cache(10 ** 4, 100)
        assert np.array_equal(h.counts, oracle_histogram(10 ** 4, 100, factor_table))

    def test_truncated_never_exceeds_full(self, hist_cache):
        h = hist_cache(10 ** 4, 100)
        ell_over_m = np.triu_indices(DIM, k=1)
        assert h.counts.transpose(0, 2, 1)[:, ell_over_m[0], ell_over_m[1]].sum() == 0

    def test_k0_empty(self, hist_cache):
        assert hist_cache(10 ** 4, 100).counts[0].sum() == 0

    def test_w_equals_x_diagonal(self, hist_cache):
        h = hist_cache(10 ** 4, 10 ** 4)
        off = h.counts.sum() - sum(int(h.counts[k][l][l])
                                   for k in range(DIM) for l in range(DIM))
        assert off == 0

    def test_omega_bounded_at_1e5(self, hist_cache):
        # 2*3*5*7*11*13 = 30030 <= 1e5 < 510510, so omega <= 6
        h = hist_cache(10 ** 5, 100)
        ks = np.flatnonzero(h.counts.sum(axis=(1, 2)))
        assert ks.max() == 6

    def test_monotone_in_w(self, hist_cache):
        small = hist_cache(5000, 10)
        large = hist_cache(5000, 1000)
        cum_small = np.cumsum(small.counts.sum(axis=(0, 2)))
        cum_large = np.cumsum(large.counts.sum(axis=(0, 2)))
        assert np.all(cum_small >= cum_large)

    def test_determinism_across_threads_and_segments(self):
        runs = [
            build_histogram(SieveConfig(x=2 * 10 ** 4, w=50,
                                        segment_len=seg, threads=t))
            for seg, t in [(1 << 10, 1), (1 << 12, 2), (1 << 22, 4)]
        ]
        for other in runs[1:]:
            assert np.array_equal(runs[0].counts, other.counts)

    @pytest.mark.parametrize("kwargs", [
        dict(x=1, w=2), dict(x=10 ** 10 + 1, w=10), dict(x=100, w=1),
        dict(x=100, w=101), dict(x=100, w=10, segment_len=100),
        dict(x=100, w=10, threads=0),
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ConfigurationError):
            build_histogram(SieveConfig(**kwargs))


class TestPersistence:
    def test_round_trip(self, hist_cache, tmp_path):
        h = hist_cache(10 ** 4, 100)
        path = tmp_path / "h.bin"
        save_histogram(h, path)
        again = load_histogram(path)
        assert again == h

    def test_corrupt_byte_fails_checksum(self, hist_cache, tmp_path):
        h = hist_cache(10, 10)
        path = tmp_path / "h.bin"
        save_histogram(h, path)
        blob = bytearray(path.read_bytes())
        blob[100] ^= 0x40
        path.write_bytes(bytes(blob))
        with pytest.raises(CacheChecksumError):
            load_histogram(path)

    def test_wrong_magic(self, hist_cache, tmp_path):
        h = hist_cache(10, 10)
        path = tmp_path / "h.bin"
        save_histogram(h, path)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"NOPE"
        path.write_bytes(bytes(blob))
        with pytest.raises(CacheFormatError):
            load_histogram(path)

    def test_wrong_version(self, hist_cache, tmp_path):
        h = hist_cache(10, 10)
        path = tmp_path / "h.bin"
        save_histogram(h, path)
        blob = bytearray(path.read_bytes())
        blob[4] = 9
        path.write_bytes(bytes(blob))
        with pytest.raises(CacheFormatError):
            load_histogram(path)

    def test_truncated(self, hist_cache, tmp_path):
        h = hist_cache(10, 10)
        path = tmp_path / "h.bin"
        save_histogram(h, path)
        path.write_bytes(path.read_bytes()[:-9])
        with pytest.raises(CacheTruncatedError):
            load_histogram(path)

    def test_trailing_garbage(self, hist_cache, tmp_path):
        h = hist_cache(10, 10)
        path = tmp_path / "h.bin"
        save_histogram(h, path)
        path.write_bytes(path.read_bytes() + b"x")
        with pytest.raises(CacheFormatError):
            load_histogram(path)

    def test_random_histogram_round_trip(self, tmp_path):
        rng = np.random.RandomState(7)
        counts = np.zeros((DIM, DIM, DIM), dtype=np.int64)
        idx = rng.randint(0, DIM, size=(200, 3))
        for k, l, m in idx:
            counts[k][l][m] += int(rng.randint(0, 10 ** 9))
        h = JointHistogram(x=123456, w=789, counts=counts)
        path = tmp_path / "r.bin"
        save_histogram(h, path)
        assert load_histogram(path) == h


class TestPaperW:
    def test_desk_scale_clamps_to_16(self):
        assert paper_w(10 ** 8) == 16
        assert paper_w(10 ** 6) == 16
        assert paper_w(10 ** 10) == 16

    def test_never_exceeds_x(self):
        assert paper_w(16) == 16

    def test_too_small(self):
        with pytest.raises(ConfigurationError):
            paper_w(15)
