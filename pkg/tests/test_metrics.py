import numpy as np
import pytest

from csirecip.errors import (
    ConstantPooledRangeError,
    DegenerateSeriesError,
    LengthMismatchError,
    SeriesTooShortError,
)
from csirecip.metrics import (
    DivergenceConfig,
    ber,
    jeffrey_divergence,
    pearson,
    wasserstein_1d,
    xcorr_lag,
)

# --- independent oracles -------------------------------------------------

def pearson_oracle(x, y):
    """Two-pass covariance definition, plain Python accumulation."""
    n = len(x)
    mx = sum(x) / n
    my = sum(y) / n
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return cov / (vx ** 0.5 * vy ** 0.5)


def jeffrey_oracle(x, y, bins, eps):
    """Explicit sum P log(P/Q) over shared bins."""
    lo = min(np.min(x), np.min(y))
    hi = max(np.max(x), np.max(y))
    edges = np.linspace(lo, hi, bins + 1)
    p, _ = np.histogram(x, bins=edges)
    q, _ = np.histogram(y, bins=edges)
    p = (p + eps) / (p.sum() + bins * eps)
    q = (q + eps) / (q.sum() + bins * eps)
    kl1 = sum(pi * np.log(pi / qi) for pi, qi in zip(p, q))
    kl2 = sum(qi * np.log(qi / pi) for pi, qi in zip(p, q))
    return (kl1 + kl2) / 2


def wasserstein_oracle(x, y):
    """CDF-difference area on the merged support."""
    xs = np.sort(x)
    ys = np.sort(y)
    pts = np.sort(np.concatenate([xs, ys]))
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        fx = np.searchsorted(xs, lo, side="right") / len(xs)
        fy = np.searchsorted(ys, lo, side="right") / len(ys)
        total += abs(fx - fy) * (hi - lo)
    return total


# --- pearson --------------------------------------------------------------

class TestPearson:
    def test_exact_linear(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_negated(self):
        assert pearson([1, 2, 3], [-1, -2, -3]) == pytest.approx(-1.0)

    def test_oracle_500(self):
        rng = np.random.default_rng(42)
        x = rng.normal(size=500)
        y = 0.3 * x + rng.normal(size=500)
        assert pearson(x, y) == pytest.approx(pearson_oracle(list(x), list(y)),
                                              abs=1e-12)

    def test_affine_invariance(self):
        rng = np.random.default_rng(1)
        for seed in range(10):
            x = np.random.default_rng(seed).normal(size=50)
            a = rng.uniform(0.1, 5)
            b = rng.uniform(-10, 10)
            assert pearson(x, a * x + b) == pytest.approx(1.0, abs=1e-9)
            assert pearson(x, -a * x + b) == pytest.approx(-1.0, abs=1e-9)

    def test_errors(self):
        with pytest.raises(DegenerateSeriesError):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(LengthMismatchError):
            pearson([1, 2], [1, 2, 3])


# --- jeffrey --------------------------------------------------------------

class TestJeffrey:
    def test_identical_is_zero(self):
        x = np.random.default_rng(0).normal(size=500)
        assert jeffrey_divergence(x, x) == pytest.approx(0.0, abs=1e-12)

    def test_symmetric(self):
        rng = np.random.default_rng(1)
        x = rng.normal(0, 1, size=400)
        y = rng.normal(1, 1, size=400)
        assert jeffrey_divergence(x, y) == pytest.approx(jeffrey_divergence(y, x))

    def test_gaussian_oracle(self):
        rng = np.random.default_rng(2)
        x = rng.normal(0, 1, size=10_000)
        y = rng.normal(1, 1, size=10_000)
        cfg = DivergenceConfig(bins=32, epsilon=1e-9)
        got = jeffrey_divergence(x, y, cfg)
        want = jeffrey_oracle(x, y, 32, 1e-9)
        assert got == pytest.approx(want, abs=1e-9)
        assert got > 0

    def test_nonnegative_random(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=100)
            y = rng.normal(rng.uniform(-2, 2), rng.uniform(0.5, 2), size=100)
            assert jeffrey_divergence(x, y) >= 0

    def test_constant_pooled(self):
        with pytest.raises(ConstantPooledRangeError):
            jeffrey_divergence(np.ones(64), np.ones(64))


# --- wasserstein ----------------------------------------------------------

class TestWasserstein:
    def test_identical(self):
        x = np.random.default_rng(0).normal(size=100)
        assert wasserstein_1d(x, x) == 0.0

    def test_translation(self):
        rng = np.random.default_rng(1)
        for seed in range(10):
            x = np.random.default_rng(seed).normal(size=77)
            c = rng.uniform(-5, 5)
            assert wasserstein_1d(x, x + c) == pytest.approx(abs(c), abs=1e-9)

    def test_unequal_lengths_oracle(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=100)
        y = rng.normal(0.5, 1.3, size=73)
        assert wasserstein_1d(x, y) == pytest.approx(wasserstein_oracle(x, y),
                                                     abs=1e-9)

    def test_scipy_cross_check(self):
        from scipy.stats import wasserstein_distance
        for seed in range(10):
            rng = np.random.default_rng(seed)
            x = rng.normal(size=rng.integers(10, 200))
            y = rng.normal(rng.uniform(-1, 1), 1, size=rng.integers(10, 200))
            assert wasserstein_1d(x, y) == pytest.approx(
                wasserstein_distance(x, y), abs=1e-9)

    def test_triangle_inequality(self):
        for seed in range(20):
            rng = np.random.default_rng(seed)
            x, y, z = (rng.normal(rng.uniform(-1, 1), 1, size=50) for _ in range(3))
            assert wasserstein_1d(x, z) <= (
                wasserstein_1d(x, y) + wasserstein_1d(y, z) + 1e-9)


# --- xcorr ----------------------------------------------------------------

class TestXcorr:
    def test_forced_shift(self):
        rng = np.random.default_rng(0)
        x = rng.normal(size=1000)
        y = np.roll(x, 7)  # y[t] = x[t-7]: y lags x by 7
        est = xcorr_lag(x[50:-50], y[50:-50], 50)
        assert est.lag == 7
        assert est.peak_corr >= 0.999

    def test_identity(self):
        x = np.random.default_rng(1).normal(size=500)
        assert xcorr_lag(x, x, 30).lag == 0

    def test_ar1_noisy_shift(self):
        # generator knows ground truth: AR(1), shift 23, SNR 10 dB
        rng = np.random.default_rng(5)
        n, shift = 1200, 23
        base = np.empty(n + shift)
        base[0] = rng.normal()
        for i in range(1, n + shift):
            base[i] = 0.95 * base[i - 1] + rng.normal() * np.sqrt(1 - 0.95 ** 2)
        sigma = 10 ** (-10 / 20)
        x = base[shift:] + sigma * rng.normal(size=n)
        y = base[:n] + sigma * rng.normal(size=n)
        assert xcorr_lag(x, y, 50).lag == shift

    def test_curve_shape_and_bounds(self):
        x = np.random.default_rng(2).normal(size=301)
        y = np.random.default_rng(3).normal(size=301)
        est = xcorr_lag(x, y, 40)
        assert len(est.curve) == 81
        assert est.peak_corr == est.curve.max()
        assert np.all(np.abs(est.curve) <= 1 + 1e-12)
        assert abs(est.lag) <= 40

    def test_tie_breaks_to_smallest_abs_then_negative(self):
        # constant-plus-identical series: every lag correlates equally
        x = np.sin(np.arange(200) * 2 * np.pi / 4)  # period 4
        est = xcorr_lag(x, x, 8)
        assert est.lag == 0  # lags -8,-4,0,4,8 all tie at 1.0

    def test_too_short(self):
        with pytest.raises(SeriesTooShortError):
            xcorr_lag(np.arange(10.0), np.arange(10.0), 5)


# --- ber ------------------------------------------------------------------

class TestBer:
    def test_identical(self):
        bits = np.random.default_rng(0).integers(0, 2, 200)
        assert ber(bits, bits) == 0.0

    def test_single_flip(self):
        bits = np.zeros(200, dtype=np.uint8)
        other = bits.copy()
        other[17] = 1
        assert ber(bits, other) == pytest.approx(1 / 200)

    def test_popcount_oracle(self):
        rng = np.random.default_rng(9)
        a = rng.integers(0, 2, 200)
        b = rng.integers(0, 2, 200)
        want = bin(int("".join(map(str, a)), 2) ^ int("".join(map(str, b)), 2)
                   ).count("1") / 200
        assert ber(a, b) == pytest.approx(want, abs=1e-12)

    def test_symmetry_and_complement(self):
        rng = np.random.default_rng(4)
        a = rng.integers(0, 2, 111)
        b = rng.integers(0, 2, 111)
        assert ber(a, b) == ber(b, a)
        assert ber(a, a) == 0.0
        assert ber(a, 1 - a) == 1.0

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            ber([0, 1], [0, 1, 1])
