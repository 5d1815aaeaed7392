import numpy as np
import pytest
from scipy import integrate

from rmlab.channel import BiAwgn, RngStream, capacity_biawgn, csl_snr, transmit
from rmlab.llr_math import hard_vec


def _capacity_oracle(snr):
    """Direct integral over the channel output y given x = +1."""
    s2 = 1.0 / snr

    def integrand(y):
        dens = np.exp(-(y - 1.0) ** 2 / (2 * s2)) / np.sqrt(2 * np.pi * s2)
        return dens * np.logaddexp(0.0, -2.0 * y / s2) / np.log(2.0)

    sd = np.sqrt(s2)
    val, _ = integrate.quad(integrand, 1 - 40 * sd, 1 + 40 * sd, limit=500, epsabs=1e-13, epsrel=1e-12)
    return 1.0 - val


def test_snr_roundtrip():
    for db in (-7.3, 0.0, 0.18706, 4.0, 12.5):
        ch = BiAwgn.from_snr_db(db)
        assert ch.snr_db == pytest.approx(db, abs=1e-12)
        assert ch.snr == pytest.approx(1 / ch.sigma2)
    with pytest.raises(ValueError):
        BiAwgn(0.0)


def test_noiseless_limit():
    rng = np.random.default_rng(0)
    c = rng.integers(0, 2, 4096)
    lam = transmit(c, BiAwgn(1e-4), RngStream(5, 0))
    assert np.array_equal(hard_vec(lam), c)


def test_stream_determinism():
    c = np.zeros(64, dtype=np.uint8)
    a = transmit(c, BiAwgn(0.7), RngStream(42, 17))
    b = transmit(c, BiAwgn(0.7), RngStream(42, 17))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, transmit(c, BiAwgn(0.7), RngStream(42, 18)))
    assert not np.array_equal(a, transmit(c, BiAwgn(0.7), RngStream(43, 17)))


@pytest.mark.parametrize("sigma2", [0.5, 1.0, 2.0])
def test_llr_moments(sigma2):
    rng = np.random.default_rng(int(sigma2 * 10))
    c = rng.integers(0, 2, 10**6)
    lam = transmit(c, BiAwgn(sigma2), RngStream(9, 1))
    z = lam * (1 - 2.0 * c)
    assert z.mean() == pytest.approx(2 / sigma2, rel=0.01)
    assert z.var() == pytest.approx(4 / sigma2, rel=0.01)


def test_stream_cross_correlation():
    n = 10**5
    x = RngStream(7, 0).generator().standard_normal(n)
    for idx in (1, 2, 1000, 2**40):
        y = RngStream(7, idx).generator().standard_normal(n)
        assert abs(np.corrcoef(x, y)[0, 1]) < 0.01
    y = RngStream(7, 0, 1).generator().standard_normal(n)
    assert abs(np.corrcoef(x, y)[0, 1]) < 0.01


def test_capacity_limits():
    assert capacity_biawgn(1e4) == pytest.approx(1.0, abs=1e-9)
    assert capacity_biawgn(1e-6) == pytest.approx(0.0, abs=1e-5)
    with pytest.raises(ValueError):
        capacity_biawgn(0.0)


def test_capacity_monotone():
    snrs = np.logspace(-2, 1.5, 100)
    caps = np.array([capacity_biawgn(s) for s in snrs])
    assert np.all(np.diff(caps) > 0)


@pytest.mark.parametrize("snr", [0.05, 0.3, 1.0, 1.0437, 3.0, 10.0])
def test_capacity_matches_direct_integration(snr):
    assert capacity_biawgn(snr) == pytest.approx(_capacity_oracle(snr), abs=1e-6)


@pytest.mark.parametrize("rate", [0.25, 0.5, 0.75])
def test_csl_fixed_point(rate):
    db = csl_snr(rate)
    assert capacity_biawgn(10 ** (db / 10)) == pytest.approx(rate, abs=1e-5)


def test_csl_half_rate_against_oracle():
    from scipy.optimize import brentq
    oracle = brentq(lambda db: _capacity_oracle(10 ** (db / 10)) - 0.5, -5, 5, xtol=1e-8)
    assert csl_snr(0.5) == pytest.approx(oracle, abs=1e-4)
    assert csl_snr(0.5) == pytest.approx(0.187, abs=1e-3)


def test_csl_monotone_and_range():
    vals = [csl_snr(r) for r in np.linspace(0.05, 0.95, 19)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    for bad in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(ValueError):
            csl_snr(bad)
