import numpy as np
import pytest

from constkit.rng import derive_stream


def test_same_key_same_draws():
    a = derive_stream(42, ("16-QAM", "AWGN", 3, 0))
    b = derive_stream(42, ("16-QAM", "AWGN", 3, 0))
    np.testing.assert_array_equal(a.normal(1000), b.normal(1000))
    np.testing.assert_array_equal(a.uniform(1000), b.uniform(1000))


@pytest.mark.parametrize("other", [
    (42, ("16-QAM", "AWGN", 3, 1)),
    (43, ("16-QAM", "AWGN", 3, 0)),
    (42, ("16-QAM", "Rayleigh", 3, 0)),
    (42, ("16-PSK", "AWGN", 3, 0)),
])
def test_different_key_different_draws(other):
    base = derive_stream(42, ("16-QAM", "AWGN", 3, 0)).normal(1000)
    assert not np.array_equal(base, derive_stream(*other).normal(1000))


def test_label_boundaries_matter():
    assert not np.array_equal(derive_stream(1, ("ab", "c")).uniform(8),
                              derive_stream(1, ("a", "bc")).uniform(8))


def test_normal_moments():
    z = derive_stream(7, ("moments",)).normal(1_000_000)
    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.01


def test_normal_odd_count_is_prefix():
    a = derive_stream(3, ()).normal(7)
    b = derive_stream(3, ()).normal(8)
    np.testing.assert_array_equal(a, b[:7])


def test_complex_normal_unit_variance():
    h = derive_stream(5, ("h",)).complex_normal(1_000_000)
    assert np.mean(np.abs(h) ** 2) == pytest.approx(1.0, abs=0.01)
    assert abs(np.mean(h.real * h.imag)) < 0.005


def test_known_first_draws_are_stable():
    # frozen snapshot: guards against silent changes in key derivation or draw order
    np.testing.assert_allclose(derive_stream(0, ("snapshot",)).uniform(3),
                               [0.16854958984693247, 0.3488261666380087, 0.8273168859475484],
                               rtol=0, atol=1e-15)
    np.testing.assert_allclose(derive_stream(0, ("snapshot",)).normal(2),
                               [-0.3534981546383727, 0.4941723352909027], rtol=1e-13)


def test_choice_degenerate_and_uniform():
    s = derive_stream(0, ("choice",))
    assert np.all(s.choice(np.array([1.0, 0.0]), 1000) == 0)
    idx = s.choice(np.full(16, 1 / 16), 1_000_000)
    freq = np.bincount(idx, minlength=16) / idx.size
    assert np.all(np.abs(freq - 1 / 16) < 0.002)


def test_choice_skips_zero_probability():
    idx = derive_stream(1, ()).choice(np.array([0.5, 0.0, 0.5]), 100_000)
    assert not np.any(idx == 1)


def test_integers_range():
    v = derive_stream(2, ()).integers(1, 5, 10_000)
    assert v.min() == 1 and v.max() == 4
