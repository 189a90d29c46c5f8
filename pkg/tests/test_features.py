import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doa_ae import (
    ArrayConfig,
    covariance_features,
    extract_upper,
    ideal_covariance,
    normalize,
    steering_function,
    template,
    to_complex,
    to_real,
)


class TestExtractUpper:
    def test_three_by_three_scan_order(self):
        r = np.arange(9).reshape(3, 3) + 1j
        assert np.array_equal(extract_upper(r), np.array([r[0, 1], r[0, 2], r[1, 2]]))

    def test_two_by_two_single_entry(self):
        r = np.array([[1.0, 2 + 3j], [2 - 3j, 4.0]])
        assert np.array_equal(extract_upper(r), np.array([2 + 3j]))

    def test_twenty_element_lengths(self, ula20):
        r = ideal_covariance((-15.0,), (1.0,), 0.1, ula20["steer_ideal"])
        rhat = extract_upper(r)
        assert rhat.shape == (190,)
        assert to_real(rhat).shape == (380,)

    def test_reconstruction_recovers_off_diagonal(self, rng):
        x = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        r = x + x.conj().T
        rhat = extract_upper(r)
        rebuilt = np.zeros_like(r)
        rebuilt[np.triu_indices(6, k=1)] = rhat
        rebuilt = rebuilt + rebuilt.conj().T
        assert np.array_equal(rebuilt, r - np.diag(np.diag(r)))

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            extract_upper(np.zeros((3, 4)))


class TestRealComplexBridge:
    def test_single_value(self):
        assert np.array_equal(to_real(np.array([1 + 2j])), np.array([1.0, 2.0]))
        assert np.array_equal(to_complex(np.array([1.0, 2.0])), np.array([1 + 2j]))

    def test_real_input_gives_zero_imag_half(self):
        v = to_real(np.array([3.0, -4.0], dtype=complex))
        assert np.array_equal(v[2:], np.zeros(2))

    def test_odd_length_rejected(self):
        with pytest.raises(ValueError):
            to_complex(np.ones(5))

    @given(st.integers(1, 40), st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_round_trips(self, n, seed):
        rng = np.random.default_rng(seed)
        z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert np.array_equal(to_complex(to_real(z)), z)
        v = rng.standard_normal(2 * n)
        assert np.array_equal(to_real(to_complex(v)), v)


class TestNormalize:
    def test_three_four_five(self):
        assert np.allclose(normalize(np.array([3.0, 4.0, 0.0, 0.0])),
                           [0.6, 0.8, 0.0, 0.0])

    def test_unit_vector_unchanged(self):
        v = np.array([1.0, 0.0, 0.0])
        assert np.max(np.abs(normalize(v) - v)) < 1e-15

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            normalize(np.zeros(4))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_output_norm_is_one(self, seed):
        v = np.random.default_rng(seed).standard_normal(12) + 0.01
        assert np.linalg.norm(normalize(v)) == pytest.approx(1.0, abs=1e-12)


class TestTemplates:
    def test_matches_ideal_covariance_features(self, ula20):
        steer = ula20["steer_ideal"]
        t = template(-15.0, steer)
        r = ideal_covariance((-15.0,), (1.0,), 0.0, steer)
        assert np.array_equal(t, covariance_features(r))

    def test_unit_norm(self, ula20):
        t = template(33.0, ula20["steer_true"])
        assert np.linalg.norm(t) == pytest.approx(1.0, abs=1e-12)

    def test_templates_are_discriminative(self, ula20):
        # brute-force complex correlation between nearby signatures
        t1 = to_complex(template(-15.0, ula20["steer_ideal"]))
        t2 = to_complex(template(-5.0, ula20["steer_ideal"]))
        corr = abs(sum(np.conj(a) * b for a, b in zip(t1, t2)))
        assert corr < 0.5

    def test_invariant_to_source_power(self, ula20):
        steer = ula20["steer_ideal"]
        a = steer(7.0)
        weak = covariance_features(0.03 * np.outer(a, a.conj()))
        strong = covariance_features(5.0 * np.outer(a, a.conj()))
        assert np.max(np.abs(weak - strong)) < 1e-12

    def test_unnormalized_variant(self, ula20):
        steer = ula20["steer_ideal"]
        a = steer(7.0)
        raw = covariance_features(2.0 * np.outer(a, a.conj()), unit_norm=False)
        # upper-triangle mass of p*a*a^H with |a_i| = 1/sqrt(M): p*sqrt((M-1)/(2M))
        assert np.linalg.norm(raw) == pytest.approx(2.0 * np.sqrt(19 / 40), abs=1e-12)
