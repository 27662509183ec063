"""Unit tests for the divergence functionals."""

import math

import numpy as np
import pytest

from esovreg import errors
from esovreg.divergences import (
    ESOV_MAX,
    DivergenceKind,
    chi_square,
    esov,
    esov_phi_form,
    hellinger,
    jeffreys,
    kl,
    weighted_js,
)

LOG2 = math.log(2.0)


def random_pairs(rng, count, D, zero_prob=0.0):
    x = rng.dirichlet(np.ones(D), size=count)
    y = rng.dirichlet(np.ones(D), size=count)
    if zero_prob > 0:
        for mat in (x, y):
            mask = rng.random(mat.shape) < zero_prob
            # keep each row's largest part so rows stay valid
            mask[np.arange(count), mat.argmax(axis=1)] = False
            mat *= ~mask
        x = x / x.sum(axis=1, keepdims=True)
        y = y / y.sum(axis=1, keepdims=True)
    return x, y


class TestEsov:
    def test_identity(self):
        rng = np.random.default_rng(0)
        x, _ = random_pairs(rng, 20, 4, zero_prob=0.3)
        np.testing.assert_array_equal(esov(x, x), np.zeros(20))

    def test_disjoint_supports_reach_maximum(self):
        assert esov([1.0, 0.0], [0.0, 1.0]) == 2.0 * LOG2
        assert ESOV_MAX == 2.0 * LOG2

    def test_frozen_term_by_term_value(self):
        # computed term by term in 50-digit arithmetic
        x = np.array([0.775, 0.195, 0.030])
        y = np.array([0.719, 0.249, 0.032])
        assert abs(esov(x, y) - 0.004373968611575027) < 1e-15

    def test_symmetry_exact_including_zeros(self):
        rng = np.random.default_rng(1)
        for zero_prob in (0.0, 0.3):
            x, y = random_pairs(rng, 200, 5, zero_prob)
            np.testing.assert_array_equal(esov(x, y), esov(y, x))

    def test_range_including_zeros(self):
        rng = np.random.default_rng(2)
        for D in (2, 3, 6, 16):
            x, y = random_pairs(rng, 300, D, zero_prob=0.25)
            v = esov(x, y)
            assert np.all(v >= 0.0)
            assert np.all(v <= ESOV_MAX + 1e-12)

    def test_sqrt_triangle_inequality(self):
        rng = np.random.default_rng(3)
        x, y = random_pairs(rng, 400, 4, zero_prob=0.2)
        z, _ = random_pairs(rng, 400, 4, zero_prob=0.2)
        lhs = np.sqrt(esov(x, z))
        rhs = np.sqrt(esov(x, y)) + np.sqrt(esov(y, z))
        assert np.min(rhs - lhs) >= -1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(errors.DimensionMismatch):
            esov([0.5, 0.5], [0.2, 0.3, 0.5])

    def test_never_nan(self):
        rng = np.random.default_rng(4)
        x, y = random_pairs(rng, 100, 3, zero_prob=0.5)
        assert np.all(np.isfinite(esov(x, y)))


class TestPhiForm:
    def test_matches_direct_form_on_positive_pairs(self):
        rng = np.random.default_rng(5)
        x, y = random_pairs(rng, 300, 6)
        assert np.max(np.abs(esov_phi_form(x, y) - esov(x, y))) < 1e-12

    def test_identity(self):
        x = np.array([0.2, 0.3, 0.5])
        assert esov_phi_form(x, x) == 0.0

    def test_two_part_pair(self):
        x = np.array([0.5, 0.5])
        y = np.array([0.9, 0.1])
        assert abs(esov_phi_form(x, y) - esov(x, y)) < 1e-12

    def test_zero_denominator(self):
        with pytest.raises(errors.ZeroPart):
            esov_phi_form([0.5, 0.5], [1.0, 0.0])


class TestKl:
    def test_identity(self):
        x = np.array([0.1, 0.2, 0.7])
        assert kl(x, x) == 0.0

    def test_single_support_term(self):
        assert abs(kl([1.0, 0.0], [0.5, 0.5]) - LOG2) < 1e-15

    def test_absolute_continuity_failure(self):
        assert kl([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_nonnegative_and_zero_iff_equal(self):
        rng = np.random.default_rng(6)
        x, y = random_pairs(rng, 200, 4)
        v = kl(x, y)
        assert np.all(v >= 0.0)
        assert np.all(v[np.any(x != y, axis=1)] > 1e-12)


class TestWeightedJs:
    def test_half_lambda_is_half_esov(self):
        rng = np.random.default_rng(7)
        x, y = random_pairs(rng, 100, 5, zero_prob=0.2)
        np.testing.assert_allclose(weighted_js(x, y, 0.5), esov(x, y) / 2.0,
                                   atol=1e-12)

    def test_lambda_zero_identity(self):
        x = np.array([0.4, 0.6])
        assert weighted_js(x, x, 0.0) == 0.0

    def test_lambda_zero_hand_value(self):
        # sum_j y_j log(2 y_j / (x_j + y_j)) at x=(1,0), y=(1/2,1/2):
        #   0.5 log(2/3) + 0.5 log 2 = 0.5 log(4/3)
        got = weighted_js([1.0, 0.0], [0.5, 0.5], 0.0)
        assert abs(got - 0.5 * math.log(4.0 / 3.0)) < 1e-15

    def test_invalid_lambda(self):
        with pytest.raises(errors.InvalidLambda):
            weighted_js([0.5, 0.5], [0.4, 0.6], 1.5)


class TestJeffreysHellingerChiSquare:
    def test_jeffreys_is_symmetrized_kl(self):
        rng = np.random.default_rng(8)
        x, y = random_pairs(rng, 200, 4)
        np.testing.assert_allclose(jeffreys(x, y), kl(x, y) + kl(y, x),
                                   atol=1e-12)

    def test_jeffreys_identity_and_infinity(self):
        x = np.array([0.3, 0.7])
        assert jeffreys(x, x) == 0.0
        assert jeffreys([1.0, 0.0], [0.0, 1.0]) == math.inf

    def test_hellinger_bounds(self):
        assert hellinger([0.2, 0.8], [0.2, 0.8]) == 0.0
        assert hellinger([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_chi_square_hand_value(self):
        got = chi_square([0.5, 0.5], [0.25, 0.75])
        assert abs(got - 1.0 / 3.0) < 1e-15

    def test_chi_square_identity_and_infinity(self):
        x = np.array([0.25, 0.75])
        assert chi_square(x, x) == 0.0
        assert chi_square([0.5, 0.5], [1.0, 0.0]) == math.inf


class TestDivergenceKind:
    def test_dispatch_matches_functions(self):
        x = np.array([0.2, 0.8])
        y = np.array([0.6, 0.4])
        assert DivergenceKind("esov").compute(x, y) == esov(x, y)
        assert DivergenceKind("wjs", 0.25).compute(x, y) == weighted_js(x, y, 0.25)

    def test_lambda_validation(self):
        with pytest.raises(errors.InvalidLambda):
            DivergenceKind("wjs")
        with pytest.raises(errors.InvalidLambda):
            DivergenceKind("kl", 0.5)

    def test_unknown_tag(self):
        with pytest.raises(ValueError):
            DivergenceKind("mahalanobis")
