"""Divergences between compositions.

All functions accept a pair of 1-D compositions (returning a float) or two
matching (n, D) matrices (returning per-row values). The zero conventions
``0*log(0) = 0`` and ``0*log(0/c) = 0`` are implemented by branching inside
``scipy.special.rel_entr`` / ``xlogy``, never by masking NaNs afterwards, so
zero-bearing inputs are handled deterministically and never produce NaN.
``+inf`` is a legal, propagating value (absolute-continuity failures), not
an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import rel_entr, xlogy

from .errors import DimensionMismatch, InvalidLambda, ZeroPart

#: upper bound of the squared ES-OV metric, attained on disjoint supports
ESOV_MAX = 2.0 * math.log(2.0)


def _pair(x, y) -> tuple[np.ndarray, np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim == 1:
        return x[None, :], y[None, :], True
    if x.ndim != 2:
        raise DimensionMismatch(f"expected 1-D or 2-D input, got ndim={x.ndim}")
    return x, y, False


def _ret(rows: np.ndarray, was_1d: bool):
    return float(rows[0]) if was_1d else rows


def esov(x, y):
    """Squared ES-OV metric between compositions.

    ``sum_j x_j log(2 x_j / (x_j + y_j)) + y_j log(2 y_j / (x_j + y_j))``,
    a symmetric divergence in ``[0, 2 log 2]`` whose square root is a true
    metric. Zeros in either argument are handled naturally.
    """
    x, y, was_1d = _pair(x, y)
    m = (x + y) / 2.0
    rows = np.sum(rel_entr(x, m) + rel_entr(y, m), axis=1)
    # mathematically >= 0; clip float round-off on near-identical pairs
    return _ret(np.maximum(rows, 0.0), was_1d)


def esov_phi_form(x, y):
    """ES-OV via its phi-divergence representation.

    ``sum_j y_j f(x_j / y_j)`` with ``f(t) = t log(2t/(1+t)) + log(2/(1+t))``.
    Requires strictly positive ``y`` (the ratio's denominator); used to
    cross-validate the direct form, which it equals on positive pairs.
    """
    x, y, was_1d = _pair(x, y)
    if np.any(y <= 0):
        raise ZeroPart("phi-form denominators must be strictly positive")
    t = x / y
    f = xlogy(t, 2.0 * t / (1.0 + t)) + np.log(2.0 / (1.0 + t))
    rows = np.sum(y * f, axis=1)
    return _ret(np.maximum(rows, 0.0), was_1d)


def kl(x, y):
    """Kullback-Leibler divergence ``sum_j x_j log(x_j / y_j)``.

    ``+inf`` when some ``x_j > 0`` has ``y_j = 0``; ``0 log 0 = 0``.
    """
    x, y, was_1d = _pair(x, y)
    return _ret(np.sum(rel_entr(x, y), axis=1), was_1d)


def weighted_js(x, y, lam: float):
    """Weighted Jensen-Shannon divergence.

    ``sum_j lam * x_j log(2x_j/(x_j+y_j)) + (1-lam) * y_j log(2y_j/(x_j+y_j))``
    for ``lam`` in [0, 1]; at ``lam = 1/2`` equals ``esov(x, y) / 2``.
    """
    if not 0.0 <= lam <= 1.0:
        raise InvalidLambda(f"lambda must lie in [0, 1], got {lam}")
    x, y, was_1d = _pair(x, y)
    m = (x + y) / 2.0
    rows = np.sum(lam * rel_entr(x, m) + (1.0 - lam) * rel_entr(y, m), axis=1)
    return _ret(np.maximum(rows, 0.0), was_1d)


def jeffreys(x, y):
    """Symmetrized KL divergence ``kl(x, y) + kl(y, x)`` (may be +inf)."""
    x, y, was_1d = _pair(x, y)
    rows = np.sum(rel_entr(x, y) + rel_entr(y, x), axis=1)
    return _ret(rows, was_1d)


def hellinger(x, y):
    """Hellinger distance ``sqrt(sum_j (sqrt(x_j) - sqrt(y_j))^2) / sqrt(2)``,
    bounded in [0, 1]."""
    x, y, was_1d = _pair(x, y)
    rows = np.sqrt(np.sum((np.sqrt(x) - np.sqrt(y)) ** 2, axis=1)) / math.sqrt(2.0)
    return _ret(np.minimum(rows, 1.0), was_1d)


def chi_square(x, y):
    """Chi-square distance ``sum_j (x_j - y_j)^2 / y_j``.

    Terms with ``x_j = y_j`` (including 0/0) contribute 0; ``y_j = 0`` with
    ``x_j != y_j`` yields +inf.
    """
    x, y, was_1d = _pair(x, y)
    diff = x - y
    terms = np.zeros_like(diff)
    mask = diff != 0.0
    with np.errstate(divide="ignore"):
        np.divide(diff * diff, y, out=terms, where=mask)
    return _ret(np.sum(terms, axis=1), was_1d)


@dataclass(frozen=True)
class DivergenceKind:
    """Tagged divergence selector; ``lam`` only applies to weighted-js."""

    tag: str
    lam: float | None = None

    _TAGS = ("esov", "kl", "wjs", "jeffreys", "hellinger", "chisq")

    def __post_init__(self):
        if self.tag not in self._TAGS:
            raise ValueError(f"unknown divergence tag {self.tag!r}")
        if self.tag == "wjs":
            if self.lam is None or not 0.0 <= self.lam <= 1.0:
                raise InvalidLambda("weighted-js needs lambda in [0, 1]")
        elif self.lam is not None:
            raise InvalidLambda(f"{self.tag} takes no lambda")

    def compute(self, x, y):
        if self.tag == "esov":
            return esov(x, y)
        if self.tag == "kl":
            return kl(x, y)
        if self.tag == "wjs":
            return weighted_js(x, y, self.lam)
        if self.tag == "jeffreys":
            return jeffreys(x, y)
        if self.tag == "hellinger":
            return hellinger(x, y)
        return chi_square(x, y)
