"""Simplex data types and log-ratio machinery.

A *composition* is a vector of ``D >= 2`` non-negative parts that sum to 1.
Throughout the package compositions are plain float ndarrays: a single
composition is a 1-D array, a sample of ``n`` compositions an ``(n, D)``
matrix. :func:`closure` produces valid compositions from raw non-negative
data and :func:`as_compositions` validates (and gently re-closes) data that
should already be compositional.

Base-component convention: the additive log-ratio transform uses the FIRST
component as the base, ``alr(y) = (log(y_2/y_1), ..., log(y_D/y_1))``, so
that :func:`alr_inverse` agrees with the regression inverse link, whose
baseline (first) component carries an implicit linear predictor of 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroRow,
    DimensionMismatch,
    InvalidDimension,
    NegativeEntry,
    NonFinite,
    UnitSumError,
    ValidationError,
    ZeroPart,
)

#: rows whose sum is within this of 1 are accepted as-is
UNIT_SUM_TOL = 1e-10
#: rows off by more than UNIT_SUM_TOL but within this are re-closed silently;
#: worse deviations raise UnitSumError (CSV round-trip noise must not hard-fail)
RECLOSE_TOL = 1e-6


def _rows(arr) -> tuple[np.ndarray, bool]:
    """Return ``(2-D float array, input_was_1d)``."""
    a = np.asarray(arr, dtype=float)
    if a.ndim == 1:
        return a[None, :], True
    if a.ndim != 2:
        raise DimensionMismatch(f"expected 1-D or 2-D input, got ndim={a.ndim}")
    return a, False


def closure(raw) -> np.ndarray:
    """Scale non-negative rows to unit sum.

    Parameters
    ----------
    raw : array_like, shape (D,) or (n, D)
        Non-negative values; each row needs at least one positive entry.

    Returns
    -------
    ndarray of the same shape with rows summing to 1.
    """
    mat, was_1d = _rows(raw)
    if np.any(mat < 0):
        raise NegativeEntry("closure input contains negative entries")
    sums = mat.sum(axis=1)
    if np.any(sums == 0):
        raise AllZeroRow("closure input contains an all-zero row")
    # rows already on the simplex (within tolerance) pass through untouched,
    # which makes closure bitwise idempotent: freshly scaled rows sum to 1
    # within a few ulp, far inside the tolerance band
    scale = np.where(np.abs(sums - 1.0) <= UNIT_SUM_TOL, 1.0, sums)
    out = mat / scale[:, None]
    return out[0] if was_1d else out


def as_compositions(arr, *, context: str = "data") -> np.ndarray:
    """Validate rows as compositions, re-closing small unit-sum noise.

    Rows within ``UNIT_SUM_TOL`` of unit sum pass through unchanged; rows
    within ``RECLOSE_TOL`` are re-closed silently; anything worse raises
    :class:`UnitSumError`.
    """
    mat, was_1d = _rows(arr)
    if mat.shape[1] < 2:
        raise InvalidDimension(f"{context}: compositions need at least 2 parts")
    if not np.all(np.isfinite(mat)):
        raise NonFinite(f"{context}: non-finite part values")
    if np.any(mat < 0):
        raise NegativeEntry(f"{context}: negative part values")
    sums = mat.sum(axis=1)
    if np.any(sums == 0):
        raise AllZeroRow(f"{context}: a row has no positive part")
    dev = np.abs(sums - 1.0)
    if np.any(dev > RECLOSE_TOL):
        i = int(np.argmax(dev))
        raise UnitSumError(
            f"{context}: row {i} sums to {sums[i]:.9g}, more than "
            f"{RECLOSE_TOL:g} away from 1"
        )
    reclose = dev > UNIT_SUM_TOL
    if np.any(reclose):
        mat = mat.copy()
        mat[reclose] /= sums[reclose, None]
    return mat[0] if was_1d else mat


def alr(y) -> np.ndarray:
    """Additive log-ratio transform with the first component as base.

    ``alr(y) = (log(y_2/y_1), ..., log(y_D/y_1))`` maps the open simplex to
    R^(D-1). Zero parts raise :class:`ZeroPart`; run zero replacement first.
    """
    mat, was_1d = _rows(y)
    if np.any(mat <= 0):
        raise ZeroPart("alr requires strictly positive parts")
    out = np.log(mat[:, 1:] / mat[:, :1])
    return out[0] if was_1d else out


def alr_inverse(z) -> np.ndarray:
    """Inverse additive log-ratio map.

    ``y_1 = 1 / (1 + sum_j exp(z_j))`` and ``y_i = exp(z_{i-1}) * y_1`` for
    ``i >= 2``; the output is a strictly positive composition. Computed as a
    softmax over ``(0, z)`` with max-subtraction so large coordinates cannot
    overflow.
    """
    mat, was_1d = _rows(z)
    if not np.all(np.isfinite(mat)):
        raise NonFinite("alr_inverse input contains NaN or infinity")
    eta = np.concatenate([np.zeros((mat.shape[0], 1)), mat], axis=1)
    eta -= eta.max(axis=1, keepdims=True)
    expd = np.exp(eta)
    out = expd / expd.sum(axis=1, keepdims=True)
    return out[0] if was_1d else out


def clr(x) -> np.ndarray:
    """Centred log-ratio transform, ``log(x_i / g(x))`` with g the geometric
    mean. Output rows sum to 0. Strictly positive parts required."""
    mat, was_1d = _rows(x)
    if np.any(mat <= 0):
        raise ZeroPart("clr requires strictly positive parts")
    logs = np.log(mat)
    out = logs - logs.mean(axis=1, keepdims=True)
    return out[0] if was_1d else out


def helmert_submatrix(D: int) -> np.ndarray:
    """Orthonormal (D-1) x D Helmert sub-matrix.

    The standard Helmert matrix with its first row (proportional to the
    all-ones vector) deleted: row r has ``1/sqrt(r(r+1))`` in its first r
    positions, ``-r/sqrt(r(r+1))`` next, zeros after. Satisfies
    ``H @ H.T = I`` and ``H @ 1 = 0``. Built from the closed form, not from
    a QR factorization, so results are bit-reproducible.
    """
    if D < 2:
        raise InvalidDimension(f"helmert_submatrix needs D >= 2, got {D}")
    H = np.zeros((D - 1, D))
    for r in range(1, D):
        norm = 1.0 / np.sqrt(r * (r + 1.0))
        H[r - 1, :r] = norm
        H[r - 1, r] = -r * norm
    return H


@dataclass(frozen=True)
class CompositionalDataset:
    """Compositional responses paired with a design matrix.

    Attributes
    ----------
    responses : (n, D) ndarray
        Valid compositions (zeros allowed).
    design : (n, p+1) ndarray
        Covariate matrix whose first column is the all-ones intercept.
    part_names : tuple of str
        Names of the D response parts.
    covariate_names : tuple of str
        Names of the design columns, "intercept" first.

    Arrays are frozen read-only after construction; instances are safe to
    share across threads. Full column rank of the design is checked at fit
    time, not here.
    """

    responses: np.ndarray
    design: np.ndarray
    part_names: tuple[str, ...] = field(default=())
    covariate_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        resp = as_compositions(np.atleast_2d(np.asarray(self.responses, dtype=float)),
                               context="responses")
        design = np.atleast_2d(np.asarray(self.design, dtype=float))
        if not np.all(np.isfinite(design)):
            raise NonFinite("design matrix contains NaN or infinity")
        if design.shape[0] != resp.shape[0]:
            raise DimensionMismatch(
                f"{resp.shape[0]} responses but {design.shape[0]} design rows"
            )
        if not np.all(design[:, 0] == 1.0):
            raise ValidationError("design matrix must carry an all-ones first column")
        if resp.shape[0] <= design.shape[1]:
            raise DimensionMismatch(
                f"need n > p+1 observations (n={resp.shape[0]}, p+1={design.shape[1]})"
            )
        part_names = self.part_names or tuple(f"part{i+1}" for i in range(resp.shape[1]))
        cov_names = self.covariate_names or (
            ("intercept",) + tuple(f"x{i}" for i in range(1, design.shape[1]))
        )
        if len(part_names) != resp.shape[1]:
            raise DimensionMismatch("part_names length does not match D")
        if len(cov_names) != design.shape[1]:
            raise DimensionMismatch("covariate_names length does not match design")
        resp = resp.copy()
        design = design.copy()
        resp.flags.writeable = False
        design.flags.writeable = False
        object.__setattr__(self, "responses", resp)
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "part_names", tuple(part_names))
        object.__setattr__(self, "covariate_names", tuple(cov_names))

    @classmethod
    def from_covariates(cls, responses, covariates=None, *,
                        part_names=(), covariate_names=()) -> "CompositionalDataset":
        """Build a dataset from raw covariates, prepending the intercept."""
        resp = np.atleast_2d(np.asarray(responses, dtype=float))
        n = resp.shape[0]
        if covariates is None:
            design = np.ones((n, 1))
            names = covariate_names or ("intercept",)
        else:
            cov = np.asarray(covariates, dtype=float)
            if cov.ndim == 1:
                cov = cov[:, None]
            design = np.column_stack([np.ones(cov.shape[0]), cov])
            names = covariate_names or (
                ("intercept",) + tuple(f"x{i}" for i in range(1, design.shape[1]))
            )
        return cls(resp, design, part_names=tuple(part_names), covariate_names=tuple(names))

    @property
    def n(self) -> int:
        return self.responses.shape[0]

    @property
    def n_parts(self) -> int:
        return self.responses.shape[1]

    @property
    def n_covariates(self) -> int:
        """Covariate count p, excluding the intercept."""
        return self.design.shape[1] - 1

    def has_zeros(self) -> bool:
        return bool(np.any(self.responses == 0))

    def drop_row(self, i: int) -> "CompositionalDataset":
        """Dataset with row ``i`` removed (leave-one-out folds)."""
        keep = np.arange(self.n) != i
        return CompositionalDataset(
            self.responses[keep], self.design[keep],
            part_names=self.part_names, covariate_names=self.covariate_names,
        )
