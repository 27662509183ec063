"""Zero handling: detection, multiplicative replacement, controlled injection.

Log-ratio pipelines need strictly positive parts; the multiplicative
strategy imputes each zero in component ``j`` with
``delta_j = delta_fraction * (smallest observed positive value in j)`` and
shrinks the positive parts of the row by ``1 - sum(imputed)`` so the unit
sum and the ratios among positive parts are preserved.

Zero injection reproduces benchmark scenarios: the LAST ``component_count``
components are designated deterministically, and each row's entry in a
designated component is zeroed independently with probability
``row_fraction`` (uniform draw).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .compositions import as_compositions, closure
from .errors import InvalidFraction, ValidationError

DEFAULT_DELTA_FRACTION = 0.65


@dataclass(frozen=True)
class ZeroPolicy:
    """Replacement strategy: ``"none"`` or ``"multiplicative"``."""

    strategy: str = "none"
    delta_fraction: float = DEFAULT_DELTA_FRACTION

    def __post_init__(self):
        if self.strategy not in ("none", "multiplicative"):
            raise ValidationError(f"unknown zero policy {self.strategy!r}")
        if not 0.0 < self.delta_fraction < 1.0:
            raise InvalidFraction(
                f"delta_fraction must lie in (0, 1), got {self.delta_fraction}"
            )

    @classmethod
    def none(cls) -> "ZeroPolicy":
        return cls("none")

    @classmethod
    def multiplicative(cls, delta_fraction: float = DEFAULT_DELTA_FRACTION) -> "ZeroPolicy":
        return cls("multiplicative", delta_fraction)


def replace_zeros(data, policy: ZeroPolicy) -> np.ndarray:
    """Multiplicative zero replacement, row-wise, on an (n, D) matrix.

    Rows without zeros are returned bit-for-bit unchanged; replaced rows
    keep their unit sum within float precision. Columns that are zero
    everywhere fall back to the smallest positive entry of the whole
    matrix for their delta.
    """
    if policy.strategy != "multiplicative":
        raise ValidationError("replace_zeros requires a multiplicative policy")
    mat = as_compositions(np.atleast_2d(np.asarray(data, dtype=float)),
                          context="zero replacement input")
    zero_mask = mat == 0.0
    if not zero_mask.any():
        return mat

    global_min = mat[mat > 0].min()
    deltas = np.empty(mat.shape[1])
    for j in range(mat.shape[1]):
        col = mat[:, j]
        pos = col[col > 0]
        deltas[j] = policy.delta_fraction * (pos.min() if pos.size else global_min)

    out = mat.copy()
    rows = np.flatnonzero(zero_mask.any(axis=1))
    for i in rows:
        z = zero_mask[i]
        total = deltas[z].sum()
        if total >= 1.0:
            raise ValidationError(
                f"row {i}: imputed mass {total:.3g} >= 1; "
                "use a smaller delta_fraction"
            )
        out[i, z] = deltas[z]
        out[i, ~z] = mat[i, ~z] * (1.0 - total)
    return out


def inject_zeros(data, component_count: int, row_fraction: float, rng_seed) -> np.ndarray:
    """Zero out entries of the last ``component_count`` components.

    Each designated entry is zeroed independently with probability
    ``row_fraction``; modified rows are re-closed to unit sum. A row that
    would lose all its mass keeps its largest original part. Bit-reproducible
    for a fixed seed (``rng_seed`` may be an int, SeedSequence or Generator).
    """
    mat = as_compositions(np.atleast_2d(np.asarray(data, dtype=float)),
                          context="zero injection input")
    n, D = mat.shape
    if not 0 < component_count < D:
        raise ValidationError(
            f"component_count must lie in [1, D-1], got {component_count} for D={D}"
        )
    if not 0.0 < row_fraction < 1.0:
        raise InvalidFraction(f"row_fraction must lie in (0, 1), got {row_fraction}")

    rng = np.random.default_rng(rng_seed)
    hit = rng.uniform(size=(n, component_count)) < row_fraction

    out = mat.copy()
    cols = np.arange(D - component_count, D)
    for i in range(n):
        if not hit[i].any():
            continue
        row = out[i].copy()
        row[cols[hit[i]]] = 0.0
        if row.sum() == 0.0:
            # validation guarantees a positive part exists to fall back on
            row[np.argmax(mat[i])] = mat[i].max()
        out[i] = closure(row)
    return out
