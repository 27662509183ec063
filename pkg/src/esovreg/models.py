"""Regression estimators for compositional responses.

All estimators share the multinomial-logit inverse link

    mu(x) = softmax(0, x'b_2, ..., x'b_D)

whose first (baseline) component carries an implicit coefficient column of
zeros, so a fit estimates a ``(p+1) x (D-1)`` coefficient matrix. The
divergence-minimizing estimators differ only in the discrepancy between
observed and fitted compositions:

* ``esov``      squared ES-OV (Jensen-Shannon type) divergence; zeros in the
                responses are handled naturally, no replacement needed
* ``kl``        Kullback-Leibler divergence (multinomial-logit likelihood)
* ``ols``       squared Euclidean distance on the simplex
* ``wjs``       lambda-weighted Jensen-Shannon divergence
* ``jeffreys``  symmetrized KL (requires strictly positive responses)

``aitchison`` is the classical closed-form baseline: ordinary least squares
on additive log-ratio transformed responses (first component as base, see
``esovreg.compositions``), which requires strictly positive responses.

Iterative fits start from the alr-OLS coefficients and run a quasi-Newton
minimizer restarted from its own solution until the objective decrease
between consecutive restarts is at most ``RESTART_TOL``, capped at
``MAX_RESTARTS`` (exceeding the cap returns the best solution found with
``converged=False`` rather than raising). Fitting is deterministic for a
given dataset: a single fixed start, no randomness, unless ``multistart``
is requested explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp, rel_entr

from .compositions import CompositionalDataset, alr, closure, clr, helmert_submatrix
from .errors import (
    DimensionMismatch,
    InvalidK,
    InvalidLambda,
    SingularDesign,
    ValidationError,
    ZeroPart,
)

#: restart loop stops once the gain between consecutive solves drops to this
RESTART_TOL = 1e-5
MAX_RESTARTS = 100
#: iteration budget of one inner quasi-Newton solve; deliberately short so
#: that on objectives whose infimum sits at infinite coefficients
#: (quasi-separated zero patterns) progress is metered by the restart
#: criterion instead of a single solve racing to float underflow
INNER_MAXITER = 5
#: displacement used to build the strictly positive copy that seeds the
#: optimizer when responses contain zeros (the objective always sees the
#: original data)
INIT_EPSILON = 1e-6

_LOG2 = math.log(2.0)

_ITERATIVE_TAGS = ("esov", "kl", "ols", "wjs", "jeffreys")
_ALL_TAGS = _ITERATIVE_TAGS + ("aitchison",)


@dataclass(frozen=True)
class ModelKind:
    """Tagged estimator selector; ``lam`` only applies to the weighted-js fit."""

    tag: str
    lam: float | None = None

    def __post_init__(self):
        if self.tag not in _ALL_TAGS:
            raise ValidationError(f"unknown model tag {self.tag!r}")
        if self.tag == "wjs":
            if self.lam is None or not 0.0 <= self.lam <= 1.0:
                raise InvalidLambda("wjs model needs lambda in [0, 1]")
        elif self.lam is not None:
            raise InvalidLambda(f"{self.tag} model takes no lambda")

    @classmethod
    def parse(cls, text: str) -> "ModelKind":
        """Parse a CLI tag: ``esov``, ``aitchison``, ``kl``, ``ols``,
        ``wjs:LAMBDA`` or ``jeffreys``."""
        if text.startswith("wjs:"):
            try:
                lam = float(text.split(":", 1)[1])
            except ValueError:
                raise InvalidLambda(f"cannot parse lambda in {text!r}") from None
            return cls("wjs", lam)
        return cls(text)

    def __str__(self) -> str:
        return f"wjs:{self.lam:g}" if self.tag == "wjs" else self.tag


@dataclass(frozen=True)
class FitResult:
    """Fitted coefficients plus diagnostics.

    ``coefficients`` is the ``(p+1) x (D-1)`` matrix for the non-baseline
    components; the baseline (first) component's column is implicitly zero.
    ``fitted`` rows are strictly positive compositions. ``objective`` is the
    final minimized value in the model's own discrepancy (residual sum of
    squares in alr space for ``aitchison``).
    """

    model: ModelKind
    coefficients: np.ndarray
    fitted: np.ndarray
    objective: float
    iterations: int
    restarts: int
    converged: bool
    part_names: tuple[str, ...] = field(default=())
    covariate_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        for name in ("coefficients", "fitted"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def inverse_link(beta: np.ndarray, x) -> np.ndarray:
    """Map linear predictors to interior compositions.

    ``beta`` is (p+1, d); ``x`` a covariate row (p+1,) or matrix (n, p+1)
    whose first column is the intercept. The baseline component's linear
    predictor is fixed at 0 and the row maximum is subtracted before
    exponentiation, so large predictors cannot overflow.
    """
    beta = np.asarray(beta, dtype=float)
    x = np.asarray(x, dtype=float)
    was_1d = x.ndim == 1
    if was_1d:
        x = x[None, :]
    if x.ndim != 2 or beta.ndim != 2 or x.shape[1] != beta.shape[0]:
        raise DimensionMismatch(
            f"design shape {x.shape} incompatible with coefficients {beta.shape}"
        )
    eta = np.concatenate([np.zeros((x.shape[0], 1)), x @ beta], axis=1)
    eta -= eta.max(axis=1, keepdims=True)
    expd = np.exp(eta)
    mu = expd / expd.sum(axis=1, keepdims=True)
    return mu[0] if was_1d else mu


def predict(fit: FitResult, newdesign) -> np.ndarray:
    """Apply a fit's inverse link to new design rows (intercept included)."""
    return inverse_link(fit.coefficients, newdesign)


# -- objective/gradient pairs -------------------------------------------------
#
# Each discrepancy supplies value(Y, mu) and the per-observation gradient with
# respect to the linear predictors. With s = dL/dmu (elementwise) and the
# softmax Jacobian dmu_j/deta_k = mu_j (1{j=k} - mu_k), the eta-gradient is
#   G = mu * (s - sum_j s_j mu_j),
# and the coefficient gradient is X' G[:, 1:]. mu is evaluated through
# log-space softmax so s stays finite even when a fitted part underflows.


def _softmax_rows(eta_full: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    log_mu = eta_full - logsumexp(eta_full, axis=1, keepdims=True)
    return np.exp(log_mu), log_mu


def _esov_value_grad(Y, mu, log_mu):
    m = (Y + mu) / 2.0
    value = float(np.sum(rel_entr(Y, m) + rel_entr(mu, m)))
    s = np.full_like(mu, _LOG2)
    pos = Y > 0
    s[pos] = _LOG2 + log_mu[pos] - np.log(Y[pos] + mu[pos])
    G = mu * (s - np.sum(s * mu, axis=1, keepdims=True))
    return value, G


def _kl_value_grad(Y, mu, log_mu):
    value = float(np.sum(rel_entr(Y, mu)))
    return value, mu - Y


def _ols_value_grad(Y, mu, log_mu):
    diff = mu - Y
    value = float(np.sum(diff * diff))
    s = 2.0 * diff
    G = mu * (s - np.sum(s * mu, axis=1, keepdims=True))
    return value, G


def _wjs_value_grad(lam: float):
    def value_grad(Y, mu, log_mu):
        m = (Y + mu) / 2.0
        value = float(np.sum(lam * rel_entr(Y, m) + (1.0 - lam) * rel_entr(mu, m)))
        t = Y + mu
        big = np.full_like(mu, _LOG2)
        pos = Y > 0
        big[pos] = _LOG2 + log_mu[pos] - np.log(t[pos])
        mu_share = np.ones_like(mu)
        mu_share[pos] = mu[pos] / t[pos]
        y_share = np.zeros_like(mu)
        y_share[pos] = Y[pos] / t[pos]
        s = (1.0 - lam) * (big + 1.0 - mu_share) - lam * y_share
        G = mu * (s - np.sum(s * mu, axis=1, keepdims=True))
        return value, G

    return value_grad


def _jeffreys_value_grad(Y, mu, log_mu):
    value = float(np.sum(rel_entr(Y, mu) + rel_entr(mu, Y)))
    # s*mu written in closed form so an underflowed mu contributes -y, not NaN
    smu = mu * (log_mu - np.log(Y)) + mu - Y
    G = smu - mu * np.sum(smu, axis=1, keepdims=True)
    return value, G


def _value_grad_for(kind: ModelKind):
    if kind.tag == "esov":
        return _esov_value_grad
    if kind.tag == "kl":
        return _kl_value_grad
    if kind.tag == "ols":
        return _ols_value_grad
    if kind.tag == "wjs":
        return _wjs_value_grad(kind.lam)
    if kind.tag == "jeffreys":
        return _jeffreys_value_grad
    raise ValidationError(f"{kind.tag} has no iterative objective")


def objective_value(kind: ModelKind, Y, mu) -> float:
    """Discrepancy between observed and fitted compositions for a model."""
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    mu = np.atleast_2d(np.asarray(mu, dtype=float))
    if kind.tag == "esov":
        m = (Y + mu) / 2.0
        return float(np.sum(rel_entr(Y, m) + rel_entr(mu, m)))
    if kind.tag == "kl":
        return float(np.sum(rel_entr(Y, mu)))
    if kind.tag == "ols":
        return float(np.sum((Y - mu) ** 2))
    if kind.tag == "wjs":
        m = (Y + mu) / 2.0
        return float(np.sum(kind.lam * rel_entr(Y, m)
                            + (1.0 - kind.lam) * rel_entr(mu, m)))
    if kind.tag == "jeffreys":
        return float(np.sum(rel_entr(Y, mu) + rel_entr(mu, Y)))
    raise ValidationError(f"{kind.tag} has no composition-space objective")


def objective_gradient(kind: ModelKind, data: CompositionalDataset,
                       beta: np.ndarray) -> np.ndarray:
    """Analytic gradient of the model objective at ``beta``, shape (p+1, d)."""
    X = data.design
    Y = data.responses
    beta = np.asarray(beta, dtype=float)
    eta = np.concatenate([np.zeros((X.shape[0], 1)), X @ beta], axis=1)
    mu, log_mu = _softmax_rows(eta)
    _, G = _value_grad_for(kind)(Y, mu, log_mu)
    return X.T @ G[:, 1:]


def _check_design(X: np.ndarray):
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise SingularDesign(
            f"design matrix has rank < {X.shape[1]} (collinear covariates?)"
        )


def _initial_coefficients(data: CompositionalDataset) -> np.ndarray:
    """alr-OLS start point; zero-bearing responses are displaced by
    INIT_EPSILON and re-closed for the start point only."""
    Y = data.responses
    if np.any(Y == 0):
        Y = closure(Y + INIT_EPSILON)
    Z = alr(Y)
    beta, _, _, _ = np.linalg.lstsq(data.design, Z, rcond=None)
    return beta


def _minimize_restarted(fun, x0):
    """BFGS restarted from its own solution until the objective decrease
    between consecutive solves is <= RESTART_TOL (at least two solves, as
    many as MAX_RESTARTS).

    Each inner solve is bounded (INNER_MAXITER iterations), so on
    objectives whose infimum lies at infinite coefficients (quasi-separated
    zero patterns) the restart criterion, not the line search, decides when
    marching outward has stopped paying."""
    opts = {"gtol": 1e-6, "maxiter": INNER_MAXITER}
    res = minimize(fun, x0, jac=True, method="BFGS", options=opts)
    best_x, best_val = res.x, float(res.fun)
    iterations = int(res.nit)
    prev_val = best_val
    restarts = 0
    converged = False
    while restarts < MAX_RESTARTS:
        res = minimize(fun, best_x, jac=True, method="BFGS", options=opts)
        restarts += 1
        iterations += int(res.nit)
        val = float(res.fun)
        if val < best_val:
            best_x, best_val = res.x, val
        if prev_val - val <= RESTART_TOL:
            converged = True
            break
        prev_val = val
    return best_x, best_val, iterations, restarts, converged


def _fit_iterative(data: CompositionalDataset, kind: ModelKind, *,
                   multistart: int = 0, seed: int | None = None) -> FitResult:
    X = data.design
    Y = data.responses
    _check_design(X)
    if kind.tag == "jeffreys" and np.any(Y == 0):
        raise ZeroPart("jeffreys objective is infinite on zero-bearing responses")

    n, p1 = X.shape
    d = Y.shape[1] - 1
    value_grad = _value_grad_for(kind)

    def fun(params):
        beta = params.reshape(p1, d)
        eta = np.concatenate([np.zeros((n, 1)), X @ beta], axis=1)
        mu, log_mu = _softmax_rows(eta)
        value, G = value_grad(Y, mu, log_mu)
        return value, (X.T @ G[:, 1:]).ravel()

    starts = [_initial_coefficients(data).ravel()]
    if multistart > 0:
        rng = np.random.default_rng(0 if seed is None else seed)
        starts += [rng.standard_normal(p1 * d) for _ in range(multistart)]

    best = None
    total_iters = 0
    total_restarts = 0
    for x0 in starts:
        x, val, iters, restarts, converged = _minimize_restarted(fun, x0)
        total_iters += iters
        total_restarts += restarts
        if best is None or val < best[1]:
            best = (x, val, converged)

    beta = best[0].reshape(p1, d)
    fitted = inverse_link(beta, X)
    return FitResult(
        model=kind,
        coefficients=beta,
        fitted=fitted,
        objective=best[1],
        iterations=total_iters,
        restarts=total_restarts,
        converged=best[2],
        part_names=data.part_names,
        covariate_names=data.covariate_names,
    )


def fit_esov(data: CompositionalDataset, **kw) -> FitResult:
    """Minimize the summed squared ES-OV divergence between observed and
    fitted compositions. Zeros in the responses need no replacement."""
    return _fit_iterative(data, ModelKind("esov"), **kw)


def fit_kl(data: CompositionalDataset, **kw) -> FitResult:
    """Minimize summed KL(observed, fitted); the multinomial-logit fit."""
    return _fit_iterative(data, ModelKind("kl"), **kw)


def fit_ols(data: CompositionalDataset, **kw) -> FitResult:
    """Minimize summed squared Euclidean distance on the simplex."""
    return _fit_iterative(data, ModelKind("ols"), **kw)


def fit_aitchison(data: CompositionalDataset) -> FitResult:
    """Closed-form log-ratio regression: OLS on alr-transformed responses.

    Requires strictly positive responses (run zero replacement first);
    the objective reported is the residual sum of squares in alr space.
    """
    X = data.design
    _check_design(X)
    Z = alr(data.responses)  # raises ZeroPart on zeros
    beta, _, _, _ = np.linalg.lstsq(X, Z, rcond=None)
    resid = Z - X @ beta
    fitted = inverse_link(beta, X)
    return FitResult(
        model=ModelKind("aitchison"),
        coefficients=beta,
        fitted=fitted,
        objective=float(np.sum(resid * resid)),
        iterations=0,
        restarts=0,
        converged=True,
        part_names=data.part_names,
        covariate_names=data.covariate_names,
    )


def fit(data: CompositionalDataset, kind: ModelKind, **kw) -> FitResult:
    """Dispatch to the estimator selected by ``kind``."""
    if kind.tag == "aitchison":
        return fit_aitchison(data)
    return _fit_iterative(data, kind, **kw)


# -- principal-component regression for compositional covariates -------------


@dataclass(frozen=True)
class PcrFit:
    """Regression on principal-component scores of compositional covariates.

    The covariates are clr-transformed, rotated by the Helmert sub-matrix
    (removing the clr singularity), centered, and projected onto the leading
    ``n_components`` principal axes; ``result`` is the regression of the
    responses on those scores. The transform (``center``, ``rotation``) is
    stored so new covariates are mapped identically at prediction time.
    """

    result: FitResult
    center: np.ndarray
    rotation: np.ndarray  # (n_components, D_x - 1) principal axes
    n_components: int

    def scores(self, xcomp) -> np.ndarray:
        z = clr(np.atleast_2d(np.asarray(xcomp, dtype=float)))
        if z.shape[1] != self.rotation.shape[1] + 1:
            raise DimensionMismatch(
                f"expected {self.rotation.shape[1] + 1}-part covariates, "
                f"got {z.shape[1]}"
            )
        H = helmert_submatrix(z.shape[1])
        return (z @ H.T - self.center) @ self.rotation.T

    def predict(self, xcomp) -> np.ndarray:
        s = self.scores(xcomp)
        design = np.column_stack([np.ones(s.shape[0]), s])
        return inverse_link(self.result.coefficients, design)


def _pc_axes(scores_space: np.ndarray) -> np.ndarray:
    """Principal axes of a centered matrix, rows = components, with a
    deterministic sign convention (largest-magnitude loading positive)."""
    _, _, vt = np.linalg.svd(scores_space, full_matrices=False)
    for row in vt:
        j = np.argmax(np.abs(row))
        if row[j] < 0:
            row *= -1.0
    return vt


def pcr_score_space(xcomp) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full principal-component scores of Helmert-rotated clr covariates.

    Returns ``(scores, center, axes)`` with ``scores`` of shape
    ``(n, D_x - 1)``; the first ``k`` columns are the inputs of a
    ``k``-component regression. Covariates must be strictly positive.
    """
    xmat = np.atleast_2d(np.asarray(xcomp, dtype=float))
    if np.any(xmat <= 0):
        raise ZeroPart("compositional covariates must be strictly positive")
    z = clr(xmat) @ helmert_submatrix(xmat.shape[1]).T
    center = z.mean(axis=0)
    axes = _pc_axes(z - center)
    return (z - center) @ axes.T, center, axes


def fit_pcr_compositional_covariates(responses, xcomp, k: int,
                                     model: ModelKind, **kw) -> PcrFit:
    """Fit ``model`` on the first ``k`` principal-component scores of
    Helmert-rotated clr covariates (strictly positive compositions)."""
    scores, center, axes = pcr_score_space(xcomp)
    d_x = scores.shape[1]
    if not 1 <= k <= d_x:
        raise InvalidK(f"k must lie in [1, {d_x}], got {k}")
    data = CompositionalDataset.from_covariates(responses, scores[:, :k])
    result = fit(data, model, **kw)
    return PcrFit(result=result, center=center, rotation=axes[:k], n_components=k)
