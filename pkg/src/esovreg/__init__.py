"""Divergence-based regression for compositional data.

Responses live on the unit simplex; the flagship estimator minimizes the
squared ES-OV (Jensen-Shannon type) divergence between observed and fitted
compositions and handles zero parts without any imputation. The classical
log-ratio (Aitchison) regression, a multinomial-logit KL fit, and a
least-squares fit are provided as baselines, together with zero-replacement
utilities, a leave-one-out KL score and a Monte-Carlo benchmark harness.

Quick start::

    from esovreg import CompositionalDataset, fit_esov

    data = CompositionalDataset.from_covariates(parts_matrix, covariates)
    result = fit_esov(data)
    result.coefficients   # (p+1, D-1); first component is the baseline
"""

from .compositions import (
    CompositionalDataset,
    alr,
    alr_inverse,
    closure,
    clr,
    helmert_submatrix,
)
from .divergences import (
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
from .errors import EsovregError
from .evalsim import (
    DensityCurve,
    GeneratedData,
    SimConfig,
    SimReport,
    generate_logistic_normal,
    kl_density_summary,
    loocv_kl,
    loocv_predictions,
    run_comparison,
    select_pcr_components,
)
from .models import (
    FitResult,
    ModelKind,
    PcrFit,
    fit,
    fit_aitchison,
    fit_esov,
    fit_kl,
    fit_ols,
    fit_pcr_compositional_covariates,
    inverse_link,
    predict,
)
from .zeros import ZeroPolicy, inject_zeros, replace_zeros

__version__ = "0.1.0"

__all__ = [
    "CompositionalDataset",
    "DensityCurve",
    "DivergenceKind",
    "ESOV_MAX",
    "EsovregError",
    "FitResult",
    "GeneratedData",
    "ModelKind",
    "PcrFit",
    "SimConfig",
    "SimReport",
    "ZeroPolicy",
    "alr",
    "alr_inverse",
    "chi_square",
    "closure",
    "clr",
    "esov",
    "esov_phi_form",
    "fit",
    "fit_aitchison",
    "fit_esov",
    "fit_kl",
    "fit_ols",
    "fit_pcr_compositional_covariates",
    "generate_logistic_normal",
    "helmert_submatrix",
    "hellinger",
    "inject_zeros",
    "inverse_link",
    "jeffreys",
    "kl",
    "kl_density_summary",
    "loocv_kl",
    "loocv_predictions",
    "predict",
    "replace_zeros",
    "run_comparison",
    "select_pcr_components",
    "weighted_js",
    "__version__",
]
