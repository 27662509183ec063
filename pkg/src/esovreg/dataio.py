"""CSV and JSON input/output.

CSV contract: a header row is required; the response parts are named
explicitly (``--parts`` on the CLI) and every remaining numeric column
becomes a covariate, in file order. Missing values are errors. Floats are
written with 17 significant digits so a write-then-read round trip is
exact.

Fit results serialize to a small JSON document (see
``docs/fit_result.schema.json``): model tag, alr-base convention, named
coefficients, objective, and optimizer diagnostics.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np
import pandas as pd

from .compositions import CompositionalDataset, closure
from .errors import IOFailure, ValidationError
from .evalsim import SimReport
from .models import FitResult, ModelKind

FLOAT_FORMAT = "%.17g"


def _read_frame(path) -> pd.DataFrame:
    try:
        # round_trip parsing: 17-significant-digit output reads back exactly
        return pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, UnicodeDecodeError) as exc:
        raise IOFailure(f"cannot parse CSV {path}: {exc}") from exc


def read_dataset(path, parts: list[str]) -> CompositionalDataset:
    """Load a dataset from CSV: ``parts`` columns are the composition,
    remaining numeric columns become covariates."""
    df = _read_frame(path)
    missing = [c for c in parts if c not in df.columns]
    if missing:
        raise ValidationError(f"{path}: missing part columns {missing}")
    resp = df[list(parts)]
    if resp.isna().any().any():
        raise ValidationError(f"{path}: missing values in part columns")
    if not all(np.issubdtype(t, np.number) for t in resp.dtypes):
        raise ValidationError(f"{path}: non-numeric part columns")

    rest = df.drop(columns=list(parts)).select_dtypes(include=[np.number])
    if rest.isna().any().any():
        raise ValidationError(f"{path}: missing values in covariate columns")
    covariates = rest.to_numpy(dtype=float) if rest.shape[1] else None
    names = ("intercept",) + tuple(rest.columns) if rest.shape[1] else ("intercept",)
    return CompositionalDataset.from_covariates(
        resp.to_numpy(dtype=float), covariates,
        part_names=tuple(parts), covariate_names=names,
    )


def write_dataset(path, data: CompositionalDataset) -> None:
    df = pd.DataFrame(data.responses, columns=list(data.part_names))
    for j, name in enumerate(data.covariate_names[1:], start=1):
        df[name] = data.design[:, j]
    df.to_csv(path, index=False, float_format=FLOAT_FORMAT)


# -- fit results ---------------------------------------------------------------


def fit_to_dict(fit: FitResult) -> dict:
    return {
        "model": str(fit.model),
        "alr_base": "first",
        "baseline_part": fit.part_names[0] if fit.part_names else "part1",
        "parts": list(fit.part_names),
        "covariates": list(fit.covariate_names),
        "coefficients": [[float(v) for v in row] for row in fit.coefficients],
        "objective": fit.objective,
        "iterations": fit.iterations,
        "restarts": fit.restarts,
        "converged": fit.converged,
    }


def write_fit_json(path, fit: FitResult) -> None:
    Path(path).write_text(json.dumps(fit_to_dict(fit), indent=2, sort_keys=True) + "\n")


def read_fit_json(path) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise IOFailure(f"cannot parse fit JSON {path}: {exc}") from exc
    for key in ("model", "coefficients", "parts", "covariates"):
        if key not in doc:
            raise ValidationError(f"{path}: fit JSON lacks {key!r}")
    doc["coefficients"] = np.asarray(doc["coefficients"], dtype=float)
    doc["model_kind"] = ModelKind.parse(doc["model"])
    return doc


def read_covariates(path, covariate_names: list[str]) -> np.ndarray:
    """Build a design matrix from a CSV holding the named covariates
    (everything after the implicit leading intercept)."""
    df = _read_frame(path)
    wanted = [c for c in covariate_names if c != "intercept"]
    missing = [c for c in wanted if c not in df.columns]
    if missing:
        raise ValidationError(f"{path}: missing covariate columns {missing}")
    if wanted and df[wanted].isna().any().any():
        raise ValidationError(f"{path}: missing values in covariate columns")
    n = len(df)
    cols = [np.ones(n)] + [df[c].to_numpy(dtype=float) for c in wanted]
    return np.column_stack(cols)


def write_predictions(path, predictions: np.ndarray, part_names) -> None:
    pd.DataFrame(predictions, columns=list(part_names)).to_csv(
        path, index=False, float_format=FLOAT_FORMAT
    )


# -- simulation reports ---------------------------------------------------------


def write_report_json(path, report: SimReport | list[SimReport]) -> None:
    if isinstance(report, SimReport):
        doc = report.to_dict()
    else:
        doc = {"grid": [r.to_dict() for r in report]}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def write_report_csv(path, report: SimReport | list[SimReport]) -> None:
    reports = [report] if isinstance(report, SimReport) else report
    rows = []
    for rep in reports:
        for rec in rep.records:
            rows.append({
                "n": rep.config.n,
                "D": rep.config.D,
                "zero_components": rep.config.zero_injection[0]
                if rep.config.zero_injection else 0,
                "replication": rec.index,
                "esov_kl": rec.esov_kl,
                "aitchison_kl": rec.aitchison_kl,
                "error": rec.error or "",
            })
    pd.DataFrame(rows).to_csv(path, index=False, float_format=FLOAT_FORMAT)


# -- bundled and documented datasets --------------------------------------------


def smoke_dataset_path() -> Path:
    """Path to the bundled synthetic three-part smoke dataset (has zeros)."""
    return Path(resources.files("esovreg") / "data" / "smoke.csv")


def load_smoke() -> CompositionalDataset:
    return read_dataset(smoke_dataset_path(), ["a", "b", "c"])


def load_arctic_lake(path, *, log_depth: bool = True) -> CompositionalDataset:
    """Load the Arctic lake sediment CSV (columns sand, silt, clay, depth).

    The file itself is not bundled; see ``docs/datasets.md`` for the public
    sources. Parts may be percentages; they are re-closed to unit sum. The
    covariate is ``log(depth)`` by default, matching the usual analysis of
    this dataset.
    """
    df = _read_frame(path)
    needed = ["sand", "silt", "clay", "depth"]
    missing = [c for c in needed if c not in df.columns]
    if missing:
        raise ValidationError(f"{path}: missing columns {missing}")
    if df[needed].isna().any().any():
        raise ValidationError(f"{path}: missing values")
    parts = closure(df[["sand", "silt", "clay"]].to_numpy(dtype=float))
    depth = df["depth"].to_numpy(dtype=float)
    if log_depth:
        covariate, name = np.log(depth), "log_depth"
    else:
        covariate, name = depth, "depth"
    return CompositionalDataset.from_covariates(
        parts, covariate, part_names=("sand", "silt", "clay"),
        covariate_names=("intercept", name),
    )
