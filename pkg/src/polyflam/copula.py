"""Gaussian-copula synthesizer for feature+target tables.

Marginals are empirical CDFs with midpoint-rank plotting positions and
linear interpolation between order statistics; the dependence structure is
the Pearson correlation of the columns' normal scores, repaired to positive
definite by eigenvalue clipping.  Descriptors and the target column are
fitted jointly so sampled rows carry synthetic targets.

Randomness: numpy's PCG64 via ``np.random.default_rng(seed)``; one generator
per sample() call, so identical (model, n, seed) give bit-identical tables.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import rankdata

from .data import FeatureTable
from .errors import FitError, LoadError

EIGENVALUE_FLOOR = 1e-10
MODEL_FORMAT = "polyflam-copula"
MODEL_VERSION = 1


@dataclass(frozen=True)
class MarginalModel:
    column: str
    kind: str  # "empirical-cdf" | "degenerate"
    sorted_values: np.ndarray
    observed_min: float
    observed_max: float

    def plotting_positions(self) -> np.ndarray:
        n = len(self.sorted_values)
        return (np.arange(1, n + 1) - 0.5) / n

    def cdf(self, x: np.ndarray) -> np.ndarray:
        """Midpoint-rank CDF; tied values evaluate at the jump midpoint."""
        unique, index, counts = np.unique(
            self.sorted_values, return_index=True, return_counts=True
        )
        positions = (index + (counts - 1) / 2 + 0.5) / len(self.sorted_values)
        return np.interp(x, unique, positions)

    def inverse_cdf(self, u: np.ndarray) -> np.ndarray:
        """Quantile function interpolating the per-observation positions.

        Not collapsed over ties: this keeps the sampled mean equal to the
        fitted column mean in expectation, at the cost of atoms at tied
        values (so cdf() is only a one-sided inverse on tied columns).
        """
        return np.interp(u, self.plotting_positions(), self.sorted_values)


@dataclass(frozen=True)
class CopulaModel:
    marginals: tuple[MarginalModel, ...]
    correlation: np.ndarray  # in normal-score space, unit diagonal, PD
    fit_row_count: int
    catalog_id: str = "ingested"
    target_column: str | None = None

    @property
    def columns(self) -> list[str]:
        return [m.column for m in self.marginals]


def _nearest_pd_correlation(corr: np.ndarray) -> np.ndarray:
    """Clip eigenvalues at a small floor, then rescale to unit diagonal."""
    sym = (corr + corr.T) / 2
    w, v = np.linalg.eigh(sym)
    w = np.maximum(w, EIGENVALUE_FLOOR)
    repaired = (v * w) @ v.T
    d = np.sqrt(np.diag(repaired))
    repaired = repaired / np.outer(d, d)
    np.fill_diagonal(repaired, 1.0)
    return (repaired + repaired.T) / 2


def fit(table: FeatureTable) -> CopulaModel:
    """Fit marginals and a normal-score correlation matrix to a table."""
    if table.n_rows < 3:
        raise FitError(f"copula fit needs >= 3 rows, got {table.n_rows}")
    if not np.isfinite(table.rows).all():
        raise FitError("copula fit: non-finite values in table")

    n, d = table.rows.shape
    marginals = []
    scores = np.zeros((n, d))
    degenerate = np.zeros(d, dtype=bool)
    for j, column in enumerate(table.column_names):
        col = table.rows[:, j]
        lo, hi = float(col.min()), float(col.max())
        if lo == hi:
            marginals.append(MarginalModel(column, "degenerate", np.sort(col), lo, hi))
            degenerate[j] = True
            continue
        m = MarginalModel(column, "empirical-cdf", np.sort(col), lo, hi)
        # Midpoint-rank plotting positions with average ranks for ties.
        scores[:, j] = ndtri((rankdata(col, method="average") - 0.5) / n)
        marginals.append(m)

    corr = np.eye(d)
    active = np.flatnonzero(~degenerate)
    if len(active) >= 2:
        sub = np.corrcoef(scores[:, active], rowvar=False)
        corr[np.ix_(active, active)] = sub
    corr = _nearest_pd_correlation(corr)
    # Degenerate columns carry no dependence information by definition.
    for j in np.flatnonzero(degenerate):
        corr[j, :] = 0.0
        corr[:, j] = 0.0
        corr[j, j] = 1.0

    return CopulaModel(
        marginals=tuple(marginals),
        correlation=corr,
        fit_row_count=n,
        catalog_id=table.catalog_id,
        target_column=table.target_column,
    )


def _cholesky_factor(corr: np.ndarray) -> np.ndarray:
    jitter = 0.0
    for _ in range(4):
        try:
            return np.linalg.cholesky(corr + jitter * np.eye(len(corr)))
        except np.linalg.LinAlgError:
            jitter = max(jitter * 10, 1e-12)
    raise FitError("correlation matrix is not positive definite after repair")


def sample_with_scores(
    model: CopulaModel, n: int, seed: int
) -> tuple[FeatureTable, np.ndarray]:
    """Like sample(), also returning the latent normal-score matrix.

    The scores are the correlated standard-normal draws the rows were mapped
    from; on columns with tied observations the value-space atoms make the
    scores unrecoverable from the table, so checks of the dependence
    structure use this matrix directly.
    """
    if n < 1:
        raise FitError(f"sample size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    factor = _cholesky_factor(model.correlation)
    z = rng.standard_normal((n, len(model.marginals))) @ factor.T
    u = ndtr(z)

    out = np.empty((n, len(model.marginals)))
    for j, m in enumerate(model.marginals):
        if m.kind == "degenerate":
            out[:, j] = m.observed_min
        else:
            out[:, j] = np.clip(m.inverse_cdf(u[:, j]), m.observed_min, m.observed_max)

    table = FeatureTable(
        column_names=model.columns,
        rows=out,
        catalog_id=model.catalog_id,
        target_column=model.target_column,
        provenance="synthetic",
    )
    return table, z


def sample(model: CopulaModel, n: int, seed: int) -> FeatureTable:
    """Draw n synthetic rows; every value stays inside its observed range."""
    return sample_with_scores(model, n, seed)[0]


def save_copula(model: CopulaModel, path) -> None:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "catalog_id": model.catalog_id,
        "target_column": model.target_column,
        "fit_row_count": model.fit_row_count,
        "marginals": [
            {
                "column": m.column,
                "kind": m.kind,
                "sorted_values": m.sorted_values.tolist(),
                "observed_min": m.observed_min,
                "observed_max": m.observed_max,
            }
            for m in model.marginals
        ],
        "correlation": model.correlation.tolist(),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)


def load_copula(path) -> CopulaModel:
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except (json.JSONDecodeError, OSError) as exc:
        raise LoadError(f"cannot read copula model: {exc}") from exc
    if doc.get("format") != MODEL_FORMAT or doc.get("version") != MODEL_VERSION:
        raise LoadError(
            f"unsupported copula model: format {doc.get('format')!r} "
            f"version {doc.get('version')!r}"
        )
    marginals = tuple(
        MarginalModel(
            column=m["column"],
            kind=m["kind"],
            sorted_values=np.asarray(m["sorted_values"], dtype=float),
            observed_min=m["observed_min"],
            observed_max=m["observed_max"],
        )
        for m in doc["marginals"]
    )
    return CopulaModel(
        marginals=marginals,
        correlation=np.asarray(doc["correlation"], dtype=float),
        fit_row_count=doc["fit_row_count"],
        catalog_id=doc["catalog_id"],
        target_column=doc["target_column"],
    )
