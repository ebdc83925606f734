"""Experimental flammability datasets: records, derivations, CSV loaders.

Two reference tables ship with the package: a 32-polymer flammability-index
table (thermophysical inputs plus FI and an L/M/H label) and a 15-polymer
cone-calorimetry table (time to ignition, peak HRR, total smoke release,
fire growth rate).  All CSV files are UTF-8, comma-separated, header row,
period decimal separator.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, LoadError

LABELS = ("L", "M", "H")
UNCLASSIFIED = "unclassified"

# Published FI values carry four decimals; at least one row is truncated
# rather than rounded, so consistency is checked at 1e-4 absolute.
FI_TOLERANCE = 1e-4


@dataclass(frozen=True)
class PolymerRecord:
    name: str
    mol_wt: float  # g/mol
    cp_molar: float  # J/(mol K)
    t_ignition: float  # K
    heat_combustion: float  # J/g
    fi: float
    label: str | None = None


@dataclass(frozen=True)
class ConeRecord:
    name: str
    tig: float  # s
    phrr: float  # kW/m^2
    tsr: float  # stored as reported; the source states no unit
    figra: float  # kW/(m^2 s)


@dataclass(frozen=True)
class LabelThresholds:
    """Closed FI intervals for the low / medium / high classes."""

    low: tuple[float, float] = (0.0203, 0.0376)
    medium: tuple[float, float] = (0.0382, 0.041)
    high: tuple[float, float] = (0.0418, 0.1652)

    def __post_init__(self):
        intervals = [self.low, self.medium, self.high]
        for lo, hi in intervals:
            if not lo <= hi:
                raise DomainError(f"threshold interval reversed: [{lo}, {hi}]")
        for (_, hi), (lo, _) in zip(intervals, intervals[1:]):
            if not hi < lo:
                raise DomainError("threshold intervals must be disjoint and ordered")


DEFAULT_THRESHOLDS = LabelThresholds()


def compute_fi(
    cp_molar: float, mol_wt: float, t_ignition: float, heat_combustion: float
) -> float:
    """Flammability index: per-gram specific heat times ignition temperature
    over heat of combustion, (cp_molar / mol_wt) * t_ignition / heat_combustion.
    """
    for name, value in (
        ("cp_molar", cp_molar),
        ("mol_wt", mol_wt),
        ("t_ignition", t_ignition),
        ("heat_combustion", heat_combustion),
    ):
        if not value > 0:
            raise DomainError(f"compute_fi: {name} must be > 0, got {value}")
    return (cp_molar / mol_wt) * t_ignition / heat_combustion


def compute_figra(phrr: float, t_peak: float) -> float:
    """Fire growth rate: peak heat release rate over time to peak HRR."""
    if not phrr >= 0:
        raise DomainError(f"compute_figra: phrr must be >= 0, got {phrr}")
    if not t_peak > 0:
        raise DomainError(f"compute_figra: t_peak must be > 0, got {t_peak}")
    return phrr / t_peak


def range_label(fi: float, thresholds: LabelThresholds = DEFAULT_THRESHOLDS) -> str:
    """Class of an FI value: 'L', 'M', 'H', or 'unclassified' for gaps.

    Interval bounds are inclusive; values between or outside the intervals
    are unclassified rather than snapped to the nearest class.
    """
    if not fi > 0:
        raise DomainError(f"range_label: fi must be > 0, got {fi}")
    for label, (lo, hi) in zip(LABELS, (thresholds.low, thresholds.medium, thresholds.high)):
        if lo <= fi <= hi:
            return label
    return UNCLASSIFIED


@dataclass
class FeatureTable:
    """Ordered numeric columns (optionally one target) under a catalog id."""

    column_names: list[str]
    rows: np.ndarray
    catalog_id: str = "ingested"
    target_column: str | None = None
    provenance: str = "real"
    names: list[str] | None = None  # optional row labels

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=float)
        if self.rows.ndim != 2:
            raise DomainError("FeatureTable rows must be a 2D matrix")
        if self.rows.shape[1] != len(self.column_names):
            raise DomainError(
                f"FeatureTable: {self.rows.shape[1]} columns vs "
                f"{len(self.column_names)} column names"
            )
        if self.rows.size and not np.isfinite(self.rows).all():
            raise DomainError("FeatureTable contains non-finite values")
        if self.target_column is not None and self.target_column not in self.column_names:
            raise DomainError(f"target column '{self.target_column}' not present")
        if self.names is not None and len(self.names) != self.rows.shape[0]:
            raise DomainError("row label count does not match row count")

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def feature_names(self) -> list[str]:
        return [c for c in self.column_names if c != self.target_column]

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.column_names.index(name)]

    def feature_matrix(self) -> np.ndarray:
        idx = [i for i, c in enumerate(self.column_names) if c != self.target_column]
        return self.rows[:, idx]

    def target_values(self) -> np.ndarray:
        if self.target_column is None:
            raise DomainError("FeatureTable has no target column")
        return self.column(self.target_column)

    def with_target(self, name: str, values) -> "FeatureTable":
        values = np.asarray(values, dtype=float).reshape(-1, 1)
        if values.shape[0] != self.n_rows:
            raise DomainError("target length does not match row count")
        if name in self.column_names:
            raise DomainError(f"column '{name}' already present")
        return FeatureTable(
            column_names=self.column_names + [name],
            rows=np.hstack([self.rows, values]),
            catalog_id=self.catalog_id,
            target_column=name,
            provenance=self.provenance,
            names=self.names,
        )

    def subset_features(self, keep: list[str]) -> "FeatureTable":
        """Restrict to the named feature columns (target retained if set)."""
        missing = [c for c in keep if c not in self.feature_names]
        if missing:
            raise DomainError(f"unknown feature columns: {missing}")
        cols = list(keep) + ([self.target_column] if self.target_column else [])
        idx = [self.column_names.index(c) for c in cols]
        return FeatureTable(
            column_names=cols,
            rows=self.rows[:, idx],
            catalog_id=self.catalog_id,
            target_column=self.target_column,
            provenance=self.provenance,
            names=self.names,
        )


def _read_rows(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise LoadError(f"{path}: empty file") from None
        return [h.strip() for h in header], [row for row in reader if row]


def _float_cell(value: str, row_no: int, column: str, path) -> float:
    try:
        x = float(value)
    except ValueError:
        raise LoadError(
            f"{path}: row {row_no}: non-numeric value '{value}' in column '{column}'"
        ) from None
    if not np.isfinite(x):
        raise LoadError(f"{path}: row {row_no}: non-finite value in column '{column}'")
    return x


def load_fi_table(path) -> list[PolymerRecord]:
    """Load and validate the flammability-index table.

    Every row must be internally consistent: the stored FI must match the
    value derived from the thermophysical columns within ``FI_TOLERANCE``.
    """
    header, rows = _read_rows(path)
    required = ["name", "mol_wt", "cp_molar", "t_ignition", "heat_combustion", "fi", "label"]
    missing = [c for c in required if c not in header]
    if missing:
        raise LoadError(f"{path}: missing columns {missing}")
    if not rows:
        raise LoadError(f"{path}: no data rows")
    col = {c: header.index(c) for c in required}

    records = []
    for row_no, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise LoadError(f"{path}: row {row_no}: expected {len(header)} cells, got {len(row)}")
        name = row[col["name"]].strip()
        values = {
            c: _float_cell(row[col[c]], row_no, c, path)
            for c in ("mol_wt", "cp_molar", "t_ignition", "heat_combustion", "fi")
        }
        for c, v in values.items():
            if not v > 0:
                raise LoadError(f"{path}: row {row_no} ({name}): {c} must be > 0, got {v}")
        derived = compute_fi(
            values["cp_molar"], values["mol_wt"], values["t_ignition"], values["heat_combustion"]
        )
        if abs(derived - values["fi"]) > FI_TOLERANCE:
            raise LoadError(
                f"{path}: row {row_no} ({name}): stored fi {values['fi']} inconsistent "
                f"with derived {derived:.6f} (tolerance {FI_TOLERANCE})"
            )
        label = row[col["label"]].strip() or None
        if label is not None and label not in LABELS:
            raise LoadError(f"{path}: row {row_no} ({name}): unknown label '{label}'")
        records.append(PolymerRecord(name=name, label=label, **values))
    return records


def load_cone_table(path) -> list[ConeRecord]:
    """Load and validate the cone-calorimetry table."""
    header, rows = _read_rows(path)
    required = ["name", "tig", "phrr", "tsr", "figra"]
    missing = [c for c in required if c not in header]
    if missing:
        raise LoadError(f"{path}: missing columns {missing}")
    if not rows:
        raise LoadError(f"{path}: no data rows")
    col = {c: header.index(c) for c in required}

    records = []
    for row_no, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise LoadError(f"{path}: row {row_no}: expected {len(header)} cells, got {len(row)}")
        name = row[col["name"]].strip()
        values = {c: _float_cell(row[col[c]], row_no, c, path) for c in ("tig", "phrr", "tsr", "figra")}
        for c in ("tig", "phrr", "figra"):
            if not values[c] > 0:
                raise LoadError(f"{path}: row {row_no} ({name}): {c} must be > 0, got {values[c]}")
        if not values["tsr"] >= 0:
            raise LoadError(f"{path}: row {row_no} ({name}): tsr must be >= 0, got {values['tsr']}")
        records.append(ConeRecord(name=name, **values))
    return records


def load_feature_table(path, target_column: str | None = None, catalog_id: str = "ingested") -> FeatureTable:
    """Load a rectangular numeric feature CSV.

    A leading ``name`` column, when present, becomes row labels; every other
    column must parse to a finite float.
    """
    header, rows = _read_rows(path)
    has_names = bool(header) and header[0].lower() == "name"
    columns = header[1:] if has_names else header
    if not columns:
        raise LoadError(f"{path}: no feature columns")
    if target_column is not None and target_column not in columns:
        raise LoadError(f"{path}: target column '{target_column}' not in header")

    names = [] if has_names else None
    matrix = []
    for row_no, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise LoadError(f"{path}: row {row_no}: expected {len(header)} cells, got {len(row)}")
        cells = row[1:] if has_names else row
        if has_names:
            names.append(row[0].strip())
        matrix.append([_float_cell(v, row_no, c, path) for v, c in zip(cells, columns)])

    return FeatureTable(
        column_names=columns,
        rows=np.asarray(matrix, dtype=float) if matrix else np.empty((0, len(columns))),
        catalog_id=catalog_id,
        target_column=target_column,
        names=names,
    )


def write_feature_table(table: FeatureTable, path) -> None:
    """Write a feature table back to CSV (inverse of load_feature_table)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        header = (["name"] if table.names is not None else []) + table.column_names
        writer.writerow(header)
        for i in range(table.n_rows):
            prefix = [table.names[i]] if table.names is not None else []
            writer.writerow(prefix + [repr(v) for v in table.rows[i].tolist()])
