"""Shipped reference data: access helpers and integrity verification.

Files:
  table1.csv        32-polymer flammability-index dataset (thermo inputs,
                    FI, L/M/H label)
  table2.csv        15-polymer cone-calorimetry dataset (TIG, pHRR, TSR, FIGRA)
  expert_labels.csv the 15 expert class assignments (5 per class) used to
                    train the outlier-filter classifier
  repeat_units.csv  curated repeat-unit SMILES for every dataset polymer
  chem1.json        CHEM-1 descriptor catalog manifest
  manifest.json     row counts and sha256 checksums for all of the above
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from ..chem import parse_smiles, strip_wildcards
from ..data import (
    ConeRecord,
    FeatureTable,
    PolymerRecord,
    load_cone_table,
    load_fi_table,
)
from ..descriptors import DescriptorCatalog, default_catalog, descriptor_table
from ..errors import ConfigError, LoadError
from ..pipeline import FILTER_HP, TARGETS, expert_label_filter

_CONE_FIELDS = {"TIG": "tig", "pHRR": "phrr", "TSR": "tsr", "FIGRA": "figra"}


def asset_path(name: str) -> str:
    path = resources.files("polyflam.assets").joinpath(name)
    return str(path)


def load_table1() -> list[PolymerRecord]:
    return load_fi_table(asset_path("table1.csv"))


def load_table2() -> list[ConeRecord]:
    return load_cone_table(asset_path("table2.csv"))


def load_repeat_units() -> dict[str, str]:
    with open(asset_path("repeat_units.csv"), newline="", encoding="utf-8") as f:
        return {row["name"]: row["smiles"] for row in csv.DictReader(f)}


def load_expert_labels() -> dict[str, str]:
    with open(asset_path("expert_labels.csv"), newline="", encoding="utf-8") as f:
        return {row["name"]: row["label"] for row in csv.DictReader(f)}


@lru_cache(maxsize=None)
def _units_cache() -> dict[str, str]:
    return load_repeat_units()


def graph_for(name: str):
    """Wildcard-stripped repeat-unit graph for a dataset polymer."""
    units = _units_cache()
    if name not in units:
        raise ConfigError(f"no repeat-unit structure for polymer '{name}'")
    stripped, _ = strip_wildcards(parse_smiles(units[name]))
    return stripped


def descriptors_for(names: list[str], catalog: DescriptorCatalog | None = None) -> FeatureTable:
    table = descriptor_table([graph_for(n) for n in names], catalog)
    table.names = list(names)
    return table


@lru_cache(maxsize=None)
def retained_fi_records() -> tuple[tuple[PolymerRecord, ...], tuple[PolymerRecord, ...]]:
    """(kept, removed) partition of the FI dataset under the expert filter."""
    records = load_table1()
    features = descriptors_for([r.name for r in records])
    kept, removed = expert_label_filter(records, features, load_expert_labels(), FILTER_HP)
    return tuple(kept), tuple(removed)


def build_target_table(target: str, catalog: DescriptorCatalog | None = None) -> FeatureTable:
    """Real descriptor+target table for one prediction target.

    FI uses the 26 polymers that survive the expert-label filter; the cone
    targets use all 15 fire-tested polymers.
    """
    if target not in TARGETS:
        raise ConfigError(f"unknown target '{target}'; valid: {list(TARGETS)}")
    if target == "FI":
        kept, _ = retained_fi_records()
        names = [r.name for r in kept]
        values = [r.fi for r in kept]
    else:
        records = load_table2()
        names = [r.name for r in records]
        values = [getattr(r, _CONE_FIELDS[target]) for r in records]
    return descriptors_for(names, catalog).with_target(target, values)


@dataclass(frozen=True)
class AssetCheck:
    name: str
    ok: bool
    detail: str


@dataclass(frozen=True)
class AssetReport:
    checks: tuple[AssetCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[AssetCheck]:
        return [c for c in self.checks if not c.ok]


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        digest.update(f.read())
    return digest.hexdigest()


def _csv_data_rows(path: str) -> int:
    with open(path, newline="", encoding="utf-8") as f:
        return max(0, sum(1 for _ in csv.reader(f)) - 1)


def verify_assets() -> AssetReport:
    """Checksum, row-count and consistency verification of shipped data."""
    checks: list[AssetCheck] = []

    def add(name: str, ok: bool, detail: str = "") -> None:
        checks.append(AssetCheck(name, ok, detail))

    try:
        with open(asset_path("manifest.json"), encoding="utf-8") as f:
            manifest = json.load(f)
        add("manifest", True, f"{len(manifest['files'])} files listed")
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        add("manifest", False, str(exc))
        return AssetReport(tuple(checks))

    for entry in manifest["files"]:
        name = entry["name"]
        try:
            path = asset_path(name)
            digest = _sha256(path)
            if digest != entry["sha256"]:
                add(f"checksum:{name}", False, f"sha256 {digest[:12]}... != manifest")
                continue
            add(f"checksum:{name}", True, digest[:12])
            if name.endswith(".csv"):
                rows = _csv_data_rows(path)
                add(f"rows:{name}", rows == entry["rows"], f"{rows} vs {entry['rows']}")
            elif name == "chem1.json":
                n = len(default_catalog())
                add(f"rows:{name}", n == entry["rows"], f"{n} vs {entry['rows']}")
        except OSError as exc:
            add(f"checksum:{name}", False, str(exc))

    try:
        records = load_table1()
        add("table1:load", len(records) == 32, f"{len(records)} records, FI-consistent")
    except LoadError as exc:
        add("table1:load", False, str(exc))
        records = []

    try:
        cone = load_table2()
        add("table2:load", len(cone) == 15, f"{len(cone)} records")
    except LoadError as exc:
        add("table2:load", False, str(exc))
        cone = []

    try:
        expert = load_expert_labels()
        counts: dict[str, int] = {}
        for label in expert.values():
            counts[label] = counts.get(label, 0) + 1
        structure_ok = len(expert) == 15 and set(counts.values()) == {5}
        add("expert_labels:structure", structure_ok, f"{counts}")
        known = {r.name for r in records}
        stray = sorted(set(expert) - known)
        add("expert_labels:names", not stray, f"unknown: {stray}" if stray else "all known")
    except OSError as exc:
        add("expert_labels:structure", False, str(exc))

    try:
        units = load_repeat_units()
        for source_name, names in (
            ("table1", [r.name for r in records]),
            ("table2", [r.name for r in cone]),
        ):
            missing = sorted(set(names) - set(units))
            add(
                f"repeat_units:cover-{source_name}",
                not missing,
                f"missing: {missing}" if missing else f"{len(names)} covered",
            )
        bad = []
        for name, smiles in units.items():
            try:
                strip_wildcards(parse_smiles(smiles))
            except Exception:
                bad.append(name)
        add("repeat_units:parse", not bad, f"unparseable: {bad}" if bad else "all parse")
    except OSError as exc:
        add("repeat_units:parse", False, str(exc))

    return AssetReport(tuple(checks))
