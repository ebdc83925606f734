"""Trained model bundles: persistence, structure prediction, database values.

A bundle carries one regression forest per flammability target plus the
catalog id, per-target feature subsets and training metadata.  The on-disk
format is versioned JSON with forests stored as explicit node lists;
loading a bundle reproduces predictions bit for bit.
"""

from __future__ import annotations

import base64
import binascii
import json
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import assets, forest
from .chem import molecular_weight, parse_pdb, parse_smiles, strip_wildcards
from .descriptors import DescriptorCatalog, compute_descriptors, default_catalog
from .errors import BundleError, ConfigError, ParseError
from .forest import ForestModel, Hyperparams
from .pipeline import TARGETS, FittedTarget

BUNDLE_FORMAT = "polyflam-bundle"
BUNDLE_VERSION = 1

_METRIC_ALIASES = {t.lower(): t for t in TARGETS}


@dataclass
class TrainedBundle:
    catalog_id: str
    targets: dict[str, FittedTarget]
    created: str = ""

    def __post_init__(self):
        if not self.created:
            self.created = datetime.now(timezone.utc).isoformat(timespec="seconds")
        unknown = sorted(set(self.targets) - set(TARGETS))
        if unknown:
            raise BundleError(f"bundle contains unknown targets: {unknown}")


@dataclass(frozen=True)
class FlammabilityPrediction:
    fi: float
    tig: float
    phrr: float
    tsr: float
    figra: float
    descriptors: dict[str, float]
    model_info: dict

    def as_dict(self) -> dict:
        return asdict(self)


def _forest_to_dict(model: ForestModel) -> dict:
    hp = asdict(model.hyperparams)
    return {
        "task": model.task,
        "feature_count": model.feature_count,
        "hyperparams": hp,
        "importance": model.importance.tolist(),
        "class_labels": list(model.class_labels) if model.class_labels else None,
        "trees": [forest.tree_to_nodes(t, model.task) for t in model.trees],
    }


def _forest_from_dict(doc: dict) -> ForestModel:
    task = doc["task"]
    labels = doc.get("class_labels")
    n_classes = len(labels) if labels else 0
    trees = [forest.tree_from_nodes(nodes, task, n_classes) for nodes in doc["trees"]]
    return ForestModel(
        trees=trees,
        task=task,
        feature_count=doc["feature_count"],
        hyperparams=Hyperparams(**doc["hyperparams"]),
        importance=np.asarray(doc["importance"], dtype=float),
        class_labels=tuple(labels) if labels else None,
    )


def save_bundle(bundle: TrainedBundle, path) -> None:
    doc = {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "catalog_id": bundle.catalog_id,
        "created": bundle.created,
        "targets": {
            name: {
                "feature_names": ft.feature_names,
                "catalog_id": ft.catalog_id,
                "n_synth": ft.n_synth,
                "top_k": ft.top_k,
                "seed": ft.seed,
                "train_target_min": ft.train_target_min,
                "train_target_max": ft.train_target_max,
                "model": _forest_to_dict(ft.model),
            }
            for name, ft in bundle.targets.items()
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f)


def load_bundle(path) -> TrainedBundle:
    try:
        with open(path, encoding="utf-8") as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleError(f"cannot read bundle: {exc}") from exc
    if doc.get("format") != BUNDLE_FORMAT:
        raise BundleError(f"not a model bundle: format {doc.get('format')!r}")
    if doc.get("version") != BUNDLE_VERSION:
        raise BundleError(
            f"unsupported bundle version {doc.get('version')!r} "
            f"(this build reads version {BUNDLE_VERSION})"
        )
    try:
        targets = {
            name: FittedTarget(
                target=name,
                model=_forest_from_dict(entry["model"]),
                feature_names=list(entry["feature_names"]),
                catalog_id=entry["catalog_id"],
                n_synth=entry["n_synth"],
                top_k=entry["top_k"],
                seed=entry["seed"],
                train_target_min=entry["train_target_min"],
                train_target_max=entry["train_target_max"],
            )
            for name, entry in doc["targets"].items()
        }
    except (KeyError, TypeError) as exc:
        raise BundleError(f"corrupt bundle: missing field {exc}") from exc
    return TrainedBundle(
        catalog_id=doc["catalog_id"], targets=targets, created=doc["created"]
    )


def bundle_metadata(bundle: TrainedBundle) -> dict:
    """Bundle description for the /models endpoint and the CLI."""
    return {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "catalog_id": bundle.catalog_id,
        "created": bundle.created,
        "targets": {
            name: {
                "n_features": len(ft.feature_names),
                "feature_names": ft.feature_names,
                "n_synth": ft.n_synth,
                "top_k": ft.top_k,
                "seed": ft.seed,
                "train_target_range": [ft.train_target_min, ft.train_target_max],
                "n_trees": len(ft.model.trees),
            }
            for name, ft in bundle.targets.items()
        },
    }


def _structure_to_graph(smiles: str | None, pdb: bytes | str | None):
    if (smiles is None) == (pdb is None):
        raise ConfigError("provide exactly one of smiles or pdb")
    if smiles is not None:
        graph = parse_smiles(smiles)
    else:
        graph = parse_pdb(pdb)
    stripped, _ = strip_wildcards(graph)
    if not stripped.atoms:
        raise ParseError("structure is empty after wildcard removal")
    return stripped


def predict_all(
    bundle: TrainedBundle,
    smiles: str | None = None,
    pdb: bytes | str | None = None,
    catalog: DescriptorCatalog | None = None,
) -> FlammabilityPrediction:
    """Parse a structure and predict all five flammability metrics."""
    catalog = catalog or default_catalog()
    if catalog.catalog_id != bundle.catalog_id:
        raise ConfigError(
            f"bundle was trained on catalog '{bundle.catalog_id}', "
            f"computed '{catalog.catalog_id}'"
        )
    missing = sorted(set(TARGETS) - set(bundle.targets))
    if missing:
        raise ConfigError(f"bundle lacks models for targets: {missing}")

    graph = _structure_to_graph(smiles, pdb)
    vector = compute_descriptors(graph, catalog)
    by_name = dict(zip(catalog.names, vector.values))

    values = {}
    for name, ft in bundle.targets.items():
        x = [by_name[f] for f in ft.feature_names]
        values[name] = forest.predict(ft.model, x)

    return FlammabilityPrediction(
        fi=values["FI"],
        tig=values["TIG"],
        phrr=values["pHRR"],
        tsr=values["TSR"],
        figra=values["FIGRA"],
        descriptors={n: float(v) for n, v in by_name.items()},
        model_info={
            "catalog_id": bundle.catalog_id,
            "created": bundle.created,
            "molecular_weight": molecular_weight(graph),
            "targets": {
                name: {
                    "n_synth": ft.n_synth,
                    "top_k": ft.top_k,
                    "train_target_range": [ft.train_target_min, ft.train_target_max],
                }
                for name, ft in bundle.targets.items()
            },
        },
    )


def decode_pdb_base64(payload: str) -> bytes:
    try:
        return base64.b64decode(payload, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise ParseError(f"invalid base64 PDB payload: {exc}") from exc


def database_comparison(metric: str) -> dict:
    """Real measured values for one metric, for client-side comparison plots.

    FI returns the 26 values retained by the expert-label filter; the cone
    metrics return all 15 fire-tested values.
    """
    canonical = _METRIC_ALIASES.get(metric.lower())
    if canonical is None:
        raise ConfigError(f"unknown metric '{metric}'; valid: {list(TARGETS)}")
    if canonical == "FI":
        kept, _ = assets.retained_fi_records()
        names = [r.name for r in kept]
        values = [r.fi for r in kept]
        source = "flammability-index dataset (26 retained polymers)"
    else:
        records = assets.load_table2()
        field_name = {"TIG": "tig", "pHRR": "phrr", "TSR": "tsr", "FIGRA": "figra"}[canonical]
        names = [r.name for r in records]
        values = [getattr(r, field_name) for r in records]
        source = "cone-calorimetry dataset (15 polymers)"
    return {
        "metric": canonical,
        "values": values,
        "names": names,
        "count": len(values),
        "source": source,
    }
