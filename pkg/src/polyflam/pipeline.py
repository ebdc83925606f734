"""Experiment orchestration: scoring, outlier filtering, sweeps, training.

Seeds: every sweep point and repeat owns seeds derived through
``np.random.SeedSequence([master_seed, *tags])`` (string tags folded to ints
with crc32), so points are schedule-independent and runs are reproducible
byte for byte.  Model training only ever sees tables whose provenance flag
is "synthetic"; real rows are used exclusively for scoring.
"""

from __future__ import annotations

import csv
import json
import zlib
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import copula, forest
from .data import (
    DEFAULT_THRESHOLDS,
    FeatureTable,
    LabelThresholds,
    PolymerRecord,
    range_label,
)
from .errors import ConfigError, DomainError
from .forest import ForestModel, Hyperparams

TARGETS = ("FI", "TIG", "pHRR", "TSR", "FIGRA")

# Classifier settings for the expert-label outlier filter; fixed so the
# filter's verdict on the shipped data is reproducible.  Bootstrap is off:
# with 15 training rows, resampling starves whole classes in many trees and
# per-node feature subsampling already decorrelates them.
FILTER_HP = Hyperparams(
    n_trees=300,
    max_depth=None,
    min_samples_split=2,
    max_features="sqrt",
    bootstrap=False,
    seed=7,
)


def _derive_seeds(master: int, tags: tuple, count: int) -> list[int]:
    entropy = [int(master)]
    for tag in tags:
        entropy.append(zlib.crc32(tag.encode()) if isinstance(tag, str) else int(tag))
    return [int(s) for s in np.random.SeedSequence(entropy).generate_state(count)]


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot."""
    y_true = np.asarray(y_true, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    if y_true.shape != y_pred.shape or y_true.ndim != 1 or y_true.size == 0:
        raise DomainError("r2_score: inputs must be equal-length non-empty vectors")
    ss_tot = float(((y_true - y_true.mean()) ** 2).sum())
    if ss_tot == 0.0:
        raise DomainError("r2_score undefined: zero variance in observed values")
    ss_res = float(((y_true - y_pred) ** 2).sum())
    return 1.0 - ss_res / ss_tot


@dataclass(frozen=True)
class EvaluationReport:
    target: str
    descriptor_family: str
    r2_train_synth: float
    r2_test_real: float
    r2_test_synth: float | None
    n_synthetic: int
    top_k: int | None  # None means all features
    seed: int

    def __post_init__(self):
        for name in ("r2_train_synth", "r2_test_real", "r2_test_synth"):
            v = getattr(self, name)
            if v is not None and v > 1.0 + 1e-12:
                raise DomainError(f"{name} exceeds 1: {v}")
        if self.n_synthetic < 1:
            raise DomainError("n_synthetic must be positive")


@dataclass(frozen=True)
class SweepResult:
    axis: str  # "synthetic_size" | "top_k"
    points: tuple[tuple[int, float], ...]
    best: int

    def __post_init__(self):
        top = max(r2 for _, r2 in self.points)
        winners = [v for v, r2 in self.points if r2 == top]
        if self.best != min(winners):
            raise DomainError("SweepResult.best must be the smallest argmax")


@dataclass
class FittedTarget:
    """A trained per-target model plus everything needed to reuse it."""

    target: str
    model: ForestModel
    feature_names: list[str]
    catalog_id: str
    n_synth: int
    top_k: int | None
    seed: int
    train_target_min: float
    train_target_max: float


def expert_label_filter(
    records: list[PolymerRecord],
    features: FeatureTable,
    expert_labels: dict[str, str],
    hp: Hyperparams = FILTER_HP,
    thresholds: LabelThresholds = DEFAULT_THRESHOLDS,
) -> tuple[list[PolymerRecord], list[PolymerRecord]]:
    """Remove records whose label contradicts the FI range rule.

    A classifier is trained on the descriptor vectors of the expert-labeled
    records (exactly five per class) and labels the remaining records.  A
    record is removed when its expert-or-predicted label differs from
    ``range_label(record.fi)``.  Returns (kept, removed) in input order.
    """
    if features.n_rows != len(records):
        raise ConfigError("feature table rows must align with records")
    names = [r.name for r in records]
    unknown = sorted(set(expert_labels) - set(names))
    if unknown:
        raise ConfigError(f"expert labels name unknown polymers: {unknown}")
    per_class: dict[str, int] = {}
    for label in expert_labels.values():
        per_class[label] = per_class.get(label, 0) + 1
    if sorted(per_class) != ["H", "L", "M"] or set(per_class.values()) != {5}:
        raise ConfigError(
            f"expert labels must cover exactly 5 polymers per class, got {per_class}"
        )

    X = features.feature_matrix()
    expert_idx = [i for i, name in enumerate(names) if name in expert_labels]
    rest_idx = [i for i, name in enumerate(names) if name not in expert_labels]
    y_expert = [expert_labels[names[i]] for i in expert_idx]
    classifier = forest.fit(X[expert_idx], y_expert, forest.CLASSIFICATION, hp)
    predicted = forest.predict_labels(classifier, X[rest_idx])

    effective = {}
    for i, label in zip(expert_idx, y_expert):
        effective[i] = label
    for i, label in zip(rest_idx, predicted):
        effective[i] = label

    kept, removed = [], []
    for i, record in enumerate(records):
        if effective[i] == range_label(record.fi, thresholds):
            kept.append(record)
        else:
            removed.append(record)
    return kept, removed


def _train_on_synthetic(table: FeatureTable, hp: Hyperparams, tree_seed: int) -> ForestModel:
    if table.provenance != "synthetic":
        raise DomainError(
            f"training data must be synthetic, got provenance '{table.provenance}'"
        )
    return forest.fit(
        table.feature_matrix(),
        table.target_values(),
        forest.REGRESSION,
        replace(hp, seed=tree_seed),
    )


def _score_on(model: ForestModel, table: FeatureTable) -> float:
    return r2_score(table.target_values(), forest.predict_matrix(model, table.feature_matrix()))


def _rank_features(synth: FeatureTable, hp: Hyperparams, tree_seed: int) -> list[str]:
    ranking_model = _train_on_synthetic(synth, hp, tree_seed)
    order = np.argsort(-ranking_model.importance, kind="stable")
    names = synth.feature_names
    return [names[i] for i in order]


def synth_size_sweep(
    real_table: FeatureTable, target: str, sizes: list[int], hp: Hyperparams, seed: int
) -> SweepResult:
    """Test R^2 on real rows versus synthetic training-set size.

    One copula fit serves the whole sweep; each size owns derived seeds for
    sampling and tree construction.  Ties prefer the smaller size.
    """
    if not sizes:
        raise ConfigError("sizes must be non-empty")
    if sorted(sizes) != list(sizes) or min(sizes) < 1:
        raise ConfigError("sizes must be ascending positive counts")
    model = copula.fit(real_table)
    points = []
    for n in sizes:
        s_sample, s_tree = _derive_seeds(seed, (target, n), 2)
        synth = copula.sample(model, n, s_sample)
        trained = _train_on_synthetic(synth, hp, s_tree)
        points.append((n, _score_on(trained, real_table)))
    best = min(v for v, r2 in points if r2 == max(r for _, r in points))
    return SweepResult(axis="synthetic_size", points=tuple(points), best=best)


def top_k_sweep(
    real_table: FeatureTable,
    target: str,
    n_synth: int,
    k_values: list[int],
    hp: Hyperparams,
    seed: int,
) -> SweepResult:
    """Test R^2 versus the number of most-important descriptors kept.

    Features are ranked once by impurity importance from a forest trained on
    all features over n_synth synthetic rows; each k retrains on the top-k
    column subset.  Ties prefer the smaller k.
    """
    n_features = len(real_table.feature_names)
    if not k_values:
        raise ConfigError("k_values must be non-empty")
    if min(k_values) < 1 or max(k_values) > n_features:
        raise ConfigError(f"k_values must lie within 1..{n_features}")
    model = copula.fit(real_table)
    s_sample, s_rank = _derive_seeds(seed, (target, "rank"), 2)
    synth = copula.sample(model, n_synth, s_sample)
    ranked = _rank_features(synth, hp, s_rank)

    points = []
    for k in k_values:
        keep = ranked[:k]
        (s_tree,) = _derive_seeds(seed, (target, "topk", k), 1)
        trained = _train_on_synthetic(synth.subset_features(keep), hp, s_tree)
        points.append((k, _score_on(trained, real_table.subset_features(keep))))
    best = min(v for v, r2 in points if r2 == max(r for _, r in points))
    return SweepResult(axis="top_k", points=tuple(points), best=best)


def train_final(
    real_table: FeatureTable,
    target: str,
    n_synth: int,
    top_k: int | None,
    hp: Hyperparams,
    seed: int,
) -> tuple[FittedTarget, EvaluationReport]:
    """Train the final model on synthetic rows and report train/test R^2."""
    model = copula.fit(real_table)
    # Same derivation as repeated_eval's repeat 0, so a one-repeat evaluation
    # reproduces this training run exactly.
    s_sample, s_rank, s_tree = _derive_seeds(seed, (target, "final", 0), 3)
    synth = copula.sample(model, n_synth, s_sample)

    n_features = len(real_table.feature_names)
    if top_k is not None and not 1 <= top_k <= n_features:
        raise ConfigError(f"top_k must lie within 1..{n_features}")
    if top_k is None or top_k == n_features:
        selected = list(synth.feature_names)
    else:
        selected = _rank_features(synth, hp, s_rank)[:top_k]

    train_table = synth.subset_features(selected)
    trained = _train_on_synthetic(train_table, hp, s_tree)
    report = EvaluationReport(
        target=target,
        descriptor_family=real_table.catalog_id,
        r2_train_synth=_score_on(trained, train_table),
        r2_test_real=_score_on(trained, real_table.subset_features(selected)),
        r2_test_synth=None,
        n_synthetic=n_synth,
        top_k=top_k,
        seed=seed,
    )
    y = train_table.target_values()
    fitted = FittedTarget(
        target=target,
        model=trained,
        feature_names=selected,
        catalog_id=real_table.catalog_id,
        n_synth=n_synth,
        top_k=top_k,
        seed=seed,
        train_target_min=float(y.min()),
        train_target_max=float(y.max()),
    )
    return fitted, report


def repeated_eval(
    real_table: FeatureTable,
    target: str,
    n_synth: int,
    top_k: int | None,
    hp: Hyperparams,
    seed: int,
    n_repeats: int = 10,
    test_size: int | None = None,
) -> EvaluationReport:
    """Average R^2 over independently seeded synthetic train/test splits.

    Each repeat samples a fresh synthetic training set and a disjointly
    seeded synthetic test set, trains on the former, and scores on the test
    set and on the real rows; the three R^2 fields are arithmetic means.
    """
    if n_repeats < 1:
        raise ConfigError("n_repeats must be >= 1")
    model = copula.fit(real_table)
    n_features = len(real_table.feature_names)
    if top_k is not None and not 1 <= top_k <= n_features:
        raise ConfigError(f"top_k must lie within 1..{n_features}")

    train_scores, real_scores, synth_scores = [], [], []
    for r in range(n_repeats):
        s_train, s_rank, s_tree, s_test = _derive_seeds(seed, (target, "final", r), 4)
        synth_train = copula.sample(model, n_synth, s_train)
        synth_test = copula.sample(model, test_size or n_synth, s_test)
        if top_k is None or top_k == n_features:
            selected = list(synth_train.feature_names)
        else:
            selected = _rank_features(synth_train, hp, s_rank)[:top_k]
        train_table = synth_train.subset_features(selected)
        trained = _train_on_synthetic(train_table, hp, s_tree)
        train_scores.append(_score_on(trained, train_table))
        synth_scores.append(_score_on(trained, synth_test.subset_features(selected)))
        real_scores.append(_score_on(trained, real_table.subset_features(selected)))

    return EvaluationReport(
        target=target,
        descriptor_family=real_table.catalog_id,
        r2_train_synth=float(np.mean(train_scores)),
        r2_test_real=float(np.mean(real_scores)),
        r2_test_synth=float(np.mean(synth_scores)),
        n_synthetic=n_synth,
        top_k=top_k,
        seed=seed,
    )


@dataclass
class ExperimentConfig:
    """Settings for the train/sweep/eval commands; JSON round-trippable."""

    targets: list[str]
    sizes: list[int]
    k_values: list[int]
    n_repeats: int = 10
    hp: Hyperparams = Hyperparams()
    seed: int = 0
    catalog_id: str = "CHEM-1"
    test_size: int | None = None

    def __post_init__(self):
        bad = [t for t in self.targets if t not in TARGETS]
        if bad:
            raise ConfigError(f"unknown targets {bad}; valid: {list(TARGETS)}")

    def to_json(self) -> str:
        doc = asdict(self)
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid config JSON: {exc}") from exc
        hp = Hyperparams(**doc.pop("hp", {}))
        try:
            return cls(hp=hp, **doc)
        except TypeError as exc:
            raise ConfigError(f"invalid config: {exc}") from exc


def sweep_to_csv(result: SweepResult, path) -> None:
    """Write a sweep curve as a two-column CSV (axis value, test R^2)."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow([result.axis, "r2_test_real"])
        for value, r2 in result.points:
            writer.writerow([value, repr(r2)])


def report_to_dict(report: EvaluationReport) -> dict:
    return asdict(report)
