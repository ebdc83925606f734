import json

import numpy as np
import pytest

from polyflam import forest
from polyflam.bundle import (
    TrainedBundle,
    bundle_metadata,
    database_comparison,
    load_bundle,
    predict_all,
    save_bundle,
)
from polyflam.errors import BundleError, ConfigError, ParseError

STYRENE = "*C(c1ccccc1)C*"
METRIC_FIELDS = {"FI": "fi", "TIG": "tig", "pHRR": "phrr", "TSR": "tsr", "FIGRA": "figra"}


def test_roundtrip_bit_identical_predictions(tiny_bundle, tmp_path):
    bundle, _ = tiny_bundle
    path = tmp_path / "roundtrip.json"
    save_bundle(bundle, path)
    loaded = load_bundle(path)

    rng = np.random.default_rng(0)
    for ft_name, ft in bundle.targets.items():
        X = rng.uniform(low=0.0, high=30.0, size=(10, len(ft.feature_names)))
        original = forest.predict_matrix(ft.model, X)
        restored = forest.predict_matrix(loaded.targets[ft_name].model, X)
        assert np.array_equal(original, restored)


def test_roundtrip_preserves_metadata(tiny_bundle, tmp_path):
    bundle, path = tiny_bundle
    loaded = load_bundle(path)
    assert loaded.catalog_id == bundle.catalog_id
    assert loaded.created == bundle.created
    for name, ft in bundle.targets.items():
        restored = loaded.targets[name]
        assert restored.feature_names == ft.feature_names
        assert restored.n_synth == ft.n_synth
        assert restored.top_k == ft.top_k
        assert restored.train_target_min == ft.train_target_min


def test_truncated_file_rejected(tiny_bundle, tmp_path):
    _, path = tiny_bundle
    truncated = tmp_path / "truncated.json"
    truncated.write_text(path.read_text()[: len(path.read_text()) // 2])
    with pytest.raises(BundleError):
        load_bundle(truncated)


def test_future_version_rejected(tiny_bundle, tmp_path):
    _, path = tiny_bundle
    doc = json.loads(path.read_text())
    doc["version"] = 999
    future = tmp_path / "future.json"
    future.write_text(json.dumps(doc))
    with pytest.raises(BundleError, match="version"):
        load_bundle(future)


def test_wrong_format_rejected(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"format": "something-else", "version": 1}')
    with pytest.raises(BundleError, match="format"):
        load_bundle(path)


def test_predict_styrene_within_training_ranges(tiny_bundle):
    bundle, _ = tiny_bundle
    prediction = predict_all(bundle, smiles=STYRENE)
    for metric, field in METRIC_FIELDS.items():
        value = getattr(prediction, field)
        ft = bundle.targets[metric]
        assert np.isfinite(value)
        assert ft.train_target_min <= value <= ft.train_target_max
    assert prediction.descriptors["molecular_weight"] == pytest.approx(104.15, abs=0.05)


def test_predict_pdb_structure(tiny_bundle, ethanol_pdb):
    bundle, _ = tiny_bundle
    prediction = predict_all(bundle, pdb=ethanol_pdb)
    assert all(
        np.isfinite(getattr(prediction, f)) for f in ("fi", "tig", "phrr", "tsr", "figra")
    )


def test_predict_rejects_malformed_smiles(tiny_bundle):
    bundle, _ = tiny_bundle
    with pytest.raises(ParseError) as err:
        predict_all(bundle, smiles="C1CC")
    assert err.value.offset is not None


def test_predict_requires_exactly_one_structure(tiny_bundle, ethanol_pdb):
    bundle, _ = tiny_bundle
    with pytest.raises(ConfigError):
        predict_all(bundle)
    with pytest.raises(ConfigError):
        predict_all(bundle, smiles="C", pdb=ethanol_pdb)


def test_predict_rejects_catalog_mismatch(tiny_bundle):
    bundle, _ = tiny_bundle
    other = TrainedBundle(catalog_id="OTHER-1", targets=bundle.targets, created=bundle.created)
    with pytest.raises(ConfigError, match="catalog"):
        predict_all(other, smiles="C")


def test_bundle_metadata_shape(tiny_bundle):
    bundle, _ = tiny_bundle
    meta = bundle_metadata(bundle)
    assert meta["catalog_id"] == "CHEM-1"
    assert set(meta["targets"]) == set(METRIC_FIELDS)
    assert meta["targets"]["FI"]["n_features"] == 5


def test_database_comparison_fi():
    doc = database_comparison("FI")
    assert doc["count"] == 26
    assert len(doc["values"]) == 26
    assert doc["metric"] == "FI"


@pytest.mark.parametrize("metric", ["TIG", "pHRR", "TSR", "FIGRA"])
def test_database_comparison_cone_metrics(metric):
    doc = database_comparison(metric)
    assert doc["count"] == 15
    assert doc["metric"] == metric


def test_database_comparison_case_insensitive():
    assert database_comparison("phrr")["metric"] == "pHRR"


def test_database_comparison_unknown_metric():
    with pytest.raises(ConfigError, match="unknown metric"):
        database_comparison("smoke_density")
