import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyflam import assets, copula
from polyflam.data import FeatureTable
from polyflam.errors import FitError, LoadError


def make_table(matrix, names=None):
    matrix = np.asarray(matrix, dtype=float)
    names = names or [f"c{i}" for i in range(matrix.shape[1])]
    return FeatureTable(column_names=names, rows=matrix)


def test_constant_column_is_degenerate():
    rng = np.random.default_rng(0)
    table = make_table(np.column_stack([np.full(10, 3.5), rng.normal(size=10)]))
    model = copula.fit(table)
    assert model.marginals[0].kind == "degenerate"
    assert model.correlation[0, 1] == 0.0
    assert model.correlation[0, 0] == 1.0


def test_identical_columns_fully_correlated():
    rng = np.random.default_rng(1)
    x = rng.normal(size=20)
    model = copula.fit(make_table(np.column_stack([x, x])))
    assert model.correlation[0, 1] == pytest.approx(1.0, abs=1e-9)


def test_fit_on_pipeline_table_is_psd():
    model = copula.fit(assets.build_target_table("FI"))
    eigenvalues = np.linalg.eigvalsh(model.correlation)
    assert eigenvalues.min() > -1e-12
    assert np.allclose(np.diag(model.correlation), 1.0)


def test_fit_requires_three_rows():
    with pytest.raises(FitError):
        copula.fit(make_table([[1.0, 2.0], [3.0, 4.0]]))


def test_degenerate_model_emits_constant():
    table = make_table(np.full((5, 1), 7.25))
    model = copula.fit(table)
    out = copula.sample(model, 5, seed=0)
    assert np.array_equal(out.rows, np.full((5, 1), 7.25))


def test_sampling_is_deterministic():
    model = copula.fit(assets.build_target_table("TIG"))
    a = copula.sample(model, 500, seed=42)
    b = copula.sample(model, 500, seed=42)
    assert np.array_equal(a.rows, b.rows)
    c = copula.sample(model, 500, seed=43)
    assert not np.array_equal(a.rows, c.rows)


def test_sample_requires_positive_n():
    model = copula.fit(make_table(np.random.default_rng(0).normal(size=(5, 2))))
    with pytest.raises(FitError):
        copula.sample(model, 0, seed=0)


def test_sample_marks_synthetic_provenance():
    model = copula.fit(assets.build_target_table("FI"))
    synth = copula.sample(model, 10, seed=1)
    assert synth.provenance == "synthetic"
    assert synth.target_column == "FI"
    assert synth.column_names == model.columns


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**31 - 1),
    n_rows=st.integers(min_value=3, max_value=12),
    n_cols=st.integers(min_value=1, max_value=4),
)
def test_samples_respect_observed_bounds(seed, n_rows, n_cols):
    rng = np.random.default_rng(seed)
    table = make_table(rng.normal(scale=10, size=(n_rows, n_cols)))
    model = copula.fit(table)
    out = copula.sample(model, 200, seed=seed)
    for j in range(n_cols):
        assert out.rows[:, j].min() >= table.rows[:, j].min()
        assert out.rows[:, j].max() <= table.rows[:, j].max()


def test_monotone_scaling_stability():
    rng = np.random.default_rng(7)
    base = rng.normal(size=(15, 3)) + 5
    scaled = base.copy()
    scaled[:, 1] *= 3.0

    out_base = copula.sample(copula.fit(make_table(base)), 300, seed=9)
    out_scaled = copula.sample(copula.fit(make_table(scaled)), 300, seed=9)
    assert np.allclose(out_scaled.rows[:, 1], out_base.rows[:, 1] * 3.0, rtol=1e-9)
    assert np.allclose(out_scaled.rows[:, 0], out_base.rows[:, 0], rtol=1e-9)


def test_latent_score_correlation_recovery():
    rng = np.random.default_rng(3)
    x = rng.normal(size=40)
    y = 0.9 * x + 0.3 * rng.normal(size=40)
    model = copula.fit(make_table(np.column_stack([x, y])))
    _, z = copula.sample_with_scores(model, 10000, seed=5)
    observed = np.corrcoef(z, rowvar=False)[0, 1]
    assert observed == pytest.approx(model.correlation[0, 1], abs=0.1)


def test_sample_mean_tracks_real_mean_for_continuous_columns():
    rng = np.random.default_rng(11)
    table = make_table(rng.normal(loc=50, scale=5, size=(30, 2)))
    model = copula.fit(table)
    out = copula.sample(model, 10000, seed=13)
    for j in range(2):
        assert out.rows[:, j].mean() == pytest.approx(table.rows[:, j].mean(), rel=0.05)


def test_model_roundtrip_preserves_samples(tmp_path):
    model = copula.fit(assets.build_target_table("FIGRA"))
    path = tmp_path / "copula.json"
    copula.save_copula(model, path)
    loaded = copula.load_copula(path)
    assert np.array_equal(
        copula.sample(model, 100, seed=3).rows, copula.sample(loaded, 100, seed=3).rows
    )


def test_model_load_rejects_unknown_version(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "polyflam-copula", "version": 99}')
    with pytest.raises(LoadError, match="version"):
        copula.load_copula(path)


def test_model_load_rejects_garbage(tmp_path):
    path = tmp_path / "garbage.json"
    path.write_text("{not json")
    with pytest.raises(LoadError):
        copula.load_copula(path)
