import pytest

from polyflam import assets, pipeline
from polyflam.bundle import TrainedBundle, save_bundle
from polyflam.forest import Hyperparams

TINY_HP = Hyperparams(n_trees=20, max_depth=8, min_samples_split=4, max_features=1 / 3, seed=5)


@pytest.fixture(scope="session")
def tiny_bundle(tmp_path_factory):
    """A small but complete 5-target bundle for bundle/service/CLI tests."""
    targets = {}
    for target in pipeline.TARGETS:
        table = assets.build_target_table(target)
        fitted, _ = pipeline.train_final(table, target, 300, 5, TINY_HP, seed=9)
        targets[target] = fitted
    bundle = TrainedBundle(catalog_id="CHEM-1", targets=targets)
    path = tmp_path_factory.mktemp("bundle") / "tiny_bundle.json"
    save_bundle(bundle, path)
    return bundle, path


ETHANOL_PDB = b"""\
COMPND    ETHANOL
HETATM    1  C1  ETH A   1       0.000   0.000   0.000  1.00  0.00           C
HETATM    2  C2  ETH A   1       1.512   0.000   0.000  1.00  0.00           C
HETATM    3  O1  ETH A   1       2.040   1.320   0.000  1.00  0.00           O
HETATM    4  H1  ETH A   1      -0.380  -1.020   0.000  1.00  0.00           H
HETATM    5  H2  ETH A   1      -0.380   0.510   0.880  1.00  0.00           H
HETATM    6  H3  ETH A   1      -0.380   0.510  -0.880  1.00  0.00           H
HETATM    7  H4  ETH A   1       1.890  -0.510   0.880  1.00  0.00           H
HETATM    8  H5  ETH A   1       1.890  -0.510  -0.880  1.00  0.00           H
HETATM    9  H6  ETH A   1       1.690   1.800   0.770  1.00  0.00           H
CONECT    1    2    4    5
CONECT    1    6
CONECT    2    1    3    7
CONECT    2    8
CONECT    3    2    9
END
"""


@pytest.fixture
def ethanol_pdb():
    return ETHANOL_PDB
