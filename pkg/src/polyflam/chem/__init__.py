"""Chemical structure parsing: SMILES and PDB to molecular graphs."""

from .graph import (
    ATOMIC_WEIGHTS,
    WILDCARD,
    Atom,
    Bond,
    MolGraph,
    molecular_weight,
    strip_wildcards,
)
from .pdb import parse_pdb
from .smiles import parse_smiles

__all__ = [
    "ATOMIC_WEIGHTS",
    "WILDCARD",
    "Atom",
    "Bond",
    "MolGraph",
    "molecular_weight",
    "parse_pdb",
    "parse_smiles",
    "strip_wildcards",
]
