import pytest

from polyflam.chem import parse_pdb, parse_smiles
from polyflam.errors import ParseError


def _atom_line(serial, name, x, y, z, element):
    return (
        f"HETATM{serial:5d} {name:<4s}LIG A   1    "
        f"{x:8.3f}{y:8.3f}{z:8.3f}  1.00  0.00          {element:>2s}"
    )


def _pdb(lines):
    return "\n".join(lines) + "\nEND\n"


def test_bond_inferred_at_covalent_distance():
    text = _pdb([_atom_line(1, "C1", 0.0, 0.0, 0.0, "C"), _atom_line(2, "C2", 1.54, 0.0, 0.0, "C")])
    g = parse_pdb(text)
    assert len(g.atoms) == 2
    assert len(g.bonds) == 1
    assert g.bonds[0].order == "single"


def test_no_bond_beyond_cutoff():
    text = _pdb([_atom_line(1, "C1", 0.0, 0.0, 0.0, "C"), _atom_line(2, "C2", 3.0, 0.0, 0.0, "C")])
    assert parse_pdb(text).bonds == []


def test_explicit_conect_wins_over_distance():
    # atoms far apart, but CONECT says bonded: no inference, exactly one bond
    text = _pdb(
        [
            _atom_line(1, "C1", 0.0, 0.0, 0.0, "C"),
            _atom_line(2, "C2", 3.0, 0.0, 0.0, "C"),
            _atom_line(3, "C3", 9.0, 0.0, 0.0, "C"),
            "CONECT    1    2",
        ]
    )
    g = parse_pdb(text)
    assert len(g.bonds) == 1
    assert g.bonds[0].key() == (0, 1)


def test_conect_deduplicates_symmetric_records():
    text = _pdb(
        [
            _atom_line(1, "C1", 0.0, 0.0, 0.0, "C"),
            _atom_line(2, "C2", 1.5, 0.0, 0.0, "C"),
            "CONECT    1    2",
            "CONECT    2    1",
        ]
    )
    assert len(parse_pdb(text).bonds) == 1


def test_hydrogens_merge_into_neighbors(ethanol_pdb):
    g = parse_pdb(ethanol_pdb)
    assert len(g.atoms) == 3  # C, C, O with hydrogens folded in
    assert [a.element for a in g.atoms] == ["C", "C", "O"]
    assert [a.implicit_h for a in g.atoms] == [3, 2, 1]
    assert g.source == "pdb"


def test_pdb_ethanol_matches_smiles_graph(ethanol_pdb):
    assert parse_pdb(ethanol_pdb).fingerprint() == parse_smiles("CCO").fingerprint()


def test_no_atom_records():
    with pytest.raises(ParseError, match="no ATOM"):
        parse_pdb("HEADER    NOTHING\nEND\n")


def test_malformed_atom_line_reports_line_number():
    text = "HETATM    1  C1  LIG A   1        bad coords here\nEND\n"
    with pytest.raises(ParseError) as err:
        parse_pdb(text)
    assert err.value.line == 1


def test_element_falls_back_to_atom_name():
    line = _atom_line(1, "CL1", 0.0, 0.0, 0.0, "  ")
    g = parse_pdb(_pdb([line]))
    assert g.atoms[0].element == "Cl"


def test_bytes_input_accepted(ethanol_pdb):
    assert len(parse_pdb(bytes(ethanol_pdb)).atoms) == 3
