"""PDB v3.3 reader: fixed-column ATOM/HETATM records plus CONECT bonds.

When a file carries no CONECT records, bonds are inferred between atom
pairs closer than the sum of their covalent radii plus 0.45 A; inferred
bonds are always single.  Explicit hydrogen atoms are merged into their
neighbor's implicit hydrogen count so downstream descriptor code sees the
same implicit-H graphs that SMILES parsing produces.
"""

from __future__ import annotations

import math

from ..errors import ParseError
from .graph import Atom, Bond, MolGraph

# Covalent radii in Angstrom (Cordero et al. consensus values).
COVALENT_RADII = {
    "H": 0.31,
    "B": 0.84,
    "C": 0.76,
    "N": 0.71,
    "O": 0.66,
    "F": 0.57,
    "P": 1.07,
    "S": 1.05,
    "Cl": 1.02,
    "Br": 1.20,
    "I": 1.39,
}

BOND_INFERENCE_SLACK = 0.45

_KNOWN = set(COVALENT_RADII)


def _element_from_fields(element_field: str, name_field: str, line_no: int) -> str:
    symbol = element_field.strip()
    if symbol:
        symbol = symbol[0].upper() + symbol[1:].lower()
        if symbol in _KNOWN:
            return symbol
    # Fall back to the atom-name field, e.g. " CA " or "CL1".
    letters = "".join(ch for ch in name_field if ch.isalpha())
    if letters:
        two = letters[0].upper() + letters[1:2].lower()
        if len(letters) >= 2 and two in _KNOWN:
            return two
        one = letters[0].upper()
        if one in _KNOWN:
            return one
    raise ParseError(
        f"line {line_no}: cannot determine element from '{element_field or name_field}'",
        line=line_no,
    )


def parse_pdb(data: bytes | str) -> MolGraph:
    """Parse PDB text into a molecular graph."""
    text = data.decode("latin-1") if isinstance(data, (bytes, bytearray)) else data

    serials: list[int] = []
    elements: list[str] = []
    coords: list[tuple[float, float, float]] = []
    conect_pairs: set[tuple[int, int]] = set()
    saw_conect = False

    for line_no, line in enumerate(text.splitlines(), start=1):
        record = line[:6].strip().upper()
        if record in ("ATOM", "HETATM"):
            try:
                serial = int(line[6:11])
                x = float(line[30:38])
                y = float(line[38:46])
                z = float(line[46:54])
            except ValueError:
                raise ParseError(
                    f"line {line_no}: malformed {record} record", line=line_no
                ) from None
            element = _element_from_fields(line[76:78], line[12:16], line_no)
            serials.append(serial)
            elements.append(element)
            coords.append((x, y, z))
        elif record == "CONECT":
            saw_conect = True
            fields = [line[6:11], line[11:16], line[16:21], line[21:26], line[26:31]]
            parsed = []
            for f in fields:
                f = f.strip()
                if not f:
                    continue
                try:
                    parsed.append(int(f))
                except ValueError:
                    raise ParseError(
                        f"line {line_no}: malformed CONECT record", line=line_no
                    ) from None
            if len(parsed) >= 2:
                a = parsed[0]
                for b in parsed[1:]:
                    if a != b:
                        conect_pairs.add((a, b) if a < b else (b, a))

    if not serials:
        raise ParseError("no ATOM or HETATM records found")

    index_of = {s: i for i, s in enumerate(serials)}
    bonds: list[Bond] = []
    if saw_conect:
        for a, b in sorted(conect_pairs):
            if a in index_of and b in index_of:
                bonds.append(Bond(index_of[a], index_of[b], "single"))
    else:
        for i in range(len(serials)):
            ri = COVALENT_RADII[elements[i]]
            xi, yi, zi = coords[i]
            for j in range(i + 1, len(serials)):
                cutoff = ri + COVALENT_RADII[elements[j]] + BOND_INFERENCE_SLACK
                xj, yj, zj = coords[j]
                d = math.dist((xi, yi, zi), (xj, yj, zj))
                if d <= cutoff:
                    bonds.append(Bond(i, j, "single"))

    implicit_h = [0] * len(serials)
    merged: set[int] = set()
    for i, el in enumerate(elements):
        if el != "H":
            continue
        heavy = [
            b.other(i)
            for b in bonds
            if i in (b.a, b.b) and elements[b.other(i)] != "H"
        ]
        if heavy:
            implicit_h[heavy[0]] += 1
            merged.add(i)

    keep = [i for i in range(len(serials)) if i not in merged]
    remap = {old: new for new, old in enumerate(keep)}
    atoms = [Atom(element=elements[i], implicit_h=implicit_h[i]) for i in keep]
    kept_bonds = [
        Bond(remap[b.a], remap[b.b], b.order)
        for b in bonds
        if b.a in remap and b.b in remap
    ]
    return MolGraph(atoms=atoms, bonds=kept_bonds, source="pdb")
