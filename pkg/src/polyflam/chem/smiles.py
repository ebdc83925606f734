"""Hand-rolled SMILES parser for the subset used by polymer repeat units.

Supported: organic-subset atoms (B, C, N, O, P, S, F, Cl, Br, I), bracket
atoms with isotope/charge/explicit H, wildcard ``*``, bonds ``- = # :``,
branches, ring closures (digit and ``%nn``), lowercase aromatic atoms and
dot-separated components.  Stereo markers (``/ \\ @``) are accepted and
ignored; no aromaticity perception or kekulization is performed.

Implicit hydrogens on unbracketed atoms follow standard valences (aromatic
bonds counted as 1.5, rounded up; an extra unit is charged to atoms written
aromatic).  Bracket atoms carry exactly their written H count.  All parse
errors report a 0-based character offset.
"""

from __future__ import annotations

import math

from ..errors import ParseError
from .graph import BOND_ORDER_VALUE, WILDCARD, Atom, Bond, MolGraph

ORGANIC_TWO = ("Cl", "Br")
ORGANIC_ONE = set("BCNOPSFI")
AROMATIC_ORGANIC = set("bcnops")
BRACKET_ELEMENTS = {"H", "B", "C", "N", "O", "F", "P", "S", "Cl", "Br", "I"}

STANDARD_VALENCES = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "H": (1,),
}

_BOND_SYMBOLS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic"}


class _RawAtom:
    __slots__ = ("element", "aromatic", "charge", "isotope", "explicit_h", "offset")

    def __init__(self, element, aromatic, charge, isotope, explicit_h, offset):
        self.element = element
        self.aromatic = aromatic
        self.charge = charge
        self.isotope = isotope
        self.explicit_h = explicit_h  # None => assign by valence rules
        self.offset = offset


def _parse_bracket(text: str, start: int) -> tuple[_RawAtom, int]:
    """Parse a bracket atom starting at ``text[start] == '['``; returns (atom, end)."""
    i = start + 1
    n = len(text)

    isotope = None
    num_start = i
    while i < n and text[i].isdigit():
        i += 1
    if i > num_start:
        isotope = int(text[num_start:i])

    if i >= n:
        raise ParseError("unterminated bracket atom", offset=start)
    aromatic = False
    if text[i] == WILDCARD:
        element = WILDCARD
        i += 1
    elif text[i].isalpha():
        # Maximal munch: an element symbol is one letter plus any lowercase
        # tail ([Si], [se] must fail as wholes, not be misread as S or s).
        j = i + 1
        while j < n and text[j].isalpha() and text[j].islower():
            j += 1
        symbol = text[i:j]
        if symbol in BRACKET_ELEMENTS:
            element = symbol
        elif len(symbol) == 1 and symbol in AROMATIC_ORGANIC:
            element = symbol.upper()
            aromatic = True
        else:
            raise ParseError(f"unknown element '{symbol}'", offset=i)
        i = j
    else:
        raise ParseError(f"unknown element '{text[i]}'", offset=i)

    while i < n and text[i] == "@":  # chirality: accepted, ignored
        i += 1

    explicit_h = 0
    if i < n and text[i] == "H" and element != "H":
        i += 1
        num_start = i
        while i < n and text[i].isdigit():
            i += 1
        explicit_h = int(text[num_start:i]) if i > num_start else 1

    charge = 0
    if i < n and text[i] in "+-":
        sign = 1 if text[i] == "+" else -1
        symbol = text[i]
        i += 1
        num_start = i
        while i < n and text[i].isdigit():
            i += 1
        if i > num_start:
            charge = sign * int(text[num_start:i])
        else:
            charge = sign
            while i < n and text[i] == symbol:
                charge += sign
                i += 1

    if i < n and text[i] == ":":  # atom class: accepted, ignored
        i += 1
        num_start = i
        while i < n and text[i].isdigit():
            i += 1
        if i == num_start:
            raise ParseError("atom class expects digits", offset=i)

    if i >= n or text[i] != "]":
        raise ParseError("unterminated bracket atom", offset=start)
    return _RawAtom(element, aromatic, charge, isotope, explicit_h, start), i + 1


def _implicit_h(atom: _RawAtom, bond_load: float, n_aromatic: int) -> int:
    if atom.explicit_h is not None:
        return atom.explicit_h
    if atom.element == WILDCARD:
        return 0
    valences = STANDARD_VALENCES[atom.element]
    if atom.aromatic:
        # Aromatic bonds count one each, plus one for ring membership.
        load = int(round(bond_load - 1.5 * n_aromatic)) + n_aromatic + 1
        for v in valences:
            if v >= load:
                return v - load
        return 0
    load = math.ceil(bond_load)
    for v in valences:
        if v >= load:
            return v - load
    raise ParseError(
        f"valence violation: {atom.element} with bond order sum {bond_load:g}",
        offset=atom.offset,
    )


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string into a molecular graph with implicit hydrogens."""
    if not text or not text.strip():
        raise ParseError("empty SMILES", offset=0)

    raw_atoms: list[_RawAtom] = []
    bonds: list[Bond] = []
    bond_keys: set[tuple[int, int]] = set()
    prev: int | None = None
    pending: str | None = None
    pending_offset = 0
    branch_stack: list[tuple[int, int]] = []  # (atom index, '(' offset)
    rings: dict[int, tuple[int, str | None, int]] = {}  # num -> (atom, bond, offset)

    def add_bond(a: int, b: int, order: str | None, offset: int) -> None:
        if a == b:
            raise ParseError("ring closure bonds an atom to itself", offset=offset)
        if order is None:
            order = (
                "aromatic"
                if raw_atoms[a].aromatic and raw_atoms[b].aromatic
                else "single"
            )
        key = (a, b) if a < b else (b, a)
        if key in bond_keys:
            raise ParseError("duplicate bond between atoms", offset=offset)
        bond_keys.add(key)
        bonds.append(Bond(key[0], key[1], order))

    def add_atom(raw: _RawAtom) -> None:
        nonlocal prev, pending
        raw_atoms.append(raw)
        idx = len(raw_atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending, raw.offset)
        elif pending is not None:
            raise ParseError("bond symbol with no preceding atom", offset=pending_offset)
        pending = None
        prev = idx

    def close_ring(num: int, offset: int) -> None:
        nonlocal pending
        if prev is None:
            raise ParseError("ring closure before any atom", offset=offset)
        if num in rings:
            other, other_bond, other_offset = rings.pop(num)
            order = pending
            if order is None:
                order = other_bond
            elif other_bond is not None and other_bond != order:
                raise ParseError(
                    f"conflicting bond orders for ring closure {num}", offset=offset
                )
            add_bond(other, prev, order, offset)
        else:
            rings[num] = (prev, pending, offset)
        pending = None

    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "(":
            if prev is None:
                raise ParseError("branch before any atom", offset=i)
            branch_stack.append((prev, i))
            i += 1
        elif c == ")":
            if not branch_stack:
                raise ParseError("unbalanced parentheses: extra ')'", offset=i)
            if pending is not None:
                raise ParseError("dangling bond before ')'", offset=pending_offset)
            prev = branch_stack.pop()[0]
            i += 1
        elif c in _BOND_SYMBOLS:
            if pending is not None:
                raise ParseError("two consecutive bond symbols", offset=i)
            pending = _BOND_SYMBOLS[c]
            pending_offset = i
            i += 1
        elif c in "/\\":
            if pending is None:
                pending = "single"  # stereo bond: geometry ignored
                pending_offset = i
            i += 1
        elif c == ".":
            if pending is not None:
                raise ParseError("bond symbol before '.'", offset=pending_offset)
            prev = None
            i += 1
        elif c == "%":
            if i + 2 >= n or not text[i + 1 : i + 3].isdigit():
                raise ParseError("'%' ring closure expects two digits", offset=i)
            close_ring(int(text[i + 1 : i + 3]), i)
            i += 3
        elif c.isdigit():
            close_ring(int(c), i)
            i += 1
        elif c == "[":
            raw, i = _parse_bracket(text, i)
            add_atom(raw)
        elif c == WILDCARD:
            add_atom(_RawAtom(WILDCARD, False, 0, None, 0, i))
            i += 1
        elif text[i : i + 2] in ORGANIC_TWO:
            add_atom(_RawAtom(text[i : i + 2], False, 0, None, None, i))
            i += 2
        elif c in ORGANIC_ONE:
            add_atom(_RawAtom(c, False, 0, None, None, i))
            i += 1
        elif c in AROMATIC_ORGANIC:
            add_atom(_RawAtom(c.upper(), True, 0, None, None, i))
            i += 1
        elif c.isspace():
            if text[i:].strip():
                raise ParseError("whitespace inside SMILES", offset=i)
            break  # trailing whitespace only
        else:
            raise ParseError(f"unexpected character '{c}'", offset=i)

    if branch_stack:
        raise ParseError(
            "unbalanced parentheses: unclosed '('", offset=branch_stack[-1][1]
        )
    if rings:
        num, (_, _, offset) = next(iter(rings.items()))
        raise ParseError(f"unmatched ring closure {num}", offset=offset)
    if pending is not None:
        raise ParseError("dangling bond at end of SMILES", offset=pending_offset)
    if not raw_atoms:
        raise ParseError("no atoms in SMILES", offset=0)

    bond_load = [0.0] * len(raw_atoms)
    n_aromatic = [0] * len(raw_atoms)
    for b in bonds:
        value = BOND_ORDER_VALUE[b.order]
        bond_load[b.a] += value
        bond_load[b.b] += value
        if b.order == "aromatic":
            n_aromatic[b.a] += 1
            n_aromatic[b.b] += 1

    atoms = []
    for idx, raw in enumerate(raw_atoms):
        h = _implicit_h(raw, bond_load[idx], n_aromatic[idx])
        atoms.append(
            Atom(
                element=raw.element,
                formal_charge=raw.charge,
                aromatic=raw.aromatic,
                implicit_h=h,
                isotope=raw.isotope,
            )
        )
    return MolGraph(atoms=atoms, bonds=bonds, source="smiles")
