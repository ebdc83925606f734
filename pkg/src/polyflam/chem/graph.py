"""Molecular graphs for polymer repeat units.

Repeat units carry wildcard atoms (``*``) at the chain attachment points;
they have zero mass and are stripped before descriptor computation, leaving
the open valences uncapped so that formula weights match per-repeat-unit
conventions (CH2 for polyethylene, CF2 for PTFE).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from ..errors import DomainError

WILDCARD = "*"

# 2021 IUPAC abridged standard atomic weights, g/mol.
ATOMIC_WEIGHTS = {
    "H": 1.008,
    "B": 10.81,
    "C": 12.011,
    "N": 14.007,
    "O": 15.999,
    "F": 18.998,
    "P": 30.974,
    "S": 32.06,
    "Cl": 35.45,
    "Br": 79.904,
    "I": 126.904,
    WILDCARD: 0.0,
}

BOND_ORDER_VALUE = {"single": 1.0, "double": 2.0, "triple": 3.0, "aromatic": 1.5}


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    aromatic: bool = False
    implicit_h: int = 0
    isotope: int | None = None

    @property
    def is_wildcard(self) -> bool:
        return self.element == WILDCARD

    @property
    def is_heavy(self) -> bool:
        return self.element not in ("H", WILDCARD)

    @property
    def mass(self) -> float:
        return ATOMIC_WEIGHTS[self.element]


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: str = "single"

    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class MolGraph:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    source: str = "smiles"
    # Number of wildcard attachment points removed by strip_wildcards;
    # zero until stripping happens.
    wildcard_count: int = 0

    def neighbors(self, idx: int) -> list[int]:
        return [b.other(idx) for b in self.bonds if idx in (b.a, b.b)]

    def adjacency(self) -> list[list[tuple[int, str]]]:
        adj: list[list[tuple[int, str]]] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.a].append((b.b, b.order))
            adj[b.b].append((b.a, b.order))
        return adj

    def degree(self, idx: int) -> int:
        return sum(1 for b in self.bonds if idx in (b.a, b.b))

    def connected_components(self) -> list[list[int]]:
        adj = self.adjacency()
        seen = [False] * len(self.atoms)
        comps = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            comp = []
            queue = deque([start])
            seen[start] = True
            while queue:
                i = queue.popleft()
                comp.append(i)
                for j, _ in adj[i]:
                    if not seen[j]:
                        seen[j] = True
                        queue.append(j)
            comps.append(comp)
        return comps

    def cycle_rank(self) -> int:
        """Number of independent rings: bonds - atoms + components."""
        if not self.atoms:
            return 0
        return len(self.bonds) - len(self.atoms) + len(self.connected_components())

    def fingerprint(self, rounds: int = 4) -> tuple:
        """Order-independent structural fingerprint (iterative relabeling).

        Two graphs that differ only in atom numbering produce equal
        fingerprints; used for round-trip and isomorphism checks.
        """
        adj = self.adjacency()
        labels = [
            (a.element, a.formal_charge, a.aromatic, a.implicit_h, a.isotope)
            for a in self.atoms
        ]
        for _ in range(rounds):
            labels = [
                (labels[i], tuple(sorted((order, labels[j]) for j, order in adj[i])))
                for i in range(len(self.atoms))
            ]
        return tuple(sorted(map(hash, labels)))


def strip_wildcards(graph: MolGraph) -> tuple[MolGraph, int]:
    """Remove wildcard atoms and their bonds; neighbors gain no hydrogens.

    Returns the stripped graph (with ``wildcard_count`` recorded on it)
    and the number of wildcards removed.
    """
    keep = [i for i, a in enumerate(graph.atoms) if not a.is_wildcard]
    removed = len(graph.atoms) - len(keep)
    if removed == 0:
        return graph, 0
    remap = {old: new for new, old in enumerate(keep)}
    atoms = [graph.atoms[i] for i in keep]
    bonds = [
        Bond(remap[b.a], remap[b.b], b.order)
        for b in graph.bonds
        if b.a in remap and b.b in remap
    ]
    stripped = MolGraph(
        atoms=atoms,
        bonds=bonds,
        source=graph.source,
        wildcard_count=graph.wildcard_count + removed,
    )
    return stripped, removed


def molecular_weight(graph: MolGraph) -> float:
    """Formula weight: atomic weights plus implicit hydrogens at 1.008."""
    for i, a in enumerate(graph.atoms):
        if a.is_wildcard:
            raise DomainError(f"molecular_weight: wildcard atom at index {i}; strip first")
    return sum(a.mass + a.implicit_h * ATOMIC_WEIGHTS["H"] for a in graph.atoms)
