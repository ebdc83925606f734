"""CHEM-1 molecular descriptor catalog and computation.

The catalog is a versioned, ordered list of descriptor names; feature
indices are stable per catalog id.  Graphs must be wildcard-stripped before
descriptor computation.  Path-based indices are computed per connected
component and summed, so dot-separated structures are handled.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .chem.graph import MolGraph
from .errors import DomainError


@dataclass(frozen=True)
class DescriptorCatalog:
    catalog_id: str
    entries: tuple[tuple[str, str], ...]  # (name, definition)

    def __post_init__(self):
        names = [n for n, _ in self.entries]
        if len(set(names)) != len(names):
            raise DomainError(f"catalog {self.catalog_id}: duplicate descriptor names")

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]
    catalog_id: str


def load_catalog(path=None) -> DescriptorCatalog:
    """Load a catalog manifest; defaults to the shipped CHEM-1 file."""
    if path is None:
        raw = resources.files("polyflam.assets").joinpath("chem1.json").read_text()
    else:
        with open(path, encoding="utf-8") as f:
            raw = f.read()
    doc = json.loads(raw)
    return DescriptorCatalog(
        catalog_id=doc["catalog_id"],
        entries=tuple((e["name"], e["definition"]) for e in doc["entries"]),
    )


def default_catalog() -> DescriptorCatalog:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = load_catalog()
    return _DEFAULT


_DEFAULT: DescriptorCatalog | None = None


class _GraphContext:
    """One-pass derived quantities shared by the descriptor functions."""

    def __init__(self, g: MolGraph):
        self.graph = g
        self.heavy = [i for i, a in enumerate(g.atoms) if a.is_heavy]
        heavy_set = set(self.heavy)
        self.heavy_index = {atom: k for k, atom in enumerate(self.heavy)}
        # Heavy-atom graph adjacency (H and wildcards excluded).
        self.heavy_adj: list[list[int]] = [[] for _ in self.heavy]
        self.heavy_bonds: list[tuple[int, int, str]] = []
        for b in g.bonds:
            if b.a in heavy_set and b.b in heavy_set:
                ia, ib = self.heavy_index[b.a], self.heavy_index[b.b]
                self.heavy_adj[ia].append(ib)
                self.heavy_adj[ib].append(ia)
                self.heavy_bonds.append((ia, ib, b.order))
        self.heavy_degree = [len(n) for n in self.heavy_adj]
        self.element_counts: dict[str, int] = {}
        for a in g.atoms:
            self.element_counts[a.element] = self.element_counts.get(a.element, 0) + 1
        self.total_h = sum(a.implicit_h for a in g.atoms) + self.element_counts.get("H", 0)
        # Bond orders incident to each atom, for hybridization-style counts.
        self.unsaturated = [False] * len(g.atoms)
        for b in g.bonds:
            if b.order in ("double", "triple", "aromatic"):
                self.unsaturated[b.a] = True
                self.unsaturated[b.b] = True
        self.cyclic_bonds = self._cyclic_heavy_bonds()

    def _cyclic_heavy_bonds(self) -> set[int]:
        """Indices into heavy_bonds of bonds that lie on a cycle.

        A bond is cyclic iff its endpoints stay connected when it is removed.
        Graphs here are tiny, so the per-bond BFS is fine.
        """
        cyclic = set()
        for k, (ia, ib, _) in enumerate(self.heavy_bonds):
            seen = {ia}
            queue = deque([ia])
            while queue:
                cur = queue.popleft()
                for nxt in self.heavy_adj[cur]:
                    if cur == ia and nxt == ib:
                        # The bond under test: BFS starts at ia, so blocking
                        # this direction removes the bond (no parallel edges).
                        continue
                    if nxt not in seen:
                        seen.add(nxt)
                        queue.append(nxt)
            if ib in seen:
                cyclic.add(k)
        return cyclic

    def shortest_path_sum(self) -> float:
        total = 0
        n = len(self.heavy)
        for start in range(n):
            dist = [-1] * n
            dist[start] = 0
            queue = deque([start])
            while queue:
                cur = queue.popleft()
                for nxt in self.heavy_adj[cur]:
                    if dist[nxt] < 0:
                        dist[nxt] = dist[cur] + 1
                        queue.append(nxt)
            total += sum(d for d in dist if d > 0)
        return total / 2  # each unordered pair counted twice


def _count(ctx: _GraphContext, element: str) -> float:
    return float(ctx.element_counts.get(element, 0))


def _ratio(num: float, den: float) -> float:
    return num / den if den else 0.0


_FUNCS = {
    "molecular_weight": lambda ctx: sum(
        a.mass + a.implicit_h * 1.008 for a in ctx.graph.atoms
    ),
    "heavy_atom_count": lambda ctx: float(len(ctx.heavy)),
    "carbon_count": lambda ctx: _count(ctx, "C"),
    "nitrogen_count": lambda ctx: _count(ctx, "N"),
    "oxygen_count": lambda ctx: _count(ctx, "O"),
    "sulfur_count": lambda ctx: _count(ctx, "S"),
    "fluorine_count": lambda ctx: _count(ctx, "F"),
    "chlorine_count": lambda ctx: _count(ctx, "Cl"),
    "halogen_count": lambda ctx: sum(_count(ctx, e) for e in ("F", "Cl", "Br", "I")),
    "hydrogen_count": lambda ctx: float(ctx.total_h),
    "heteroatom_fraction": lambda ctx: _ratio(
        sum(1 for i in ctx.heavy if ctx.graph.atoms[i].element != "C"), len(ctx.heavy)
    ),
    "single_bond_count": lambda ctx: float(
        sum(1 for b in ctx.graph.bonds if b.order == "single")
    ),
    "double_bond_count": lambda ctx: float(
        sum(1 for b in ctx.graph.bonds if b.order == "double")
    ),
    "triple_bond_count": lambda ctx: float(
        sum(1 for b in ctx.graph.bonds if b.order == "triple")
    ),
    "aromatic_bond_count": lambda ctx: float(
        sum(1 for b in ctx.graph.bonds if b.order == "aromatic")
    ),
    "aromatic_atom_count": lambda ctx: float(
        sum(1 for a in ctx.graph.atoms if a.aromatic)
    ),
    "ring_count": lambda ctx: float(ctx.graph.cycle_rank()),
    "rotatable_bond_count": lambda ctx: float(
        sum(
            1
            for k, (ia, ib, order) in enumerate(ctx.heavy_bonds)
            if order == "single"
            and k not in ctx.cyclic_bonds
            and ctx.heavy_degree[ia] >= 2
            and ctx.heavy_degree[ib] >= 2
        )
    ),
    "hbd_count": lambda ctx: float(
        sum(
            1
            for i in ctx.heavy
            if ctx.graph.atoms[i].element in ("N", "O") and _h_on(ctx, i) >= 1
        )
    ),
    "hba_count": lambda ctx: _count(ctx, "N") + _count(ctx, "O"),
    "fraction_csp3": lambda ctx: _ratio(
        sum(
            1
            for i, a in enumerate(ctx.graph.atoms)
            if a.element == "C" and not ctx.unsaturated[i]
        ),
        _count(ctx, "C"),
    ),
    "branching_atom_count": lambda ctx: float(
        sum(1 for d in ctx.heavy_degree if d >= 3)
    ),
    "max_degree": lambda ctx: float(max(ctx.heavy_degree, default=0)),
    "mean_degree": lambda ctx: _ratio(sum(ctx.heavy_degree), len(ctx.heavy)),
    "mean_atomic_mass": lambda ctx: _ratio(
        sum(ctx.graph.atoms[i].mass for i in ctx.heavy), len(ctx.heavy)
    ),
    "oc_ratio": lambda ctx: _ratio(_count(ctx, "O"), _count(ctx, "C")),
    "hc_ratio": lambda ctx: _ratio(float(ctx.total_h), _count(ctx, "C")),
    "wiener_index": lambda ctx: ctx.shortest_path_sum(),
    "zagreb_m1": lambda ctx: float(sum(d * d for d in ctx.heavy_degree)),
    "zagreb_m2": lambda ctx: float(
        sum(ctx.heavy_degree[ia] * ctx.heavy_degree[ib] for ia, ib, _ in ctx.heavy_bonds)
    ),
    "wildcard_count": lambda ctx: float(ctx.graph.wildcard_count),
}


def _h_on(ctx: _GraphContext, i: int) -> int:
    explicit = sum(
        1
        for b in ctx.graph.bonds
        if i in (b.a, b.b) and ctx.graph.atoms[b.other(i)].element == "H"
    )
    return ctx.graph.atoms[i].implicit_h + explicit


def compute_descriptors(
    graph: MolGraph, catalog: DescriptorCatalog | None = None
) -> FeatureVector:
    """Evaluate every catalog descriptor on a wildcard-stripped graph."""
    catalog = catalog or default_catalog()
    if any(a.is_wildcard for a in graph.atoms):
        raise DomainError("compute_descriptors: graph still contains wildcard atoms")
    unknown = [n for n in catalog.names if n not in _FUNCS]
    if unknown:
        raise DomainError(f"catalog {catalog.catalog_id}: uncomputable entries {unknown}")
    ctx = _GraphContext(graph)
    values = tuple(float(_FUNCS[name](ctx)) for name in catalog.names)
    return FeatureVector(values=values, catalog_id=catalog.catalog_id)


def descriptor_table(graphs, catalog: DescriptorCatalog | None = None):
    """Descriptor matrix for a sequence of graphs, one row per graph.

    Row order matches input order.  Any per-graph failure aborts the whole
    table with the failing index in the message.
    """
    from .data import FeatureTable

    catalog = catalog or default_catalog()
    rows = []
    for idx, g in enumerate(graphs):
        try:
            rows.append(compute_descriptors(g, catalog).values)
        except Exception as exc:
            raise DomainError(f"descriptor_table: graph {idx}: {exc}") from exc
    matrix = np.asarray(rows, dtype=float) if rows else np.empty((0, len(catalog)))
    return FeatureTable(
        column_names=list(catalog.names),
        rows=matrix,
        catalog_id=catalog.catalog_id,
    )
