"""Substructure patterns and backtracking subgraph matching.

The pattern language is a SMILES-like subset: element symbols, aromatic
lowercase, bond orders, branches, rings, brackets with charge/H-count,
and ``*`` for any atom.  No logical operators and no recursive patterns.
A bracket atom constrains hydrogens only when an H count is written; a
written charge must match.  Bonds written without a symbol match single
or aromatic; explicit bonds match exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

from retrokit.chem.model import BondOrder, Molecule
from retrokit.chem.parser import parse_pattern_graph
from retrokit.errors import PatternSyntaxError, SmilesSyntaxError, ValenceError


@dataclass(frozen=True)
class PatternDef:
    """Named functional-group pattern."""

    name: str
    pattern: str


@dataclass(frozen=True)
class CompiledPattern:
    source: str
    graph: Molecule
    default_bonds: frozenset[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.graph.atoms)


def compile_pattern(text: str) -> CompiledPattern:
    """Compile pattern text, raising PatternSyntaxError outside the subset."""
    try:
        graph, default_bonds = parse_pattern_graph(text)
    except SmilesSyntaxError as exc:
        raise PatternSyntaxError(f"bad pattern {text!r}: {exc}") from exc
    if len(graph.components()) != 1:
        raise PatternSyntaxError(f"pattern {text!r} must be connected")
    return CompiledPattern(
        source=text, graph=graph, default_bonds=frozenset(default_bonds)
    )


def _total_h(mol: Molecule, idx: int) -> int:
    try:
        return mol.total_h(idx)
    except ValenceError:
        return 0


def _atom_ok(
    pattern: CompiledPattern,
    p_idx: int,
    mol: Molecule,
    m_idx: int,
    exact_charge: bool,
    min_h: dict[int, int] | None,
) -> bool:
    p = pattern.graph.atoms[p_idx]
    m = mol.atoms[m_idx]
    if min_h and _total_h(mol, m_idx) < min_h.get(p_idx, 0):
        return False
    if p.is_wildcard:
        return True
    if m.is_wildcard:
        return False
    if p.element != m.element or p.aromatic != m.aromatic:
        return False
    if exact_charge or p.formal_charge != 0:
        if p.formal_charge != m.formal_charge:
            return False
    if p.explicit_h is not None and _total_h(mol, m_idx) != p.explicit_h:
        return False
    if p.isotope is not None and p.isotope != m.isotope:
        return False
    return True


def _bond_ok(
    pattern: CompiledPattern, p_a: int, p_b: int, order: BondOrder
) -> bool:
    p_bond = pattern.graph.bond_between(p_a, p_b)
    key = (p_a, p_b) if p_a < p_b else (p_b, p_a)
    if key in pattern.default_bonds:
        return order in (BondOrder.SINGLE, BondOrder.AROMATIC)
    return order == p_bond.order


def _search_order(pattern: CompiledPattern) -> list[int]:
    """BFS order so every atom after the first touches a placed one."""
    graph = pattern.graph
    order = [0]
    seen = {0}
    queue = [0]
    while queue:
        node = queue.pop(0)
        for nbr, _ in graph.neighbors(node):
            if nbr not in seen:
                seen.add(nbr)
                order.append(nbr)
                queue.append(nbr)
    return order


def find_matches(
    mol: Molecule,
    pattern: CompiledPattern,
    exact_charge: bool = False,
    min_h: dict[int, int] | None = None,
    allowed_atoms: set[int] | None = None,
) -> list[tuple[int, ...]]:
    """All injective matches of the pattern into the molecule.

    Returns tuples indexed by pattern atom; matches are deduplicated by
    the sorted set of matched molecule atoms, keeping the smallest
    assignment in pattern order, and sorted for stable output.
    ``allowed_atoms`` restricts the image to a subset of the molecule.
    """
    graph = pattern.graph
    n = len(graph.atoms)
    order = _search_order(pattern)
    assignment: dict[int, int] = {}
    used: set[int] = set()
    results: list[tuple[int, ...]] = []

    def candidates(step: int) -> list[int]:
        p_idx = order[step]
        anchored = [
            (nbr, bond)
            for nbr, bond in graph.neighbors(p_idx)
            if nbr in assignment
        ]
        if not anchored:
            pool = range(len(mol.atoms)) if allowed_atoms is None else sorted(allowed_atoms)
            return [m for m in pool if _atom_ok(pattern, p_idx, mol, m, exact_charge, min_h)]
        first_nbr, _ = anchored[0]
        pool = [nbr for nbr, _ in mol.neighbors(assignment[first_nbr])]
        out = []
        for m_idx in pool:
            if m_idx in used:
                continue
            if allowed_atoms is not None and m_idx not in allowed_atoms:
                continue
            if not _atom_ok(pattern, p_idx, mol, m_idx, exact_charge, min_h):
                continue
            ok = True
            for p_nbr, _ in graph.neighbors(p_idx):
                if p_nbr not in assignment:
                    continue
                m_bond = mol.bond_between(m_idx, assignment[p_nbr])
                if m_bond is None or not _bond_ok(pattern, p_idx, p_nbr, m_bond.order):
                    ok = False
                    break
            if ok:
                out.append(m_idx)
        return out

    def extend(step: int) -> None:
        if step == n:
            results.append(tuple(assignment[i] for i in range(n)))
            return
        p_idx = order[step]
        for m_idx in candidates(step):
            assignment[p_idx] = m_idx
            used.add(m_idx)
            extend(step + 1)
            used.discard(m_idx)
            del assignment[p_idx]

    extend(0)

    deduped: dict[tuple[int, ...], tuple[int, ...]] = {}
    for match in results:
        key = tuple(sorted(match))
        if key not in deduped or match < deduped[key]:
            deduped[key] = match
    return sorted(deduped.values())


def match_pattern(mol: Molecule, pat: PatternDef | str) -> list[tuple[int, ...]]:
    """Matches of a functional-group pattern, one tuple per hit.

    Tuple position i holds the molecule atom matched by pattern atom i.
    Raises PatternSyntaxError for patterns outside the supported subset.
    """
    text = pat.pattern if isinstance(pat, PatternDef) else pat
    return find_matches(mol, compile_pattern(text))
