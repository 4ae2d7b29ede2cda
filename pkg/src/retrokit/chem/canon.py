"""Atom ranking by iterative neighborhood refinement.

The initial invariant orders atoms by degree, then element, charge,
aromaticity, hydrogen count, isotope and stereo mark; map numbers join
only when requested.  Refinement re-ranks by sorted neighbor signatures
until the partition stabilizes.  Remaining ties are broken by the
individualization search in the writer, which compares emitted strings.
"""

from __future__ import annotations

from retrokit.chem.model import Atom, BondOrder, Molecule
from retrokit.errors import ValenceError

_BOND_RANK = {
    BondOrder.SINGLE: 1,
    BondOrder.AROMATIC: 2,
    BondOrder.DOUBLE: 3,
    BondOrder.TRIPLE: 4,
}


def bond_rank(order: BondOrder) -> int:
    return _BOND_RANK[order]


def _stereo_code(atom: Atom) -> int:
    if atom.stereo_mark is None:
        return 0
    return 1 if atom.stereo_mark.value == "@" else 2


def _safe_total_h(mol: Molecule, idx: int) -> int:
    try:
        return mol.total_h(idx)
    except ValenceError:
        return -1


def initial_invariant(mol: Molecule, idx: int, use_maps: bool) -> tuple:
    atom = mol.atoms[idx]
    key = (
        mol.degree(idx),
        atom.atomic_number,
        atom.aromatic,
        atom.formal_charge,
        _safe_total_h(mol, idx),
        atom.isotope or 0,
        _stereo_code(atom),
    )
    if use_maps:
        key += (atom.map_number or 0,)
    return key


def _dense(keys: dict[int, tuple]) -> dict[int, int]:
    order = {key: rank for rank, key in enumerate(sorted(set(keys.values())))}
    return {i: order[key] for i, key in keys.items()}


def refine(mol: Molecule, ranks: dict[int, int]) -> dict[int, int]:
    """Refine ranks over the atoms present in ``ranks`` until stable."""
    members = ranks.keys()
    while True:
        keys = {}
        for i in members:
            signature = tuple(
                sorted(
                    (_BOND_RANK[bond.order], ranks[nbr])
                    for nbr, bond in mol.neighbors(i)
                    if nbr in ranks
                )
            )
            keys[i] = (ranks[i], signature)
        new = _dense(keys)
        if new == ranks:
            return ranks
        ranks = new


def initial_ranks(mol: Molecule, indices: tuple[int, ...], use_maps: bool) -> dict[int, int]:
    keys = {i: initial_invariant(mol, i, use_maps) for i in indices}
    return _dense(keys)


def tied_cell(ranks: dict[int, int]) -> list[int] | None:
    """Atoms of the lowest-rank cell with more than one member, if any."""
    by_rank: dict[int, list[int]] = {}
    for i, rank in ranks.items():
        by_rank.setdefault(rank, []).append(i)
    for rank in sorted(by_rank):
        if len(by_rank[rank]) > 1:
            return sorted(by_rank[rank])
    return None


def individualize(ranks: dict[int, int], chosen: int) -> dict[int, int]:
    """Force ``chosen`` strictly ahead of its cell mates."""
    keys = {
        i: (rank, 0 if i == chosen else 1) for i, rank in ranks.items()
    }
    return _dense(keys)
