"""SMILES emission, including canonical output.

Canonical output is a pure function of the graph's isomorphism class with
atom maps stripped (``keep_maps=True`` adds maps back as a final tie-break
invariant and emits them, which template canonicalization relies on).
Ties left by neighborhood refinement are resolved by individualizing each
candidate and keeping the lexicographically smallest emitted string.
"""

from __future__ import annotations

from dataclasses import dataclass

from retrokit.chem import canon
from retrokit.chem.model import (
    AROMATIC_ORGANIC,
    VALENCE_TABLE,
    Atom,
    Bond,
    BondOrder,
    Direction,
    Molecule,
)

_BOND_CHAR = {
    BondOrder.SINGLE: "-",
    BondOrder.DOUBLE: "=",
    BondOrder.TRIPLE: "#",
    BondOrder.AROMATIC: ":",
}


@dataclass(frozen=True)
class WriteOptions:
    """Emission style knobs.

    template_style writes pattern-like atoms: mapped atoms as ``[El:n]``
    without hydrogen counts, unmapped atoms bare, and every bond symbol
    explicit.  synthon_style renders a mapped wildcard as ``[n*]``.
    """

    keep_maps: bool = False
    template_style: bool = False
    synthon_style: bool = False


def _bare_hydrogens(mol: Molecule, idx: int) -> int | None:
    """H count the atom would get if written bare, or None if impossible."""
    atom = mol.atoms[idx]
    table = VALENCE_TABLE.get(atom.element)
    if table is None:
        return None
    used = mol.bond_valence(idx)
    for valence in table:
        if used <= valence:
            return valence - used
    return None


def _atom_token(mol: Molecule, idx: int, opts: WriteOptions) -> str:
    atom = mol.atoms[idx]
    emit_map = atom.map_number if (opts.keep_maps and atom.map_number) else None

    if atom.is_wildcard:
        if opts.synthon_style and atom.map_number is not None:
            return f"[{atom.map_number}*]"
        if atom.isotope is None and atom.formal_charge == 0 and emit_map is None:
            return "*"
        inner = f"{atom.isotope or ''}*"
        inner += _charge_text(atom.formal_charge)
        if emit_map is not None:
            inner += f":{emit_map}"
        return f"[{inner}]"

    symbol = atom.element.lower() if atom.aromatic else atom.element

    if opts.template_style:
        if emit_map is None and _template_bare_ok(atom):
            return symbol
        inner = symbol + _charge_text(atom.formal_charge)
        if emit_map is not None:
            inner += f":{emit_map}"
        return f"[{inner}]"

    total_h = atom.explicit_h
    if total_h is None:
        total_h = mol.implicit_hydrogens(idx)

    bare_ok = (
        atom.formal_charge == 0
        and atom.isotope is None
        and atom.stereo_mark is None
        and emit_map is None
        and _organic_symbol_ok(atom)
        and _bare_hydrogens(mol, idx) == total_h
    )
    if bare_ok:
        return symbol

    inner = f"{atom.isotope or ''}{symbol}"
    if atom.stereo_mark is not None:
        inner += atom.stereo_mark.value
    if total_h == 1:
        inner += "H"
    elif total_h > 1:
        inner += f"H{total_h}"
    inner += _charge_text(atom.formal_charge)
    if emit_map is not None:
        inner += f":{emit_map}"
    return f"[{inner}]"


def _charge_text(charge: int) -> str:
    if charge == 0:
        return ""
    if charge == 1:
        return "+"
    if charge == -1:
        return "-"
    return f"+{charge}" if charge > 0 else str(charge)


def _organic_symbol_ok(atom: Atom) -> bool:
    if atom.aromatic:
        return atom.element.lower() in AROMATIC_ORGANIC
    return atom.element in VALENCE_TABLE


def _template_bare_ok(atom: Atom) -> bool:
    if atom.formal_charge != 0 or atom.isotope is not None:
        return False
    return _organic_symbol_ok(atom)


def _bond_text(
    mol: Molecule, bond: Bond, from_idx: int, opts: WriteOptions
) -> str:
    if bond.direction is not None:
        mark = bond.direction
        if from_idx != bond.a:
            mark = Direction.DOWN if mark is Direction.UP else Direction.UP
        return mark.value
    both_aromatic = (
        mol.atoms[bond.a].aromatic and mol.atoms[bond.b].aromatic
    )
    if opts.template_style:
        return _BOND_CHAR[bond.order]
    if bond.order is BondOrder.SINGLE:
        return "-" if both_aromatic else ""
    if bond.order is BondOrder.AROMATIC:
        return "" if both_aromatic else ":"
    return _BOND_CHAR[bond.order]


def _emit_component(
    mol: Molecule, ranks: dict[int, int], opts: WriteOptions, root_by_map: bool = False
) -> tuple[str, tuple[int, ...]]:
    """Emit one connected component whose atoms are the keys of ``ranks``.

    Returns the text and the atom emission order.  With ``root_by_map``
    the walk roots at the lowest map number when any atom is mapped
    (canonical mapped emission), falling back to the minimal rank.
    """

    def root_key(i: int) -> tuple[int, int, int]:
        m = mol.atoms[i].map_number
        if root_by_map and m is not None:
            return (0, m, ranks[i])
        return (1, 0, ranks[i])

    start = min(ranks, key=root_key)

    # first pass: DFS tree and back edges in rank order
    children: dict[int, list[int]] = {i: [] for i in ranks}
    back_edges: dict[int, list[int]] = {i: [] for i in ranks}
    visited = {start}
    order: list[int] = []
    tree_seen: set[tuple[int, int]] = set()

    def explore(node: int) -> None:
        order.append(node)
        for nbr, bond in sorted(mol.neighbors(node), key=lambda nb: ranks[nb[0]]):
            if nbr not in ranks:
                continue
            if nbr in visited:
                if bond.key not in tree_seen:
                    back_edges[node].append(nbr)
                    back_edges[nbr].append(node)
                    tree_seen.add(bond.key)
            else:
                visited.add(nbr)
                tree_seen.add(bond.key)
                children[node].append(nbr)
                explore(nbr)

    explore(start)
    position = {atom: pos for pos, atom in enumerate(order)}

    # assign ring-closure digits in emission order
    digit_of: dict[tuple[int, int], int] = {}
    open_digits: set[int] = set()
    ring_tokens: dict[int, list[str]] = {i: [] for i in ranks}
    for node in order:
        closings = [p for p in back_edges[node] if position[p] < position[node]]
        openings = [p for p in back_edges[node] if position[p] > position[node]]
        closings.sort(key=lambda p: digit_of[(min(node, p), max(node, p))])
        openings.sort(key=lambda p: ranks[p])
        for partner in closings:
            key = (min(node, partner), max(node, partner))
            digit = digit_of[key]
            open_digits.discard(digit)
            ring_tokens[node].append(_digit_text(digit))
        for partner in openings:
            key = (min(node, partner), max(node, partner))
            digit = 1
            while digit in open_digits:
                digit += 1
            open_digits.add(digit)
            digit_of[key] = digit
            bond = mol.bond_between(node, partner)
            ring_tokens[node].append(
                _bond_text(mol, bond, node, opts) + _digit_text(digit)
            )

    def render(node: int) -> str:
        text = _atom_token(mol, node, opts) + "".join(ring_tokens[node])
        kids = children[node]
        parts = []
        for child in kids:
            bond = mol.bond_between(node, child)
            parts.append(_bond_text(mol, bond, node, opts) + render(child))
        if not parts:
            return text
        return text + "".join(f"({p})" for p in parts[:-1]) + parts[-1]

    return render(start), tuple(order)


def _digit_text(digit: int) -> str:
    return str(digit) if digit < 10 else f"%{digit:02d}"


def canonical_component(
    mol: Molecule, indices: tuple[int, ...], opts: WriteOptions
) -> tuple[str, tuple[int, ...]]:
    """Canonical text and emission order for one connected component."""
    ranks = canon.refine(mol, canon.initial_ranks(mol, indices, opts.keep_maps))

    def search(current: dict[int, int]) -> tuple[str, tuple[int, ...]]:
        cell = canon.tied_cell(current)
        if cell is None:
            return _emit_component(mol, current, opts, root_by_map=opts.keep_maps)
        best: tuple[str, tuple[int, ...]] | None = None
        for candidate in cell:
            branched = canon.refine(mol, canon.individualize(current, candidate))
            result = search(branched)
            if best is None or result[0] < best[0]:
                best = result
        return best

    return search(ranks)


def write_smiles(mol: Molecule, canonical: bool = False, options: WriteOptions | None = None) -> str:
    """Write a molecule as SMILES.

    With ``canonical=True`` the output depends only on the graph (maps
    stripped unless ``options.keep_maps``); components are individually
    canonicalized and joined in sorted order.  Otherwise atoms are emitted
    in index order and maps are kept.
    """
    opts = options or WriteOptions(keep_maps=not canonical)
    components = mol.components()
    if canonical:
        texts = sorted(
            canonical_component(mol, comp, opts)[0] for comp in components
        )
    else:
        texts = [
            _emit_component(mol, {i: i for i in comp}, opts)[0]
            for comp in components
        ]
    return ".".join(texts)


def canonical_smiles(mol: Molecule, keep_maps: bool = False) -> str:
    return write_smiles(mol, canonical=True, options=WriteOptions(keep_maps=keep_maps))
