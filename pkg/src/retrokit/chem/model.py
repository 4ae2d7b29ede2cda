"""Molecular graph model: atoms, bonds, molecules.

Molecules are immutable once built.  Structural edits (map stripping,
bond cleavage, fragment extraction) return new ``Molecule`` values.
Hydrogen counts on organic-subset atoms are implicit and derived from a
fixed valence table; bracket atoms carry an explicit count.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from retrokit.errors import ValenceError


class BondOrder(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"


class Stereo(enum.Enum):
    CLOCKWISE = "@@"
    COUNTERCLOCKWISE = "@"


class Direction(enum.Enum):
    UP = "/"
    DOWN = "\\"


#: Integer valence contribution of each bond order.  Aromatic bonds count 1;
#: aromatic C/N/P additionally absorb one shared pi bond (see implicit_hydrogens).
BOND_VALENCE = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 1,
}

#: Allowed valences for implicit-hydrogen derivation on bare atoms.
VALENCE_TABLE: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

ORGANIC_SUBSET = set(VALENCE_TABLE)
AROMATIC_ORGANIC = {"b", "c", "n", "o", "p", "s"}

#: Elements that take one extra shared pi bond when aromatic (pyridine-type);
#: aromatic O/S donate a lone pair instead and get no extra valence.
AROMATIC_PI_ELEMENTS = {"C", "N", "P"}

ELEMENTS = {
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
    "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U", "Np", "Pu",
}

ATOMIC_NUMBER = {
    symbol: number
    for number, symbol in enumerate(
        [
            "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
            "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
            "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
            "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
            "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
            "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
            "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
            "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
            "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
            "Pa", "U", "Np", "Pu",
        ],
        start=1,
    )
}


@dataclass(frozen=True)
class Atom:
    """One heavy atom (or ``*`` placeholder) of a molecular graph.

    ``explicit_h`` is set only for atoms parsed from (or destined for)
    bracket notation; bare organic-subset atoms derive hydrogens from the
    valence table.
    """

    element: str = ""
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: int | None = None
    isotope: int | None = None
    map_number: int | None = None
    is_wildcard: bool = False
    stereo_mark: Stereo | None = None

    def __post_init__(self) -> None:
        if self.map_number is not None and self.map_number < 1:
            raise ValueError("map_number must be >= 1")
        if self.is_wildcard and self.element:
            raise ValueError("wildcard atoms carry no element symbol")
        if self.explicit_h is not None and self.explicit_h < 0:
            raise ValueError("explicit_h must be non-negative")

    @property
    def atomic_number(self) -> int:
        if self.is_wildcard:
            return 0
        return ATOMIC_NUMBER.get(self.element, 0)


@dataclass(frozen=True)
class Bond:
    """Edge between two atom indices.

    ``direction`` is the parsed ``/`` or ``\\`` mark, read relative to the
    stored ``(a, b)`` endpoint order; writers flip it when emitting the
    bond the other way round.
    """

    a: int
    b: int
    order: BondOrder = BondOrder.SINGLE
    direction: Direction | None = None

    def __post_init__(self) -> None:
        if self.a == self.b:
            raise ValueError("bond endpoints must be distinct")

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)

    def other(self, idx: int) -> int:
        if idx == self.a:
            return self.b
        if idx == self.b:
            return self.a
        raise ValueError(f"atom {idx} is not an endpoint of this bond")


@dataclass(frozen=True)
class Molecule:
    """Simple undirected molecular graph, possibly with several components."""

    atoms: tuple[Atom, ...]
    bonds: tuple[Bond, ...]
    source_text: str = ""
    _adjacency: dict[int, tuple[tuple[int, Bond], ...]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        seen: set[tuple[int, int]] = set()
        for bond in self.bonds:
            if not (0 <= bond.a < len(self.atoms) and 0 <= bond.b < len(self.atoms)):
                raise ValueError("bond endpoint out of range")
            if bond.key in seen:
                raise ValueError(f"duplicate bond between atoms {bond.key}")
            seen.add(bond.key)
        adj: dict[int, list[tuple[int, Bond]]] = {i: [] for i in range(len(self.atoms))}
        for bond in self.bonds:
            adj[bond.a].append((bond.b, bond))
            adj[bond.b].append((bond.a, bond))
        object.__setattr__(
            self, "_adjacency", {i: tuple(nbrs) for i, nbrs in adj.items()}
        )

    def __len__(self) -> int:
        return len(self.atoms)

    def neighbors(self, idx: int) -> tuple[tuple[int, Bond], ...]:
        return self._adjacency[idx]

    def degree(self, idx: int) -> int:
        return len(self._adjacency[idx])

    def bond_between(self, a: int, b: int) -> Bond | None:
        for nbr, bond in self._adjacency[a]:
            if nbr == b:
                return bond
        return None

    def bond_valence(self, idx: int) -> int:
        used = sum(BOND_VALENCE[bond.order] for _, bond in self._adjacency[idx])
        atom = self.atoms[idx]
        if atom.aromatic and atom.element in AROMATIC_PI_ELEMENTS:
            table = VALENCE_TABLE.get(atom.element, ())
            if table and used + 1 <= max(table):
                used += 1
        return used

    def implicit_hydrogens(self, idx: int) -> int:
        """Hydrogen count a bare organic-subset atom carries implicitly.

        Bracket atoms return their explicit count; wildcards have none.
        Raises ValenceError when the bonded valence exceeds the largest
        table entry for a bare atom.
        """
        atom = self.atoms[idx]
        if atom.is_wildcard:
            return 0
        if atom.explicit_h is not None:
            return atom.explicit_h
        table = VALENCE_TABLE.get(atom.element)
        if table is None:
            return 0
        used = self.bond_valence(idx)
        for valence in table:
            if used <= valence:
                return valence - used
        raise ValenceError(
            f"atom {idx} ({atom.element}) uses valence {used}, "
            f"exceeding allowed {table}"
        )

    def total_h(self, idx: int) -> int:
        return self.implicit_hydrogens(idx)

    def components(self) -> list[tuple[int, ...]]:
        """Connected components as sorted index tuples, in first-atom order."""
        seen: set[int] = set()
        out: list[tuple[int, ...]] = []
        for start in range(len(self.atoms)):
            if start in seen:
                continue
            stack = [start]
            comp = []
            seen.add(start)
            while stack:
                node = stack.pop()
                comp.append(node)
                for nbr, _ in self._adjacency[node]:
                    if nbr not in seen:
                        seen.add(nbr)
                        stack.append(nbr)
            out.append(tuple(sorted(comp)))
        return out

    def ring_count(self) -> int:
        """Cycle rank: bonds - atoms + connected components."""
        return len(self.bonds) - len(self.atoms) + len(self.components())

    def subgraph(self, indices: list[int] | tuple[int, ...]) -> Molecule:
        """Induced subgraph on ``indices``, preserving their relative order."""
        index_map = {old: new for new, old in enumerate(indices)}
        atoms = tuple(self.atoms[i] for i in indices)
        bonds = tuple(
            replace(bond, a=index_map[bond.a], b=index_map[bond.b])
            for bond in self.bonds
            if bond.a in index_map and bond.b in index_map
        )
        return Molecule(atoms=atoms, bonds=bonds)

    def with_atoms(self, atoms: tuple[Atom, ...]) -> Molecule:
        return Molecule(atoms=atoms, bonds=self.bonds, source_text=self.source_text)

    def map_numbers(self) -> set[int]:
        return {a.map_number for a in self.atoms if a.map_number is not None}

    def atom_by_map(self, map_number: int) -> int | None:
        for idx, atom in enumerate(self.atoms):
            if atom.map_number == map_number:
                return idx
        return None


def strip_maps(mol: Molecule) -> Molecule:
    """Drop every atom-map number; the graph is otherwise unchanged."""
    atoms = tuple(
        replace(a, map_number=None) if a.map_number is not None else a
        for a in mol.atoms
    )
    return Molecule(atoms=atoms, bonds=mol.bonds, source_text=mol.source_text)


def merge(parts: list[Molecule], source_text: str = "") -> Molecule:
    """Disjoint union of several molecules into one multi-component graph."""
    atoms: list[Atom] = []
    bonds: list[Bond] = []
    for part in parts:
        offset = len(atoms)
        atoms.extend(part.atoms)
        bonds.extend(
            replace(b, a=b.a + offset, b=b.b + offset) for b in part.bonds
        )
    return Molecule(atoms=tuple(atoms), bonds=tuple(bonds), source_text=source_text)
