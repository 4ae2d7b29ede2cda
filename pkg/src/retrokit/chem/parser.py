"""SMILES reader for the supported grammar subset.

Supported: organic-subset atoms (B, C, N, O, P, S, F, Cl, Br, I and
aromatic b, c, n, o, p, s), bracket atoms
``[isotope? symbol (@|@@)? H<d>? charge? :map?]``, the ``*`` wildcard,
branches, ring-closure digits and ``%nn``, bond symbols ``- = # : / \\``
and dot-separated components.  Anything else raises SmilesSyntaxError;
ring closures may not cross a dot.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace

from retrokit.chem.model import (
    AROMATIC_ORGANIC,
    ELEMENTS,
    Atom,
    Bond,
    BondOrder,
    Direction,
    Molecule,
    Stereo,
)
from retrokit.errors import SmilesSyntaxError

BOND_SYMBOLS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
}

_TWO_LETTER_ORGANIC = ("Cl", "Br")

_BRACKET_RE = re.compile(
    r"""^
    (?P<isotope>\d+)?
    (?P<symbol>\*|[A-Z][a-z]?|[bcnops](?:e)?)
    (?P<stereo>@{1,2})?
    (?P<hcount>H\d*)?
    (?P<charge>\+{1,2}|-{1,2}|\+\d+|-\d+)?
    (?::(?P<map>\d+))?
    $""",
    re.VERBOSE,
)


@dataclass
class _PendingBond:
    order: BondOrder | None = None
    direction: Direction | None = None
    explicit: bool = False


def parse_bracket_atom(body: str, position: int = 0, pattern: bool = False) -> Atom:
    """Parse the inside of a bracket atom.

    With ``pattern=True`` an omitted H count stays None (unconstrained);
    otherwise it defaults to 0 per the SMILES reading of bracket atoms.
    """
    match = _BRACKET_RE.match(body)
    if match is None:
        raise SmilesSyntaxError(f"malformed bracket atom [{body}]", position)
    symbol = match.group("symbol")
    aromatic = False
    is_wildcard = symbol == "*"
    element = ""
    if not is_wildcard:
        if symbol[0].islower():
            if symbol not in AROMATIC_ORGANIC:
                raise SmilesSyntaxError(
                    f"unsupported aromatic symbol '{symbol}'", position
                )
            aromatic = True
            element = symbol.upper() if len(symbol) == 1 else symbol.capitalize()
        else:
            element = symbol
        if element not in ELEMENTS:
            raise SmilesSyntaxError(f"unknown element '{symbol}'", position)

    stereo = None
    if match.group("stereo"):
        stereo = Stereo.CLOCKWISE if match.group("stereo") == "@@" else Stereo.COUNTERCLOCKWISE

    hcount: int | None
    h_text = match.group("hcount")
    if h_text is None:
        hcount = None if pattern else 0
    elif h_text == "H":
        hcount = 1
    else:
        hcount = int(h_text[1:])

    charge = 0
    c_text = match.group("charge")
    if c_text:
        if c_text in ("+", "++", "-", "--"):
            charge = c_text.count("+") - c_text.count("-")
        else:
            charge = int(c_text) if c_text[0] == "+" else -int(c_text[1:])
    if is_wildcard and hcount:
        raise SmilesSyntaxError("wildcard atoms carry no hydrogens", position)

    isotope = int(match.group("isotope")) if match.group("isotope") else None
    map_number = int(match.group("map")) if match.group("map") else None
    if map_number is not None and map_number < 1:
        raise SmilesSyntaxError("atom map numbers start at 1", position)

    return Atom(
        element=element,
        aromatic=aromatic,
        formal_charge=charge,
        explicit_h=hcount,
        isotope=isotope,
        map_number=map_number,
        is_wildcard=is_wildcard,
        stereo_mark=stereo,
    )


class _Reader:
    """Single pass over the SMILES text building atoms and bonds."""

    def __init__(self, text: str, pattern: bool = False):
        self.text = text
        self.pos = 0
        self.pattern = pattern
        self.atoms: list[Atom] = []
        self.bonds: list[Bond] = []
        self.bond_seen: set[tuple[int, int]] = set()
        # bond marked "default" (no symbol written) for pattern semantics
        self.default_bonds: set[tuple[int, int]] = set()
        self.anchor: int | None = None
        self.branch_stack: list[int | None] = []
        self.pending = _PendingBond()
        self.open_rings: dict[int, tuple[int, _PendingBond, int]] = {}

    def error(self, reason: str) -> SmilesSyntaxError:
        return SmilesSyntaxError(reason, self.pos)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        return ch

    def run(self) -> Molecule:
        if not self.text:
            raise self.error("empty SMILES")
        while self.pos < len(self.text):
            ch = self.peek()
            if ch == "[":
                self.read_bracket()
            elif ch == "*":
                self.take()
                self.add_atom(Atom(is_wildcard=True))
            elif ch.isalpha():
                self.read_organic()
            elif ch in BOND_SYMBOLS:
                self.read_bond_symbol()
            elif ch in "/\\":
                self.read_direction()
            elif ch == "(":
                self.take()
                if self.anchor is None:
                    raise self.error("branch before any atom")
                if self.pending.order is not None or self.pending.direction:
                    raise self.error("bond symbol before branch open")
                self.branch_stack.append(self.anchor)
            elif ch == ")":
                self.take()
                if not self.branch_stack:
                    raise self.error("unmatched ')'")
                self.anchor = self.branch_stack.pop()
            elif ch.isdigit():
                self.take()
                self.close_or_open_ring(int(ch))
            elif ch == "%":
                self.take()
                digits = self.text[self.pos : self.pos + 2]
                if len(digits) != 2 or not digits.isdigit():
                    raise self.error("'%' ring closure needs two digits")
                self.pos += 2
                self.close_or_open_ring(int(digits))
            elif ch == ".":
                self.take()
                self.end_component()
            else:
                raise self.error(f"unexpected character {ch!r}")
        self.end_component(final=True)
        if self.branch_stack:
            raise self.error("unclosed branch '('")
        return Molecule(
            atoms=tuple(self.atoms), bonds=tuple(self.bonds), source_text=self.text
        )

    def end_component(self, final: bool = False) -> None:
        if self.open_rings:
            labels = sorted(self.open_rings)
            raise self.error(f"unclosed ring bond {labels[0]}")
        if self.pending.order is not None or self.pending.direction:
            raise self.error("dangling bond symbol")
        if self.branch_stack:
            raise self.error("dot inside a branch")
        if not final and self.anchor is None:
            raise self.error("empty component before '.'")
        if final and self.anchor is None and not self.atoms:
            raise self.error("empty SMILES")
        self.anchor = None

    def read_bracket(self) -> None:
        start = self.pos
        self.take()
        end = self.text.find("]", self.pos)
        if end < 0:
            raise SmilesSyntaxError("unterminated bracket atom", start)
        body = self.text[self.pos : end]
        self.pos = end + 1
        atom = parse_bracket_atom(body, start, pattern=self.pattern)
        self.add_atom(atom)

    def read_organic(self) -> None:
        start = self.pos
        ch = self.take()
        if ch.isupper():
            symbol = ch
            if ch + self.peek() in _TWO_LETTER_ORGANIC:
                symbol = ch + self.take()
            if symbol not in ("B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"):
                raise SmilesSyntaxError(
                    f"element '{symbol}' needs bracket notation", start
                )
            self.add_atom(Atom(element=symbol))
        else:
            if ch not in AROMATIC_ORGANIC:
                raise SmilesSyntaxError(f"unexpected character {ch!r}", start)
            self.add_atom(Atom(element=ch.upper(), aromatic=True))

    def read_bond_symbol(self) -> None:
        if self.pending.order is not None:
            raise self.error("doubled bond symbol")
        self.pending.order = BOND_SYMBOLS[self.take()]
        self.pending.explicit = True

    def read_direction(self) -> None:
        if self.pending.order is not None:
            raise self.error("bond symbol before directional mark")
        mark = self.take()
        self.pending.order = BondOrder.SINGLE
        self.pending.direction = Direction.UP if mark == "/" else Direction.DOWN
        self.pending.explicit = True

    def resolve_order(self, pending: _PendingBond, a: int, b: int) -> BondOrder:
        if pending.order is not None:
            return pending.order
        if self.atoms[a].aromatic and self.atoms[b].aromatic:
            return BondOrder.AROMATIC
        return BondOrder.SINGLE

    def add_bond(self, a: int, b: int, pending: _PendingBond) -> None:
        key = (a, b) if a < b else (b, a)
        if a == b:
            raise self.error("ring bond closes onto its own atom")
        if key in self.bond_seen:
            raise self.error(f"duplicate bond between atoms {key}")
        order = self.resolve_order(pending, a, b)
        self.bonds.append(Bond(a=a, b=b, order=order, direction=pending.direction))
        self.bond_seen.add(key)
        if not pending.explicit:
            self.default_bonds.add(key)

    def add_atom(self, atom: Atom) -> None:
        idx = len(self.atoms)
        self.atoms.append(atom)
        if self.anchor is not None:
            self.add_bond(self.anchor, idx, self.pending)
        elif self.pending.order is not None or self.pending.direction:
            raise self.error("bond symbol with no preceding atom")
        self.pending = _PendingBond()
        self.anchor = idx

    def close_or_open_ring(self, label: int) -> None:
        if self.anchor is None:
            raise self.error("ring closure before any atom")
        if label in self.open_rings:
            other, other_pending, _ = self.open_rings.pop(label)
            here = self.pending
            self.pending = _PendingBond()
            if (
                other_pending.order is not None
                and here.order is not None
                and other_pending.order != here.order
            ):
                raise self.error(f"ring bond {label} order mismatch")
            merged = _PendingBond(
                order=other_pending.order if other_pending.order is not None else here.order,
                direction=other_pending.direction or here.direction,
                explicit=other_pending.explicit or here.explicit,
            )
            self.add_bond(other, self.anchor, merged)
        else:
            self.open_rings[label] = (self.anchor, self.pending, self.pos)
            self.pending = _PendingBond()


def parse_smiles(text: str) -> Molecule:
    """Parse SMILES text into a Molecule.

    Raises SmilesSyntaxError on malformed input and ValenceError when a
    bare organic-subset atom exceeds its valence table entry.
    """
    if not text:
        raise SmilesSyntaxError("empty SMILES")
    mol = _Reader(text).run()
    # force the valence check so bad inputs fail at parse time
    for idx in range(len(mol.atoms)):
        mol.implicit_hydrogens(idx)
    return mol


def parse_pattern_graph(text: str) -> tuple[Molecule, set[tuple[int, int]]]:
    """Parse a substructure pattern under pattern semantics.

    Returns the pattern graph and the set of bond keys that were written
    without an explicit bond symbol (those match single or aromatic).
    Bracket atoms keep ``explicit_h=None`` unless an H count is written.
    No valence checking is applied.
    """
    if not text:
        raise SmilesSyntaxError("empty pattern")
    reader = _Reader(text, pattern=True)
    mol = reader.run()
    return mol, set(reader.default_bonds)


def atom_from_token(token: str) -> Atom:
    """Parse a lone atom token such as ``[NH4+]`` or ``Cl`` (test helper)."""
    mol = parse_smiles(token)
    if len(mol.atoms) != 1:
        raise SmilesSyntaxError("expected a single atom token")
    return replace(mol.atoms[0])
