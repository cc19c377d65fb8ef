"""SMILES parsing into an attributed molecular graph.

Covers the practical subset the featurizers need: organic-subset atoms,
bracket atoms with charge and explicit hydrogen counts, single/double/triple/
aromatic bonds, branches, ring closures (single digit and %nn), and lowercase
aromatic atoms. Stereo markers (/ \\ @) are accepted and discarded. Hydrogens
stay implicit: a bracket H count is stored as an atom attribute, never as a
graph node.

Every parse failure raises a typed error carrying the byte offset of the
fault, so callers can point at the exact character.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ORGANIC_SUBSET = ("B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I")
AROMATIC_SYMBOLS = ("b", "c", "n", "o", "p", "s", "se", "as")
# Elements accepted inside brackets (common in drug-like molecules and salts).
BRACKET_ELEMENTS = set(ORGANIC_SUBSET) | {
    "Se", "Si", "As", "Te", "Na", "K", "Li", "Rb", "Cs", "Mg", "Ca", "Ba",
    "Zn", "Fe", "Cu", "Mn", "Co", "Ni", "Al", "Sn", "Sb", "Bi", "Ag", "Au",
    "Hg", "Pt", "Pd", "Cr", "Mo", "W", "V", "Ti", "Zr", "Gd", "Sr",
}

BOND_ORDERS = ("single", "double", "triple", "aromatic")
_BOND_CHARS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic"}
# Numeric keys used for canonical neighbor ordering.
ORDER_RANK = {"single": 1, "double": 2, "triple": 3, "aromatic": 4}


class SmilesError(ValueError):
    """Base for all parse failures; `offset` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class EmptyInput(SmilesError):
    pass


class UnbalancedBranch(SmilesError):
    pass


class UnclosedRing(SmilesError):
    pass


class UnknownAtomSymbol(SmilesError):
    pass


class InvalidBond(SmilesError):
    pass


@dataclass
class Atom:
    element: str
    aromatic: bool = False
    formal_charge: int = 0
    explicit_h: int | None = None

    def sort_key(self):
        return (self.element, self.aromatic)


@dataclass
class Bond:
    a: int
    b: int
    order: str
    in_ring: bool = False

    def other(self, idx: int) -> int:
        return self.b if idx == self.a else self.a


@dataclass
class MolGraph:
    atoms: list[Atom] = field(default_factory=list)
    bonds: list[Bond] = field(default_factory=list)
    source: str = ""

    def __post_init__(self):
        self._adj: list[list[int]] | None = None

    def neighbors(self, idx: int) -> list[tuple[int, Bond]]:
        """Incident (neighbor index, bond) pairs for an atom."""
        if self._adj is None:
            adj: list[list[int]] = [[] for _ in self.atoms]
            for bi, bond in enumerate(self.bonds):
                adj[bond.a].append(bi)
                adj[bond.b].append(bi)
            self._adj = adj
        return [(self.bonds[bi].other(idx), self.bonds[bi]) for bi in self._adj[idx]]

    def degree(self, idx: int) -> int:
        return len(self.neighbors(idx))


def parse_smiles(text: str) -> MolGraph:
    """Parse a SMILES string; raises a SmilesError subclass on malformed input."""
    if not isinstance(text, str) or text == "":
        raise EmptyInput("empty SMILES", 0)

    g = MolGraph(source=text)
    pos = 0
    n = len(text)
    prev_atom: int | None = None
    pending_bond: str | None = None
    pending_bond_pos = 0
    branch_stack: list[tuple[int, int]] = []  # (atom index, offset of '(')
    open_rings: dict[int, tuple[int, str | None, int]] = {}  # digit -> (atom, bond, offset)
    seen_bonds: set[tuple[int, int]] = set()

    def add_atom(atom: Atom, offset: int) -> None:
        nonlocal prev_atom, pending_bond
        g.atoms.append(atom)
        idx = len(g.atoms) - 1
        if prev_atom is not None:
            _add_bond(g, seen_bonds, prev_atom, idx, pending_bond, offset)
        elif pending_bond is not None:
            raise InvalidBond("bond symbol before any atom", pending_bond_pos)
        pending_bond = None
        prev_atom = idx

    while pos < n:
        ch = text[pos]

        if ch in _BOND_CHARS:
            if pending_bond is not None:
                raise InvalidBond("two consecutive bond symbols", pos)
            pending_bond = _BOND_CHARS[ch]
            pending_bond_pos = pos
            pos += 1
        elif ch in "/\\":
            # Stereo bond markers: accepted, treated as single bonds.
            if pending_bond is None:
                pending_bond = "single"
                pending_bond_pos = pos
            pos += 1
        elif ch == "(":
            if prev_atom is None:
                raise UnbalancedBranch("branch opened before any atom", pos)
            branch_stack.append((prev_atom, pos))
            pos += 1
        elif ch == ")":
            if not branch_stack:
                raise UnbalancedBranch("branch closed without matching open", pos)
            if pending_bond is not None:
                raise InvalidBond("dangling bond before branch close", pending_bond_pos)
            prev_atom = branch_stack.pop()[0]
            pos += 1
        elif ch.isdigit() or ch == "%":
            if ch == "%":
                if pos + 2 >= n or not (text[pos + 1].isdigit() and text[pos + 2].isdigit()):
                    raise UnclosedRing("%% ring closure needs two digits", pos)
                ring_id = int(text[pos + 1:pos + 3])
                width = 3
            else:
                ring_id = int(ch)
                width = 1
            if prev_atom is None:
                raise UnclosedRing("ring closure before any atom", pos)
            if ring_id in open_rings:
                other, opened_bond, _ = open_rings.pop(ring_id)
                order = pending_bond or opened_bond
                if other == prev_atom:
                    raise UnclosedRing("ring closure forms a self-loop", pos)
                _add_bond(g, seen_bonds, other, prev_atom, order, pos)
            else:
                open_rings[ring_id] = (prev_atom, pending_bond, pos)
            pending_bond = None
            pos += width
        elif ch == "[":
            atom, width = _parse_bracket(text, pos)
            add_atom(atom, pos)
            pos += width
        elif ch.isalpha() or ch == "*":
            atom, width = _parse_plain_atom(text, pos)
            add_atom(atom, pos)
            pos += width
        else:
            raise UnknownAtomSymbol(f"unexpected character {ch!r}", pos)

    if branch_stack:
        raise UnbalancedBranch("branch never closed", branch_stack[-1][1])
    if open_rings:
        ring_id, (_, _, offset) = min(open_rings.items(), key=lambda kv: kv[1][2])
        raise UnclosedRing(f"ring closure {ring_id} never closed", offset)
    if pending_bond is not None:
        raise InvalidBond("dangling bond at end of input", pending_bond_pos)
    if not g.atoms:
        raise EmptyInput("no atoms in SMILES", 0)

    for flag, bond in zip(ring_membership(g), g.bonds):
        bond.in_ring = flag
    return g


def _add_bond(g: MolGraph, seen: set, a: int, b: int, order: str | None, offset: int) -> None:
    key = (min(a, b), max(a, b))
    if key in seen:
        raise UnclosedRing("duplicate bond between the same atoms", offset)
    if order is None:
        order = "aromatic" if (g.atoms[a].aromatic and g.atoms[b].aromatic) else "single"
    if order == "aromatic" and not (g.atoms[a].aromatic and g.atoms[b].aromatic):
        raise InvalidBond("aromatic bond between non-aromatic atoms", offset)
    seen.add(key)
    g.bonds.append(Bond(a, b, order))


def _parse_plain_atom(text: str, pos: int) -> tuple[Atom, int]:
    # Maximal munch for the two-letter organic symbols.
    two = text[pos:pos + 2]
    if two in ("Cl", "Br"):
        return Atom(two), 2
    ch = text[pos]
    if ch in ORGANIC_SUBSET:
        return Atom(ch), 1
    if ch in AROMATIC_SYMBOLS and len(ch) == 1:
        return Atom(ch.upper(), aromatic=True), 1
    raise UnknownAtomSymbol(f"unknown atom symbol {ch!r}", pos)


def _parse_bracket(text: str, pos: int) -> tuple[Atom, int]:
    close = text.find("]", pos)
    if close == -1:
        raise UnknownAtomSymbol("unterminated bracket atom", pos)
    body = text[pos + 1:close]
    i = 0
    if not body:
        raise UnknownAtomSymbol("empty bracket atom", pos)
    if body[0].isdigit():
        raise UnknownAtomSymbol("isotope labels are not supported", pos + 1)

    # Element symbol: try two letters, then one; lowercase means aromatic.
    element = None
    aromatic = False
    if body[:2] in BRACKET_ELEMENTS:
        element, i = body[:2], 2
    elif body[:2] in AROMATIC_SYMBOLS:
        element, aromatic, i = body[:2].capitalize(), True, 2
    elif body[:1] in BRACKET_ELEMENTS:
        element, i = body[:1], 1
    elif body[:1] in AROMATIC_SYMBOLS:
        element, aromatic, i = body[:1].upper(), True, 1
    else:
        raise UnknownAtomSymbol(f"unknown atom symbol {body[:2]!r}", pos + 1)

    explicit_h: int | None = None
    charge = 0
    while i < len(body):
        c = body[i]
        if c == "@":
            i += 1  # chirality: discarded
        elif c == "H":
            i += 1
            j = i
            while j < len(body) and body[j].isdigit():
                j += 1
            explicit_h = int(body[i:j]) if j > i else 1
            i = j
        elif c in "+-":
            sign = 1 if c == "+" else -1
            run = 0
            while i < len(body) and body[i] == c:
                run += 1
                i += 1
            if i < len(body) and body[i].isdigit():
                j = i
                while j < len(body) and body[j].isdigit():
                    j += 1
                charge = sign * int(body[i:j])
                i = j
            else:
                charge = sign * run
        else:
            raise UnknownAtomSymbol(f"unsupported bracket token {c!r}", pos + 1 + i)

    return Atom(element, aromatic=aromatic, formal_charge=charge, explicit_h=explicit_h), close - pos + 1


def ring_membership(g: MolGraph) -> list[bool]:
    """Per-bond flags: True iff the bond lies on some simple cycle.

    A bond is on a cycle exactly when it is not a bridge; bridges are found
    with an iterative lowpoint DFS.
    """
    n = len(g.atoms)
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for bi, bond in enumerate(g.bonds):
        adj[bond.a].append((bond.b, bi))
        adj[bond.b].append((bond.a, bi))

    disc = [-1] * n
    low = [0] * n
    is_bridge = [False] * len(g.bonds)
    counter = 0
    for root in range(n):
        if disc[root] != -1:
            continue
        stack: list[tuple[int, int, int]] = [(root, -1, 0)]  # (node, entry bond, next edge)
        while stack:
            node, via, edge_pos = stack[-1]
            if edge_pos == 0:
                disc[node] = low[node] = counter
                counter += 1
            if edge_pos < len(adj[node]):
                stack[-1] = (node, via, edge_pos + 1)
                nxt, bi = adj[node][edge_pos]
                if bi == via:
                    continue
                if disc[nxt] == -1:
                    stack.append((nxt, bi, 0))
                else:
                    low[node] = min(low[node], disc[nxt])
            else:
                stack.pop()
                if stack:
                    parent = stack[-1][0]
                    low[parent] = min(low[parent], low[node])
                    if low[node] > disc[parent]:
                        is_bridge[via] = True
    return [not b for b in is_bridge]


def canonical_neighbor_order(g: MolGraph, atom: int) -> list[int]:
    """Neighbors of an atom sorted by (element, aromatic, bond order, index).

    The ordering is a pure function of graph structure, so repeated calls and
    reparses of the same SMILES agree — fingerprint hashing depends on that.
    """
    if not 0 <= atom < len(g.atoms):
        raise IndexError(f"atom index {atom} out of range for {len(g.atoms)} atoms")
    pairs = g.neighbors(atom)
    pairs.sort(key=lambda p: (g.atoms[p[0]].element, g.atoms[p[0]].aromatic,
                              ORDER_RANK[p[1].order], p[0]))
    return [p[0] for p in pairs]
