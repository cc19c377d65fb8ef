"""Compound featurization: hashed fingerprints, ingested descriptor tables,
and per-atom/per-bond features for graph encoders.

Hashing is 64-bit FNV-1a over a canonical byte serialization, folded modulo
the bit-vector length. No address-dependent hashing anywhere, so vectors are
stable across runs and platforms.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .chemgraph import ORDER_RANK, ORGANIC_SUBSET, MolGraph, canonical_neighbor_order

MORGAN_BITS = 1024
PATH_BITS = 2048
PUBCHEM_LEN = 881
DESCRIPTOR2D_LEN = 200

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


class TableError(ValueError):
    pass


class LengthMismatch(TableError):
    pass


class NonBinaryBit(TableError):
    pass


class DuplicateKey(TableError):
    pass


class MissingLookup(KeyError):
    pass


class DegenerateColumn(UserWarning):
    pass


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _atom_invariant(g: MolGraph, idx: int) -> int:
    a = g.atoms[idx]
    blob = f"a|{a.element}|{g.degree(idx)}|{a.formal_charge}|{int(a.aromatic)}".encode()
    return fnv1a64(blob)


def morgan_fingerprint(g: MolGraph, radius: int = 2, nbits: int = MORGAN_BITS) -> np.ndarray:
    """Circular-substructure bit vector via iterative neighborhood hashing.

    Round 0 hashes each atom's local invariant; each later round rehashes an
    atom's identifier together with the sorted (bond order, neighbor id)
    multiset. An atom only emits a new identifier while its environment still
    grows, and identical identifiers within a round count once — so methane
    sets exactly one bit and symmetric atoms share bits.
    """
    ids = {i: _atom_invariant(g, i) for i in range(len(g.atoms))}
    envs = {i: frozenset((i,)) for i in range(len(g.atoms))}
    identifiers = set(ids.values())

    bond_order = {}
    for bond in g.bonds:
        bond_order[(bond.a, bond.b)] = ORDER_RANK[bond.order]
        bond_order[(bond.b, bond.a)] = ORDER_RANK[bond.order]

    for round_no in range(1, radius + 1):
        new_ids, new_envs, fresh = {}, {}, set()
        for i in range(len(g.atoms)):
            neighbors = canonical_neighbor_order(g, i)
            env = envs[i].union(*(envs[j] for j in neighbors)) if neighbors else envs[i]
            if env == envs[i]:
                new_ids[i], new_envs[i] = ids[i], envs[i]
                continue
            pairs = sorted((bond_order[(i, j)], ids[j]) for j in neighbors)
            blob = f"r{round_no}|{ids[i]}|" + "|".join(f"{o},{h}" for o, h in pairs)
            new_ids[i] = fnv1a64(blob.encode())
            new_envs[i] = env
            fresh.add(new_ids[i])
        ids, envs = new_ids, new_envs
        identifiers |= fresh

    vec = np.zeros(nbits, dtype=np.float32)
    for ident in identifiers:
        vec[ident % nbits] = 1.0
    return vec


def _enumerate_simple_paths(g: MolGraph, max_len: int):
    """All simple paths of 1..max_len atoms, as atom-index tuples."""
    for start in range(len(g.atoms)):
        stack = [(start, [start])]
        while stack:
            node, path = stack.pop()
            yield tuple(path)
            if len(path) == max_len:
                continue
            for nxt, _ in g.neighbors(node):
                if nxt not in path:
                    stack.append((nxt, path + [nxt]))


_ORDER_CHAR = {"single": "-", "double": "=", "triple": "#", "aromatic": ":"}


def _path_string(g: MolGraph, path: tuple[int, ...]) -> str:
    bits = []
    for k, idx in enumerate(path):
        atom = g.atoms[idx]
        bits.append(atom.element.lower() if atom.aromatic else atom.element)
        if k + 1 < len(path):
            bond = next(b for j, b in g.neighbors(idx) if j == path[k + 1])
            bits.append(_ORDER_CHAR[bond.order])
    return "".join(bits)


def path_fingerprint(g: MolGraph, max_len: int = 7, nbits: int = PATH_BITS) -> np.ndarray:
    """Linear-path bit vector: every simple path of up to max_len atoms is
    rendered canonically (minimum of forward/reverse string) and hashed."""
    canon: set[str] = set()
    for path in _enumerate_simple_paths(g, max_len):
        fwd = _path_string(g, path)
        rev = _path_string(g, path[::-1])
        canon.add(min(fwd, rev))
    vec = np.zeros(nbits, dtype=np.float32)
    for s in canon:
        vec[fnv1a64(b"p|" + s.encode()) % nbits] = 1.0
    return vec


@dataclass
class DescriptorTable:
    """SMILES -> precomputed feature vector, loaded from a TSV file."""

    kind: str  # "pubchem" | "descriptor2d"
    length: int
    values: dict[str, np.ndarray] = field(default_factory=dict)
    normalized: bool = False

    def get(self, smiles: str) -> np.ndarray:
        try:
            return self.values[smiles]
        except KeyError:
            raise MissingLookup(f"no {self.kind} row for SMILES {smiles!r}") from None


def load_descriptor_table(path, expected_len: int, kind: str = "pubchem") -> DescriptorTable:
    """Read a tab-separated table: header `smiles` + expected_len columns.

    PubChem-style tables must be strictly binary.
    """
    table = DescriptorTable(kind=kind, length=expected_len)
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\r\n").split("\t")
        if not header or header[0] != "smiles":
            raise TableError(f"{path}: first header column must be 'smiles', got {header[:1]}")
        if len(header) != expected_len + 1:
            raise LengthMismatch(
                f"{path}: header has {len(header) - 1} value columns, expected {expected_len}")
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\r\n")
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != expected_len + 1:
                raise LengthMismatch(
                    f"{path}:{lineno}: {len(cells) - 1} value columns, expected {expected_len}")
            key = cells[0]
            if key in table.values:
                raise DuplicateKey(f"{path}:{lineno}: duplicate SMILES {key!r}")
            row = np.array([float(c) for c in cells[1:]], dtype=np.float32)
            if kind == "pubchem" and not np.all((row == 0.0) | (row == 1.0)):
                raise NonBinaryBit(f"{path}:{lineno}: pubchem bits must be 0/1")
            table.values[key] = row
    return table


def normalize_descriptor2d(table: DescriptorTable) -> DescriptorTable:
    """Map each column through its empirical CDF (inclusive rank / N).

    Output values lie in [0, 1]; a constant column is degenerate and maps to
    0.5 everywhere (warned once per column).
    """
    keys = list(table.values)
    if not keys:
        return DescriptorTable(kind=table.kind, length=table.length, normalized=True)
    mat = np.stack([table.values[k] for k in keys])
    out = np.empty_like(mat)
    n = mat.shape[0]
    for col in range(mat.shape[1]):
        column = mat[:, col]
        if np.all(column == column[0]):
            warnings.warn(f"descriptor column {col} is constant; mapped to 0.5",
                          DegenerateColumn, stacklevel=2)
            out[:, col] = 0.5
            continue
        sorted_col = np.sort(column)
        out[:, col] = np.searchsorted(sorted_col, column, side="right") / n
    normalized = DescriptorTable(kind=table.kind, length=table.length, normalized=True)
    for i, k in enumerate(keys):
        normalized.values[k] = out[i].astype(np.float32)
    return normalized


# Graph featurization ---------------------------------------------------------

ELEMENT_SLOTS = list(ORGANIC_SUBSET)  # 10 symbols; anything else -> "other"
ATOM_FEATURE_DIM = len(ELEMENT_SLOTS) + 1 + 6 + 1 + 1  # element+other, degree 0..5, charge, aromatic
BOND_FEATURE_DIM = 4 + 1  # order one-hot + in_ring


@dataclass
class GraphFeatures:
    atom_feats: np.ndarray  # (n_atoms, ATOM_FEATURE_DIM)
    bond_feats: np.ndarray  # (n_bonds, BOND_FEATURE_DIM)
    adjacency: list[list[int]]  # neighbor atom indices per atom
    bond_endpoints: np.ndarray  # (n_bonds, 2)


def graph_features(g: MolGraph) -> GraphFeatures:
    n_elem = len(ELEMENT_SLOTS)
    atom_feats = np.zeros((len(g.atoms), ATOM_FEATURE_DIM), dtype=np.float32)
    for i, atom in enumerate(g.atoms):
        slot = ELEMENT_SLOTS.index(atom.element) if atom.element in ELEMENT_SLOTS else n_elem
        atom_feats[i, slot] = 1.0
        atom_feats[i, n_elem + 1 + min(g.degree(i), 5)] = 1.0
        atom_feats[i, n_elem + 7] = float(atom.formal_charge)
        atom_feats[i, n_elem + 8] = float(atom.aromatic)

    order_slot = {"single": 0, "double": 1, "triple": 2, "aromatic": 3}
    bond_feats = np.zeros((len(g.bonds), BOND_FEATURE_DIM), dtype=np.float32)
    endpoints = np.zeros((len(g.bonds), 2), dtype=np.int64)
    for i, bond in enumerate(g.bonds):
        bond_feats[i, order_slot[bond.order]] = 1.0
        bond_feats[i, 4] = float(bond.in_ring)
        endpoints[i] = (bond.a, bond.b)

    adjacency = [[j for j, _ in g.neighbors(i)] for i in range(len(g.atoms))]
    return GraphFeatures(atom_feats, bond_feats, adjacency, endpoints)
