import re
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from bindkit import chemgraph as cg


# Independent oracle: count atom tokens straight off the SMILES text.
_ATOM_TOKEN = re.compile(r"\[[^\]]*\]|Cl|Br|[BCNOPSFI]|[bcnops]")


def count_atom_tokens(smiles: str) -> int:
    stripped = re.sub(r"%\d\d", "", smiles)
    return len(_ATOM_TOKEN.findall(stripped))


# Independent oracle: bond lies on a simple cycle, by exhaustive path search.
def cycle_bonds_bruteforce(g: cg.MolGraph) -> set[int]:
    n = len(g.atoms)
    adj = [[] for _ in range(n)]
    for bi, b in enumerate(g.bonds):
        adj[b.a].append((b.b, bi))
        adj[b.b].append((b.a, bi))
    in_cycle = set()
    for start in range(n):
        # enumerate simple paths out of `start`; a return to start closes a cycle
        stack = [(start, [start], [])]
        while stack:
            node, path, bonds = stack.pop()
            for nxt, bi in adj[node]:
                if bonds and bi == bonds[-1]:
                    continue
                if nxt == start and len(path) >= 3:
                    in_cycle.update(bonds + [bi])
                elif nxt not in path:
                    stack.append((nxt, path + [nxt], bonds + [bi]))
    return in_cycle


def test_single_atom():
    g = cg.parse_smiles("C")
    assert len(g.atoms) == 1 and len(g.bonds) == 0
    assert g.atoms[0].element == "C" and not g.atoms[0].aromatic


def test_triangle_ring():
    g = cg.parse_smiles("C1CC1")
    assert len(g.atoms) == 3 and len(g.bonds) == 3
    expected = cycle_bonds_bruteforce(g)
    assert expected == {0, 1, 2}
    assert all(b.in_ring for b in g.bonds)


def test_unclosed_ring_is_error_with_offset():
    with pytest.raises(cg.UnclosedRing) as err:
        cg.parse_smiles("C1CC")
    assert err.value.offset == 1


def test_empty_input():
    with pytest.raises(cg.EmptyInput):
        cg.parse_smiles("")


def test_unbalanced_branch_offsets():
    with pytest.raises(cg.UnbalancedBranch) as err:
        cg.parse_smiles("C(C")
    assert err.value.offset == 1
    with pytest.raises(cg.UnbalancedBranch) as err:
        cg.parse_smiles("CC)C")
    assert err.value.offset == 2


def test_unknown_atom_symbol():
    with pytest.raises(cg.UnknownAtomSymbol) as err:
        cg.parse_smiles("CXC")
    assert err.value.offset == 1


def test_two_letter_maximal_munch():
    g = cg.parse_smiles("CClBr")
    assert [a.element for a in g.atoms] == ["C", "Cl", "Br"]


def test_bracket_charge_and_h():
    g = cg.parse_smiles("C[NH3+]")
    atom = g.atoms[1]
    assert atom.element == "N" and atom.explicit_h == 3 and atom.formal_charge == 1


def test_bracket_negative_charge():
    g = cg.parse_smiles("[O-]C")
    assert g.atoms[0].formal_charge == -1


def test_stereo_markers_discarded():
    g = cg.parse_smiles("C/C=C\\C")
    assert len(g.atoms) == 4
    assert [b.order for b in g.bonds] == ["single", "double", "single"]
    g2 = cg.parse_smiles("C[C@H](N)O")
    assert len(g2.atoms) == 4


def test_isotopes_rejected():
    with pytest.raises(cg.UnknownAtomSymbol):
        cg.parse_smiles("[13C]")


def test_percent_ring_closure():
    g = cg.parse_smiles("C%11CC%11")
    assert len(g.bonds) == 3
    assert all(b.in_ring for b in g.bonds)


def test_bond_orders():
    g = cg.parse_smiles("C=C#CC")
    assert [b.order for b in g.bonds] == ["double", "triple", "single"]


def test_aromatic_ring_flags():
    g = cg.parse_smiles("c1ccccc1")
    assert all(a.aromatic for a in g.atoms)
    assert all(b.order == "aromatic" for b in g.bonds)


def test_aromatic_bond_between_aliphatic_rejected():
    with pytest.raises(cg.SmilesError):
        cg.parse_smiles("C:C")


def test_self_loop_rejected():
    with pytest.raises(cg.SmilesError):
        cg.parse_smiles("C11")


def test_duplicate_bond_rejected():
    with pytest.raises(cg.SmilesError):
        cg.parse_smiles("C1C1")


def test_ring_membership_examples():
    assert cg.ring_membership(cg.parse_smiles("CCCC")) == [False] * 3
    assert cg.ring_membership(cg.parse_smiles("C1CC1")) == [True] * 3
    flags = cg.ring_membership(cg.parse_smiles("C1CC1C"))
    assert flags.count(True) == 3 and flags.count(False) == 1


@pytest.mark.parametrize("smiles", [
    "C1CC1C", "C1CCC1", "C1CC2CC12", "c1ccccc1CC", "C1CC1C1CC1", "CC(C)(C)C",
    "N1CC1OC=O", "C1CCCCC1C2CC2",
])
def test_ring_membership_matches_bruteforce(smiles):
    g = cg.parse_smiles(smiles)
    expected = cycle_bonds_bruteforce(g)
    flags = cg.ring_membership(g)
    assert {i for i, f in enumerate(flags) if f} == expected


def test_canonical_neighbor_order_examples():
    g = cg.parse_smiles("CO")
    assert cg.canonical_neighbor_order(g, 0) == [1]
    g = cg.parse_smiles("C(N)O")
    order = cg.canonical_neighbor_order(g, 0)
    assert [g.atoms[i].element for i in order] == ["N", "O"]
    assert cg.canonical_neighbor_order(g, 0) == order  # deterministic
    with pytest.raises(IndexError):
        cg.canonical_neighbor_order(g, 99)


CORPUS = [
    "C", "CC", "CCO", "c1ccccc1", "C1CC1", "CC(=O)O", "C[NH3+]", "CC(C)Cl",
    "N#Cc1ccccc1", "O=C(O)c1ccccc1", "[O-]S(=O)(=O)[O-]", "BrCCBr",
    "C1CC2CCC1CC2", "c1ccc2ccccc2c1",
]


@pytest.mark.parametrize("smiles", CORPUS)
def test_atom_count_matches_token_oracle(smiles):
    assert len(cg.parse_smiles(smiles).atoms) == count_atom_tokens(smiles)


@pytest.mark.parametrize("smiles", CORPUS)
def test_parse_is_deterministic(smiles):
    a, b = cg.parse_smiles(smiles), cg.parse_smiles(smiles)
    assert [(x.element, x.aromatic, x.formal_charge) for x in a.atoms] == \
           [(x.element, x.aromatic, x.formal_charge) for x in b.atoms]
    assert [(x.a, x.b, x.order, x.in_ring) for x in a.bonds] == \
           [(x.a, x.b, x.order, x.in_ring) for x in b.bonds]


@given(st.text(alphabet="CNOPSFcno()[]=#123%+-@/\\BrilHK", max_size=24))
def test_parser_totality(text):
    """Malformed input always maps to a typed error, never a crash."""
    try:
        g = cg.parse_smiles(text)
        assert len(g.atoms) >= 1
    except cg.SmilesError as exc:
        assert isinstance(exc.offset, int) and 0 <= exc.offset <= len(text)


def test_degree_matches_incident_bonds():
    g = cg.parse_smiles("CC(C)(C)C")
    assert g.degree(1) == 4
    assert sorted(cg.canonical_neighbor_order(g, 1)) == [0, 2, 3, 4]
