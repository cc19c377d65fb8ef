import numpy as np
import pytest
from hypothesis import given, strategies as st

from bindkit import protein_features as pf

AA = st.text(alphabet=pf.ALPHABET, min_size=1, max_size=60)


# Independent oracle: literal dictionary k-mer counting.
def kmer_freq_oracle(s: str, k: int) -> dict[str, float]:
    n = len(s) - k + 1
    counts: dict[str, float] = {}
    for i in range(n):
        counts[s[i:i + k]] = counts.get(s[i:i + k], 0) + 1
    return {kmer: c / n for kmer, c in counts.items()}


def kmer_index(kmer: str) -> int:
    code = 0
    for c in kmer:
        code = code * 20 + pf.AA_INDEX[c]
    return code


def test_aac_total_length():
    assert 20 + 400 + 8000 == 8420
    assert pf.aac_kmers("ACD").shape == (8420,)


def test_aac_homopolymer_case():
    v = pf.aac_kmers("AAA")
    assert v[kmer_index("A")] == 1.0
    assert v[20 + kmer_index("AA")] == 1.0
    assert v[420 + kmer_index("AAA")] == 1.0
    assert v.sum() == 3.0  # nothing else set


def test_aac_no_trimers_when_too_short():
    v = pf.aac_kmers("AC")
    assert np.all(v[420:] == 0.0)
    assert v[:20].sum() == 1.0 and v[20:420].sum() == 1.0


@given(AA)
def test_aac_matches_oracle(s):
    v = pf.aac_kmers(s)
    for k, offset in ((1, 0), (2, 20), (3, 420)):
        oracle = kmer_freq_oracle(s, k) if len(s) >= k else {}
        block = v[offset:offset + 20 ** k]
        assert np.isclose(block.sum(), 1.0 if oracle else 0.0, atol=1e-6)
        for kmer, freq in oracle.items():
            assert np.isclose(block[kmer_index(kmer)], freq, atol=1e-6)


def test_pseaac_length_and_short_error():
    assert pf.pseaac("A" * 40).shape == (50,)
    with pytest.raises(pf.SequenceTooShort):
        pf.pseaac("A" * 30, lam=30)


def test_pseaac_homopolymer_collapses_to_composition():
    # identical residues -> all property differences vanish -> theta == 0
    v = pf.pseaac("A" * 40)
    assert np.all(v[20:] == 0.0)
    assert np.isclose(v[:20].sum(), 1.0)
    assert v[pf.AA_INDEX["A"]] == 1.0


def test_pseaac_properties_nonnegative_and_normalized():
    v = pf.pseaac("ACDEFGHIKLMNPQRSTVWY" * 3)
    assert np.all(v >= 0.0)
    assert v[:20].sum() <= 1.0 + 1e-6
    assert v[20:].sum() > 0.0  # heteropolymer has order information


def test_conjoint_triad_homopolymer():
    v = pf.conjoint_triad("AAA")
    assert v.shape == (343,)
    # A is in class 0 -> triad (0,0,0) is coordinate 0
    assert pf.TRIAD_CLASS["A"] == 0
    assert v[0] == 1.0 and v.sum() == 1.0


def test_conjoint_triad_single_class_block():
    v = pf.conjoint_triad("RKRK")
    # R and K are both class 4 -> only coordinate (4,4,4) can be set
    assert pf.TRIAD_CLASS["R"] == pf.TRIAD_CLASS["K"] == 4
    coord = 4 * 49 + 4 * 7 + 4
    assert v[coord] == 1.0
    assert v.sum() == 1.0


def test_conjoint_triad_short_error():
    with pytest.raises(pf.SequenceTooShort):
        pf.conjoint_triad("AC")


@given(st.text(alphabet=pf.ALPHABET, min_size=3, max_size=40))
def test_conjoint_triad_max_is_one(s):
    v = pf.conjoint_triad(s)
    assert v.max() == 1.0
    assert np.all(v >= 0.0)


def test_qso_length_and_short_error():
    assert pf.quasi_sequence_order("A" * 40).shape == (50,)
    with pytest.raises(pf.SequenceTooShort):
        pf.quasi_sequence_order("A" * 30, maxlag=30)


def test_qso_homopolymer_collapses():
    tables = pf.load_property_tables()
    a = pf.AA_INDEX["A"]
    assert tables.distance_matrix[a, a] == 0.0  # dist(a, a) = 0 in shipped matrix
    v = pf.quasi_sequence_order("A" * 40)
    assert np.all(v[20:] == 0.0)
    assert np.isclose(v[:20].sum(), 1.0)


@given(st.text(alphabet=pf.ALPHABET, min_size=31, max_size=60))
def test_qso_nonnegative(s):
    v = pf.quasi_sequence_order(s)
    assert np.all(v >= 0.0)


def test_property_tables_complete():
    tables = pf.load_property_tables()
    assert tables.hydrophobicity.shape == (20,)
    assert tables.distance_matrix.shape == (20, 20)
    assert np.all(tables.distance_matrix >= 0.0)
    assert np.allclose(tables.distance_matrix, tables.distance_matrix.T)
    assert np.all(np.diag(tables.distance_matrix) == 0.0)


def test_clean_sequence_policies():
    assert pf.clean_sequence("acd") == "ACD"
    with pytest.raises(pf.NonstandardResidue):
        pf.clean_sequence("ACX")
    assert pf.clean_sequence("ACX", policy="alanine") == "ACA"
    with pytest.raises(pf.NonstandardResidue):
        pf.clean_sequence("AC1", policy="alanine")  # not an ambiguity code
    with pytest.raises(pf.SequenceTooShort):
        pf.clean_sequence("")


def test_descriptors_deterministic():
    s = "ACDEFGHIKLMNPQRSTVWYAAACCC" * 2
    for fn in (pf.aac_kmers, pf.conjoint_triad,
               lambda x: pf.pseaac(x, lam=10), lambda x: pf.quasi_sequence_order(x, maxlag=10)):
        assert np.array_equal(fn(s), fn(s))
