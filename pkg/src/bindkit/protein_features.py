"""Classical protein sequence descriptors.

Four families: k-mer composition (k up to 3, 8420 dims), pseudo composition
with physicochemical correlation factors, conjoint-triad class frequencies
(343 dims), and quasi-sequence-order coupling numbers. The property scales and
the residue distance matrix ship as TSV data files (see scripts/gen_property_tables.py).
"""

from __future__ import annotations

import functools
import importlib.resources
from dataclasses import dataclass

import numpy as np

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"
AA_INDEX = {a: i for i, a in enumerate(ALPHABET)}
AAC_LEN = 20 + 400 + 8000

# residue -> class id for the conjoint triad descriptor
_TRIAD_CLASSES = ("AGV", "ILFP", "YMTS", "HNQW", "RK", "DE", "C")
TRIAD_CLASS = {aa: ci for ci, group in enumerate(_TRIAD_CLASSES) for aa in group}

NONSTANDARD = set("XBZUO") - set(ALPHABET)


class SequenceTooShort(ValueError):
    pass


class NonstandardResidue(ValueError):
    pass


def clean_sequence(s: str, policy: str = "reject") -> str:
    """Uppercase and validate a protein sequence.

    policy="reject" raises on anything outside the 20-letter alphabet;
    policy="alanine" substitutes the usual ambiguity codes (X/B/Z/U/O) with A
    but still rejects genuinely invalid characters.
    """
    s = s.strip().upper()
    if not s:
        raise SequenceTooShort("empty protein sequence")
    out = []
    for i, c in enumerate(s):
        if c in AA_INDEX:
            out.append(c)
        elif c in NONSTANDARD and policy == "alanine":
            out.append("A")
        else:
            raise NonstandardResidue(f"residue {c!r} at position {i} not in the 20-letter alphabet")
    return "".join(out)


@dataclass
class PropertyTables:
    hydrophobicity: np.ndarray  # (20,)
    hydrophilicity: np.ndarray
    side_chain_mass: np.ndarray
    distance_matrix: np.ndarray  # (20, 20)


@functools.lru_cache(maxsize=1)
def load_property_tables() -> PropertyTables:
    data = importlib.resources.files("bindkit") / "data"
    props: dict[str, dict[str, float]] = {}
    with (data / "amino_acid_properties.tsv").open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        cols = header[1:]
        for col in cols:
            props[col] = {}
        for line in fh:
            cells = line.rstrip("\n").split("\t")
            for col, cell in zip(cols, cells[1:]):
                props[col][cells[0]] = float(cell)
    for col in props:
        missing = set(ALPHABET) - set(props[col])
        if missing:
            raise ValueError(f"property table column {col} missing residues {sorted(missing)}")

    dist = np.zeros((20, 20))
    with (data / "aa_distance_matrix.tsv").open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")[1:]
        col_idx = [AA_INDEX[a] for a in header]
        for line in fh:
            cells = line.rstrip("\n").split("\t")
            row = AA_INDEX[cells[0]]
            for j, cell in zip(col_idx, cells[1:]):
                dist[row, j] = float(cell)
    if (dist < 0).any():
        raise ValueError("distance matrix must be non-negative")

    def vec(col: str) -> np.ndarray:
        return np.array([props[col][a] for a in ALPHABET])

    return PropertyTables(vec("hydrophobicity"), vec("hydrophilicity"),
                          vec("side_chain_mass"), dist)


def aac_kmers(s: str, max_k: int = 3) -> np.ndarray:
    """Concatenated k-mer frequency blocks for k=1..max_k (8420 dims at k=3).

    Block k is normalized by its k-mer count (len-k+1); a block whose k
    exceeds the sequence length stays all-zero.
    """
    if len(s) < 1:
        raise SequenceTooShort("need at least one residue")
    idx = [AA_INDEX[c] for c in s]
    sizes = [20 ** k for k in range(1, max_k + 1)]
    out = np.zeros(sum(sizes), dtype=np.float64)
    offset = 0
    for k, size in zip(range(1, max_k + 1), sizes):
        n = len(idx) - k + 1
        if n > 0:
            block = np.zeros(size)
            code = 0
            # rolling base-20 code over the k-window
            for i in range(k):
                code = code * 20 + idx[i]
            block[code] += 1
            high = 20 ** (k - 1)
            for i in range(1, n):
                code = (code - idx[i - 1] * high) * 20 + idx[i + k - 1]
                block[code] += 1
            out[offset:offset + size] = block / n
        offset += size
    return out.astype(np.float32)


def _standardize(values: np.ndarray) -> np.ndarray:
    return (values - values.mean()) / values.std()


def pseaac(s: str, lam: int = 30, w: float = 0.05,
           tables: PropertyTables | None = None) -> np.ndarray:
    """Type-1 pseudo amino-acid composition: 20 composition entries plus lam
    sequence-order correlation factors from hydrophobicity, hydrophilicity and
    side-chain mass (each standardized over the 20 residues)."""
    if len(s) <= lam:
        raise SequenceTooShort(f"pseudo composition needs length > {lam}, got {len(s)}")
    tables = tables or load_property_tables()
    props = [_standardize(tables.hydrophobicity),
             _standardize(tables.hydrophilicity),
             _standardize(tables.side_chain_mass)]
    idx = np.array([AA_INDEX[c] for c in s])

    theta = np.zeros(lam)
    for j in range(1, lam + 1):
        left, right = idx[:-j], idx[j:]
        corr = np.zeros(len(left))
        for p in props:
            d = p[left] - p[right]
            corr += d * d
        theta[j - 1] = (corr / 3.0).mean()

    comp = np.bincount(idx, minlength=20) / len(s)
    denom = comp.sum() + w * theta.sum()
    return np.concatenate([comp, w * theta]).astype(np.float32) / denom


def conjoint_triad(s: str) -> np.ndarray:
    """343-dim frequency of residue-class triples over the 7-class alphabet,
    normalized by the maximum triad count."""
    if len(s) < 3:
        raise SequenceTooShort(f"conjoint triad needs length >= 3, got {len(s)}")
    classes = [TRIAD_CLASS[c] for c in s]
    counts = np.zeros(343, dtype=np.float64)
    for i in range(len(classes) - 2):
        counts[classes[i] * 49 + classes[i + 1] * 7 + classes[i + 2]] += 1
    return (counts / counts.max()).astype(np.float32)


def quasi_sequence_order(s: str, maxlag: int = 30, w: float = 0.1,
                         tables: PropertyTables | None = None) -> np.ndarray:
    """Residue frequencies plus distance-matrix coupling numbers.

    tau_d sums squared residue distances at lag d; the 20 frequency entries
    and the maxlag coupling entries share the denominator (1 + w * sum(tau)).
    """
    if len(s) <= maxlag:
        raise SequenceTooShort(f"quasi order needs length > {maxlag}, got {len(s)}")
    tables = tables or load_property_tables()
    idx = np.array([AA_INDEX[c] for c in s])
    tau = np.zeros(maxlag)
    for d in range(1, maxlag + 1):
        pair_dist = tables.distance_matrix[idx[:-d], idx[d:]]
        tau[d - 1] = float((pair_dist * pair_dist).sum())
    comp = np.bincount(idx, minlength=20) / len(s)
    denom = 1.0 + w * tau.sum()
    return np.concatenate([comp / denom, w * tau / denom]).astype(np.float32)
