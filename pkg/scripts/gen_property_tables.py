"""Regenerate the amino-acid property tables shipped in src/bindkit/data/.

Hydrophobicity, hydrophilicity (Hopp-Woods) and side-chain mass are the three
classical scales used by the pseudo-composition descriptor; the residue
distance matrix is derived from the same three scales after per-scale
standardization, so dist(a, a) == 0 by construction.
"""

from __future__ import annotations

import pathlib

import numpy as np

ALPHABET = "ACDEFGHIKLMNPQRSTVWY"

HYDROPHOBICITY = {
    "A": 0.62, "R": -2.53, "N": -0.78, "D": -0.90, "C": 0.29,
    "Q": -0.85, "E": -0.74, "G": 0.48, "H": -0.40, "I": 1.38,
    "L": 1.06, "K": -1.50, "M": 0.64, "F": 1.19, "P": 0.12,
    "S": -0.18, "T": -0.05, "W": 0.81, "Y": 0.26, "V": 1.08,
}

HYDROPHILICITY = {
    "A": -0.5, "R": 3.0, "N": 0.2, "D": 3.0, "C": -1.0,
    "Q": 0.2, "E": 3.0, "G": 0.0, "H": -0.5, "I": -1.8,
    "L": -1.8, "K": 3.0, "M": -1.3, "F": -2.5, "P": 0.0,
    "S": 0.3, "T": -0.4, "W": -3.4, "Y": -2.3, "V": -1.5,
}

SIDE_CHAIN_MASS = {
    "A": 15.0, "R": 101.0, "N": 58.0, "D": 59.0, "C": 47.0,
    "Q": 72.0, "E": 73.0, "G": 1.0, "H": 82.0, "I": 57.0,
    "L": 57.0, "K": 73.0, "M": 75.0, "F": 91.0, "P": 42.0,
    "S": 31.0, "T": 45.0, "W": 130.0, "Y": 107.0, "V": 43.0,
}


def standardized(scale: dict[str, float]) -> np.ndarray:
    vals = np.array([scale[a] for a in ALPHABET])
    return (vals - vals.mean()) / vals.std()


def main() -> None:
    data_dir = pathlib.Path(__file__).resolve().parents[1] / "src" / "bindkit" / "data"
    data_dir.mkdir(parents=True, exist_ok=True)

    with open(data_dir / "amino_acid_properties.tsv", "w", encoding="utf-8") as fh:
        fh.write("residue\thydrophobicity\thydrophilicity\tside_chain_mass\n")
        for a in ALPHABET:
            fh.write(f"{a}\t{HYDROPHOBICITY[a]}\t{HYDROPHILICITY[a]}\t{SIDE_CHAIN_MASS[a]}\n")

    h1 = standardized(HYDROPHOBICITY)
    h2 = standardized(HYDROPHILICITY)
    m = standardized(SIDE_CHAIN_MASS)
    dist = np.sqrt(((h1[:, None] - h1[None, :]) ** 2
                    + (h2[:, None] - h2[None, :]) ** 2
                    + (m[:, None] - m[None, :]) ** 2) / 3.0)

    with open(data_dir / "aa_distance_matrix.tsv", "w", encoding="utf-8") as fh:
        fh.write("residue\t" + "\t".join(ALPHABET) + "\n")
        for i, a in enumerate(ALPHABET):
            fh.write(a + "\t" + "\t".join(f"{dist[i, j]:.6f}" for j in range(20)) + "\n")

    print(f"wrote tables to {data_dir}")


if __name__ == "__main__":
    main()
