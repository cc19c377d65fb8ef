"""Dataset ingestion: labeled-pair TSVs, affinity matrices, binding-constant
transforms, and screening compound libraries.

All text files are UTF-8, tab-separated, '.' decimal, no quoting; CRLF line
endings are tolerated.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field

from . import chemgraph

log = logging.getLogger("bindkit.dataio")

PAIR_HEADER = ("smiles", "target_sequence", "label")
LIBRARY_HEADER = ("id", "name", "smiles")


class DataError(ValueError):
    pass


class BadHeader(DataError):
    pass


class BadFloat(DataError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


class BadSMILES(DataError):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


class DimMismatch(DataError):
    pass


class DuplicateId(DataError):
    pass


class NonPositive(DataError):
    pass


class TransformError(DataError):
    pass


@dataclass(frozen=True)
class LabeledPair:
    drug: str
    target: str
    label: float


@dataclass
class DatasetTSV:
    pairs: list[LabeledPair]
    path: str = ""
    transform: str = "none"
    errors: list[tuple[int, str]] = field(default_factory=list)  # (line, message)

    def labels(self) -> list[float]:
        return [p.label for p in self.pairs]

    def __len__(self):
        return len(self.pairs)


@dataclass
class LibraryEntry:
    id: str
    name: str
    smiles: str
    parse_error: str | None = None


@dataclass
class CompoundLibrary:
    entries: list[LibraryEntry]
    path: str = ""

    def __len__(self):
        return len(self.entries)


def _read_rows(path):
    with open(path, encoding="utf-8", newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            yield lineno, line.rstrip("\r\n")


def load_tsv(path, strict: bool = False, validate: bool = False) -> DatasetTSV:
    """Read a (smiles, target_sequence, label) TSV.

    Bad rows are collected with their line numbers unless strict=True, which
    aborts on the first fault. SMILES validity is only checked when
    validate=True; otherwise it surfaces at featurization time.
    """
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise BadHeader(f"{path}: empty file") from None
    if tuple(header.split("\t")) != PAIR_HEADER:
        raise BadHeader(f"{path}: header must be {chr(9).join(PAIR_HEADER)!r}, got {header!r}")

    ds = DatasetTSV(pairs=[], path=str(path))
    for lineno, line in rows:
        if not line:
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            err = BadHeader(f"{path}:{lineno}: expected 3 columns, got {len(cells)}")
            if strict:
                raise err
            ds.errors.append((lineno, str(err)))
            continue
        smiles, target, label_text = cells
        try:
            label = float(label_text)
            if not math.isfinite(label):
                raise ValueError
        except ValueError:
            err = BadFloat(f"{path}: label {label_text!r} is not a finite number", lineno)
            if strict:
                raise err
            ds.errors.append((lineno, str(err)))
            continue
        if validate:
            try:
                chemgraph.parse_smiles(smiles)
            except chemgraph.SmilesError as exc:
                err = BadSMILES(f"{path}: {exc}", lineno)
                if strict:
                    raise err
                ds.errors.append((lineno, str(err)))
                continue
        ds.pairs.append(LabeledPair(smiles, target, label))
    return ds


def load_affinity_matrix(drugs: list[str], targets: list[str], matrix) -> DatasetTSV:
    """One labeled pair per non-missing matrix cell, in row-major order.

    Missing cells are None or NaN.
    """
    if len(matrix) != len(drugs) or any(len(row) != len(targets) for row in matrix):
        raise DimMismatch(
            f"matrix must be {len(drugs)}x{len(targets)}; got "
            f"{len(matrix)}x{len(matrix[0]) if matrix else 0}")
    pairs = []
    for i, drug in enumerate(drugs):
        for j, target in enumerate(targets):
            value = matrix[i][j]
            if value is None or (isinstance(value, float) and math.isnan(value)):
                continue
            pairs.append(LabeledPair(drug, target, float(value)))
    if not pairs:
        warnings.warn("affinity matrix has no labeled cells; dataset is empty")
    return DatasetTSV(pairs=pairs)


def load_affinity_dir(path) -> DatasetTSV:
    """Benchmark-style directory: drugs.txt, targets.txt (one entry per line)
    and affinity.tsv (matrix with empty or NA cells for missing values)."""
    import pathlib
    root = pathlib.Path(path)
    drugs = [l for _, l in _read_rows(root / "drugs.txt") if l]
    targets = [l for _, l in _read_rows(root / "targets.txt") if l]
    matrix = []
    for _, line in _read_rows(root / "affinity.tsv"):
        if not line:
            continue
        row = [None if cell in ("", "NA") else float(cell) for cell in line.split("\t")]
        matrix.append(row)
    return load_affinity_matrix(drugs, targets, matrix)


def transform_affinity(values: list[float], mode: str = "pkd") -> list[float]:
    """pkd: y' = -log10(y / 1e9) for dissociation constants given in nM."""
    if mode != "pkd":
        raise TransformError(f"unknown transform {mode!r}")
    out = []
    for v in values:
        if v <= 0:
            raise NonPositive(f"binding constant must be positive, got {v}")
        out.append(-math.log10(v / 1e9))
    return out


def apply_transform(ds: DatasetTSV, mode: str) -> DatasetTSV:
    """Transform dataset labels; re-applying a transform is rejected."""
    if ds.transform != "none":
        raise TransformError(f"dataset already carries transform {ds.transform!r}")
    if mode.startswith("binarize:"):
        threshold = float(mode.split(":", 1)[1])
        pairs = [LabeledPair(p.drug, p.target, 1.0 if p.label >= threshold else 0.0)
                 for p in ds.pairs]
    elif mode == "pkd":
        new_labels = transform_affinity([p.label for p in ds.pairs], "pkd")
        pairs = [LabeledPair(p.drug, p.target, y) for p, y in zip(ds.pairs, new_labels)]
    else:
        raise TransformError(f"unknown transform {mode!r}")
    return DatasetTSV(pairs=pairs, path=ds.path, transform=mode, errors=list(ds.errors))


def save_tsv(ds: DatasetTSV, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(PAIR_HEADER) + "\n")
        for p in ds.pairs:
            fh.write(f"{p.drug}\t{p.target}\t{p.label!r}\n")


def load_target_list(path) -> list[tuple[str, str, str]]:
    """Read an (id, name, sequence) TSV for target screening."""
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise BadHeader(f"{path}: empty file") from None
    if tuple(header.split("\t")) != ("id", "name", "sequence"):
        raise BadHeader(f"{path}: header must be 'id<TAB>name<TAB>sequence', got {header!r}")
    out = []
    seen = set()
    for lineno, line in rows:
        if not line:
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            raise BadHeader(f"{path}:{lineno}: expected 3 columns, got {len(cells)}")
        if cells[0] in seen:
            raise DuplicateId(f"{path}:{lineno}: duplicate id {cells[0]!r}")
        seen.add(cells[0])
        out.append((cells[0], cells[1], cells[2]))
    return out


def load_library(path) -> CompoundLibrary:
    """Read an (id, name, smiles) compound library; unparseable SMILES are
    kept but flagged so screening can report them instead of dropping rows."""
    rows = _read_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise BadHeader(f"{path}: empty file") from None
    if tuple(header.split("\t")) != LIBRARY_HEADER:
        raise BadHeader(f"{path}: header must be {chr(9).join(LIBRARY_HEADER)!r}, got {header!r}")
    lib = CompoundLibrary(entries=[], path=str(path))
    seen = set()
    for lineno, line in rows:
        if not line:
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            raise BadHeader(f"{path}:{lineno}: expected 3 columns, got {len(cells)}")
        cid, name, smiles = cells
        if cid in seen:
            raise DuplicateId(f"{path}:{lineno}: duplicate id {cid!r}")
        seen.add(cid)
        parse_error = None
        try:
            chemgraph.parse_smiles(smiles)
        except chemgraph.SmilesError as exc:
            parse_error = str(exc)
        lib.entries.append(LibraryEntry(cid, name, smiles, parse_error))
    if not lib.entries:
        warnings.warn(f"{path}: library is empty")
    return lib
