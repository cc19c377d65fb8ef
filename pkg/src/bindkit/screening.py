"""Repurposing and virtual screening with a five-model ensemble.

Members are trained fresh on a supplied dataset or loaded from saved
artifacts; their per-candidate scores are combined by mean rank, which keeps
the ordering invariant under any monotone rescaling of a single member's
scores (members trained with different losses are not score-commensurable).
"""

from __future__ import annotations

import datetime
import logging
from dataclasses import dataclass, field

import numpy as np

from .dataio import CompoundLibrary, DatasetTSV, LabeledPair
from .encoders import ModelSpec, validate_combination
from .persist import load_model
from .training import TrainConfig, TrainedModel, train

log = logging.getLogger("bindkit.screening")

DEFAULT_MEMBERS = (
    ("Morgan-MLP", "AAC-MLP"),
    ("Daylight-MLP", "QuasiSeq-MLP"),
    ("CNN", "CNN"),
    ("MPNN", "CNN"),
    ("Transformer", "Transformer"),
)


class RaggedInput(ValueError):
    pass


class MissingPretrained(ValueError):
    pass


@dataclass
class EnsembleSpec:
    members: tuple[ModelSpec, ...] = ()
    aggregation: str = "mean-rank"

    def __post_init__(self):
        if not self.members:
            self.members = tuple(
                ModelSpec(task="DTI", drug_encoder=d, target_encoder=p)
                for d, p in DEFAULT_MEMBERS)
        if len(self.members) != 5:
            raise ValueError(f"ensemble needs exactly 5 members, got {len(self.members)}")
        for spec in self.members:
            validate_combination(spec)


@dataclass
class RankedRow:
    rank: int
    candidate_id: str
    name: str
    aggregate: float
    per_model: tuple[float, ...]


@dataclass
class RankedList:
    rows: list[RankedRow]
    target_description: str
    member_names: tuple[str, ...]
    timestamp: str
    failed: list[tuple[str, str, str]] = field(default_factory=list)  # (id, name, error)

    def to_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.banner())
            fh.write("rank\tid\tname\taggregate\t"
                     + "\t".join(f"score_{i + 1}" for i in range(len(self.member_names)))
                     + "\n")
            for row in self.rows:
                fh.write(f"{row.rank}\t{row.candidate_id}\t{row.name}\t{row.aggregate!r}\t"
                         + "\t".join(repr(s) for s in row.per_model) + "\n")
            if self.failed:
                fh.write("# failed entries (not ranked):\n")
                for cid, name, err in self.failed:
                    fh.write(f"# {cid}\t{name}\t{err}\n")

    def banner(self) -> str:
        lines = [
            f"# ranked screening list — {self.timestamp}",
            f"# query: {self.target_description}",
            f"# ensemble: {', '.join(self.member_names)}",
            "# aggregation: mean rank across members (higher aggregate = better)",
        ]
        return "\n".join(lines) + "\n"


def _descending_average_ranks(scores: np.ndarray) -> np.ndarray:
    """Rank 1 = best (highest score); tied scores share the average rank."""
    order = np.argsort(-scores, kind="mergesort")
    ranks = np.empty(len(scores), dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def aggregate(per_model_scores, mode: str = "mean-rank") -> np.ndarray:
    """Combine a (members x candidates) score table into one score per
    candidate: the negative mean of descending ranks, so higher is better."""
    if mode != "mean-rank":
        raise ValueError(f"unknown aggregation {mode!r}")
    rows = [np.asarray(row, dtype=np.float64) for row in per_model_scores]
    if not rows:
        raise RaggedInput("no member scores")
    n = len(rows[0])
    if any(len(r) != n for r in rows):
        raise RaggedInput(f"member score rows differ in length: {[len(r) for r in rows]}")
    ranks = np.stack([_descending_average_ranks(r) for r in rows])
    return -ranks.mean(axis=0)


def _ensure_members(ens: EnsembleSpec, train_data: DatasetTSV | None,
                    model_dirs: list | None, cfg: TrainConfig | None) -> list[TrainedModel]:
    if train_data is not None and len(train_data):
        cfg = cfg or TrainConfig()
        members = []
        for i, spec in enumerate(ens.members):
            log.info("training ensemble member %d/5: %s + %s", i + 1,
                     spec.drug_encoder, spec.target_encoder)
            members.append(train(spec, cfg, train_data.pairs, [], ctx=None))
        return members
    if not model_dirs:
        raise MissingPretrained(
            "no training data given and no saved model artifacts to load")
    members = [load_model(d) for d in model_dirs]
    if len(members) != 5:
        log.warning("ensemble usually has 5 members; loaded %d artifacts", len(members))
    return members


def _score_candidates(members: list[TrainedModel], pairs: list[LabeledPair]) -> np.ndarray:
    table = []
    for member in members:
        scores, errors = member.predict_flagged(pairs)
        if errors:
            raise RuntimeError(f"unexpected featurization failure: {errors}")
        table.append(scores)
    return np.stack(table)


def _build_ranked(ids, names, per_model: np.ndarray, member_names, target_desc,
                  failed) -> RankedList:
    agg = aggregate(per_model)
    order = sorted(range(len(ids)), key=lambda i: (-agg[i], ids[i]))
    rows = [RankedRow(rank=r + 1, candidate_id=ids[i], name=names[i],
                      aggregate=float(agg[i]),
                      per_model=tuple(float(per_model[m, i]) for m in range(per_model.shape[0])))
            for r, i in enumerate(order)]
    return RankedList(rows=rows, target_description=target_desc,
                      member_names=tuple(member_names),
                      timestamp=datetime.datetime.now().isoformat(timespec="seconds"),
                      failed=failed)


def _member_label(tm: TrainedModel) -> str:
    return f"{tm.spec.drug_encoder or '-'}+{tm.spec.target_encoder or '-'}"


def repurpose(target: str, library: CompoundLibrary, train_data: DatasetTSV | None = None,
              ens: EnsembleSpec | None = None, model_dirs: list | None = None,
              cfg: TrainConfig | None = None) -> RankedList:
    """Rank a compound library against one protein target.

    With train_data the five members are trained fresh; otherwise saved
    artifacts in model_dirs are loaded. Unparseable library entries are
    reported in the failure section, never silently dropped.
    """
    ens = ens or EnsembleSpec()
    members = _ensure_members(ens, train_data, model_dirs, cfg)
    ok = [e for e in library.entries if e.parse_error is None]
    failed = [(e.id, e.name, e.parse_error) for e in library.entries if e.parse_error]
    if not ok:
        return _build_ranked([], [], np.zeros((len(members), 0)),
                             [_member_label(m) for m in members],
                             f"target sequence ({len(target)} aa)", failed)
    pairs = [LabeledPair(e.smiles, target, 0.0) for e in ok]
    per_model = _score_candidates(members, pairs)
    return _build_ranked([e.id for e in ok], [e.name for e in ok], per_model,
                         [_member_label(m) for m in members],
                         f"target sequence ({len(target)} aa)", failed)


def virtual_screen(drug: str, targets: list[tuple[str, str, str]],
                   train_data: DatasetTSV | None = None, ens: EnsembleSpec | None = None,
                   model_dirs: list | None = None, cfg: TrainConfig | None = None) -> RankedList:
    """Rank protein targets for one compound; targets are (id, name, sequence)."""
    ens = ens or EnsembleSpec()
    members = _ensure_members(ens, train_data, model_dirs, cfg)
    pairs = [LabeledPair(drug, seq, 0.0) for _, _, seq in targets]
    per_model = _score_candidates(members, pairs)
    return _build_ranked([t[0] for t in targets], [t[1] for t in targets], per_model,
                         [_member_label(m) for m in members],
                         f"compound {drug}", [])
