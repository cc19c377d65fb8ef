"""Encoder zoo: 8 compound encoders, 7 protein encoders, the feature-
architecture compatibility rules, and composition into task models.

Switching encoders is a matter of naming them: every encoder maps its input
modality to a latent vector of the same configured width, and the decoder MLP
consumes the concatenation, so any valid pair composes without other changes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import chemgraph, drug_features, espf, protein_features
from .nn import autograd as ag
from .nn.autograd import Tensor
from .nn.layers import (BiRNN, Conv1D, Dense, Dropout, Embedding, GlobalMaxPool1D,
                        Module, MPNNStep, Readout, TransformerBlock)

log = logging.getLogger("bindkit.encoders")

TASKS = ("DTI", "DDI", "PPI", "DrugProperty", "ProteinFunction")

# name -> (architecture, modality)
DRUG_ENCODERS = {
    "Morgan-MLP": ("MLP", "fingerprint"),
    "Pubchem-MLP": ("MLP", "fingerprint"),
    "Daylight-MLP": ("MLP", "fingerprint"),
    "Descriptor2D-MLP": ("MLP", "fingerprint"),
    "CNN": ("CNN", "onehot-seq"),
    "CNN-RNN": ("CNN-RNN", "onehot-seq"),
    "Transformer": ("Transformer", "tokens"),
    "MPNN": ("MPNN", "graph"),
}
PROTEIN_ENCODERS = {
    "AAC-MLP": ("MLP", "fingerprint"),
    "PseAAC-MLP": ("MLP", "fingerprint"),
    "ConjointTriad-MLP": ("MLP", "fingerprint"),
    "QuasiSeq-MLP": ("MLP", "fingerprint"),
    "CNN": ("CNN", "onehot-seq"),
    "CNN-RNN": ("CNN-RNN", "onehot-seq"),
    "Transformer": ("Transformer", "tokens"),
}

# What each architecture can consume. MPNN is graph-only (and graphs exist
# only for compounds), which is why there is no protein MPNN.
ARCH_ACCEPTS = {
    "MLP": "fingerprint",
    "CNN": "onehot-seq",
    "CNN-RNN": "onehot-seq",
    "Transformer": "tokens",
    "MPNN": "graph",
}

ALL_ENCODER_NAMES = sorted(set(DRUG_ENCODERS) | set(PROTEIN_ENCODERS))

DEFAULT_HP = {
    "latent_dim": 256,
    "mlp_hidden": (1024, 256),
    "decoder_hidden": (512, 128),
    "dropout": 0.1,
    "drug_cnn_filters": (32, 64, 96),
    "drug_cnn_kernels": (4, 6, 8),
    "drug_maxlen": 100,
    "protein_cnn_filters": (32, 64, 96),
    "protein_cnn_kernels": (4, 8, 12),
    "protein_maxlen": 1000,
    "rnn_hidden": 64,
    "rnn_cell": "gru",
    "transformer_dim": 128,
    "transformer_heads": 8,
    "transformer_blocks": 2,
    "transformer_ff": 512,
    "mpnn_hidden": 64,
    "mpnn_steps": 3,
    "mpnn_readout": "mean",
    "pseaac_lam": 30,
    "pseaac_w": 0.05,
    "qso_maxlag": 30,
    "qso_w": 0.1,
    "nonstandard_policy": "reject",
    "drug_vocab_size": 2048,
    "drug_max_tokens": 50,
    "protein_vocab_size": 4096,
    "protein_max_tokens": 545,
}


class UnknownEncoder(ValueError):
    pass


class BadHyperparam(ValueError):
    pass


class CompatibilityError(ValueError):
    pass


@dataclass(frozen=True)
class EncoderKind:
    side: str  # "drug" | "protein"
    name: str

    def __post_init__(self):
        registry = DRUG_ENCODERS if self.side == "drug" else PROTEIN_ENCODERS
        if self.side not in ("drug", "protein"):
            raise UnknownEncoder(f"encoder side must be drug or protein, got {self.side!r}")
        if self.name not in registry:
            if self.side == "protein" and self.name == "MPNN":
                raise CompatibilityError(
                    "MPNN consumes molecular graphs; protein sequences have none, "
                    "so there is no protein MPNN encoder")
            raise UnknownEncoder(
                f"unknown {self.side} encoder {self.name!r}; valid names: "
                f"{sorted(registry)}")

    @property
    def architecture(self) -> str:
        registry = DRUG_ENCODERS if self.side == "drug" else PROTEIN_ENCODERS
        return registry[self.name][0]

    @property
    def modality(self) -> str:
        registry = DRUG_ENCODERS if self.side == "drug" else PROTEIN_ENCODERS
        return registry[self.name][1]


@dataclass
class ModelSpec:
    task: str = "DTI"
    drug_encoder: str | None = None
    target_encoder: str | None = None
    decoder_hidden: tuple[int, ...] = (512, 128)
    hyperparams: dict = field(default_factory=dict)

    def merged_hp(self) -> dict:
        unknown = set(self.hyperparams) - set(DEFAULT_HP)
        if unknown:
            raise BadHyperparam(f"unknown hyperparameters: {sorted(unknown)}")
        hp = dict(DEFAULT_HP)
        hp.update(self.hyperparams)
        hp["decoder_hidden"] = tuple(self.decoder_hidden)
        for key in ("latent_dim", "rnn_hidden", "transformer_dim", "mpnn_hidden"):
            if int(hp[key]) <= 0:
                raise BadHyperparam(f"{key} must be positive, got {hp[key]}")
        return hp


def validate_combination(spec: ModelSpec) -> None:
    """Raise CompatibilityError/UnknownEncoder unless the spec is buildable."""
    if spec.task not in TASKS:
        raise CompatibilityError(f"unknown task {spec.task!r}; expected one of {TASKS}")
    needs = {
        "DTI": (True, True), "DDI": (True, False), "PPI": (False, True),
        "DrugProperty": (True, False), "ProteinFunction": (False, True),
    }[spec.task]
    if needs[0] != (spec.drug_encoder is not None) or needs[1] != (spec.target_encoder is not None):
        raise CompatibilityError(
            f"task {spec.task} requires drug_encoder={'set' if needs[0] else 'unset'} "
            f"and target_encoder={'set' if needs[1] else 'unset'}")
    for side, name in (("drug", spec.drug_encoder), ("protein", spec.target_encoder)):
        if name is None:
            continue
        kind = EncoderKind(side, name)
        expected = ARCH_ACCEPTS[kind.architecture]
        if kind.modality != expected:
            raise CompatibilityError(
                f"{kind.architecture} consumes {expected} features, "
                f"but {name} provides {kind.modality}")


def valid_dti_pairs() -> list[tuple[str, str]]:
    """All (drug encoder, protein encoder) pairs that validate for DTI."""
    pairs = []
    for d in DRUG_ENCODERS:
        for p in PROTEIN_ENCODERS:
            spec = ModelSpec(task="DTI", drug_encoder=d, target_encoder=p)
            try:
                validate_combination(spec)
            except (CompatibilityError, UnknownEncoder):
                continue
            pairs.append((d, p))
    return sorted(pairs)


# -- feature context -------------------------------------------------------

@dataclass
class FeatureContext:
    """Everything featurization needs beyond the raw strings: learned subword
    vocabularies and ingested descriptor tables."""

    drug_vocab: espf.SubwordVocab | None = None
    protein_vocab: espf.SubwordVocab | None = None
    pubchem_table: drug_features.DescriptorTable | None = None
    descriptor2d_table: drug_features.DescriptorTable | None = None


class MissingContext(ValueError):
    pass


# -- per-string character alphabets for the one-hot encoders ----------------

_SMILES_CHARS = (
    "#%()+-./:=@[]\\" + "0123456789"
    + "ABCDEFGHIJKLMNOPQRSTUVWXYZ" + "abcehilnoprsu"
)
SMILES_ALPHABET_SIZE = len(_SMILES_CHARS) + 1  # slot 0 is the unknown slot
assert SMILES_ALPHABET_SIZE == 64
_SMILES_INDEX = {c: i + 1 for i, c in enumerate(_SMILES_CHARS)}

PROTEIN_ALPHABET_SIZE = 26


def _smiles_char_ids(s: str) -> np.ndarray:
    return np.array([_SMILES_INDEX.get(c, 0) for c in s], dtype=np.int16)


def _protein_char_ids(s: str) -> np.ndarray:
    up = s.upper()
    return np.array([(ord(c) - 65) if "A" <= c <= "Z" else (ord("X") - 65) for c in up],
                    dtype=np.int16)


# -- batch containers --------------------------------------------------------

@dataclass
class VectorBatch:
    values: np.ndarray  # (B, D)


@dataclass
class SeqBatch:
    onehot: np.ndarray  # (B, alphabet, L)
    lengths: np.ndarray  # (B,), valid positions per sample


@dataclass
class TokenBatch:
    ids: np.ndarray  # (B, T)
    mask: np.ndarray  # (B, T) bool


@dataclass
class GraphBatch:
    atom_feats: np.ndarray  # (N, atom_dim)
    edge_feats: np.ndarray  # (E, edge_dim), directed (both directions per bond)
    src: np.ndarray
    dst: np.ndarray
    graph_ids: np.ndarray  # (N,)
    num_graphs: int


# -- featurizers (cached per unique string) -----------------------------------

class FingerprintFeaturizer:
    def __init__(self, fn, dim: int):
        self.fn = fn
        self.dim = dim
        self._cache: dict[str, np.ndarray] = {}

    def __call__(self, strings: list[str]) -> VectorBatch:
        rows = []
        for s in strings:
            vec = self._cache.get(s)
            if vec is None:
                vec = self.fn(s)
                self._cache[s] = vec
            rows.append(vec)
        return VectorBatch(np.stack(rows))


class SeqFeaturizer:
    def __init__(self, side: str, maxlen: int, min_len: int):
        self.side = side
        self.maxlen = maxlen
        self.min_len = min_len
        self.alphabet = SMILES_ALPHABET_SIZE if side == "drug" else PROTEIN_ALPHABET_SIZE
        self._ids = _smiles_char_ids if side == "drug" else _protein_char_ids
        self._cache: dict[str, np.ndarray] = {}

    def __call__(self, strings: list[str]) -> SeqBatch:
        encoded = []
        for s in strings:
            ids = self._cache.get(s)
            if ids is None:
                ids = self._ids(s)
                if len(ids) > self.maxlen:
                    log.warning("%s sequence of length %d truncated to %d",
                                self.side, len(ids), self.maxlen)
                    ids = ids[:self.maxlen]
                self._cache[s] = ids
            encoded.append(ids)
        batch_len = max(self.min_len, max((len(e) for e in encoded), default=1))
        onehot = np.zeros((len(encoded), self.alphabet, batch_len), dtype=np.float32)
        lengths = np.zeros(len(encoded), dtype=np.int64)
        for b, ids in enumerate(encoded):
            onehot[b, ids, np.arange(len(ids))] = 1.0
            lengths[b] = max(len(ids), self.min_len)
        return SeqBatch(onehot=onehot, lengths=lengths)


class TokenFeaturizer:
    def __init__(self, vocab: espf.SubwordVocab):
        self.vocab = vocab
        self._cache: dict[str, espf.TokenSeq] = {}

    def __call__(self, strings: list[str]) -> TokenBatch:
        seqs = []
        for s in strings:
            ts = self._cache.get(s)
            if ts is None:
                ts = espf.tokenize(self.vocab, s)
                self._cache[s] = ts
            seqs.append(ts)
        longest = max((int(ts.mask.sum()) for ts in seqs), default=1)
        longest = max(longest, 1)
        ids = np.stack([ts.ids[:longest] for ts in seqs])
        mask = np.stack([ts.mask[:longest] for ts in seqs])
        return TokenBatch(ids=ids, mask=mask)


class GraphFeaturizer:
    def __init__(self):
        self._cache: dict[str, drug_features.GraphFeatures] = {}

    def __call__(self, strings: list[str]) -> GraphBatch:
        feats = []
        for s in strings:
            gf = self._cache.get(s)
            if gf is None:
                gf = drug_features.graph_features(chemgraph.parse_smiles(s))
                self._cache[s] = gf
            feats.append(gf)
        atom_rows, edge_rows, srcs, dsts, gids = [], [], [], [], []
        offset = 0
        for gi, gf in enumerate(feats):
            n = gf.atom_feats.shape[0]
            atom_rows.append(gf.atom_feats)
            gids.append(np.full(n, gi, dtype=np.int64))
            if gf.bond_endpoints.size:
                a, b = gf.bond_endpoints[:, 0] + offset, gf.bond_endpoints[:, 1] + offset
                srcs.extend([a, b])
                dsts.extend([b, a])
                edge_rows.extend([gf.bond_feats, gf.bond_feats])
            offset += n
        atom_feats = np.concatenate(atom_rows)
        if edge_rows:
            edge_feats = np.concatenate(edge_rows)
            src = np.concatenate(srcs)
            dst = np.concatenate(dsts)
        else:
            edge_feats = np.zeros((0, drug_features.BOND_FEATURE_DIM), dtype=np.float32)
            src = np.zeros(0, dtype=np.int64)
            dst = np.zeros(0, dtype=np.int64)
        return GraphBatch(atom_feats, edge_feats, src, dst,
                          np.concatenate(gids), len(feats))


def make_featurizer(kind: EncoderKind, hp: dict, ctx: FeatureContext):
    """Featurizer callable for one encoder; raises MissingContext when a
    required vocabulary or descriptor table is absent."""
    if kind.side == "drug":
        if kind.name == "Morgan-MLP":
            return FingerprintFeaturizer(
                lambda s: drug_features.morgan_fingerprint(chemgraph.parse_smiles(s)),
                drug_features.MORGAN_BITS)
        if kind.name == "Daylight-MLP":
            return FingerprintFeaturizer(
                lambda s: drug_features.path_fingerprint(chemgraph.parse_smiles(s)),
                drug_features.PATH_BITS)
        if kind.name == "Pubchem-MLP":
            if ctx.pubchem_table is None:
                raise MissingContext("Pubchem-MLP needs a loaded 881-bit descriptor table")
            return FingerprintFeaturizer(ctx.pubchem_table.get, drug_features.PUBCHEM_LEN)
        if kind.name == "Descriptor2D-MLP":
            if ctx.descriptor2d_table is None:
                raise MissingContext("Descriptor2D-MLP needs a loaded 200-column table")
            if not ctx.descriptor2d_table.normalized:
                raise MissingContext("descriptor table must be CDF-normalized before use")
            return FingerprintFeaturizer(ctx.descriptor2d_table.get, drug_features.DESCRIPTOR2D_LEN)
        if kind.name in ("CNN", "CNN-RNN"):
            kernels = hp["drug_cnn_kernels"]
            return SeqFeaturizer("drug", hp["drug_maxlen"], sum(k - 1 for k in kernels) + 1)
        if kind.name == "Transformer":
            if ctx.drug_vocab is None:
                raise MissingContext("drug Transformer needs a trained subword vocabulary")
            return TokenFeaturizer(ctx.drug_vocab)
        if kind.name == "MPNN":
            return GraphFeaturizer()
    else:
        policy = hp["nonstandard_policy"]
        if kind.name == "AAC-MLP":
            return FingerprintFeaturizer(
                lambda s: protein_features.aac_kmers(protein_features.clean_sequence(s, policy)),
                protein_features.AAC_LEN)
        if kind.name == "PseAAC-MLP":
            lam, w = hp["pseaac_lam"], hp["pseaac_w"]
            return FingerprintFeaturizer(
                lambda s: protein_features.pseaac(protein_features.clean_sequence(s, policy),
                                                  lam=lam, w=w),
                20 + lam)
        if kind.name == "ConjointTriad-MLP":
            return FingerprintFeaturizer(
                lambda s: protein_features.conjoint_triad(
                    protein_features.clean_sequence(s, policy)),
                343)
        if kind.name == "QuasiSeq-MLP":
            maxlag, w = hp["qso_maxlag"], hp["qso_w"]
            return FingerprintFeaturizer(
                lambda s: protein_features.quasi_sequence_order(
                    protein_features.clean_sequence(s, policy), maxlag=maxlag, w=w),
                20 + maxlag)
        if kind.name in ("CNN", "CNN-RNN"):
            kernels = hp["protein_cnn_kernels"]
            return SeqFeaturizer("protein", hp["protein_maxlen"], sum(k - 1 for k in kernels) + 1)
        if kind.name == "Transformer":
            if ctx.protein_vocab is None:
                raise MissingContext("protein Transformer needs a trained subword vocabulary")
            return TokenFeaturizer(ctx.protein_vocab)
    raise UnknownEncoder(f"no featurizer for {kind.side}/{kind.name}")


# -- encoder modules -----------------------------------------------------------

class MLPEncoder(Module):
    def __init__(self, in_dim: int, hidden: tuple[int, ...], latent: int,
                 rng: np.random.Generator):
        super().__init__()
        self.in_dim = in_dim
        self.output_dim = latent
        dims = [in_dim, *hidden, latent]
        self.layers = [Dense(a, b, rng) for a, b in zip(dims, dims[1:])]

    def forward(self, batch: VectorBatch) -> Tensor:
        x = Tensor(batch.values)
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i + 1 < len(self.layers):
                x = ag.relu(x)
        return x


class ConvStack(Module):
    """Shared convolution trunk: stacked valid-padding Conv1D + ReLU, tracking
    each sample's surviving valid length."""

    def __init__(self, alphabet: int, filters: tuple[int, ...], kernels: tuple[int, ...],
                 rng: np.random.Generator):
        super().__init__()
        chans = [alphabet, *filters]
        self.convs = [Conv1D(cin, cout, k, rng)
                      for cin, cout, k in zip(chans, chans[1:], kernels)]

    def forward(self, batch: SeqBatch) -> tuple[Tensor, np.ndarray]:
        x = Tensor(batch.onehot)
        lengths = batch.lengths.copy()
        for conv in self.convs:
            x = ag.relu(conv(x))
            lengths = lengths - (conv.kernel - 1)
        return x, lengths


class CNNEncoder(Module):
    def __init__(self, alphabet: int, filters: tuple[int, ...], kernels: tuple[int, ...],
                 latent: int, rng: np.random.Generator):
        super().__init__()
        self.output_dim = latent
        self.trunk = ConvStack(alphabet, filters, kernels, rng)
        self.pool = GlobalMaxPool1D()
        self.out = Dense(filters[-1], latent, rng)

    def forward(self, batch: SeqBatch) -> Tensor:
        x, lengths = self.trunk(batch)
        return self.out(self.pool(x, lengths))


class CNNRNNEncoder(Module):
    def __init__(self, alphabet: int, filters: tuple[int, ...], kernels: tuple[int, ...],
                 rnn_hidden: int, cell: str, latent: int, rng: np.random.Generator):
        super().__init__()
        self.output_dim = latent
        self.trunk = ConvStack(alphabet, filters, kernels, rng)
        self.rnn = BiRNN(filters[-1], rnn_hidden, rng, cell=cell)
        self.out = Dense(2 * rnn_hidden, latent, rng)

    def forward(self, batch: SeqBatch) -> Tensor:
        x, lengths = self.trunk(batch)
        steps = x.shape[-1]
        mask = np.arange(steps)[None, :] < lengths[:, None]
        seq = ag.transpose(x, (0, 2, 1))  # (B, T, C)
        return self.out(self.rnn(seq, mask))


class TransformerEncoder(Module):
    def __init__(self, vocab_size: int, max_tokens: int, dim: int, heads: int,
                 blocks: int, ff_dim: int, latent: int, dropout: float,
                 rng: np.random.Generator):
        super().__init__()
        self.output_dim = latent
        self.tok = Embedding(vocab_size, dim, rng)
        self.pos = Embedding(max_tokens, dim, rng)
        self.blocks = [TransformerBlock(dim, heads, ff_dim, rng, dropout)
                       for _ in range(blocks)]
        self.out = Dense(dim, latent, rng)

    def forward(self, batch: TokenBatch) -> Tensor:
        steps = batch.ids.shape[1]
        x = self.tok(batch.ids) + self.pos(np.arange(steps))
        for block in self.blocks:
            x = block(x, batch.mask)
        weights = batch.mask.astype(x.data.dtype)
        counts = np.maximum(weights.sum(axis=1, keepdims=True), 1.0)
        pooled = ag.tsum(x * Tensor(weights[:, :, None]), axis=1) * Tensor(1.0 / counts)
        return self.out(pooled)


class MPNNEncoder(Module):
    def __init__(self, atom_dim: int, edge_dim: int, hidden: int, steps: int,
                 readout: str, latent: int, rng: np.random.Generator):
        super().__init__()
        self.output_dim = latent
        self.steps = steps
        self.proj = Dense(atom_dim, hidden, rng)
        self.step = MPNNStep(hidden, edge_dim, rng)
        self.readout = Readout(readout)
        self.out = Dense(hidden, latent, rng)

    def forward(self, batch: GraphBatch) -> Tensor:
        h = ag.relu(self.proj(Tensor(batch.atom_feats)))
        edge_feats = Tensor(batch.edge_feats)
        for _ in range(self.steps):
            h = self.step(h, edge_feats, batch.src, batch.dst)
        pooled = self.readout(h, batch.graph_ids, batch.num_graphs)
        return self.out(pooled)


def build_encoder(kind: EncoderKind, hp: dict, rng: np.random.Generator,
                  ctx: FeatureContext) -> Module:
    latent = int(hp["latent_dim"])
    arch = kind.architecture
    if arch == "MLP":
        featurizer_dim = {
            "Morgan-MLP": drug_features.MORGAN_BITS,
            "Pubchem-MLP": drug_features.PUBCHEM_LEN,
            "Daylight-MLP": drug_features.PATH_BITS,
            "Descriptor2D-MLP": drug_features.DESCRIPTOR2D_LEN,
            "AAC-MLP": protein_features.AAC_LEN,
            "PseAAC-MLP": 20 + int(hp["pseaac_lam"]),
            "ConjointTriad-MLP": 343,
            "QuasiSeq-MLP": 20 + int(hp["qso_maxlag"]),
        }[kind.name]
        return MLPEncoder(featurizer_dim, tuple(hp["mlp_hidden"]), latent, rng)
    if arch in ("CNN", "CNN-RNN"):
        if kind.side == "drug":
            alphabet, filters, kernels = (SMILES_ALPHABET_SIZE, hp["drug_cnn_filters"],
                                          hp["drug_cnn_kernels"])
        else:
            alphabet, filters, kernels = (PROTEIN_ALPHABET_SIZE, hp["protein_cnn_filters"],
                                          hp["protein_cnn_kernels"])
        if arch == "CNN":
            return CNNEncoder(alphabet, tuple(filters), tuple(kernels), latent, rng)
        return CNNRNNEncoder(alphabet, tuple(filters), tuple(kernels),
                             int(hp["rnn_hidden"]), hp["rnn_cell"], latent, rng)
    if arch == "Transformer":
        vocab = ctx.drug_vocab if kind.side == "drug" else ctx.protein_vocab
        if vocab is None:
            raise MissingContext(f"{kind.side} Transformer needs a subword vocabulary")
        return TransformerEncoder(len(vocab), vocab.max_tokens, int(hp["transformer_dim"]),
                                  int(hp["transformer_heads"]), int(hp["transformer_blocks"]),
                                  int(hp["transformer_ff"]), latent, float(hp["dropout"]), rng)
    if arch == "MPNN":
        return MPNNEncoder(drug_features.ATOM_FEATURE_DIM, drug_features.BOND_FEATURE_DIM,
                           int(hp["mpnn_hidden"]), int(hp["mpnn_steps"]),
                           hp["mpnn_readout"], latent, rng)
    raise UnknownEncoder(f"no builder for architecture {arch}")


class DecoderMLP(Module):
    def __init__(self, in_dim: int, hidden: tuple[int, ...], dropout: float,
                 rng: np.random.Generator):
        super().__init__()
        dims = [in_dim, *hidden]
        self.layers = [Dense(a, b, rng) for a, b in zip(dims, dims[1:])]
        self.head = Dense(dims[-1], 1, rng)
        self.drop = Dropout(dropout, np.random.default_rng(int(rng.integers(2 ** 63))))

    def forward(self, x: Tensor) -> Tensor:
        for layer in self.layers:
            x = self.drop(ag.relu(layer(x)))
        return self.head(x)


class ComposedModel(Module):
    """Encoders -> concatenated latents -> MLP decoder -> raw scalar score.

    The sigmoid for classification lives in the loss / inference path, not
    here, so the model output is always a linear score.
    """

    def __init__(self, spec: ModelSpec, ctx: FeatureContext, seed: int = 0):
        super().__init__()
        validate_combination(spec)
        hp = spec.merged_hp()
        self.spec = spec
        self.hp = hp
        self.ctx = ctx
        rng = np.random.default_rng(np.random.SeedSequence(seed))

        sides = {
            "DTI": (("drug", spec.drug_encoder), ("protein", spec.target_encoder)),
            "DDI": (("drug", spec.drug_encoder), ("drug", spec.drug_encoder)),
            "PPI": (("protein", spec.target_encoder), ("protein", spec.target_encoder)),
            "DrugProperty": (("drug", spec.drug_encoder),),
            "ProteinFunction": (("protein", spec.target_encoder),),
        }[spec.task]
        self.branches = []
        self.featurizers = []
        for side, name in sides:
            kind = EncoderKind(side, name)
            self.branches.append(build_encoder(kind, hp, rng, ctx))
            self.featurizers.append(make_featurizer(kind, hp, ctx))
        total = sum(enc.output_dim for enc in self.branches)
        self.decoder = DecoderMLP(total, tuple(hp["decoder_hidden"]), float(hp["dropout"]), rng)

    def forward(self, *string_lists: list[str]) -> Tensor:
        if len(string_lists) != len(self.branches):
            raise ag.ShapeMismatch(
                f"model takes {len(self.branches)} input lists, got {len(string_lists)}")
        latents = [enc(feat(strings)) for enc, feat, strings
                   in zip(self.branches, self.featurizers, string_lists)]
        joint = latents[0] if len(latents) == 1 else ag.concat(latents, axis=1)
        return ag.reshape(self.decoder(joint), (-1,))


def compose(spec: ModelSpec, ctx: FeatureContext | None = None, seed: int = 0) -> ComposedModel:
    return ComposedModel(spec, ctx if ctx is not None else FeatureContext(), seed=seed)
