"""Model artifact persistence.

An artifact directory holds:
  config.kv    key = value lines: model spec, train config, task kind
  weights.bin  magic "DPW1", u16 version, u32 tensor count, then per tensor
               (u16 name length, utf-8 name, u8 rank, u32 dims LE, f32 data LE),
               closed by a CRC32 of everything before it
  vocab.drug.txt / vocab.protein.txt   subword vocabularies when used
  pubchem.tsv / descriptor2d.tsv       descriptor tables when used
  log.tsv      per-epoch training rows

Reloading reproduces bit-identical predictions: weights are stored and
restored as float32, and featurization is deterministic.
"""

from __future__ import annotations

import pathlib
import struct
import zlib

import numpy as np

from . import espf
from .drug_features import DescriptorTable, load_descriptor_table, normalize_descriptor2d
from .encoders import FeatureContext, ModelSpec, compose
from .training import TrainConfig, TrainedModel

MAGIC = b"DPW1"
VERSION = 1


class ArtifactError(ValueError):
    pass


class BadMagic(ArtifactError):
    pass


class VersionUnsupported(ArtifactError):
    pass


class ChecksumMismatch(ArtifactError):
    pass


class SpecWeightsMismatch(ArtifactError):
    pass


def write_weights(path, tensors: dict[str, np.ndarray]) -> None:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<HI", VERSION, len(tensors))
    for name, arr in tensors.items():
        arr = np.ascontiguousarray(arr, dtype="<f4")
        encoded = name.encode("utf-8")
        blob += struct.pack("<H", len(encoded))
        blob += encoded
        blob += struct.pack("<B", arr.ndim)
        blob += struct.pack(f"<{arr.ndim}I", *arr.shape)
        blob += arr.tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)))
    with open(path, "wb") as fh:
        fh.write(blob)


def read_weights(path) -> dict[str, np.ndarray]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 14 or blob[:4] != MAGIC:
        raise BadMagic(f"{path}: not a weights file (bad magic)")
    stored_crc, = struct.unpack("<I", blob[-4:])
    if zlib.crc32(blob[:-4]) != stored_crc:
        raise ChecksumMismatch(f"{path}: CRC32 mismatch; file is corrupted")
    version, count = struct.unpack_from("<HI", blob, 4)
    if version != VERSION:
        raise VersionUnsupported(f"{path}: weights version {version}, supported {VERSION}")
    offset = 10
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        name_len, = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        rank, = struct.unpack_from("<B", blob, offset)
        offset += 1
        dims = struct.unpack_from(f"<{rank}I", blob, offset)
        offset += 4 * rank
        n = int(np.prod(dims)) if rank else 1
        arr = np.frombuffer(blob, dtype="<f4", count=n, offset=offset).reshape(dims)
        offset += 4 * n
        out[name] = arr.copy()
    return out


def _write_kv(path, values: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in values.items():
            fh.write(f"{key} = {value}\n")


def _read_kv(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def write_descriptor_table(table: DescriptorTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("smiles\t" + "\t".join(f"c{i}" for i in range(table.length)) + "\n")
        for key, row in table.values.items():
            fh.write(key + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def save_model(tm: TrainedModel, directory) -> None:
    root = pathlib.Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    spec, cfg = tm.spec, tm.config
    kv = {
        "format": VERSION,
        "task": spec.task,
        "task_kind": tm.task_kind,
        "drug_encoder": spec.drug_encoder or "",
        "target_encoder": spec.target_encoder or "",
        "decoder_hidden": ",".join(str(d) for d in spec.decoder_hidden),
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "lr": repr(cfg.lr),
        "latent_dim": cfg.latent_dim,
        "dropout": repr(cfg.dropout),
        "seed": cfg.seed,
        "patience": cfg.patience,
    }
    for key, value in sorted(spec.hyperparams.items()):
        if isinstance(value, (tuple, list)):
            value = ",".join(str(v) for v in value)
        kv[f"hp.{key}"] = value
    _write_kv(root / "config.kv", kv)

    write_weights(root / "weights.bin",
                  {name: p.data for name, p in tm.model.named_parameters().items()})

    ctx = tm.ctx
    if ctx.drug_vocab is not None:
        espf.save_vocab(ctx.drug_vocab, root / "vocab.drug.txt")
    if ctx.protein_vocab is not None:
        espf.save_vocab(ctx.protein_vocab, root / "vocab.protein.txt")
    if ctx.pubchem_table is not None:
        write_descriptor_table(ctx.pubchem_table, root / "pubchem.tsv")
    if ctx.descriptor2d_table is not None:
        # CDF normalization is idempotent (it only depends on ranks), so the
        # normalized table can be stored and re-normalized on load.
        write_descriptor_table(ctx.descriptor2d_table, root / "descriptor2d.tsv")

    if tm.training_log:
        keys = list(tm.training_log[0])
        with open(root / "log.tsv", "w", encoding="utf-8") as fh:
            fh.write("\t".join(keys) + "\n")
            for row in tm.training_log:
                fh.write("\t".join(repr(row.get(k, "")) for k in keys) + "\n")


_TUPLE_HP = {"mlp_hidden", "decoder_hidden", "drug_cnn_filters", "drug_cnn_kernels",
             "protein_cnn_filters", "protein_cnn_kernels"}
_INT_HP = {"latent_dim", "rnn_hidden", "transformer_dim", "transformer_heads",
           "transformer_blocks", "transformer_ff", "mpnn_hidden", "mpnn_steps",
           "pseaac_lam", "qso_maxlag", "drug_vocab_size", "drug_max_tokens",
           "protein_vocab_size", "protein_max_tokens", "drug_maxlen", "protein_maxlen"}
_FLOAT_HP = {"dropout", "pseaac_w", "qso_w"}


def _parse_hp(key: str, value: str):
    if key in _TUPLE_HP:
        return tuple(int(v) for v in value.split(",") if v)
    if key in _INT_HP:
        return int(value)
    if key in _FLOAT_HP:
        return float(value)
    return value


def load_model(directory) -> TrainedModel:
    root = pathlib.Path(directory)
    kv = _read_kv(root / "config.kv")
    if int(kv.get("format", -1)) != VERSION:
        raise VersionUnsupported(f"{root}: artifact format {kv.get('format')!r}")

    hyperparams = {k[3:]: _parse_hp(k[3:], v) for k, v in kv.items() if k.startswith("hp.")}
    spec = ModelSpec(
        task=kv["task"],
        drug_encoder=kv["drug_encoder"] or None,
        target_encoder=kv["target_encoder"] or None,
        decoder_hidden=tuple(int(d) for d in kv["decoder_hidden"].split(",") if d),
        hyperparams=hyperparams,
    )
    cfg = TrainConfig(
        epochs=int(kv["epochs"]), batch_size=int(kv["batch_size"]), lr=float(kv["lr"]),
        latent_dim=int(kv["latent_dim"]), decoder_hidden=spec.decoder_hidden,
        dropout=float(kv["dropout"]), seed=int(kv["seed"]), patience=int(kv["patience"]),
    )

    ctx = FeatureContext()
    if (root / "vocab.drug.txt").exists():
        ctx.drug_vocab = espf.load_vocab(root / "vocab.drug.txt")
    if (root / "vocab.protein.txt").exists():
        ctx.protein_vocab = espf.load_vocab(root / "vocab.protein.txt")
    if (root / "pubchem.tsv").exists():
        ctx.pubchem_table = load_descriptor_table(root / "pubchem.tsv", 881, kind="pubchem")
    if (root / "descriptor2d.tsv").exists():
        raw = load_descriptor_table(root / "descriptor2d.tsv", 200, kind="descriptor2d")
        ctx.descriptor2d_table = normalize_descriptor2d(raw)

    model = compose(spec, ctx, seed=cfg.seed)
    weights = read_weights(root / "weights.bin")
    params = model.named_parameters()
    if set(weights) != set(params):
        missing = sorted(set(params) - set(weights))
        extra = sorted(set(weights) - set(params))
        raise SpecWeightsMismatch(
            f"{root}: weights do not match the configured encoders "
            f"(missing {missing[:3]}, unexpected {extra[:3]})")
    for name, p in params.items():
        if p.data.shape != weights[name].shape:
            raise SpecWeightsMismatch(
                f"{root}: tensor {name} has shape {weights[name].shape}, "
                f"model expects {p.data.shape}")
        p.data = weights[name].astype(p.data.dtype)

    tm = TrainedModel(spec=spec, config=cfg, task_kind=kv["task_kind"], model=model,
                      ctx=ctx)
    tm.model.eval()
    return tm
