"""Command-line interface.

Subcommands cover the whole workflow: `data split`, `vocab train`, `train`,
`eval`, `predict`, `hyperopt`, `repurpose`, `screen`, and `serve`.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import pathlib
import sys

import numpy as np

from . import dataio, espf
from .chemgraph import SmilesError
from .dataio import DataError, LabeledPair
from .drug_features import TableError, load_descriptor_table, normalize_descriptor2d
from .encoders import (DRUG_ENCODERS, PROTEIN_ENCODERS, CompatibilityError,
                       FeatureContext, ModelSpec, UnknownEncoder)
from .persist import ArtifactError, load_model, save_model
from .protein_features import NonstandardResidue, SequenceTooShort
from .screening import EnsembleSpec, repurpose, virtual_screen
from .training import (ConfigError, FeaturizationError, SplitSpec, TrainConfig,
                       data_process, evaluate, hyperparam_search, load_config, train)

USAGE_EXIT, DATA_EXIT, RUNTIME_EXIT = 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message, USAGE_EXIT)


def _check_encoder(side: str, name: str) -> str:
    registry = DRUG_ENCODERS if side == "drug" else PROTEIN_ENCODERS
    if name not in registry:
        raise CliError(
            f"unknown {side} encoder {name!r}; the 15 valid encoder names are: "
            f"drug {sorted(DRUG_ENCODERS)}, protein {sorted(PROTEIN_ENCODERS)}",
            USAGE_EXIT)
    return name


def _build_parser() -> _Parser:
    parser = _Parser(prog="bindkit", description=__doc__)
    parser.add_argument("--seed", type=int, default=None, help="global RNG seed override")
    parser.add_argument("--config", default=None, help="training config file (key = value)")
    # the same globals are accepted after the subcommand; SUPPRESS keeps the
    # subparser from clobbering a value given before it
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--config", default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    data = sub.add_parser("data", help="dataset utilities")
    data_sub = data.add_subparsers(dest="data_command", required=True,
                                   parser_class=_Parser)
    split = data_sub.add_parser("split", parents=[common],
                                help="split a dataset into train/valid/test")
    split.add_argument("--data", required=True)
    split.add_argument("--strategy", default="random",
                       choices=["random", "cold-drug", "cold-target"])
    split.add_argument("--fractions", default="0.7,0.1,0.2")
    split.add_argument("--transform", default=None, help="pkd or binarize:<threshold>")
    split.add_argument("--out", required=True)

    vocab = sub.add_parser("vocab", help="subword vocabulary utilities")
    vocab_sub = vocab.add_subparsers(dest="vocab_command", required=True,
                                     parser_class=_Parser)
    vtrain = vocab_sub.add_parser("train", parents=[common],
                                  help="learn a subword vocabulary")
    vtrain.add_argument("--input", required=True,
                        help="corpus: one string per line, or a pair TSV")
    vtrain.add_argument("--alphabet", required=True, choices=["drug", "protein"])
    vtrain.add_argument("--size", type=int, default=None)
    vtrain.add_argument("--max-tokens", type=int, default=None)
    vtrain.add_argument("--out", required=True)

    tr = sub.add_parser("train", parents=[common], help="train one encoder-pair model")
    tr.add_argument("--train", required=True, dest="train_path")
    tr.add_argument("--valid", required=True, dest="valid_path")
    tr.add_argument("--drug-encoder", default=None)
    tr.add_argument("--target-encoder", default=None)
    tr.add_argument("--task", default="DTI")
    tr.add_argument("--transform", default=None)
    tr.add_argument("--epochs", type=int, default=None)
    tr.add_argument("--batch-size", type=int, default=None)
    tr.add_argument("--lr", type=float, default=None)
    tr.add_argument("--pubchem-table", default=None)
    tr.add_argument("--descriptor2d-table", default=None)
    tr.add_argument("--drug-vocab", default=None)
    tr.add_argument("--protein-vocab", default=None)
    tr.add_argument("--out", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate a saved model on a dataset")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--transform", default=None)

    pr = sub.add_parser("predict", parents=[common], help="score a single compound-target pair")
    pr.add_argument("--model", required=True)
    pr.add_argument("--smiles", required=True)
    pr.add_argument("--target", required=True)

    hy = sub.add_parser("hyperopt", parents=[common], help="random search over training settings")
    hy.add_argument("--train", required=True, dest="train_path")
    hy.add_argument("--valid", required=True, dest="valid_path")
    hy.add_argument("--drug-encoder", default=None)
    hy.add_argument("--target-encoder", default=None)
    hy.add_argument("--task", default="DTI")
    hy.add_argument("--transform", default=None)
    hy.add_argument("--space", required=True,
                    help="file of `key = v1,v2,...` lines over train-config keys")
    hy.add_argument("--budget", type=int, required=True)
    hy.add_argument("--out", default=None, help="write the best model here")

    rp = sub.add_parser("repurpose", parents=[common], help="rank a compound library against one target")
    rp.add_argument("--target", default=None, help="target sequence")
    rp.add_argument("--target-file", default=None, help="file holding the sequence")
    rp.add_argument("--library", required=True)
    rp.add_argument("--train-data", default=None)
    rp.add_argument("--models", default=None, help="comma-separated artifact dirs")
    rp.add_argument("--out", required=True)

    sc = sub.add_parser("screen", parents=[common], help="rank targets for one compound")
    sc.add_argument("--smiles", required=True)
    sc.add_argument("--targets", required=True, help="TSV: id, name, sequence")
    sc.add_argument("--train-data", default=None)
    sc.add_argument("--models", default=None)
    sc.add_argument("--out", required=True)

    sv = sub.add_parser("serve", parents=[common], help="run the HTTP prediction service")
    sv.add_argument("--models", required=True, help="comma-separated artifact dirs")
    sv.add_argument("--port", type=int, default=8000)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--libraries", default=None, help="comma-separated library TSVs")
    sv.add_argument("--static", default=None, help="directory with the web workbench")

    return parser


def _load_dataset(path, transform):
    ds = dataio.load_tsv(path)
    if ds.errors:
        for _, message in ds.errors[:5]:
            print(f"warning: {message}", file=sys.stderr)
    if transform:
        ds = dataio.apply_transform(ds, transform)
    return ds


def _train_config(args) -> TrainConfig:
    cfg = load_config(args.config) if args.config else TrainConfig()
    overrides = {}
    for attr, key in (("seed", "seed"), ("epochs", "epochs"),
                      ("batch_size", "batch_size"), ("lr", "lr")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    if overrides:
        import dataclasses
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _feature_context(args) -> FeatureContext:
    ctx = FeatureContext()
    if getattr(args, "pubchem_table", None):
        ctx.pubchem_table = load_descriptor_table(args.pubchem_table, 881, kind="pubchem")
    if getattr(args, "descriptor2d_table", None):
        raw = load_descriptor_table(args.descriptor2d_table, 200, kind="descriptor2d")
        ctx.descriptor2d_table = normalize_descriptor2d(raw)
    if getattr(args, "drug_vocab", None):
        ctx.drug_vocab = espf.load_vocab(args.drug_vocab)
    if getattr(args, "protein_vocab", None):
        ctx.protein_vocab = espf.load_vocab(args.protein_vocab)
    return ctx


def _model_spec(args) -> ModelSpec:
    if args.drug_encoder:
        _check_encoder("drug", args.drug_encoder)
    if args.target_encoder:
        _check_encoder("protein", args.target_encoder)
    return ModelSpec(task=args.task, drug_encoder=args.drug_encoder,
                     target_encoder=args.target_encoder)


def _cmd_data_split(args) -> int:
    ds = _load_dataset(args.data, args.transform)
    fractions = tuple(float(f) for f in args.fractions.split(","))
    seed = args.seed if args.seed is not None else 42
    split = SplitSpec(strategy=args.strategy, fractions=fractions, seed=seed)
    train_set, valid_set, test_set = data_process(ds.pairs, split)
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, pairs in (("train", train_set), ("valid", valid_set), ("test", test_set)):
        dataio.save_tsv(dataio.DatasetTSV(pairs=pairs, transform=ds.transform),
                        out / f"{name}.tsv")
    print(f"wrote {len(train_set)}/{len(valid_set)}/{len(test_set)} pairs to {out}")
    return 0


def _cmd_vocab_train(args) -> int:
    path = pathlib.Path(args.input)
    with open(path, encoding="utf-8") as fh:
        first = fh.readline().rstrip("\r\n")
        rest = [line.rstrip("\r\n") for line in fh if line.strip()]
    if first.split("\t")[:3] == list(dataio.PAIR_HEADER):
        column = 0 if args.alphabet == "drug" else 1
        corpus = sorted({line.split("\t")[column] for line in rest})
    else:
        corpus = [first] + rest if first else rest
    size = args.size or espf.DEFAULT_VOCAB_SIZE[args.alphabet]
    vocab = espf.train_vocab(corpus, size, alphabet=args.alphabet,
                             max_tokens=args.max_tokens)
    espf.save_vocab(vocab, args.out)
    print(f"trained {args.alphabet} vocabulary: {len(vocab)} tokens, "
          f"{len(vocab.merges)} merges -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    spec = _model_spec(args)
    cfg = _train_config(args)
    ctx = _feature_context(args)
    train_set = _load_dataset(args.train_path, args.transform)
    valid_set = _load_dataset(args.valid_path, args.transform)

    def progress(row):
        bits = [f"epoch {row['epoch']}", f"train {row['train_loss']:.5f}",
                f"valid {row['valid_loss']:.5f}"]
        for key in ("mse", "concordance_index", "pearson", "auroc", "auprc", "f1"):
            if key in row and np.isfinite(row[key]):
                bits.append(f"{key} {row[key]:.4f}")
        print("  ".join(bits), file=sys.stderr)

    tm = train(spec, cfg, train_set.pairs, valid_set.pairs, ctx=ctx, progress=progress)
    save_model(tm, args.out)
    print(f"saved model to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    tm = load_model(args.model)
    ds = _load_dataset(args.data, args.transform)
    result = evaluate(tm, ds.pairs)
    for key, value in result.items():
        print(f"{key}\t{value:.6f}")
    return 0


def _cmd_predict(args) -> int:
    tm = load_model(args.model)
    pair = LabeledPair(args.smiles, args.target, 0.0)
    score = tm.predict([pair])[0]
    print(f"{score:.6f}")
    return 0


def _parse_space(path) -> dict:
    space = {}
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            key = key.strip()
            choices = []
            for cell in value.split(","):
                cell = cell.strip()
                try:
                    choices.append(int(cell))
                except ValueError:
                    choices.append(float(cell))
            space[key] = choices
    return space


def _cmd_hyperopt(args) -> int:
    import dataclasses
    spec = _model_spec(args)
    base = _train_config(args)
    train_set = _load_dataset(args.train_path, args.transform)
    valid_set = _load_dataset(args.valid_path, args.transform)
    space = _parse_space(args.space)
    unknown = set(space) - {f.name for f in dataclasses.fields(TrainConfig)}
    if unknown:
        raise CliError(f"space keys {sorted(unknown)} are not train-config fields",
                       USAGE_EXIT)

    from .training import detect_task
    task_kind = detect_task([p.label for p in train_set.pairs])
    mode = "min" if task_kind == "regression" else "max"
    metric = "mse" if task_kind == "regression" else "auroc"

    def objective(sampled: dict) -> float:
        cfg = dataclasses.replace(base, **sampled)
        tm = train(spec, cfg, train_set.pairs, valid_set.pairs)
        return evaluate(tm, valid_set.pairs)[metric]

    seed = args.seed if args.seed is not None else base.seed
    result = hyperparam_search(space, args.budget, objective, mode=mode, seed=seed)
    print("trial\tconfig\tvalue")
    for i, (cfg, value) in enumerate(result.trials):
        print(f"{i}\t{cfg}\t{value:.6f}")
    print(f"best\t{result.best}\t{result.best_value:.6f}")
    if args.out:
        best_cfg = dataclasses.replace(base, **result.best)
        tm = train(spec, best_cfg, train_set.pairs, valid_set.pairs)
        save_model(tm, args.out)
        print(f"saved best model to {args.out}")
    return 0


def _ensemble_sources(args):
    train_data = _load_dataset(args.train_data, None) if args.train_data else None
    model_dirs = args.models.split(",") if args.models else None
    return train_data, model_dirs


def _cmd_repurpose(args) -> int:
    if bool(args.target) == bool(args.target_file):
        raise CliError("give exactly one of --target / --target-file", USAGE_EXIT)
    target = args.target
    if args.target_file:
        target = pathlib.Path(args.target_file).read_text(encoding="utf-8").strip()
    library = dataio.load_library(args.library)
    train_data, model_dirs = _ensemble_sources(args)
    cfg = _train_config(args)
    ranked = repurpose(target, library, train_data=train_data,
                       ens=EnsembleSpec(), model_dirs=model_dirs, cfg=cfg)
    ranked.to_tsv(args.out)
    print(ranked.banner(), end="")
    for row in ranked.rows[:10]:
        print(f"{row.rank}\t{row.candidate_id}\t{row.name}\t{row.aggregate:.4f}")
    print(f"full list: {args.out}")
    return 0


def _cmd_screen(args) -> int:
    targets = dataio.load_target_list(args.targets)
    train_data, model_dirs = _ensemble_sources(args)
    cfg = _train_config(args)
    ranked = virtual_screen(args.smiles, targets, train_data=train_data,
                            ens=EnsembleSpec(), model_dirs=model_dirs, cfg=cfg)
    ranked.to_tsv(args.out)
    print(ranked.banner(), end="")
    for row in ranked.rows[:10]:
        print(f"{row.rank}\t{row.candidate_id}\t{row.name}\t{row.aggregate:.4f}")
    print(f"full list: {args.out}")
    return 0


def _cmd_serve(args) -> int:
    from .service import run_server
    libraries = args.libraries.split(",") if args.libraries else []
    run_server(model_dirs=args.models.split(","), host=args.host, port=args.port,
               library_paths=libraries, static_dir=args.static)
    return 0


_COMMANDS = {
    "train": _cmd_train, "eval": _cmd_eval, "predict": _cmd_predict,
    "hyperopt": _cmd_hyperopt, "repurpose": _cmd_repurpose, "screen": _cmd_screen,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "data":
            return _cmd_data_split(args)
        if args.command == "vocab":
            return _cmd_vocab_train(args)
        return _COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (UnknownEncoder, CompatibilityError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (DataError, SmilesError, TableError, FeaturizationError, ArtifactError,
            NonstandardResidue, SequenceTooShort, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except KeyboardInterrupt:
        return RUNTIME_EXIT
    except Exception as exc:  # pragma: no cover - last-resort diagnostics
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
