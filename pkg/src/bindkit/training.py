"""Training engine: task detection, losses, data splits, the mini-batch loop
with early stopping, hyperparameter search, and prediction.

The workflow mirrors six steps: load data, name the encoders, split, make a
config, build or reload a model, train while streaming per-epoch metrics.
"""

from __future__ import annotations

import dataclasses
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import metrics as metrics_mod
from .dataio import LabeledPair
from .encoders import ComposedModel, FeatureContext, ModelSpec, compose, validate_combination
from .espf import DEFAULT_MAX_TOKENS, DEFAULT_VOCAB_SIZE, train_vocab
from .metrics import LengthMismatch
from .nn import autograd as ag
from .nn.autograd import Tensor
from .nn.optim import Adam

log = logging.getLogger("bindkit.training")


class EmptyLabels(ValueError):
    pass


class DegenerateLabels(UserWarning):
    pass


class TooFewEntities(ValueError):
    pass


class FeaturizationError(ValueError):
    def __init__(self, row: int, cause: Exception):
        super().__init__(f"row {row}: {cause}")
        self.row = row
        self.cause = cause


class NonFiniteLoss(RuntimeError):
    pass


# -- task detection and losses -------------------------------------------------

def detect_task(labels) -> str:
    """classification iff the unique label set is a subset of {0, 1}."""
    labels = list(labels)
    if not labels:
        raise EmptyLabels("cannot detect a task from zero labels")
    unique = set(float(x) for x in labels)
    if unique <= {0.0, 1.0}:
        if len(unique) == 1:
            warnings.warn("labels contain a single class; classification metrics will "
                          "be degenerate", DegenerateLabels, stacklevel=2)
        return "classification"
    return "regression"


def mse_loss(y, yhat) -> Tensor:
    """(1/n) * sum((y_i - yhat_i)^2); differentiable through yhat."""
    y, yhat = ag.as_tensor(y), ag.as_tensor(yhat)
    if y.shape != yhat.shape:
        raise LengthMismatch(f"labels {y.shape} vs predictions {yhat.shape}")
    diff = ag.sub(yhat, y)
    return ag.tmean(diff * diff)


BCE_EPS = 1e-7


def bce_loss(y, probs) -> Tensor:
    """Mean binary cross entropy on probabilities, clamped to [eps, 1-eps].

    This is the minimized (non-negative) form; gradients flow through probs.
    """
    y, probs = ag.as_tensor(y), ag.as_tensor(probs)
    if y.shape != probs.shape:
        raise LengthMismatch(f"labels {y.shape} vs probabilities {probs.shape}")
    p = ag.clip(probs, BCE_EPS, 1.0 - BCE_EPS)
    ll = y * ag.log(p) + (1.0 - y) * ag.log(1.0 - p)
    return -ag.tmean(ll)


def bce_with_logits(y, logits) -> Tensor:
    """Numerically stable BCE on raw scores: mean(softplus(z) - y*z)."""
    y, logits = ag.as_tensor(y), ag.as_tensor(logits)
    if y.shape != logits.shape:
        raise LengthMismatch(f"labels {y.shape} vs logits {logits.shape}")
    return ag.tmean(ag.softplus(logits) - y * logits)


def sigmoid_np(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# -- splits ---------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSpec:
    strategy: str = "random"  # random | cold-drug | cold-target
    fractions: tuple[float, float, float] = (0.7, 0.1, 0.2)
    seed: int = 42

    def __post_init__(self):
        if self.strategy not in ("random", "cold-drug", "cold-target"):
            raise ValueError(f"unknown split strategy {self.strategy!r}")
        if any(f <= 0 for f in self.fractions) or abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError(f"fractions must be positive and sum to 1, got {self.fractions}")


def _three_way_counts(n: int, fractions) -> tuple[int, int, int]:
    # Declared rounding: floor, floor, remainder.
    n_train = int(np.floor(fractions[0] * n))
    n_valid = int(np.floor(fractions[1] * n))
    return n_train, n_valid, n - n_train - n_valid


def data_process(pairs: list[LabeledPair], split: SplitSpec):
    """Split labeled pairs into (train, valid, test).

    random shuffles pairs; cold-drug / cold-target partition the unique
    entities so no drug (target) ever crosses fold boundaries.
    """
    rng = np.random.default_rng(split.seed)
    if split.strategy == "random":
        order = rng.permutation(len(pairs))
        n_train, n_valid, _ = _three_way_counts(len(pairs), split.fractions)
        train = [pairs[i] for i in order[:n_train]]
        valid = [pairs[i] for i in order[n_train:n_train + n_valid]]
        test = [pairs[i] for i in order[n_train + n_valid:]]
        return train, valid, test

    key = (lambda p: p.drug) if split.strategy == "cold-drug" else (lambda p: p.target)
    entities = list(dict.fromkeys(key(p) for p in pairs))  # first-appearance order
    order = rng.permutation(len(entities))
    n_train, n_valid, n_test = _three_way_counts(len(entities), split.fractions)
    if min(n_train, n_valid, n_test) == 0:
        raise TooFewEntities(
            f"{split.strategy} needs enough unique entities for three folds; "
            f"got {len(entities)} -> {n_train}/{n_valid}/{n_test}")
    fold_of = {}
    for rank, idx in enumerate(order):
        fold_of[entities[idx]] = 0 if rank < n_train else (1 if rank < n_train + n_valid else 2)
    folds: tuple[list, list, list] = ([], [], [])
    for p in pairs:
        folds[fold_of[key(p)]].append(p)
    return folds


# -- configuration ---------------------------------------------------------------

@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 256
    lr: float = 1e-4
    latent_dim: int = 256
    decoder_hidden: tuple[int, ...] = (512, 128)
    dropout: float = 0.1
    seed: int = 42
    patience: int = 10
    task: str | None = None  # override auto-detection

    def __post_init__(self):
        for name in ("epochs", "batch_size", "patience", "latent_dim"):
            if int(getattr(self, name)) < 0 or (name != "epochs" and int(getattr(self, name)) == 0):
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.task not in (None, "regression", "classification"):
            raise ValueError(
                f"task override must be regression or classification, got {self.task!r}")


class ConfigError(ValueError):
    pass


_CONFIG_PARSERS = {
    "epochs": int, "batch_size": int, "lr": float, "latent_dim": int,
    "dropout": float, "seed": int, "patience": int, "task": str,
    "decoder_hidden": lambda s: tuple(int(x) for x in s.split(",") if x),
}


def parse_config_text(text: str, path: str = "<config>") -> TrainConfig:
    """`key = value` lines with # comments; unknown keys are rejected."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _CONFIG_PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return TrainConfig(**values)


def load_config(path) -> TrainConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), str(path))


# -- the trained-model handle -----------------------------------------------------

@dataclass
class TrainedModel:
    spec: ModelSpec
    config: TrainConfig
    task_kind: str  # regression | classification
    model: ComposedModel
    ctx: FeatureContext
    training_log: list[dict] = field(default_factory=list)

    def _inputs(self, pairs: list[LabeledPair]) -> tuple[list[str], ...]:
        task = self.spec.task
        if task in ("DTI", "DDI", "PPI"):
            return [p.drug for p in pairs], [p.target for p in pairs]
        if task == "DrugProperty":
            return ([p.drug for p in pairs],)
        return ([p.target for p in pairs],)

    def raw_scores(self, pairs: list[LabeledPair], batch_size: int = 256) -> np.ndarray:
        self.model.eval()
        chunks = []
        with ag.no_grad():
            for start in range(0, len(pairs), batch_size):
                chunk = pairs[start:start + batch_size]
                chunks.append(self.model(*self._inputs(chunk)).data)
        return np.concatenate(chunks) if chunks else np.zeros(0, dtype=np.float32)

    def predict(self, pairs: list[LabeledPair], batch_size: int = 256) -> np.ndarray:
        """Raw scores for regression; sigmoid probabilities for classification.
        Output order matches input order."""
        scores = self.raw_scores(pairs, batch_size)
        if self.task_kind == "classification":
            return sigmoid_np(scores).astype(scores.dtype)
        return scores

    def predict_flagged(self, pairs: list[LabeledPair], batch_size: int = 256):
        """Like predict, but featurization failures mark rows NaN instead of
        raising; returns (scores, {row: error})."""
        good, errors = [], {}
        for i, p in enumerate(pairs):
            try:
                _check_featurizable(self.model, self.spec.task, p)
                good.append((i, p))
            except FeaturizationError as exc:  # row index is local here
                errors[i] = exc.cause
        out = np.full(len(pairs), np.nan, dtype=np.float64)
        if good:
            scores = self.predict([p for _, p in good], batch_size)
            for (i, _), s in zip(good, scores):
                out[i] = s
        return out, errors


def _check_featurizable(model: ComposedModel, task: str, pair: LabeledPair) -> None:
    strings = {
        "DTI": (pair.drug, pair.target), "DDI": (pair.drug, pair.target),
        "PPI": (pair.drug, pair.target), "DrugProperty": (pair.drug,),
        "ProteinFunction": (pair.target,),
    }[task]
    for feat, s in zip(model.featurizers, strings):
        try:
            feat([s])
        except Exception as exc:
            raise FeaturizationError(-1, exc) from exc


# -- training --------------------------------------------------------------------

def prepare_context(spec: ModelSpec, train_pairs: list[LabeledPair],
                    ctx: FeatureContext | None = None) -> FeatureContext:
    """Fill in whatever the spec's encoders need and the caller didn't supply:
    subword vocabularies are trained on the training corpus."""
    ctx = ctx or FeatureContext()
    hp = spec.merged_hp()
    drug_needs = spec.drug_encoder == "Transformer"
    protein_needs = spec.target_encoder == "Transformer"
    if drug_needs and ctx.drug_vocab is None:
        corpus = sorted({p.drug for p in train_pairs})
        ctx.drug_vocab = train_vocab(corpus, int(hp["drug_vocab_size"]), alphabet="drug",
                                     max_tokens=int(hp["drug_max_tokens"]))
        log.info("trained drug vocabulary: %d tokens", len(ctx.drug_vocab))
    if protein_needs and ctx.protein_vocab is None:
        corpus = sorted({p.target for p in train_pairs})
        ctx.protein_vocab = train_vocab(corpus, int(hp["protein_vocab_size"]),
                                        alphabet="protein",
                                        max_tokens=int(hp["protein_max_tokens"]))
        log.info("trained protein vocabulary: %d tokens", len(ctx.protein_vocab))
    return ctx


def _effective_spec(spec: ModelSpec, cfg: TrainConfig) -> ModelSpec:
    hp = {"latent_dim": cfg.latent_dim, "dropout": cfg.dropout, **spec.hyperparams}
    return dataclasses.replace(spec, decoder_hidden=tuple(cfg.decoder_hidden), hyperparams=hp)


def _snapshot(model: ComposedModel) -> dict[str, np.ndarray]:
    return {name: p.data.copy() for name, p in model.named_parameters().items()}


def _restore(model: ComposedModel, weights: dict[str, np.ndarray]) -> None:
    for name, p in model.named_parameters().items():
        p.data[...] = weights[name]


def train(spec: ModelSpec, cfg: TrainConfig, train_pairs: list[LabeledPair],
          valid_pairs: list[LabeledPair], ctx: FeatureContext | None = None,
          progress=None) -> TrainedModel:
    """Mini-batch Adam on the task loss with early stopping on validation loss.

    Every epoch appends a log row (and streams it to `progress` when given);
    the returned model carries the best-validation weights.
    """
    validate_combination(spec)
    spec = _effective_spec(spec, cfg)
    task_kind = cfg.task or detect_task([p.label for p in train_pairs])
    ctx = prepare_context(spec, train_pairs, ctx)
    model = compose(spec, ctx, seed=cfg.seed)

    # Warm the featurization caches; failures get a row index here.
    for i, p in enumerate(train_pairs + valid_pairs):
        try:
            _check_featurizable(model, spec.task, p)
        except FeaturizationError as exc:
            raise FeaturizationError(i, exc.cause) from exc

    tm = TrainedModel(spec=spec, config=cfg, task_kind=task_kind, model=model, ctx=ctx)
    if cfg.epochs == 0:
        model.eval()
        return tm

    loss_fn = mse_loss if task_kind == "regression" else bce_with_logits
    optimizer = Adam(model.parameters(), lr=cfg.lr)
    shuffle_rng = np.random.default_rng([cfg.seed, 1])
    y_train = np.array([p.label for p in train_pairs])
    y_valid = np.array([p.label for p in valid_pairs])

    best_loss = np.inf
    best_weights = _snapshot(model)
    best_epoch = -1
    since_best = 0

    for epoch in range(cfg.epochs):
        model.train()
        order = shuffle_rng.permutation(len(train_pairs))
        epoch_loss = 0.0
        for start in range(0, len(order), cfg.batch_size):
            batch_idx = order[start:start + cfg.batch_size]
            batch = [train_pairs[i] for i in batch_idx]
            scores = model(*tm._inputs(batch))
            loss = loss_fn(y_train[batch_idx], scores)
            value = loss.item()
            if not np.isfinite(value):
                raise NonFiniteLoss(
                    f"epoch {epoch}: loss became {value} on a batch of {len(batch)} "
                    f"(lr={cfg.lr}); stopping")
            ag.backward(loss)
            optimizer.step()
            optimizer.zero_grad()
            epoch_loss += value * len(batch)
        epoch_loss /= len(train_pairs)

        row = {"epoch": epoch, "train_loss": epoch_loss}
        if valid_pairs:
            raw = tm.raw_scores(valid_pairs, cfg.batch_size)
            if task_kind == "regression":
                row["valid_loss"] = float(np.mean((raw - y_valid) ** 2))
                row.update(metrics_mod.regression_metrics(y_valid, raw))
            else:
                probs = sigmoid_np(raw)
                row["valid_loss"] = bce_with_logits(y_valid.astype(raw.dtype), raw).item()
                row.update(metrics_mod.classification_metrics(y_valid, probs))
        else:
            row["valid_loss"] = epoch_loss
        tm.training_log.append(row)
        stop_requested = False
        if progress is not None:
            # a monitoring consumer may return True to cancel the run
            stop_requested = bool(progress(row))
        log.info("epoch %d: train %.6f valid %.6f", epoch, epoch_loss, row["valid_loss"])

        if row["valid_loss"] < best_loss:
            best_loss = row["valid_loss"]
            best_weights = _snapshot(model)
            best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                log.info("early stop at epoch %d (best %d)", epoch, best_epoch)
                break
        if stop_requested:
            log.info("stop requested by progress consumer at epoch %d", epoch)
            break

    _restore(model, best_weights)
    model.eval()
    return tm


def evaluate(tm: TrainedModel, pairs: list[LabeledPair]) -> dict[str, float]:
    y = np.array([p.label for p in pairs])
    preds = tm.predict(pairs)
    if tm.task_kind == "regression":
        return metrics_mod.regression_metrics(y, preds)
    return metrics_mod.classification_metrics(y, preds)


# -- hyperparameter search ----------------------------------------------------------

class EmptySpace(ValueError):
    pass


@dataclass
class SearchResult:
    best: dict
    best_value: float
    trials: list[tuple[dict, float]]


def sample_space(space: dict, rng: np.random.Generator) -> dict:
    """Lists are finite choice sets; a 2-tuple of floats is a uniform range."""
    out = {}
    for key, domain in space.items():
        if isinstance(domain, tuple) and len(domain) == 2 \
                and all(isinstance(v, float) for v in domain):
            lo, hi = domain
            out[key] = float(rng.uniform(lo, hi))
        elif isinstance(domain, (list, tuple)) and len(domain) > 0:
            out[key] = domain[int(rng.integers(len(domain)))]
        else:
            raise EmptySpace(f"domain for {key!r} must be a non-empty list of choices "
                             f"or a (low, high) float pair, got {domain!r}")
    return out


def hyperparam_search(space: dict, budget: int, evaluate_fn, mode: str = "min",
                      seed: int = 0) -> SearchResult:
    """Seeded random search: draw `budget` configurations, keep the argbest.

    evaluate_fn(config_dict) -> float; mode picks min (losses) or max (AUROC).
    """
    if not space:
        raise EmptySpace("hyperparameter space has no dimensions")
    if budget < 1:
        raise EmptySpace(f"budget must be >= 1, got {budget}")
    rng = np.random.default_rng(seed)
    trials = []
    for _ in range(budget):
        cfg = sample_space(space, rng)
        value = float(evaluate_fn(cfg))
        trials.append((cfg, value))
    pick = min if mode == "min" else max
    best_cfg, best_value = pick(trials, key=lambda t: t[1])
    return SearchResult(best=best_cfg, best_value=best_value, trials=trials)
