"""Binary linear detector: seeded mini-batch SGD logistic regression.

Training is deterministic per (data, config, hyperparams): epoch shuffles
come from the shared counter-based PRNG, and all float work runs in the
kernel lane with a pinned operation order. Machine is the positive class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from . import _kernels
from .corpus import ExampleUnit, Label
from .errors import FingerprintError, ModelFormatError, TrainingError
from .features import FeatureConfig, FeatureVector, extract
from .rng import SplitMix64, derive_seed

MODEL_FORMAT = "mgdetect-model v1"
DEFAULT_LR_GRID = (0.01, 0.05, 0.1, 0.5)
# warmup covers this share of total steps (at least one step)
WARMUP_RATIO = 0.001


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 0.1
    epochs: int = 5
    batch_size: int = 32
    l2_penalty: float = 1e-4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.l2_penalty < 0:
            raise ValueError("l2_penalty must be non-negative")


@dataclass(frozen=True, eq=False)
class ModelParams:
    weights: np.ndarray  # float64, length = FeatureConfig.total_dimension
    bias: float
    threshold: float
    fingerprint: str
    epoch_losses: tuple[float, ...] = ()  # mean log loss per epoch, not serialized


class Prediction(NamedTuple):
    label: Label
    score: float


class _Matrix(NamedTuple):
    indices: np.ndarray
    values: np.ndarray
    offsets: np.ndarray
    dimension: int


def _build_matrix(texts: Sequence[str], config: FeatureConfig) -> _Matrix:
    indices_parts = []
    values_parts = []
    offsets = np.empty(len(texts) + 1, dtype=np.int64)
    offsets[0] = 0
    total = 0
    dimension = config.total_dimension
    for row, text in enumerate(texts):
        vec = extract(text, config, normalize=True)
        indices_parts.append(vec.indices)
        values_parts.append(vec.values)
        total += len(vec.indices)
        offsets[row + 1] = total
    if indices_parts:
        indices = np.concatenate(indices_parts)
        values = np.concatenate(values_parts)
    else:
        indices = np.empty(0, dtype=np.int64)
        values = np.empty(0, dtype=np.float64)
    return _Matrix(indices, values, offsets, dimension)


def _unit_labels(units: Sequence[ExampleUnit]) -> np.ndarray:
    return np.asarray(
        [1.0 if u.label is Label.MACHINE else 0.0 for u in units], dtype=np.float64
    )


def _schedule_steps(n_examples: int, hyper: Hyperparams) -> tuple[int, int, int]:
    steps_per_epoch = -(-n_examples // hyper.batch_size)
    total = hyper.epochs * steps_per_epoch
    warmup = max(1, int(total * WARMUP_RATIO + 0.5))
    return steps_per_epoch, total, warmup


def _train_on_matrix(
    matrix: _Matrix, labels: np.ndarray, config: FeatureConfig, hyper: Hyperparams
) -> ModelParams:
    n = len(labels)
    weights = np.zeros(matrix.dimension, dtype=np.float64)
    bias = 0.0
    steps_per_epoch, total_steps, warmup_steps = _schedule_steps(n, hyper)
    losses = []
    for epoch in range(hyper.epochs):
        order = list(range(n))
        SplitMix64(derive_seed(hyper.seed, epoch)).shuffle(order)
        bias, loss_sum = _kernels.sgd_epoch(
            weights,
            bias,
            matrix.indices,
            matrix.values,
            matrix.offsets,
            labels,
            np.asarray(order, dtype=np.int64),
            hyper.batch_size,
            hyper.learning_rate,
            hyper.l2_penalty,
            epoch * steps_per_epoch,
            total_steps,
            warmup_steps,
        )
        if not (math.isfinite(loss_sum) and math.isfinite(bias)):
            raise TrainingError(
                f"non-finite loss in epoch {epoch} "
                f"(steps {epoch * steps_per_epoch}..{(epoch + 1) * steps_per_epoch - 1})"
            )
        losses.append(loss_sum / n)
    if not np.isfinite(weights).all():
        raise TrainingError("non-finite weights after training")
    return ModelParams(
        weights=weights,
        bias=float(bias),
        threshold=0.5,
        fingerprint=config.fingerprint(),
        epoch_losses=tuple(losses),
    )


def train(
    units: Sequence[ExampleUnit], config: FeatureConfig, hyper: Hyperparams
) -> ModelParams:
    present = {u.label for u in units}
    if len(present) < 2:
        only = next(iter(present)).value if present else "none"
        raise TrainingError(f"training data contains a single class: {only}")
    matrix = _build_matrix([u.text for u in units], config)
    return _train_on_matrix(matrix, _unit_labels(units), config, hyper)


def _sigmoid(margin: float) -> float:
    if margin >= 0.0:
        return 1.0 / (1.0 + math.exp(-margin))
    q = math.exp(margin)
    return q / (1.0 + q)


def _margins(params: ModelParams, matrix: _Matrix) -> np.ndarray:
    out = np.empty(len(matrix.offsets) - 1, dtype=np.float64)
    _kernels.batch_margins(
        params.weights, params.bias, matrix.indices, matrix.values, matrix.offsets, out
    )
    return out


def _scores_to_labels(scores: Iterable[float], threshold: float) -> list[Label]:
    return [Label.MACHINE if s >= threshold else Label.HUMAN for s in scores]


def predict(params: ModelParams, vector: FeatureVector) -> Prediction:
    """Score one feature vector; Machine wins ties at the threshold."""
    if vector.config_fingerprint != params.fingerprint:
        raise FingerprintError(
            f"feature config fingerprint {vector.config_fingerprint} does not "
            f"match model fingerprint {params.fingerprint}"
        )
    margin = params.bias
    weights = params.weights
    for i, v in zip(vector.indices.tolist(), vector.values.tolist()):
        margin += weights.item(i) * v
    score = _sigmoid(margin)
    label = Label.MACHINE if score >= params.threshold else Label.HUMAN
    return Prediction(label=label, score=score)


def predict_units(
    params: ModelParams, units: Sequence[ExampleUnit], config: FeatureConfig
) -> tuple[list[Label], list[float]]:
    """Batch prediction; returns (labels, scores) in unit order."""
    if config.fingerprint() != params.fingerprint:
        raise FingerprintError(
            f"feature config fingerprint {config.fingerprint()} does not "
            f"match model fingerprint {params.fingerprint}"
        )
    matrix = _build_matrix([u.text for u in units], config)
    scores = [_sigmoid(m) for m in _margins(params, matrix).tolist()]
    return _scores_to_labels(scores, params.threshold), scores


def _metric_set(
    params: ModelParams, matrix: _Matrix, gold: Sequence[Label]
) -> dict[str, object]:
    from . import evaluate

    scores = [_sigmoid(m) for m in _margins(params, matrix).tolist()]
    predictions = _scores_to_labels(scores, params.threshold)
    cm = evaluate.confusion(predictions, gold)
    out: dict[str, object] = {"accuracy": evaluate.accuracy(cm)}
    for label in (Label.HUMAN, Label.MACHINE):
        stats = evaluate.prf1(cm, label)
        out[label.value] = {
            "precision": stats["precision"],
            "recall": stats["recall"],
            "f1": stats["f1"],
        }
    return out


def run_seeds(
    units_train: Sequence[ExampleUnit],
    units_eval: Sequence[ExampleUnit],
    config: FeatureConfig,
    hyper_base: Hyperparams,
    seeds: Sequence[int],
) -> list[dict]:
    """Train one model per seed and evaluate each; metric sets in seed order.

    Feature extraction runs once and is shared across seeds.
    """
    if not seeds:
        raise ValueError("need at least one seed")
    present = {u.label for u in units_train}
    if len(present) < 2:
        only = next(iter(present)).value if present else "none"
        raise TrainingError(f"training data contains a single class: {only}")
    train_matrix = _build_matrix([u.text for u in units_train], config)
    train_labels = _unit_labels(units_train)
    eval_matrix = _build_matrix([u.text for u in units_eval], config)
    gold = [u.label for u in units_eval]
    results = []
    for seed in seeds:
        params = _train_on_matrix(
            train_matrix, train_labels, config, replace(hyper_base, seed=seed)
        )
        results.append(_metric_set(params, eval_matrix, gold))
    return results


def grid_search(
    units_train: Sequence[ExampleUnit],
    units_valid: Sequence[ExampleUnit],
    config: FeatureConfig,
    hyper: Hyperparams,
    grid: Sequence[float] = DEFAULT_LR_GRID,
) -> tuple[Hyperparams, dict[float, float]]:
    """Pick the learning rate with the best validation macro-F1.

    Ties go to the smaller rate, so the result is deterministic.
    """
    from . import evaluate

    if not grid:
        raise ValueError("empty learning-rate grid")
    train_matrix = _build_matrix([u.text for u in units_train], config)
    train_labels = _unit_labels(units_train)
    valid_matrix = _build_matrix([u.text for u in units_valid], config)
    gold = [u.label for u in units_valid]
    table: dict[float, float] = {}
    for lr in grid:
        params = _train_on_matrix(
            train_matrix, train_labels, config, replace(hyper, learning_rate=lr)
        )
        scores = [_sigmoid(m) for m in _margins(params, valid_matrix).tolist()]
        cm = evaluate.confusion(_scores_to_labels(scores, params.threshold), gold)
        macro = (
            evaluate.prf1(cm, Label.HUMAN)["f1"] + evaluate.prf1(cm, Label.MACHINE)["f1"]
        ) / 2.0
        table[lr] = macro
    best = max(sorted(table), key=lambda lr: (table[lr], -lr))
    return replace(hyper, learning_rate=best), table


def save_model(params: ModelParams, path: str | Path) -> None:
    lines = [
        MODEL_FORMAT,
        f"fingerprint {params.fingerprint}",
        f"threshold {float(params.threshold)!r}",
        f"bias {float(params.bias)!r}",
        f"dim {len(params.weights)}",
    ]
    weights = params.weights
    for i in np.nonzero(weights)[0].tolist():
        lines.append(f"{i} {float(weights[i])!r}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> ModelParams:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or lines[0] != MODEL_FORMAT:
        head = lines[0] if lines else ""
        raise ModelFormatError(f"unsupported model format: {head!r}")
    header: dict[str, str] = {}
    body_start = 1
    for line in lines[1:]:
        key, _, value = line.partition(" ")
        if key in ("fingerprint", "threshold", "bias", "dim") and value:
            header[key] = value
            body_start += 1
        else:
            break
    missing = {"fingerprint", "threshold", "bias", "dim"} - set(header)
    if missing:
        raise ModelFormatError(f"model header missing fields: {sorted(missing)}")
    try:
        dim = int(header["dim"])
        threshold = float(header["threshold"])
        bias = float(header["bias"])
    except ValueError as exc:
        raise ModelFormatError(f"bad model header value: {exc}") from exc
    weights = np.zeros(dim, dtype=np.float64)
    for line in lines[body_start:]:
        if not line.strip():
            continue
        idx_text, _, value_text = line.partition(" ")
        try:
            idx = int(idx_text)
            value = float(value_text)
        except ValueError as exc:
            raise ModelFormatError(f"bad weight line {line!r}") from exc
        if not 0 <= idx < dim:
            raise ModelFormatError(f"weight index {idx} outside dimension {dim}")
        weights[idx] = value
    if not np.isfinite(weights).all() or not math.isfinite(bias):
        raise ModelFormatError("model contains non-finite parameters")
    return ModelParams(
        weights=weights, bias=bias, threshold=threshold, fingerprint=header["fingerprint"]
    )
