"""
Multinomial logistic probe on frozen early-stage features.

Features are standardized with training statistics stored on the model, then
fit by full-batch gradient descent on mean softmax cross-entropy plus an L2
penalty on the weights.
"""

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger

from ..core.errors import DatasetIOError, DivergenceError, InvalidArgumentError, ShapeError
from ..core.tensor import make_rng
from ..embedding.early_stage import EarlyStageConfig, early_stage_forward, patchify

CHECKPOINT_FORMAT = "early-stage-probe"
CHECKPOINT_VERSION = 1
INIT_SCALE = 0.01


class FeatureReduction(str, Enum):
    MEAN_POOL = "mean_pool"
    FLATTEN = "flatten"


def extract_features(img, cfg: EarlyStageConfig, reduction: Union[FeatureReduction, str] = FeatureReduction.MEAN_POOL) -> np.ndarray:
    """Early-stage output of one image, mean-pooled over patches or flattened row-major."""
    z = early_stage_forward(patchify(img, cfg), cfg)
    if FeatureReduction(reduction) is FeatureReduction.MEAN_POOL:
        return z.mean(axis=0)
    return z.reshape(-1).copy()


def extract_feature_matrix(images: Sequence, cfg: EarlyStageConfig, reduction=FeatureReduction.MEAN_POOL,
                           workers: int = 1) -> np.ndarray:
    """One feature row per image, in input order."""
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda img: extract_features(img, cfg, reduction), images))
    else:
        rows = [extract_features(img, cfg, reduction) for img in images]
    return np.vstack(rows)


@dataclass(frozen=True)
class ProbeModel:
    weights: np.ndarray
    bias: np.ndarray
    feature_reduction: FeatureReduction = FeatureReduction.MEAN_POOL
    feature_mean: Optional[np.ndarray] = None
    feature_std: Optional[np.ndarray] = None
    final_loss: float = float("nan")
    seed: int = 0
    epochs: int = 0
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        weights = np.array(self.weights, dtype=np.float64)
        bias = np.array(self.bias, dtype=np.float64).reshape(-1)
        if weights.ndim != 2 or bias.shape != (weights.shape[1],):
            raise ShapeError(f"weights {weights.shape} and bias {bias.shape} do not line up")
        if not (np.all(np.isfinite(weights)) and np.all(np.isfinite(bias))):
            raise InvalidArgumentError("probe parameters must be finite")
        feature_dim = weights.shape[0]
        mean = np.zeros(feature_dim) if self.feature_mean is None else np.array(self.feature_mean, dtype=np.float64)
        std = np.ones(feature_dim) if self.feature_std is None else np.array(self.feature_std, dtype=np.float64)
        if mean.shape != (feature_dim,) or std.shape != (feature_dim,):
            raise ShapeError("feature standardization does not match the weights")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", bias)
        object.__setattr__(self, "feature_mean", mean)
        object.__setattr__(self, "feature_std", std)
        object.__setattr__(self, "feature_reduction", FeatureReduction(self.feature_reduction))

    @property
    def feature_dim(self) -> int:
        return int(self.weights.shape[0])

    @property
    def num_classes(self) -> int:
        return int(self.weights.shape[1])

    def standardize(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        if features.shape[1] != self.feature_dim:
            raise ShapeError(f"features have {features.shape[1]} columns, probe expects {self.feature_dim}")
        return (features - self.feature_mean) / self.feature_std

    def logits(self, features: np.ndarray) -> np.ndarray:
        return self.standardize(features) @ self.weights + self.bias


def initial_weights(feature_dim: int, num_classes: int, seed: int) -> np.ndarray:
    return INIT_SCALE * make_rng(seed).standard_normal((feature_dim, num_classes))


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))


def train_probe(
    features: np.ndarray,
    labels: Sequence[int],
    lr: float = 0.5,
    epochs: int = 300,
    l2: float = 1e-3,
    seed: int = 0,
    num_classes: Optional[int] = None,
    reduction: Union[FeatureReduction, str] = FeatureReduction.MEAN_POOL,
) -> ProbeModel:
    """Full-batch gradient descent; raises DivergenceError on a non-finite loss."""
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.intp)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise ShapeError(f"features {x.shape} do not match {y.shape[0]} labels")
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError("features contain non-finite values")
    if lr < 0 or epochs < 0 or l2 < 0:
        raise InvalidArgumentError(f"lr, epochs and l2 must be nonnegative (lr={lr}, epochs={epochs}, l2={l2})")
    num_classes = int(num_classes or y.max() + 1)
    if len(np.unique(y)) < 2 or num_classes < 2:
        raise InvalidArgumentError("probe training needs at least 2 classes")

    mean = x.mean(axis=0)
    std = x.std(axis=0)
    std[std == 0.0] = 1.0
    xs = (x - mean) / std
    n = xs.shape[0]
    onehot = np.zeros((n, num_classes))
    onehot[np.arange(n), y] = 1.0

    weights = initial_weights(x.shape[1], num_classes, seed)
    bias = np.zeros(num_classes)

    def loss_and_grad(w, b):
        log_probs = _log_softmax(xs @ w + b)
        loss = -np.sum(onehot * log_probs) / n + 0.5 * l2 * np.sum(w * w)
        residual = (np.exp(log_probs) - onehot) / n
        return loss, xs.T @ residual + l2 * w, residual.sum(axis=0)

    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(epochs):
            loss, grad_w, grad_b = loss_and_grad(weights, bias)
            if not np.isfinite(loss):
                raise DivergenceError(epoch, seed, float(loss))
            weights = weights - lr * grad_w
            bias = bias - lr * grad_b
        final_loss, _, _ = loss_and_grad(weights, bias)
    if not np.isfinite(final_loss):
        raise DivergenceError(epochs, seed, float(final_loss))

    model = ProbeModel(
        weights=weights,
        bias=bias,
        feature_reduction=reduction,
        feature_mean=mean,
        feature_std=std,
        final_loss=float(final_loss),
        seed=seed,
        epochs=epochs,
    )
    logger.debug(f"Probe trained: {epochs} epochs, final loss {final_loss:.6f}")
    return model


def classify(model: ProbeModel, features: np.ndarray) -> np.ndarray:
    """Predicted class per feature row (first maximum wins)."""
    return np.argmax(model.logits(features), axis=1)


def evaluate(model: ProbeModel, features: np.ndarray, labels: Sequence[int]) -> float:
    labels = np.asarray(labels)
    if labels.size == 0:
        raise InvalidArgumentError("cannot evaluate on an empty set")
    return float(np.mean(classify(model, features) == labels))


def split_indices(num_items: int, fractions: Sequence[float] = (0.70, 0.15, 0.15),
                  seed: int = 0) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded train/val/test permutation split; test takes the remainder."""
    if len(fractions) != 3 or any(f < 0 for f in fractions) or abs(sum(fractions) - 1.0) > 1e-9:
        raise InvalidArgumentError(f"split fractions must be three nonnegative values summing to 1, got {fractions}")
    order = make_rng(seed).permutation(num_items)
    n_train = int(round(num_items * fractions[0]))
    n_val = int(round(num_items * fractions[1]))
    if n_train < 1 or num_items - n_train - n_val < 1:
        raise InvalidArgumentError(f"{num_items} items are too few for split {list(fractions)}")
    return order[:n_train], order[n_train:n_train + n_val], order[n_train + n_val:]


def save_probe(model: ProbeModel, path) -> Path:
    """Checkpoint: 8-byte LE header length, JSON header, LE float64 weights (row-major) then bias."""
    path = Path(path)
    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "dtype": "<f8",
        "feature_dim": model.feature_dim,
        "num_classes": model.num_classes,
        "feature_reduction": model.feature_reduction.value,
        "feature_mean": model.feature_mean.tolist(),
        "feature_std": model.feature_std.tolist(),
        "final_loss": model.final_loss,
        "seed": model.seed,
        "epochs": model.epochs,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = np.concatenate([model.weights.reshape(-1), model.bias]).astype("<f8").tobytes()
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(len(header_bytes).to_bytes(8, "little") + header_bytes + payload)
    except OSError as e:
        raise DatasetIOError(path, f"cannot write checkpoint ({e.strerror})") from e
    return path


def load_probe(path) -> ProbeModel:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise DatasetIOError(path, f"cannot read checkpoint ({e.strerror})") from e
    try:
        header_len = int.from_bytes(data[:8], "little")
        header = json.loads(data[8:8 + header_len].decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as e:
        raise DatasetIOError(path, "corrupt checkpoint header") from e
    if header.get("format") != CHECKPOINT_FORMAT:
        raise DatasetIOError(path, "not a probe checkpoint")
    f, c = header["feature_dim"], header["num_classes"]
    values = np.frombuffer(data[8 + header_len:], dtype="<f8")
    if values.size != f * c + c:
        raise DatasetIOError(path, f"checkpoint holds {values.size} values, expected {f * c + c}")
    return ProbeModel(
        weights=values[:f * c].reshape(f, c),
        bias=values[f * c:],
        feature_reduction=header["feature_reduction"],
        feature_mean=header["feature_mean"],
        feature_std=header["feature_std"],
        final_loss=header["final_loss"],
        seed=header["seed"],
        epochs=header["epochs"],
    )
