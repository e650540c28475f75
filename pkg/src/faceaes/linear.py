"""Dense linear classifiers and regressors trained by subgradient descent.

The classifier minimizes L2-regularized mean hinge loss; the regressor
minimizes L2-regularized mean epsilon-insensitive loss. Both use a
deterministic-order averaged stochastic subgradient solver with a
Pegasos-style step size, and both return the best epoch-end candidate by
full-data objective, which makes the monitored per-epoch objective exactly
non-increasing. The loss functions below are shared with the genetic
search, where they act as fitness.
"""

from __future__ import annotations

import json
import struct
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimMismatchError, FvecFormatError, NonFiniteError, SingleClassError
from .store import FeatureBlock, Standardizer


def hinge_loss(predictions, labels) -> float:
    """Mean of max(0, 1 - y*pred) over all samples."""
    predictions = np.asarray(predictions, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if predictions.shape != labels.shape or predictions.ndim != 1:
        raise DimMismatchError(
            f"predictions and labels must be equal-length vectors, got {predictions.shape} vs {labels.shape}"
        )
    if predictions.size == 0:
        raise ValueError("hinge_loss of empty input is undefined")
    return float(np.mean(np.maximum(0.0, 1.0 - labels * predictions)))


def smooth_l1_loss(predictions, targets) -> float:
    """Mean smooth-L1 of the residuals: quadratic inside |r| < 1, linear outside."""
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape or predictions.ndim != 1:
        raise DimMismatchError(
            f"predictions and targets must be equal-length vectors, got {predictions.shape} vs {targets.shape}"
        )
    if predictions.size == 0:
        raise ValueError("smooth_l1_loss of empty input is undefined")
    r = np.abs(predictions - targets)
    return float(np.mean(np.where(r < 1.0, 0.5 * r * r, r - 0.5)))


@dataclass(frozen=True)
class LinearModel:
    """Dense weight vector plus bias; the SVM/SVR output and GA warm start."""

    weights: np.ndarray
    bias: float
    task: str  # "classification" | "regression"
    objective_trace: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        if weights.ndim != 1:
            raise DimMismatchError(f"weights must be 1-D, got shape {weights.shape}")
        if not (np.isfinite(weights).all() and np.isfinite(self.bias)):
            raise NonFiniteError("model weights/bias must be finite")
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")
        weights.setflags(write=False)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]


def predict(model: LinearModel, row) -> float:
    """Signed score <w, row> + b for a single feature vector."""
    row = np.asarray(row, dtype=np.float64)
    if row.shape != (model.dim,):
        raise DimMismatchError(f"row has shape {row.shape}, model expects ({model.dim},)")
    return float(row @ model.weights + model.bias)


def predict_many(model: LinearModel, rows) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != model.dim:
        raise DimMismatchError(f"rows have shape {rows.shape}, model expects (*, {model.dim})")
    return rows @ model.weights + model.bias


@dataclass(frozen=True)
class TrainConfig:
    """Solver hyperparameters with their documented defaults."""

    regularization_c: float = 1.0
    epochs: int = 50
    eta0: float = 1.0
    lr_offset: float | None = None  # None -> n_samples
    svr_epsilon: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.regularization_c <= 0:
            raise ValueError("regularization_c must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be a positive integer")
        if self.eta0 <= 0:
            raise ValueError("eta0 must be positive")
        if self.svr_epsilon < 0:
            raise ValueError("svr_epsilon must be non-negative")


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, FeatureBlock):
        return features.rows.astype(np.float64)
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise DimMismatchError(f"features must be a 2-D matrix, got shape {X.shape}")
    return X


def _objective_svm(X, y, w, b, lam) -> float:
    margins = y * (X @ w + b)
    return 0.5 * lam * float(w @ w) + float(np.mean(np.maximum(0.0, 1.0 - margins)))


def _objective_svr(X, y, w, b, lam, eps) -> float:
    r = np.abs(X @ w + b - y)
    return 0.5 * lam * float(w @ w) + float(np.mean(np.maximum(0.0, r - eps)))


def _sgd(X, y, config: TrainConfig, task: str):
    """Shared averaged-SGD loop; per-sample update rule differs by task."""
    n, d = X.shape
    lam = 1.0 / (config.regularization_c * n)
    t_offset = float(n if config.lr_offset is None else config.lr_offset)
    eps = config.svr_epsilon
    rng = np.random.default_rng(config.rng_seed)

    w = np.zeros(d)
    b = 0.0
    best_w, best_b = w.copy(), b
    if task == "classification":
        best_obj = _objective_svm(X, y, w, b, lam)
    else:
        best_obj = _objective_svr(X, y, w, b, lam, eps)
    trace = [best_obj]

    t = 0
    for _ in range(config.epochs):
        order = rng.permutation(n)
        w_sum = np.zeros(d)
        b_sum = 0.0
        for i in order:
            t += 1
            eta = config.eta0 / (lam * (t + t_offset))
            w *= 1.0 - eta * lam
            if task == "classification":
                if y[i] * (X[i] @ w + b) < 1.0:
                    w += (eta * y[i]) * X[i]
                    b += eta * y[i]
            else:
                r = X[i] @ w + b - y[i]
                if abs(r) > eps:
                    s = 1.0 if r > 0 else -1.0
                    w -= (eta * s) * X[i]
                    b -= eta * s
            w_sum += w
            b_sum += b
        # Candidates: epoch-averaged iterate, then the current iterate.
        for cand_w, cand_b in ((w_sum / n, b_sum / n), (w, b)):
            if task == "classification":
                obj = _objective_svm(X, y, cand_w, cand_b, lam)
            else:
                obj = _objective_svr(X, y, cand_w, cand_b, lam, eps)
            if obj < best_obj:
                best_obj = obj
                best_w = cand_w.copy()
                best_b = cand_b
        trace.append(best_obj)
    return best_w, best_b, tuple(trace)


def train_svm(features, labels, config: TrainConfig | None = None) -> LinearModel:
    """Train a linear hinge-loss classifier. Deterministic given the seed."""
    config = config or TrainConfig()
    X = _as_matrix(features)
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise DimMismatchError(f"got {X.shape[0]} rows but {y.shape} labels")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise ValueError("labels must be -1 or +1")
    if np.unique(y).size < 2:
        raise SingleClassError("training labels contain a single class")
    w, b, trace = _sgd(X, y, config, "classification")
    return LinearModel(weights=w, bias=b, task="classification", objective_trace=trace)


def train_svr(features, scores, config: TrainConfig | None = None) -> LinearModel:
    """Train a linear epsilon-insensitive regressor. Deterministic given the seed."""
    config = config or TrainConfig()
    X = _as_matrix(features)
    y = np.asarray(scores, dtype=np.float64)
    if y.shape != (X.shape[0],):
        raise DimMismatchError(f"got {X.shape[0]} rows but {y.shape} scores")
    if X.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if not np.isfinite(y).all():
        raise NonFiniteError("scores must be finite")
    w, b, trace = _sgd(X, y, config, "regression")
    return LinearModel(weights=w, bias=b, task="regression", objective_trace=trace)


# ---------------------------------------------------------------------------
# Model persistence: JSON header + framed binary sections with trailing CRC.

_MAGIC = b"LMOD"
_VERSION = 1


def save_model(
    path,
    model: LinearModel,
    standardizer: Standardizer | None = None,
    mask: np.ndarray | None = None,
    extra: dict | None = None,
) -> None:
    """Persist a model (optionally with its standardizer and a selection mask).

    Weights are stored as float64 so a loaded model predicts identically;
    the mask section is bit-packed.
    """
    sections: list[tuple[str, bytes]] = [
        ("weights", model.weights.astype("<f8").tobytes()),
        ("bias", struct.pack("<d", model.bias)),
    ]
    if standardizer is not None:
        sections.append(("means", standardizer.means.astype("<f8").tobytes()))
        sections.append(("stds", standardizer.stds.astype("<f8").tobytes()))
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (model.dim,):
            raise DimMismatchError("mask length must equal model dim")
        sections.append(("mask", np.packbits(mask).tobytes()))
    header = {
        "task": model.task,
        "dim": model.dim,
        "sections": [[name, len(blob)] for name, blob in sections],
        "extra": extra or {},
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(blob for _, blob in sections)
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<HI", _VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def load_model(path):
    """Load a persisted model; returns (model, standardizer, mask, extra)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 10 or blob[:4] != _MAGIC:
        raise FvecFormatError(f"{path}: not a model file")
    version, header_len = struct.unpack_from("<HI", blob, 4)
    if version != _VERSION:
        raise FvecFormatError(f"{path}: unsupported model version {version}")
    off = 10
    header = json.loads(blob[off : off + header_len].decode("utf-8"))
    off += header_len
    payload_len = sum(length for _, length in header["sections"])
    if len(blob) != off + payload_len + 4:
        raise FvecFormatError(f"{path}: truncated model file")
    payload = blob[off : off + payload_len]
    (crc_stored,) = struct.unpack_from("<I", blob, off + payload_len)
    if crc_stored != zlib.crc32(payload):
        raise FvecFormatError(f"{path}: model payload CRC mismatch")
    parts = {}
    cursor = 0
    for name, length in header["sections"]:
        parts[name] = payload[cursor : cursor + length]
        cursor += length
    dim = int(header["dim"])
    model = LinearModel(
        weights=np.frombuffer(parts["weights"], dtype="<f8"),
        bias=struct.unpack("<d", parts["bias"])[0],
        task=header["task"],
    )
    standardizer = None
    if "means" in parts:
        standardizer = Standardizer(
            means=np.frombuffer(parts["means"], dtype="<f8"),
            stds=np.frombuffer(parts["stds"], dtype="<f8"),
        )
    mask = None
    if "mask" in parts:
        mask = np.unpackbits(np.frombuffer(parts["mask"], dtype=np.uint8))[:dim].astype(bool)
    return model, standardizer, mask, header.get("extra", {})


def with_seed(config: TrainConfig, seed: int) -> TrainConfig:
    return replace(config, rng_seed=int(seed))
