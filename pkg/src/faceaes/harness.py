"""Repeated stratum-free k-fold evaluation for the linear and GA predictors.

The protocol is R rounds of k-fold cross-validation (defaults 10x10). Each
round shuffles the sample ids with its own derived seed and deals them
round-robin into k folds, so fold sizes differ by at most one. Metrics are
computed per held-out fold, averaged over the folds of a round, then
averaged over rounds; the spread reported is the population std of the
per-round means.

All seeds are derived from one master seed through numpy's SeedSequence, so
a report is reproducible from (dataset, config, master seed) alone and
identical for any worker-thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import ga as ga_mod
from .errors import DimMismatchError, ProtocolError, UndefinedCorrelationError
from .linear import TrainConfig, predict_many, train_svm, train_svr, with_seed
from .store import DatasetManifest, classification_labels, fit_standardizer


def gcr(predicted_labels, true_labels) -> float:
    """Good classification rate: fraction of label agreements in [0, 1]."""
    p = np.asarray(predicted_labels)
    t = np.asarray(true_labels)
    if p.shape != t.shape or p.ndim != 1:
        raise DimMismatchError(f"label vectors must match, got {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ValueError("gcr of empty vectors is undefined")
    return float(np.count_nonzero(p == t) / p.size)


def lcc(predictions, targets) -> float:
    """Pearson linear correlation coefficient.

    Raises UndefinedCorrelationError when either side is constant (zero
    variance), instead of returning NaN.
    """
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape or p.ndim != 1:
        raise DimMismatchError(f"vectors must match, got {p.shape} vs {t.shape}")
    if p.size < 2:
        raise ValueError("lcc needs at least two points")
    dp = p - p.mean()
    dt = t - t.mean()
    sp = math.sqrt(float(dp @ dp))
    st = math.sqrt(float(dt @ dt))
    if sp == 0.0 or st == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    return float((dp @ dt) / (sp * st))


def derive_seed(*parts) -> int:
    """Fold a tuple of ints/strings into one 64-bit seed, statelessly."""
    enc = [p if isinstance(p, int) else int.from_bytes(str(p).encode(), "big") % (2**63)
           for p in parts]
    return int(np.random.SeedSequence(enc).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of sample positions to folds for one round."""

    folds: tuple  # tuple of int tuples, positions into the sample list
    round_index: int
    seed: int

    @property
    def n_folds(self) -> int:
        return len(self.folds)

    def assignments(self) -> np.ndarray:
        """Per-sample fold id, aligned with sample positions."""
        n = sum(len(f) for f in self.folds)
        out = np.full(n, -1, dtype=np.int64)
        for fid, members in enumerate(self.folds):
            out[list(members)] = fid
        return out

    def train_test(self, fold_index: int):
        test = np.array(self.folds[fold_index], dtype=np.int64)
        train = np.concatenate(
            [self.folds[i] for i in range(self.n_folds) if i != fold_index]
        ).astype(np.int64)
        train.sort()
        return train, test


def make_fold_plan(n_samples: int, n_folds: int, seed: int, round_index: int = 0,
                   labels=None) -> FoldPlan:
    """Shuffle positions with the given seed and deal them round-robin.

    With ``labels`` given the shuffle happens within each class and classes
    are dealt in a fixed order, which keeps folds close to the overall class
    balance (stratified variant, off by default in the protocol).
    """
    if n_folds < 2:
        raise ValueError("need at least 2 folds")
    if n_samples < n_folds:
        raise ProtocolError(f"cannot split {n_samples} samples into {n_folds} folds")
    rng = np.random.default_rng(seed)
    if labels is None:
        order = rng.permutation(n_samples)
    else:
        labels = np.asarray(labels)
        if labels.shape != (n_samples,):
            raise DimMismatchError(f"labels shape {labels.shape} != ({n_samples},)")
        parts = []
        for value in np.unique(labels):
            members = np.flatnonzero(labels == value)
            parts.append(members[rng.permutation(members.size)])
        order = np.concatenate(parts)
    folds = [tuple(int(v) for v in order[f::n_folds]) for f in range(n_folds)]
    return FoldPlan(folds=tuple(folds), round_index=round_index, seed=seed)


@dataclass(frozen=True)
class ProtocolConfig:
    """What to run: predictor family, task, and CV geometry."""

    task: str  # "classification" | "regression"
    predictor: str = "linear"  # "linear" | "ga"
    rounds: int = 10
    n_folds: int = 10
    master_seed: int = 0
    train: TrainConfig = field(default_factory=TrainConfig)
    ga: "ga_mod.GaConfig | None" = None
    threads: int = 1
    stratified: bool = False

    def __post_init__(self):
        if self.task not in ("classification", "regression"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.predictor not in ("linear", "ga"):
            raise ValueError(f"unknown predictor {self.predictor!r}")
        if self.rounds < 1 or self.n_folds < 2:
            raise ValueError("rounds must be >= 1 and n_folds >= 2")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if self.stratified and self.task != "classification":
            raise ValueError("stratified folds only apply to classification")
        if self.predictor == "ga" and self.ga is not None and self.ga.task != self.task:
            raise ValueError("ga config task does not match protocol task")


@dataclass
class EvalReport:
    """Aggregated protocol output; serializes to canonical JSON."""

    task: str
    predictor: str
    feature_set: str
    metric_name: str
    metric_mean: float
    metric_std: float
    round_means: list
    fold_metrics: list  # [round][fold]
    selected_counts: list  # [round][fold] popcounts; empty unless GA
    mean_selected: float | None
    rounds: int
    n_folds: int
    n_samples: int
    dim: int
    master_seed: int

    def to_json(self) -> str:
        payload = {
            "task": self.task,
            "predictor": self.predictor,
            "feature_set": self.feature_set,
            "metric_name": self.metric_name,
            "metric_mean": self.metric_mean,
            "metric_std": self.metric_std,
            "round_means": self.round_means,
            "fold_metrics": self.fold_metrics,
            "selected_counts": self.selected_counts,
            "mean_selected": self.mean_selected,
            "rounds": self.rounds,
            "n_folds": self.n_folds,
            "n_samples": self.n_samples,
            "dim": self.dim,
            "master_seed": self.master_seed,
        }
        return json.dumps(payload, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        return cls(**json.loads(text))


def _fit_fold(X, targets, config: ProtocolConfig, train_idx, round_i, fold_i,
              audit=None, trace_hook=None):
    """Train on one fold and return (predictions on all rows, popcount or None).

    Standardization is fitted on the training rows only; the audit hook (used
    by the leakage test) observes exactly which rows the scaler saw.
    """
    std = fit_standardizer(X, train_idx)
    if audit is not None:
        audit(round_i, fold_i, np.array(train_idx))
    Xs = std.apply(X)
    y_train = targets[train_idx]
    if config.task == "classification" and np.unique(y_train).size < 2:
        raise ProtocolError(
            f"round {round_i} fold {fold_i}: training split holds a single class"
        )
    seed = derive_seed(config.master_seed, round_i, fold_i, "train")
    tc = with_seed(config.train, seed)
    if config.task == "classification":
        model = train_svm(Xs[train_idx], y_train, tc)
    else:
        model = train_svr(Xs[train_idx], y_train, tc)
    if config.predictor == "linear":
        return predict_many(model, Xs), None
    gc = config.ga if config.ga is not None else (
        ga_mod.GaConfig.classification() if config.task == "classification"
        else ga_mod.GaConfig.regression()
    )
    gc = replace(gc, rng_seed=derive_seed(config.master_seed, round_i, fold_i, "ga"))
    best, trace = ga_mod.evolve(Xs[train_idx], y_train, model, gc)
    if trace_hook is not None:
        trace_hook(round_i, fold_i, trace)
    return ga_mod.chromosome_predict_many(best, Xs), ga_mod.selected_feature_count(best)


def _score_fold(preds_test, targets_test, task: str) -> float:
    if task == "classification":
        labels = np.where(preds_test >= 0.0, 1.0, -1.0)
        return gcr(labels, targets_test)
    return lcc(preds_test, targets_test)


def run_protocol(features, manifest: DatasetManifest, config: ProtocolConfig,
                 audit=None, trace_hook=None) -> EvalReport:
    """Run the full repeated-CV protocol and aggregate one report.

    ``features`` may be a FeatureBlock or a 2-D array aligned with the
    manifest sample order. Classification targets come from native labels
    when every sample carries one, otherwise from the median split.
    ``audit`` observes the rows each fold's standardizer is fitted on;
    ``trace_hook`` observes the GA trace of every fold (GA predictor only).
    Neither hook influences the report.
    """
    X = np.asarray(getattr(features, "rows", features), dtype=np.float64)
    if X.ndim != 2:
        raise DimMismatchError(f"features must be 2-D, got shape {X.shape}")
    if X.shape[0] != len(manifest.samples):
        raise ProtocolError(
            f"feature rows ({X.shape[0]}) != manifest samples ({len(manifest.samples)})"
        )
    if config.task == "classification":
        targets = classification_labels(manifest).astype(np.float64)
    else:
        targets = np.asarray(manifest.scores(), dtype=np.float64)

    fold_labels = targets if config.stratified else None
    jobs = []
    for r in range(config.rounds):
        plan = make_fold_plan(X.shape[0], config.n_folds,
                              derive_seed(config.master_seed, r, "fold-plan"), r,
                              labels=fold_labels)
        for f in range(config.n_folds):
            jobs.append((r, f, plan))

    def run_job(job):
        r, f, plan = job
        train_idx, test_idx = plan.train_test(f)
        preds, popcount = _fit_fold(X, targets, config, train_idx, r, f, audit, trace_hook)
        return _score_fold(preds[test_idx], targets[test_idx], config.task), popcount

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(run_job, jobs))
    else:
        results = [run_job(j) for j in jobs]

    fold_metrics = [[0.0] * config.n_folds for _ in range(config.rounds)]
    selected = [[0] * config.n_folds for _ in range(config.rounds)] \
        if config.predictor == "ga" else []
    for (r, f, _), (metric, popcount) in zip(jobs, results):
        fold_metrics[r][f] = metric
        if config.predictor == "ga":
            selected[r][f] = popcount
    round_means = [float(np.mean(row)) for row in fold_metrics]
    mean_selected = float(np.mean([c for row in selected for c in row])) if selected else None
    return EvalReport(
        task=config.task,
        predictor=config.predictor,
        feature_set=str(getattr(features, "name", "")),
        metric_name="gcr" if config.task == "classification" else "lcc",
        metric_mean=float(np.mean(round_means)),
        metric_std=float(np.std(round_means)),
        round_means=round_means,
        fold_metrics=fold_metrics,
        selected_counts=selected,
        mean_selected=mean_selected,
        rounds=config.rounds,
        n_folds=config.n_folds,
        n_samples=int(X.shape[0]),
        dim=int(X.shape[1]),
        master_seed=config.master_seed,
    )


@dataclass
class SweepRow:
    """One feature-set configuration inside a sweep."""

    blocks: tuple
    predictor: str
    n_features: int
    report: EvalReport


# Row order of the combination ladder when all three canonical blocks are
# present. Pairs are deliberately IQ+FA, IQ+IA, IA+FA; tests pin this order.
_CANONICAL_LADDER = (
    ("IQ",), ("IA",), ("FA",),
    ("IQ", "FA"), ("IQ", "IA"), ("IA", "FA"),
    ("IQ", "IA", "FA"),
)


def sweep_combinations(blocks: dict, manifest: DatasetManifest, config: ProtocolConfig,
                       include_ga: bool = True):
    """Evaluate the fixed ladder of feature-set combinations.

    Rows appear in a fixed order: each single block, each pair, the full
    concatenation (all with the linear predictor), then optionally the GA on
    the full concatenation. With the three canonical blocks present the pair
    rows come in the order IQ+FA, IQ+IA, IA+FA. Every row reuses the same
    master seed, so fold splits are identical across rows and differences
    are down to features. Returns a list of SweepRow.
    """
    from .store import canonical_block_order, concat_blocks

    names = canonical_block_order(blocks.keys())
    if len(names) == 0:
        raise ValueError("sweep needs at least one block")
    if names == list(_CANONICAL_LADDER[-1]):
        ordered = list(_CANONICAL_LADDER)
    else:
        ordered = [(n,) for n in names]
        ordered += [(names[i], names[j])
                    for i in range(len(names)) for j in range(i + 1, len(names))]
        if len(names) > 2:
            ordered.append(tuple(names))

    rows = []
    for combo in ordered:
        merged = concat_blocks([blocks[n] for n in combo])
        rep = run_protocol(merged, manifest, replace(config, predictor="linear"))
        rows.append(SweepRow(blocks=combo, predictor="linear",
                             n_features=merged.dim, report=rep))
    if include_ga:
        full = ordered[-1]
        merged = concat_blocks([blocks[n] for n in full])
        rep = run_protocol(merged, manifest, replace(config, predictor="ga"))
        rows.append(SweepRow(blocks=full, predictor="ga",
                             n_features=merged.dim, report=rep))
    return rows
