"""Entropy-based feature ranking and from-scratch classifiers.

Everything here is driven by integer class counts so that scores computed
along different code paths (vectorized split search vs. brute-force checks)
agree bit-for-bit: candidate split scores are pure functions of the count
tuples they induce.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .errors import (
    ModelKindError,
    SchemaMismatchError,
    StratificationError,
    UndefinedEntropyError,
    UndefinedRelativeGainError,
)
from .features import NEGATIVE, POSITIVE, LabeledDataset, FeatureVector

TREE = "decision-tree"
FOREST = "random-forest"
NAIVE_BAYES = "naive-bayes"

NB_VARIANCE_FLOOR = 1e-9


class DiscretizationWarning(UserWarning):
    """A feature produced a single bin; its information gain is 0 by fiat."""


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a count distribution, with 0*log0 = 0."""
    counts = list(class_counts)
    if any(c < 0 for c in counts):
        raise ValueError("class counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise UndefinedEntropyError("entropy of an all-zero count distribution")
    h = 0.0
    for c in counts:
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


@lru_cache(maxsize=65536)
def _entropy2(neg: int, pos: int) -> float:
    h = 0.0
    total = neg + pos
    for c in (neg, pos):
        if c:
            p = c / total
            h -= p * math.log2(p)
    return h


def _column_groups(column: np.ndarray, bins) -> list[np.ndarray]:
    """Row-index groups after discretization; may be a single group."""
    if bins == "supervised":
        raise ValueError("supervised discretization is handled inline")
    n_bins = int(bins)
    if n_bins < 1:
        raise ValueError("bins must be >= 1")
    lo, hi = float(column.min()), float(column.max())
    if lo == hi:
        return [np.arange(len(column))]
    edges = np.linspace(lo, hi, n_bins + 1)
    which = np.clip(np.digitize(column, edges[1:-1], right=False), 0, n_bins - 1)
    return [np.nonzero(which == b)[0] for b in range(n_bins) if np.any(which == b)]


def information_gain(dataset: LabeledDataset, feature_index: int, bins="supervised") -> float:
    """H(Y) minus conditional entropy of the label given the binned feature.

    The default discretization picks the binary threshold that maximizes the
    gain (candidates are midpoints between consecutive distinct values). An
    integer selects that many equal-width bins instead. A degenerate single
    bin yields 0.0 under a DiscretizationWarning.
    """
    X = dataset.matrix()
    y = dataset.labels()
    if len(y) < 2:
        raise ValueError("information gain needs at least 2 rows")
    if not 0 <= feature_index < X.shape[1]:
        raise ValueError(f"feature index {feature_index} outside schema")
    column = X[:, feature_index]
    h_y = _entropy2(int((y == 0).sum()), int((y == 1).sum()))

    if bins == "supervised":
        order = np.argsort(column, kind="stable")
        xs, ys = column[order], y[order]
        boundaries = np.nonzero(xs[1:] != xs[:-1])[0]
        if len(boundaries) == 0:
            warnings.warn(
                f"feature {feature_index} is constant, single bin", DiscretizationWarning
            )
            return 0.0
        pos_prefix = np.cumsum(ys)
        n = len(ys)
        total_pos = int(pos_prefix[-1])
        best = 0.0
        for i in boundaries:
            nl = int(i) + 1
            lp = int(pos_prefix[i])
            rp = total_pos - lp
            nr = n - nl
            h_cond = (nl / n) * _entropy2(nl - lp, lp) + (nr / n) * _entropy2(nr - rp, rp)
            gain = h_y - h_cond
            if gain > best:
                best = gain
        return best

    groups = _column_groups(column, bins)
    if len(groups) == 1:
        warnings.warn(f"feature {feature_index} fills a single bin", DiscretizationWarning)
        return 0.0
    n = len(y)
    h_cond = 0.0
    for rows in groups:
        sub = y[rows]
        h_cond += (len(rows) / n) * _entropy2(int((sub == 0).sum()), int((sub == 1).sum()))
    return h_y - h_cond


def relative_information_gain(dataset: LabeledDataset, feature_index: int, bins="supervised") -> float:
    """Information gain normalized by the class entropy, in [0, 1]."""
    y = dataset.labels()
    h_y = _entropy2(int((y == 0).sum()), int((y == 1).sum()))
    if h_y == 0.0:
        raise UndefinedRelativeGainError("class entropy is zero")
    return information_gain(dataset, feature_index, bins) / h_y


@dataclass
class FeatureRanking:
    entries: list[tuple[str, float]]


def rank_features(dataset: LabeledDataset, bins="supervised") -> FeatureRanking:
    """Every schema feature by descending relative gain, ties by schema index."""
    gains = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DiscretizationWarning)
        for index, name in enumerate(dataset.feature_names):
            gains.append((name, relative_information_gain(dataset, index, bins), index))
    gains.sort(key=lambda e: (-e[1], e[2]))
    return FeatureRanking(entries=[(name, value) for name, value, _ in gains])


# ---------------------------------------------------------------------------
# decision tree


@dataclass
class TreeNode:
    n_samples: int
    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    klass: str | None = None
    p_positive: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature_index is None


@dataclass
class TrainedModel:
    kind: str
    feature_names: list[str]
    schema_version: int
    parameters: dict = field(default_factory=dict)


def _split_score(parent_h: float, n: int, left: tuple[int, int], right: tuple[int, int]):
    """Gain ratio of a candidate binary split, or None when undefined."""
    nl = left[0] + left[1]
    nr = right[0] + right[1]
    split_info = _entropy2(nl, nr)
    if split_info == 0.0:
        return None
    h_cond = (nl / n) * _entropy2(*left) + (nr / n) * _entropy2(*right)
    return (parent_h - h_cond) / split_info


def _best_split(X, y, feature_indices, min_samples_leaf):
    n = len(y)
    pos_total = int(y.sum())
    parent_h = _entropy2(n - pos_total, pos_total)
    best = None
    best_score = -math.inf
    for f in sorted(feature_indices):
        column = X[:, f]
        order = np.argsort(column, kind="stable")
        xs, ys = column[order], y[order]
        boundaries = np.nonzero(xs[1:] != xs[:-1])[0]
        if len(boundaries) == 0:
            continue
        pos_prefix = np.cumsum(ys)
        for i in boundaries:
            nl = int(i) + 1
            nr = n - nl
            if nl < min_samples_leaf or nr < min_samples_leaf:
                continue
            lp = int(pos_prefix[i])
            rp = pos_total - lp
            score = _split_score(parent_h, n, (nl - lp, lp), (nr - rp, rp))
            if score is None:
                continue
            if score > best_score:
                best_score = score
                best = (f, (float(xs[i]) + float(xs[i + 1])) / 2.0)
    return best


def _make_leaf(y) -> TreeNode:
    # Scores carry the Laplace-corrected probability: it preserves the
    # majority side of 0.5 (labels are unchanged) while giving big confident
    # leaves more extreme scores than tiny ones, which is what makes tree
    # rankings usable for AUC.
    n = len(y)
    pos = int(y.sum())
    return TreeNode(
        n_samples=n,
        klass=POSITIVE if pos / n >= 0.5 else NEGATIVE,
        p_positive=(pos + 1) / (n + 2),
    )


def _grow(X, y, depth, min_samples_leaf, max_depth, subset_size, rng) -> TreeNode:
    pos = int(y.sum())
    if pos == 0 or pos == len(y) or (max_depth is not None and depth >= max_depth):
        return _make_leaf(y)
    n_features = X.shape[1]
    if subset_size is not None and subset_size < n_features:
        feature_indices = rng.choice(n_features, size=subset_size, replace=False)
    else:
        feature_indices = range(n_features)
    split = _best_split(X, y, feature_indices, min_samples_leaf)
    if split is None:
        return _make_leaf(y)
    f, threshold = split
    mask = X[:, f] <= threshold
    node = TreeNode(n_samples=len(y), feature_index=int(f), threshold=threshold)
    node.left = _grow(X[mask], y[mask], depth + 1, min_samples_leaf, max_depth, subset_size, rng)
    node.right = _grow(
        X[~mask], y[~mask], depth + 1, min_samples_leaf, max_depth, subset_size, rng
    )
    return node


def train_tree(
    dataset: LabeledDataset, min_samples_leaf: int = 2, max_depth: int | None = None
) -> TrainedModel:
    """Binary tree maximizing gain ratio at each split.

    Candidate thresholds are midpoints between consecutive distinct sorted
    values; ties resolve to the lowest feature index, then the lowest
    threshold. A single-class dataset yields a single leaf.
    """
    X = dataset.matrix()
    y = dataset.labels()
    if len(y) < 2:
        raise ValueError("training needs at least 2 rows")
    root = _grow(X, y, 0, min_samples_leaf, max_depth, None, None)
    return TrainedModel(
        kind=TREE,
        feature_names=list(dataset.feature_names),
        schema_version=_schema_version(dataset),
        parameters={
            "tree": root,
            "min_samples_leaf": min_samples_leaf,
            "max_depth": max_depth,
        },
    )


def _schema_version(dataset: LabeledDataset) -> int:
    return dataset.rows[0][1].schema_version


def train_forest(
    dataset: LabeledDataset,
    n_trees: int = 100,
    feature_subset_size: int | None = None,
    seed: int = 0,
    min_samples_leaf: int = 2,
    max_depth: int | None = None,
    bootstrap: bool = True,
) -> TrainedModel:
    """Bagged trees with per-split random feature subsets.

    Tree i draws its RNG stream from (seed, i), so training is reproducible
    and order-independent across workers.
    """
    X = dataset.matrix()
    y = dataset.labels()
    if len(y) < 2:
        raise ValueError("training needs at least 2 rows")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    n_features = X.shape[1]
    if feature_subset_size is None:
        feature_subset_size = math.ceil(math.sqrt(n_features))
    feature_subset_size = min(feature_subset_size, n_features)

    trees = []
    for i in range(n_trees):
        rng = np.random.default_rng([seed, i])
        if bootstrap:
            rows = rng.integers(0, len(y), size=len(y))
            Xi, yi = X[rows], y[rows]
        else:
            Xi, yi = X, y
        subset = feature_subset_size if feature_subset_size < n_features else None
        trees.append(_grow(Xi, yi, 0, min_samples_leaf, max_depth, subset, rng))
    return TrainedModel(
        kind=FOREST,
        feature_names=list(dataset.feature_names),
        schema_version=_schema_version(dataset),
        parameters={
            "trees": trees,
            "n_trees": n_trees,
            "feature_subset_size": feature_subset_size,
            "seed": seed,
            "min_samples_leaf": min_samples_leaf,
            "max_depth": max_depth,
            "bootstrap": bootstrap,
        },
    )


def train_naive_bayes(dataset: LabeledDataset) -> TrainedModel:
    """Per-class per-feature Gaussians with a variance floor, empirical priors."""
    X = dataset.matrix()
    y = dataset.labels()
    if not (np.any(y == 0) and np.any(y == 1)):
        raise ValueError("naive Bayes needs both classes present")
    stats = {}
    for label, value in ((NEGATIVE, 0), (POSITIVE, 1)):
        rows = X[y == value]
        stats[label] = {
            "prior": len(rows) / len(y),
            "means": rows.mean(axis=0).tolist(),
            "variances": np.maximum(rows.var(axis=0), NB_VARIANCE_FLOOR).tolist(),
        }
    return TrainedModel(
        kind=NAIVE_BAYES,
        feature_names=list(dataset.feature_names),
        schema_version=_schema_version(dataset),
        parameters={"stats": stats},
    )


# ---------------------------------------------------------------------------
# prediction


def _tree_prob(node: TreeNode, x) -> float:
    while not node.is_leaf:
        node = node.left if x[node.feature_index] <= node.threshold else node.right
    return node.p_positive


def _nb_log_posteriors(stats: dict, x) -> dict[str, float]:
    out = {}
    for label, s in stats.items():
        means = np.asarray(s["means"])
        variances = np.asarray(s["variances"])
        log_like = -0.5 * np.sum(
            np.log(2.0 * np.pi * variances) + (np.asarray(x) - means) ** 2 / variances
        )
        out[label] = math.log(s["prior"]) + float(log_like)
    return out


def _score_one(model: TrainedModel, x) -> tuple[str, float]:
    if model.kind == TREE:
        p = _tree_prob(model.parameters["tree"], x)
        return (POSITIVE if p >= 0.5 else NEGATIVE, p)
    if model.kind == FOREST:
        trees = model.parameters["trees"]
        probs = [_tree_prob(t, x) for t in trees]
        votes_pos = sum(1 for p in probs if p >= 0.5)
        votes_neg = len(trees) - votes_pos
        score = sum(probs) / len(probs)
        if votes_pos != votes_neg:
            label = POSITIVE if votes_pos > votes_neg else NEGATIVE
        else:
            label = POSITIVE if score >= 0.5 else NEGATIVE
        return (label, score)
    if model.kind == NAIVE_BAYES:
        log_post = _nb_log_posteriors(model.parameters["stats"], x)
        diff = log_post[NEGATIVE] - log_post[POSITIVE]
        score = 1.0 / (1.0 + math.exp(min(700.0, max(-700.0, diff))))
        return (POSITIVE if log_post[POSITIVE] > log_post[NEGATIVE] else NEGATIVE, score)
    raise ModelKindError(f"unknown model kind {model.kind!r}")


def predict(model: TrainedModel, vector: FeatureVector) -> tuple[str, float]:
    """Label and positive-class score for one feature vector."""
    if vector.schema_version != model.schema_version:
        raise SchemaMismatchError(
            f"model schema {model.schema_version} != vector schema {vector.schema_version}"
        )
    return _score_one(model, vector.values)


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class FoldMetrics:
    precision: float
    recall: float
    auc: float
    tp: int
    fp: int
    tn: int
    fn: int


@dataclass
class EvalReport:
    """Aggregated k-fold metrics.

    precision = TP/(TP+FP) and recall = TP/(TP+FN); both are reported as
    0.0 when their denominator is zero. AUC is the tie-aware rank statistic
    over the pooled held-out scores.
    """

    precision: float
    recall: float
    auc: float
    tp: int
    fp: int
    tn: int
    fn: int
    per_fold: list[FoldMetrics]
    k: int


def auc_score(scores, labels) -> float:
    """Probability a positive outranks a negative, ties counting half."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    n_pos = int((labels == 1).sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one row of each class")
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(len(scores), dtype=np.float64)
    i = 0
    while i < len(scores):
        j = i
        while j + 1 < len(scores) and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def _safe_ratio(num: int, denom: int) -> float:
    return num / denom if denom else 0.0


def train_model(dataset: LabeledDataset, spec: dict) -> TrainedModel:
    """Dispatch on spec["kind"]; remaining keys are hyperparameters."""
    spec = dict(spec)
    kind = spec.pop("kind")
    if kind == TREE:
        return train_tree(dataset, **spec)
    if kind == FOREST:
        return train_forest(dataset, **spec)
    if kind == NAIVE_BAYES:
        if spec:
            raise ValueError(f"naive Bayes takes no hyperparameters, got {sorted(spec)}")
        return train_naive_bayes(dataset)
    raise ModelKindError(f"unknown model kind {kind!r}")


def cross_validate(dataset: LabeledDataset, model_spec: dict, k: int = 5, seed: int = 0) -> EvalReport:
    """Stratified k-fold: train on k-1 folds, score the held-out fold."""
    if k < 2:
        raise ValueError("k must be >= 2")
    y = dataset.labels()
    rng = np.random.default_rng([seed, k])
    fold_of = np.empty(len(y), dtype=np.intp)
    for value in (0, 1):
        idx = np.nonzero(y == value)[0]
        if len(idx) < k:
            raise StratificationError(
                f"class {'positive' if value else 'negative'} has {len(idx)} rows, needs >= {k}"
            )
        rng.shuffle(idx)
        fold_of[idx] = np.arange(len(idx)) % k

    pooled_scores: list[float] = []
    pooled_labels: list[int] = []
    agg = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
    per_fold = []
    for fold in range(k):
        test_rows = np.nonzero(fold_of == fold)[0]
        train_rows = np.nonzero(fold_of != fold)[0]
        train_ds = LabeledDataset(
            rows=[dataset.rows[i] for i in train_rows], feature_names=dataset.feature_names
        )
        spec = dict(model_spec)
        if spec.get("kind") == FOREST:
            spec["seed"] = int(np.random.default_rng([seed, fold, spec.get("seed", 0)]).integers(2**31))
        model = train_model(train_ds, spec)

        counts = {"tp": 0, "fp": 0, "tn": 0, "fn": 0}
        fold_scores, fold_labels = [], []
        for i in test_rows:
            _, fv, label = dataset.rows[i]
            pred, score = predict(model, fv)
            truth = 1 if label == POSITIVE else 0
            fold_scores.append(score)
            fold_labels.append(truth)
            if truth == 1:
                counts["tp" if pred == POSITIVE else "fn"] += 1
            else:
                counts["fp" if pred == POSITIVE else "tn"] += 1
        for key in agg:
            agg[key] += counts[key]
        pooled_scores.extend(fold_scores)
        pooled_labels.extend(fold_labels)
        per_fold.append(
            FoldMetrics(
                precision=_safe_ratio(counts["tp"], counts["tp"] + counts["fp"]),
                recall=_safe_ratio(counts["tp"], counts["tp"] + counts["fn"]),
                auc=auc_score(fold_scores, fold_labels),
                **counts,
            )
        )

    return EvalReport(
        precision=_safe_ratio(agg["tp"], agg["tp"] + agg["fp"]),
        recall=_safe_ratio(agg["tp"], agg["tp"] + agg["fn"]),
        auc=auc_score(pooled_scores, pooled_labels),
        per_fold=per_fold,
        k=k,
        **agg,
    )


# ---------------------------------------------------------------------------
# model files and tree export


def export_tree(model: TrainedModel) -> str:
    """Indented one-line-per-node rendering of a decision tree."""
    if model.kind != TREE:
        raise ModelKindError(f"export_tree needs a {TREE} model, got {model.kind}")
    lines: list[str] = []

    def walk(node: TreeNode, depth: int) -> None:
        pad = "  " * depth
        if node.is_leaf:
            lines.append(f"{pad}leaf {node.klass} ({node.n_samples})")
        else:
            name = model.feature_names[node.feature_index]
            lines.append(f"{pad}feature {name} <= {node.threshold!r}")
            walk(node.left, depth + 1)
            walk(node.right, depth + 1)

    walk(model.parameters["tree"], 0)
    return "\n".join(lines) + "\n"


def _tree_to_obj(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"n_samples": node.n_samples, "class": node.klass, "p_positive": node.p_positive}
    return {
        "n_samples": node.n_samples,
        "feature_index": node.feature_index,
        "threshold": node.threshold,
        "left": _tree_to_obj(node.left),
        "right": _tree_to_obj(node.right),
    }


def _tree_from_obj(obj: dict) -> TreeNode:
    if "class" in obj:
        return TreeNode(
            n_samples=obj["n_samples"], klass=obj["class"], p_positive=obj["p_positive"]
        )
    return TreeNode(
        n_samples=obj["n_samples"],
        feature_index=obj["feature_index"],
        threshold=obj["threshold"],
        left=_tree_from_obj(obj["left"]),
        right=_tree_from_obj(obj["right"]),
    )


def model_to_json(model: TrainedModel) -> str:
    params = dict(model.parameters)
    if model.kind == TREE:
        params["tree"] = _tree_to_obj(params["tree"])
    elif model.kind == FOREST:
        params["trees"] = [_tree_to_obj(t) for t in params["trees"]]
    obj = {
        "rec": "model",
        "kind": model.kind,
        "schema_version": model.schema_version,
        "feature_names": model.feature_names,
        "parameters": params,
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def model_from_json(text: str) -> TrainedModel:
    obj = json.loads(text)
    if obj.get("rec") != "model":
        raise ModelKindError("not a model record")
    params = dict(obj["parameters"])
    if obj["kind"] == TREE:
        params["tree"] = _tree_from_obj(params["tree"])
    elif obj["kind"] == FOREST:
        params["trees"] = [_tree_from_obj(t) for t in params["trees"]]
    return TrainedModel(
        kind=obj["kind"],
        feature_names=list(obj["feature_names"]),
        schema_version=obj["schema_version"],
        parameters=params,
    )


def save_model(model: TrainedModel, path: str | Path) -> None:
    Path(path).write_text(model_to_json(model) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> TrainedModel:
    return model_from_json(Path(path).read_text(encoding="utf-8"))


def eval_report_to_json(report: EvalReport) -> str:
    obj = {
        "rec": "eval",
        "k": report.k,
        "precision": report.precision,
        "recall": report.recall,
        "auc": report.auc,
        "confusion": {"tp": report.tp, "fp": report.fp, "tn": report.tn, "fn": report.fn},
        "per_fold": [
            {
                "precision": f.precision,
                "recall": f.recall,
                "auc": f.auc,
                "confusion": {"tp": f.tp, "fp": f.fp, "tn": f.tn, "fn": f.fn},
            }
            for f in report.per_fold
        ],
    }
    return json.dumps(obj, ensure_ascii=False, separators=(",", ":"))


def eval_report_summary(report: EvalReport) -> str:
    """Plain-text metrics table."""
    lines = [
        f"{'fold':>4}  {'precision':>9}  {'recall':>9}  {'auc':>9}  {'tp':>5} {'fp':>5} {'tn':>5} {'fn':>5}",
    ]
    for i, f in enumerate(report.per_fold):
        lines.append(
            f"{i:>4}  {f.precision:>9.4f}  {f.recall:>9.4f}  {f.auc:>9.4f}"
            f"  {f.tp:>5} {f.fp:>5} {f.tn:>5} {f.fn:>5}"
        )
    lines.append(
        f"{'all':>4}  {report.precision:>9.4f}  {report.recall:>9.4f}  {report.auc:>9.4f}"
        f"  {report.tp:>5} {report.fp:>5} {report.tn:>5} {report.fn:>5}"
    )
    return "\n".join(lines) + "\n"
