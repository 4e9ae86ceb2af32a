"""KNN, CART and random-forest runtime regressors, built on numpy only.

Everything is deterministic: distance and split-quality ties have fixed
tie-breaking rules, forests derive one RNG per tree from the base seed, and
repeated fits with the same inputs are bit-identical.  Targets may be
regressed on a log scale (the usual stabilization for heavy-tailed
runtimes); predictions are mapped back to seconds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import FitError, SchemaError, ValidationError

MODEL_FORMAT_VERSION = 1

#: Runtimes are floored here before a log transform.
LOG_FLOOR_S = 0.01

TARGET_TRANSFORMS = ("raw", "log")


def transform_targets(y: np.ndarray, how: str) -> np.ndarray:
    if how == "raw":
        return np.asarray(y, dtype=float)
    if how == "log":
        return np.log(np.maximum(np.asarray(y, dtype=float), LOG_FLOOR_S))
    raise ValidationError(f"unknown target transform {how!r}")


def inverse_transform(value: float, how: str) -> float:
    return math.exp(value) if how == "log" else float(value)


@dataclass(frozen=True)
class Dataset:
    """Feature rows plus penalized-runtime targets for one encoding."""

    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise ValidationError("X must be a 2-d matrix")
        if len(X) != len(y):
            raise ValidationError("X and y must have the same number of rows")
        if X.shape[1] != len(self.feature_names):
            raise ValidationError("feature_names must match X columns")
        if X.size and not np.isfinite(X).all():
            raise ValidationError("X contains non-finite values")
        if y.size and not np.isfinite(y).all():
            raise ValidationError("y contains non-finite values")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class Hyperparams:
    knn_k: int = 5
    tree_max_depth: Optional[int] = None  # None = unlimited
    tree_min_leaf: int = 1
    forest_trees: int = 100
    forest_mtry: Optional[int] = None  # None = use all features
    seed: int = 0

    def __post_init__(self):
        if self.knn_k < 1:
            raise ValidationError("knn_k must be >= 1")
        if self.tree_max_depth is not None and self.tree_max_depth < 1:
            raise ValidationError("tree_max_depth must be >= 1 or None")
        if self.tree_min_leaf < 1:
            raise ValidationError("tree_min_leaf must be >= 1")
        if self.forest_trees < 1:
            raise ValidationError("forest_trees must be >= 1")
        if self.forest_mtry is not None and self.forest_mtry < 1:
            raise ValidationError("forest_mtry must be >= 1 or None")


# ---------------------------------------------------------------------------
# Scaling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Scaler:
    mean: np.ndarray
    std: np.ndarray


def fit_scaler(X: np.ndarray) -> Scaler:
    """Per-feature z-score parameters (population std)."""
    X = np.asarray(X, dtype=float)
    if len(X) < 1:
        raise FitError("scaler needs at least one row")
    return Scaler(mean=X.mean(axis=0), std=X.std(axis=0))


def apply_scaler(scaler: Scaler, X: np.ndarray) -> np.ndarray:
    """z-score transform; zero-variance features map to 0."""
    X = np.asarray(X, dtype=float)
    safe = np.where(scaler.std > 0, scaler.std, 1.0)
    scaled = (X - scaler.mean) / safe
    return np.where(scaler.std > 0, scaled, 0.0)


# ---------------------------------------------------------------------------
# CART core
# ---------------------------------------------------------------------------


@dataclass
class TreeNode:
    value: float
    feature: Optional[int] = None
    threshold: float = 0.0
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None


def _best_threshold(x: np.ndarray, y: np.ndarray, min_leaf: int):
    """Lowest-SSE threshold for one feature, or None if no valid split.

    Candidate thresholds are midpoints of consecutive distinct sorted
    values; among equal-SSE candidates the lowest threshold wins.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    n = len(ys)
    if n < 2 * min_leaf:
        return None
    left_sizes = np.arange(1, n)
    valid = (xs[:-1] < xs[1:]) & (left_sizes >= min_leaf) & (n - left_sizes >= min_leaf)
    if not valid.any():
        return None
    c1 = np.cumsum(ys)
    c2 = np.cumsum(ys * ys)
    left_sum = c1[:-1]
    left_sq = c2[:-1]
    right_sizes = n - left_sizes
    sse = (left_sq - left_sum**2 / left_sizes) + (
        (c2[-1] - left_sq) - (c1[-1] - left_sum) ** 2 / right_sizes
    )
    sse = np.where(valid, sse, np.inf)
    i = int(np.argmin(sse))  # first occurrence = lowest threshold
    threshold = xs[i] + (xs[i + 1] - xs[i]) / 2.0
    if not xs[i] < threshold < xs[i + 1]:  # adjacent floats collapsed
        threshold = float(xs[i])
    return float(sse[i]), float(threshold)


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: Optional[int],
    min_leaf: int,
    depth: int = 0,
    rng: Optional[np.random.Generator] = None,
    mtry: Optional[int] = None,
) -> TreeNode:
    node = TreeNode(value=float(np.mean(y)))
    if max_depth is not None and depth >= max_depth:
        return node
    if len(y) < 2 * min_leaf or np.all(y == y[0]):
        return node
    p = X.shape[1]
    if p == 0:
        return node
    if mtry is not None and mtry < p:
        candidates = np.sort(rng.choice(p, size=mtry, replace=False))
    else:
        candidates = range(p)
    best = None  # (sse, feature, threshold); ties keep the earlier feature
    for j in candidates:
        found = _best_threshold(X[:, j], y, min_leaf)
        if found is None:
            continue
        sse, threshold = found
        if best is None or sse < best[0]:
            best = (sse, int(j), threshold)
    if best is None:
        return node
    _, feature, threshold = best
    mask = X[:, feature] <= threshold
    node.feature = feature
    node.threshold = threshold
    node.left = _grow_tree(X[mask], y[mask], max_depth, min_leaf, depth + 1, rng, mtry)
    node.right = _grow_tree(
        X[~mask], y[~mask], max_depth, min_leaf, depth + 1, rng, mtry
    )
    return node


def _tree_value(node: TreeNode, vector: np.ndarray) -> float:
    while not node.is_leaf:
        node = node.left if vector[node.feature] <= node.threshold else node.right
    return node.value


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


@dataclass
class RuntimeModel:
    """A fitted regressor predicting runtime seconds for one encoding."""

    kind: str  # "knn" | "tree" | "forest"
    feature_names: tuple[str, ...]
    hyperparams: Hyperparams
    target_transform: str
    scaler: Optional[Scaler]
    state: dict = field(default_factory=dict)


def knn_fit(
    data: Dataset,
    k: int,
    scaler: Optional[Scaler] = None,
    target_transform: str = "raw",
) -> RuntimeModel:
    """k-nearest-neighbour regressor on z-scored features."""
    if k > len(data):
        raise FitError(f"k={k} exceeds the {len(data)} training rows")
    if k < 1:
        raise FitError("k must be >= 1")
    scaler = scaler or fit_scaler(data.X)
    return RuntimeModel(
        kind="knn",
        feature_names=data.feature_names,
        hyperparams=Hyperparams(knn_k=k),
        target_transform=target_transform,
        scaler=scaler,
        state={
            "X": apply_scaler(scaler, data.X),
            "y": transform_targets(data.y, target_transform),
        },
    )


def knn_predict(model: RuntimeModel, vector: Sequence[float]) -> float:
    """Mean target of the k nearest rows; distance ties prefer lower index."""
    z = apply_scaler(model.scaler, np.asarray(vector, dtype=float))
    X = model.state["X"]
    distances = ((X - z) ** 2).sum(axis=1)
    nearest = np.argsort(distances, kind="stable")[: model.hyperparams.knn_k]
    return inverse_transform(
        float(np.mean(model.state["y"][nearest])), model.target_transform
    )


def tree_fit(
    data: Dataset,
    max_depth: Optional[int] = None,
    min_leaf: int = 1,
    seed: int = 0,
    target_transform: str = "raw",
) -> RuntimeModel:
    """CART regression tree; the best split minimizes child SSE, with ties
    broken by lower feature index then lower threshold.

    Plain CART is deterministic, so `seed` only matters for the forest's
    feature-subsampled trees; it is kept here for interface symmetry.
    """
    if len(data) < 1:
        raise FitError("tree needs at least one row")
    y = transform_targets(data.y, target_transform)
    root = _grow_tree(data.X, y, max_depth, min_leaf)
    return RuntimeModel(
        kind="tree",
        feature_names=data.feature_names,
        hyperparams=Hyperparams(tree_max_depth=max_depth, tree_min_leaf=min_leaf, seed=seed),
        target_transform=target_transform,
        scaler=None,
        state={"tree": root},
    )


def tree_predict(model: RuntimeModel, vector: Sequence[float]) -> float:
    value = _tree_value(model.state["tree"], np.asarray(vector, dtype=float))
    return inverse_transform(value, model.target_transform)


def forest_fit(
    data: Dataset,
    trees: int,
    mtry: Optional[int] = None,
    min_leaf: int = 1,
    seed: int = 0,
    max_depth: Optional[int] = None,
    bootstrap: bool = True,
    target_transform: str = "raw",
) -> RuntimeModel:
    """Random forest: tree i trains on a bootstrap sample seeded with
    seed + i and draws a fresh feature sample of size mtry at every split.

    `bootstrap=False` is a test hook making a 1-tree, full-mtry forest
    coincide with tree_fit.
    """
    if len(data) < 1:
        raise FitError("forest needs at least one row")
    p = data.X.shape[1]
    if mtry is not None and mtry > p:
        raise FitError(f"mtry={mtry} exceeds the {p} features")
    y = transform_targets(data.y, target_transform)
    members = []
    for i in range(trees):
        rng = np.random.default_rng(seed + i)
        if bootstrap:
            idx = rng.integers(0, len(data), size=len(data))
            Xb, yb = data.X[idx], y[idx]
        else:
            Xb, yb = data.X, y
        members.append(_grow_tree(Xb, yb, max_depth, min_leaf, rng=rng, mtry=mtry))
    return RuntimeModel(
        kind="forest",
        feature_names=data.feature_names,
        hyperparams=Hyperparams(
            forest_trees=trees,
            forest_mtry=mtry,
            tree_min_leaf=min_leaf,
            tree_max_depth=max_depth,
            seed=seed,
        ),
        target_transform=target_transform,
        scaler=None,
        state={"trees": members},
    )


def forest_member_predictions(
    model: RuntimeModel, vector: Sequence[float]
) -> np.ndarray:
    """Per-tree predictions in the model's transformed target space."""
    z = np.asarray(vector, dtype=float)
    return np.array([_tree_value(t, z) for t in model.state["trees"]])


def forest_predict(model: RuntimeModel, vector: Sequence[float]) -> float:
    members = forest_member_predictions(model, vector)
    return inverse_transform(float(np.mean(members)), model.target_transform)


def fit_model(
    kind: str, data: Dataset, hp: Hyperparams, target_transform: str = "raw"
) -> RuntimeModel:
    """Dispatch to the kind-specific fit with fields taken from `hp`."""
    if kind == "knn":
        return knn_fit(data, hp.knn_k, target_transform=target_transform)
    if kind == "tree":
        return tree_fit(
            data,
            max_depth=hp.tree_max_depth,
            min_leaf=hp.tree_min_leaf,
            seed=hp.seed,
            target_transform=target_transform,
        )
    if kind == "forest":
        return forest_fit(
            data,
            trees=hp.forest_trees,
            mtry=hp.forest_mtry,
            min_leaf=hp.tree_min_leaf,
            seed=hp.seed,
            max_depth=hp.tree_max_depth,
            target_transform=target_transform,
        )
    raise ValidationError(f"unknown model kind {kind!r}")


def predict(model: RuntimeModel, vector: Sequence[float]) -> float:
    if model.kind == "knn":
        return knn_predict(model, vector)
    if model.kind == "tree":
        return tree_predict(model, vector)
    if model.kind == "forest":
        return forest_predict(model, vector)
    raise ValidationError(f"unknown model kind {model.kind!r}")


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _tree_to_doc(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"value": node.value}
    return {
        "value": node.value,
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _tree_to_doc(node.left),
        "right": _tree_to_doc(node.right),
    }


def _tree_from_doc(doc: dict) -> TreeNode:
    if "feature" not in doc:
        return TreeNode(value=doc["value"])
    return TreeNode(
        value=doc["value"],
        feature=doc["feature"],
        threshold=doc["threshold"],
        left=_tree_from_doc(doc["left"]),
        right=_tree_from_doc(doc["right"]),
    )


def save_model(model: RuntimeModel, path: Path) -> None:
    hp = model.hyperparams
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "feature_names": list(model.feature_names),
        "target_transform": model.target_transform,
        "hyperparams": {
            "knn_k": hp.knn_k,
            "tree_max_depth": hp.tree_max_depth,
            "tree_min_leaf": hp.tree_min_leaf,
            "forest_trees": hp.forest_trees,
            "forest_mtry": hp.forest_mtry,
            "seed": hp.seed,
        },
        "scaler": None
        if model.scaler is None
        else {"mean": model.scaler.mean.tolist(), "std": model.scaler.std.tolist()},
    }
    if model.kind == "knn":
        doc["state"] = {
            "X": model.state["X"].tolist(),
            "y": model.state["y"].tolist(),
        }
    elif model.kind == "tree":
        doc["state"] = {"tree": _tree_to_doc(model.state["tree"])}
    else:
        doc["state"] = {"trees": [_tree_to_doc(t) for t in model.state["trees"]]}
    Path(path).write_text(json.dumps(doc) + "\n")


def load_model(path: Path, expect_features: Optional[Sequence[str]] = None) -> RuntimeModel:
    doc = json.loads(Path(path).read_text())
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise SchemaError(
            f"model format version {doc.get('format_version')} != "
            f"{MODEL_FORMAT_VERSION}"
        )
    names = tuple(doc["feature_names"])
    if expect_features is not None and names != tuple(expect_features):
        raise SchemaError(
            f"model features {list(names)[:4]}... do not match the expected schema"
        )
    scaler = None
    if doc["scaler"] is not None:
        scaler = Scaler(
            mean=np.array(doc["scaler"]["mean"], dtype=float),
            std=np.array(doc["scaler"]["std"], dtype=float),
        )
    kind = doc["kind"]
    if kind == "knn":
        state = {
            "X": np.array(doc["state"]["X"], dtype=float).reshape(-1, len(names)),
            "y": np.array(doc["state"]["y"], dtype=float),
        }
    elif kind == "tree":
        state = {"tree": _tree_from_doc(doc["state"]["tree"])}
    elif kind == "forest":
        state = {"trees": [_tree_from_doc(t) for t in doc["state"]["trees"]]}
    else:
        raise SchemaError(f"unknown model kind {kind!r}")
    hp = doc["hyperparams"]
    return RuntimeModel(
        kind=kind,
        feature_names=names,
        hyperparams=Hyperparams(
            knn_k=hp["knn_k"],
            tree_max_depth=hp["tree_max_depth"],
            tree_min_leaf=hp["tree_min_leaf"],
            forest_trees=hp["forest_trees"],
            forest_mtry=hp["forest_mtry"],
            seed=hp["seed"],
        ),
        target_transform=doc["target_transform"],
        scaler=scaler,
        state=state,
    )
