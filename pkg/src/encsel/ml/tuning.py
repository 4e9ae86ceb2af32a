"""Cross-validation, grid search, and the greedy two-phase feature selection."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from ..errors import ValidationError
from ..features import FeatureCatalog
from .models import Dataset, Hyperparams, fit_model, predict, transform_targets


def rmse(predictions: Sequence[float], targets: Sequence[float]) -> float:
    predictions = np.asarray(predictions, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if predictions.shape != targets.shape or predictions.size == 0:
        raise ValidationError("rmse needs two equal-length, non-empty vectors")
    return float(np.sqrt(np.mean((predictions - targets) ** 2)))


def kfold_split(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Seeded shuffle, then contiguous folds with sizes differing by <= 1."""
    if not 2 <= k <= n:
        raise ValidationError(f"need 2 <= k <= n, got k={k}, n={n}")
    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    folds = []
    start = 0
    for i in range(k):
        size = n // k + (1 if i < n % k else 0)
        folds.append(np.array(sorted(indices[start : start + size]), dtype=int))
        start += size
    return folds


def train_test_split_stratified(
    labels: Sequence, test_fraction: float, seed: int
) -> tuple[list[int], list[int]]:
    """Seeded split stratified by label; returns (train, test) index lists."""
    if not 0.0 < test_fraction < 1.0:
        raise ValidationError("test_fraction must be in (0, 1)")
    groups: dict = {}
    for i, label in enumerate(labels):
        groups.setdefault(label, []).append(i)
    rng = random.Random(seed)
    test: list[int] = []
    for label in sorted(groups, key=repr):
        idxs = groups[label][:]
        rng.shuffle(idxs)
        take = int(round(test_fraction * len(idxs)))
        test.extend(idxs[:take])
    test_set = set(test)
    train = [i for i in range(len(labels)) if i not in test_set]
    return train, sorted(test)


# ---------------------------------------------------------------------------
# Cross-validated objectives
# ---------------------------------------------------------------------------


def cv_rmse(
    data: Dataset,
    kind: str,
    hp: Hyperparams,
    folds: int,
    seed: int,
    target_transform: str = "raw",
) -> float:
    """Mean validation RMSE over k folds, in the transformed target space."""
    fold_indices = kfold_split(len(data), folds, seed)
    scores = []
    for fold in fold_indices:
        mask = np.ones(len(data), dtype=bool)
        mask[fold] = False
        train = Dataset(data.X[mask], data.y[mask], data.feature_names)
        model = fit_model(kind, train, hp, target_transform)
        preds = [predict(model, data.X[i]) for i in fold]
        scores.append(
            rmse(
                transform_targets(np.array(preds), target_transform),
                transform_targets(data.y[fold], target_transform),
            )
        )
    return float(np.mean(scores))


def cv_selection_gap(
    X: np.ndarray,
    targets_by_encoding: Mapping[int, np.ndarray],
    kind: str,
    hp: Hyperparams,
    folds: int,
    seed: int,
    target_transform: str = "raw",
    feature_names: Optional[tuple[str, ...]] = None,
) -> float:
    """Mean per-instance regret of the induced selector on held-out folds.

    For each validation row the six fold-trained models pick the encoding
    with the smallest predicted runtime; the regret is that encoding's
    penalized runtime minus the row minimum.
    """
    names = feature_names or tuple(f"f{i}" for i in range(X.shape[1]))
    encodings = sorted(targets_by_encoding)
    n = len(X)
    fold_indices = kfold_split(n, folds, seed)
    gaps = []
    for fold in fold_indices:
        mask = np.ones(n, dtype=bool)
        mask[fold] = False
        models = {
            enc: fit_model(
                kind,
                Dataset(X[mask], targets_by_encoding[enc][mask], names),
                hp,
                target_transform,
            )
            for enc in encodings
        }
        for i in fold:
            preds = {enc: predict(models[enc], X[i]) for enc in encodings}
            pick = min(encodings, key=lambda e: (preds[e], e))
            row = [targets_by_encoding[enc][i] for enc in encodings]
            gaps.append(targets_by_encoding[pick][i] - min(row))
    return float(np.mean(gaps))


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------


def default_grid(kind: str, n_features: int) -> list[Hyperparams]:
    """The recorded default grids (resolved against the feature count)."""
    if kind == "knn":
        return [Hyperparams(knn_k=k) for k in (1, 3, 5, 7, 9)]
    if kind == "tree":
        return [
            Hyperparams(tree_max_depth=depth, tree_min_leaf=leaf)
            for depth in (4, 6, 8, 12, None)
            for leaf in (1, 3, 5)
        ]
    if kind == "forest":
        sqrt_p = max(1, round(math.sqrt(n_features)))
        third_p = max(1, n_features // 3)
        mtries = [sqrt_p] if sqrt_p == third_p else [sqrt_p, third_p]
        return [
            Hyperparams(forest_trees=trees, forest_mtry=mtry)
            for trees in (50, 100)
            for mtry in mtries
        ]
    raise ValidationError(f"unknown model kind {kind!r}")


def evaluate_grid(
    data: Dataset,
    kind: str,
    grid: Sequence[Hyperparams],
    folds: int,
    seed: int,
    target_transform: str = "raw",
) -> list[tuple[Hyperparams, float]]:
    if not grid:
        raise ValidationError("grid must be non-empty")
    return [
        (hp, cv_rmse(data, kind, hp, folds, seed, target_transform)) for hp in grid
    ]


def grid_search(
    data: Dataset,
    kind: str,
    grid: Sequence[Hyperparams],
    folds: int,
    seed: int,
    target_transform: str = "raw",
) -> Hyperparams:
    """Grid point with minimal mean CV RMSE; ties keep the earlier point."""
    results = evaluate_grid(data, kind, grid, folds, seed, target_transform)
    best_hp, best_score = results[0]
    for hp, score in results[1:]:
        if score < best_score:
            best_hp, best_score = hp, score
    return best_hp


def grid_search_shared(
    X: np.ndarray,
    targets_by_encoding: Mapping[int, np.ndarray],
    kind: str,
    grid: Sequence[Hyperparams],
    folds: int,
    seed: int,
    objective: str = "rmse",
    target_transform: str = "raw",
    feature_names: Optional[tuple[str, ...]] = None,
) -> Hyperparams:
    """One grid point shared by all encodings, scored jointly.

    objective "rmse" averages per-encoding CV RMSE; "selection-gap" scores
    each point by the oracle regret of the selector the six models induce.
    """
    if not grid:
        raise ValidationError("grid must be non-empty")
    names = feature_names or tuple(f"f{i}" for i in range(X.shape[1]))
    best_hp = None
    best_score = math.inf
    for hp in grid:
        if objective == "rmse":
            score = float(
                np.mean(
                    [
                        cv_rmse(
                            Dataset(X, y, names), kind, hp, folds, seed,
                            target_transform,
                        )
                        for y in targets_by_encoding.values()
                    ]
                )
            )
        elif objective == "selection-gap":
            score = cv_selection_gap(
                X, targets_by_encoding, kind, hp, folds, seed, target_transform,
                feature_names=names,
            )
        else:
            raise ValidationError(f"unknown cv objective {objective!r}")
        if score < best_score:
            best_hp, best_score = hp, score
    return best_hp


# ---------------------------------------------------------------------------
# Greedy feature selection
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SelectionStep:
    phase: int
    group: str
    candidates: tuple[str, ...]
    rmse_before: float
    rmse_with: float
    accepted: bool


def greedy_feature_selection(
    X: np.ndarray,
    catalog: FeatureCatalog,
    targets_by_encoding: Mapping[int, np.ndarray],
    folds: int,
    seed: int,
    kind: str = "tree",
    hp: Optional[Hyperparams] = None,
    target_transform: str = "raw",
    max_batch: int = 3,
) -> tuple[tuple[str, ...], list[SelectionStep]]:
    """Two-phase greedy selection over the catalog's feature groups.

    Phase 1 walks each group in seeded random order, adding batches of 1-3
    features and keeping a batch only when the mean CV RMSE across all
    encodings' models strictly improves.  Phase 2 applies the same
    accept/reject rule to each group's surviving feature set as a whole.
    Returns the selected names (catalog order) and the full audit log.
    """
    if X.shape[1] != len(catalog.names):
        raise ValidationError("X columns must match the catalog")
    hp = hp or Hyperparams(tree_max_depth=6, tree_min_leaf=3)
    rng = random.Random(seed)
    col_of = {name: i for i, name in enumerate(catalog.names)}
    encodings = sorted(targets_by_encoding)

    def score(names: Sequence[str]) -> float:
        cols = [col_of[n] for n in names]
        sub = X[:, cols] if cols else np.empty((len(X), 0))
        per_enc = [
            cv_rmse(
                Dataset(sub, targets_by_encoding[enc], tuple(names)),
                kind, hp, folds, seed, target_transform,
            )
            for enc in encodings
        ]
        return float(np.mean(per_enc))

    audit: list[SelectionStep] = []
    survivors: dict[str, list[str]] = {}
    for group in catalog.groups:
        pool = list(catalog.group_names(group))
        rng.shuffle(pool)
        kept: list[str] = []
        kept_score = score(kept)
        while pool:
            batch = pool[: rng.randint(1, max_batch)]
            del pool[: len(batch)]
            trial_score = score(kept + batch)
            accepted = trial_score < kept_score
            audit.append(
                SelectionStep(1, group, tuple(batch), kept_score, trial_score, accepted)
            )
            if accepted:
                kept.extend(batch)
                kept_score = trial_score
        if kept:
            survivors[group] = kept

    groups = list(survivors)
    rng.shuffle(groups)
    selected: list[str] = []
    selected_score = score(selected)
    for group in groups:
        trial = selected + survivors[group]
        trial_score = score(trial)
        accepted = trial_score < selected_score
        audit.append(
            SelectionStep(
                2, group, tuple(survivors[group]), selected_score, trial_score, accepted
            )
        )
        if accepted:
            selected = trial
            selected_score = trial_score

    ordered = tuple(n for n in catalog.names if n in set(selected))
    return ordered, audit
