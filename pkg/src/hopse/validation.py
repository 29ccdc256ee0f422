"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .aggregate import RankFeatureBundle
from .exceptions import ShapeError


def bundle_layout(bundle: RankFeatureBundle) -> tuple:
    """Hashable description of every matrix width in a bundle."""
    x = tuple(
        (r, tag, bundle.features[(r, tag)].shape[1]) for r in bundle.ranks for tag in bundle.channels
    )
    z = tuple((r, bundle.init[r].shape[1]) for r in bundle.ranks)
    return (bundle.max_rank, tuple(bundle.channels), x, z)


def check_bundles(X, layout: tuple | None = None) -> list[RankFeatureBundle]:
    """Return ``X`` as a list of bundles sharing one layout (``layout`` if given)."""
    if isinstance(X, RankFeatureBundle):
        X = [X]
    bundles = list(X)
    if not bundles:
        raise ValueError("expected at least one bundle")
    for b in bundles:
        if not isinstance(b, RankFeatureBundle):
            raise TypeError(f"expected RankFeatureBundle, got {type(b).__name__}")
    ref = layout if layout is not None else bundle_layout(bundles[0])
    for i, b in enumerate(bundles):
        if bundle_layout(b) != ref:
            raise ShapeError(f"bundle {i} does not match the expected feature layout")
        for r in b.ranks:
            n = b.n_cells(r)
            mats = [b.init[r]] + [b.features[(r, t)] for t in b.channels]
            if any(m.shape[0] != n for m in mats):
                raise ShapeError(f"bundle {i}: rank-{r} row counts disagree")
            if not all(np.all(np.isfinite(m)) for m in mats):
                raise ShapeError(f"bundle {i}: non-finite feature values at rank {r}")
    return bundles


def check_targets(y, n: int, task: str) -> np.ndarray:
    y = np.asarray(y)
    if task == "regression":
        y = y.astype(float)
        if y.ndim == 1:
            y = y[:, None]
        if y.ndim != 2:
            raise ShapeError(f"regression targets must be 1-D or 2-D, got shape {y.shape}")
        if not np.all(np.isfinite(y)):
            raise ShapeError("regression targets contain non-finite values")
    elif y.ndim != 1:
        raise ShapeError(f"class labels must be 1-D, got shape {y.shape}")
    if y.shape[0] != n:
        raise ShapeError(f"{n} bundles but {y.shape[0]} targets")
    return y
