"""Feature selection and projection ahead of clustering.

Three modes. "user" clusters exactly the columns the user picked, at
the weights they set. "select_k_best" ranks columns automatically:
by encoded variance when nothing else is known, by a one-way F
statistic against the current reference labelling once one exists.
"pca" projects the full encoded table onto its top principal axes and
clusters in that projected space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyFeatureError, ValidationError
from .linalg import jacobi_eigh
from .metrics import GroundTruthLabels
from .tabular import DataTable, EncodedDim, EncodedMatrix, encode

MODES = ("user", "select_k_best", "pca")


@dataclass
class FeatureSpec:
    """Which columns feed the distance function, and how.

    selected is the resolved (column, weight) list for user and
    select_k_best modes, ordered by rank (or by the user's listing).
    PCA mode keeps the projection itself: the encoded-space mean, the
    orthonormal axes, and per-column loading norms for attribution.
    """

    mode: str
    selected: list[tuple[str, float]] = field(default_factory=list)
    k_best: int | None = None
    n_components: int | None = None
    pca_mean: np.ndarray | None = None
    pca_axes: np.ndarray | None = None
    explained_variance: list[float] | None = None
    loading_columns: list[str] | None = None
    loading_norms: np.ndarray | None = None  # component x column

    def to_payload(self) -> dict:
        payload: dict = {"mode": self.mode}
        if self.mode == "pca":
            payload["n_components"] = self.n_components
        else:
            payload["selected"] = [[name, float(w)] for name, w in self.selected]
            if self.k_best is not None:
                payload["k_best"] = self.k_best
        return payload

    def top_columns(self, limit: int = 3) -> list[str]:
        """Source columns that dominate this spec, most influential first."""
        if self.mode == "pca":
            weights = np.asarray(self.explained_variance)
            scores = weights @ self.loading_norms
            order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
            return [self.loading_columns[i] for i in order[:limit]]
        ranked = [(name, w) for name, w in self.selected if w > 0]
        ranked.sort(key=lambda pair: -pair[1])
        return [name for name, _ in ranked[:limit]]


def user_features(pairs: list[tuple[str, float]]) -> FeatureSpec:
    spec = FeatureSpec(mode="user", selected=[(name, float(w)) for name, w in pairs])
    _check_selected(spec)
    return spec


def _check_selected(spec: FeatureSpec) -> None:
    if not spec.selected:
        raise EmptyFeatureError("no features selected")
    if all(w <= 0 for _, w in spec.selected):
        raise EmptyFeatureError("every selected feature has weight 0")


def select_k_best(table: DataTable, k: int, truth: GroundTruthLabels | None = None) -> FeatureSpec:
    """Keep the k strongest columns at weight 1.

    Without a reference labelling, strength is the largest variance any
    of the column's encoded dimensions attains. With one, it is the
    largest one-way F statistic of those dimensions across the labeled
    groups, so re-ranking after demonstrations favours the columns that
    actually separate what the user built.
    """
    names = table.column_names()
    if not 1 <= k <= len(names):
        raise ValidationError(f"k must be in 1..{len(names)}, got {k}")
    full = encode(table, [(name, 1.0) for name in names])
    if truth is None:
        dim_scores = full.values.var(axis=0)
    else:
        dim_scores = _anova_f(full, truth)
    scores: dict[str, float] = {}
    for dim, score in zip(full.feature_map, dim_scores):
        prev = scores.get(dim.column)
        if prev is None or score > prev:
            scores[dim.column] = float(score)
    order = sorted(names, key=lambda name: (-scores[name], names.index(name)))
    return FeatureSpec(
        mode="select_k_best", selected=[(name, 1.0) for name in order[:k]], k_best=k
    )


def _anova_f(matrix: EncodedMatrix, truth: GroundTruthLabels) -> np.ndarray:
    """Per-dimension one-way F statistic over the labeled subset."""
    lookup = truth.labels
    rows = [r for r, item in enumerate(matrix.item_ids) if int(item) in lookup]
    labels = np.array([lookup[int(matrix.item_ids[r])] for r in rows])
    x = matrix.values[rows]
    n = len(rows)
    groups = np.unique(labels)
    g = len(groups)
    if g < 2 or n - g < 1:
        return np.zeros(matrix.d_enc)
    grand = x.mean(axis=0)
    ssb = np.zeros(matrix.d_enc)
    ssw = np.zeros(matrix.d_enc)
    for grp in groups:
        block = x[labels == grp]
        mu = block.mean(axis=0)
        ssb += len(block) * (mu - grand) ** 2
        ssw += ((block - mu) ** 2).sum(axis=0)
    msb = ssb / (g - 1)
    msw = ssw / (n - g)
    out = np.zeros(matrix.d_enc)
    degenerate = msw == 0.0
    np.divide(msb, msw, out=out, where=~degenerate)
    out[degenerate & (msb > 0)] = np.inf
    return out


def pca_features(table: DataTable, n_components: int) -> FeatureSpec:
    """Principal axes of the fully encoded table (population covariance)."""
    names = table.column_names()
    full = encode(table, [(name, 1.0) for name in names])
    d = full.d_enc
    if not 1 <= n_components <= d:
        raise ValidationError(f"n_components must be in 1..{d}, got {n_components}")
    mean = full.values.mean(axis=0)
    centered = full.values - mean
    cov = (centered.T @ centered) / full.n_rows
    vals, vecs = jacobi_eigh(cov)
    vals = np.maximum(vals[::-1], 0.0)  # descending, clamped
    vecs = vecs[:, ::-1]
    axes = vecs[:, :n_components]
    total = float(vals.sum())
    explained = [float(v / total) if total > 0 else 0.0 for v in vals[:n_components]]
    norms = np.zeros((n_components, len(names)))
    for col_idx, name in enumerate(names):
        dims = [i for i, dim in enumerate(full.feature_map) if dim.column == name]
        norms[:, col_idx] = np.linalg.norm(axes[dims, :], axis=0)
    return FeatureSpec(
        mode="pca",
        n_components=n_components,
        pca_mean=mean,
        pca_axes=axes,
        explained_variance=explained,
        loading_columns=list(names),
        loading_norms=norms,
    )


def spec_from_payload(table: DataTable, payload: dict) -> FeatureSpec:
    mode = payload.get("mode")
    if mode == "pca":
        return pca_features(table, int(payload["n_components"]))
    if mode == "select_k_best":
        spec = FeatureSpec(
            mode="select_k_best",
            selected=[(name, float(w)) for name, w in payload["selected"]],
            k_best=payload.get("k_best"),
        )
        _check_selected(spec)
        return spec
    if mode == "user":
        return user_features([(name, w) for name, w in payload["selected"]])
    raise ValidationError(f"unknown feature mode {mode!r}")


def default_features(table: DataTable) -> FeatureSpec:
    return select_k_best(table, min(8, len(table.column_names())))


def apply_features(spec: FeatureSpec, table: DataTable) -> EncodedMatrix:
    """Materialize the encoded matrix this spec describes."""
    if spec.mode == "pca":
        names = table.column_names()
        full = encode(table, [(name, 1.0) for name in names])
        projected = (full.values - spec.pca_mean) @ spec.pca_axes
        m = projected.shape[1]
        return EncodedMatrix(
            values=projected,
            feature_map=[EncodedDim(f"component_{i + 1}", None) for i in range(m)],
            scaling=[(0.0, 1.0)] * m,
            weights=np.ones(m),
            item_ids=full.item_ids,
        )
    _check_selected(spec)
    return encode(table, spec.selected)
