"""Partition quality metrics.

Two families live here: internal validity scores computed from geometry
alone (silhouette, Davies-Bouldin), and agreement scores computed
against a reference labelling (homogeneity, adjusted Rand, Fowlkes-
Mallows, normalized mutual information). Agreement scores only ever see
the items the reference actually labels; unlabeled items are invisible
to them.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import UndefinedMetricError
from .linalg import pairwise_dists

NOISE = -1


@dataclass(frozen=True)
class GroundTruthLabels:
    """Reference classes for a subset of items, keyed by item id."""

    labels: dict[int, int]

    def __post_init__(self) -> None:
        if not self.labels:
            raise UndefinedMetricError("reference labelling is empty")

    @property
    def n_classes(self) -> int:
        return len(set(self.labels.values()))

    def domain(self) -> set[int]:
        return set(self.labels)


@dataclass
class MetricBundle:
    """Everything the ranker knows about one candidate partition.

    Validity fields are None when the metric is undefined for the
    partition (fewer than two clusters). Agreement fields are None when
    no reference labelling was supplied.
    """

    silhouette: float | None = None
    davies_bouldin: float | None = None
    homogeneity: float | None = None
    adjusted_rand: float | None = None
    fowlkes_mallows: float | None = None
    nmi: float | None = None
    score: float = 0.0

    def as_dict(self) -> dict[str, float | None]:
        return {
            "silhouette": self.silhouette,
            "davies_bouldin": self.davies_bouldin,
            "homogeneity": self.homogeneity,
            "adjusted_rand": self.adjusted_rand,
            "fowlkes_mallows": self.fowlkes_mallows,
            "nmi": self.nmi,
            "score": self.score,
        }


def silhouette_score(
    values: np.ndarray,
    labels: np.ndarray,
    noise_label: int = NOISE,
    pairwise: np.ndarray | None = None,
) -> float:
    """Mean silhouette width over non-noise items.

    Singleton clusters contribute s(i) = 0. Raises UndefinedMetricError
    when fewer than two clusters remain after dropping noise.
    """
    labels = np.asarray(labels)
    keep = labels != noise_label
    kept_labels = labels[keep]
    uniq, inverse, sizes = np.unique(kept_labels, return_inverse=True, return_counts=True)
    if len(uniq) < 2:
        raise UndefinedMetricError("silhouette needs at least two clusters")
    if pairwise is not None:
        dist = pairwise[np.ix_(keep, keep)] if not keep.all() else pairwise
    else:
        dist = pairwise_dists(np.asarray(values, dtype=float)[keep])
    m = len(kept_labels)
    onehot = np.zeros((m, len(uniq)))
    onehot[np.arange(m), inverse] = 1.0
    totals = dist @ onehot  # summed distance from each item to each cluster
    own_size = sizes[inverse]
    s = np.zeros(m)
    multi = own_size > 1
    a = np.zeros(m)
    a[multi] = totals[np.arange(m), inverse][multi] / (own_size[multi] - 1)
    means = totals / sizes[None, :]
    means[np.arange(m), inverse] = np.inf
    b = means.min(axis=1)
    denom = np.maximum(a, b)
    valid = multi & (denom > 0)
    s[valid] = (b[valid] - a[valid]) / denom[valid]
    return float(s.mean())


def davies_bouldin_score(
    values: np.ndarray, labels: np.ndarray, noise_label: int = NOISE
) -> float:
    """Average worst-case cluster similarity; lower is better.

    Coincident centroids make the pairwise ratio +inf, which propagates
    into the score rather than being masked.
    """
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    keep = labels != noise_label
    values = values[keep]
    kept = labels[keep]
    uniq = np.unique(kept)
    k = len(uniq)
    if k < 2:
        raise UndefinedMetricError("davies-bouldin needs at least two clusters")
    centroids = np.stack([values[kept == c].mean(axis=0) for c in uniq])
    scatter = np.array(
        [np.linalg.norm(values[kept == c] - centroids[i], axis=1).mean() for i, c in enumerate(uniq)]
    )
    gaps = pairwise_dists(centroids)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = (scatter[:, None] + scatter[None, :]) / gaps
    ratios[gaps == 0.0] = np.inf  # coincident centroids, no matter the scatter
    np.fill_diagonal(ratios, -np.inf)
    return float(ratios.max(axis=1).mean())


def _labels_seq(seq):
    if isinstance(seq, np.ndarray):
        return seq.tolist()
    if isinstance(seq, (list, tuple)):
        return seq
    return list(seq)


def _as_pairs(pred, truth):
    p = _labels_seq(pred)
    t = _labels_seq(truth)
    if len(p) != len(t):
        raise ValueError("label sequences differ in length")
    if not p:
        raise UndefinedMetricError("agreement metrics need at least one labeled item")
    return p, t


_last_contingency: tuple = ((), None)


def _contingency(pred, truth):
    """Joint and marginal label counts, memoized one pair deep.

    The four agreement scores interrogate the same labeling pair back to
    back (see evaluate_agreement), so the most recent table is reused on
    an exact repeat. Callers treat the returned counters as read-only.
    """
    global _last_contingency
    key = (tuple(pred), tuple(truth))
    last_key, last_value = _last_contingency
    if key == last_key:
        return last_value
    joint = Counter(zip(pred, truth))
    pred_tot = Counter(pred)
    truth_tot = Counter(truth)
    value = (joint, pred_tot, truth_tot)
    _last_contingency = (key, value)
    return value


def _entropy(counts, n: int) -> float:
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / n
            h -= p * math.log(p)
    return h


def homogeneity_score(pred, truth) -> float:
    """1 - H(truth | pred) / H(truth); 1.0 when truth has one class."""
    pred, truth = _as_pairs(pred, truth)
    n = len(pred)
    joint, pred_tot, truth_tot = _contingency(pred, truth)
    h_truth = _entropy(truth_tot.values(), n)
    if h_truth == 0.0:
        return 1.0
    h_cond = 0.0
    for (p_label, _), c in joint.items():
        h_cond -= (c / n) * math.log(c / pred_tot[p_label])
    # Conditioning cannot raise entropy, but float error can push the ratio
    # a hair past the mathematical range.
    return min(1.0, max(0.0, 1.0 - h_cond / h_truth))


def _pair_counts(pred, truth) -> tuple[int, int, int]:
    """(together-in-both, together-in-pred, together-in-truth) pair counts."""
    joint, pred_tot, truth_tot = _contingency(pred, truth)
    tp = sum(math.comb(c, 2) for c in joint.values())
    pred_pairs = sum(math.comb(c, 2) for c in pred_tot.values())
    truth_pairs = sum(math.comb(c, 2) for c in truth_tot.values())
    return tp, pred_pairs, truth_pairs


def adjusted_rand_score(pred, truth) -> float:
    """Chance-corrected pair agreement in [-1, 1].

    A degenerate expectation (denominator zero) happens exactly when
    both partitions are all-singletons or both are one block; that is
    1.0 for identical partitions and 0.0 otherwise.
    """
    pred, truth = _as_pairs(pred, truth)
    n = len(pred)
    tp, pred_pairs, truth_pairs = _pair_counts(pred, truth)
    total = math.comb(n, 2)
    if total == 0:
        return 1.0
    expected = pred_pairs * truth_pairs / total
    maximum = (pred_pairs + truth_pairs) / 2.0
    if maximum == expected:
        identical = pred_pairs == tp == truth_pairs
        return 1.0 if identical else 0.0
    return (tp - expected) / (maximum - expected)


def fowlkes_mallows_score(pred, truth) -> float:
    """Geometric mean of pairwise precision and recall; 0 when either is undefined."""
    pred, truth = _as_pairs(pred, truth)
    tp, pred_pairs, truth_pairs = _pair_counts(pred, truth)
    if pred_pairs == 0 or truth_pairs == 0:
        return 0.0
    return tp / math.sqrt(pred_pairs * truth_pairs)


def nmi_score(pred, truth) -> float:
    """Mutual information normalized by sqrt(H(pred) * H(truth)).

    Both entropies zero means two trivial identical partitions -> 1.0;
    exactly one zero means no information can be shared -> 0.0.
    """
    pred, truth = _as_pairs(pred, truth)
    n = len(pred)
    joint, pred_tot, truth_tot = _contingency(pred, truth)
    h_pred = _entropy(pred_tot.values(), n)
    h_truth = _entropy(truth_tot.values(), n)
    if h_pred == 0.0 and h_truth == 0.0:
        return 1.0
    if h_pred == 0.0 or h_truth == 0.0:
        return 0.0
    mi = 0.0
    for (p_label, t_label), c in joint.items():
        mi += (c / n) * math.log(n * c / (pred_tot[p_label] * truth_tot[t_label]))
    return min(1.0, max(0.0, mi / math.sqrt(h_pred * h_truth)))


def composite_score(
    silhouette: float | None,
    homogeneity: float | None = None,
    coverage: float = 1.0,
) -> float:
    """Rank score: homogeneity when a reference exists, else shifted silhouette.

    ``coverage`` is the fraction of items the assignment actually placed in a
    cluster. Density models can earn a stellar silhouette by writing off half
    the dataset as outliers; scaling by coverage keeps a layout that explains
    only part of the data from outranking one that places every item.
    """
    if homogeneity is not None:
        return float(homogeneity)
    if silhouette is None:
        return 0.0
    return float(coverage) * (float(silhouette) + 1.0) / 2.0


def evaluate_agreement(
    item_ids: np.ndarray,
    labels: np.ndarray,
    truth: GroundTruthLabels,
) -> dict[str, float]:
    """All four agreement scores over the items the reference labels.

    Noise items keep their noise label and count as one extra predicted
    group if present in the labeled subset.
    """
    pred = []
    ref = []
    lookup = truth.labels
    ids = item_ids.tolist() if isinstance(item_ids, np.ndarray) else list(item_ids)
    labs = labels.tolist() if isinstance(labels, np.ndarray) else list(labels)
    for item, lab in zip(ids, labs):
        cls = lookup.get(item)
        if cls is not None:
            pred.append(lab)
            ref.append(cls)
    if not pred:
        raise UndefinedMetricError("no overlap between partition and reference labels")
    return {
        "homogeneity": homogeneity_score(pred, ref),
        "adjusted_rand": adjusted_rand_score(pred, ref),
        "fowlkes_mallows": fowlkes_mallows_score(pred, ref),
        "nmi": nmi_score(pred, ref),
    }
