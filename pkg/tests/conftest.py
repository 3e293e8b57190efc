"""Shared fixtures and small builders used across the test modules."""

from __future__ import annotations

import io

import numpy as np
import pytest

from clusterscout.tabular import DataTable, EncodedDim, EncodedMatrix, ingest_csv


def matrix_from(values, weights=None) -> EncodedMatrix:
    """Wrap a plain array of encoded values in an EncodedMatrix.

    The values are taken as already weighted; the weights vector only
    records which dimensions are active.
    """
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    d = vals.shape[1]
    w = np.ones(d) if weights is None else np.asarray(weights, dtype=float)
    dims = [EncodedDim(f"f{i}", None) for i in range(d)]
    return EncodedMatrix(vals, dims, [(0.0, 1.0)] * d, w)


def planted_blobs(
    n_per: int = 100,
    n_blobs: int = 3,
    d: int = 5,
    sigma: float = 0.5,
    gap: float = 8.0,
    seed: int = 123,
) -> tuple[np.ndarray, np.ndarray]:
    """Well-separated Gaussian blobs plus the generating labels."""
    rng = np.random.default_rng(seed)
    centers = np.zeros((n_blobs, d))
    for b in range(n_blobs):
        centers[b, b % d] = gap * (1 + b // d)
    points = []
    labels = []
    for b in range(n_blobs):
        points.append(rng.normal(centers[b], sigma, size=(n_per, d)))
        labels.extend([b] * n_per)
    return np.vstack(points), np.array(labels)


def blob_csv(points: np.ndarray, labels: np.ndarray | None = None) -> bytes:
    """Serialize generated points as an ingestible CSV document."""
    buf = io.StringIO()
    d = points.shape[1]
    header = [f"f{i}" for i in range(d)]
    if labels is not None:
        header.append("blob")
    buf.write(",".join(header) + "\n")
    for row_idx, row in enumerate(points):
        cells = [f"{v:.6f}" for v in row]
        if labels is not None:
            cells.append(str(int(labels[row_idx])))
        buf.write(",".join(cells) + "\n")
    return buf.getvalue().encode()


def table_from_csv(text: str) -> DataTable:
    return ingest_csv(text.encode())


@pytest.fixture
def toy_table() -> DataTable:
    """Small mixed-type table exercising both column kinds and missing cells."""
    return table_from_csv(
        "chr,risk,region\n"
        "1,0.25,Africa\n"
        "2,0.50,Africa\n"
        "9,NA,America\n"
        "11,1.00,Europe\n"
    )


@pytest.fixture
def separated_matrix() -> EncodedMatrix:
    """Two obvious 1-D groups: {0, 1} and {10, 11}."""
    return matrix_from([0.0, 1.0, 10.0, 11.0])
