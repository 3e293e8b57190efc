"""Dense symmetric eigensolver and small distance kernels.

The eigensolver is a cyclic Jacobi rotation scheme with a round-robin
(tournament) ordering, so each sweep applies n/2 mutually disjoint
rotations per round and every round is vectorized across pairs. That
keeps pure-numpy throughput high enough for the few-hundred-row
matrices this engine works with.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericFailureError

JACOBI_MAX_SWEEPS = 100
JACOBI_TOL = 1e-10


def pairwise_sq_dists(x: np.ndarray) -> np.ndarray:
    """All-pairs squared Euclidean distances, clamped at zero."""
    sq = np.einsum("ij,ij->i", x, x)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def pairwise_dists(x: np.ndarray) -> np.ndarray:
    return np.sqrt(pairwise_sq_dists(x))


def kth_nn_dists(dist: np.ndarray, kth: int) -> np.ndarray:
    """Per-row distance to the kth nearest other row (kth >= 1)."""
    n = dist.shape[0]
    if not 1 <= kth <= n - 1:
        raise ValueError(f"kth must be in 1..{n - 1}, got {kth}")
    # partition over each row excluding self at position 0
    part = np.partition(dist, kth, axis=1)
    return part[:, kth]


def _tournament_rounds(n: int) -> list[np.ndarray]:
    """Round-robin pairings covering every index pair exactly once.

    Returns one (m, 2) array per round; pairs within a round are disjoint.
    Odd n is padded with a bye index that is dropped from the pairing.
    """
    m = n if n % 2 == 0 else n + 1
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                pairs.append((min(a, b), max(a, b)))
        rounds.append(np.array(pairs, dtype=np.intp))
        players = [players[0]] + [players[-1]] + players[1:-2] + [players[-2]]
    return rounds


def jacobi_eigh(
    a: np.ndarray,
    max_sweeps: int = JACOBI_MAX_SWEEPS,
    tol: float = JACOBI_TOL,
) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a real symmetric matrix by Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns). Convergence
    is declared when the off-diagonal Frobenius norm drops below
    tol * ||a||_F; failure to converge within max_sweeps raises
    NumericFailureError carrying the residual norm.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-8):
        raise ValueError("matrix must be symmetric")
    n = a.shape[0]
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    if n == 1:
        return a[0].copy(), np.ones((1, 1))

    work = 0.5 * (a + a.T)
    vecs = np.eye(n)
    fro = float(np.linalg.norm(work))
    if fro == 0.0:
        return np.zeros(n), vecs
    rounds = _tournament_rounds(n)

    off = _offdiag_norm(work)
    converged = off <= tol * fro
    for _ in range(max_sweeps):
        if converged:
            break
        for pairs in rounds:
            p, q = pairs[:, 0], pairs[:, 1]
            apq = work[p, q]
            hot = np.abs(apq) > 0.0
            if not np.any(hot):
                continue
            app = work[p, p]
            aqq = work[q, q]
            tau = np.zeros(len(p))
            # a huge tau overflows harmlessly: t underflows to -0 and the
            # rotation degenerates to the identity, which is what we want
            with np.errstate(over="ignore"):
                np.divide(aqq - app, 2.0 * apq, out=tau, where=hot)
                # smaller-magnitude root of t^2 - 2*tau*t - 1 = 0
                t = np.where(tau >= 0, -1.0, 1.0) / (np.abs(tau) + np.hypot(1.0, tau))
            c_hot = 1.0 / np.hypot(1.0, t)
            c = np.where(hot, c_hot, 1.0)
            s = np.where(hot, t * c_hot, 0.0)
            # rows: A <- J^T A
            rp = work[p, :].copy()
            rq = work[q, :].copy()
            work[p, :] = c[:, None] * rp + s[:, None] * rq
            work[q, :] = -s[:, None] * rp + c[:, None] * rq
            # cols: A <- A J, and accumulate eigenvectors V <- V J
            cp = work[:, p].copy()
            cq = work[:, q].copy()
            work[:, p] = c[None, :] * cp + s[None, :] * cq
            work[:, q] = -s[None, :] * cp + c[None, :] * cq
            vp = vecs[:, p].copy()
            vq = vecs[:, q].copy()
            vecs[:, p] = c[None, :] * vp + s[None, :] * vq
            vecs[:, q] = -s[None, :] * vp + c[None, :] * vq
            # the targeted entries are zero in exact arithmetic
            work[p, q] = 0.0
            work[q, p] = 0.0
        off = _offdiag_norm(work)
        converged = off <= tol * fro
    if not converged:
        raise NumericFailureError(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps", residual=float(off)
        )

    vals = np.diag(work).copy()
    order = np.argsort(vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    # deterministic sign: largest-magnitude component of each vector is positive
    lead = np.abs(vecs).argmax(axis=0)
    signs = np.where(vecs[lead, np.arange(n)] < 0, -1.0, 1.0)
    vecs *= signs[None, :]
    return vals, vecs


def _offdiag_norm(a: np.ndarray) -> float:
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))
