"""Greedy pursuit on two-sided (Kronecker) dictionaries.

Solves Y ~= D1 @ X @ D2 for a sparse X.  Atom (i, j) is the rank-one
matrix outer(D1[:, i], D2[j, :]), i.e. column of kron(D2.T, D1) acting on
vec(X).  The Kronecker product itself is never formed; correlations are
computed as D1^H R D2^H.
"""

from __future__ import annotations

import numpy as np

from .results import RecoveryResult


class RecoveryError(RuntimeError):
    pass


def _refit(Y, D1, D2, support):
    """Joint least squares over the selected atoms."""
    cols = []
    for i, j in support:
        if D2 is None:
            # identity right factor: the atom lives in column j only
            a = np.zeros_like(Y)
            a[:, j] = D1[:, i]
        else:
            a = np.outer(D1[:, i], D2[j, :])
        cols.append(a.ravel())
    A = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(A, Y.ravel(), rcond=None)
    if np.linalg.matrix_rank(A) < len(support):
        raise RecoveryError(f"rank-deficient refit on support {support}")
    return coef, (A @ coef).reshape(Y.shape)


def kron_omp(Y: np.ndarray, D1: np.ndarray, D2: np.ndarray | None = None, *,
             max_iter: int, gamma: float = 0.0, sigma2: float = 1.0,
             rtol: float = 1e-10) -> RecoveryResult:
    """OMP over atoms outer(D1[:, i], D2[j, :]) with a GLRT-style gate.

    ``D2=None`` means the identity, so each column of ``Y`` is modelled
    independently but atoms still compete jointly.  The statistic for atom
    (i, j) is |<atom, R>|^2 / (sigma2 * ||atom||^2); selection stops when
    it does not exceed ``gamma``, when ``max_iter`` atoms are chosen, or
    when the residual falls below ``rtol`` times the data norm.  Exact ties
    go to the lowest (i, j) in row-major order.
    """
    Y = np.asarray(Y, dtype=complex)
    if D2 is None:
        n2 = Y.shape[1]
        w2 = np.ones(n2)
    else:
        n2 = D2.shape[0]
        w2 = np.sum(np.abs(D2) ** 2, axis=1)
    w1 = np.sum(np.abs(D1) ** 2, axis=0)
    wn = np.outer(w1, w2)
    D1h = D1.conj().T
    D2h = None if D2 is None else D2.conj().T

    y_norm = np.linalg.norm(Y)
    R = Y.copy()
    support: list[tuple[int, int]] = []
    stats: list[float] = []
    res = [float(y_norm)]
    coef = np.zeros(0, complex)
    reason = "max_iter"
    while True:
        if len(support) >= max_iter:
            break
        if res[-1] <= rtol * max(y_norm, np.finfo(float).tiny):
            reason = "residual"
            break
        phi = D1h @ R if D2h is None else D1h @ R @ D2h
        G = np.abs(phi) ** 2 / (sigma2 * wn)
        flat = int(np.argmax(G))
        i, j = divmod(flat, n2)
        stat = float(G[i, j])
        stats.append(stat)
        if not stat > gamma:
            reason = "threshold"
            break
        if (i, j) in support:
            raise RecoveryError(f"atom {(i, j)} selected twice")
        support.append((i, j))
        coef, fit = _refit(Y, D1, D2, support)
        R = Y - fit
        res.append(float(np.linalg.norm(R)))
    return RecoveryResult(support, coef, res, stats, stop_reason=reason)
