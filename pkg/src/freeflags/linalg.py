"""Exact ranks and a thick-restart Lanczos eigensolver."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels

LARGE_PRIME = 2_147_483_647


def bareiss_rank(M) -> int:
    """Rank over Q by fraction-free elimination on Python integers."""
    A = [[int(x) for x in row] for row in M]
    n = len(A)
    m = len(A[0]) if n else 0
    rank, prev = 0, 1
    for col in range(m):
        piv = next((i for i in range(rank, n) if A[i][col] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][col]
        for i in range(rank + 1, n):
            a = A[i][col]
            row_i, row_r = A[i], A[rank]
            A[i] = [(p * row_i[j] - a * row_r[j]) // prev for j in range(m)]
        prev = p
        rank += 1
        if rank == n:
            break
    return rank


def rank_mod_p(M, p: int = LARGE_PRIME) -> int:
    return int(kernels.rank_mod_p(np.asarray(M, dtype=np.int64), p))


@dataclass
class LanczosResult:
    values: np.ndarray
    vectors: np.ndarray
    residuals: np.ndarray
    matvecs: int
    restarts: int
    converged: bool


def lanczos(
    matvec,
    n: int,
    k: int = 6,
    tol: float = 1e-8,
    basis: int | None = None,
    max_restarts: int = 200,
    seed: int = 0,
    deflate: np.ndarray | None = None,
    v0: np.ndarray | None = None,
) -> LanczosResult:
    """Largest-algebraic eigenpairs of a symmetric operator.

    Lanczos with full reorthogonalization and thick restarts: after each
    cycle the ``k`` wanted Ritz vectors plus the next Krylov direction are
    kept.  ``deflate`` holds orthonormal columns to project out (e.g. the
    constant vector).  Convergence is the absolute residual
    ``||A x - theta x|| <= tol`` for unit Ritz vectors.
    """
    m = basis or max(2 * k + 12, 30)
    m = min(m, n)
    rng = np.random.default_rng(seed)
    D = None if deflate is None else np.asarray(deflate, dtype=np.float64).reshape(n, -1)

    def project(x):
        if D is not None:
            x = x - D @ (D.T @ x)
        return x

    V = np.zeros((n, m))
    W = np.zeros((n, m))
    x = rng.standard_normal(n) if v0 is None else np.asarray(v0, dtype=np.float64).copy()
    x = project(x)
    x /= np.linalg.norm(x)
    V[:, 0] = x
    W[:, 0] = project(matvec(x))
    j = 1
    nmv = 1
    restarts = 0
    while True:
        while j < m:
            w = W[:, j - 1].copy()
            for _ in range(2):
                w -= V[:, :j] @ (V[:, :j].T @ w)
            w = project(w)
            nrm = np.linalg.norm(w)
            if nrm < 1e-12:
                w = project(rng.standard_normal(n))
                for _ in range(2):
                    w -= V[:, :j] @ (V[:, :j].T @ w)
                nrm = np.linalg.norm(w)
            V[:, j] = w / nrm
            W[:, j] = project(matvec(V[:, j]))
            nmv += 1
            j += 1
        H = V[:, :j].T @ W[:, :j]
        H = (H + H.T) / 2
        theta, Y = np.linalg.eigh(H)
        order = np.argsort(theta)[::-1]
        theta, Y = theta[order], Y[:, order]
        X = V[:, :j] @ Y[:, :k]
        AX = W[:, :j] @ Y[:, :k]
        res = np.linalg.norm(AX - X * theta[:k], axis=0)
        if np.all(res <= tol) or restarts >= max_restarts:
            return LanczosResult(theta[:k], X, res, nmv, restarts, bool(np.all(res <= tol)))
        keep = min(k + max(2, (m - k) // 3), j - 1)
        Xk = V[:, :j] @ Y[:, :keep]
        AXk = W[:, :j] @ Y[:, :keep]
        # next Krylov direction: residual of the last basis vector
        r = W[:, j - 1] - V[:, :j] @ (V[:, :j].T @ W[:, j - 1])
        r = project(r - Xk @ (Xk.T @ r))
        V[:, :keep] = Xk
        W[:, :keep] = AXk
        nr = np.linalg.norm(r)
        if nr < 1e-12:
            r = project(rng.standard_normal(n))
            r -= Xk @ (Xk.T @ r)
            nr = np.linalg.norm(r)
        V[:, keep] = r / nr
        W[:, keep] = project(matvec(V[:, keep]))
        nmv += 1
        j = keep + 1
        restarts += 1
