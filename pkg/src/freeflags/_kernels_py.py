"""Pure numpy versions of the hot kernels (fallback for the compiled module)."""
import numpy as np

BACKEND = "python"


def rank_mod_p(M, p):
    """Rank of an integer matrix over F_p (p < 2^31)."""
    A = np.array(M, dtype=np.int64) % p
    n, m = A.shape
    rank = 0
    for col in range(m):
        if rank == n:
            break
        nz = np.nonzero(A[rank:, col])[0]
        if len(nz) == 0:
            continue
        piv = rank + nz[0]
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, col]), -1, p)
        A[rank] = (A[rank] * inv) % p
        below = np.nonzero(A[rank + 1 :, col])[0] + rank + 1
        if len(below):
            f = A[below, col][:, None]
            A[below] = (A[below] - f * A[rank][None, :]) % p
        rank += 1
    return rank


def gather_sum(nbr, f):
    """``out[v] = sum_j f[nbr[j, v]]`` for a (deg, n) neighbor table."""
    out = np.zeros(nbr.shape[1], dtype=np.float64)
    for j in range(nbr.shape[0]):
        out += f[nbr[j]]
    return out


def pgl_mul_normalize(E, g, q):
    """Right-multiply 3x3 matrices ``E`` (n x 9, row-major) by ``g`` mod q.

    Each product is scaled so that its first nonzero entry (row-major) is 1
    and packed as ``sum_i e_i q^(8-i)``.
    """
    E = np.asarray(E, dtype=np.int64).reshape(-1, 3, 3)
    G = np.asarray(g, dtype=np.int64).reshape(3, 3)
    P = np.einsum("nij,jk->nik", E, G).reshape(-1, 9) % q
    return normalize_pack(P, q)


def normalize_pack(P, q):
    P = np.asarray(P, dtype=np.int64).reshape(-1, 9) % q
    first = (P != 0).argmax(axis=1)
    lead = P[np.arange(len(P)), first]
    inv = np.zeros(q, dtype=np.int64)
    for a in range(1, q):
        inv[a] = pow(a, -1, q)
    P = (P * inv[lead][:, None]) % q
    weights = q ** np.arange(8, -1, -1, dtype=np.int64)
    return P @ weights
