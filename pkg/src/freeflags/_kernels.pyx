# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same contracts as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, int32_t

cnp.import_array()

BACKEND = "cython"


cdef inline int64_t _inv_mod(int64_t a, int64_t p) nogil:
    cdef int64_t t = 0, nt = 1, r = p, nr = a % p, qq, tmp
    if nr < 0:
        nr += p
    while nr != 0:
        qq = r // nr
        tmp = t - qq * nt
        t = nt
        nt = tmp
        tmp = r - qq * nr
        r = nr
        nr = tmp
    if t < 0:
        t += p
    return t


def rank_mod_p(M, p):
    """Rank of an integer matrix over F_p (p < 2^31)."""
    cdef int64_t P = int(p)
    cdef cnp.ndarray[int64_t, ndim=2] A = np.ascontiguousarray(np.array(M, dtype=np.int64) % P)
    cdef Py_ssize_t n = A.shape[0], m = A.shape[1]
    cdef Py_ssize_t rank = 0, col, i, j, piv
    cdef int64_t inv, f, tmp
    with nogil:
        for col in range(m):
            if rank == n:
                break
            piv = -1
            for i in range(rank, n):
                if A[i, col] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != rank:
                for j in range(m):
                    tmp = A[rank, j]
                    A[rank, j] = A[piv, j]
                    A[piv, j] = tmp
            inv = _inv_mod(A[rank, col], P)
            for j in range(col, m):
                A[rank, j] = (A[rank, j] * inv) % P
            for i in range(rank + 1, n):
                f = A[i, col]
                if f != 0:
                    for j in range(col, m):
                        A[i, j] = (A[i, j] - f * A[rank, j]) % P
                        if A[i, j] < 0:
                            A[i, j] += P
            rank += 1
    return int(rank)


def gather_sum(nbr, f):
    """``out[v] = sum_j f[nbr[j, v]]`` for a (deg, n) neighbor table."""
    cdef cnp.ndarray[int32_t, ndim=2] N = np.ascontiguousarray(nbr, dtype=np.int32)
    cdef cnp.ndarray[double, ndim=1] F = np.ascontiguousarray(f, dtype=np.float64)
    cdef Py_ssize_t deg = N.shape[0], n = N.shape[1], j, v
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(n, dtype=np.float64)
    with nogil:
        for j in range(deg):
            for v in range(n):
                out[v] += F[N[j, v]]
    return out


cdef inline int64_t _pack_row(int64_t* row, int64_t q, int64_t* inv) nogil:
    cdef int k
    cdef int64_t lead = 0, code = 0
    for k in range(9):
        if row[k] != 0:
            lead = inv[row[k]]
            break
    for k in range(9):
        code = code * q + (row[k] * lead) % q
    return code


def normalize_pack(P, q):
    cdef int64_t Q = int(q)
    cdef cnp.ndarray[int64_t, ndim=2] A = np.ascontiguousarray(np.asarray(P, dtype=np.int64).reshape(-1, 9) % Q)
    cdef cnp.ndarray[int64_t, ndim=1] inv = np.zeros(Q, dtype=np.int64)
    cdef Py_ssize_t n = A.shape[0], i
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    for i in range(1, Q):
        inv[i] = _inv_mod(i, Q)
    with nogil:
        for i in range(n):
            out[i] = _pack_row(&A[i, 0], Q, &inv[0])
    return out


def pgl_mul_normalize(E, g, q):
    """Right-multiply 3x3 matrices ``E`` (n x 9, row-major) by ``g`` mod q.

    Each product is scaled so that its first nonzero entry (row-major) is 1
    and packed as ``sum_i e_i q^(8-i)``.
    """
    cdef int64_t Q = int(q)
    cdef cnp.ndarray[int64_t, ndim=2] A = np.ascontiguousarray(np.asarray(E, dtype=np.int64).reshape(-1, 9) % Q)
    cdef cnp.ndarray[int64_t, ndim=1] G = np.ascontiguousarray(np.asarray(g, dtype=np.int64).reshape(9) % Q)
    cdef cnp.ndarray[int64_t, ndim=1] inv = np.zeros(Q, dtype=np.int64)
    cdef Py_ssize_t n = A.shape[0], i
    cdef int a, b, c
    cdef int64_t s
    cdef int64_t row[9]
    cdef cnp.ndarray[int64_t, ndim=1] out = np.empty(n, dtype=np.int64)
    for i in range(1, Q):
        inv[i] = _inv_mod(i, Q)
    with nogil:
        for i in range(n):
            for a in range(3):
                for c in range(3):
                    s = 0
                    for b in range(3):
                        s += A[i, 3 * a + b] * G[3 * b + c]
                    row[3 * a + c] = s % Q
            out[i] = _pack_row(row, Q, &inv[0])
    return out
