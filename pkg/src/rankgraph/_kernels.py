"""Hot numeric kernels: dense elimination and bordered rank updates over a prime field.

Two interchangeable backends compute identical results:

* a numba ``@njit`` backend (default when numba imports), and
* a pure-numpy backend, selected by setting ``RANKGRAPH_PURE_NUMPY=1``
  in the environment before import (or used automatically when numba is
  unavailable).

All kernels work on ``int64`` arrays with residues in ``[0, p)`` for a
prime ``p < 2**31``, so every intermediate product stays below ``2**62``.
The jit backend replaces the hardware ``%`` in inner loops with a
mul-shift reduction (precomputed per multiplier), which is the main win
over numpy; ``benchmarks/bench_kernels.py`` compares both.
"""

import os

import numpy as np

FORCE_NUMPY = os.environ.get("RANKGRAPH_PURE_NUMPY", "") == "1"

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag instead
    HAVE_NUMBA = False

BACKEND = "numba" if (HAVE_NUMBA and not FORCE_NUMPY) else "numpy"


def active_backend() -> str:
    return BACKEND


# ---------------------------------------------------------------------------
# numpy backend
# ---------------------------------------------------------------------------

def rank_mod_p_numpy(A: np.ndarray, p: int) -> int:
    """Row rank of ``A`` over GF(p). Destroys ``A`` (int64, residues < p)."""
    n_rows, n_cols = A.shape
    r = 0
    for c in range(n_cols):
        nz = np.nonzero(A[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        inv = pow(int(A[r, c]), -1, p)
        if inv != 1:
            A[r] = (A[r] * inv) % p
        rows = np.nonzero(A[r + 1:, c])[0] + r + 1
        if rows.size:
            f = A[rows, c][:, None]
            A[rows] = (A[rows] - f * A[r][None, :]) % p
        r += 1
        if r == n_rows:
            break
    return r


def border_step_numpy(R, T, pivcol, m, nbrs, p) -> int:
    """One symmetric bordering step on a row-reduced state; see BorderRankState.

    ``R`` holds reduced rows (RREF over pivot rows, zero rows otherwise),
    ``T`` the row transform with ``T @ original_rows == R``, ``pivcol[i]``
    the pivot column of row ``i`` or -1.  ``nbrs`` are the 0-based indices
    of the new vertex's neighbors among rows ``0..m-1``.  Returns the rank
    increment (0, 1 or 2).
    """
    added = 0
    if m > 0:
        if nbrs.size:
            ext = T[:m, nbrs].sum(axis=1) % p
        else:
            ext = np.zeros(m, dtype=np.int64)
        nulls = np.nonzero((pivcol[:m] == -1) & (ext != 0))[0]
        if nulls.size:
            # a previously dependent row gains a pivot in the new column
            i0 = int(nulls[0])
            inv = pow(int(ext[i0]), -1, p)
            T[i0, :m] = (T[i0, :m] * inv) % p
            R[i0, m] = 1
            pivcol[i0] = m
            added += 1
            for i in np.nonzero(ext != 0)[0]:
                if int(i) != i0:
                    T[i, :m] = (T[i, :m] - int(ext[i]) * T[i0, :m]) % p
        else:
            pivs = np.nonzero(pivcol[:m] != -1)[0]
            R[pivs, m] = ext[pivs]
    width = m + 1
    R[m, :width] = 0
    if nbrs.size:
        R[m, nbrs] = 1
    T[m, :width] = 0
    T[m, m] = 1
    pivcol[m] = -1
    # reduce the new symmetric row against the pivot rows (RREF: order-free)
    for i in np.nonzero(pivcol[:m] != -1)[0]:
        f = int(R[m, pivcol[i]])
        if f:
            R[m, :width] = (R[m, :width] - f * R[i, :width]) % p
            T[m, :width] = (T[m, :width] - f * T[i, :width]) % p
    nz = np.nonzero(R[m, :width])[0]
    if nz.size:
        cstar = int(nz[0])
        inv = pow(int(R[m, cstar]), -1, p)
        if inv != 1:
            R[m, :width] = (R[m, :width] * inv) % p
            T[m, :width] = (T[m, :width] * inv) % p
        pivcol[m] = cstar
        added += 1
        for i in np.nonzero(pivcol[:m] != -1)[0]:
            f = int(R[i, cstar])
            if f:
                R[i, :width] = (R[i, :width] - f * R[m, :width]) % p
                T[i, :width] = (T[i, :width] - f * T[m, :width]) % p
    return added


# ---------------------------------------------------------------------------
# numba backend
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _modinv(a, p):
        t, newt = 0, 1
        r, newr = p, a
        while newr != 0:
            q = r // newr
            t, newt = newt, t - q * newt
            r, newr = newr, r - q * newr
        return t % p

    @njit(cache=True)
    def _scale_row_jit(M, i, width, f, p):
        # M[i, :width] *= f (mod p), via mul-shift reduction
        w = (f << 32) // p
        for j in range(width):
            b = M[i, j]
            if b != 0:
                q = (w * b) >> 32
                t = f * b - q * p
                if t >= p:
                    t -= p
                M[i, j] = t

    @njit(cache=True)
    def _submul_row_jit(M, dst, src, width, f, p):
        # M[dst, :width] -= f * M[src, :width] (mod p)
        w = (f << 32) // p
        for j in range(width):
            b = M[src, j]
            if b != 0:
                q = (w * b) >> 32
                t = f * b - q * p
                if t >= p:
                    t -= p
                v = M[dst, j] - t
                if v < 0:
                    v += p
                M[dst, j] = v

    @njit(cache=True)
    def rank_mod_p_jit(A, p):
        n_rows, n_cols = A.shape
        r = 0
        for c in range(n_cols):
            piv = -1
            for i in range(r, n_rows):
                if A[i, c] != 0:
                    piv = i
                    break
            if piv < 0:
                continue
            if piv != r:
                for j in range(c, n_cols):
                    tmp = A[piv, j]
                    A[piv, j] = A[r, j]
                    A[r, j] = tmp
            inv = _modinv(A[r, c], p)
            if inv != 1:
                w = (inv << 32) // p
                for j in range(c, n_cols):
                    b = A[r, j]
                    if b != 0:
                        q = (w * b) >> 32
                        t = inv * b - q * p
                        if t >= p:
                            t -= p
                        A[r, j] = t
            for i in range(r + 1, n_rows):
                f = A[i, c]
                if f != 0:
                    w = (f << 32) // p
                    A[i, c] = 0
                    for j in range(c + 1, n_cols):
                        b = A[r, j]
                        if b != 0:
                            q = (w * b) >> 32
                            t = f * b - q * p
                            if t >= p:
                                t -= p
                            v = A[i, j] - t
                            if v < 0:
                                v += p
                            A[i, j] = v
            r += 1
            if r == n_rows:
                break
        return r

    @njit(cache=True)
    def border_step_jit(R, T, pivcol, m, nbrs, p):
        added = 0
        if m > 0:
            ext = np.zeros(m, dtype=np.int64)
            for i in range(m):
                s = 0
                for t in range(nbrs.shape[0]):
                    s += T[i, nbrs[t]]
                ext[i] = s % p
            i0 = -1
            for i in range(m):
                if pivcol[i] == -1 and ext[i] != 0:
                    i0 = i
                    break
            if i0 >= 0:
                inv = _modinv(ext[i0], p)
                if inv != 1:
                    _scale_row_jit(T, i0, m, inv, p)
                R[i0, m] = 1
                pivcol[i0] = m
                added += 1
                for i in range(m):
                    if i != i0 and ext[i] != 0:
                        _submul_row_jit(T, i, i0, m, ext[i], p)
            else:
                for i in range(m):
                    if pivcol[i] != -1:
                        R[i, m] = ext[i]
        width = m + 1
        for j in range(width):
            R[m, j] = 0
            T[m, j] = 0
        for t in range(nbrs.shape[0]):
            R[m, nbrs[t]] = 1
        T[m, m] = 1
        pivcol[m] = -1
        for i in range(m):
            c = pivcol[i]
            if c >= 0:
                f = R[m, c]
                if f != 0:
                    _submul_row_jit(R, m, i, width, f, p)
                    _submul_row_jit(T, m, i, width, f, p)
        cstar = -1
        for j in range(width):
            if R[m, j] != 0:
                cstar = j
                break
        if cstar >= 0:
            inv = _modinv(R[m, cstar], p)
            if inv != 1:
                _scale_row_jit(R, m, width, inv, p)
                _scale_row_jit(T, m, width, inv, p)
            pivcol[m] = cstar
            added += 1
            for i in range(m):
                if pivcol[i] != -1 and R[i, cstar] != 0:
                    f = R[i, cstar]
                    _submul_row_jit(R, i, m, width, f, p)
                    _submul_row_jit(T, i, m, width, f, p)
        return added


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def rank_mod_p_inplace(A: np.ndarray, p: int) -> int:
    """Rank of ``A`` over GF(p); ``A`` is consumed as scratch space."""
    if BACKEND == "numba":
        return int(rank_mod_p_jit(A, p))
    return rank_mod_p_numpy(A, p)


def border_step(R, T, pivcol, m, nbrs, p) -> int:
    if BACKEND == "numba":
        return int(border_step_jit(R, T, pivcol, m, nbrs, p))
    return border_step_numpy(R, T, pivcol, m, nbrs, p)


def implementations() -> dict:
    """Both backends by name, for benchmarks and cross-checking tests."""
    impls = {"numpy": (rank_mod_p_numpy, border_step_numpy)}
    if HAVE_NUMBA:
        impls["numba"] = (rank_mod_p_jit, border_step_jit)
    return impls
