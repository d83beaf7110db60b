"""Pure NumPy implementations of the hot kernels.

These mirror ``_kernels.pyx`` call for call and are used when the compiled
extension is unavailable or ``SURFEM_PURE_PYTHON`` is set.
"""

import numpy as np


def mark_closure(tri_edges, longest_local, edge_marked, max_rounds):
    """Close a set of marked edges under the longest-edge rule, in place.

    Any triangle with a marked edge must also have its longest edge marked.
    Returns the number of propagation rounds, or -1 if ``max_rounds`` was
    not enough.
    """
    m = tri_edges.shape[0]
    longest = tri_edges[np.arange(m), longest_local]
    for rnd in range(max_rounds + 1):
        touched = edge_marked[tri_edges].any(axis=1)
        need = touched & ~edge_marked[longest]
        if not need.any():
            return rnd
        if rnd == max_rounds:
            break
        edge_marked[longest[need]] = True
    return -1


def assemble_csr(tris, local, n):
    """Scatter element matrices into CSR arrays ``(indptr, indices, data)``.

    Duplicate entries are summed in triangle order so the result is
    bit-identical to the compiled kernel.
    """
    tris = np.asarray(tris, dtype=np.int64)
    k = tris.shape[1]
    rows = np.repeat(tris, k, axis=1).ravel()
    cols = np.tile(tris, (1, k)).ravel()
    keys = rows * n + cols
    uniq, inv = np.unique(keys, return_inverse=True)
    data = np.bincount(inv.ravel(), weights=np.asarray(local, dtype=float).ravel(), minlength=uniq.size)
    indices = (uniq % n).astype(np.int64)
    counts = np.bincount(uniq // n, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices, data


def csr_matvec(indptr, indices, data, x):
    row = np.repeat(np.arange(indptr.size - 1), np.diff(indptr))
    return np.bincount(row, weights=data * x[indices], minlength=indptr.size - 1)


def pcg_jacobi(indptr, indices, data, b, tol, maxiter, project):
    """Jacobi-preconditioned conjugate gradients on a CSR matrix.

    With ``project`` the iteration runs on the complement of the constant
    vector: residuals and preconditioned residuals are re-centred every step.

    Returns ``(x, iterations, relative_residual, converged)``.
    """
    from scipy.sparse import csr_matrix

    n = b.size
    A = csr_matrix((data, indices, indptr), shape=(n, n))
    diag = A.diagonal()
    dinv = np.where(diag != 0.0, 1.0 / np.where(diag != 0.0, diag, 1.0), 0.0)
    x = np.zeros(n)
    bnorm = float(np.sqrt(b @ b))
    if bnorm == 0.0:
        return x, 0, 0.0, True
    r = b.copy()
    if project:
        r -= r.mean()
    z = dinv * r
    if project:
        z -= z.mean()
    p = z.copy()
    rz = float(r @ z)
    it = 0
    converged = False
    while it < maxiter:
        it += 1
        q = A @ p
        pq = float(p @ q)
        if pq <= 0.0:
            break
        alpha = rz / pq
        x += alpha * p
        r -= alpha * q
        if project:
            r -= r.mean()
        if np.sqrt(r @ r) <= tol * bnorm:
            true_r = b - A @ x
            if project:
                true_r -= true_r.mean()
            if np.sqrt(true_r @ true_r) <= tol * bnorm:
                converged = True
                break
            r = true_r
            z = dinv * r
            if project:
                z -= z.mean()
            p = z.copy()
            rz = float(r @ z)
            continue
        z = dinv * r
        if project:
            z -= z.mean()
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    true_r = b - A @ x
    if project:
        true_r -= true_r.mean()
    return x, it, float(np.sqrt(true_r @ true_r)) / bnorm, converged
