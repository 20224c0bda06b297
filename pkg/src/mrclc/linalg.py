"""Small dense matrix helpers: Lyapunov solve, symmetric min eigenvalue, Hurwitz test.

All matrices here are tiny (n <= 10), so the methods favour checkability over
asymptotic cost.
"""

import math

import numpy as np

from .errors import DimensionMismatch, NotHurwitz, NotSymmetric

SYM_RTOL = 1e-9
EIG_TOL = 1e-9


def _square(M, name):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} has non-finite entries")
    return M


def _solve_dense(M, rhs):
    """Gaussian elimination with partial pivoting. Raises on a (numerically) singular M."""
    M = M.copy()
    rhs = rhs.copy()
    m = M.shape[0]
    scale = max(1.0, float(np.max(np.abs(M))))
    for col in range(m):
        piv = col + int(np.argmax(np.abs(M[col:, col])))
        if abs(M[piv, col]) <= 1e-13 * scale:
            raise np.linalg.LinAlgError("singular system")
        if piv != col:
            M[[col, piv]] = M[[piv, col]]
            rhs[[col, piv]] = rhs[[piv, col]]
        factors = M[col + 1:, col] / M[col, col]
        M[col + 1:, col:] -= np.outer(factors, M[col, col:])
        rhs[col + 1:] -= factors * rhs[col]
    x = np.zeros(m)
    for row in range(m - 1, -1, -1):
        x[row] = (rhs[row] - M[row, row + 1:] @ x[row + 1:]) / M[row, row]
    return x


def solve_lyapunov(A, Q):
    """Solve ``A.T @ P + P @ A = -Q`` for a symmetric positive-definite ``P``.

    The equation is vectorized into an n^2 x n^2 system
    ``(I kron A.T + A.T kron I) vec(P) = -vec(Q)`` and solved densely.

    Raises:
        NotHurwitz: the system is singular or ``P`` is not positive definite.
        DimensionMismatch: ``A`` and ``Q`` are not square of equal size.
    """
    A = _square(A, "A")
    Q = _square(Q, "Q")
    n = A.shape[0]
    if Q.shape != (n, n):
        raise DimensionMismatch(f"Q has shape {Q.shape}, expected {(n, n)}")
    I = np.eye(n)
    # row-major vec: vec(A.T P) = (A.T kron I) vec(P), vec(P A) = (I kron A.T) vec(P)
    K = np.kron(A.T, I) + np.kron(I, A.T)
    try:
        p = _solve_dense(K, -Q.reshape(-1))
    except np.linalg.LinAlgError as exc:
        raise NotHurwitz("Lyapunov system is singular; A has eigenvalues summing to zero") from exc
    P = p.reshape(n, n)
    P = 0.5 * (P + P.T)
    if min_eig_sym(P) <= 0.0:
        raise NotHurwitz("Lyapunov solution is not positive definite")
    return P


def min_eig_sym(S):
    """Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations."""
    S = _square(S, "S")
    n = S.shape[0]
    fro = float(np.linalg.norm(S))
    if np.max(np.abs(S - S.T), initial=0.0) > SYM_RTOL * max(1.0, fro):
        raise NotSymmetric("matrix asymmetry exceeds tolerance")
    if n == 1:
        return float(S[0, 0])
    a = [list(map(float, row)) for row in 0.5 * (S + S.T)]
    tol = 1e-3 * EIG_TOL * max(1.0, fro)
    for _ in range(100):
        off = math.sqrt(sum(a[i][j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                theta = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
    return min(a[i][i] for i in range(n))


def is_hurwitz(A):
    """Lyapunov criterion: A is Hurwitz iff ``A.T P + P A = -I`` has a PD solution."""
    A = _square(A, "A")
    try:
        solve_lyapunov(A, np.eye(A.shape[0]))
    except NotHurwitz:
        return False
    return True
