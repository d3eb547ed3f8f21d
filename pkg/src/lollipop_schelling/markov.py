"""Expected absorption times of finite Markov chains."""
from __future__ import annotations

from fractions import Fraction

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

DIRECT_SOLVE_MAX = 2000


def _reaches(adj: sp.csr_matrix, targets: np.ndarray) -> np.ndarray:
    """Mask of states with a positive-probability path into ``targets``."""
    out = targets.copy()
    while True:
        grown = out | (adj @ out.astype(np.int64) > 0)
        if (grown == out).all():
            return out
        out = grown


def finite_mask(P: sp.csr_matrix, absorbing: np.ndarray) -> np.ndarray:
    """States whose expected absorption time is finite (absorbed with probability one)."""
    adj = (P != 0).astype(np.int64).tocsr()
    can_absorb = _reaches(adj, absorbing)
    doomed = ~can_absorb
    return ~_reaches(adj, doomed)


def absorption_times(P: sp.csr_matrix, absorbing: np.ndarray) -> np.ndarray:
    """Expected steps to absorption from each state (``inf`` where not almost sure)."""
    P = sp.csr_matrix(P)
    n = P.shape[0]
    times = np.full(n, np.inf)
    times[absorbing] = 0.0
    ok = finite_mask(P, absorbing)
    trans = np.flatnonzero(ok & ~absorbing)
    if trans.size:
        Q = P[trans][:, trans]
        system = (sp.identity(trans.size, format="csr") - Q).tocsr()
        times[trans] = _solve(system, np.ones(trans.size))
    return times


def _solve(system: sp.csr_matrix, rhs: np.ndarray) -> np.ndarray:
    # LU fill-in explodes on well-mixed chains of a few thousand states, while
    # Krylov iterations converge quickly there; keep LU for small or stubborn systems.
    if system.shape[0] > DIRECT_SOLVE_MAX:
        x, info = spla.gmres(system, rhs, rtol=1e-13, atol=0.0, restart=200, maxiter=5000)
        if info == 0 and np.abs(system @ x - rhs).max() <= 1e-9 * max(1.0, np.abs(x).max()):
            return x
    if system.shape[0] == 1:
        return rhs / system[0, 0]
    return spla.spsolve(system.tocsc(), rhs)


def absorption_times_exact(rows: list[dict[int, Fraction]], absorbing: list[bool]) -> list[Fraction | None]:
    """Exact version over rational transition rows; ``None`` marks an infinite time.

    ``rows[i]`` maps successor -> probability. Dense Gauss-Jordan elimination, so only
    meant for small chains.
    """
    n = len(rows)
    data = sp.csr_matrix(([1] * sum(len(r) for r in rows),
                          ([i for i, r in enumerate(rows) for _ in r],
                           [j for r in rows for j in r])), shape=(n, n))
    ok = finite_mask(data, np.asarray(absorbing, dtype=bool))
    trans = [i for i in range(n) if ok[i] and not absorbing[i]]
    idx = {s: k for k, s in enumerate(trans)}
    m = len(trans)
    mat = [[Fraction(0)] * (m + 1) for _ in range(m)]
    for k, s in enumerate(trans):
        mat[k][k] += 1
        mat[k][m] = Fraction(1)
        for j, pr in rows[s].items():
            if j in idx:
                mat[k][idx[j]] -= pr
    for col in range(m):
        piv = next(r for r in range(col, m) if mat[r][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        inv = 1 / mat[col][col]
        mat[col] = [x * inv for x in mat[col]]
        for r in range(m):
            if r != col and mat[r][col] != 0:
                f = mat[r][col]
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    out: list[Fraction | None] = []
    for i in range(n):
        if absorbing[i]:
            out.append(Fraction(0))
        elif i in idx:
            out.append(mat[idx[i]][m])
        else:
            out.append(None)
    return out


def tridiagonal_solve_exact(lower, diag, upper, rhs) -> list[Fraction]:
    """Thomas algorithm over Fractions; ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = len(diag)
    c = [Fraction(0)] * n
    d = [Fraction(0)] * n
    c[0] = Fraction(upper[0]) / diag[0] if n > 1 else Fraction(0)
    d[0] = Fraction(rhs[0]) / diag[0]
    for i in range(1, n):
        den = diag[i] - lower[i] * c[i - 1]
        c[i] = Fraction(upper[i]) / den if i < n - 1 else Fraction(0)
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den
    x = [Fraction(0)] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x
