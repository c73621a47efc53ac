"""Small dense tableau simplex with Bland's rule.

Solves max c.x subject to A x <= b, x >= 0 for the rate-split polytopes
(4 variables, at most a few dozen rows).  All right-hand sides are
nonnegative capacities, so the slack basis is feasible and no phase-1 is
needed.  Bland's rule makes the pivot sequence deterministic and cycle
free, which matters more than speed at this size.
"""

from __future__ import annotations

import numpy as np

TOL = 1e-9


class UnboundedProblemError(Exception):
    pass


def simplex_maximize(c, A, b, max_iter: int = 10000):
    """Return (x, value) maximizing c.x over {A x <= b, x >= 0}.

    Requires b >= 0 (tiny negative rounding is clamped).  The solution is
    a vertex, feasible within TOL.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if b.min(initial=0.0) < -1e-9:
        raise ValueError("right-hand sides must be nonnegative")
    b = np.maximum(b, 0.0)

    # tableau rows 0..m-1: constraints with slack columns; row m: reduced costs
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))

    for _ in range(max_iter):
        red = T[m, : n + m]
        entering = -1
        for j in range(n + m):  # Bland: smallest improving index
            if red[j] < -TOL:
                entering = j
                break
        if entering < 0:
            break
        col = T[:m, entering]
        rows = np.flatnonzero(col > TOL)
        if rows.size == 0:
            raise UnboundedProblemError("objective unbounded over the polytope")
        ratios = T[rows, -1] / col[rows]
        best = ratios.min()
        # Bland tie-break: among min-ratio rows, leave the smallest basis var
        tied = rows[ratios <= best + TOL * (1.0 + abs(best))]
        leaving = min(tied, key=lambda i: basis[i])
        piv = T[leaving, entering]
        T[leaving] /= piv
        col_vals = T[:, entering].copy()
        col_vals[leaving] = 0.0
        T -= np.outer(col_vals, T[leaving])
        basis[leaving] = entering
    else:
        raise RuntimeError("simplex failed to terminate")

    x = np.zeros(n)
    for row, var in enumerate(basis):
        if var < n:
            x[var] = T[row, -1]
    x = np.maximum(x, 0.0)
    return x, float(T[m, -1])
