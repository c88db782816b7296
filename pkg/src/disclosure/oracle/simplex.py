"""Dense revised simplex for small linear programs.

    min c @ x  s.t.  A_ub @ x <= b_ub,  A_eq @ x == b_eq,  x >= 0

Two-phase method with an explicit basis inverse that is refactorized
periodically.  Pricing is Dantzig's rule; after a run of degenerate pivots the
solver switches to Bland's rule, which cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg.blas import dger


class InfeasibleError(RuntimeError):
    pass


class UnboundedError(RuntimeError):
    pass


class IterationLimit(RuntimeError):
    pass


@dataclass
class LPResult:
    x: np.ndarray
    fun: float
    nit: int


def _scale_rows(A, b):
    norms = np.abs(A).max(axis=1)
    norms[norms == 0] = 1.0
    return A / norms[:, None], b / norms


class _Tableau:
    def __init__(self, A, b, basis, tol, refactor_every, degenerate_limit):
        self.A, self.b = A, b
        self.AT = sparse.csr_matrix(A.T)
        self.m, self.n = A.shape
        self.basis = list(basis)
        self.tol = tol
        self.refactor_every = refactor_every
        self.degenerate_limit = degenerate_limit
        self.nit = 0
        self.refactor()

    def refactor(self):
        self.Binv = np.asfortranarray(np.linalg.inv(self.A[:, self.basis]))
        self.xB = self.Binv @ self.b
        self.xB[np.abs(self.xB) < 1e-13] = 0.0
        self.since_refactor = 0

    def run(self, c, allowed, max_iter):
        """Pivot until optimal for cost vector c over columns flagged in `allowed`."""
        degenerate_run = 0
        bland = False
        while True:
            if self.nit >= max_iter:
                raise IterationLimit(f"simplex did not converge in {max_iter} iterations")
            y = c[self.basis] @ self.Binv
            d = c - self.AT @ y
            d[self.basis] = 0.0
            d[~allowed] = 0.0
            cand = np.flatnonzero(d < -self.tol)
            if cand.size == 0:
                return
            j = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            u = self.Binv @ self.A[:, j]
            pos = u > self.tol
            if not pos.any():
                raise UnboundedError("objective unbounded below")
            ratios = np.full(self.m, np.inf)
            ratios[pos] = self.xB[pos] / u[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, best))
            # among tied rows leave the basic variable with smallest index
            r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            step = ratios[r]
            if step <= 1e-12:
                degenerate_run += 1
                if degenerate_run >= self.degenerate_limit:
                    bland = True
            else:
                degenerate_run = 0
                bland = False
            self._pivot(r, j, u)
            self.nit += 1

    def _pivot(self, r, j, u):
        row = self.Binv[r] / u[r]
        # rank-one update in place
        self.Binv = dger(-1.0, u, row, a=self.Binv, overwrite_a=True)
        self.Binv[r] = row
        self.basis[r] = j
        self.since_refactor += 1
        if self.since_refactor >= self.refactor_every:
            self.refactor()
        else:
            self.xB = self.Binv @ self.b
            self.xB[np.abs(self.xB) < 1e-13] = 0.0


def linprog(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, tol: float = 1e-10,
            max_iter: int = 50_000, refactor_every: int = 256,
            degenerate_limit: int = 50) -> LPResult:
    c = np.asarray(c, dtype=float)
    n = c.size
    rows, rhs, slack_sign = [], [], []
    if A_ub is not None:
        A, b = _scale_rows(np.atleast_2d(np.asarray(A_ub, float)), np.asarray(b_ub, float))
        rows.append(A)
        rhs.append(b)
        slack_sign += [1.0] * len(b)
    n_ub = len(slack_sign)
    if A_eq is not None:
        A, b = _scale_rows(np.atleast_2d(np.asarray(A_eq, float)), np.asarray(b_eq, float))
        rows.append(A)
        rhs.append(b)
        slack_sign += [0.0] * len(b)
    if not rows:
        raise ValueError("no constraints")
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    m = A.shape[0]

    # standard form: [A | slacks | artificials]
    S = np.zeros((m, n_ub))
    S[np.arange(n_ub), np.arange(n_ub)] = 1.0
    flip = b < 0
    A[flip] *= -1
    S[flip] *= -1
    b = np.abs(b)
    needs_art = np.array([flip[i] or slack_sign[i] == 0.0 for i in range(m)])
    art_rows = np.flatnonzero(needs_art)
    Art = np.zeros((m, art_rows.size))
    Art[art_rows, np.arange(art_rows.size)] = 1.0
    full = np.hstack([A, S, Art])
    n_tot = full.shape[1]
    basis = []
    k = 0
    for i in range(m):
        if needs_art[i]:
            basis.append(n + n_ub + k)
            k += 1
        else:
            basis.append(n + i)
    is_art = np.zeros(n_tot, bool)
    is_art[n + n_ub:] = True

    tab = _Tableau(full, b, basis, tol, refactor_every, degenerate_limit)
    if art_rows.size:
        c1 = is_art.astype(float)
        tab.run(c1, np.ones(n_tot, bool), max_iter)
        if tab.xB[is_art[tab.basis]].sum() > 1e-8:
            raise InfeasibleError("linear program is infeasible")
        # drive zero-level artificials out of the basis where possible
        for r in range(m):
            if is_art[tab.basis[r]]:
                row = tab.Binv[r] @ full
                row[is_art] = 0.0
                cand = np.flatnonzero(np.abs(row) > 1e-9)
                if cand.size:
                    tab._pivot(r, int(cand[0]), tab.Binv @ full[:, int(cand[0])])
    c2 = np.concatenate([c, np.zeros(n_tot - n)])
    tab.run(c2, ~is_art, max_iter)
    x_full = np.zeros(n_tot)
    x_full[tab.basis] = np.maximum(tab.xB, 0.0)
    x = x_full[:n]
    return LPResult(x=x, fun=float(c @ x), nit=tab.nit)
