"""Optimization programs behind the predictors.

Three programs share the equality constraint ``A^T psi = r_k``:

* weighted least squares  min psi^T W psi          (closed form)
* weighted L1             min ||W psi||_1          (linear program)
* combined                min ||W psi||_1  with    ||psi - psi_s||_1 <= gamma

The linear programs run on a dense tableau simplex written here: primal
two-phase for cold starts, dual pivots to walk a whole gamma grid from one
factorization. Instances are small (a few hundred rows), so dense updates
are the fast option and keep the solver dependency-free and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import regularization_floor
from .errors import InfeasibleError, InsufficientData, NumericError, UnboundedError

FEASIBILITY_TOL = 1e-6
OPTIMALITY_TOL = 1e-8

# internal pivoting tolerances
_TOL_RC = 1e-9        # reduced-cost threshold for entering candidates
_TOL_PIV = 1e-9       # smallest acceptable pivot magnitude
_TOL_RHS = 1e-9       # basic values below this count as zero


@dataclass(frozen=True)
class SolveResult:
    """Weight vector plus the residual and objective of the program that made it."""

    psi: np.ndarray
    objective: float
    constraint_residual_inf: float
    status: str  # optimal | infeasible | degenerate-regularized

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)


def _floored(w_diag: np.ndarray) -> np.ndarray:
    w = np.asarray(w_diag, dtype=float)
    if w.ndim != 1:
        raise ValueError("w_diag must be a vector")
    if np.any(w < 0):
        raise ValueError("w_diag entries must be >= 0")
    return w + regularization_floor(w)


def _check_shapes(A: np.ndarray, w_diag: np.ndarray, r_k: np.ndarray):
    A = np.asarray(A, dtype=float)
    w = np.asarray(w_diag, dtype=float)
    r = np.asarray(r_k, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a v x n_r matrix")
    v, n_r = A.shape
    if w.shape != (v,):
        raise ValueError(f"w_diag must have length {v}")
    if r.shape != (n_r,):
        raise ValueError(f"r_k must have length {n_r}")
    if v < n_r:
        raise InsufficientData(f"v={v} rows cannot pin down {n_r} regressor dimensions")
    return A, w, r


# ---------------------------------------------------------------------------
# weighted least squares (closed form)
# ---------------------------------------------------------------------------

def solve_weighted_ls(A: np.ndarray, w_diag: np.ndarray, r_k: np.ndarray) -> SolveResult:
    """Minimize psi^T W psi subject to A^T psi = r_k.

    Uses the explicit solution W^-1 A (A^T W^-1 A)^-1 r_k; falls back to a
    pseudo-inverse when the normal matrix is singular and reports that case
    as degenerate-regularized.  Raises InfeasibleError when r_k is not in
    the row space of A^T.
    """
    A, w, r = _check_shapes(A, w_diag, r_k)
    w = _floored(w)
    winv_a = A / w[:, None]
    normal = A.T @ winv_a
    scale = FEASIBILITY_TOL * (1.0 + float(np.max(np.abs(r), initial=0.0)))

    def residual_of(psi):
        return float(np.max(np.abs(A.T @ psi - r), initial=0.0))

    status = "optimal"
    psi = None
    try:
        x = np.linalg.solve(normal, r)
        if np.all(np.isfinite(x)):
            psi = winv_a @ x
    except np.linalg.LinAlgError:
        pass
    if psi is None or residual_of(psi) > scale:
        psi = winv_a @ (np.linalg.pinv(normal) @ r)
        status = "degenerate-regularized"
    residual = residual_of(psi)
    if residual > scale:
        raise InfeasibleError(
            "r_k is outside the row space of A^T; equality system has no solution"
        )
    objective = float(psi @ (w * psi))
    return SolveResult(psi, objective, residual, status)


# ---------------------------------------------------------------------------
# dense tableau simplex
# ---------------------------------------------------------------------------

class _Tableau:
    """Dense simplex tableau: m constraint rows, one objective row, RHS column.

    Entering preference is the most negative reduced cost with lowest-index
    tie-breaks; after a stretch of degenerate pivots the rule switches to
    Bland's (lowest eligible index) until the objective moves again, which
    prevents cycling while keeping the usual speed.
    """

    def __init__(self, T: np.ndarray, basis: np.ndarray, n_enter: int):
        self.T = T
        self.basis = basis
        self.m = basis.size
        self.n = T.shape[1] - 1
        self.n_enter = n_enter  # columns beyond this never enter (artificials)

    def pivot(self, r: int, q: int):
        T = self.T
        T[r] /= T[r, q]
        col = T[:, q].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[:, q] = 0.0
        T[r, q] = 1.0
        self.basis[r] = q

    def _ratio_row(self, q: int, bland: bool) -> int:
        T, m = self.T, self.m
        col = T[:m, q]
        ok = col > _TOL_PIV
        if not np.any(ok):
            raise UnboundedError("linear program is unbounded")
        ratios = np.full(m, np.inf)
        ratios[ok] = np.maximum(T[:m, -1][ok], 0.0) / col[ok]
        best = float(np.min(ratios))
        if not bland:
            return int(np.argmin(ratios))
        tied = np.flatnonzero(ratios <= best + 1e-12 * (1.0 + best))
        return int(tied[np.argmin(self.basis[tied])])

    def primal(self, max_iter: int | None = None) -> int:
        """Run primal pivots until reduced costs are nonnegative."""
        T, m = self.T, self.m
        if max_iter is None:
            max_iter = 200 + 50 * (m + self.n)
        stall_limit = max(64, 2 * m)
        stall = 0
        bland = False
        it = 0
        while True:
            rc = T[m, :self.n_enter]
            if bland:
                cand = np.flatnonzero(rc < -_TOL_RC)
                if cand.size == 0:
                    return it
                q = int(cand[0])
            else:
                q = int(np.argmin(rc))
                if rc[q] >= -_TOL_RC:
                    return it
            r = self._ratio_row(q, bland)
            before = T[m, -1]
            self.pivot(r, q)
            it += 1
            if it > max_iter:
                raise NumericError("simplex iteration limit exceeded")
            if T[m, -1] > before + 1e-12 * (1.0 + abs(before)):
                stall = 0
                bland = False
            else:
                stall += 1
                if stall > stall_limit:
                    bland = True

    def dual(self, max_iter: int) -> bool:
        """Restore primal feasibility with dual pivots; False when it stalls."""
        T, m = self.T, self.m
        for _ in range(max_iter):
            rhs = T[:m, -1]
            r = int(np.argmin(rhs))
            if rhs[r] >= -_TOL_RHS:
                rhs[rhs < 0.0] = 0.0
                return True
            row = T[r, :self.n_enter]
            cand = np.flatnonzero(row < -_TOL_PIV)
            if cand.size == 0:
                raise InfeasibleError("no dual pivot available; system infeasible")
            ratios = T[m, cand] / (-row[cand])
            q = int(cand[np.argmin(ratios)])
            self.pivot(r, q)
        return False

    def solution(self, n_struct: int) -> np.ndarray:
        x = np.zeros(n_struct)
        vals = self.T[:self.m, -1]
        for i, b in enumerate(self.basis):
            if b < n_struct:
                x[b] = max(vals[i], 0.0)
        return x


def _two_phase(M: np.ndarray, b: np.ndarray, c: np.ndarray) -> _Tableau:
    """Solve min c.x s.t. Mx = b, x >= 0 from a cold start."""
    m, n = M.shape
    M = M.copy()
    b = b.copy()
    neg = b < 0
    M[neg] *= -1.0
    b[neg] *= -1.0

    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = M
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    # phase-1 reduced costs for the artificial basis
    T[m, :n] = -M.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = np.arange(n, n + m)
    tab = _Tableau(T, basis, n_enter=n)
    tab.primal()
    if -T[m, -1] > 1e-7 * (1.0 + float(np.max(np.abs(b), initial=0.0))):
        raise InfeasibleError("equality system has no nonnegative solution")

    # pivot leftover artificials out wherever the row still has structure
    for i in range(m):
        if basis[i] >= n:
            row = T[i, :n]
            j = int(np.argmax(np.abs(row)))
            if abs(row[j]) > _TOL_PIV:
                tab.pivot(i, j)

    # phase 2 objective from scratch
    T[m, :] = 0.0
    T[m, :n] = c
    cb = np.where(basis < n, c[np.minimum(basis, n - 1)], 0.0)
    T[m, :] -= cb @ T[:m, :]
    tab.primal()
    return tab


# ---------------------------------------------------------------------------
# weighted L1 with equality constraints
# ---------------------------------------------------------------------------

def solve_l1_equality(A: np.ndarray, w_diag: np.ndarray, r_k: np.ndarray) -> SolveResult:
    """Minimize sum_j w_j |psi_j| subject to A^T psi = r_k.

    Split-variable linear program psi = psi+ - psi-; the optimal vertex has
    at most n_r nonzero entries, so the returned weights are sparse.
    """
    A, w, r = _check_shapes(A, w_diag, r_k)
    w = _floored(w)
    v = A.shape[0]
    M = np.hstack([A.T, -A.T])
    c = np.concatenate([w, w])
    tab = _two_phase(M, r, c)
    x = tab.solution(2 * v)
    psi = x[:v] - x[v:]
    residual = float(np.max(np.abs(A.T @ psi - r), initial=0.0))
    objective = float(w @ np.abs(psi))
    return SolveResult(psi, objective, residual, "optimal")


# ---------------------------------------------------------------------------
# combined program and its gamma path
# ---------------------------------------------------------------------------

def _independent_rows(A: np.ndarray, n_r: int) -> np.ndarray | None:
    """First n_r linearly independent rows of A by greedy Gram-Schmidt."""
    picked: list[int] = []
    Q: list[np.ndarray] = []
    for j in range(A.shape[0]):
        u = A[j].astype(float)
        norm0 = np.linalg.norm(u)
        for q in Q:
            u = u - (q @ u) * q
        if np.linalg.norm(u) > 1e-9 * (1.0 + norm0):
            Q.append(u / np.linalg.norm(u))
            picked.append(j)
            if len(picked) == n_r:
                return np.array(picked)
    return None


class _CombinedProgram:
    """Tableau wrapper for min ||W psi||_1, A^T psi = r_k, ||psi - psi_s||_1 <= gamma.

    Columns: psi+ (v), psi- (v), u (v), s+ (v), s- (v), ball slack (1).
    Rows: n_r equalities, v epigraph rows per sign, the ball row. The start
    basis is crashed from psi_s, which is feasible for every gamma, so no
    phase 1 is needed; moving to the next grid gamma only shifts the RHS
    along the ball-slack column, after which dual pivots restore optimality.
    """

    def __init__(self, A: np.ndarray, w: np.ndarray, r_k: np.ndarray, psi_s: np.ndarray):
        v, n_r = A.shape
        self.v, self.n_r = v, n_r
        self.A, self.w, self.r_k, self.psi_s = A, w, r_k, psi_s
        m = n_r + 2 * v + 1
        n = 5 * v + 1
        self.m, self.n = m, n
        M = np.zeros((m, n))
        M[:n_r, :v] = A.T
        M[:n_r, v:2 * v] = -A.T
        rows_p = np.arange(n_r, n_r + v)
        rows_m = np.arange(n_r + v, n_r + 2 * v)
        cols = np.arange(v)
        M[rows_p, cols] = 1.0
        M[rows_p, v + cols] = -1.0
        M[rows_p, 2 * v + cols] = -1.0
        M[rows_p, 3 * v + cols] = 1.0
        M[rows_m, cols] = -1.0
        M[rows_m, v + cols] = 1.0
        M[rows_m, 2 * v + cols] = -1.0
        M[rows_m, 4 * v + cols] = 1.0
        M[m - 1, 2 * v:3 * v] = 1.0
        M[m - 1, n - 1] = 1.0
        self.M = M
        self.c = np.concatenate([w, w, np.zeros(3 * v + 1)])
        self.b0 = np.concatenate([r_k, psi_s, -psi_s, [0.0]])
        self.tab: _Tableau | None = None
        self.gamma: float = 0.0

    def _crash_tableau(self, gamma: float) -> _Tableau | None:
        v, n_r, m, n = self.v, self.n_r, self.m, self.n
        S = _independent_rows(self.A, n_r)
        if S is None:
            return None
        sign_cols = np.where(self.psi_s >= 0, np.arange(v), v + np.arange(v))
        basis = np.concatenate([
            sign_cols,
            2 * v + S,                      # u_j for the anchor rows
            4 * v + np.arange(v),           # s- slack of every sign row
            [n - 1],                        # ball slack
        ]).astype(int)
        B = self.M[:, basis]
        b = self.b0.copy()
        b[-1] = gamma
        try:
            body = np.linalg.solve(B, np.hstack([self.M, b[:, None]]))
        except np.linalg.LinAlgError:
            return None
        T = np.zeros((m + 1, n + 1))
        T[:m] = body
        cb = self.c[basis]
        T[m, :n] = self.c
        T[m, :] -= cb @ T[:m, :]
        rhs = T[:m, -1]
        rhs[(rhs < 0) & (rhs > -1e-9)] = 0.0
        if np.any(rhs < 0):
            return None
        return _Tableau(T, basis, n_enter=n)

    def solve_at(self, gamma: float) -> np.ndarray:
        """Cold solve at one gamma; returns psi."""
        tab = self._crash_tableau(gamma)
        if tab is None:
            b = self.b0.copy()
            b[-1] = gamma
            tab = _two_phase(self.M, b, self.c)
        else:
            tab.primal()
        self.tab = tab
        self.gamma = gamma
        return self._extract()

    def advance_to(self, gamma: float) -> np.ndarray:
        """Move the current optimal tableau to a larger gamma."""
        if self.tab is None:
            return self.solve_at(gamma)
        delta = gamma - self.gamma
        T = self.tab.T
        T[:, -1] += delta * T[:, self.n - 1]
        rhs = T[:self.m, -1]
        rhs[(rhs < 0) & (rhs > -_TOL_RHS)] = 0.0
        self.gamma = gamma
        try:
            if self.tab.dual(max_iter=50 * self.m):
                self.tab.primal()
                return self._extract()
        except (InfeasibleError, UnboundedError, NumericError):
            pass
        return self.solve_at(gamma)  # warm path failed; fall back to cold start

    def _extract(self) -> np.ndarray:
        x = self.tab.solution(2 * self.v)
        return x[:self.v] - x[self.v:]


def _combined_result(psi: np.ndarray, w: np.ndarray, A: np.ndarray,
                     r_k: np.ndarray, psi_s: np.ndarray, gamma: float) -> SolveResult:
    eq_res = float(np.max(np.abs(A.T @ psi - r_k), initial=0.0))
    ball_excess = max(0.0, float(np.sum(np.abs(psi - psi_s))) - gamma)
    return SolveResult(psi, float(w @ np.abs(psi)), max(eq_res, ball_excess), "optimal")


def solve_combined_path(A: np.ndarray, w_diag: np.ndarray, r_k: np.ndarray,
                        psi_s: np.ndarray, gammas) -> list[SolveResult]:
    """Solve the combined program for every gamma in one pass.

    gamma = 0 returns psi_s itself and any gamma at or beyond
    ||psi_d - psi_s||_1 returns the pure L1 solution psi_d, so only the
    radii strictly in between touch the big tableau; those are visited in
    ascending order with dual-pivot warm starts.
    """
    A, w, r = _check_shapes(A, w_diag, r_k)
    w = _floored(w)
    psi_s = np.asarray(psi_s, dtype=float)
    if psi_s.shape != (A.shape[0],):
        raise ValueError("psi_s length must match the number of design rows")
    pre_res = float(np.max(np.abs(A.T @ psi_s - r), initial=0.0))
    if pre_res > FEASIBILITY_TOL * (1.0 + float(np.max(np.abs(r), initial=0.0))):
        raise InfeasibleError("psi_s violates its own equality constraint")

    gammas = [float(g) for g in gammas]
    if any(g < 0 for g in gammas):
        raise ValueError("gamma must be >= 0")

    det = solve_l1_equality(A, w, r)
    psi_d = det.psi
    gamma_bar = float(np.sum(np.abs(psi_d - psi_s)))

    results: dict[int, SolveResult] = {}
    interior: list[tuple[float, int]] = []
    for i, g in enumerate(gammas):
        if g <= 0.0:
            results[i] = _combined_result(psi_s.copy(), w, A, r, psi_s, g)
        elif g >= gamma_bar - 1e-12:
            results[i] = _combined_result(psi_d.copy(), w, A, r, psi_s, g)
        else:
            interior.append((g, i))

    if interior:
        interior.sort()
        prog = _CombinedProgram(A, w, r, psi_s)
        prev_psi = None
        prev_g = None
        for g, i in interior:
            if prev_g is not None and g == prev_g:
                psi = prev_psi
            elif prev_g is None:
                psi = prog.solve_at(g)
            else:
                psi = prog.advance_to(g)
            res = _combined_result(psi, w, A, r, psi_s, g)
            if res.constraint_residual_inf > FEASIBILITY_TOL:
                psi = prog.solve_at(g)  # drift guard: refactorize
                res = _combined_result(psi, w, A, r, psi_s, g)
            results[i] = res
            prev_psi, prev_g = psi, g

    return [results[i] for i in range(len(gammas))]


def solve_combined(A: np.ndarray, w_diag: np.ndarray, r_k: np.ndarray,
                   psi_s: np.ndarray, gamma: float) -> SolveResult:
    """Minimize ||W psi||_1 s.t. A^T psi = r_k and ||psi - psi_s||_1 <= gamma."""
    return solve_combined_path(A, w_diag, r_k, psi_s, [gamma])[0]
