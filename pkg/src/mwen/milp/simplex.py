"""Bounded-variable primal simplex.

Rows are converted to ``A x - s = 0`` with one logical variable ``s_i`` per row
carrying the row's range as bounds, so the initial basis is ``-I``. Every
variable then has simple bounds and the method works on a single bound
vector. Infeasible starts (cold or after a bound change during branching) are
repaired by a composite phase 1 that minimizes the sum of bound violations of
the basic variables, with a breakpoint ("long-step") ratio test.

The basis inverse is held as a sparse LU factorization plus a product-form eta
file, refactored every ``REFACTOR_EVERY`` pivots. Rows are scaled by the
geometric mean of their extreme coefficients before anything else; primal
tolerances on the logicals are divided by the row scale so that a tolerance
means the same thing on the unscaled rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .problem import ProblemArrays

BASIC, AT_LOWER, AT_UPPER, AT_ZERO = 0, 1, 2, 3

REFACTOR_EVERY = 64
DEGENERATE_SWITCH = 40  # consecutive zero steps before Bland's rule kicks in
PIVOT_TOL = 1e-9
DUAL_TOL = 1e-9


@dataclass(frozen=True)
class Basis:
    head: np.ndarray   # basic variable per row, int32[m]
    state: np.ndarray  # per-variable state, int8[n + m]


@dataclass
class LpResult:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: np.ndarray | None
    objective: float
    basis: Basis | None
    iterations: int


class _Factor:
    """LU of the basis matrix followed by eta updates."""

    def __init__(self, B: sp.csc_matrix):
        self.lu = splu(B, permc_spec="COLAMD", options={"SymmetricMode": False})
        self.etas: list[tuple[int, np.ndarray, np.ndarray, float]] = []

    def ftran(self, v: np.ndarray) -> np.ndarray:
        x = self.lu.solve(v)
        for r, idx, vals, piv in self.etas:
            xr = x[r] / piv
            if xr != 0.0:
                x[idx] -= xr * vals
            x[r] = xr
        return x

    def btran(self, w: np.ndarray) -> np.ndarray:
        w = w.copy()
        for r, idx, vals, piv in reversed(self.etas):
            w[r] = (w[r] - vals @ w[idx]) / piv
        return self.lu.solve(w, trans="T")

    def update(self, r: int, alpha: np.ndarray) -> None:
        nz = np.flatnonzero(np.abs(alpha) > 1e-14)
        nz = nz[nz != r]
        self.etas.append((r, nz, alpha[nz].copy(), alpha[r]))


class SimplexEngine:
    """Reusable LP engine for one constraint matrix; bounds vary per solve."""

    def __init__(self, arrays: ProblemArrays, feasibility_tol: float = 1e-7):
        A = arrays.A.tocsr()
        m, n = A.shape
        self.m, self.n = m, n
        absA = abs(A)
        scale = np.ones(m)
        for i in range(m):
            start, end = absA.indptr[i], absA.indptr[i + 1]
            if end > start:
                row = absA.data[start:end]
                row = row[row > 0]
                if row.size:
                    scale[i] = 1.0 / math.sqrt(row.max() * row.min())
        self.row_scale = scale
        As = sp.diags(scale) @ A
        self.A = As.tocsc()
        self.AT = self.A.T.tocsr()
        self.full = sp.hstack([self.A, -sp.identity(m, format="csc")], format="csc")
        self.c = np.concatenate([arrays.c, np.zeros(m)])
        self.constant = arrays.constant
        self.row_lo = arrays.row_lo * scale
        self.row_hi = arrays.row_hi * scale
        base_tol = feasibility_tol * 0.1
        self.tol = np.concatenate([np.full(n, base_tol), base_tol * scale])

    # -- helpers ---------------------------------------------------------
    def _column(self, j: int) -> np.ndarray:
        col = np.zeros(self.m)
        if j >= self.n:
            col[j - self.n] = -1.0
            return col
        a, b = self.A.indptr[j], self.A.indptr[j + 1]
        col[self.A.indices[a:b]] = self.A.data[a:b]
        return col

    def _factor(self, head: np.ndarray) -> _Factor:
        return _Factor(self.full[:, head].tocsc())

    def _basic_values(self, factor: _Factor, z: np.ndarray, head: np.ndarray) -> np.ndarray:
        zz = z.copy()
        zz[head] = 0.0
        rhs = -(self.A @ zz[: self.n] - zz[self.n:])
        return factor.ftran(rhs)

    def initial_basis(self, lower: np.ndarray, upper: np.ndarray) -> Basis:
        n, m = self.n, self.m
        state = np.empty(n + m, dtype=np.int8)
        state[:n] = np.where(
            np.isfinite(lower[:n]), AT_LOWER, np.where(np.isfinite(upper[:n]), AT_UPPER, AT_ZERO)
        )
        state[n:] = BASIC
        return Basis(np.arange(n, n + m, dtype=np.int32), state)

    # -- main loop -------------------------------------------------------
    def solve(self, lb: np.ndarray, ub: np.ndarray, basis: Basis | None = None,
              iteration_limit: int = 1_000_000) -> LpResult:
        n, m = self.n, self.m
        lower = np.concatenate([lb, self.row_lo])
        upper = np.concatenate([ub, self.row_hi])
        if np.any(lower > upper + self.tol):
            return LpResult("infeasible", None, math.nan, None, 0)
        if basis is None:
            basis = self.initial_basis(lower, upper)
        head = basis.head.copy()
        state = basis.state.copy()
        self._fix_states(state, lower, upper)

        z = np.where(state == AT_LOWER, lower, np.where(state == AT_UPPER, upper, 0.0))
        try:
            factor = self._factor(head)
        except RuntimeError:
            head, state = self._reset(state, lower, upper)
            z = np.where(state == AT_LOWER, lower, np.where(state == AT_UPPER, upper, 0.0))
            factor = self._factor(head)
        z[head] = self._basic_values(factor, z, head)

        tol = self.tol
        movable = upper > lower
        degenerate_run = 0
        bland = False
        confirmed = False
        it = 0
        while it < iteration_limit:
            zB = z[head]
            loB, upB, tolB = lower[head], upper[head], tol[head]
            below = zB < loB - tolB
            above = zB > upB + tolB
            phase1 = bool(below.any() or above.any())
            if phase1:
                cB = below * -1.0 + above * 1.0
                y = factor.btran(cB)
                d = np.concatenate([-(self.AT @ y), y])
            else:
                y = factor.btran(self.c[head])
                d = self.c - np.concatenate([self.AT @ y, -y])

            eligible = (
                ((state == AT_LOWER) & (d < -DUAL_TOL))
                | ((state == AT_UPPER) & (d > DUAL_TOL))
                | ((state == AT_ZERO) & (np.abs(d) > DUAL_TOL))
            ) & movable
            cand = np.flatnonzero(eligible)
            if cand.size == 0:
                if factor.etas and not confirmed:
                    # re-derive basic values on a fresh factorization before a verdict
                    factor = self._factor(head)
                    z[head] = self._basic_values(factor, z, head)
                    confirmed = True
                    continue
                if phase1:
                    return LpResult("infeasible", None, math.nan, Basis(head, state), it)
                x = z[:n].copy()
                obj = float(self.c[:n] @ x) + self.constant
                return LpResult("optimal", x, obj, Basis(head, state), it)
            confirmed = False

            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            dq = d[q]
            direction = 1.0 if dq < 0 else -1.0
            alpha = factor.ftran(self._column(q))
            delta = -direction * alpha  # rate of change of basic values per unit step

            theta, r, leave_at = self._ratio_test(
                delta, zB, loB, upB, tolB, below, above, phase1, abs(dq), bland, head
            )
            own_range = upper[q] - lower[q]
            flip = own_range <= theta
            if flip:
                theta = own_range
            if not math.isfinite(theta):
                if phase1:
                    # cannot happen with finite violated bounds; guard anyway
                    return LpResult("infeasible", None, math.nan, Basis(head, state), it)
                return LpResult("unbounded", None, -math.inf, Basis(head, state), it)

            it += 1
            if theta <= 1e-12:
                degenerate_run += 1
                if degenerate_run > DEGENERATE_SWITCH:
                    bland = True
            else:
                degenerate_run = 0
                bland = False

            z[q] += direction * theta
            z[head] += theta * delta
            if flip:
                state[q] = AT_UPPER if direction > 0 else AT_LOWER
                z[q] = upper[q] if direction > 0 else lower[q]
                continue
            p = head[r]
            if leave_at == AT_LOWER or lower[p] == upper[p]:
                z[p] = lower[p]
                state[p] = AT_LOWER
            else:
                z[p] = upper[p]
                state[p] = AT_UPPER
            head[r] = q
            state[q] = BASIC
            if len(factor.etas) >= REFACTOR_EVERY or abs(alpha[r]) < 1e-7:
                try:
                    factor = self._factor(head)
                except RuntimeError:
                    head, state = self._reset(state, lower, upper)
                    z = np.where(state == AT_LOWER, lower, np.where(state == AT_UPPER, upper, 0.0))
                    factor = self._factor(head)
                z[head] = self._basic_values(factor, z, head)
            else:
                factor.update(r, alpha)
        return LpResult("iteration-limit", None, math.nan, Basis(head, state), it)

    def _ratio_test(self, delta, zB, loB, upB, tolB, below, above, phase1, slope0, bland, head):
        """Return (step, leaving row, bound the leaving variable lands on)."""
        big = np.abs(delta) > PIVOT_TOL
        dec = big & (delta < 0)
        inc = big & (delta > 0)
        # hard limits: feasible variables keep their bounds; infeasible ones the far bound
        # a variable already past a bound and moving further out has no limit
        lim_lo = dec & ~below & np.isfinite(loB)
        lim_up = inc & ~above & np.isfinite(upB)

        ratios_relaxed = np.full(delta.size, np.inf)
        exact = np.full(delta.size, np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            i = np.flatnonzero(lim_lo)
            ratios_relaxed[i] = (zB[i] - loB[i] + tolB[i]) / -delta[i]
            exact[i] = (zB[i] - loB[i]) / -delta[i]
            j = np.flatnonzero(lim_up)
            ratios_relaxed[j] = (upB[j] - zB[j] + tolB[j]) / delta[j]
            exact[j] = (upB[j] - zB[j]) / delta[j]
        exact = np.maximum(exact, 0.0)
        theta_max = ratios_relaxed.min() if ratios_relaxed.size else np.inf

        if phase1:
            # breakpoints where an infeasible basic reaches its violated bound
            bp_idx = np.flatnonzero((below & inc) | (above & dec))
            if bp_idx.size:
                bp = np.where(below[bp_idx], (loB[bp_idx] - zB[bp_idx]) / delta[bp_idx],
                              (upB[bp_idx] - zB[bp_idx]) / delta[bp_idx])
                keep = bp <= theta_max
                bp_idx, bp = bp_idx[keep], bp[keep]
                order = np.lexsort((bp_idx, bp))
                slope = -slope0
                for pos, k in enumerate(order):
                    slope += abs(delta[bp_idx[k]])
                    last = pos == order.size - 1
                    if slope >= -DUAL_TOL or (last and not math.isfinite(theta_max)):
                        row = int(bp_idx[k])
                        return float(bp[k]), row, AT_LOWER if below[row] else AT_UPPER
        if not math.isfinite(theta_max):
            return math.inf, -1, AT_LOWER
        cands = np.flatnonzero(exact <= theta_max)
        if cands.size == 0:
            cands = np.array([int(np.argmin(ratios_relaxed))])
        if bland:
            best = exact[cands].min()
            tied = cands[exact[cands] <= best + 1e-12]
            r = int(tied[np.argmin(head[tied])])
        else:
            r = int(cands[np.argmax(np.abs(delta[cands]))])
        leave_at = AT_LOWER if delta[r] < 0 else AT_UPPER
        return float(exact[r]), r, leave_at

    def _fix_states(self, state, lower, upper):
        """Make nonbasic states consistent with (possibly changed) bounds."""
        nb = state != BASIC
        at_lo_bad = nb & (state == AT_LOWER) & ~np.isfinite(lower)
        state[at_lo_bad] = np.where(np.isfinite(upper[at_lo_bad]), AT_UPPER, AT_ZERO)
        at_up_bad = nb & (state == AT_UPPER) & ~np.isfinite(upper)
        state[at_up_bad] = np.where(np.isfinite(lower[at_up_bad]), AT_LOWER, AT_ZERO)
        zero_bad = nb & (state == AT_ZERO) & (np.isfinite(lower) | np.isfinite(upper))
        state[zero_bad] = np.where(np.isfinite(lower[zero_bad]), AT_LOWER, AT_UPPER)

    def _reset(self, state, lower, upper):
        basis = self.initial_basis(lower, upper)
        return basis.head.copy(), basis.state.copy()


def solve_arrays(arrays: ProblemArrays, feasibility_tol: float = 1e-7,
                 iteration_limit: int = 1_000_000) -> LpResult:
    engine = SimplexEngine(arrays, feasibility_tol)
    return engine.solve(arrays.lb, arrays.ub, iteration_limit=iteration_limit)
