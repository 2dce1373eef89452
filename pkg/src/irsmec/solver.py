"""Dense convex-programming substrate: LPs and SOCPs in one canonical form.

A single primal-dual path-following interior-point method (Nesterov-Todd
scaling, Mehrotra predictor-corrector) handles both problem classes; an LP
is simply a cone problem whose cone is the nonnegative orthant.  Problems
are converted to the internal form

    minimize    c'x
    subject to  A x = b,   G x + s = h,   s in K,

with K a product of a nonnegative orthant and second-order cones.
Infeasibility and unboundedness are declared from approximate Farkas
certificates built out of the diverging iterates (no homogeneous self-dual
embedding); an iterate that stalls before reaching tolerance yields status
``iteration-limit``.

All linear algebra is dense; intended problem sizes are a few hundred
variables and rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "SocBlock",
    "ConeProblem",
    "Solution",
    "KktResiduals",
    "solve_lp",
    "solve_socp",
    "check_kkt",
]

_MAX_ITER = 100
_STEP_FRACTION = 0.99
_REG = 1e-11


@dataclass(frozen=True)
class SocBlock:
    """Second-order cone constraint ``||a_rows @ x + a_offset|| <= c_row @ x + d_offset``."""

    a_rows: np.ndarray
    a_offset: np.ndarray
    c_row: np.ndarray
    d_offset: float

    def __post_init__(self):
        object.__setattr__(self, "a_rows", np.atleast_2d(np.asarray(self.a_rows, float)))
        object.__setattr__(self, "a_offset", np.asarray(self.a_offset, float).reshape(-1))
        object.__setattr__(self, "c_row", np.asarray(self.c_row, float).reshape(-1))
        if self.a_rows.shape[0] < 1:
            raise ValueError("SOC block needs at least one norm row (cone dimension >= 2)")
        if self.a_rows.shape[0] != self.a_offset.size:
            raise ValueError("a_rows and a_offset disagree on the norm dimension")

    @property
    def dim(self) -> int:
        """Cone dimension (norm rows plus the scalar bound row)."""
        return self.a_rows.shape[0] + 1


@dataclass
class ConeProblem:
    """Canonical minimization problem consumed by :func:`solve_lp` / :func:`solve_socp`."""

    objective: np.ndarray
    eq_rows: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None
    ineq_rows: np.ndarray | None = None
    ineq_rhs: np.ndarray | None = None
    soc_blocks: list[SocBlock] = field(default_factory=list)
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, float).reshape(-1)
        n = self.objective.size
        if self.eq_rows is None or np.size(self.eq_rows) == 0:
            self.eq_rows = np.zeros((0, n))
            self.eq_rhs = np.zeros(0)
        else:
            self.eq_rows = np.atleast_2d(np.asarray(self.eq_rows, float))
            self.eq_rhs = np.asarray(self.eq_rhs, float).reshape(-1)
        if self.ineq_rows is None or np.size(self.ineq_rows) == 0:
            self.ineq_rows = np.zeros((0, n))
            self.ineq_rhs = np.zeros(0)
        else:
            self.ineq_rows = np.atleast_2d(np.asarray(self.ineq_rows, float))
            self.ineq_rhs = np.asarray(self.ineq_rhs, float).reshape(-1)
        self.validate()

    @property
    def n_vars(self) -> int:
        return self.objective.size

    def validate(self):
        n = self.n_vars
        if self.eq_rows.shape != (self.eq_rhs.size, n):
            raise ValueError("equality rows/rhs dimensions disagree")
        if self.ineq_rows.shape != (self.ineq_rhs.size, n):
            raise ValueError("inequality rows/rhs dimensions disagree")
        for blk in self.soc_blocks:
            if blk.a_rows.shape[1] != n or blk.c_row.size != n:
                raise ValueError("SOC block has wrong variable dimension")
        for bound in (self.lower, self.upper):
            if bound is not None and np.asarray(bound).size != n:
                raise ValueError("variable bounds have wrong dimension")

    def dump(self) -> str:
        """Plain-text canonical form for offline inspection."""
        def fmt(a):
            return " ".join(f"{v:.17g}" for v in np.atleast_1d(a))

        lines = [f"ConeProblem n_vars={self.n_vars}"]
        lines.append(f"minimize {fmt(self.objective)}")
        lines.append(f"eq {self.eq_rhs.size}")
        for row, rhs in zip(self.eq_rows, self.eq_rhs):
            lines.append(f"  {fmt(row)} == {rhs:.17g}")
        lines.append(f"ineq {self.ineq_rhs.size}")
        for row, rhs in zip(self.ineq_rows, self.ineq_rhs):
            lines.append(f"  {fmt(row)} <= {rhs:.17g}")
        if self.lower is not None:
            lines.append(f"lower {fmt(self.lower)}")
        if self.upper is not None:
            lines.append(f"upper {fmt(self.upper)}")
        lines.append(f"soc {len(self.soc_blocks)}")
        for blk in self.soc_blocks:
            lines.append(f"  block dim={blk.dim}")
            lines.append(f"    c {fmt(blk.c_row)} + {blk.d_offset:.17g}")
            for row, off in zip(blk.a_rows, blk.a_offset):
                lines.append(f"    a {fmt(row)} + {off:.17g}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class KktResiduals:
    stationarity: float
    primal: float
    complementarity: float

    def max(self) -> float:
        return max(self.stationarity, self.primal, self.complementarity)


@dataclass(frozen=True)
class Solution:
    status: str  # optimal | infeasible | unbounded | iteration-limit
    x: np.ndarray
    objective: float
    dual_objective: float
    eq_duals: np.ndarray
    ineq_duals: np.ndarray          # user inequality rows only
    lower_duals: np.ndarray | None
    upper_duals: np.ndarray | None
    soc_duals: list[np.ndarray]
    kkt_residuals: KktResiduals
    iterations: int


# --------------------------------------------------------------------------
# cone utilities: vectors live stacked as [orthant (l,), soc block 0, ...]


class _Cone:
    """Product cone R_+^l x Q_{d1} x ... with block slicing helpers."""

    def __init__(self, l: int, soc_dims: list[int]):
        self.l = l
        self.soc_dims = list(soc_dims)
        self.dim = l + sum(soc_dims)
        self.degree = l + len(soc_dims)
        self.slices = []
        start = l
        for d in soc_dims:
            self.slices.append(slice(start, start + d))
            start += d

    def identity(self) -> np.ndarray:
        e = np.zeros(self.dim)
        e[: self.l] = 1.0
        for sl in self.slices:
            e[sl.start] = 1.0
        return e

    def margin(self, u: np.ndarray) -> float:
        """Distance to the cone boundary (negative outside)."""
        vals = []
        if self.l:
            vals.append(np.min(u[: self.l]))
        for sl in self.slices:
            blk = u[sl]
            vals.append(blk[0] - np.linalg.norm(blk[1:]))
        return min(vals) if vals else np.inf

    def shift_interior(self, u: np.ndarray) -> np.ndarray:
        """Push a point strictly inside the cone (blockwise shift along e)."""
        out = u.copy()
        if self.l:
            m = np.min(out[: self.l]) if self.l else np.inf
            if m < 1e-8:
                out[: self.l] += 1.0 - m
        for sl in self.slices:
            blk = out[sl]
            m = blk[0] - np.linalg.norm(blk[1:])
            if m < 1e-8:
                out[sl.start] += 1.0 - m
        return out

    def jordan(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        out = np.empty(self.dim)
        out[: self.l] = u[: self.l] * v[: self.l]
        for sl in self.slices:
            ub, vb = u[sl], v[sl]
            out[sl.start] = ub @ vb
            out[sl.start + 1 : sl.stop] = ub[0] * vb[1:] + vb[0] * ub[1:]
        return out

    def jordan_solve(self, lam: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Solve lam o u = v for u."""
        out = np.empty(self.dim)
        out[: self.l] = v[: self.l] / lam[: self.l]
        for sl in self.slices:
            lb, vb = lam[sl], v[sl]
            l0, l1 = lb[0], lb[1:]
            det = l0 * l0 - l1 @ l1
            u0 = (l0 * vb[0] - l1 @ vb[1:]) / det
            out[sl.start] = u0
            out[sl.start + 1 : sl.stop] = (vb[1:] - u0 * l1) / l0
        return out

    def max_step(self, u: np.ndarray, du: np.ndarray) -> float:
        """sup { a >= 0 : u + a*du in K } for interior u."""
        best = np.inf
        if self.l:
            neg = du[: self.l] < 0
            if np.any(neg):
                best = float(np.min(-u[: self.l][neg] / du[: self.l][neg]))
        for sl in self.slices:
            ub, db = u[sl], du[sl]
            # margin g(a) = (u0 + a d0) - ||u1 + a d1|| is concave with g(0) > 0;
            # the first positive root of the associated quadratic is the blocker
            aa = db[0] ** 2 - db[1:] @ db[1:]
            bb = 2.0 * (ub[0] * db[0] - ub[1:] @ db[1:])
            cc = ub[0] ** 2 - ub[1:] @ ub[1:]
            roots = []
            if abs(aa) > 1e-300:
                disc = bb * bb - 4.0 * aa * cc
                if disc >= 0:
                    sq = np.sqrt(disc)
                    roots.extend([(-bb - sq) / (2 * aa), (-bb + sq) / (2 * aa)])
            elif abs(bb) > 1e-300:
                roots.append(-cc / bb)
            cand = [
                r
                for r in roots
                if r > 0 and ub[0] + r * db[0] >= -1e-12 * (abs(ub[0]) + 1)
            ]
            if cand:
                best = min(best, min(cand))
        return best

    def nt_scaling(self, s: np.ndarray, z: np.ndarray):
        """Dense NT scaling blocks: returns (W, W2, lam) with W z = W^-1 s = lam."""
        w_diag = np.sqrt(s[: self.l] / z[: self.l]) if self.l else np.zeros(0)
        lam = np.empty(self.dim)
        lam[: self.l] = np.sqrt(s[: self.l] * z[: self.l])
        soc_W = []
        soc_W2 = []
        for sl in self.slices:
            sb, zb = s[sl], z[sl]
            a_s = np.sqrt(sb[0] ** 2 - sb[1:] @ sb[1:])
            a_z = np.sqrt(zb[0] ** 2 - zb[1:] @ zb[1:])
            sbar = sb / a_s
            zbar = zb / a_z
            gamma = np.sqrt((1.0 + sbar @ zbar) / 2.0)
            wbar = (sbar + _soc_J(zbar)) / (2.0 * gamma)
            eta = a_s / a_z
            d = sl.stop - sl.start
            # symmetric square root of P(wbar) = 2*wbar*wbar' - J
            Wbar = np.empty((d, d))
            w0, w1 = wbar[0], wbar[1:]
            Wbar[0, 0] = w0
            Wbar[0, 1:] = w1
            Wbar[1:, 0] = w1
            Wbar[1:, 1:] = np.eye(d - 1) + np.outer(w1, w1) / (1.0 + w0)
            Wb = np.sqrt(eta) * Wbar
            W2b = eta * (2.0 * np.outer(wbar, wbar) - _soc_Jmat(d))
            soc_W.append(Wb)
            soc_W2.append(W2b)
            lam[sl] = Wb @ zb
        return _Scaling(self, w_diag, soc_W, soc_W2), lam


def _soc_J(u: np.ndarray) -> np.ndarray:
    out = u.copy()
    out[1:] = -out[1:]
    return out


def _soc_Jmat(d: int) -> np.ndarray:
    j = -np.eye(d)
    j[0, 0] = 1.0
    return j


class _Scaling:
    """Blockwise NT scaling W (symmetric) with matvec helpers."""

    def __init__(self, cone: _Cone, w_diag, soc_W, soc_W2):
        self.cone = cone
        self.w_diag = w_diag
        self.soc_W = soc_W
        self.soc_W2 = soc_W2

    def mul_W(self, u: np.ndarray) -> np.ndarray:
        out = np.empty(self.cone.dim)
        out[: self.cone.l] = self.w_diag * u[: self.cone.l]
        for Wb, sl in zip(self.soc_W, self.cone.slices):
            out[sl] = Wb @ u[sl]
        return out

    def w2_matrix(self) -> np.ndarray:
        m = np.zeros((self.cone.dim, self.cone.dim))
        if self.cone.l:
            m[: self.cone.l, : self.cone.l] = np.diag(self.w_diag**2)
        for W2b, sl in zip(self.soc_W2, self.cone.slices):
            m[sl, sl] = W2b
        return m


# --------------------------------------------------------------------------
# internal form assembly


class _Internal:
    """Scaled internal data plus the unscaled copy used for reporting."""

    def __init__(self, p: ConeProblem):
        n = p.n_vars
        lower = None if p.lower is None else np.asarray(p.lower, float).reshape(-1)
        upper = None if p.upper is None else np.asarray(p.upper, float).reshape(-1)
        self.lb_idx = (
            np.where(np.isfinite(lower))[0] if lower is not None else np.zeros(0, int)
        )
        self.ub_idx = (
            np.where(np.isfinite(upper))[0] if upper is not None else np.zeros(0, int)
        )
        g_rows = [p.ineq_rows]
        h_parts = [p.ineq_rhs]
        if self.lb_idx.size:
            rows = np.zeros((self.lb_idx.size, n))
            rows[np.arange(self.lb_idx.size), self.lb_idx] = -1.0
            g_rows.append(rows)
            h_parts.append(-lower[self.lb_idx])
        if self.ub_idx.size:
            rows = np.zeros((self.ub_idx.size, n))
            rows[np.arange(self.ub_idx.size), self.ub_idx] = 1.0
            g_rows.append(rows)
            h_parts.append(upper[self.ub_idx])
        soc_dims = [blk.dim for blk in p.soc_blocks]
        for blk in p.soc_blocks:
            g_rows.append(np.vstack([-blk.c_row[None, :], -blk.a_rows]))
            h_parts.append(np.concatenate([[blk.d_offset], blk.a_offset]))
        self.n = n
        self.n_user_ineq = p.ineq_rhs.size
        self.G0 = np.vstack(g_rows) if g_rows else np.zeros((0, n))
        self.h0 = np.concatenate(h_parts) if h_parts else np.zeros(0)
        self.A0 = p.eq_rows
        self.b0 = p.eq_rhs
        self.c0 = p.objective
        self.l = self.G0.shape[0] - sum(soc_dims)
        self.cone = _Cone(self.l, soc_dims)
        if self.cone.dim == 0:
            raise ValueError(
                "problem has no inequalities, bounds, or cones; nothing for the "
                "interior-point method to follow"
            )

        # equilibration: per-row scaling for linear rows, per-block scalar for
        # cones, global scalar for the objective
        self.c_scale = max(np.max(np.abs(self.c0)), 1e-12)
        self.row_scale = np.ones(self.cone.dim)
        for i in range(self.l):
            self.row_scale[i] = max(np.max(np.abs(self.G0[i])), abs(self.h0[i]), 1e-12)
        for sl in self.cone.slices:
            s = max(np.max(np.abs(self.G0[sl])), np.max(np.abs(self.h0[sl])), 1e-12)
            self.row_scale[sl] = s
        self.eq_scale = np.ones(self.b0.size)
        for i in range(self.b0.size):
            self.eq_scale[i] = max(np.max(np.abs(self.A0[i])), abs(self.b0[i]), 1e-12)
        self.c = self.c0 / self.c_scale
        self.G = self.G0 / self.row_scale[:, None]
        self.h = self.h0 / self.row_scale
        self.A = self.A0 / self.eq_scale[:, None] if self.b0.size else self.A0
        self.b = self.b0 / self.eq_scale if self.b0.size else self.b0


def _kkt_solve_factory(A, G, W2):
    """Factor the symmetric KKT matrix; returns a solver with one refinement."""
    n = G.shape[1]
    p = A.shape[0]
    m = G.shape[0]
    dim = n + p + m
    K = np.zeros((dim, dim))
    K[:n, n : n + p] = A.T
    K[n : n + p, :n] = A
    K[:n, n + p :] = G.T
    K[n + p :, :n] = G
    K[n + p :, n + p :] = -W2
    Kreg = K.copy()
    Kreg[:n, :n] += _REG * np.eye(n)
    idx = np.arange(n, dim)
    Kreg[idx, idx] -= _REG
    lu = scipy.linalg.lu_factor(Kreg)

    def solve(rhs):
        sol = scipy.linalg.lu_solve(lu, rhs)
        # one refinement step against the unregularized matrix
        resid = rhs - K @ sol
        sol += scipy.linalg.lu_solve(lu, resid)
        return sol

    return solve


def _solve_cone(problem: ConeProblem, tol: float, x0: np.ndarray | None = None) -> Solution:
    data = _Internal(problem)
    cone, A, b, G, h, c = data.cone, data.A, data.b, data.G, data.h, data.c
    n, p, m = data.n, b.size, cone.dim

    # initial point: least-squares primal/dual estimates shifted into the cone
    solve0 = _kkt_solve_factory(A, G, np.eye(m))
    rhs = np.concatenate([np.zeros(n), b, h])
    sol = solve0(rhs)
    x = x0.astype(float).copy() if x0 is not None else sol[:n]
    s = cone.shift_interior(h - G @ x)
    rhs = np.concatenate([-c, np.zeros(p), np.zeros(m)])
    sol = solve0(rhs)
    y = sol[n : n + p]
    z = cone.shift_interior(sol[n + p :])

    best = None
    status = "iteration-limit"
    iters = 0
    for it in range(1, _MAX_ITER + 1):
        iters = it
        rx = c + A.T @ y + G.T @ z
        ry = A @ x - b
        rz = G @ x + s - h
        pcost = c @ x
        dcost = -b @ y - h @ z
        gap = s @ z
        mu = gap / cone.degree
        pres = max(
            np.linalg.norm(ry) / max(1.0, np.linalg.norm(b)),
            np.linalg.norm(rz) / max(1.0, np.linalg.norm(h)),
        )
        dres = np.linalg.norm(rx) / max(1.0, np.linalg.norm(c))
        relgap = gap / max(1.0, abs(pcost), abs(dcost))
        score = max(pres, dres, relgap)
        if best is None or score < best[0]:
            best = (score, x.copy(), y.copy(), z.copy(), s.copy())
        if pres <= tol and dres <= tol and relgap <= tol:
            status = "optimal"
            break

        # Farkas certificates from diverging multipliers / primal rays; only
        # consulted while the matching residual is clearly unconverged
        verdict = _certificates(cone, A, b, G, h, c, x, y, z, pres, dres, tol)
        if verdict is not None:
            status = verdict
            break

        scaling, lam = cone.nt_scaling(s, z)
        kkt = _kkt_solve_factory(A, G, scaling.w2_matrix())

        # predictor (affine) direction
        rhs = np.concatenate([-rx, -ry, -rz + s])
        sol = kkt(rhs)
        dx, dy, dz = sol[:n], sol[n : n + p], sol[n + p :]
        ds = -rz - G @ dx
        alpha_aff = min(
            1.0, cone.max_step(s, ds), cone.max_step(z, dz)
        )
        mu_aff = ((s + alpha_aff * ds) @ (z + alpha_aff * dz)) / cone.degree
        sigma = float(np.clip((mu_aff / mu) ** 3, 0.0, 1.0))

        # corrector with Mehrotra second-order term
        corr = cone.jordan(
            scaling.mul_W(dz), _apply_Winv(scaling, cone, ds)
        )
        d_comp = sigma * mu * cone.identity() - cone.jordan(lam, lam) - corr
        rhs = np.concatenate([-rx, -ry, -rz - scaling.mul_W(cone.jordan_solve(lam, d_comp))])
        sol = kkt(rhs)
        dx, dy, dz = sol[:n], sol[n : n + p], sol[n + p :]
        ds = -rz - G @ dx
        alpha = min(1.0, _STEP_FRACTION * cone.max_step(s, ds), _STEP_FRACTION * cone.max_step(z, dz))
        if not np.isfinite(alpha) or alpha <= 1e-14:
            break
        x += alpha * dx
        y += alpha * dy
        z += alpha * dz
        s += alpha * ds

    if status == "iteration-limit":
        # a stalled run may still carry a clean certificate
        rx = c + A.T @ y + G.T @ z
        ry = A @ x - b
        rz = G @ x + s - h
        pres = max(
            np.linalg.norm(ry) / max(1.0, np.linalg.norm(b)),
            np.linalg.norm(rz) / max(1.0, np.linalg.norm(h)),
        )
        dres = np.linalg.norm(rx) / max(1.0, np.linalg.norm(c))
        verdict = _certificates(cone, A, b, G, h, c, x, y, z, pres, dres, tol)
        if verdict is not None:
            status = verdict
        elif best is not None:
            _, x, y, z, s = best
    return _finish(problem, data, status, x, y, z, iters)


def _certificates(cone, A, b, G, h, c, x, y, z, pres, dres, tol):
    """Approximate Farkas certificates; None when neither applies."""
    cert_tol = max(100.0 * tol, 1e-6)
    hz_by = h @ z + b @ y
    if hz_by < -tol and pres > 100 * tol:
        zc, yc = z / -hz_by, y / -hz_by
        if (
            np.linalg.norm(A.T @ yc + G.T @ zc) <= cert_tol
            and cone.margin(zc) >= -cert_tol
        ):
            return "infeasible"
    pcost = c @ x
    if pcost < -tol and dres > 100 * tol and np.linalg.norm(x) > 0:
        # primal ray: A xc ~ 0, -G xc in K, c'xc = -1
        xc = x / -pcost
        sc = -(G @ xc)
        if np.linalg.norm(A @ xc) <= cert_tol and cone.margin(sc) >= -cert_tol:
            return "unbounded"
    return None


def _apply_Winv(scaling: _Scaling, cone: _Cone, u: np.ndarray) -> np.ndarray:
    out = np.empty(cone.dim)
    out[: cone.l] = u[: cone.l] / scaling.w_diag if cone.l else u[: cone.l]
    for Wb, sl in zip(scaling.soc_W, cone.slices):
        out[sl] = np.linalg.solve(Wb, u[sl])
    return out


def _finish(problem, data, status, x, y, z, iters) -> Solution:
    # unscale into original units
    z0 = z * data.c_scale / data.row_scale
    y0 = (y * data.c_scale / data.eq_scale) if data.b0.size else y * data.c_scale
    n_in = data.n_user_ineq
    pos = n_in
    lower_duals = upper_duals = None
    if data.lb_idx.size:
        lower_duals = np.zeros(data.n)
        lower_duals[data.lb_idx] = z0[pos : pos + data.lb_idx.size]
        pos += data.lb_idx.size
    if data.ub_idx.size:
        upper_duals = np.zeros(data.n)
        upper_duals[data.ub_idx] = z0[pos : pos + data.ub_idx.size]
        pos += data.ub_idx.size
    soc_duals = [z0[sl] for sl in data.cone.slices]
    objective = float(data.c0 @ x)
    dual_objective = float(-data.b0 @ y0 - data.h0 @ z0)
    sol = Solution(
        status=status,
        x=x.copy(),
        objective=objective,
        dual_objective=dual_objective,
        eq_duals=y0,
        ineq_duals=z0[:n_in],
        lower_duals=lower_duals,
        upper_duals=upper_duals,
        soc_duals=soc_duals,
        kkt_residuals=KktResiduals(np.inf, np.inf, np.inf),
        iterations=iters,
    )
    if status in ("optimal", "iteration-limit"):
        res = check_kkt(problem, sol)
        sol = Solution(**{**sol.__dict__, "kkt_residuals": res})
    return sol


def solve_lp(problem: ConeProblem, tol: float = 1e-8) -> Solution:
    """Solve a pure linear program (the problem must carry no SOC blocks)."""
    if problem.soc_blocks:
        raise ValueError("solve_lp requires a problem without SOC blocks")
    return _solve_cone(problem, tol)


def solve_socp(problem: ConeProblem, tol: float = 1e-7, x0: np.ndarray | None = None) -> Solution:
    """Solve a second-order cone program (LPs are accepted as the no-cone case)."""
    return _solve_cone(problem, tol, x0=x0)


def check_kkt(problem: ConeProblem, sol: Solution) -> KktResiduals:
    """Recompute stationarity / primal feasibility / complementarity residuals.

    Works from the original (unscaled) problem data.  Dual-cone violations
    are folded into the stationarity figure.
    """
    x = sol.x
    c = problem.objective
    grad = c.copy()
    primal_viol = 0.0
    comp = 0.0
    if problem.eq_rhs.size:
        grad += problem.eq_rows.T @ sol.eq_duals
        primal_viol = max(
            primal_viol,
            float(np.max(np.abs(problem.eq_rows @ x - problem.eq_rhs) / (1.0 + np.abs(problem.eq_rhs)))),
        )
    dual_viol = 0.0
    if problem.ineq_rhs.size:
        slack = problem.ineq_rhs - problem.ineq_rows @ x
        grad += problem.ineq_rows.T @ sol.ineq_duals
        primal_viol = max(
            primal_viol, float(np.max(-slack / (1.0 + np.abs(problem.ineq_rhs))))
        )
        dual_viol = max(dual_viol, float(np.max(-sol.ineq_duals, initial=0.0)))
        comp += float(np.abs(sol.ineq_duals) @ np.abs(slack))
    if sol.lower_duals is not None:
        lo = np.asarray(problem.lower, float)
        fin = np.isfinite(lo)
        slack = x[fin] - lo[fin]
        grad -= sol.lower_duals
        primal_viol = max(primal_viol, float(np.max(-slack / (1.0 + np.abs(lo[fin])), initial=0.0)))
        dual_viol = max(dual_viol, float(np.max(-sol.lower_duals, initial=0.0)))
        comp += float(np.abs(sol.lower_duals[fin]) @ np.abs(slack))
    if sol.upper_duals is not None:
        up = np.asarray(problem.upper, float)
        fin = np.isfinite(up)
        slack = up[fin] - x[fin]
        grad += sol.upper_duals
        primal_viol = max(primal_viol, float(np.max(-slack / (1.0 + np.abs(up[fin])), initial=0.0)))
        dual_viol = max(dual_viol, float(np.max(-sol.upper_duals, initial=0.0)))
        comp += float(np.abs(sol.upper_duals[fin]) @ np.abs(slack))
    for blk, zb in zip(problem.soc_blocks, sol.soc_duals):
        t = blk.c_row @ x + blk.d_offset
        u = blk.a_rows @ x + blk.a_offset
        primal_viol = max(
            primal_viol, float((np.linalg.norm(u) - t) / (1.0 + abs(blk.d_offset)))
        )
        grad += -blk.c_row * zb[0] - blk.a_rows.T @ zb[1:]
        dual_viol = max(dual_viol, float(np.linalg.norm(zb[1:]) - zb[0]))
        comp += abs(t * zb[0] + u @ zb[1:])
    scale = 1.0 + float(np.max(np.abs(c)))
    stationarity = max(float(np.max(np.abs(grad))) / scale, dual_viol)
    complementarity = comp / (1.0 + abs(float(c @ x)))
    return KktResiduals(
        stationarity=stationarity,
        primal=max(primal_viol, 0.0),
        complementarity=complementarity,
    )
