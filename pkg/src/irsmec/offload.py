"""Computing-phase design: offloading resources, reflection vector, CPU speeds.

The joint sub-band/power allocation is solved through its Lagrangian dual:
per sub-band, the optimal power given the multipliers is a water-filling
closed form, the sub-band goes to the device with the best per-band score,
and the multipliers follow projected diminishing-step subgradients.  The
energy-price multipliers live on [1, inf): below 1 the dual function is
unbounded because the slack variables enter the objective with unit weight.

The reflection vector of the computing phase is improved with the same SCA
expansion as the WET phase; because the rate constraint wraps the squared
magnitude in a logarithm, each subproblem additionally replaces the log
with a concave quadratic minorant that is exact at the expansion point and
valid on a per-iteration trust domain, keeping the subproblem a SOCP while
preserving the lower-bound property that drives monotone improvement.

CPU frequencies admit a closed form: spend whatever energy remains after
offloading, capped by the hardware maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .channel import ChannelSet, IrsVector
from .params import SystemParams
from .solver import ConeProblem, SocBlock, solve_socp
from .wet import ScaResult, ScaWorkspace, _clip_modulus, _expansion, _linearized_y

if TYPE_CHECKING:  # pragma: no cover
    from .wet import WetSolution

__all__ = [
    "ComputeSolution",
    "DualState",
    "DualResult",
    "OffloadInfeasibleError",
    "waterfill_power",
    "assign_subband",
    "slack_zeta",
    "subgradients",
    "dual_loop",
    "sca_theta_i",
    "update_frequencies",
    "offload_rate",
    "optimize_computing",
    "offload_volumes",
    "edge_energy",
]

_TINY = 1e-12
_LN2 = math.log(2.0)
#: trust-domain factor for the quadratic log minorant (y >= factor * y~)
_TRUST = 0.5


class OffloadInfeasibleError(RuntimeError):
    """A device cannot meet its offloading rate with any allocation."""


@dataclass(frozen=True)
class ComputeSolution:
    """Association, offload powers, CPU frequencies, and the phase's theta."""

    alpha: np.ndarray            # (K, M) in {0, 1}
    p_i: np.ndarray              # (K, M) [W]
    f: np.ndarray                # (K,) [cycle/s]
    zeta: np.ndarray             # (K,) slack power [W]
    theta_i: IrsVector
    ell: np.ndarray              # (K,) offloaded bits
    trace: list = field(default_factory=list)
    status: str = "ok"

    def __post_init__(self):
        alpha = np.asarray(self.alpha, float)
        p = np.asarray(self.p_i, float)
        if np.any((alpha != 0) & (alpha != 1)):
            raise ValueError("association entries must be binary")
        if np.any(alpha.sum(axis=0) > 1 + 1e-9):
            raise ValueError("each sub-band may serve at most one device")
        if np.any((alpha > 0) != (p > 0)):
            raise ValueError("alpha must be the indicator of positive power")
        for name, arr in (("alpha", alpha), ("p_i", p)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("f", "zeta", "ell"):
            arr = np.asarray(getattr(self, name), float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.f < -1e-9) or np.any(self.zeta < -1e-9):
            raise ValueError("frequencies and slack powers must be nonnegative")


@dataclass
class DualState:
    """Multipliers and step scales of the dual loop."""

    lam: np.ndarray
    mu: np.ndarray
    delta_lambda1: float = 0.1
    delta_mu1: float = 0.1
    t: int = 0


@dataclass(frozen=True)
class DualResult:
    alpha: np.ndarray
    p_i: np.ndarray
    zeta: np.ndarray
    dual_objective: float        # best (smallest) valid dual value seen
    lagrangian_trace: list
    status: str
    dual_state: DualState


def offload_volumes(f: np.ndarray, tau: float, params: SystemParams) -> np.ndarray:
    """Bits each device must offload: max(0, L_k - (1-tau)*T*f_k/c_k)."""
    local = (1.0 - tau) * params.block_time * np.asarray(f) / params.cycles_per_bit
    return np.maximum(0.0, params.task_bits - local)


def edge_energy(f: np.ndarray, tau: float, params: SystemParams) -> float:
    """Edge-side energy for the offloaded bits [J]."""
    return float(params.edge_energy_per_bit * np.sum(offload_volumes(f, tau, params)))


def waterfill_power(lambda_k: float, mu_k: float, gain_km: float, params: SystemParams) -> float:
    """Optimal per-band offload power [mu*B/(lambda*ln2) - Gamma*sigma^2/gain]+."""
    if gain_km <= 0.0:
        return 0.0
    lam = max(lambda_k, params.lambda_min)
    level = mu_k * params.subband_bandwidth / (lam * _LN2)
    return max(0.0, level - params.snr_gap * params.noise_power / gain_km)


def _band_score(lam, mu, p, gain, params):
    snr = p * gain / (params.snr_gap * params.noise_power)
    rate = params.subband_bandwidth * np.log2(1.0 + snr)
    return -lam * (p + params.circuit_power) + mu * rate


def assign_subband(
    m: int, dual: DualState, gains: np.ndarray, params: SystemParams
) -> tuple[int, float]:
    """Winner of sub-band m and its power (argmax of the per-band score).

    Ties break toward the lowest device index.  The returned power may be
    zero, in which case the assignment is inert (no active association).
    """
    best_k, best_p, best_score = 0, 0.0, -np.inf
    for k in range(gains.size):
        p = waterfill_power(dual.lam[k], dual.mu[k], gains[k], params)
        score = _band_score(dual.lam[k], dual.mu[k], p, gains[k], params)
        if score > best_score:
            best_k, best_p, best_score = k, p, score
    return best_k, best_p


def slack_zeta(
    e_k: float,
    f_k: float,
    alpha_row: np.ndarray,
    p_row: np.ndarray,
    tau: float,
    params: SystemParams,
) -> float:
    """Unused power budget of one device; negative signals infeasible prices."""
    budget = e_k / ((1.0 - tau) * params.block_time)
    active = np.asarray(alpha_row) > 0
    usage = params.kappa * f_k**2 + float(
        np.sum(active * (np.asarray(p_row) + params.circuit_power))
    )
    return budget - usage


def offload_rate(
    ch: ChannelSet,
    theta_i: IrsVector,
    alpha_row: np.ndarray,
    p_row: np.ndarray,
    k: int,
    params: SystemParams,
) -> float:
    """Achievable offloading rate of device k [bit/s]."""
    gains = ch.gains(theta_i)[k]
    return _rate_from_gains(np.asarray(alpha_row), np.asarray(p_row), gains, params)


def _rate_from_gains(alpha_row, p_row, gains, params):
    active = alpha_row > 0
    snr = p_row[active] * gains[active] / (params.snr_gap * params.noise_power)
    return float(params.subband_bandwidth * np.sum(np.log2(1.0 + snr)))


def subgradients(
    solution: ComputeSolution,
    e: np.ndarray,
    tau: float,
    ch: ChannelSet,
    params: SystemParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Subgradients of the dual: energy overdraw and rate deficit per device."""
    horizon = (1.0 - tau) * params.block_time
    active = solution.alpha > 0
    usage = params.kappa * solution.f**2 + np.sum(
        active * (solution.p_i + params.circuit_power), axis=1
    )
    s_lambda = usage - np.asarray(e) / horizon
    gains = ch.gains(solution.theta_i)
    rates = np.array(
        [
            _rate_from_gains(solution.alpha[k], solution.p_i[k], gains[k], params)
            for k in range(ch.n_devices)
        ]
    )
    targets = offload_volumes(solution.f, tau, params) / horizon
    return s_lambda, targets - rates


def _min_power_waterfill(gains, target_rate, params, tol=1e-10):
    """Minimum-power water level meeting a rate target on the given bands.

    Returns (powers, ok).  Bisection on the common water level; the rate is
    increasing in the level, so the fixed point is unique.
    """
    gains = np.asarray(gains, float)
    usable = gains > 0
    if target_rate <= 0:
        return np.zeros_like(gains), True
    if not np.any(usable):
        return np.zeros_like(gains), False
    floor = params.snr_gap * params.noise_power / gains[usable]

    def rate_at(level):
        p = np.maximum(0.0, level - floor)
        return params.subband_bandwidth * np.sum(np.log2(1.0 + p / floor))

    lo = float(np.min(floor))
    hi = lo * 2.0 + _TINY
    while rate_at(hi) < target_rate:
        hi *= 2.0
        if hi > 1e30:
            return np.zeros_like(gains), False
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if rate_at(mid) >= target_rate:
            hi = mid
        else:
            lo = mid
        if hi - lo <= tol * max(hi, 1.0):
            break
    p = np.zeros_like(gains)
    p[usable] = np.maximum(0.0, hi - floor)
    return p, True


def _restore_rates(alpha, p_i, gains, targets, params):
    """Scale each deficient device's powers up until its rate target holds.

    Returns (p_restored, ok_mask); a needy device without any active band
    cannot be repaired at fixed association.
    """
    k_dev = alpha.shape[0]
    p_out = p_i.copy()
    ok = np.ones(k_dev, dtype=bool)
    for k in range(k_dev):
        if targets[k] <= 0:
            continue
        active = alpha[k] > 0
        if not np.any(active):
            ok[k] = False
            continue
        rate = _rate_from_gains(alpha[k], p_out[k], gains[k], params)
        if rate >= targets[k] * (1.0 - 1e-12):
            continue
        snr = p_out[k, active] * gains[k, active] / (params.snr_gap * params.noise_power)

        def rate_scaled(rho):
            return params.subband_bandwidth * np.sum(np.log2(1.0 + rho * snr))

        lo, hi = 1.0, 2.0
        while rate_scaled(hi) < targets[k]:
            hi *= 2.0
            if hi > 1e18:
                ok[k] = False
                break
        if not ok[k]:
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if rate_scaled(mid) >= targets[k]:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-12 * hi:
                break
        p_out[k, active] *= hi
    return p_out, ok


def _init_mu(gains, targets, lam, needy, params):
    """Rate-price init: water level matching each device's estimated band count.

    The circuit power charged per active band trades off against the
    exponential power growth of squeezing the rate onto few bands; the
    initializer picks the band count minimizing that estimate and sets the
    water level accordingly.
    """
    k_dev, m = gains.shape
    fair = max(1, m // max(1, int(np.sum(needy))))
    mu = np.zeros(k_dev)
    for k in range(k_dev):
        if not needy[k]:
            continue
        top = np.sort(gains[k][gains[k] > 0])[::-1][:fair]
        if top.size == 0:
            continue
        best_level, best_cost = None, np.inf
        for n_bands in range(1, top.size + 1):
            g_typ = float(np.exp(np.mean(np.log(top[:n_bands]))))
            per_band = targets[k] / (n_bands * params.subband_bandwidth)
            level = params.snr_gap * params.noise_power / g_typ * 2.0**per_band
            power = n_bands * (
                params.circuit_power
                + max(0.0, level - params.snr_gap * params.noise_power / g_typ)
            )
            if power < best_cost:
                best_cost, best_level = power, level
        mu[k] = lam[k] * _LN2 * best_level / params.subband_bandwidth
    return mu


def dual_loop(
    ch: ChannelSet,
    theta_i: IrsVector,
    f: np.ndarray,
    e: np.ndarray,
    tau: float,
    params: SystemParams,
    dual0: DualState | None = None,
    max_iter: int | None = None,
) -> DualResult:
    """Projected-subgradient dual decomposition of the offloading allocation.

    Iterates the per-band water-filling/assignment closed forms, updates the
    multipliers with diminishing steps (normalized to the problem's power
    and rate scales), and tracks the best feasible primal candidate after a
    rate-restoration pass.  Falls back to a greedy one-band-per-device
    allocation when no dual iterate restores feasibly.
    """
    k_dev, m = ch.n_devices, ch.n_subbands
    horizon = (1.0 - tau) * params.block_time
    f = np.asarray(f, float)
    e = np.asarray(e, float)
    targets = offload_volumes(f, tau, params) / horizon
    needy = targets > 0
    gains = ch.gains(theta_i)
    budget = e / horizon
    empty = (np.zeros((k_dev, m)), np.zeros((k_dev, m)), budget - params.kappa * f**2)
    if not np.any(needy):
        return DualResult(*empty, np.nan, [], "ok", dual0 or _fresh_dual(k_dev, params))
    if np.any(needy & (gains.max(axis=1) <= 0)):
        raise OffloadInfeasibleError("offloading device has an all-zero channel")
    if np.any(needy & (e <= 0)):
        raise OffloadInfeasibleError("offloading device has no harvested energy")

    mu_heur = _init_mu(gains, targets, np.ones(k_dev), needy, params)
    if dual0 is None:
        dual = DualState(
            np.ones(k_dev), mu_heur.copy(), params.delta_lambda1, params.delta_mu1, 0
        )
    else:
        dual = DualState(
            dual0.lam.copy(), dual0.mu.copy(), dual0.delta_lambda1, dual0.delta_mu1, 0
        )
    mu_scale = np.maximum(np.maximum(dual.mu, mu_heur), 1e-30)
    eps_gain = params.snr_gap * params.noise_power
    local = params.kappa * f**2
    cap = params.t_max if max_iter is None else max_iter

    best = None            # (total usage, alpha, p, usage_vec)
    best_dual = np.inf
    lagr_trace: list[float] = []
    for t in range(1, cap + 1):
        dual.t = t
        lam_safe = np.maximum(dual.lam, params.lambda_min)
        level = dual.mu * params.subband_bandwidth / (lam_safe * _LN2)
        with np.errstate(divide="ignore"):
            noise_over_gain = np.where(gains > 0, eps_gain / np.maximum(gains, _TINY), np.inf)
        p_hat = np.maximum(0.0, level[:, None] - noise_over_gain)
        rate_hat = params.subband_bandwidth * np.log2(1.0 + p_hat * gains / eps_gain)
        scores = -dual.lam[:, None] * (p_hat + params.circuit_power) + dual.mu[:, None] * rate_hat
        scores[~needy] = -np.inf
        winner = np.argmax(scores, axis=0)
        alpha = np.zeros((k_dev, m))
        p_i = np.zeros((k_dev, m))
        cols = np.arange(m)
        chosen_p = p_hat[winner, cols]
        active = chosen_p > 0
        alpha[winner[active], cols[active]] = 1.0
        p_i[winner[active], cols[active]] = chosen_p[active]

        usage = local + np.sum((alpha > 0) * (p_i + params.circuit_power), axis=1)
        zeta = budget - usage
        rates = np.array(
            [_rate_from_gains(alpha[k], p_i[k], gains[k], params) for k in range(k_dev)]
        )
        lagr = float(
            np.sum(zeta[needy])
            - np.sum(dual.lam[needy] * (usage[needy] + zeta[needy] - budget[needy]))
            + np.sum(dual.mu[needy] * (rates[needy] - targets[needy]))
        )
        # true dual value: finite because lam >= 1 keeps the slack term bounded
        g_m = np.maximum(0.0, scores.max(axis=0)).sum()
        dual_val = float(
            g_m
            + np.sum(-dual.lam[needy] * local[needy] + dual.lam[needy] * budget[needy])
            - np.sum(dual.mu[needy] * targets[needy])
        )
        best_dual = min(best_dual, dual_val)

        p_fix, ok = _restore_rates(alpha, p_i, gains, targets, params)
        if np.all(ok):
            alpha_fix = (p_fix > 0).astype(float)
            usage_fix = local + np.sum(
                (alpha_fix > 0) * (p_fix + params.circuit_power), axis=1
            )
            energy_ok = np.all(usage_fix <= budget * (1.0 + 1e-9) + _TINY)
            merit = (not energy_ok, float(np.sum(usage_fix)))
            if best is None or merit < best[0]:
                best = (merit, alpha_fix, p_fix, usage_fix)

        s_lam = usage - budget
        s_mu = targets - rates
        lam_step = dual.delta_lambda1 / t
        mu_step = dual.delta_mu1 / t
        scale_e = np.maximum(np.maximum(budget, usage), _TINY)
        dual.lam = np.maximum(1.0, dual.lam + lam_step * s_lam / scale_e)
        dual.mu = np.maximum(
            0.0, dual.mu + mu_step * mu_scale * s_mu / params.subband_bandwidth
        )
        if lagr_trace:
            rel = abs(lagr - lagr_trace[-1]) / max(abs(lagr), _TINY)
            lagr_trace.append(lagr)
            if rel <= params.eps:
                break
        else:
            lagr_trace.append(lagr)

    status = "ok"
    if best is None:
        alpha, p_i, ok = _greedy_allocation(gains, targets, needy, params)
        if not ok:
            raise OffloadInfeasibleError("no feasible offloading allocation found")
        usage = local + np.sum((alpha > 0) * (p_i + params.circuit_power), axis=1)
        status = "greedy-fallback"
    else:
        _, alpha, p_i, usage = best
    zeta = budget - usage
    return DualResult(alpha, p_i, zeta, best_dual, lagr_trace, status, dual)


def _fresh_dual(k_dev: int, params: SystemParams) -> DualState:
    return DualState(
        np.ones(k_dev), np.zeros(k_dev), params.delta_lambda1, params.delta_mu1, 0
    )


def _greedy_allocation(gains, targets, needy, params):
    """One exclusive band per needy device (its best free one), exact-rate power."""
    k_dev, m = gains.shape
    alpha = np.zeros((k_dev, m))
    p_i = np.zeros((k_dev, m))
    taken = np.zeros(m, dtype=bool)
    for k in range(k_dev):
        if not needy[k]:
            continue
        order = np.argsort(gains[k])[::-1]
        band = next((b for b in order if not taken[b] and gains[k, b] > 0), None)
        if band is None:
            return alpha, p_i, False
        taken[band] = True
        snr_needed = 2.0 ** (targets[k] / params.subband_bandwidth) - 1.0
        p = snr_needed * params.snr_gap * params.noise_power / gains[k, band]
        if not np.isfinite(p):
            return alpha, p_i, False
        alpha[k, band] = 1.0
        p_i[k, band] = p
    return alpha, p_i, True


def update_frequencies(
    e: np.ndarray,
    alpha: np.ndarray,
    p_i: np.ndarray,
    zeta: np.ndarray,
    tau: float,
    params: SystemParams,
) -> np.ndarray:
    """Closed-form CPU frequencies: spend the leftover budget, capped at f_max."""
    horizon = (1.0 - tau) * params.block_time
    active = np.asarray(alpha) > 0
    offload = np.sum(active * (np.asarray(p_i) + params.circuit_power), axis=1)
    budget = np.asarray(e) / horizon - offload - np.asarray(zeta)
    f_hat = np.sqrt(np.maximum(budget, 0.0) / params.kappa)
    return np.where(budget < 0.0, 0.0, np.minimum(f_hat, params.f_max))


def sca_theta_i(
    ch: ChannelSet,
    alpha: np.ndarray,
    p_i: np.ndarray,
    f: np.ndarray,
    tau: float,
    theta_init: IrsVector,
    params: SystemParams,
) -> ScaResult:
    """Improve the computing-phase reflection vector by SCA.

    Maximizes the total rate margin above the offloading targets.  Each
    subproblem linearizes the squared channel magnitude (exact at the
    expansion point) and replaces the log-rate with a quadratic minorant
    valid for y >= _TRUST * y~, so the subproblem stays a SOCP; both pieces
    lower-bound the true rate, hence accepted iterates never lose
    feasibility and the margin never decreases.
    """
    n = ch.n_irs_elements
    if n == 0:
        return ScaResult(theta_init, [], [], status="no-elements")
    k_dev, m = ch.n_devices, ch.n_subbands
    horizon = (1.0 - tau) * params.block_time
    targets = offload_volumes(np.asarray(f, float), tau, params) / horizon
    alpha = np.asarray(alpha, float)
    p_i = np.asarray(p_i, float)
    needy = [k for k in range(k_dev) if targets[k] > 0 and np.any(alpha[k] > 0)]
    if not needy:
        return ScaResult(theta_init, [], [], status="no-active")
    bandwidth = params.subband_bandwidth
    eps_gain = params.snr_gap * params.noise_power
    gains0 = ch.gains(theta_init)
    for k in needy:
        rate0 = _rate_from_gains(alpha[k], p_i[k], gains0[k], params)
        if rate0 < targets[k] * (1.0 - 1e-9):
            return ScaResult(theta_init, [], [], status="init-infeasible")

    _, _, ar_coef, ai_coef = _expansion(ch, theta_init)
    n_needy = len(needy)
    nvar = 2 * n + n_needy
    objective = np.zeros(nvar)
    objective[2 * n :] = -1.0  # maximize total margin (in units of B)
    lower = np.full(nvar, -np.inf)
    lower[2 * n :] = 0.0
    unit_soc = [
        SocBlock(
            a_rows=np.eye(nvar)[[j, n + j]],
            a_offset=np.zeros(2),
            c_row=np.zeros(nvar),
            d_offset=1.0,
        )
        for j in range(n)
    ]

    theta = theta_init
    trace: list[float] = []
    workspaces: list[ScaWorkspace] = []
    status = "ok"
    for _ in range(params.t_max):
        atil, btil, y_rows, y_offs = _linearized_y(ch, theta, ar_coef, ai_coef)
        ytil = atil**2 + btil**2
        lin_rows = []
        lin_rhs = []
        soc = list(unit_soc)
        for idx, k in enumerate(needy):
            bands = np.where(alpha[k] > 0)[0]
            c_snr = p_i[k, bands] / eps_gain          # y -> SNR conversion
            y0 = ytil[k, bands]
            # log2(1 + c*y) >= tangent - gamma*(y - y0)^2 for y >= _TRUST*y0
            log0 = np.log2(1.0 + c_snr * y0)
            slope = c_snr / ((1.0 + c_snr * y0) * _LN2)
            gamma = c_snr**2 / (2.0 * _LN2 * (1.0 + c_snr * _TRUST * y0) ** 2)
            rows = y_rows[k, bands]                   # (nb, 2N)
            offs = y_offs[k, bands]
            # s = sum tangent - target/B - chi  (all in units of B)
            s_row = np.zeros(nvar)
            s_row[: 2 * n] = slope @ rows
            s_row[2 * n + idx] = -1.0
            s_off = float(np.sum(log0 + slope * (offs - y0)) - targets[k] / bandwidth)
            # || [sqrt(gamma)*(y - y0); (s-1)/2] || <= (s+1)/2
            a_rows = np.vstack(
                [
                    np.hstack(
                        [np.sqrt(gamma)[:, None] * rows, np.zeros((bands.size, n_needy))]
                    ),
                    0.5 * s_row,
                ]
            )
            a_offs = np.concatenate([np.sqrt(gamma) * (offs - y0), [0.5 * (s_off - 1.0)]])
            soc.append(SocBlock(a_rows, a_offs, 0.5 * s_row, 0.5 * (s_off + 1.0)))
            # trust rows: y >= _TRUST * y0
            trust = np.zeros((bands.size, nvar))
            trust[:, : 2 * n] = -rows
            lin_rows.append(trust)
            lin_rhs.append(offs - _TRUST * y0)
        problem = ConeProblem(
            objective=objective,
            ineq_rows=np.vstack(lin_rows),
            ineq_rhs=np.concatenate(lin_rhs),
            soc_blocks=soc,
            lower=lower,
        )
        sol = solve_socp(problem, tol=params.socp_tol)
        if sol.status not in ("optimal", "iteration-limit") or (
            sol.status == "iteration-limit" and sol.kkt_residuals.max() > 1e-4
        ):
            status = "solver-stalled"
            break
        obj = -sol.objective * bandwidth  # total margin [bit/s]
        if trace and obj < trace[-1] * (1.0 - 1e-9) - _TINY:
            status = "stalled"
            break
        theta_new = IrsVector(_clip_modulus(sol.x[:n] + 1j * sol.x[n : 2 * n]))
        y_sol = (y_rows.reshape(k_dev * m, 2 * n) @ sol.x[: 2 * n]).reshape(k_dev, m)
        workspaces.append(
            ScaWorkspace(
                a=atil,
                b=btil,
                slack=sol.x[2 * n :] * bandwidth,
                y=y_sol + y_offs,
            )
        )
        # the minorant guarantees the true rates only up to solver tolerance;
        # reject the step if a target would actually be lost
        gains_new = ch.gains(theta_new)
        rates_new = np.array(
            [_rate_from_gains(alpha[k], p_i[k], gains_new[k], params) for k in needy]
        )
        if np.any(rates_new < np.asarray([targets[k] for k in needy]) * (1.0 - 1e-9)):
            status = "stalled"
            break
        rel = abs(obj - trace[-1]) / max(abs(obj), _TINY) if trace else np.inf
        trace.append(obj)
        theta = theta_new
        if rel <= params.eps:
            break
    return ScaResult(theta, trace, workspaces, status=status)


def optimize_computing(
    ch: ChannelSet,
    wet: "WetSolution",
    compute_init: ComputeSolution,
    params: SystemParams,
    tau: float | None = None,
    design_irs: bool = True,
) -> ComputeSolution:
    """Alternate reflection SCA, dual allocation, and the frequency closed form.

    The edge-energy objective is non-increasing by construction: a candidate
    round is accepted only if it does not increase the objective, otherwise
    the previous iterate is kept and the loop stops.
    """
    from .wet import harvested_energy_vector  # local import avoids a cycle

    tau = params.tau if tau is None else tau
    horizon = (1.0 - tau) * params.block_time
    e = harvested_energy_vector(ch, tau, wet.p_e, wet.theta_e, params)
    theta = compute_init.theta_i
    f = np.asarray(compute_init.f, float)

    dres = dual_loop(ch, theta, f, e, tau, params)
    alpha, p_i = dres.alpha, dres.p_i
    # released slack: frequencies absorb whatever the allocation left over
    f = update_frequencies(e, alpha, p_i, np.zeros(ch.n_devices), tau, params)
    obj = edge_energy(f, tau, params)
    trace = [obj]
    status = dres.status
    for _ in range(params.t_max):
        if design_irs and ch.n_irs_elements > 0:
            sca = sca_theta_i(ch, alpha, p_i, f, tau, theta, params)
            theta_cand = sca.theta
        else:
            theta_cand = theta
        dres = dual_loop(ch, theta_cand, f, e, tau, params)
        f_cand = update_frequencies(e, dres.alpha, dres.p_i, np.zeros(ch.n_devices), tau, params)
        obj_cand = edge_energy(f_cand, tau, params)
        if obj_cand > obj * (1.0 + 1e-9) + _TINY:
            break  # keep the previous (better) iterate
        rel = abs(obj - obj_cand) / max(obj_cand, _TINY)
        theta, alpha, p_i, f, obj = theta_cand, dres.alpha, dres.p_i, f_cand, obj_cand
        status = dres.status
        trace.append(obj)
        if rel <= params.eps:
            break

    usage = params.kappa * f**2 + np.sum((alpha > 0) * (p_i + params.circuit_power), axis=1)
    zeta = np.maximum(0.0, e / horizon - usage)
    return ComputeSolution(
        alpha=alpha,
        p_i=p_i,
        f=f,
        zeta=zeta,
        theta_i=theta,
        ell=offload_volumes(f, tau, params),
        trace=trace,
        status=status,
    )
