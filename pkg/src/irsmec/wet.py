"""Energy-transfer phase design.

Given the computing-phase settings, the per-sub-band transmit powers solve
a linear program (minimum broadcast power subject to every device
harvesting what it spends), and the reflection coefficients are improved by
successive convex approximation: the squared channel magnitude
``a^2 + b^2`` is replaced by its first-order expansion
``a~(2a - a~) + b~(2b - b~)``, which lower-bounds the true value and is
tight at the expansion point.  Alternating the two yields a monotonically
non-increasing transmit-energy objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .channel import ChannelSet, IrsVector
from .params import SystemParams
from .solver import ConeProblem, SocBlock, solve_lp, solve_socp

if TYPE_CHECKING:  # pragma: no cover
    from .offload import ComputeSolution

__all__ = [
    "WetSolution",
    "ScaWorkspace",
    "ScaResult",
    "WetInfeasibleError",
    "required_device_power",
    "usage_vector",
    "harvested_energy",
    "harvested_energy_vector",
    "solve_wet_power",
    "sca_theta_e",
    "optimize_wet",
]

_TINY = 1e-12


class WetInfeasibleError(RuntimeError):
    """No transmit power can satisfy a device's harvesting requirement."""


@dataclass(frozen=True)
class WetSolution:
    """Per-sub-band transmit powers and the reflection vector of the WET phase."""

    p_e: np.ndarray
    theta_e: IrsVector
    objective: float                    # tau*T*sum(p_e) [J]
    trace: list = field(default_factory=list)

    def __post_init__(self):
        p = np.asarray(self.p_e, float)
        p.setflags(write=False)
        object.__setattr__(self, "p_e", p)
        if np.any(p < -1e-12):
            raise ValueError("WET powers must be nonnegative")


@dataclass(frozen=True)
class ScaWorkspace:
    """Expansion point and solution of one SCA iteration."""

    a: np.ndarray        # Re C at the expansion point
    b: np.ndarray        # Im C at the expansion point
    slack: np.ndarray    # xi (WET) or chi (computing) at the solution
    y: np.ndarray        # linearized squared magnitudes at the solution


@dataclass(frozen=True)
class ScaResult:
    theta: IrsVector
    slack_trace: list
    workspaces: list
    status: str = "ok"


def required_device_power(k: int, compute: "ComputeSolution", params: SystemParams) -> float:
    """Computing-phase power draw of device k: kappa*f^2 + sum alpha*(p + p_c)."""
    local = params.kappa * compute.f[k] ** 2
    offload = float(
        compute.alpha[k] @ (compute.p_i[k] + params.circuit_power * (compute.alpha[k] > 0))
    )
    return local + offload


def usage_vector(compute: "ComputeSolution", params: SystemParams) -> np.ndarray:
    """Per-device computing-phase power draw [W]."""
    active = compute.alpha > 0
    offload = np.sum(active * (compute.p_i + params.circuit_power), axis=1)
    return params.kappa * compute.f**2 + offload


def harvested_energy(
    ch: ChannelSet,
    tau: float,
    p_e: np.ndarray,
    theta_e: IrsVector,
    k: int,
    params: SystemParams,
) -> float:
    """Energy harvested by device k over the WET phase [J]."""
    gains = ch.gains(theta_e)[k]
    return float(params.harvest_efficiency * tau * params.block_time * (p_e @ gains))


def harvested_energy_vector(
    ch: ChannelSet, tau: float, p_e: np.ndarray, theta_e: IrsVector, params: SystemParams
) -> np.ndarray:
    gains = ch.gains(theta_e)
    return params.harvest_efficiency * tau * params.block_time * (gains @ np.asarray(p_e))


def solve_wet_power(
    ch: ChannelSet,
    theta_e: IrsVector,
    compute: "ComputeSolution",
    params: SystemParams,
    tau: float | None = None,
) -> np.ndarray:
    """Minimum-total-power allocation meeting every device's energy need (LP)."""
    tau = params.tau if tau is None else tau
    m = ch.n_subbands
    usage = usage_vector(compute, params)
    needy = usage > 0
    if not np.any(needy):
        return np.zeros(m)
    gains = ch.gains(theta_e)
    if np.any(gains[needy].sum(axis=1) <= 0):
        raise WetInfeasibleError("a device with positive demand has an all-zero channel")
    # (1 - tau) * usage_k <= eta * tau * sum_m p_m * gain_km   (T cancels)
    coef = params.harvest_efficiency * tau
    rows = -coef * gains[needy]
    rhs = -(1.0 - tau) * usage[needy]
    problem = ConeProblem(
        objective=np.ones(m),
        ineq_rows=rows,
        ineq_rhs=rhs,
        lower=np.zeros(m),
    )
    sol = solve_lp(problem, tol=params.lp_tol)
    if sol.status == "infeasible":
        raise WetInfeasibleError("WET power allocation is infeasible")
    return np.maximum(sol.x, 0.0)


def _expansion(ch: ChannelSet, theta: IrsVector):
    """Re/Im parts of C at theta plus their affine maps in (Re theta, Im theta)."""
    c = ch.cfr_matrix(theta)
    dr = ch.reflect_cfr  # (K, M, N)
    # a = Re C = ar_coef @ x + Re(direct);  x = [Re theta; Im theta]
    ar_coef = np.concatenate([dr.real, -dr.imag], axis=2)
    ai_coef = np.concatenate([dr.imag, dr.real], axis=2)
    return c.real, c.imag, ar_coef, ai_coef


def _linearized_y(ch, theta, ar_coef, ai_coef):
    """Affine map of y_km = a~(2a - a~) + b~(2b - b~) in x = [Re th; Im th].

    Returns (a~, b~, rows, offsets) with y = rows @ x + offsets per (k, m).
    """
    a0 = ch.direct_cfr.real
    b0 = ch.direct_cfr.imag
    c = ch.cfr_matrix(theta)
    atil, btil = c.real, c.imag
    rows = 2.0 * (atil[..., None] * ar_coef + btil[..., None] * ai_coef)
    offs = 2.0 * (atil * a0 + btil * b0) - (atil**2 + btil**2)
    return atil, btil, rows, offs


def sca_theta_e(
    ch: ChannelSet,
    p_e: np.ndarray,
    compute: "ComputeSolution",
    theta_init: IrsVector,
    params: SystemParams,
    tau: float | None = None,
) -> ScaResult:
    """Improve the WET-phase reflection vector by SCA (maximize total slack)."""
    tau = params.tau if tau is None else tau
    n = ch.n_irs_elements
    if n == 0:
        return ScaResult(theta_init, [], [], status="no-elements")
    k_dev, m = ch.n_devices, ch.n_subbands
    usage = usage_vector(compute, params)
    coef = params.harvest_efficiency * tau / (1.0 - tau)
    p_e = np.asarray(p_e, float)
    if not np.any(p_e > 0):
        return ScaResult(theta_init, [], [], status="zero-power")

    _, _, ar_coef, ai_coef = _expansion(ch, theta_init)
    nvar = 2 * n + k_dev
    objective = np.zeros(nvar)
    objective[2 * n :] = -1.0  # maximize sum xi
    lower = np.full(nvar, -np.inf)
    lower[2 * n :] = 0.0
    soc = [
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
    x_prev = None
    for _ in range(params.t_max):
        atil, btil, y_rows, y_offs = _linearized_y(ch, theta, ar_coef, ai_coef)
        # per device: xi_k + usage_k <= coef * sum_m p_m * y_km
        rows = np.zeros((k_dev, nvar))
        rows[:, : 2 * n] = -coef * np.einsum("m,kmv->kv", p_e, y_rows)
        rows[np.arange(k_dev), 2 * n + np.arange(k_dev)] = 1.0
        rhs = coef * (y_offs @ p_e) - usage
        problem = ConeProblem(
            objective=objective,
            ineq_rows=rows,
            ineq_rhs=rhs,
            soc_blocks=soc,
            lower=lower,
        )
        sol = solve_socp(problem, tol=params.socp_tol, x0=x_prev)
        if sol.status not in ("optimal", "iteration-limit") or (
            sol.status == "iteration-limit" and sol.kkt_residuals.max() > 1e-4
        ):
            status = "solver-stalled"
            break
        obj = -sol.objective  # sum of slacks
        if trace and obj < trace[-1] * (1.0 - 1e-9) - _TINY:
            # solver noise made the slack retreat: keep the previous iterate
            status = "stalled"
            break
        x_prev = sol.x
        theta_new = _clip_modulus(sol.x[:n] + 1j * sol.x[n : 2 * n])
        y_sol = y_rows.reshape(k_dev * m, nvar) @ sol.x
        workspaces.append(
            ScaWorkspace(
                a=atil, b=btil, slack=sol.x[2 * n :].copy(),
                y=(y_sol + y_offs.reshape(-1)).reshape(k_dev, m),
            )
        )
        rel = abs(obj - trace[-1]) / max(abs(obj), _TINY) if trace else np.inf
        trace.append(obj)
        theta = IrsVector(theta_new)
        if rel <= params.eps:
            break
    return ScaResult(theta, trace, workspaces, status=status)


def _clip_modulus(vec: np.ndarray) -> np.ndarray:
    """Rescale any entry whose modulus strays above 1 (solver tolerance)."""
    mag = np.abs(vec)
    over = mag > 1.0
    out = vec.copy()
    if np.any(over):
        out[over] = vec[over] / mag[over]
    return out


def optimize_wet(
    ch: ChannelSet,
    compute: "ComputeSolution",
    theta_init: IrsVector,
    params: SystemParams,
    tau: float | None = None,
    design_irs: bool = True,
) -> WetSolution:
    """Alternate the power LP and the reflection SCA until the WET energy settles.

    With ``design_irs=False`` (benchmark schemes) this reduces to a single
    LP solve at the fixed reflection vector.
    """
    tau = params.tau if tau is None else tau
    wet_time = tau * params.block_time
    theta = theta_init
    p_e = solve_wet_power(ch, theta, compute, params, tau)
    obj = wet_time * float(np.sum(p_e))
    trace = [obj]
    if design_irs and ch.n_irs_elements > 0:
        for _ in range(params.t_max):
            res = sca_theta_e(ch, p_e, compute, theta, params, tau)
            p_new = solve_wet_power(ch, res.theta, compute, params, tau)
            obj_new = wet_time * float(np.sum(p_new))
            if obj_new > obj * (1.0 + 1e-9) + _TINY:
                break  # keep the previous (better) iterate
            rel = abs(obj - obj_new) / max(obj_new, _TINY)
            theta, p_e, obj = res.theta, p_new, obj_new
            trace.append(obj)
            if rel <= params.eps:
                break
    return WetSolution(p_e=p_e, theta_e=theta, objective=obj, trace=trace)
