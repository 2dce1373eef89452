"""System-level simulation parameters.

All values are stored in SI units (W, s, Hz, bit, m).  The defaults
reproduce the standard desk-scale setup: a single-antenna hybrid access
point serving K energy-harvesting devices over M OFDM sub-bands, assisted
by an N-element reflecting surface placed near the device cluster.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

__all__ = ["SystemParams"]


def _midpoint_array(rng_pair: tuple[float, float], k: int) -> np.ndarray:
    lo, hi = rng_pair
    return np.full(k, 0.5 * (lo + hi), dtype=float)


@dataclass(frozen=True)
class SystemParams:
    """Scalar constants of the scenario plus solver/loop tolerances.

    Per-device task sizes and CPU cycle counts default to the midpoint of
    their uniform ranges; experiments draw fresh values per trial via
    :meth:`with_sampled_tasks`.
    """

    # system model
    n_devices: int = 3                      # K
    n_subbands: int = 16                    # M
    n_irs_elements: int = 30                # N
    block_time: float = 10e-3               # T [s]
    tau: float = 0.1                        # WET fraction of the block
    # wireless energy transfer
    harvest_efficiency: float = 0.5         # eta
    # communication model
    subband_bandwidth: float = 312.5e3      # B [Hz]
    pl0_db: float = 30.0                    # path loss at reference distance [dB]
    d0: float = 1.0                         # reference distance [m]
    beta_ua: float = 3.5                    # device-HAP path loss exponent
    beta_ui: float = 2.2                    # device-IRS path loss exponent
    beta_ia: float = 2.2                    # IRS-HAP path loss exponent
    taps_direct: int = 4                    # delay spread of the direct link
    taps_irs_hap: int = 2                   # L1
    taps_device_irs: int = 3                # L2
    noise_power: float = 1.24e-15           # sigma^2 per sub-band [W]
    snr_gap: float = 2.0                    # Gamma (linear)
    # geometry [m]
    cell_radius: float = 12.0               # R
    d1: float = 11.0                        # HAP -> device-circle center
    d2: float = 1.0                         # device-circle center -> IRS
    device_circle_radius: float = 1.0       # r
    # computing model
    task_bits_range: tuple[float, float] = (15e3, 20e3)        # L_k [bit]
    cycles_per_bit_range: tuple[float, float] = (400.0, 500.0)  # c_k
    task_bits: np.ndarray | None = None
    cycles_per_bit: np.ndarray | None = None
    f_max: float = 1e8                      # max CPU frequency [cycle/s]
    kappa: float = 1e-28                    # CPU energy coefficient
    circuit_power: float = 1e-4             # p_c [W]
    edge_energy_per_bit: float = 5e-8       # vartheta [J/bit]
    edge_cpu_speed: float = 1e9             # f_e [cycle/s]
    # loop controls
    eps: float = 1e-3                       # relative convergence criterion
    t_max: int = 50                         # inner-loop iteration cap
    t_max_outer: int = 20                   # outer alternation cap
    delta_lambda1: float = 0.1              # initial subgradient step (energy price)
    delta_mu1: float = 0.1                  # initial subgradient step (rate price)
    lambda_min: float = 1e-9                # hard floor keeping water levels finite
    # solver tolerances
    lp_tol: float = 1e-8
    socp_tol: float = 1e-7

    def __post_init__(self):
        if self.task_bits is None:
            object.__setattr__(
                self, "task_bits", _midpoint_array(self.task_bits_range, self.n_devices)
            )
        else:
            object.__setattr__(self, "task_bits", np.asarray(self.task_bits, dtype=float))
        if self.cycles_per_bit is None:
            object.__setattr__(
                self,
                "cycles_per_bit",
                _midpoint_array(self.cycles_per_bit_range, self.n_devices),
            )
        else:
            object.__setattr__(
                self, "cycles_per_bit", np.asarray(self.cycles_per_bit, dtype=float)
            )
        self._validate()

    def _validate(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if not 0.0 <= self.harvest_efficiency <= 1.0:
            raise ValueError("harvest_efficiency must lie in [0, 1]")
        for name in (
            "n_devices",
            "n_subbands",
            "block_time",
            "subband_bandwidth",
            "noise_power",
            "snr_gap",
            "f_max",
            "kappa",
            "edge_energy_per_bit",
            "d0",
            "eps",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.n_irs_elements < 0:
            raise ValueError("n_irs_elements must be nonnegative")
        if self.circuit_power < 0:
            raise ValueError("circuit_power must be nonnegative")
        if min(self.taps_direct, self.taps_irs_hap, self.taps_device_irs) < 1:
            raise ValueError("tap counts must be at least 1")
        # cyclic-prefix assumption: delay spread fits within one OFDM symbol
        reflected = self.taps_irs_hap + self.taps_device_irs - 1
        if max(self.taps_direct, reflected) > self.n_subbands:
            raise ValueError(
                "delay spread exceeds the sub-band count "
                f"(max({self.taps_direct}, {reflected}) > {self.n_subbands})"
            )
        if self.task_bits.shape != (self.n_devices,):
            raise ValueError("task_bits must have one entry per device")
        if self.cycles_per_bit.shape != (self.n_devices,):
            raise ValueError("cycles_per_bit must have one entry per device")
        if np.any(self.task_bits < 0) or np.any(self.cycles_per_bit <= 0):
            raise ValueError("task sizes must be >= 0 and cycle counts > 0")

    # -- convenience -------------------------------------------------------

    def replace(self, **changes) -> "SystemParams":
        """Return a copy with the given fields replaced (re-validated)."""
        if ("n_devices" in changes) and not (
            "task_bits" in changes or "cycles_per_bit" in changes
        ):
            # device count changed: let the ranges regenerate the arrays
            changes.setdefault("task_bits", None)
            changes.setdefault("cycles_per_bit", None)
        return dataclasses.replace(self, **changes)

    def with_sampled_tasks(self, rng: np.random.Generator) -> "SystemParams":
        """Draw per-device task sizes and cycle counts from their uniform ranges."""
        bits = rng.uniform(*self.task_bits_range, size=self.n_devices)
        cycles = rng.uniform(*self.cycles_per_bit_range, size=self.n_devices)
        return self.replace(task_bits=bits, cycles_per_bit=cycles)
