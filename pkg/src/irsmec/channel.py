"""Geometry, multipath channel synthesis, and frequency responses.

The downlink/uplink channels are reciprocal tapped-delay lines.  Each link
is the product of a distance-based path-loss gain and i.i.d. circularly
symmetric Gaussian taps whose total expected power equals that gain.  The
reflected path through surface element ``n`` is the linear convolution of
the device-element and element-HAP impulse responses; stacking those
zero-padded columns gives the reflection matrix ``V[k]`` so that the
per-sub-band frequency response is affine in the reflection coefficients:

    C[k, m](theta) = dft[m] @ h_d[k] + (dft[m] @ V[k]) @ theta
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .params import SystemParams

__all__ = [
    "Geometry",
    "IrsVector",
    "ChannelSet",
    "sample_geometry",
    "path_loss_gain",
    "sample_cir",
    "compose_reflection",
    "build_channels",
    "cfr",
    "make_instance",
]

#: tolerance on the unit-modulus bound of reflection coefficients
IRS_MODULUS_TOL = 1e-9

# spawn keys for per-link random substreams; fixed so that, e.g., the direct
# channels do not change when the element count N is swept under one seed
_KEY_DIRECT = 0
_KEY_IRS_HAP = 1
_KEY_DEVICE_IRS = 2
_KEY_GEOMETRY = 3
_KEY_TASKS = 4


def _substream(seed, *key) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        base = seed.entropy
    else:
        base = seed
    return np.random.default_rng(np.random.SeedSequence(base, spawn_key=tuple(key)))


@dataclass(frozen=True)
class Geometry:
    """Planar positions of the HAP, the IRS, and the devices [m]."""

    hap_position: np.ndarray
    irs_position: np.ndarray
    device_positions: np.ndarray  # (K, 2)
    circle_center: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "hap_position", np.asarray(self.hap_position, float))
        object.__setattr__(self, "irs_position", np.asarray(self.irs_position, float))
        object.__setattr__(
            self, "device_positions", np.atleast_2d(np.asarray(self.device_positions, float))
        )
        object.__setattr__(self, "circle_center", np.asarray(self.circle_center, float))


@dataclass(frozen=True)
class IrsVector:
    """N complex reflection coefficients with ``|theta[n]| <= 1``."""

    theta: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.theta, dtype=complex).reshape(-1)
        arr.setflags(write=False)
        object.__setattr__(self, "theta", arr)
        if arr.size and np.max(np.abs(arr)) > 1.0 + IRS_MODULUS_TOL:
            raise ValueError(
                f"reflection amplitude exceeds 1: max |theta| = {np.max(np.abs(arr)):.12g}"
            )

    @property
    def n(self) -> int:
        return self.theta.size

    @classmethod
    def zeros(cls, n: int) -> "IrsVector":
        return cls(np.zeros(n, dtype=complex))

    @classmethod
    def random_unit_phase(cls, n: int, rng: np.random.Generator) -> "IrsVector":
        """Unit amplitude, phases uniform on [0, 2*pi)."""
        return cls(np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=n)))

    @classmethod
    def random_amplitude_phase(cls, n: int, rng: np.random.Generator) -> "IrsVector":
        """Amplitudes uniform on [0, 1], phases uniform on [0, 2*pi)."""
        amp = rng.uniform(0.0, 1.0, size=n)
        phase = rng.uniform(0.0, 2.0 * np.pi, size=n)
        return cls(amp * np.exp(1j * phase))


@dataclass(frozen=True)
class ChannelSet:
    """Zero-padded direct CIRs, reflection matrices, and DFT rows.

    ``direct_cfr[k, m]`` and ``reflect_cfr[k, m, :]`` cache the DFT at
    construction so that evaluating C(theta) is a single matrix product.
    """

    h_d: np.ndarray          # (K, M) complex
    V: np.ndarray            # (K, M, N) complex
    dft: np.ndarray          # (M, M), rows f_m^H with unit-magnitude entries
    direct_cfr: np.ndarray = field(init=False)   # (K, M)
    reflect_cfr: np.ndarray = field(init=False)  # (K, M, N)

    def __post_init__(self):
        for name in ("h_d", "V", "dft"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        direct = self.h_d @ self.dft.T
        reflect = np.einsum("ml,kln->kmn", self.dft, self.V)
        direct.setflags(write=False)
        reflect.setflags(write=False)
        object.__setattr__(self, "direct_cfr", direct)
        object.__setattr__(self, "reflect_cfr", reflect)

    @property
    def n_devices(self) -> int:
        return self.h_d.shape[0]

    @property
    def n_subbands(self) -> int:
        return self.h_d.shape[1]

    @property
    def n_irs_elements(self) -> int:
        return self.V.shape[2]

    def cfr_matrix(self, theta: IrsVector | np.ndarray) -> np.ndarray:
        """All C[k, m](theta) as a (K, M) complex array."""
        vec = theta.theta if isinstance(theta, IrsVector) else np.asarray(theta, complex)
        if vec.size != self.n_irs_elements:
            raise ValueError(
                f"theta has {vec.size} entries, channel has {self.n_irs_elements} elements"
            )
        if vec.size == 0:
            return self.direct_cfr.copy()
        return self.direct_cfr + self.reflect_cfr @ vec

    def gains(self, theta: IrsVector | np.ndarray) -> np.ndarray:
        """|C[k, m](theta)|^2 as a (K, M) real array."""
        c = self.cfr_matrix(theta)
        return (c * c.conj()).real

    def without_reflection(self) -> "ChannelSet":
        """Copy with the reflected link forced to zero (keeps the direct draws)."""
        return ChannelSet(h_d=self.h_d.copy(), V=np.zeros_like(self.V), dft=self.dft.copy())


def dft_matrix(m: int) -> np.ndarray:
    """M rows f_m^H of the unnormalized M-point DFT: entries exp(-2j*pi*m*l/M)."""
    idx = np.arange(m)
    return np.exp(-2j * np.pi * np.outer(idx, idx) / m)


def sample_geometry(params: SystemParams, rng: np.random.Generator) -> Geometry:
    """Place the HAP, the IRS, and K devices uniformly on the device disk.

    The HAP sits at the origin, the IRS on the x-axis at distance d1 + d2,
    and the device circle center at distance d1 from the HAP (d2 from the
    IRS) along that axis.
    """
    hap = np.array([0.0, 0.0])
    irs = np.array([params.d1 + params.d2, 0.0])
    center = np.array([params.d1, 0.0])
    radii = params.device_circle_radius * np.sqrt(rng.uniform(size=params.n_devices))
    angles = rng.uniform(0.0, 2.0 * np.pi, size=params.n_devices)
    devices = center + np.column_stack([radii * np.cos(angles), radii * np.sin(angles)])
    return Geometry(hap, irs, devices, center)


def path_loss_gain(distance: float, beta: float, params: SystemParams) -> float:
    """Linear channel power gain: -PL0 - 10*beta*log10(d/d0) in dB."""
    if distance < params.d0:
        raise ValueError(
            f"distance {distance} m is below the reference distance {params.d0} m"
        )
    pl_db = -params.pl0_db - 10.0 * beta * np.log10(distance / params.d0)
    return float(10.0 ** (pl_db / 10.0))


def sample_cir(num_taps: int, gain: float, rng: np.random.Generator) -> np.ndarray:
    """Draw i.i.d. CN(0, gain/num_taps) taps so the expected total power is `gain`."""
    if num_taps < 1:
        raise ValueError("num_taps must be at least 1")
    if gain <= 0:
        raise ValueError("gain must be strictly positive")
    scale = np.sqrt(gain / (2.0 * num_taps))
    return scale * (
        rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps)
    )


def compose_reflection(r_kn: np.ndarray, g_n: np.ndarray, m: int) -> np.ndarray:
    """Zero-padded linear convolution r_kn * g_n of length m."""
    r_kn = np.asarray(r_kn, dtype=complex)
    g_n = np.asarray(g_n, dtype=complex)
    full_len = r_kn.size + g_n.size - 1
    if full_len > m:
        raise ValueError(
            f"convolution length {full_len} exceeds the sub-band count {m}"
        )
    out = np.zeros(m, dtype=complex)
    out[:full_len] = np.convolve(r_kn, g_n)
    return out


def build_channels(params: SystemParams, geometry: Geometry, seed) -> ChannelSet:
    """Synthesize the direct CIRs and reflection matrices for one block.

    `seed` may be an int or a ``numpy.random.SeedSequence``; per-link
    substreams are derived from it with fixed keys, so the direct channels
    are unchanged when only the element count differs.  All N elements
    share the single IRS reference point for distance computation.
    """
    k_dev = params.n_devices
    m = params.n_subbands
    n = params.n_irs_elements
    reflected_len = params.taps_irs_hap + params.taps_device_irs - 1
    if max(params.taps_direct, reflected_len) > m:
        raise ValueError("delay spread exceeds the cyclic-prefix assumption")

    dist_ia = float(np.linalg.norm(geometry.irs_position - geometry.hap_position))
    gain_ia = path_loss_gain(dist_ia, params.beta_ia, params)

    h_d = np.zeros((k_dev, m), dtype=complex)
    v = np.zeros((k_dev, m, n), dtype=complex)

    g_taps = [
        sample_cir(params.taps_irs_hap, gain_ia, _substream(seed, _KEY_IRS_HAP, j))
        for j in range(n)
    ]
    for k in range(k_dev):
        pos = geometry.device_positions[k]
        # devices may wander inside the reference distance; the gain is
        # floored at its reference value there (far-field model limit)
        dist_ua = max(float(np.linalg.norm(pos - geometry.hap_position)), params.d0)
        dist_ui = max(float(np.linalg.norm(pos - geometry.irs_position)), params.d0)
        gain_ua = path_loss_gain(dist_ua, params.beta_ua, params)
        gain_ui = path_loss_gain(dist_ui, params.beta_ui, params)
        h_d[k, : params.taps_direct] = sample_cir(
            params.taps_direct, gain_ua, _substream(seed, _KEY_DIRECT, k)
        )
        for j in range(n):
            r_taps = sample_cir(
                params.taps_device_irs, gain_ui, _substream(seed, _KEY_DEVICE_IRS, k, j)
            )
            v[k, :, j] = compose_reflection(r_taps, g_taps[j], m)

    return ChannelSet(h_d=h_d, V=v, dft=dft_matrix(m))


def cfr(ch: ChannelSet, k: int, m: int, theta: IrsVector | np.ndarray) -> complex:
    """Frequency response C[k, m](theta) of device k on sub-band m."""
    if not 0 <= k < ch.n_devices:
        raise IndexError(f"device index {k} out of range")
    if not 0 <= m < ch.n_subbands:
        raise IndexError(f"sub-band index {m} out of range")
    vec = theta.theta if isinstance(theta, IrsVector) else np.asarray(theta, complex)
    if vec.size == 0:
        return complex(ch.direct_cfr[k, m])
    return complex(ch.direct_cfr[k, m] + ch.reflect_cfr[k, m] @ vec)


def make_instance(params: SystemParams, seed):
    """One deterministic trial: sampled tasks, geometry, and channels.

    Returns ``(params_with_tasks, geometry, channels)``.
    """
    params = params.with_sampled_tasks(_substream(seed, _KEY_TASKS))
    geometry = sample_geometry(params, _substream(seed, _KEY_GEOMETRY))
    channels = build_channels(params, geometry, seed)
    return params, geometry, channels
