"""Spherical-wavefront LoS channel construction and its quadratic-phase factors.

The exact channel carries the full Euclidean distance phase per antenna
pair. Its second-order expansion in 1/D separates into per-side diagonal
phase factors and a core matrix that depends only on transverse (xy)
coordinates; that core is what all the spacing and spectrum analysis
operates on.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import AntennaLayout, ArraySpec, Side, aperture, build_layout


class NotParallelError(ValueError):
    pass


@dataclass(frozen=True)
class ChannelParams:
    """Link-level constants; gains and powers only enter through the path-loss scalar."""

    wavelength: float
    distance: float
    tx_gain: float = 1.0
    rx_gain: float = 1.0
    noise_power: float = 1.0
    tx_power: float = 1.0

    def __post_init__(self):
        for name in ("wavelength", "distance", "tx_gain", "rx_gain", "noise_power", "tx_power"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def zeta(self) -> float:
        amp = math.sqrt(self.tx_gain * self.rx_gain) * self.wavelength
        return (amp / (4.0 * math.pi * self.distance)) ** 2


@dataclass(frozen=True)
class ChannelSet:
    """Exact channel, its quadratic-phase core, per-side diagonals, path loss."""

    h_exact: np.ndarray
    h_tilde: np.ndarray
    d_t: np.ndarray
    d_r: np.ndarray
    zeta: float

    def recompose(self) -> np.ndarray:
        """conj(D_r) * h_tilde * D_t, the factored approximation of h_exact."""
        return np.conj(self.d_r)[:, None] * self.h_tilde * self.d_t[None, :]


def exact_channel(tx: AntennaLayout, rx: AntennaLayout, params: ChannelParams) -> np.ndarray:
    """Unit-modulus N x M channel with exact pairwise-distance phases."""
    diff = rx.coords.T[:, None, :] - tx.coords.T[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    return np.exp(-2j * np.pi / params.wavelength * dist)


def taylor_channel(tx: AntennaLayout, rx: AntennaLayout, params: ChannelParams) -> np.ndarray:
    """Channel built from the second-order distance expansion in 1/D."""
    d = params.distance
    tx_x, tx_y, tx_z = tx.coords
    rx_x, rx_y = rx.coords[0], rx.coords[1]
    rx_z = rx.coords[2] - d
    approx = (
        d
        + rx_z[:, None]
        - tx_z[None, :]
        + ((rx_x[:, None] - tx_x[None, :]) ** 2 + (rx_y[:, None] - tx_y[None, :]) ** 2)
        / (2.0 * d)
    )
    return np.exp(-2j * np.pi / params.wavelength * approx)


def fresnel_factors(tx: AntennaLayout, rx: AntennaLayout, params: ChannelParams) -> ChannelSet:
    """Factor the quadratic-phase channel into per-side diagonals and the xy core.

    The recomposition conj(d_r) * h_tilde * d_t reproduces taylor_channel
    exactly; the gap to the exact channel is the Taylor remainder, which
    shrinks as the link distance grows relative to the apertures.
    """
    d = params.distance
    lam = params.wavelength
    big = max(aperture(tx), aperture(rx))
    if big >= d:
        warnings.warn(
            f"aperture {big:.3g} m is not small against distance {d:.3g} m; "
            "quadratic-phase factors may be inaccurate",
            RuntimeWarning,
            stacklevel=2,
        )
    tx_x, tx_y, tx_z = tx.coords
    rx_x, rx_y = rx.coords[0], rx.coords[1]
    rx_z = rx.coords[2] - d
    d_t = np.exp(2j * np.pi / lam * (tx_z - (tx_x**2 + tx_y**2) / (2.0 * d)))
    d_r = np.exp(2j * np.pi / lam * (d + rx_z + (rx_x**2 + rx_y**2) / (2.0 * d)))
    h_tilde = np.exp(
        2j * np.pi / lam * (np.outer(rx_x, tx_x) + np.outer(rx_y, tx_y)) / d
    )
    return ChannelSet(
        h_exact=exact_channel(tx, rx, params),
        h_tilde=h_tilde,
        d_t=d_t,
        d_r=d_r,
        zeta=params.zeta,
    )


def kron_factor_channel(
    spec_tx: ArraySpec, spec_rx: ArraySpec, params: ChannelParams
) -> tuple[np.ndarray, np.ndarray]:
    """Vertical and horizontal linear-array factors of the parallel-UPA core.

    kron(h_linv, h_linh) equals the h_tilde of the full planar pair, thanks
    to the vertical-major element enumeration.
    """
    for spec in (spec_tx, spec_rx):
        if spec.theta != 0.0 or spec.phi != 0.0:
            raise NotParallelError("factorization requires theta = phi = 0 on both sides")
    lam, dist = params.wavelength, params.distance

    def factor(n_rx, d_rx, n_tx, d_tx):
        n = np.arange(n_rx)
        m = np.arange(n_tx)
        return np.exp(2j * np.pi / lam * (d_rx * d_tx * np.outer(n, m)) / dist)

    h_linv = factor(spec_rx.n_v, spec_rx.d_v, spec_tx.n_v, spec_tx.d_v)
    h_linh = factor(spec_rx.n_h, spec_rx.d_h, spec_tx.n_h, spec_tx.d_h)
    return h_linv, h_linh


def gram(h: np.ndarray, side: Side) -> np.ndarray:
    """Channel gain matrix: H*H for the transmit side, HH* for the receive side."""
    h = np.asarray(h, dtype=np.complex128)
    if h.size == 0:
        raise ValueError("expected a non-empty matrix")
    if side is Side.TX:
        return h.conj().T @ h
    return h @ h.conj().T


def prolate_matrix(alpha: float, k_param: int, dim: int) -> np.ndarray:
    """Symmetric sine-ratio matrix whose spectrum concentrates near 0 and 1.

    Entry (i, k) is sin(pi (i-k)(K+1)/alpha) / (alpha sin(pi (i-k)/alpha)).
    Where (i-k)/alpha hits an integer p the ratio is evaluated by its limit
    (K+1)/alpha * (-1)^(p K); the diagonal is the p = 0 case.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if dim < 1 or k_param < 0:
        raise ValueError(f"need dim >= 1 and k_param >= 0, got {dim}, {k_param}")
    i = np.arange(dim)
    d = i[:, None] - i[None, :]
    den = np.sin(np.pi * d / alpha)
    singular = np.abs(den) < 1e-9
    p = np.rint(d / alpha).astype(np.int64)
    sign = np.where((p * k_param) % 2 == 0, 1.0, -1.0)
    limit = (k_param + 1) / alpha * sign
    num = np.sin(np.pi * d * (k_param + 1) / alpha)
    safe_den = np.where(singular, 1.0, den)
    return np.where(singular, limit, num / safe_den / alpha)


def layout_pair(
    spec_tx: ArraySpec, spec_rx: ArraySpec, distance: float
) -> tuple[AntennaLayout, AntennaLayout]:
    """Convenience pair builder used by sweeps and fixtures."""
    return (
        build_layout(spec_tx, Side.TX, distance),
        build_layout(spec_rx, Side.RX, distance),
    )
