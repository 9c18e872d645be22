"""Planar array layouts, rate-optimal antenna spacing, and aperture checks.

Coordinates live in 3-D with the z axis along the communication link. The
transmit plane passes through the origin; the receive plane through
(0, 0, D). Antennas are enumerated m = m_v * n_h + m_h, vertical index
major, so vertical factors come first in Kronecker identities downstream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

DEGENERATE_PLANE_TOL = 1e-6
# dimensionless floor arguments sit exactly on integer edges at the optimal
# spacing; the nudge keeps rounding noise from dropping a whole stream pair
FLOOR_NUDGE = 1e-9


class OddStreamCountError(ValueError):
    pass


class StreamExceedsArrayError(ValueError):
    pass


class DegeneratePlaneError(ValueError):
    pass


class LayoutKind(enum.Enum):
    PARALLELOGRAM_OPTIMAL = "parallelogram"
    ROTATED_UPA = "rotated-upa"


class Side(enum.Enum):
    TX = "tx"
    RX = "rx"


@dataclass(frozen=True)
class ArraySpec:
    """Logical planar-array parameters before realization in 3-D."""

    n_v: int
    n_h: int
    d_v: float
    d_h: float
    theta: float = 0.0
    phi: float = 0.0
    layout_kind: LayoutKind = LayoutKind.PARALLELOGRAM_OPTIMAL

    def __post_init__(self):
        if self.n_v < 1 or self.n_h < 1:
            raise ValueError(f"element counts must be >= 1, got {self.n_v}x{self.n_h}")
        if self.d_v <= 0 or self.d_h <= 0:
            raise ValueError(f"spacings must be positive, got {self.d_v}, {self.d_h}")

    @property
    def count(self) -> int:
        return self.n_v * self.n_h


@dataclass(frozen=True)
class AntennaLayout:
    """Realized antenna positions: 3 x K matrix of Cartesian coordinates in meters.

    Receive-side layouts carry the link distance as a z offset, so coords
    are absolute for both sides.
    """

    coords: np.ndarray
    side: Side
    link_distance: float
    n_v: int
    n_h: int

    @property
    def count(self) -> int:
        return self.coords.shape[1]


@dataclass(frozen=True)
class SpacingSolution:
    """Per-axis spacing pair realizing an even per-axis stream count."""

    d_t: float
    d_r: float
    delta: float
    achieved_streams: int


def stream_floor(x: float) -> int:
    """Floor with a nudge for arguments designed to land on integer edges."""
    return int(math.floor(x + FLOOR_NUDGE))


def optimal_spacing(
    n_i: int,
    m_i: int,
    ns_i: int,
    wavelength: float,
    distance: float,
    split: float = 1.0,
) -> SpacingSolution:
    """Spacing pair whose product supports exactly ns_i streams on one axis.

    The attainable per-axis stream count is 2*floor(d_t d_r N M / (2 lambda D)),
    always even; the returned product sits at the lower edge of the floor
    interval so exactly ns_i streams are realized. ``split`` fixes the
    otherwise free ratio d_t / d_r.
    """
    if ns_i % 2 != 0 or ns_i < 2:
        raise OddStreamCountError(
            f"per-axis stream count must be even and >= 2, got {ns_i}"
        )
    if ns_i > min(n_i, m_i):
        raise StreamExceedsArrayError(
            f"ns_i={ns_i} exceeds min(n_i, m_i)={min(n_i, m_i)}"
        )
    if wavelength <= 0 or distance <= 0:
        raise ValueError("wavelength and distance must be positive")
    if not 0 < split <= 1:
        raise ValueError(f"split must lie in (0, 1], got {split}")
    product = ns_i * wavelength * distance / (n_i * m_i)
    d_t = math.sqrt(product * split)
    d_r = math.sqrt(product / split)
    n_max = max(n_i, m_i)
    delta = d_t * d_r * n_max / (wavelength * distance)
    achieved = 2 * stream_floor(d_t * d_r * n_i * m_i / (2 * wavelength * distance))
    return SpacingSolution(d_t=d_t, d_r=d_r, delta=delta, achieved_streams=achieved)


def _rotation_xy(theta: float, phi: float) -> np.ndarray:
    # rigid rotation about x by theta, then about y by phi
    ct, st = math.cos(theta), math.sin(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    rot_x = np.array([[1.0, 0.0, 0.0], [0.0, ct, -st], [0.0, st, ct]])
    rot_y = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    return rot_y @ rot_x


def build_layout(spec: ArraySpec, side: Side, distance: float) -> AntennaLayout:
    """Realize an ArraySpec as 3-D antenna coordinates.

    Parallelogram layouts keep the xy grid of the parallel setup and shear
    the z coordinate so every element stays on the tilted array plane.
    Rotated-UPA layouts rigidly rotate the flat grid instead (the baseline
    geometry a conventional tilted array would have).
    """
    idx = np.arange(spec.count)
    mv = idx // spec.n_h
    mh = idx % spec.n_h
    x = spec.d_v * mv.astype(float)
    y = spec.d_h * mh.astype(float)

    if spec.layout_kind is LayoutKind.PARALLELOGRAM_OPTIMAL:
        cc = math.cos(spec.theta) * math.cos(spec.phi)
        if abs(cc) <= DEGENERATE_PLANE_TOL:
            raise DegeneratePlaneError(
                f"|cos(theta) cos(phi)| = {abs(cc):.2e}: array plane contains the link axis"
            )
        shear = math.cos(spec.theta) * math.sin(spec.phi) * x + math.sin(spec.theta) * y
        z = shear / (-cc) if side is Side.TX else shear / cc
        coords = np.vstack([x, y, z])
    else:
        flat = np.vstack([x, y, np.zeros_like(x)])
        coords = _rotation_xy(spec.theta, spec.phi) @ flat

    if side is Side.RX:
        coords = coords + np.array([[0.0], [0.0], [distance]])
    return AntennaLayout(
        coords=coords,
        side=side,
        link_distance=distance,
        n_v=spec.n_v,
        n_h=spec.n_h,
    )


def aperture(layout: AntennaLayout) -> float:
    """Largest Euclidean distance between two elements of the array."""
    c = layout.coords
    if c.shape[1] == 1:
        return 0.0
    diff = c.T[:, None, :] - c.T[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).max())


def aperture_feasible(
    l_t: float, l_r: float, ns: int, wavelength: float, distance: float
) -> bool:
    """True iff the aperture product can support ns streams: Lt*Lr >= 2 sqrt(ns) lambda D.

    The inequality is closed at the boundary; a relative slack of 1e-9
    keeps optimally sized arrays, which land exactly on it, feasible under
    rounding.
    """
    if min(l_t, l_r, wavelength, distance) <= 0 or ns < 1:
        raise ValueError("apertures, wavelength, distance must be positive and ns >= 1")
    threshold = 2.0 * math.sqrt(ns) * wavelength * distance
    return l_t * l_r >= threshold * (1.0 - 1e-9)


def nominal_extent(n_v: int, n_h: int, d_v: float, d_h: float) -> float:
    """Grid-extent aperture sqrt((n_v d_v)^2 + (n_h d_h)^2).

    Counts full element pitches rather than realized corner distances; this
    is the scale on which the feasibility threshold is exact for optimally
    spaced arrays.
    """
    return math.sqrt((n_v * d_v) ** 2 + (n_h * d_h) ** 2)
