"""Network-throughput objective over the UAV position.

Sum of per-UE uplink rates plus the rate of the associated fronthaul link,
subject to box constraints on the position, a binary one-hot tower
association, and the fronthaul-capacity condition (fronthaul rate strictly
above the aggregate uplink rate).

Everything here is deterministic (expected-geometry path loss, no intra-cell
sampling) so the landscape is a well-defined scalar field; the grid scan
``nonconvexity_probe`` exposes its strict local maxima.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    LinkGeometry,
    link_rate,
    path_loss_db_np,
    spectral_rate,
)


@dataclass
class NetworkLayout:
    """Ground truth of the serviced network: UE positions and powers, tower
    (CU/DU) sites with receiver heights, and the one-hot association."""

    ue_xy: np.ndarray                 # (I, 2) meters
    ue_tx_power_w: np.ndarray         # (I,)
    cu_xy: np.ndarray                 # (J, 2) meters
    cu_height_m: np.ndarray           # (J,)
    association: np.ndarray           # (J,) binary, exactly one 1
    uav_tx_power_w: float = 1.0

    def __post_init__(self):
        self.ue_xy = np.atleast_2d(np.asarray(self.ue_xy, dtype=float))
        self.ue_tx_power_w = np.atleast_1d(np.asarray(self.ue_tx_power_w, dtype=float))
        self.cu_xy = np.atleast_2d(np.asarray(self.cu_xy, dtype=float))
        self.cu_height_m = np.atleast_1d(np.asarray(self.cu_height_m, dtype=float))
        self.association = np.atleast_1d(np.asarray(self.association))
        if len(self.cu_xy) < 1:
            raise ValueError("need at least one CU/DU site")
        if len(self.ue_xy) != len(self.ue_tx_power_w):
            raise ValueError("ue_xy and ue_tx_power_w lengths differ")
        if len(self.cu_xy) != len(self.cu_height_m):
            raise ValueError("cu_xy and cu_height_m lengths differ")
        if len(self.association) != len(self.cu_xy):
            raise ValueError("association length must match the CU count")
        if not np.all(np.isin(self.association, (0, 1))):
            raise ValueError("association entries must be 0 or 1")
        if self.association.sum() != 1:
            raise ValueError("exactly one association entry must be 1")
        if np.any(self.ue_tx_power_w < 0) or self.uav_tx_power_w < 0:
            raise ValueError("transmit powers must be non-negative")


@dataclass
class PositionBox:
    """Per-axis closed intervals constraining the UAV position."""

    x_range: tuple = (0.0, 400.0)
    y_range: tuple = (0.0, 400.0)
    h_range: tuple = (100.0, 200.0)

    def __post_init__(self):
        for name in ("x_range", "y_range", "h_range"):
            lo, hi = getattr(self, name)
            if not lo <= hi:
                raise ValueError(f"{name} is empty")


def ue_rates(uav_pos, layout, channel_params):
    """Per-UE uplink spectral rates at the given UAV position.

    Every UE transmits at once, so each uplink sees the received powers of
    all other UEs as interference.
    """
    x, y, h = uav_pos
    received = []
    for (ux, uy), p in zip(layout.ue_xy, layout.ue_tx_power_w):
        horizontal = math.hypot(x - ux, y - uy)
        geom = LinkGeometry.from_altitude_horizontal(h, horizontal)
        pl = path_loss_db_np(geom.altitude_m, geom.horizontal_m, channel_params)
        received.append(p * 10.0 ** (-float(pl) / 10.0))
    rates = []
    total = sum(received)
    for p in received:
        interference = total - p
        rates.append(
            spectral_rate(p / (channel_params.noise_power + interference))
        )
    return np.array(rates)


def cu_rates(uav_pos, layout, channel_params):
    """Fronthaul spectral rate from the UAV to each CU/DU site (noise
    limited; the fronthaul band is separate from the access band)."""
    x, y, h = uav_pos
    rates = []
    for (cx, cy), ch_height in zip(layout.cu_xy, layout.cu_height_m):
        horizontal = math.hypot(x - cx, y - cy)
        vertical = abs(h - ch_height)
        geom = LinkGeometry.from_altitude_horizontal(vertical, horizontal)
        rates.append(
            link_rate(geom, channel_params, layout.uav_tx_power_w)
        )
    return np.array(rates)


def throughput_objective(uav_pos, layout, channel_params):
    """Sum of UE uplink rates plus the associated fronthaul rate."""
    r_ue = ue_rates(uav_pos, layout, channel_params)
    r_cu = cu_rates(uav_pos, layout, channel_params)
    return float(r_ue.sum() + (layout.association * r_cu).sum())


def select_cu(uav_pos, layout, channel_params):
    """One-hot association with the highest-rate site (lowest index on ties)."""
    rates = cu_rates(uav_pos, layout, channel_params)
    association = np.zeros(len(rates), dtype=int)
    association[int(np.argmax(rates))] = 1
    return association


@dataclass
class FeasibilityReport:
    """Constraint-by-constraint verdict for one UAV position."""

    x_in_range: bool
    y_in_range: bool
    h_in_range: bool
    fronthaul_ok: bool
    fronthaul_margin: float   # fronthaul rate minus aggregate uplink rate
    association_ok: bool

    @property
    def feasible(self):
        return (
            self.x_in_range
            and self.y_in_range
            and self.h_in_range
            and self.fronthaul_ok
            and self.association_ok
        )

    @property
    def failed_axes(self):
        names = []
        if not self.x_in_range:
            names.append("x")
        if not self.y_in_range:
            names.append("y")
        if not self.h_in_range:
            names.append("h")
        return names


def feasibility_check(uav_pos, layout, box, channel_params):
    """Report (never raise) the constraint status of a candidate position."""
    x, y, h = uav_pos
    r_ue = ue_rates(uav_pos, layout, channel_params)
    r_cu = cu_rates(uav_pos, layout, channel_params)
    fronthaul = float((layout.association * r_cu).sum())
    uplink = float(r_ue.sum())
    return FeasibilityReport(
        x_in_range=box.x_range[0] <= x <= box.x_range[1],
        y_in_range=box.y_range[0] <= y <= box.y_range[1],
        h_in_range=box.h_range[0] <= h <= box.h_range[1],
        fronthaul_ok=fronthaul > uplink,
        fronthaul_margin=fronthaul - uplink,
        association_ok=int(layout.association.sum()) == 1,
    )


@dataclass
class ProbeReport:
    """Scalar objective field over the scan grid plus its strict local maxima
    under the 4-neighborhood (out-of-grid neighbors treated as absent)."""

    xs: np.ndarray                  # (R,) scan coordinates
    ys: np.ndarray                  # (R,)
    altitude_m: float
    field: np.ndarray               # (R, R); field[iy, ix] at (xs[ix], ys[iy])
    local_maxima: list = field(default_factory=list)   # (x, y, value)
    global_max: tuple = None                           # (x, y, value)

    def rows(self):
        """(x, y, objective) rows in scan order, for CSV emission."""
        out = []
        for iy, y in enumerate(self.ys):
            for ix, x in enumerate(self.xs):
                out.append((float(x), float(y), float(self.field[iy, ix])))
        return out


def nonconvexity_probe(layout, box, resolution, channel_params):
    """Evaluate the objective (with best-site association at every point) on
    a regular grid at mid-band altitude and report all strict 4-neighbor
    local maxima. Two or more of them demonstrate a nonconvex landscape."""
    if resolution < 3:
        raise ValueError("resolution must be at least 3 per axis")
    xs = np.linspace(box.x_range[0], box.x_range[1], resolution)
    ys = np.linspace(box.y_range[0], box.y_range[1], resolution)
    h = (box.h_range[0] + box.h_range[1]) / 2.0

    gx, gy = np.meshgrid(xs, ys)                      # (R, R)
    px = gx.ravel()[:, None]                          # (P, 1)
    py = gy.ravel()[:, None]

    # Uplink rates: (P, I)
    ue_dx = px - layout.ue_xy[:, 0][None, :]
    ue_dy = py - layout.ue_xy[:, 1][None, :]
    ue_horiz = np.sqrt(ue_dx * ue_dx + ue_dy * ue_dy)
    ue_pl = path_loss_db_np(h, ue_horiz, channel_params)
    ue_recv = layout.ue_tx_power_w[None, :] * 10.0 ** (-ue_pl / 10.0)
    total_recv = ue_recv.sum(axis=1, keepdims=True)
    ue_sinr = ue_recv / (channel_params.noise_power + total_recv - ue_recv)
    r_ue = np.log2(1.0 + ue_sinr).sum(axis=1)         # (P,)

    # Fronthaul rates: (P, J), association by argmax per point
    cu_dx = px - layout.cu_xy[:, 0][None, :]
    cu_dy = py - layout.cu_xy[:, 1][None, :]
    cu_horiz = np.sqrt(cu_dx * cu_dx + cu_dy * cu_dy)
    cu_vert = np.abs(h - layout.cu_height_m)[None, :] * np.ones_like(cu_horiz)
    cu_pl = path_loss_db_np(cu_vert, cu_horiz, channel_params)
    cu_recv = layout.uav_tx_power_w * 10.0 ** (-cu_pl / 10.0)
    r_cu = np.log2(1.0 + cu_recv / channel_params.noise_power)
    r_fronthaul = r_cu.max(axis=1)

    values = (r_ue + r_fronthaul).reshape(resolution, resolution)

    maxima = []
    for iy in range(resolution):
        for ix in range(resolution):
            v = values[iy, ix]
            higher = True
            for dy, dx in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                jy, jx = iy + dy, ix + dx
                if 0 <= jy < resolution and 0 <= jx < resolution:
                    if values[jy, jx] >= v:
                        higher = False
                        break
            if higher:
                maxima.append((float(xs[ix]), float(ys[iy]), float(v)))

    flat = int(np.argmax(values))
    giy, gix = divmod(flat, resolution)
    report = ProbeReport(
        xs=xs,
        ys=ys,
        altitude_m=h,
        field=values,
        local_maxima=maxima,
        global_max=(float(xs[gix]), float(ys[giy]), float(values[giy, gix])),
    )
    return report
