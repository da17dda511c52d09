"""Air-to-ground propagation and MIMO signal model.

Scalar link-budget chain: geometry -> elevation angle -> LoS probability ->
path loss -> SINR -> spectral rate, all pure functions. Complex matrices
(channel draws, two-hop MIMO relay with a cubic-term receiver nonlinearity)
are plain numpy complex arrays.

All SINR arithmetic is in linear watts; dB appears only at the path-loss
interface.
"""

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 3.0e8  # m/s
RAD2DEG = 180.0 / math.pi


@dataclass(frozen=True)
class ChannelParams:
    """Propagation constants for the air-to-ground model.

    Defaults are the simulation parameters of the target setup: dense-ish
    suburban environment factors, 6 GHz carrier, 1/20 dB LoS/NLoS excess.
    """

    mu: float = 9.6              # environment factor (dimensionless)
    psi: float = 0.15            # environment factor (per degree)
    eta_los: float = 1.0         # LoS excess loss, dB
    eta_nlos: float = 20.0       # NLoS excess loss, dB
    carrier_hz: float = 6.0e9
    light_speed: float = SPEED_OF_LIGHT
    noise_power: float = 1.0e-12  # receiver noise, linear watts
    beta: float = 0.01           # receiver nonlinearity coefficient
    noise_sigma: float = 0.0     # downlink additive noise std per entry

    def __post_init__(self):
        if not (self.mu > 0 and self.psi > 0):
            raise ValueError("environment factors mu, psi must be positive")
        if not (self.carrier_hz > 0 and self.light_speed > 0):
            raise ValueError("carrier_hz and light_speed must be positive")
        if not (0 <= self.eta_los <= self.eta_nlos):
            raise ValueError("require 0 <= eta_los <= eta_nlos")
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        if self.noise_sigma < 0 or self.beta < 0:
            raise ValueError("noise_sigma and beta must be non-negative")


@dataclass(frozen=True)
class LinkGeometry:
    """One UAV-to-ground (or UAV-to-tower) link: vertical separation,
    ground-plane distance, 3-D distance and elevation angle."""

    altitude_m: float
    horizontal_m: float
    distance_m: float
    elevation_rad: float

    @classmethod
    def from_altitude_horizontal(cls, altitude_m, horizontal_m):
        if not (math.isfinite(altitude_m) and math.isfinite(horizontal_m)):
            raise ValueError("geometry inputs must be finite")
        if altitude_m <= 0 or horizontal_m < 0:
            raise ValueError("require altitude_m > 0 and horizontal_m >= 0")
        distance = math.sqrt(altitude_m * altitude_m + horizontal_m * horizontal_m)
        return cls(
            altitude_m=altitude_m,
            horizontal_m=horizontal_m,
            distance_m=distance,
            elevation_rad=elevation_angle(altitude_m, horizontal_m),
        )


def elevation_angle(altitude_m, horizontal_m):
    """Elevation angle arctan(h / l) in radians; pi/2 when directly overhead."""
    if not (math.isfinite(altitude_m) and math.isfinite(horizontal_m)):
        raise ValueError("elevation_angle inputs must be finite")
    if altitude_m <= 0 or horizontal_m < 0:
        raise ValueError("require altitude_m > 0 and horizontal_m >= 0")
    return math.atan2(altitude_m, horizontal_m)


def los_probability(elevation_rad, params):
    """Line-of-sight probability 1 / (1 + mu * exp(-psi * (theta_deg - mu))).

    Strictly increasing in the elevation angle.
    """
    if not math.isfinite(elevation_rad) or not 0 < elevation_rad <= math.pi / 2:
        raise ValueError("elevation_rad must lie in (0, pi/2]")
    theta_deg = elevation_rad * RAD2DEG
    return 1.0 / (1.0 + params.mu * math.exp(-params.psi * (theta_deg - params.mu)))


def path_loss_db(geometry, params):
    """Total path loss in dB: free-space term plus the LoS/NLoS excess mixture.

    PL = 20 log10(4 pi f_c d / c) + P_LoS * eta_LoS + (1 - P_LoS) * eta_NLoS
    """
    if geometry.distance_m <= 0:
        raise ValueError("distance must be positive (log singularity at d = 0)")
    p_los = los_probability(geometry.elevation_rad, params)
    free_space = 20.0 * math.log10(
        4.0 * math.pi * params.carrier_hz * geometry.distance_m / params.light_speed
    )
    return free_space + p_los * params.eta_los + (1.0 - p_los) * params.eta_nlos


def sinr(received_power_w, noise_power_w, interference_w=()):
    """Linear SINR: P / (noise + sum of interference powers)."""
    if received_power_w < 0:
        raise ValueError("received power must be non-negative")
    if noise_power_w <= 0:
        raise ValueError("noise power must be positive")
    total_interference = 0.0
    for p in interference_w:
        if p < 0:
            raise ValueError("interference powers must be non-negative")
        total_interference += p
    return received_power_w / (noise_power_w + total_interference)


def spectral_rate(sinr_linear):
    """Shannon spectral efficiency log2(1 + SINR) in bits/s/Hz."""
    if sinr_linear < 0:
        raise ValueError("SINR must be non-negative")
    return math.log2(1.0 + sinr_linear)


def link_rate(geometry, params, tx_power_w, interference_w=()):
    """Spectral rate of one link: transmit power through the path loss,
    then SINR against the configured noise floor and given interference."""
    pl_db = path_loss_db(geometry, params)
    received = tx_power_w * 10.0 ** (-pl_db / 10.0)
    return spectral_rate(sinr(received, params.noise_power, interference_w))


def db_to_linear(x_db):
    return 10.0 ** (x_db / 10.0)


def draw_channel(n_tx, n_rx, rng):
    """i.i.d. circularly-symmetric complex Gaussian channel matrix,
    unit variance per entry (Rayleigh-fading magnitudes)."""
    if n_tx < 1 or n_rx < 1:
        raise ValueError("channel dimensions must be at least 1")
    scale = math.sqrt(0.5)
    return scale * (
        rng.standard_normal((n_tx, n_rx)) + 1j * rng.standard_normal((n_tx, n_rx))
    )


def _as_complex_matrix(x, name):
    arr = np.asarray(x, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix")
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError(f"{name} must have finite entries")
    return arr


def mimo_uplink(x, h_ul, beta):
    """Uplink through the UAV receiver: X @ H_UL + (3/2) beta |X|^2.

    The cubic-term distortion |X|^2 is elementwise on X, so with beta > 0
    the transmit and receive widths must match for the sum to conform.
    """
    x = _as_complex_matrix(x, "x")
    h_ul = _as_complex_matrix(h_ul, "h_ul")
    if x.shape[1] != h_ul.shape[0]:
        raise ValueError(
            f"shape mismatch: x is {x.shape}, h_ul is {h_ul.shape}"
        )
    linear = x @ h_ul
    if beta == 0:
        return linear
    if x.shape[1] != h_ul.shape[1]:
        raise ValueError(
            "nonlinear term |X|^2 only conforms when n_tx == n_rx "
            f"(got {x.shape[1]} != {h_ul.shape[1]})"
        )
    return linear + 1.5 * beta * (np.abs(x) ** 2)


def mimo_downlink(y_ul, h_dl, noise_sigma, rng):
    """Downlink relay hop: Y_UL @ H_DL plus complex AWGN of the given
    per-entry standard deviation."""
    y_ul = _as_complex_matrix(y_ul, "y_ul")
    h_dl = _as_complex_matrix(h_dl, "h_dl")
    if y_ul.shape[1] != h_dl.shape[0]:
        raise ValueError(
            f"shape mismatch: y_ul is {y_ul.shape}, h_dl is {h_dl.shape}"
        )
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be non-negative")
    out = y_ul @ h_dl
    if noise_sigma > 0:
        shape = out.shape
        noise = noise_sigma * math.sqrt(0.5) * (
            rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        )
        out = out + noise
    return out


# Vectorized twins of the scalar chain, used by the objective-landscape scan
# where thousands of links are evaluated per grid point. Kept numerically
# equivalent to the scalar functions (see tests).

def elevation_angle_np(altitude_m, horizontal_m):
    return np.arctan2(altitude_m, horizontal_m)


def path_loss_db_np(altitude_m, horizontal_m, params):
    altitude_m = np.asarray(altitude_m, dtype=float)
    horizontal_m = np.asarray(horizontal_m, dtype=float)
    distance = np.sqrt(altitude_m * altitude_m + horizontal_m * horizontal_m)
    if np.any(distance <= 0):
        raise ValueError("distance must be positive (log singularity at d = 0)")
    theta_deg = np.arctan2(altitude_m, horizontal_m) * RAD2DEG
    p_los = 1.0 / (1.0 + params.mu * np.exp(-params.psi * (theta_deg - params.mu)))
    free_space = 20.0 * np.log10(
        4.0 * np.pi * params.carrier_hz * distance / params.light_speed
    )
    return free_space + p_los * params.eta_los + (1.0 - p_los) * params.eta_nlos
