"""Log-distance path loss with Gaussian shadowing and jammer interference.

Received power over distance d (metres):

    rx = tx_power - [PL0 + 10*gamma*log10(d/d0) + N(0, sigma)] - wall losses

A transfer succeeds when rx minus the interference-plus-noise level (power
sum of the noise floor and every active jammer seen at the receiver) meets
the SNR threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class RadioParams:
    exponent: float = 2.5  # signal loss exponent
    tx_power: float = 12.0  # dBm
    shadow_sigma: float = 3.0  # dB
    ref_distance: float = 1.0  # m
    ref_loss: float = 40.0  # dB at ref_distance
    noise_floor: float = -95.0  # dBm
    snr_threshold: float = 10.0  # dB
    # Default jammer transmit power.  Chosen so the jamming radius (the
    # distance where mean received jammer power falls to -71.25 dBm) is
    # ~43 m: wide enough that straight relay chains through a jammed
    # centre are both defeated and detectable, narrow enough that bowed
    # chains around the area keep workable link budgets.
    jammer_power: float = 9.5  # dBm

    def __post_init__(self):
        if self.exponent <= 0 or self.ref_distance <= 0 or self.shadow_sigma < 0:
            raise ValueError("invalid radio parameters")

    def mean_loss(self, d: float) -> float:
        d = max(d, self.ref_distance)
        return self.ref_loss + 10.0 * self.exponent * math.log10(d / self.ref_distance)

    def mean_received(self, tx_power: float, d: float, wall_att: float = 0.0) -> float:
        return tx_power - self.mean_loss(d) - wall_att

    def jam_radius(self, jammer_power: float | None = None,
                   level: float = -71.25) -> float:
        """Distance at which mean received jammer power drops to `level`."""
        p = self.jammer_power if jammer_power is None else jammer_power
        return self.ref_distance * 10.0 ** (
            (p - self.ref_loss - level) / (10.0 * self.exponent)
        )


def path_loss(params: RadioParams, tx_pos, rx_pos, walls, rng) -> float:
    """Received power (dBm) for one transmission attempt, shadowing drawn."""
    d = math.hypot(tx_pos[0] - rx_pos[0], tx_pos[1] - rx_pos[1])
    att = walls.attenuation(tx_pos, rx_pos) if walls is not None else 0.0
    shadow = rng.gauss(0.0, params.shadow_sigma) if params.shadow_sigma > 0 else 0.0
    return params.mean_received(params.tx_power, d, att) - shadow


def power_sum_dbm(levels) -> float:
    total = 0.0
    for v in levels:
        total += 10.0 ** (v / 10.0)
    return 10.0 * math.log10(total)


def interference_dbm(params: RadioParams, jam_levels) -> float:
    """Power sum of the noise floor and received jammer levels (dBm)."""
    return power_sum_dbm([params.noise_floor, *jam_levels])


def link_ok(params: RadioParams, received: float, interference: float) -> bool:
    return received - interference >= params.snr_threshold
