"""
Tabulated waveguide bending losses and the ring sizes they allow
"""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from coupler.design import free_spectral_range
from utils.errors import ConfigError, SpecValidationError

logger = logging.getLogger(__name__)

RADIUS_COLUMN = 'radius_m'
TRANSMISSION_COLUMN = 'transmission_per_90deg'


@dataclass(frozen=True)
class BendLossTable:
    """Transmission per 90° bend against bend radius (strictly increasing)"""

    radius: tuple[float, ...]
    transmission: tuple[float, ...]
    tag: str = ''

    def __post_init__(self) -> None:
        radius = tuple(float(r) for r in self.radius)
        transmission = tuple(float(t) for t in self.transmission)
        if not radius:
            raise SpecValidationError("bend-loss table is empty")
        if len(radius) != len(transmission):
            raise SpecValidationError(f"{len(radius)} radii but {len(transmission)} transmissions")
        if any(b <= a for a, b in zip(radius, radius[1:])):
            raise SpecValidationError("bend-loss radii must be strictly increasing")
        if any(not 0.0 <= t <= 1.0 for t in transmission):
            raise SpecValidationError("bend-loss transmissions must lie in [0, 1]")
        object.__setattr__(self, 'radius', radius)
        object.__setattr__(self, 'transmission', transmission)

    def __len__(self) -> int:
        return len(self.radius)


def load_bend_loss_table(path: str, tag: str = '') -> BendLossTable:
    """Read a CSV with columns radius_m, transmission_per_90deg ('#' comments allowed)"""
    if not os.path.exists(path):
        raise ConfigError(f"bend-loss table not found: {path}")
    try:
        frame = pd.read_csv(path, comment='#', skipinitialspace=True)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot parse bend-loss table {path}: {e}") from e
    missing = {RADIUS_COLUMN, TRANSMISSION_COLUMN} - set(frame.columns)
    if missing:
        raise ConfigError(f"bend-loss table {path} lacks column(s): {', '.join(sorted(missing))}")
    frame = frame.sort_values(RADIUS_COLUMN)
    table = BendLossTable(
        radius=tuple(frame[RADIUS_COLUMN].astype(float)),
        transmission=tuple(frame[TRANSMISSION_COLUMN].astype(float)),
        tag=tag or os.path.basename(path),
    )
    logger.info(f"Loaded {len(table)} bend-loss samples from {path}")
    return table


def min_radius_for_loss(table: BendLossTable, min_transmission: float) -> Optional[float]:
    """
    Smallest radius whose transmission per 90° reaches min_transmission

    Interpolates linearly between the first sample meeting the threshold and
    its predecessor. None when no tabulated radius is good enough.
    """
    if not 0.0 <= min_transmission <= 1.0:
        raise SpecValidationError(f"min_transmission must lie in [0, 1], got {min_transmission}")
    transmission = np.asarray(table.transmission)
    hits = np.nonzero(transmission >= min_transmission)[0]
    if hits.size == 0:
        logger.info(f"No radius in table {table.tag!r} reaches transmission {min_transmission}")
        return None
    i = int(hits[0])
    if i == 0:
        return table.radius[0]
    r0, r1 = table.radius[i - 1], table.radius[i]
    t0, t1 = table.transmission[i - 1], table.transmission[i]
    return r0 + (min_transmission - t0) * (r1 - r0) / (t1 - t0)


def max_free_spectral_range(
    table: BendLossTable, min_transmission: float, wavelength: float, group_index: float
) -> Optional[float]:
    """FSR of the smallest ring whose bends meet the transmission threshold"""
    radius = min_radius_for_loss(table, min_transmission)
    if radius is None:
        return None
    return free_spectral_range(wavelength, group_index, radius)
