"""Sampling designs (site sets) and single-event field observations.

Fields are represented discretely at L sites. Integral risk functionals
become weighted sums, with quadrature weights taken as cell areas; on a
uniform grid the weights are uniform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True, eq=False)
class SiteSet:
    """L sites in the plane (km), with an optional time coordinate (hours).

    For space-time designs the sites are ordered slice by slice: site index
    ``t_idx * n_spatial + s_idx``. ``grid_shape = (ny, nx)`` marks a full
    rectangular spatial grid in row-major order, which Fourier-filtered risk
    functionals require.
    """

    coords: np.ndarray                      # (L, 2) km
    times: np.ndarray | None = None         # (L,) hours
    grid_shape: tuple[int, int] | None = None
    n_spatial: int | None = None            # set for space-time designs
    site_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        coords = np.atleast_2d(np.asarray(self.coords, dtype=float))
        if coords.ndim != 2 or coords.shape[1] != 2:
            raise ValueError(f"coords must be (L, 2), got {coords.shape}")
        object.__setattr__(self, "coords", coords)
        if self.times is not None:
            times = np.asarray(self.times, dtype=float)
            if times.shape != (coords.shape[0],):
                raise ValueError("times must have one entry per site")
            object.__setattr__(self, "times", times)
        if self.grid_shape is not None:
            ny, nx = self.grid_shape
            if ny * nx != self.n_per_slice:
                raise ValueError("grid_shape inconsistent with number of sites")
        if self.site_ids is not None and len(self.site_ids) != coords.shape[0]:
            raise ValueError("site_ids must have one entry per site")

    @property
    def L(self) -> int:
        return self.coords.shape[0]

    @property
    def has_time(self) -> bool:
        return self.times is not None

    @property
    def n_times(self) -> int:
        if self.n_spatial is None:
            return 1
        return self.L // self.n_spatial

    @property
    def n_per_slice(self) -> int:
        return self.L if self.n_spatial is None else self.n_spatial

    def ids(self) -> tuple[str, ...]:
        if self.site_ids is not None:
            return self.site_ids
        return tuple(f"s{i}" for i in range(self.L))

    def pair_lags(self) -> tuple[np.ndarray, np.ndarray]:
        """All pairwise lags: spatial (L, L, 2) and temporal (L, L)."""
        ds = self.coords[:, None, :] - self.coords[None, :, :]
        if self.times is None:
            dt = np.zeros((self.L, self.L))
        else:
            dt = self.times[:, None] - self.times[None, :]
        return ds, dt

    def slice_indices(self, t_idx: int) -> np.ndarray:
        if self.n_spatial is None:
            raise ValueError("not a space-time site set")
        return np.arange(t_idx * self.n_spatial, (t_idx + 1) * self.n_spatial)

    @classmethod
    def from_grid(cls, nx: int, ny: int, dx: float = 1.0, dy: float = 1.0) -> "SiteSet":
        """Full rectangular grid, row-major (y outer, x inner)."""
        xs = np.arange(nx) * dx
        ys = np.arange(ny) * dy
        gx, gy = np.meshgrid(xs, ys)
        coords = np.column_stack([gx.ravel(), gy.ravel()])
        return cls(coords=coords, grid_shape=(ny, nx))

    @classmethod
    def line(cls, n: int, spacing: float = 1.0) -> "SiteSet":
        coords = np.column_stack([np.arange(n) * spacing, np.zeros(n)])
        return cls(coords=coords)

    @classmethod
    def space_time(cls, spatial: "SiteSet", time_values) -> "SiteSet":
        """Replicate a spatial design over time slices (slice-major order)."""
        tv = np.asarray(time_values, dtype=float)
        coords = np.tile(spatial.coords, (tv.size, 1))
        times = np.repeat(tv, spatial.L)
        return cls(coords=coords, times=times, grid_shape=spatial.grid_shape,
                   n_spatial=spatial.L)


@dataclass(frozen=True, eq=False)
class FieldObservation:
    """One event: a real value at each site, plus an identifier/time stamp."""

    values: np.ndarray
    event_id: int | str = 0
    time: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float).ravel())


def as_values(x) -> np.ndarray:
    """Accept a FieldObservation or an array-like; return the value vector."""
    if isinstance(x, FieldObservation):
        return x.values
    return np.asarray(x, dtype=float)
