"""Ensemble geometries, position sampling, and the diffraction boundary angle."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import DiluteWarning, DomainError

#: FWHM of a Gaussian = FWHM_FACTOR * sigma
FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass(frozen=True)
class Gaussian2D:
    """Quasi-2D cloud in the x-y plane with the given transverse FWHM."""

    fwhm: float  # m

    def __post_init__(self):
        if self.fwhm <= 0:
            raise DomainError(f"fwhm must be positive, got {self.fwhm}")


@dataclass(frozen=True)
class Gaussian1D:
    """Line cloud along x with the given FWHM (the Fig.-4 focus line)."""

    fwhm: float  # m

    def __post_init__(self):
        if self.fwhm <= 0:
            raise DomainError(f"fwhm must be positive, got {self.fwhm}")


@dataclass(frozen=True)
class Slab:
    """Uniform box: transverse size ``a`` (x and y), thickness ``h`` (z)."""

    a: float  # m
    h: float  # m

    def __post_init__(self):
        if self.a <= 0 or self.h <= 0:
            raise DomainError("slab dimensions must be positive")


@dataclass(frozen=True)
class Lattice:
    """Regular lattice with equal spacing, centered on the origin."""

    spacing: float  # m
    dims: tuple[int, ...] = field(default=(2, 1, 1))

    def __post_init__(self):
        if self.spacing <= 0:
            raise DomainError("lattice spacing must be positive")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or any(d < 1 for d in dims):
            raise DomainError(f"lattice dims must be three integers >= 1, got {self.dims}")
        object.__setattr__(self, "dims", dims)


Geometry = Union[Gaussian2D, Gaussian1D, Slab, Lattice]


def transverse_size(geometry: Geometry) -> float:
    """The transverse extent A entering the boundary angle."""
    if isinstance(geometry, (Gaussian2D, Gaussian1D)):
        return geometry.fwhm
    if isinstance(geometry, Slab):
        return geometry.a
    if isinstance(geometry, Lattice):
        nx, ny, _ = geometry.dims
        return geometry.spacing * max(max(nx, ny) - 1, 1)
    raise DomainError(f"unknown geometry {geometry!r}")


def longitudinal_size(geometry: Geometry) -> Optional[float]:
    """The thickness H along the drive axis, or None for flat geometries."""
    if isinstance(geometry, Slab):
        return geometry.h
    if isinstance(geometry, Lattice):
        _, _, nz = geometry.dims
        return geometry.spacing * (nz - 1) if nz > 1 else None
    return None


def boundary_angle(k0: float, a: float, h: Optional[float] = None) -> float:
    """Angular half-width of the sharp feature: min{sqrt(pi/(k0 H)), 2 pi/(k0 A)}.

    For flat (quasi-2D) ensembles H is absent and only the transverse
    branch applies.
    """
    if k0 <= 0 or a <= 0 or (h is not None and h <= 0):
        raise DomainError("boundary_angle needs positive k0, A (and H if given)")
    transverse = 2.0 * math.pi / (k0 * a)
    if h is None:
        return transverse
    return min(math.sqrt(math.pi / (k0 * h)), transverse)


@dataclass(frozen=True)
class EnsemblePositions:
    """Sampled atom coordinates plus the geometry they were drawn from."""

    coordinates: np.ndarray  # (N, 3) meters
    geometry: Geometry
    k0: float  # rad/m
    rng_seed: int

    def __post_init__(self):
        coords = np.asarray(self.coordinates, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise DomainError(f"coordinates must be (N, 3), got {coords.shape}")
        if coords.shape[0] < 2:
            raise DomainError("need at least 2 atoms")
        if not np.all(np.isfinite(coords)):
            raise DomainError("coordinates must be finite")
        if self.k0 <= 0:
            raise DomainError("k0 must be positive")
        coords.setflags(write=False)
        object.__setattr__(self, "coordinates", coords)
        if isinstance(self.geometry, Gaussian1D):
            bound = self.k0 * self.geometry.fwhm
            if coords.shape[0] > bound:
                warnings.warn(
                    f"N={coords.shape[0]} exceeds the 1D dilute bound "
                    f"k0*A={bound:.4g}; multiple scattering is no longer "
                    "perturbative",
                    DiluteWarning, stacklevel=2,
                )

    @property
    def n_atoms(self) -> int:
        return self.coordinates.shape[0]

    @property
    def theta_b(self) -> float:
        return boundary_angle(
            self.k0, transverse_size(self.geometry), longitudinal_size(self.geometry)
        )


def sample_positions(
    geometry: Geometry, n_atoms: int, k0: float, rng_seed: int
) -> EnsemblePositions:
    """Draw N atom positions for the given geometry, deterministically in the seed."""
    if n_atoms < 2:
        raise DomainError("need at least 2 atoms")
    rng = np.random.default_rng(rng_seed)
    coords = np.zeros((n_atoms, 3))
    if isinstance(geometry, Gaussian2D):
        sigma = geometry.fwhm / FWHM_FACTOR
        coords[:, 0] = rng.normal(0.0, sigma, n_atoms)
        coords[:, 1] = rng.normal(0.0, sigma, n_atoms)
    elif isinstance(geometry, Gaussian1D):
        sigma = geometry.fwhm / FWHM_FACTOR
        coords[:, 0] = rng.normal(0.0, sigma, n_atoms)
    elif isinstance(geometry, Slab):
        coords[:, 0] = rng.uniform(-geometry.a / 2, geometry.a / 2, n_atoms)
        coords[:, 1] = rng.uniform(-geometry.a / 2, geometry.a / 2, n_atoms)
        coords[:, 2] = rng.uniform(-geometry.h / 2, geometry.h / 2, n_atoms)
    elif isinstance(geometry, Lattice):
        nx, ny, nz = geometry.dims
        if nx * ny * nz != n_atoms:
            raise DomainError(
                f"lattice dims {geometry.dims} hold {nx * ny * nz} atoms, "
                f"not {n_atoms}"
            )
        axes = [
            geometry.spacing * (np.arange(n) - (n - 1) / 2.0) for n in (nx, ny, nz)
        ]
        grid = np.meshgrid(*axes, indexing="ij")
        coords = np.stack([g.ravel() for g in grid], axis=1)
    else:
        raise DomainError(f"unknown geometry {geometry!r}")
    return EnsemblePositions(coords, geometry, k0, rng_seed)
