"""Far-field diffraction images from state statistics ("Eq.-(1)" synthesis).

The detector is parameterized by the small-angle transverse wavevector
plane (k_x, k_y) = k0 * theta * (cos phi, sin phi): peak displacements
are additive there and peak fitting is linear.  The longitudinal
component dk_z = k0 (sqrt(1 - (|k_perp|/k0)^2) - 1) is kept so slab
geometries see their thickness; it vanishes identically for flat clouds.

Per-pixel synthesis is a pure function of immutable inputs, evaluated in
fixed chunk order, so images are bit-identical regardless of evaluation
parallelism.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .geometry import (
    FWHM_FACTOR,
    EnsemblePositions,
    Gaussian1D,
    Gaussian2D,
    boundary_angle,
    longitudinal_size,
    transverse_size,
)
from .states import StateSummary

_CHUNK_ELEMENTS = 4_000_000  # cap on atoms*pixels per synthesis chunk


@dataclass(frozen=True)
class PhaseProfile:
    """Per-atom imprinted phases, aligned with the position list."""

    phases: np.ndarray  # radians

    def __post_init__(self):
        phases = np.asarray(self.phases, dtype=float)
        if phases.ndim != 1:
            raise DomainError("phases must be a 1D array")
        if not np.all(np.isfinite(phases)):
            raise DomainError("phases must be finite")
        phases.setflags(write=False)
        object.__setattr__(self, "phases", phases)

    def __len__(self) -> int:
        return self.phases.shape[0]


@dataclass(frozen=True)
class GridSpec:
    """Uniform detector grid over the transverse wavevector plane.

    ``pixels`` must be odd so the forward direction dk = 0 is a pixel.
    ``pixels_y = 1`` collapses to a 1D detector row at k_y = 0.
    """

    k_max: float  # rad/m, half-width per axis
    pixels: int = 65
    pixels_y: Optional[int] = None

    def __post_init__(self):
        if self.k_max <= 0:
            raise DomainError("k_max must be positive")
        if self.pixels < 3 or self.pixels % 2 == 0:
            raise DomainError(
                f"pixels={self.pixels} must be odd and >= 3 so the grid contains dk=0"
            )
        ny = self.pixels if self.pixels_y is None else self.pixels_y
        if ny != 1 and (ny < 3 or ny % 2 == 0):
            raise DomainError(
                f"pixels_y={ny} must be 1 or odd >= 3 so the grid contains dk=0"
            )

    @staticmethod
    def _axis(k_max: float, m: int) -> np.ndarray:
        # built around the exact center so the forward pixel is exactly 0
        step = 2.0 * k_max / (m - 1)
        return (np.arange(m) - (m - 1) // 2) * step

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        kx = self._axis(self.k_max, self.pixels)
        ny = self.pixels if self.pixels_y is None else self.pixels_y
        ky = np.zeros(1) if ny == 1 else self._axis(self.k_max, ny)
        return kx, ky


@dataclass(frozen=True)
class DiffractionImage:
    """Intensity or photon-count grid over (k_x, k_y).

    mode is one of ``fixed-positions`` (one sampled realization),
    ``analytic`` (ensemble-averaged structure term), ``exact`` (from the
    brute-force oracle), or ``counts``.
    """

    kx: np.ndarray
    ky: np.ndarray
    values: np.ndarray  # (len(ky), len(kx))
    mode: str
    n_atoms: int
    k0: float
    theta_b: Optional[float] = None
    clipped_pixels: int = 0
    total_photons: Optional[int] = None
    rng_seed: Optional[int] = None

    def __post_init__(self):
        kx = np.asarray(self.kx, dtype=float)
        ky = np.asarray(self.ky, dtype=float)
        values = np.asarray(self.values)
        if values.shape != (ky.size, kx.size):
            raise DomainError(
                f"values shape {values.shape} does not match axes "
                f"({ky.size}, {kx.size})"
            )
        if self.mode == "counts":
            if not np.issubdtype(values.dtype, np.integer):
                raise DomainError("counts images must hold integers")
            if np.any(values < 0):
                raise DomainError("counts must be nonnegative")
        else:
            if np.any(values < 0):
                raise DomainError("intensities must be nonnegative")
        for arr in (kx, ky, values):
            arr.setflags(write=False)
        object.__setattr__(self, "kx", kx)
        object.__setattr__(self, "ky", ky)
        object.__setattr__(self, "values", values)

    @property
    def pixel_size(self) -> tuple[float, float]:
        dx = self.kx[1] - self.kx[0] if self.kx.size > 1 else 2.0 * abs(self.kx[0])
        dy = self.ky[1] - self.ky[0] if self.ky.size > 1 else dx
        return (float(dx) if dx else 1.0, float(dy) if dy else float(dx) or 1.0)

    def center_value(self) -> float:
        ix = int(np.argmin(np.abs(self.kx)))
        iy = int(np.argmin(np.abs(self.ky)))
        if abs(self.kx[ix]) > 1e-9 * max(1.0, self.kx.max()) or (
            self.ky.size > 1 and abs(self.ky[iy]) > 1e-9 * max(1.0, self.ky.max())
        ):
            raise DomainError("grid does not contain the forward pixel dk=0")
        return float(self.values[iy, ix])


def transverse_to_delta_k(kx, ky, k0: Optional[float]) -> np.ndarray:
    """Full 3-vector momentum transfer for transverse components (kx, ky).

    Without k0 the longitudinal part is dropped (pure 2D phases).
    """
    kx = np.asarray(kx, dtype=float)
    ky = np.asarray(ky, dtype=float)
    if k0 is None:
        dkz = np.zeros_like(kx)
    else:
        rho2 = np.clip((kx**2 + ky**2) / (k0 * k0), 0.0, 1.0)
        dkz = k0 * (np.sqrt(1.0 - rho2) - 1.0)
    return np.stack([kx, ky, dkz], axis=-1)


def envelope_factor(kxg, kyg, k0: Optional[float], envelope: str) -> np.ndarray:
    if envelope == "uniform":
        return np.ones_like(np.asarray(kxg, dtype=float))
    if envelope == "dipole":
        if k0 is None:
            raise DomainError("dipole envelope needs k0")
        sin_theta = np.clip(np.sqrt(kxg**2 + kyg**2) / k0, 0.0, 1.0)
        cos2 = 1.0 - sin_theta**2
        return (1.0 + cos2) / 2.0
    raise DomainError(f"unknown envelope {envelope!r}")


def structure_term(positions, delta_k, phases: Optional[PhaseProfile] = None) -> float:
    """|sum_j exp(i(phi_j - dk . r_j))|^2 for a single momentum transfer."""
    coords = positions.coordinates if isinstance(positions, EnsemblePositions) else np.asarray(positions, dtype=float)
    delta_k = np.asarray(delta_k, dtype=float)
    if delta_k.shape != (3,):
        raise DomainError(f"delta_k must be a 3-vector, got shape {delta_k.shape}")
    phi = np.zeros(coords.shape[0]) if phases is None else phases.phases
    if phi.shape[0] != coords.shape[0]:
        raise DomainError(
            f"{phi.shape[0]} phases for {coords.shape[0]} atoms"
        )
    angle = phi - coords @ delta_k
    return float(np.cos(angle).sum() ** 2 + np.sin(angle).sum() ** 2)


def _structure_grid(
    coords: np.ndarray,
    kx: np.ndarray,
    ky: np.ndarray,
    k0: Optional[float],
    phases: Optional[np.ndarray],
) -> np.ndarray:
    """Sampled-realization structure term over the full grid (chunked)."""
    n = coords.shape[0]
    kxg, kyg = np.meshgrid(kx, ky)
    flat_kx = kxg.ravel()
    flat_ky = kyg.ravel()
    dk = transverse_to_delta_k(flat_kx, flat_ky, k0)
    out = np.empty(flat_kx.size)
    phi = np.zeros(n) if phases is None else phases
    chunk = max(1, _CHUNK_ELEMENTS // max(n, 1))
    x, y, z = coords[:, 0], coords[:, 1], coords[:, 2]
    for start in range(0, flat_kx.size, chunk):
        sl = slice(start, min(start + chunk, flat_kx.size))
        # broadcasting instead of matmul keeps the sum order fixed
        angle = (
            phi[None, :]
            - dk[sl, 0:1] * x[None, :]
            - dk[sl, 1:2] * y[None, :]
            - dk[sl, 2:3] * z[None, :]
        )
        out[sl] = np.cos(angle).sum(axis=1) ** 2 + np.sin(angle).sum(axis=1) ** 2
    return out.reshape(kyg.shape)


def _structure_grid_analytic(
    geometry,
    n_atoms: int,
    kx: np.ndarray,
    ky: np.ndarray,
    shift: tuple[float, float],
) -> np.ndarray:
    """Ensemble-averaged coherent structure term N^2 |char. function|^2."""
    qx, qy = shift
    kxg, kyg = np.meshgrid(kx, ky)
    if isinstance(geometry, Gaussian2D):
        s2 = geometry.fwhm**2 / (8.0 * math.log(2.0))
        expo = ((kxg - qx) ** 2 + (kyg - qy) ** 2) * s2
    elif isinstance(geometry, Gaussian1D):
        s2 = geometry.fwhm**2 / (8.0 * math.log(2.0))
        expo = (kxg - qx) ** 2 * s2
    else:
        raise DomainError(
            "analytic mode is available for Gaussian geometries only"
        )
    return float(n_atoms) ** 2 * np.exp(-expo)


def collective_pattern(
    summary: StateSummary,
    positions: EnsemblePositions,
    grid: GridSpec,
    phases: Optional[PhaseProfile] = None,
    mode: str = "fixed",
    envelope: str = "uniform",
    shift: tuple[float, float] = (0.0, 0.0),
) -> DiffractionImage:
    """Synthesize the collective intensity over the detector grid.

    Each pixel is ``<Ns> - P/(N-1) + P * S(dk)/(N^2 - N)`` with S the
    structure term.  ``mode="fixed"`` uses the sampled atom positions
    (reproducing speckle); ``mode="analytic"`` replaces S by its
    Gaussian ensemble average, optionally displaced by ``shift``.
    Negative pixels (possible only for unphysical summaries) are clipped
    to zero and counted in ``clipped_pixels``.
    """
    n = summary.n_atoms
    if n < 2:
        raise DomainError("collective pattern needs N >= 2")
    if positions.n_atoms != n:
        raise DomainError(
            f"{positions.n_atoms} positions for N={n} summary"
        )
    kx, ky = grid.axes()
    if mode == "fixed":
        phi = None if phases is None else phases.phases
        if phi is not None and phi.shape[0] != n:
            raise DomainError(f"{phi.shape[0]} phases for {n} atoms")
        s_term = _structure_grid(positions.coordinates, kx, ky, positions.k0, phi)
    elif mode == "analytic":
        if phases is not None:
            raise DomainError(
                "analytic mode takes a peak shift, not per-atom phases"
            )
        s_term = _structure_grid_analytic(positions.geometry, n, kx, ky, shift)
    else:
        raise DomainError(f"unknown mode {mode!r}")
    p = summary.pair_sum
    values = summary.ns_mean - p / (n - 1) + p * s_term / (n * n - n)
    if envelope != "uniform":
        kxg, kyg = np.meshgrid(kx, ky)
        values = values * envelope_factor(kxg, kyg, positions.k0, envelope)
    clipped = int(np.count_nonzero(values < 0.0))
    if clipped:
        values = np.clip(values, 0.0, None)
    return DiffractionImage(
        kx=kx, ky=ky, values=values,
        mode="fixed-positions" if mode == "fixed" else "analytic",
        n_atoms=n, k0=positions.k0, theta_b=positions.theta_b,
        clipped_pixels=clipped,
    )


def _ring_mask(image: DiffractionImage, k_ring: float) -> np.ndarray:
    kxg, kyg = np.meshgrid(image.kx, image.ky)
    radius = np.sqrt(kxg**2 + kyg**2)
    dx, dy = image.pixel_size
    return np.abs(radius - k_ring) <= max(dx, dy) / 2.0


def peak_dip_ratio(
    image: DiffractionImage,
    theta_b: Optional[float] = None,
    background: str = "ring",
) -> float:
    """(I(0) - I(theta_b)) / I(theta_b), signed.

    The background defaults to the azimuthal mean over the theta_b ring,
    which averages away speckle from the particular position draw; pass
    ``background="point"`` for the single-pixel estimate at
    (k0*theta_b, 0) used in single-cut figures.
    """
    theta = image.theta_b if theta_b is None else theta_b
    if theta is None:
        raise DomainError("no theta_b available: pass one explicitly")
    k_ring = image.k0 * theta
    max_radius = math.hypot(float(np.max(np.abs(image.kx))),
                            float(np.max(np.abs(image.ky))))
    if k_ring > max_radius + 1e-12:
        raise DomainError(
            f"grid reaches |k|={max_radius:.4g} but the background ring is "
            f"at {k_ring:.4g}"
        )
    peak = image.center_value()
    if background == "ring":
        mask = _ring_mask(image, k_ring)
        if not np.any(mask):
            raise DomainError("no pixels fall on the theta_b ring; refine the grid")
        bg = float(np.mean(image.values[mask]))
    elif background == "point":
        ix = int(np.argmin(np.abs(image.kx - k_ring)))
        iy = int(np.argmin(np.abs(image.ky)))
        bg = float(image.values[iy, ix])
    else:
        raise DomainError(f"unknown background estimator {background!r}")
    if bg <= 0.0:
        raise DomainError("background is zero; ratio undefined")
    return (peak - bg) / bg


def photon_counts(
    image: DiffractionImage, total_photons: int, rng_seed: int
) -> DiffractionImage:
    """Multinomial shot-noise draw over pixels, conserving the budget exactly.

    Pixel probabilities are proportional to intensity times the (uniform)
    per-pixel solid angle.
    """
    if image.mode == "counts":
        raise DomainError("image is already in counts mode")
    if total_photons < 0:
        raise DomainError("total_photons must be nonnegative")
    weights = np.asarray(image.values, dtype=float).ravel()
    total_weight = float(weights.sum())
    if total_photons > 0 and total_weight <= 0.0:
        raise DomainError("cannot draw photons from an all-zero intensity")
    if total_photons == 0:
        counts = np.zeros_like(weights, dtype=np.int64)
    else:
        rng = np.random.default_rng(rng_seed)
        counts = rng.multinomial(total_photons, weights / total_weight).astype(np.int64)
    return DiffractionImage(
        kx=image.kx, ky=image.ky, values=counts.reshape(image.values.shape),
        mode="counts", n_atoms=image.n_atoms, k0=image.k0,
        theta_b=image.theta_b, total_photons=int(total_photons),
        rng_seed=int(rng_seed),
    )


def time_resolved_ratio(
    summary: StateSummary,
    positions: EnsemblePositions,
    gamma_rate: float,
    tau_c_grid: Sequence[float],
    grid: GridSpec,
    phases: Optional[PhaseProfile] = None,
    theta_b: Optional[float] = None,
    background: str = "ring",
    photon_budget: Optional[int] = None,
    rng_seed: int = 0,
) -> list[tuple[float, float]]:
    """Peak/dip-to-background ratio vs photon-collection interval.

    Under independent decay the cumulative directional counts are
    (1 - exp(-Gamma tau_c)) times the initial pattern, so the analytic
    ratio is constant in tau_c.  With a ``photon_budget`` the counts are
    sampled once with exponential arrival times and accumulated, so the
    per-interval count images are nested exactly as in an experiment.
    """
    if gamma_rate <= 0:
        raise DomainError("gamma_rate must be positive")
    taus = [float(t) for t in tau_c_grid]
    if any(t < 0 for t in taus):
        raise DomainError("collection intervals must be nonnegative")
    base = collective_pattern(summary, positions, grid, phases=phases)
    if photon_budget is None:
        out = []
        for tau in taus:
            weight = 1.0 - math.exp(-gamma_rate * tau)
            scaled = base if weight == 0.0 else DiffractionImage(
                kx=base.kx, ky=base.ky, values=base.values * weight,
                mode=base.mode, n_atoms=base.n_atoms, k0=base.k0,
                theta_b=base.theta_b,
            )
            out.append((tau, peak_dip_ratio(scaled, theta_b, background)))
        return out
    rng = np.random.default_rng(rng_seed)
    weights = base.values.ravel()
    if weights.sum() <= 0:
        raise DomainError("cannot draw photons from an all-zero intensity")
    pixels = rng.choice(weights.size, size=int(photon_budget),
                        p=weights / weights.sum())
    arrivals = rng.exponential(1.0 / gamma_rate, size=int(photon_budget))
    out = []
    for tau in taus:
        mask = arrivals <= tau
        counts = np.bincount(pixels[mask], minlength=weights.size).astype(np.int64)
        img = DiffractionImage(
            kx=base.kx, ky=base.ky, values=counts.reshape(base.values.shape),
            mode="counts", n_atoms=base.n_atoms, k0=base.k0,
            theta_b=base.theta_b, total_photons=int(mask.sum()),
            rng_seed=int(rng_seed),
        )
        out.append((tau, peak_dip_ratio(img, theta_b, background)))
    return out
