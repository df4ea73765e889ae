"""Sufficient statistics of permutation-symmetric many-body spin states.

For the diffraction image only three numbers of the N-spin state matter:
the excitation number mean ``<Ns>``, its variance ``(dNs)^2``, and the
pair-correlation sum ``P = sum_{j != j'} <sigma+_{j'} sigma-_j>``.  This
module builds those statistics in closed form for the standard state
families and evolves them under homogeneous dephasing.  Everything here
is cross-checked against the brute-force machinery in :mod:`stokesim.oracle`.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import AdiabaticWarning, DomainError

#: absolute slack used when validating summary bounds (values are O(N^2))
SUMMARY_TOL = 1e-9


@dataclass(frozen=True)
class StateSummary:
    """(N, <Ns>, (dNs)^2, P) of a permutation-symmetric spin state.

    The variance is stored rather than the standard deviation so that
    mixture algebra stays exact; presentation layers take square roots.
    """

    n_atoms: int
    ns_mean: float
    ns_var: float
    pair_sum: float

    def __post_init__(self):
        n = self.n_atoms
        if n < 1:
            raise DomainError(f"n_atoms must be >= 1, got {n}")
        tol = SUMMARY_TOL * max(1.0, float(n) * n)
        if not (-tol <= self.ns_mean <= n + tol):
            raise DomainError(
                f"ns_mean={self.ns_mean} outside [0, {n}] for N={n}"
            )
        var_cap = self.ns_mean * (n - self.ns_mean)
        if not (-tol <= self.ns_var <= var_cap + tol):
            raise DomainError(
                f"ns_var={self.ns_var} outside [0, <Ns>(N-<Ns>)={var_cap}] for N={n}"
            )
        if not (-n / 2.0 - tol <= self.pair_sum <= n * (n - 1) + tol):
            raise DomainError(
                f"pair_sum={self.pair_sum} outside [-N/2, N(N-1)] for N={n}"
            )

    @property
    def ns_std(self) -> float:
        return math.sqrt(max(self.ns_var, 0.0))

    @property
    def ns_second_moment(self) -> float:
        return self.ns_var + self.ns_mean**2

    @property
    def max_ns_var(self) -> float:
        """Variance of the extremal two-point excitation mixture."""
        return self.ns_mean * (self.n_atoms - self.ns_mean)


@dataclass(frozen=True)
class LaserConfig:
    """Drive-laser parameters entering the effective scattering rate.

    Adiabatic elimination of the excited state needs the detuning to
    dominate both the Rabi frequency and the excited-state linewidth;
    ratios below 10 trigger a warning rather than an error because the
    physics degrades gracefully.
    """

    rabi_frequency: float  # rad/s
    detuning: float  # rad/s
    excited_linewidth: float  # 1/s
    wavevector_magnitude: float  # rad/m

    def __post_init__(self):
        for name in ("rabi_frequency", "detuning", "excited_linewidth",
                     "wavevector_magnitude"):
            if getattr(self, name) <= 0:
                raise DomainError(f"{name} must be positive")
        if self.detuning < 10.0 * self.rabi_frequency:
            warnings.warn(
                "detuning/rabi_frequency "
                f"= {self.detuning / self.rabi_frequency:.3g} < 10: "
                "adiabatic elimination is marginal",
                AdiabaticWarning, stacklevel=2,
            )
        if self.detuning < 10.0 * self.excited_linewidth:
            warnings.warn(
                "detuning/excited_linewidth "
                f"= {self.detuning / self.excited_linewidth:.3g} < 10: "
                "adiabatic elimination is marginal",
                AdiabaticWarning, stacklevel=2,
            )


def effective_scattering_rate(cfg: LaserConfig) -> float:
    """Stokes emission rate (Omega_L / 2 Delta)^2 * Gamma_0 in 1/s."""
    return (cfg.rabi_frequency / (2.0 * cfg.detuning)) ** 2 * cfg.excited_linewidth


def dicke_summary(n_atoms: int, j: float, m: float) -> StateSummary:
    """Statistics of a |J, M> total-spin eigenstate.

    Valid for every irrep with the given quantum numbers: the three
    statistics depend on (J, M) alone, so no irrep label is needed.

    Parameters
    ----------
    n_atoms : number of spin-1/2 atoms N
    j, m : total-spin quantum numbers; both must differ from N/2 by
        integers, with 0 <= j <= N/2 and |m| <= j.
    """
    n = int(n_atoms)
    if n < 1:
        raise DomainError(f"n_atoms must be >= 1, got {n_atoms}")

    def _half_integer_offset(x, base):
        return abs((x - base) - round(x - base)) > 1e-9

    if _half_integer_offset(j, n / 2.0) or _half_integer_offset(m, j):
        raise DomainError(f"(j={j}, m={m}) not compatible with N={n}")
    if j < -1e-12 or j > n / 2.0 + 1e-12:
        raise DomainError(f"j={j} outside [0, N/2] for N={n}")
    if abs(m) > j + 1e-12:
        raise DomainError(f"|m|={abs(m)} exceeds j={j}")

    ns_mean = m + n / 2.0
    pair_sum = j * (j + 1.0) - m * m - n / 2.0
    return StateSummary(n, ns_mean, 0.0, pair_sum)


def coherent_summary(n_atoms: int, polar: float, azimuth: float = 0.0) -> StateSummary:
    """Statistics of the spin-coherent product state at Bloch angle ``polar``.

    All N spins point the same way; ``azimuth`` never enters the
    statistics (the pair-correlation sum is phase-insensitive).
    """
    n = int(n_atoms)
    if n < 1:
        raise DomainError(f"n_atoms must be >= 1, got {n_atoms}")
    s2 = math.sin(polar / 2.0) ** 2
    c2 = math.cos(polar / 2.0) ** 2
    ns_mean = n * s2
    ns_var = n * s2 * c2
    pair_sum = n * (n - 1) * math.sin(polar) ** 2 / 4.0
    return StateSummary(n, ns_mean, ns_var, pair_sum)


def product_summary(amplitudes: Sequence[tuple[complex, complex]]) -> StateSummary:
    """Statistics of an arbitrary product state, one (g, s) pair per atom.

    Generalizes :func:`coherent_summary` to per-atom Bloch vectors; used
    as the closed-form side of the separable-state benchmarks.
    """
    n = len(amplitudes)
    if n < 1:
        raise DomainError("need at least one atom")
    ns_mean = 0.0
    ns_var = 0.0
    coherence_total = 0.0 + 0.0j
    coherence_sq = 0.0
    for g, s in amplitudes:
        norm = abs(g) ** 2 + abs(s) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise DomainError(f"single-spin amplitudes not normalized: |.|^2={norm}")
        p = abs(s) ** 2
        m = g.conjugate() * s  # <sigma->
        ns_mean += p
        ns_var += p * (1.0 - p)
        coherence_total += m
        coherence_sq += abs(m) ** 2
    pair_sum = abs(coherence_total) ** 2 - coherence_sq
    return StateSummary(n, ns_mean, ns_var, pair_sum)


def bloch_amplitudes(polar: float, azimuth: float) -> tuple[complex, complex]:
    """Single-spin (g, s) amplitudes for the given Bloch angles."""
    return (
        complex(math.cos(polar / 2.0)),
        cmath.exp(1j * azimuth) * math.sin(polar / 2.0),
    )


def mixture_summary(
    components: Sequence[tuple[float, StateSummary]],
) -> StateSummary:
    """Statistics of a classical mixture of summaries.

    ``ns_mean`` and ``pair_sum`` are weight-linear; the variance is
    rebuilt from mixed first and second moments (second moments mix,
    variances do not).
    """
    if not components:
        raise DomainError("mixture needs at least one component")
    weights = [w for w, _ in components]
    if any(w < -1e-15 for w in weights):
        raise DomainError("mixture weights must be nonnegative")
    total = sum(weights)
    if abs(total - 1.0) > 1e-12:
        raise DomainError(f"mixture weights sum to {total}, expected 1 within 1e-12")
    n = components[0][1].n_atoms
    if any(s.n_atoms != n for _, s in components):
        raise DomainError("all mixture components must share n_atoms")
    ns_mean = sum(w * s.ns_mean for w, s in components)
    second = sum(w * s.ns_second_moment for w, s in components)
    pair_sum = sum(w * s.pair_sum for w, s in components)
    ns_var = second - ns_mean**2
    if ns_var < 0.0:
        if ns_var < -1e-9 * max(1.0, float(n) * n):
            raise DomainError(f"mixture produced negative variance {ns_var}")
        ns_var = 0.0
    return StateSummary(n, ns_mean, ns_var, pair_sum)


def apply_homogeneous_dephasing(
    summary: StateSummary, gamma: float, tau: float
) -> StateSummary:
    """Scale the pair-correlation sum by exp(-2*gamma*tau).

    Pure dephasing conserves the excitation number, so the mean and
    variance pass through; only the single-spin coherences decay, each
    pair correlation carrying two of them.
    """
    if gamma < 0 or tau < 0:
        raise DomainError("gamma and tau must be nonnegative")
    return replace(summary, pair_sum=summary.pair_sum * math.exp(-2.0 * gamma * tau))
