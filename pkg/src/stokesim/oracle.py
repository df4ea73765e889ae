"""Brute-force quantum mechanics for small spin ensembles.

Ground truth for the closed forms elsewhere in the package: exact state
vectors and density matrices for N <= ~10 spins, directional emission
expectations, and Lindblad evolution under independent single-atom decay.
Basis convention: computational basis of 2^N kets, atom ``j`` stored in
bit ``j`` (bit set = atom in the excited ground state ``|s>``).

Operator action is bit-indexed rather than built from dense operator
matrices, keeping pure-state paths at O(2^N) per lowering operator.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import DomainError, IntegrationError
from .geometry import EnsemblePositions

PURE_ATOM_CAP = 14
MIXED_ATOM_CAP = 10

_NORM_TOL = 1e-10


@functools.lru_cache(maxsize=None)
def _popcounts(n_atoms: int) -> np.ndarray:
    basis = np.arange(1 << n_atoms, dtype=np.uint32)
    counts = np.zeros_like(basis)
    for j in range(n_atoms):
        counts += (basis >> j) & 1
    counts = counts.astype(np.float64)
    counts.setflags(write=False)
    return counts


@functools.lru_cache(maxsize=None)
def _bit_partition(n_atoms: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """(indices with bit j set, same indices with bit j cleared)."""
    basis = np.arange(1 << n_atoms, dtype=np.int64)
    excited = basis[(basis >> j) & 1 == 1]
    ground = excited ^ (1 << j)
    excited.setflags(write=False)
    ground.setflags(write=False)
    return excited, ground


@dataclass(frozen=True)
class ExactState:
    """A pure state vector or density matrix over 2^N basis kets."""

    n_atoms: int
    data: np.ndarray
    kind: str  # "pure" | "mixed"

    def __post_init__(self):
        n = self.n_atoms
        dim = 1 << n
        data = np.asarray(self.data, dtype=complex)
        if self.kind == "pure":
            if n > PURE_ATOM_CAP:
                raise DomainError(f"pure states capped at N={PURE_ATOM_CAP}")
            if data.shape != (dim,):
                raise DomainError(f"pure state needs shape ({dim},), got {data.shape}")
            norm = float(np.sum(np.abs(data) ** 2))
            if abs(norm - 1.0) > _NORM_TOL:
                raise DomainError(f"state vector norm^2 = {norm}, expected 1")
        elif self.kind == "mixed":
            if n > MIXED_ATOM_CAP:
                raise DomainError(f"mixed states capped at N={MIXED_ATOM_CAP}")
            if data.shape != (dim, dim):
                raise DomainError(
                    f"density matrix needs shape ({dim}, {dim}), got {data.shape}"
                )
            trace = complex(np.trace(data))
            if abs(trace - 1.0) > _NORM_TOL:
                raise DomainError(f"density matrix trace = {trace}, expected 1")
            if float(np.max(np.abs(data - data.conj().T))) > _NORM_TOL:
                raise DomainError("density matrix is not Hermitian within 1e-10")
            eigmin = float(np.linalg.eigvalsh(data)[0])
            if eigmin < -_NORM_TOL:
                raise DomainError(f"density matrix has eigenvalue {eigmin} < -1e-10")
        else:
            raise DomainError(f"kind must be 'pure' or 'mixed', got {self.kind!r}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def dim(self) -> int:
        return 1 << self.n_atoms


def build_product_state(
    n_atoms: int,
    single_spin: tuple[complex, complex] | Sequence[tuple[complex, complex]],
) -> ExactState:
    """Tensor product of single-spin states, shared or per atom."""
    if n_atoms < 1:
        raise DomainError("need at least one atom")
    if isinstance(single_spin, tuple) and len(single_spin) == 2 and not isinstance(
        single_spin[0], tuple
    ):
        pairs = [single_spin] * n_atoms
    else:
        pairs = list(single_spin)
        if len(pairs) != n_atoms:
            raise DomainError(
                f"got {len(pairs)} single-spin states for {n_atoms} atoms"
            )
    vec = np.ones(1, dtype=complex)
    for g, s in pairs:
        norm = abs(g) ** 2 + abs(s) ** 2
        if abs(norm - 1.0) > 1e-9:
            raise DomainError(f"single-spin amplitudes not normalized: |.|^2={norm}")
        # kron(high, low): the new atom lands in the next-higher bit
        vec = np.kron(np.array([g, s], dtype=complex), vec)
    vec = vec / math.sqrt(float(np.sum(np.abs(vec) ** 2)))
    return ExactState(n_atoms, vec, "pure")


def build_symmetric_dicke(n_atoms: int, n_excitations: int) -> ExactState:
    """Equal-weight superposition over all kets with the given excitation count."""
    if not 0 <= n_excitations <= n_atoms:
        raise DomainError(
            f"n_excitations={n_excitations} outside [0, {n_atoms}]"
        )
    mask = _popcounts(n_atoms) == n_excitations
    vec = np.zeros(1 << n_atoms, dtype=complex)
    vec[mask] = 1.0 / math.sqrt(math.comb(n_atoms, n_excitations))
    return ExactState(n_atoms, vec, "pure")


def build_singlet_pair() -> ExactState:
    """The two-spin singlet (|gs> - |sg>)/sqrt(2)."""
    vec = np.zeros(4, dtype=complex)
    vec[0b01] = 1.0 / math.sqrt(2.0)
    vec[0b10] = -1.0 / math.sqrt(2.0)
    return ExactState(2, vec, "pure")


def tensor_product(states: Sequence[ExactState]) -> ExactState:
    """Tensor product of pure states; earlier arguments take lower bits."""
    if not states:
        raise DomainError("need at least one state")
    if any(s.kind != "pure" for s in states):
        raise DomainError("tensor_product handles pure states only")
    vec = states[0].data
    n = states[0].n_atoms
    for st in states[1:]:
        vec = np.kron(st.data, vec)
        n += st.n_atoms
    return ExactState(n, vec, "pure")


def density_matrix(state: ExactState) -> ExactState:
    """Promote to a density matrix (no-op for mixed states)."""
    if state.kind == "mixed":
        return state
    return ExactState(state.n_atoms, np.outer(state.data, state.data.conj()), "mixed")


def mix_states(components: Sequence[tuple[float, ExactState]]) -> ExactState:
    """Classical mixture sum_i w_i rho_i."""
    if not components:
        raise DomainError("mixture needs at least one component")
    n = components[0][1].n_atoms
    if any(s.n_atoms != n for _, s in components):
        raise DomainError("all mixture components must share n_atoms")
    total = sum(w for w, _ in components)
    if abs(total - 1.0) > 1e-12:
        raise DomainError(f"mixture weights sum to {total}, expected 1")
    dim = 1 << n
    rho = np.zeros((dim, dim), dtype=complex)
    for w, st in components:
        if w < -1e-15:
            raise DomainError("mixture weights must be nonnegative")
        rho += w * density_matrix(st).data
    return ExactState(n, rho, "mixed")


def _apply_sigma_minus(vec: np.ndarray, n_atoms: int, j: int) -> np.ndarray:
    excited, ground = _bit_partition(n_atoms, j)
    out = np.zeros_like(vec)
    out[ground] = vec[excited]
    return out


def pair_correlation_matrix(state: ExactState) -> np.ndarray:
    """G[j', j] = <sigma+_{j'} sigma-_j>, the two-point coherence matrix.

    Every directional emission expectation is the quadratic form
    c^dag G c with c_j = exp(-i dk . r_j).
    """
    n = state.n_atoms
    if state.kind == "pure":
        lowered = np.empty((n, state.dim), dtype=complex)
        for j in range(n):
            lowered[j] = _apply_sigma_minus(state.data, n, j)
        # keep the contraction off BLAS so results are thread-count independent
        return np.einsum("ab,cb->ac", lowered.conj(), lowered, optimize=False)
    rho = state.data
    g = np.empty((n, n), dtype=complex)
    for jp in range(n):
        for j in range(n):
            if j == jp:
                excited, _ = _bit_partition(n, j)
                g[jp, j] = np.sum(rho[excited, excited])
            else:
                # sigma+_{j'} sigma-_j maps |c> (bit j set, bit j' clear after
                # lowering) to |c - e_j + e_{j'}>; trace picks rho[c_out, c]
                basis = np.arange(state.dim, dtype=np.int64)
                valid = ((basis >> j) & 1 == 1) & (
                    ((basis ^ (1 << j)) >> jp) & 1 == 0
                )
                src = basis[valid]
                dst = (src ^ (1 << j)) | (1 << jp)
                g[jp, j] = np.sum(rho[dst, src])
    return g


def pair_correlation_sum(state: ExactState) -> float:
    """P = sum_{j != j'} <sigma+_{j'} sigma-_j>."""
    g = pair_correlation_matrix(state)
    total = complex(np.sum(g) - np.trace(g))
    if abs(total.imag) > 1e-10:
        raise DomainError(f"pair-correlation sum has imaginary residue {total.imag}")
    return float(total.real)


def ns_moments(state: ExactState) -> tuple[float, float]:
    """Mean and variance of the excitation-number operator."""
    counts = _popcounts(state.n_atoms)
    if state.kind == "pure":
        probs = np.abs(state.data) ** 2
    else:
        probs = np.real(np.diag(state.data))
    mean = float(np.dot(probs, counts))
    second = float(np.dot(probs, counts**2))
    return mean, max(second - mean * mean, 0.0)


def _coords_array(positions) -> np.ndarray:
    if isinstance(positions, EnsemblePositions):
        return positions.coordinates
    coords = np.asarray(positions, dtype=float)
    if coords.ndim != 2 or coords.shape[1] != 3:
        raise DomainError(f"positions must be (N, 3), got {coords.shape}")
    return coords


def collective_intensity(state: ExactState, positions, delta_k) -> float:
    """I_c = <J+(dk) J-(dk)> for one momentum transfer."""
    coords = _coords_array(positions)
    if coords.shape[0] != state.n_atoms:
        raise DomainError(
            f"{coords.shape[0]} positions for {state.n_atoms} atoms"
        )
    delta_k = np.asarray(delta_k, dtype=float)
    if delta_k.shape != (3,):
        raise DomainError(f"delta_k must be a 3-vector, got shape {delta_k.shape}")
    g = pair_correlation_matrix(state)
    c = np.exp(-1j * coords @ delta_k)
    value = complex(np.einsum("a,ab,b->", c.conj(), g, c, optimize=False))
    return max(float(value.real), 0.0)


def emission_rate_pattern(state: ExactState, positions, grid, envelope: str = "uniform"):
    """Exact intensity image over a transverse-wavevector grid.

    Shares the grid/envelope conventions of
    :func:`stokesim.diffraction.collective_pattern`; the G matrix is
    built once and reused across pixels.
    """
    from . import diffraction as _diff

    coords = _coords_array(positions)
    if coords.shape[0] != state.n_atoms:
        raise DomainError(
            f"{coords.shape[0]} positions for {state.n_atoms} atoms"
        )
    k0 = positions.k0 if isinstance(positions, EnsemblePositions) else None
    kx, ky = grid.axes()
    kxg, kyg = np.meshgrid(kx, ky)
    dk = _diff.transverse_to_delta_k(kxg.ravel(), kyg.ravel(), k0)
    g = pair_correlation_matrix(state)
    phases = (
        dk[:, 0:1] * coords[None, :, 0]
        + dk[:, 1:2] * coords[None, :, 1]
        + dk[:, 2:3] * coords[None, :, 2]
    )
    c = np.exp(-1j * phases)  # (M, N)
    values = np.real(np.einsum("ma,ab,mb->m", c.conj(), g, c, optimize=False))
    values = np.clip(values, 0.0, None).reshape(kyg.shape)
    if envelope != "uniform":
        values = values * _diff.envelope_factor(kxg, kyg, k0, envelope)
    theta_b = positions.theta_b if isinstance(positions, EnsemblePositions) else None
    return _diff.DiffractionImage(
        kx=kx, ky=ky, values=values, mode="exact",
        n_atoms=state.n_atoms, k0=k0 if k0 is not None else float("nan"),
        theta_b=theta_b,
    )


def _decay_rhs(rho: np.ndarray, n_atoms: int, gamma: float) -> np.ndarray:
    counts = _popcounts(n_atoms)
    out = -0.5 * (counts[:, None] + counts[None, :]) * rho
    for j in range(n_atoms):
        excited, ground = _bit_partition(n_atoms, j)
        out[np.ix_(ground, ground)] += rho[np.ix_(excited, excited)]
    return gamma * out


def lindblad_independent_decay(
    initial: ExactState, gamma_rate: float, times: Sequence[float]
) -> list[ExactState]:
    """Evolve under one local jump operator sqrt(Gamma) sigma-_j per atom.

    Fixed-step classical RK4: deterministic and cheap at 2^N <= 1024
    dimensions. The step is sized so the trace stays within 1e-8; a
    violation raises with the offending time.
    """
    if gamma_rate <= 0:
        raise DomainError("gamma_rate must be positive")
    times = [float(t) for t in times]
    if not times or times[0] < 0 or any(b < a for a, b in zip(times, times[1:])):
        raise DomainError("times must be sorted ascending starting at >= 0")
    n = initial.n_atoms
    rho = density_matrix(initial).data.copy()
    # local RK4 error ~ (lambda h)^5 with lambda <= N * Gamma
    step = 0.005 / (gamma_rate * max(n, 1))
    out: list[ExactState] = []
    current = 0.0
    for target in times:
        span = target - current
        if span > 0:
            n_steps = max(1, math.ceil(span / step))
            h = span / n_steps
            for _ in range(n_steps):
                k1 = _decay_rhs(rho, n, gamma_rate)
                k2 = _decay_rhs(rho + 0.5 * h * k1, n, gamma_rate)
                k3 = _decay_rhs(rho + 0.5 * h * k2, n, gamma_rate)
                k4 = _decay_rhs(rho + h * k3, n, gamma_rate)
                rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            current = target
        trace_err = abs(complex(np.trace(rho)) - 1.0)
        if trace_err > 1e-8:
            raise IntegrationError(
                f"trace error {trace_err:.3e} at t={target} exceeds 1e-8 "
                f"(base step {step:.3e}): reduce the step or the time span"
            )
        out.append(ExactState(n, rho.copy(), "mixed"))
    return out
