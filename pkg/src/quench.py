"""
Quench Module
Projects the thermal state of the half trap onto the full-trap eigenbasis
immediately after the wall is removed.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from config import QUENCH_CONFIG
from errors import DomainError, TruncationError
from spectral import (
    SpectralBasis,
    TrapConfig,
    gaussian_cutoff,
    odd_tail,
    overlap_matrix,
    reduced_partition_function,
    reduced_weights,
)

logger = logging.getLogger(__name__)


def _half_trap_weights(cfg: TrapConfig) -> Tuple[np.ndarray, np.ndarray]:
    """Half-trap levels n and their occupations p_n, Gaussian-truncated."""
    if cfg.is_zero_temperature:
        return np.array([1]), np.array([1.0])
    size = gaussian_cutoff(cfg.q)
    return np.arange(1, size + 1), reduced_weights(cfg.q, size)


def _tail_moments(n: np.ndarray, p: np.ndarray, n_max: int) -> Tuple[float, float]:
    mass, energy = odd_tail(n, n_max)
    return float(np.dot(p, mass)), float(np.dot(p, energy))


def _entropy_tail_estimate(tail_mass: float, n_max: int) -> float:
    """Entropy carried by an m^-4 tail of total mass t starting past n_max."""
    if tail_mass <= 0:
        return 0.0
    return tail_mass * (math.log(n_max / (6.0 * tail_mass)) + 4.0 / 3.0)


def select_n_max(
    cfg: TrapConfig,
    mass_tol: float = QUENCH_CONFIG["mass_tail_tol"],
    entropy_tol: float = QUENCH_CONFIG["entropy_tail_tol"],
    floor: int = QUENCH_CONFIG["min_n_max"],
) -> int:
    """
    Smallest basis size whose odd tail holds less than mass_tol probability
    and less than entropy_tol entropy, while covering the Gaussian even states.
    """
    n, p = _half_trap_weights(cfg)
    cap = QUENCH_CONFIG["max_auto_n_max"]

    def converged(size: int) -> bool:
        mass, _ = _tail_moments(n, p, size)
        return mass < mass_tol and _entropy_tail_estimate(mass, size) < entropy_tol

    low = max(floor, 2 * int(n[-1]) + 2)
    if converged(low):
        return low
    high = low
    while not converged(high):
        low = high
        high *= 2
        if high >= cap:
            logger.warning(f"Basis size capped at {cap} for T={cfg.T}, L={cfg.L}")
            return cap
    while high - low > 1:
        middle = (low + high) // 2
        if converged(middle):
            high = middle
        else:
            low = middle
    return high


def default_thermo_n_max(cfg: TrapConfig) -> int:
    return max(QUENCH_CONFIG["thermo_n_max"], select_n_max(cfg))


def _check_n_max(n_max: int) -> int:
    if int(n_max) != n_max or n_max < QUENCH_CONFIG["min_n_max"]:
        raise DomainError(f"n_max must be an integer >= {QUENCH_CONFIG['min_n_max']}, got {n_max}")
    return int(n_max)


def _check_deficit(cfg: TrapConfig, retained: float, tail_mass: float, n_max: int) -> None:
    deficit = 1.0 - retained - tail_mass
    if abs(deficit) > QUENCH_CONFIG["trace_tolerance"]:
        raise TruncationError(deficit, n_max, select_n_max(cfg))
    if abs(deficit) > 1e-10:
        logger.debug(f"Unaccounted probability {deficit:.2e} at n_max={n_max}")


@dataclass(frozen=True, eq=False)
class OccupationDistribution:
    """Post-quench occupations d[m-1] of the full-trap levels m = 1..n_max."""

    d: np.ndarray
    tail_mass: float
    tail_energy: float
    temperature: float

    @property
    def n_max(self) -> int:
        return len(self.d)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)

    @property
    def odd_mass(self) -> float:
        return float(self.d[0::2].sum())

    @property
    def even_mass(self) -> float:
        return float(self.d[1::2].sum())

    @property
    def total(self) -> float:
        return float(self.d.sum())


def diagonal_distribution(cfg: TrapConfig, n_max: Optional[int] = None) -> OccupationDistribution:
    """
    Occupations of the full-trap levels after the quench.

    Even levels carry exp(-q m^2/4) / (2Z); odd levels collect the series
    32 / pi^2 sum_n n^2 exp(-q n^2) / (Z (m^2 - 4 n^2)^2).

    Args:
        cfg: Trap configuration (T = 0 selects the pure ground state)
        n_max: Basis size; chosen automatically from the tail bounds when None
    """
    if n_max is None:
        n_max = default_thermo_n_max(cfg)
    n_max = _check_n_max(n_max)
    m = np.arange(1, n_max + 1)
    d = np.zeros(n_max)
    n, p = _half_trap_weights(cfg)

    if cfg.is_zero_temperature:
        d[1] = 0.5
    else:
        k = m[1::2] // 2
        d[1::2] = 0.5 * np.exp(-cfg.q * (k * k - 1.0)) / reduced_partition_function(cfg.q)

    odd_m = m[0::2].astype(float)
    nf = n.astype(float)
    kernel = 32.0 * nf[None, :] ** 2 / (np.pi ** 2 * (odd_m[:, None] ** 2 - 4.0 * nf[None, :] ** 2) ** 2)
    d[0::2] = kernel @ p

    tail_mass, tail_energy = _tail_moments(n, p, n_max)
    _check_deficit(cfg, float(d.sum()), tail_mass, n_max)
    return OccupationDistribution(d=d, tail_mass=tail_mass, tail_energy=tail_energy, temperature=cfg.T)


def thermal_reference(cfg: TrapConfig, n_max: int) -> np.ndarray:
    """Reference curve exp(-q m^2/4) / (2Z) on every level; matches the even occupations."""
    if cfg.is_zero_temperature:
        ref = np.zeros(n_max)
        ref[1] = 0.5
        return ref
    half_index = np.arange(1, n_max + 1) / 2.0
    return 0.5 * np.exp(-cfg.q * (half_index ** 2 - 1.0)) / reduced_partition_function(cfg.q)


def post_quench_energy(dist: OccupationDistribution) -> float:
    """Energy after the quench in units of alpha, analytic odd tail included."""
    m = dist.indices.astype(float)
    return float(np.dot(m * m, dist.d) + dist.tail_energy)


@dataclass(frozen=True, eq=False)
class QuenchState:
    """Dense post-quench density matrix in the truncated full-trap basis."""

    basis: SpectralBasis
    rho: np.ndarray
    temperature: float
    tail_mass: float = 0.0
    tail_energy: float = 0.0

    @property
    def n_max(self) -> int:
        return self.basis.n_max

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.rho)).copy()

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.rho)))

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    @property
    def normalized_purity(self) -> float:
        return self.purity / self.trace ** 2

    @property
    def energy(self) -> float:
        """Tr[H rho] in units of alpha, tail included."""
        return float(np.dot(self.basis.dimensionless_energies, self.diagonal) + self.tail_energy)

    @property
    def coherence_l1(self) -> float:
        magnitudes = np.abs(self.rho)
        return float(magnitudes.sum() - np.trace(magnitudes))

    def normalized_rho(self) -> np.ndarray:
        return self.rho / self.trace

    def with_rho(self, rho: np.ndarray) -> "QuenchState":
        return dataclasses.replace(self, rho=rho)

    def check_invariants(self, hermitian_tol: float = 1e-12, trace_tol: float = 1e-10,
                         psd_tol: float = 1e-10) -> None:
        """Raise DomainError if rho is not Hermitian, unit-trace (with tail) and PSD."""
        asymmetry = float(np.max(np.abs(self.rho - self.rho.conj().T)))
        if asymmetry > hermitian_tol:
            raise DomainError(f"density matrix not Hermitian (max deviation {asymmetry:.2e})")
        drift = abs(self.trace + self.tail_mass - 1.0)
        if drift > trace_tol:
            raise DomainError(f"trace plus tail deviates from 1 by {drift:.2e}")
        smallest = float(np.linalg.eigvalsh(self.rho).min())
        if smallest < -psd_tol:
            raise DomainError(f"density matrix has eigenvalue {smallest:.2e}")


def build_quench_state(cfg: TrapConfig, n_max: int = QUENCH_CONFIG["thermo_n_max"]) -> QuenchState:
    """
    rho_mn = sum_n' p_n' <psi_m|phi_n'> <phi_n'|psi_n> on the first n_max levels.

    At T = 0 the state is the projector onto the re-expanded half-trap ground state.
    """
    n_max = _check_n_max(n_max)
    basis = SpectralBasis(cfg, n_max)
    n, p = _half_trap_weights(cfg)
    overlaps = overlap_matrix(basis.indices, n)
    rho = (overlaps * p[None, :]) @ overlaps.T
    rho = 0.5 * (rho + rho.T)

    tail_mass, tail_energy = _tail_moments(n, p, n_max)
    _check_deficit(cfg, float(np.trace(rho)), tail_mass, n_max)
    logger.debug(f"Quench state T={cfg.T} L={cfg.L} n_max={n_max} tail={tail_mass:.2e}")
    return QuenchState(
        basis=basis,
        rho=rho.astype(complex),
        temperature=cfg.T,
        tail_mass=tail_mass,
        tail_energy=tail_energy,
    )


def dephase(state: QuenchState) -> QuenchState:
    """Delete every coherence, keeping the populations."""
    return state.with_rho(np.diag(np.diag(state.rho)))
