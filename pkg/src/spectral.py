"""
Spectral Module
Eigenstructure of the half-size and full-size square traps, quench overlaps,
partition functions and equilibrium thermal quantities.

Energies are reported in units of alpha = pi^2 hbar^2 / (2 M L^2), the ground
level of the full trap. The half trap has levels 4 n^2 alpha.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np
from scipy.special import digamma, entr, zeta

from config import SPECTRAL_CONFIG
from errors import DomainError

logger = logging.getLogger(__name__)

HALF = "half"
FULL = "full"
VARIANTS = (HALF, FULL)


@dataclass(frozen=True)
class TrapConfig:
    """Physical parameters of the trap after expansion (size L)."""

    L: float = SPECTRAL_CONFIG["trap_size"]
    M: float = SPECTRAL_CONFIG["mass"]
    T: float = SPECTRAL_CONFIG["temperature"]
    hbar: float = SPECTRAL_CONFIG["hbar"]
    kB: float = SPECTRAL_CONFIG["kB"]

    def __post_init__(self):
        for name in ("L", "M", "hbar", "kB"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise DomainError(f"{name} must be positive and finite, got {value}")
        if not (math.isfinite(self.T) and self.T >= 0):
            raise DomainError(f"T must be non-negative and finite, got {self.T}")

    @property
    def alpha(self) -> float:
        return math.pi ** 2 * self.hbar ** 2 / (2.0 * self.M * self.L ** 2)

    @property
    def is_zero_temperature(self) -> bool:
        return self.T == 0

    @property
    def q(self) -> float:
        """Dimensionless inverse temperature of the half trap, beta * 4 alpha."""
        if self.is_zero_temperature:
            return math.inf
        return 4.0 * self.alpha / (self.kB * self.T)

    @property
    def thermal_wavelength(self) -> float:
        if self.is_zero_temperature:
            return math.inf
        h = 2.0 * math.pi * self.hbar
        return h / math.sqrt(2.0 * math.pi * self.M * self.kB * self.T)

    @property
    def size_ratio(self) -> float:
        """L / lambda_T; zero at T = 0."""
        return self.L / self.thermal_wavelength

    def with_temperature(self, T: float) -> "TrapConfig":
        return dataclasses.replace(self, T=T)

    def with_size(self, L: float) -> "TrapConfig":
        return dataclasses.replace(self, L=L)

    def as_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


def _check_q(q: float) -> None:
    if not (q > 0 and math.isfinite(q)):
        raise DomainError(f"q must be positive and finite, got {q}")


def _gaussian_series(q: float, offset: float, tol: float) -> float:
    """Sum exp(-q (n^2 - offset)) for n >= 1, stopping on the relative tolerance."""
    if tol <= 0:
        raise DomainError(f"tol must be positive, got {tol}")
    total = 0.0
    n = 1
    while True:
        total += math.exp(-q * (n * n - offset))
        n += 1
        next_term = math.exp(-q * (n * n - offset))
        if next_term == 0.0 or next_term < tol * total:
            return total


def partition_function(q: float, tol: float = SPECTRAL_CONFIG["partition_tol"]) -> float:
    """
    Z(q) = sum_{n>=1} exp(-q n^2).

    Args:
        q: Dimensionless inverse temperature (> 0)
        tol: Stop once the next term is below tol times the running sum

    Returns:
        The partition function; raises DomainError when it underflows
    """
    _check_q(q)
    value = _gaussian_series(q, 0.0, tol)
    if value == 0.0:
        raise DomainError(f"partition function underflows at q={q}; use reduced_partition_function")
    return value


def reduced_partition_function(q: float, tol: float = SPECTRAL_CONFIG["partition_tol"]) -> float:
    """exp(q) Z(q); finite and >= 1 for every q > 0."""
    _check_q(q)
    return _gaussian_series(q, 1.0, tol)


def theta3(x: float, tol: float = SPECTRAL_CONFIG["partition_tol"]) -> float:
    """Jacobi theta_3(0, x) = 1 + 2 sum x^(n^2) for 0 <= x < 1."""
    if not 0 <= x < 1:
        raise DomainError(f"theta3 needs 0 <= x < 1, got {x}")
    if x == 0:
        return 1.0
    return 1.0 + 2.0 * partition_function(-math.log(x), tol)


def gaussian_cutoff(q: float, rel: float = SPECTRAL_CONFIG["gaussian_rel_cutoff"]) -> int:
    """Smallest N with exp(-q (N^2 - 1)) below rel for every level past N."""
    if q == math.inf:
        return 1
    _check_q(q)
    return int(math.ceil(math.sqrt(1.0 + math.log(1.0 / rel) / q)))


def reduced_weights(q: float, size: int) -> np.ndarray:
    """Boltzmann weights exp(-q n^2) / Z for n = 1..size, normalised by the full series."""
    if size < 1:
        raise DomainError(f"size must be >= 1, got {size}")
    if q == math.inf:
        weights = np.zeros(size)
        weights[0] = 1.0
        return weights
    n = np.arange(1, size + 1, dtype=float)
    return np.exp(-q * (n * n - 1.0)) / reduced_partition_function(q)


def _variant_q(cfg: TrapConfig, variant: str) -> float:
    if variant not in VARIANTS:
        raise DomainError(f"variant must be one of {VARIANTS}, got {variant!r}")
    return cfg.q if variant == HALF else cfg.q / 4.0


def _variant_levels(n: np.ndarray, variant: str) -> np.ndarray:
    """Energies in units of alpha."""
    return 4.0 * n * n if variant == HALF else n * n


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Eigenbasis of the full trap truncated to the first n_max levels."""

    config: TrapConfig
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 4:
            raise DomainError(f"n_max must be an integer >= 4, got {self.n_max}")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1, self.n_max + 1)

    @property
    def dimensionless_energies(self) -> np.ndarray:
        m = self.indices.astype(float)
        return m * m

    @property
    def energies(self) -> np.ndarray:
        return self.config.alpha * self.dimensionless_energies

    def wavefunctions(self, x) -> np.ndarray:
        """psi_m(x) on the points x, shape (len(x), n_max); zero outside the trap."""
        L = self.config.L
        x = np.atleast_1d(np.asarray(x, dtype=float))
        phase = np.pi * (x[:, None] + L / 2.0) / L
        values = math.sqrt(2.0 / L) * np.sin(phase * self.indices[None, :])
        inside = (x >= -L / 2.0) & (x <= L / 2.0)
        return values * inside[:, None]


def half_trap_wavefunction(n: int, x, cfg: TrapConfig) -> np.ndarray:
    """phi_n(x) = sqrt(4/L) sin(2 pi n x / L) on (-L/2, 0), zero elsewhere."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    L = cfg.L
    x = np.asarray(x, dtype=float)
    values = math.sqrt(4.0 / L) * np.sin(2.0 * np.pi * n * x / L)
    return np.where((x >= -L / 2.0) & (x <= 0.0), values, 0.0)


def overlap_matrix(m_values, n_values) -> np.ndarray:
    """
    Closed-form overlaps <psi_m | phi_n> between full-trap and half-trap states.

    Odd m:  4 sqrt(2) n (-1)^((m-1)/2) / (pi (m^2 - 4 n^2))
    m = 2n: (-1)^n / sqrt(2)
    other even m: 0
    """
    m = np.atleast_1d(np.asarray(m_values))
    n = np.atleast_1d(np.asarray(n_values))
    if m.size and (m.min() < 1 or np.any(m != np.round(m))):
        raise DomainError("m indices must be integers >= 1")
    if n.size and (n.min() < 1 or np.any(n != np.round(n))):
        raise DomainError("n indices must be integers >= 1")
    m = m.astype(np.int64)[:, None]
    n = n.astype(np.int64)[None, :]

    odd = (m % 2 == 1)
    sign = np.where(((m - 1) // 2) % 2 == 0, 1.0, -1.0)
    denominator = np.where(odd, m * m - 4 * n * n, 1).astype(float)
    odd_values = 4.0 * math.sqrt(2.0) * n * sign / (np.pi * denominator)

    resonant = (m == 2 * n)
    resonant_values = np.where(n % 2 == 0, 1.0, -1.0) / math.sqrt(2.0)

    return np.where(odd, odd_values, np.where(resonant, resonant_values, 0.0))


def overlap(m: int, n: int, cfg: TrapConfig = None) -> float:
    """Overlap of full-trap level m with half-trap level n (independent of L)."""
    return float(overlap_matrix([m], [n])[0, 0])


def overlap_tail_bound(n: int, eps: float = SPECTRAL_CONFIG["overlap_tail_eps"]) -> int:
    """
    Smallest m_max with sum_{m > m_max} |<psi_m|phi_n>|^2 <= eps.

    For m >= 4n the squared overlap is below C / m^4 with C = 512 n^2 / (9 pi^2),
    so the remainder is below C / (3 m_max^3).
    """
    if n < 1 or eps <= 0:
        raise DomainError(f"need n >= 1 and eps > 0, got n={n}, eps={eps}")
    c = 512.0 * n * n / (9.0 * math.pi ** 2)
    return max(4 * n, int(math.ceil((c / (3.0 * eps)) ** (1.0 / 3.0))))


def odd_tail(n_values, n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Exact probability and energy (units alpha) that half-trap levels n put on odd m > n_max.

    Uses Hurwitz-zeta and digamma remainders of the partial-fraction expansion
    of m^2 |<psi_m|phi_n>|^2; levels with 2n beyond the first missing odd m fall
    back to the complement of the retained sum.
    """
    n = np.atleast_1d(np.asarray(n_values, dtype=float))
    if n.size and n.min() < 1:
        raise DomainError("n indices must be >= 1")
    k0 = (n_max + 1) // 2  # first missing odd level is 2 k0 + 1
    mass = np.empty_like(n)
    energy = np.empty_like(n)

    series = n <= k0
    ns = n[series]
    if ns.size:
        s2_minus = 0.25 * zeta(2.0, k0 - ns + 0.5)
        s2_plus = 0.25 * zeta(2.0, k0 + ns + 0.5)
        s1 = 0.5 * (digamma(k0 + ns + 0.5) - digamma(k0 - ns + 0.5))
        mass[series] = 2.0 / np.pi ** 2 * (s2_minus + s2_plus - s1 / (2.0 * ns))
        energy[series] = 8.0 * ns ** 2 / np.pi ** 2 * (s2_minus + s2_plus + s1 / (2.0 * ns))

    rest = ~series
    if np.any(rest):
        nr = n[rest]
        odd_m = np.arange(1, n_max + 1, 2)
        squares = overlap_matrix(odd_m, nr.astype(np.int64)) ** 2
        mass[rest] = 0.5 - squares.sum(axis=0)
        energy[rest] = 2.0 * nr ** 2 - (odd_m[:, None] ** 2 * squares).sum(axis=0)

    return np.clip(mass, 0.0, None), np.clip(energy, 0.0, None)


def thermal_occupations(cfg: TrapConfig, basis_size: int, variant: str = HALF) -> np.ndarray:
    """Equilibrium occupations of the first basis_size levels of the half or full trap."""
    q = _variant_q(cfg, variant)
    return reduced_weights(q, basis_size)


def internal_energy(cfg: TrapConfig, variant: str = HALF) -> float:
    """Thermal energy of the half or full trap in physical units."""
    q = _variant_q(cfg, variant)
    if cfg.is_zero_temperature:
        ground = 4.0 if variant == HALF else 1.0
        return ground * cfg.alpha
    size = gaussian_cutoff(q)
    n = np.arange(1, size + 1, dtype=float)
    p = reduced_weights(q, size)
    return float(cfg.alpha * np.dot(p, _variant_levels(n, variant)))


def thermal_entropy(cfg: TrapConfig, variant: str = HALF, basis_size: int = None) -> float:
    """Gibbs entropy of the equilibrium state, units kB."""
    q = _variant_q(cfg, variant)
    if cfg.is_zero_temperature:
        return 0.0
    size = basis_size if basis_size is not None else gaussian_cutoff(q)
    return float(entr(reduced_weights(q, size)).sum())


def equipartition_ratio(q: float) -> float:
    """
    U_half / (kB T) from the Poisson-resummed partition function.

    With R = sqrt(pi / q), Z = (R - 1) / 2 up to exp(-pi R^2) and the ratio
    is R / (2 (R - 1)); it tends to 1/2 as q -> 0.
    """
    _check_q(q)
    r = math.sqrt(math.pi / q)
    if r <= 1:
        raise DomainError(f"resummed form needs q < pi, got q={q}")
    return r / (2.0 * (r - 1.0))


def classical_iso_limit(ratio: float) -> float:
    """
    Isothermal entropy change at large L / lambda_T.

    ln((2R - 1)/(R - 1)) + R/(2R - 1) - R/(2(R - 1)); exponentially accurate
    in R^2 and approaching ln 2 from above.
    """
    r = float(ratio)
    if r <= 1:
        raise DomainError(f"ratio must exceed 1, got {ratio}")
    return math.log((2 * r - 1) / (r - 1)) + r / (2 * r - 1) - r / (2 * (r - 1))
