"""
Dynamics Module
Pure-dephasing evolution of the post-quench state in the energy eigenbasis,
position densities and the profile grids rendered as movies.

Time is measured in units of hbar / alpha and rates in alpha / hbar, so the
Bohr frequency of the pair (m, n) is m^2 - n^2.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.integrate import trapezoid

from config import DYNAMICS_CONFIG, QUENCH_CONFIG
from errors import ConfigurationError, DomainError, IntegrationError
from quench import QuenchState, build_quench_state, dephase
from spectral import SpectralBasis, TrapConfig, reduced_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DephasingModel:
    """
    Pure-dephasing rates Gamma_mn >= 0 between energy levels.

    The uniform model damps every coherence at rate gamma. A custom model
    carries its own symmetric rate matrix.
    """

    gamma: float = DYNAMICS_CONFIG["gamma"]
    rates: Optional[np.ndarray] = None
    label: str = "uniform"

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and self.gamma >= 0):
            raise ConfigurationError(f"gamma must be non-negative, got {self.gamma}")
        if self.rates is not None:
            rates = np.asarray(self.rates, dtype=float)
            if rates.ndim != 2 or rates.shape[0] != rates.shape[1]:
                raise ConfigurationError("rate matrix must be square")
            if not np.allclose(rates, rates.T, atol=1e-14):
                raise ConfigurationError("rate matrix must be symmetric")
            if rates.min() < 0:
                raise ConfigurationError("rates must be non-negative")

    @classmethod
    def uniform(cls, gamma: float) -> "DephasingModel":
        return cls(gamma=gamma)

    @classmethod
    def from_rates(cls, rates, label: str = "custom") -> "DephasingModel":
        rates = np.array(rates, dtype=float)
        np.fill_diagonal(rates, 0.0)
        model = cls(gamma=float(rates.max()) if rates.size else 0.0, rates=rates, label=label)
        if rates.size and not model.is_completely_positive(rates.shape[0]):
            logger.warning(f"{label} rates admit no PSD Kossakowski matrix; evolution is not completely positive")
        return model

    @classmethod
    def wall(cls, gamma: float, n_max: int) -> "DephasingModel":
        """Energy-gap dependent rates gamma (m^2 - n^2)^2 / 9, equal to gamma for (2, 1)."""
        levels = np.arange(1, n_max + 1, dtype=float) ** 2
        gaps = levels[:, None] - levels[None, :]
        return cls.from_rates(gamma * gaps ** 2 / 9.0, label="wall")

    def rate_matrix(self, n_max: int) -> np.ndarray:
        if self.rates is None:
            return self.gamma * (1.0 - np.eye(n_max))
        if self.rates.shape[0] < n_max:
            raise ConfigurationError(f"rate matrix covers {self.rates.shape[0]} levels, need {n_max}")
        return np.asarray(self.rates, dtype=float)[:n_max, :n_max]

    def kossakowski_matrix(self, n_max: int) -> np.ndarray:
        """
        Coefficient matrix c with Gamma_mn = (c_mm + c_nn)/2 - c_mn.

        Uniform rates give gamma * I. For a rate matrix the diagonal is shifted
        to the largest rate; the dissipator does not depend on that shift.
        """
        if self.rates is None:
            return self.gamma * np.eye(n_max)
        rates = self.rate_matrix(n_max)
        shift = float(rates.max())
        return shift * np.ones((n_max, n_max)) - rates

    def is_completely_positive(self, n_max: int, tol: float = 1e-10) -> bool:
        """True when some diagonal shift makes the coefficient matrix PSD."""
        rates = self.rate_matrix(n_max)
        projector = np.eye(n_max) - np.ones((n_max, n_max)) / n_max
        smallest = float(linalg.eigvalsh(-projector @ rates @ projector).min())
        return smallest >= -tol * max(1.0, float(rates.max()))

    def dissipator(self, rho: np.ndarray) -> np.ndarray:
        """sum_mn c_mn (P_m rho P_n - {P_n P_m, rho}/2) with level projectors P."""
        c = self.kossakowski_matrix(rho.shape[0])
        d = np.diag(c)
        return c * rho - 0.5 * (d[:, None] + d[None, :]) * rho


def bohr_frequencies(n_max: int) -> np.ndarray:
    levels = np.arange(1, n_max + 1, dtype=float) ** 2
    return levels[:, None] - levels[None, :]


def evolve_closed_form(state: QuenchState, model: DephasingModel, t: float) -> QuenchState:
    """rho_mn(t) = rho_mn(0) exp(-i (m^2 - n^2) t - Gamma_mn t)."""
    if not (math.isfinite(t) and t >= 0):
        raise DomainError(f"t must be non-negative, got {t}")
    n_max = state.n_max
    factor = np.exp(-1j * bohr_frequencies(n_max) * t - model.rate_matrix(n_max) * t)
    return state.with_rho(state.rho * factor)


def evolve_integrator(state: QuenchState, model: DephasingModel, t_end: float, dt: float) -> QuenchState:
    """
    Fixed-step RK4 integration of the master equation.

    The step is shrunk so that it divides t_end. Raises ConfigurationError when
    dt * max(omega, Gamma) exceeds the stability limit and IntegrationError when
    the trace drifts.
    """
    if not (t_end >= 0 and dt > 0):
        raise ConfigurationError(f"need t_end >= 0 and dt > 0, got t_end={t_end}, dt={dt}")
    n_max = state.n_max
    rates = model.rate_matrix(n_max)
    fastest = max(float(np.abs(bohr_frequencies(n_max)).max()), float(rates.max()))
    if dt * fastest > DYNAMICS_CONFIG["stability_limit"]:
        raise ConfigurationError(
            f"dt={dt} too large: dt * max(omega, Gamma) = {dt * fastest:.3g} "
            f"exceeds {DYNAMICS_CONFIG['stability_limit']}"
        )
    if t_end == 0:
        return state

    steps = int(math.ceil(t_end / dt - 1e-9))
    h = t_end / steps
    hamiltonian = np.diag(state.basis.dimensionless_energies).astype(complex)

    def generator(rho: np.ndarray) -> np.ndarray:
        return -1j * (hamiltonian @ rho - rho @ hamiltonian) + model.dissipator(rho)

    rho = state.rho.copy()
    initial_trace = np.trace(rho).real
    for _ in range(steps):
        k1 = generator(rho)
        k2 = generator(rho + 0.5 * h * k1)
        k3 = generator(rho + 0.5 * h * k2)
        k4 = generator(rho + h * k3)
        rho = rho + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    drift = abs(np.trace(rho).real - initial_trace)
    if drift > DYNAMICS_CONFIG["trace_drift_tolerance"]:
        raise IntegrationError(f"trace drifted by {drift:.3e} over {steps} steps")
    logger.debug(f"RK4 finished: {steps} steps of {h:.3e}, trace drift {drift:.1e}")
    return state.with_rho(0.5 * (rho + rho.conj().T))


def position_grid(L: float, nx: int) -> np.ndarray:
    """Uniform grid on [-L/2, L/2], walls included; an even nx is bumped to nx + 1 so x = 0 is a node."""
    if nx < 3:
        raise ConfigurationError(f"nx must be >= 3, got {nx}")
    if nx % 2 == 0:
        nx += 1
    return np.linspace(-L / 2.0, L / 2.0, nx)


def _check_positions(state: QuenchState, x: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    half = state.basis.config.L / 2.0
    if x.size and (x.min() < -half * (1 + 1e-12) or x.max() > half * (1 + 1e-12)):
        raise DomainError(f"positions must lie in [-{half}, {half}]")
    return x


def _profile_from(psi: np.ndarray, rho: np.ndarray) -> np.ndarray:
    real = np.sum((psi @ rho.real) * psi, axis=1)
    imaginary = np.sum((psi @ rho.imag) * psi, axis=1)
    residual = float(np.max(np.abs(imaginary))) if imaginary.size else 0.0
    if residual > DYNAMICS_CONFIG["imaginary_residual_tolerance"]:
        raise DomainError(f"profile has imaginary residual {residual:.2e}")
    return real


def density_profile(state: QuenchState, x) -> np.ndarray:
    """p(x) = sum_mn rho_mn psi_m(x) psi_n(x)."""
    x = _check_positions(state, x)
    return _profile_from(state.basis.wavefunctions(x), state.rho)


def steady_profile(state: QuenchState, x) -> np.ndarray:
    """Long-time density of the fully dephased state."""
    return density_profile(dephase(state), x)


def equilibrium_profile(cfg: TrapConfig, x, n_max: int = QUENCH_CONFIG["dynamics_n_max"]) -> np.ndarray:
    """Thermal density of the full trap, sum_m P_m psi_m(x)^2."""
    basis = SpectralBasis(cfg, n_max)
    occupations = reduced_weights(cfg.q / 4.0, n_max)
    psi = basis.wavefunctions(x)
    return (psi ** 2) @ occupations


def energy_expectation(state: QuenchState) -> float:
    return state.energy


def centroid(grid: "ProfileGrid") -> np.ndarray:
    """Mean position at every time of a profile grid."""
    return grid.centroid()


@dataclass
class ProfileGrid:
    """Position densities p[i, j] = p(x_i, t_j) for one temperature."""

    x: np.ndarray
    t: np.ndarray
    p: np.ndarray
    meta: Dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.p.shape != (len(self.x), len(self.t)):
            raise DomainError(f"profile shape {self.p.shape} does not match grid")

    def normalization(self) -> np.ndarray:
        return trapezoid(self.p, self.x, axis=0)

    def centroid(self) -> np.ndarray:
        return trapezoid(self.x[:, None] * self.p, self.x, axis=0)


def _check_windows(windows: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    checked = []
    previous_end = -math.inf
    for window in windows:
        start, end = (float(v) for v in window)
        if start < 0 or end <= start:
            raise ConfigurationError(f"window ({start}, {end}) must satisfy 0 <= start < end")
        if start < previous_end:
            raise ConfigurationError("time windows must be increasing and non-overlapping")
        checked.append((start, end))
        previous_end = end
    if not checked:
        raise ConfigurationError("at least one time window is required")
    return checked


def _nyquist_warnings(state: QuenchState, windows, nt: int) -> List[str]:
    """Warn when a window samples a significant coherence below its Nyquist rate."""
    magnitudes = np.abs(state.rho)
    np.fill_diagonal(magnitudes, 0.0)
    if magnitudes.max() == 0:
        return []
    significant = magnitudes >= DYNAMICS_CONFIG["nyquist_significance"] * magnitudes.max()
    fastest = float(np.abs(bohr_frequencies(state.n_max))[significant].max())
    messages = []
    for start, end in windows:
        step = (end - start) / (nt - 1)
        if fastest * step > math.pi:
            messages.append(
                f"window ({start:g}, {end:g}) samples every {step:.3g} but coherences "
                f"oscillate at up to {fastest:.3g}; the movie is aliased"
            )
    return messages


def dynamics_movie(
    cfg: TrapConfig,
    model: DephasingModel,
    windows: Sequence[Tuple[float, float]] = DYNAMICS_CONFIG["windows"],
    nx: int = DYNAMICS_CONFIG["nx"],
    nt: int = DYNAMICS_CONFIG["nt"],
    n_max: int = QUENCH_CONFIG["dynamics_n_max"],
) -> ProfileGrid:
    """
    Density profiles at nt evenly spaced times inside each window.

    Args:
        cfg: Trap configuration
        model: Dephasing rates
        windows: Increasing, non-overlapping (start, end) time windows
        nx: Requested position points (an even count gains one point)
        nt: Time points per window
        n_max: Basis size
    """
    windows = _check_windows(windows)
    if nt < 2:
        raise ConfigurationError(f"nt must be >= 2, got {nt}")
    state = build_quench_state(cfg, n_max)
    x = position_grid(cfg.L, nx)
    psi = state.basis.wavefunctions(x)
    times = np.concatenate([np.linspace(start, end, nt) for start, end in windows])

    p = np.empty((len(x), len(times)))
    purity = np.empty(len(times))
    coherence = np.empty(len(times))
    for j, t in enumerate(times):
        evolved = evolve_closed_form(state, model, float(t))
        p[:, j] = _profile_from(psi, evolved.rho)
        purity[j] = evolved.purity
        coherence[j] = evolved.coherence_l1

    warnings = _nyquist_warnings(state, windows, nt)
    for message in warnings:
        logger.warning(f"T={cfg.T:g}: {message}")

    meta = {
        "T": cfg.T,
        "gamma": model.gamma,
        "model": model.label,
        "n_max": n_max,
        "tail_mass": state.tail_mass,
        "purity": purity,
        "coherence_l1": coherence,
    }
    return ProfileGrid(x=x, t=times, p=p, meta=meta, warnings=warnings)
