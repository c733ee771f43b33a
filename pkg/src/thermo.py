"""
Thermodynamics Module
Von Neumann entropies, free-expansion and isothermal entropy changes,
ratio sweeps and entropy-energy curves.
"""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg
from scipy.special import entr
from tqdm import tqdm

from config import THERMO_CONFIG
from errors import BoxGasError, DomainError, PositivityError
from quench import default_thermo_n_max, diagonal_distribution
from spectral import FULL, HALF, TrapConfig, internal_energy, thermal_entropy

logger = logging.getLogger(__name__)


def entropy(rho: np.ndarray) -> float:
    """
    -Tr[rho ln rho] from the eigenvalues of a Hermitian PSD matrix.

    Eigenvalues below the floor count as zero; any below -positivity_tolerance
    raise PositivityError. Sub-normalised (truncated) states are accepted.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"density matrix must be square, got shape {rho.shape}")
    asymmetry = float(np.max(np.abs(rho - rho.conj().T))) if rho.size else 0.0
    if asymmetry > THERMO_CONFIG["hermiticity_tolerance"]:
        raise DomainError(f"density matrix not Hermitian (max deviation {asymmetry:.2e})")
    eigenvalues = linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    smallest = float(eigenvalues.min()) if eigenvalues.size else 0.0
    if smallest < -THERMO_CONFIG["positivity_tolerance"]:
        raise PositivityError(f"eigenvalue {smallest:.3e} below positivity tolerance")
    eigenvalues = np.where(eigenvalues < THERMO_CONFIG["eigenvalue_floor"], 0.0, eigenvalues)
    return float(entr(eigenvalues).sum())


def entropy_diagonal(d) -> float:
    """Shannon entropy of a probability vector, units kB."""
    d = np.asarray(d, dtype=float)
    if d.size and d.min() < -THERMO_CONFIG["diagonal_negativity_tolerance"]:
        raise DomainError(f"negative occupation {d.min():.3e}")
    return float(entr(np.clip(d, 0.0, None)).sum())


def initial_entropy(cfg: TrapConfig) -> float:
    return thermal_entropy(cfg, HALF)


def delta_s_free_expansion(cfg: TrapConfig, n_max: Optional[int] = None) -> float:
    """S of the fully dephased post-quench state minus S of the half-trap state."""
    dist = diagonal_distribution(cfg, n_max)
    return entropy_diagonal(dist.d) - initial_entropy(cfg)


def delta_s_isothermal(cfg: TrapConfig, n_max: Optional[int] = None) -> float:
    """Equilibrium entropy of the full trap minus that of the half trap at the same T."""
    return thermal_entropy(cfg, FULL, n_max) - thermal_entropy(cfg, HALF, n_max)


def equilibrium_point(cfg: TrapConfig, variant: str = FULL) -> Tuple[float, float]:
    """(energy / alpha, entropy) of the equilibrium state of one trap."""
    return internal_energy(cfg, variant) / cfg.alpha, thermal_entropy(cfg, variant)


def ratio_to_config(base: TrapConfig, ratio: float) -> TrapConfig:
    """Trap of size ratio * lambda_T at the temperature of base."""
    if base.is_zero_temperature:
        raise DomainError("L / lambda_T is undefined at T = 0")
    if not (ratio > 0 and math.isfinite(ratio)):
        raise DomainError(f"ratio must be positive, got {ratio}")
    return base.with_size(ratio * base.thermal_wavelength)


def _check_increasing(values: Sequence[float], name: str, allow_zero: bool = False) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise DomainError(f"{name} must be a non-empty list")
    lowest_ok = values.min() >= 0 if allow_zero else values.min() > 0
    if not lowest_ok or not np.all(np.isfinite(values)):
        raise DomainError(f"{name} must be {'non-negative' if allow_zero else 'positive'} and finite")
    if np.any(np.diff(values) <= 0):
        raise DomainError(f"{name} must be strictly increasing")
    return values


@dataclass
class SweepResult:
    """Entropy changes along the L / lambda_T axis."""

    axis: np.ndarray
    ds_fe: np.ndarray
    ds_iso: np.ndarray
    meta: Dict = field(default_factory=dict)
    diagnostics: List[str] = field(default_factory=list)

    def __post_init__(self):
        if not (len(self.axis) == len(self.ds_fe) == len(self.ds_iso)):
            raise DomainError("sweep columns must have equal length")
        if np.any(np.diff(self.axis) <= 0):
            raise DomainError("sweep axis must be strictly increasing")
        valid = self.ds_fe[np.isfinite(self.ds_fe)]
        if valid.size and valid.min() < -1e-12:
            raise DomainError(f"negative free-expansion entropy {valid.min():.3e}")

    @property
    def failures(self) -> int:
        return int(np.sum(~np.isfinite(self.ds_fe)))


def _sweep_point(task: Tuple[TrapConfig, float, Optional[int]]) -> Dict:
    base, ratio, n_max = task
    try:
        cfg = ratio_to_config(base, ratio)
        return {
            "is_valid": True,
            "ds_fe": delta_s_free_expansion(cfg, n_max),
            "ds_iso": delta_s_isothermal(cfg),
        }
    except BoxGasError as e:
        return {"is_valid": False, "error": str(e)}


def _map_points(function, tasks: List, workers: int, progress: bool, desc: str) -> List:
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=workers) as pool:
            return list(tqdm(pool.imap(function, tasks), total=len(tasks), desc=desc, disable=not progress))
    return [function(task) for task in tqdm(tasks, desc=desc, disable=not progress)]


def sweep_ratio(
    base: TrapConfig,
    ratios: Sequence[float],
    n_max: Optional[int] = None,
    workers: int = 1,
    progress: bool = False,
) -> SweepResult:
    """
    Free-expansion and isothermal entropy changes for each L / lambda_T.

    Failed points become NaN and add a diagnostic line instead of aborting.
    """
    ratios = _check_increasing(ratios, "ratios")
    tasks = [(base, float(r), n_max) for r in ratios]
    outcomes = _map_points(_sweep_point, tasks, workers, progress, "entropy sweep")

    ds_fe = np.full(len(ratios), np.nan)
    ds_iso = np.full(len(ratios), np.nan)
    diagnostics = []
    for i, (ratio, outcome) in enumerate(zip(ratios, outcomes)):
        if outcome["is_valid"]:
            ds_fe[i] = outcome["ds_fe"]
            ds_iso[i] = outcome["ds_iso"]
        else:
            diagnostics.append(f"ratio={ratio:.6g}: {outcome['error']}")
            logger.warning(f"Sweep point ratio={ratio:.6g} failed: {outcome['error']}")

    meta = dict(base.as_dict(), n_max=n_max if n_max is not None else "auto")
    return SweepResult(axis=ratios, ds_fe=ds_fe, ds_iso=ds_iso, meta=meta, diagnostics=diagnostics)


@dataclass
class SECurve:
    """Entropy against energy (units alpha) over a temperature grid."""

    temperatures: np.ndarray
    energy: np.ndarray
    entropy: np.ndarray
    kind: str

    def __post_init__(self):
        if not (len(self.temperatures) == len(self.energy) == len(self.entropy)):
            raise DomainError("curve columns must have equal length")
        if not self.is_monotone():
            logger.warning(f"{self.kind} entropy-energy curve is not monotone in T")

    def is_monotone(self, tol: float = 1e-10) -> bool:
        finite = np.isfinite(self.entropy) & np.isfinite(self.energy)
        return bool(np.all(np.diff(self.entropy[finite]) >= -tol)
                    and np.all(np.diff(self.energy[finite]) >= -tol))


def _se_point(task: Tuple[TrapConfig, int]) -> Dict:
    cfg, n_max = task
    try:
        e_eq, s_eq = equilibrium_point(cfg, FULL)
        e_fe = internal_energy(cfg, HALF) / cfg.alpha
        s_fe = entropy_diagonal(diagonal_distribution(cfg, n_max).d)
        return {"is_valid": True, "e_fe": e_fe, "s_fe": s_fe, "e_eq": e_eq, "s_eq": s_eq}
    except BoxGasError as e:
        return {"is_valid": False, "error": str(e)}


def se_curves(
    base: TrapConfig,
    temperatures: Sequence[float],
    n_max: Optional[int] = None,
    workers: int = 1,
    progress: bool = False,
) -> Tuple[SECurve, SECurve, List[str]]:
    """
    Free-expansion and equilibrium entropy-energy curves at fixed L.

    One basis size serves every temperature so the truncation error does not
    jump along the curve.

    Returns:
        (free-expansion curve, equilibrium curve, diagnostics)
    """
    temperatures = _check_increasing(temperatures, "temperatures", allow_zero=True)
    if n_max is None:
        n_max = default_thermo_n_max(base.with_temperature(float(temperatures[-1])))
    tasks = [(base.with_temperature(float(T)), n_max) for T in temperatures]
    outcomes = _map_points(_se_point, tasks, workers, progress, "entropy-energy")

    columns = {key: np.full(len(temperatures), np.nan) for key in ("e_fe", "s_fe", "e_eq", "s_eq")}
    diagnostics = []
    for i, (T, outcome) in enumerate(zip(temperatures, outcomes)):
        if not outcome["is_valid"]:
            diagnostics.append(f"T={T:.6g}: {outcome['error']}")
            logger.warning(f"Entropy-energy point T={T:.6g} failed: {outcome['error']}")
            continue
        for key in columns:
            columns[key][i] = outcome[key]

    fe = SECurve(temperatures, columns["e_fe"], columns["s_fe"], "free_expansion")
    eq = SECurve(temperatures, columns["e_eq"], columns["s_eq"], "equilibrium")
    return fe, eq, diagnostics

