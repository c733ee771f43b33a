"""
Acceptance Checks
Evaluates the physical checks of each figure from the tables exactly as they
are written, embeds the verdicts as '# check:' lines, and re-verifies an
output directory for `boxgas check`.
"""

import logging
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List

import click
import numpy as np
from scipy.integrate import trapezoid

from artifacts import CsvTable, read_table
from config import THERMO_CONFIG
from spectral import classical_iso_limit

logger = logging.getLogger(__name__)

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"
LN2 = math.log(2.0)


@dataclass(frozen=True)
class CheckResult:
    target: str
    name: str
    status: str
    value: str

    def line(self) -> str:
        return f"check: {self.name} = {self.status} ({self.value})"


def _verdict(target: str, name: str, passed: bool, value: str) -> CheckResult:
    return CheckResult(target, name, PASS if passed else FAIL, value)


def _skip(target: str, name: str, reason: str) -> CheckResult:
    return CheckResult(target, name, SKIP, reason)


def _temperature_of(name: str) -> float:
    match = re.search(r"_T([0-9.eE+-]+)\.csv$", name)
    return float(match.group(1)) if match else math.nan


def check_entropy_sweep(tables: Dict[str, CsvTable]) -> List[CheckResult]:
    target = "fig1b.csv"
    if target not in tables:
        return []
    table = tables[target]
    ratio, fe, iso = table.column("ratio"), table.column("delta_s_fe"), table.column("delta_s_iso")
    valid = np.isfinite(fe) & np.isfinite(iso)
    ratio, fe, iso = ratio[valid], fe[valid], iso[valid]
    results = []
    if ratio.size == 0:
        return [_verdict(target, "points_computed", False, "no finite rows")]

    results.append(_verdict(target, "free_expansion_non_negative", bool(np.all(fe >= 0)), f"min {fe.min():.3g}"))

    if ratio[0] <= 0.1:
        error = abs(fe[0] - THERMO_CONFIG["zero_temperature_entropy"])
        results.append(_verdict(target, "zero_temperature_limit", error <= 5e-3, f"|dS_fe - 1.035| = {error:.2e}"))
    else:
        results.append(_skip(target, "zero_temperature_limit", "no ratio <= 0.1"))

    if ratio[-1] >= 40:
        error = max(abs(fe[-1] - LN2), abs(iso[-1] - LN2))
        results.append(_verdict(target, "classical_limit", error <= 2e-2, f"max |dS - ln 2| = {error:.2e}"))
    else:
        results.append(_skip(target, "classical_limit", "no ratio >= 40"))

    quantum = ratio <= 1
    if np.any(quantum):
        margin = float(np.min(fe[quantum] - iso[quantum]))
        results.append(_verdict(target, "free_exceeds_isothermal", margin >= 0, f"min margin {margin:.3g}"))

    classical = ratio >= 5
    if np.any(classical):
        exact = np.array([classical_iso_limit(r) for r in ratio[classical]])
        error = float(np.max(np.abs(iso[classical] - exact)))
        results.append(_verdict(target, "isothermal_exact_form", error <= 1e-9, f"max error {error:.2e}"))
    return results


def check_distributions(tables: Dict[str, CsvTable]) -> List[CheckResult]:
    names = sorted((n for n in tables if n.startswith("fig2_T")), key=_temperature_of)
    results = []
    deviations = {}
    for name in names:
        table = tables[name]
        m, d, ref = table.column("m"), table.column("d_m"), table.column("thermal_reference")
        if not np.all(np.isfinite(d)):
            results.append(_verdict(name, "points_computed", False, "distribution failed"))
            continue
        total_error = abs(d.sum() - 1.0)
        results.append(_verdict(name, "normalization", total_error <= 1e-8, f"|sum - 1| = {total_error:.2e}"))
        split_error = max(abs(d[m % 2 == 0].sum() - 0.5), abs(d[m % 2 == 1].sum() - 0.5))
        results.append(_verdict(name, "even_odd_split", split_error <= 1e-8, f"max |half - 1/2| = {split_error:.2e}"))
        even_error = float(np.max(np.abs(d[m % 2 == 0] - ref[m % 2 == 0])))
        results.append(_verdict(name, "even_thermal_shape", even_error <= 1e-12, f"max error {even_error:.2e}"))
        deviations[name] = float(np.max(np.abs(d - ref)))

    if len(deviations) >= 2:
        coldest, hottest = names[0], names[-1]
        if coldest in deviations and hottest in deviations:
            passed = deviations[hottest] < deviations[coldest]
            value = f"{deviations[hottest]:.3g} vs {deviations[coldest]:.3g} at T={_temperature_of(coldest):g}"
            results.append(_verdict(hottest, "deviation_reduced_at_high_temperature", passed, value))
    return results


def _centre_is_extremum(x: np.ndarray, p: np.ndarray, minimum: bool) -> bool:
    centre = int(np.argmin(np.abs(x)))
    if centre == 0 or centre == len(x) - 1:
        return False
    neighbours = (p[centre - 1], p[centre + 1])
    if minimum:
        return bool(p[centre] < min(neighbours))
    return bool(p[centre] > max(neighbours))


def check_dynamics(tables: Dict[str, CsvTable]) -> List[CheckResult]:
    results = []
    if "fig3.csv" in tables:
        table = tables["fig3.csv"]
        worst = 0.0
        for T in np.unique(table.column("T")):
            block = table.rows[table.column("T") == T]
            x_count = len(np.unique(block[:, 2]))
            slices = block.reshape(-1, x_count, block.shape[1])
            for slice_rows in slices:
                worst = max(worst, abs(trapezoid(slice_rows[:, 3], slice_rows[:, 2]) - 1.0))
        results.append(_verdict("fig3.csv", "slice_normalization", worst <= 1e-6, f"max |integral - 1| = {worst:.2e}"))

    names = sorted((n for n in tables if n.startswith("fig3_steady_T")), key=_temperature_of)
    discrepancy = {}
    for name in names:
        table = tables[name]
        x, steady, equilibrium = table.column("x"), table.column("p_steady"), table.column("p_equilibrium")
        discrepancy[name] = float(np.max(np.abs(steady - equilibrium)))
    if names:
        coldest = names[0]
        table = tables[coldest]
        x = table.column("x")
        results.append(_verdict(coldest, "steady_dip_at_centre",
                                _centre_is_extremum(x, table.column("p_steady"), minimum=True),
                                f"T={_temperature_of(coldest):g}"))
        results.append(_verdict(coldest, "equilibrium_peak_at_centre",
                                _centre_is_extremum(x, table.column("p_equilibrium"), minimum=False),
                                f"T={_temperature_of(coldest):g}"))
    if len(names) >= 2:
        coldest, hottest = names[0], names[-1]
        ratio = discrepancy[coldest] / discrepancy[hottest] if discrepancy[hottest] > 0 else math.inf
        results.append(_verdict(hottest, "discrepancy_reduced_at_high_temperature", ratio >= 5,
                                f"sup-norm ratio {ratio:.3g}"))
    return results


def check_se_curves(tables: Dict[str, CsvTable]) -> List[CheckResult]:
    target = "fig4.csv"
    if target not in tables:
        return []
    table = tables[target]
    T = table.column("T")
    e_fe, s_fe = table.column("e_fe"), table.column("s_fe")
    e_eq, s_eq = table.column("e_eq"), table.column("s_eq")
    results = []

    if T.size and T[0] == 0:
        errors = [abs(e_fe[0] - 4.0), abs(e_eq[0] - 1.0), abs(s_eq[0])]
        entropy_error = abs(s_fe[0] - THERMO_CONFIG["zero_temperature_entropy"])
        passed = max(errors) <= 1e-9 and entropy_error <= 1e-3
        results.append(_verdict(target, "zero_temperature_row", passed, f"S_fe = {s_fe[0]:.6g}"))
    else:
        results.append(_skip(target, "zero_temperature_row", "grid does not start at T = 0"))

    finite = np.isfinite(s_fe) & np.isfinite(s_eq)
    steps = [np.diff(column[finite]) for column in (e_fe, s_fe, e_eq, s_eq)]
    monotone = all(np.all(step >= -1e-10) for step in steps)
    results.append(_verdict(target, "monotone_in_temperature", monotone, f"{int(finite.sum())} rows"))

    if np.any(finite) and s_eq[finite][-1] > 0:
        last = np.flatnonzero(finite)[-1]
        relative = abs(s_fe[last] - s_eq[last]) / s_eq[last]
        results.append(_verdict(target, "high_temperature_agreement", relative <= 0.05,
                                f"relative gap {relative:.3g} at T={T[last]:g}"))
    return results


CHECKS: List[Callable[[Dict[str, CsvTable]], List[CheckResult]]] = [
    check_entropy_sweep,
    check_distributions,
    check_dynamics,
    check_se_curves,
]


def evaluate_checks(tables: Dict[str, CsvTable]) -> List[CheckResult]:
    results = []
    for check in CHECKS:
        results.extend(check(tables))
    return results


def embed_checks(tables: Dict[str, CsvTable]) -> List[CheckResult]:
    """Evaluate on the serialised values and append '# check:' lines to each target table."""
    rounded = {name: table.rounded() for name, table in tables.items()}
    results = evaluate_checks(rounded)
    for result in results:
        if result.target in tables:
            tables[result.target].add_comment(result.line())
    return results


def print_header(text: str):
    """Print a formatted header."""
    click.secho("\n" + "=" * 60, fg="blue", bold=True)
    click.secho(text.center(60), fg="blue", bold=True)
    click.secho("=" * 60 + "\n", fg="blue", bold=True)


def print_success(text: str):
    click.secho(f"✅ {text}", fg="green")


def print_error(text: str):
    click.secho(f"❌ {text}", fg="red")


def print_warning(text: str):
    click.secho(f"⚠️  {text}", fg="yellow")


def check_directory(directory: Path) -> bool:
    """
    Re-evaluate every check from the CSV files in a directory and compare with
    the verdicts embedded when they were written.

    Returns:
        True when no check fails and every embedded verdict is reproduced
    """
    directory = Path(directory)
    print_header(f"Checking {directory}")
    paths = sorted(directory.glob("*.csv"))
    if not paths:
        print_error("No CSV files found")
        return False

    tables = {path.name: read_table(path) for path in paths}
    results = evaluate_checks(tables)
    all_passed = True
    for result in results:
        label = f"{result.target}: {result.name} ({result.value})"
        if result.status == PASS:
            print_success(label)
        elif result.status == SKIP:
            print_warning(label)
        else:
            print_error(label)
            all_passed = False

        embedded = [line for line in tables[result.target].comments("check:")
                    if line.startswith(f"{result.name} =")]
        if embedded and not embedded[0].startswith(f"{result.name} = {result.status}"):
            print_error(f"{result.target}: embedded verdict '{embedded[0]}' not reproduced")
            all_passed = False

    print_header("Summary")
    if all_passed:
        print_success(f"All checks passed for {len(paths)} file(s)")
    else:
        print_error("Some checks failed")
    return all_passed
