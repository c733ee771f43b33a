"""
Orchestration System
Runs a boxgas subcommand, turns results into CSV tables, embeds checks and
writes tables plus optional plot scripts. A failing point never aborts the run.
"""

import logging
import math
from pathlib import Path
from typing import Dict, List

import numpy as np

from artifacts import CsvTable, emit_plot_script, format_number, provenance_block
from checks import embed_checks
from config import OUTPUT_CONFIG, QUENCH_CONFIG
from dynamics import DephasingModel, dynamics_movie, equilibrium_profile, steady_profile
from errors import BoxGasError
from quench import build_quench_state, diagonal_distribution, thermal_reference
from run_config import RunConfig
from thermo import se_curves, sweep_ratio

logger = logging.getLogger(__name__)


def _temperature_label(T: float) -> str:
    return format(T, ".12g")


class FigureOrchestrator:
    """Produces the tables of one subcommand from a RunConfig."""

    def __init__(self, run_config: RunConfig, progress: bool = False):
        """
        Args:
            run_config: Validated run settings
            progress: Show tqdm progress bars for sweeps
        """
        self.run_config = run_config
        self.progress = progress
        self.points = 0
        self.failures = 0

    def _provenance(self, extra: List[str] = None) -> List[str]:
        return provenance_block(self.run_config.figure_tag, self.run_config.echo(), extra)

    def _record_failure(self, label: str, error: Exception) -> str:
        self.failures += 1
        message = f"diagnostic: {label}: {error}"
        logger.warning(f"{label} failed: {error}")
        return message

    def run_entropy_sweep(self) -> List[CsvTable]:
        cfg = self.run_config
        result = sweep_ratio(cfg.trap(), cfg.ratios, n_max=cfg.n_max, workers=cfg.workers, progress=self.progress)
        self.points += len(result.axis)
        self.failures += result.failures
        classical = np.full(len(result.axis), math.log(2.0))
        rows = np.column_stack([result.axis, result.ds_fe, result.ds_iso, classical])
        extra = [f"diagnostic: {line}" for line in result.diagnostics]
        header = ["ratio", "delta_s_fe", "delta_s_iso", "s_classical"]
        return [CsvTable("fig1b.csv", header, rows, self._provenance(extra))]

    def run_distribution(self) -> List[CsvTable]:
        cfg = self.run_config
        tables = []
        for T in cfg.temps:
            self.points += 1
            name = f"fig2_T{_temperature_label(T)}.csv"
            trap = cfg.trap(T)
            try:
                dist = diagonal_distribution(trap, cfg.n_max)
                reference = thermal_reference(trap, dist.n_max)
                rows = np.column_stack([dist.indices, dist.d, reference])
                extra = [f"temperature: {_temperature_label(T)}",
                         f"tail_mass: {dist.tail_mass:.3e}"]
            except BoxGasError as e:
                rows = np.full((1, 3), np.nan)
                extra = [self._record_failure(f"T={_temperature_label(T)}", e)]
            tables.append(CsvTable(name, ["m", "d_m", "thermal_reference"], rows, self._provenance(extra)))
        return tables

    def _model(self, n_max: int) -> DephasingModel:
        cfg = self.run_config
        if cfg.model == "wall":
            return DephasingModel.wall(cfg.gamma, n_max)
        return DephasingModel.uniform(cfg.gamma)

    def run_dynamics(self) -> List[CsvTable]:
        cfg = self.run_config
        n_max = cfg.n_max if cfg.n_max is not None else QUENCH_CONFIG["dynamics_n_max"]
        model = self._model(n_max)

        movie_blocks = []
        movie_extra = []
        steady_tables = []
        for T in cfg.temps:
            self.points += 1
            label = _temperature_label(T)
            trap = cfg.trap(T)
            try:
                grid = dynamics_movie(trap, model, cfg.windows, cfg.nx, cfg.nt, n_max)
                state = build_quench_state(trap, n_max)
                steady = steady_profile(state, grid.x)
                equilibrium = equilibrium_profile(trap, grid.x, n_max)
            except BoxGasError as e:
                movie_extra.append(self._record_failure(f"T={label}", e))
                steady_tables.append(CsvTable(f"fig3_steady_T{label}.csv", ["x", "p_steady", "p_equilibrium"],
                                              np.full((1, 3), np.nan), self._provenance()))
                continue

            tt, xx = np.meshgrid(grid.t, grid.x, indexing="ij")
            block = np.column_stack([np.full(tt.size, T), tt.ravel(), xx.ravel(), grid.p.T.ravel()])
            movie_blocks.append(block)
            movie_extra.extend(f"warning: T={label}: {message}" for message in grid.warnings)
            steady_extra = [f"temperature: {label}", f"tail_mass: {grid.meta['tail_mass']:.3e}"]
            steady_tables.append(CsvTable(f"fig3_steady_T{label}.csv", ["x", "p_steady", "p_equilibrium"],
                                          np.column_stack([grid.x, steady, equilibrium]),
                                          self._provenance(steady_extra)))

        rows = np.vstack(movie_blocks) if movie_blocks else np.full((1, 4), np.nan)
        movie = CsvTable("fig3.csv", ["T", "t", "x", "p"], rows, self._provenance(movie_extra))
        return [movie] + steady_tables

    def run_se_curve(self) -> List[CsvTable]:
        cfg = self.run_config
        fe, eq, diagnostics = se_curves(cfg.trap(), cfg.temps, n_max=cfg.n_max, workers=cfg.workers,
                                        progress=self.progress)
        self.points += len(cfg.temps)
        self.failures += len(diagnostics)
        rows = np.column_stack([fe.temperatures, fe.energy, fe.entropy, eq.energy, eq.entropy])
        extra = [f"marker: C = {format_number(OUTPUT_CONFIG['plot_marker_constant'])}"]
        extra += [f"diagnostic: {line}" for line in diagnostics]
        return [CsvTable("fig4.csv", ["T", "e_fe", "s_fe", "e_eq", "s_eq"], rows, self._provenance(extra))]

    def build_tables(self) -> List[CsvTable]:
        runners = {
            "entropy-sweep": self.run_entropy_sweep,
            "distribution": self.run_distribution,
            "dynamics": self.run_dynamics,
            "se-curve": self.run_se_curve,
        }
        return runners[self.run_config.subcommand]()

    def run(self) -> Dict:
        """
        Compute, check and write every table of the subcommand.

        Returns:
            Dict with written paths, check results and point/failure counts
        """
        tables = self.build_tables()
        checks = embed_checks({table.name: table for table in tables})

        directory = Path(self.run_config.output_dir)
        paths = [table.write(directory) for table in tables]
        if self.run_config.emit_plots:
            paths += [emit_plot_script(table, self.run_config.figure_tag, directory) for table in tables]

        return {
            "paths": paths,
            "checks": checks,
            "points": self.points,
            "failures": self.failures,
            "all_failed": self.points > 0 and self.failures >= self.points,
        }
