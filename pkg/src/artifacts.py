"""
Artifacts Module
CSV tables with provenance headers and the gnuplot scripts that render them.
"""

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence

import numpy as np

from config import OUTPUT_CONFIG
from errors import ConfigurationError

logger = logging.getLogger(__name__)


def format_number(value: float) -> str:
    """Fixed significant-digit text; NaN is written as 'nan'."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.{OUTPUT_CONFIG['significant_digits']}g}"


@dataclass
class CsvTable:
    """One output file: '#' provenance lines, a header row, numeric rows."""

    name: str
    header: List[str]
    rows: np.ndarray
    provenance: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if self.rows.size == 0:
            self.rows = np.empty((0, len(self.header)))
        if self.rows.shape[1] != len(self.header):
            raise ConfigurationError(
                f"{self.name}: {self.rows.shape[1]} columns but header has {len(self.header)}"
            )
        if not self.name.endswith(".csv"):
            raise ConfigurationError(f"table name must end in .csv, got {self.name!r}")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.header.index(name)]

    def add_comment(self, line: str) -> None:
        self.provenance.append(line)

    def comments(self, prefix: str) -> List[str]:
        return [line[len(prefix):].strip() for line in self.provenance if line.startswith(prefix)]

    def rounded(self) -> "CsvTable":
        """The table as it reads back after serialisation."""
        values = np.vectorize(lambda v: float(format_number(v)))(self.rows) if self.rows.size else self.rows
        return CsvTable(self.name, list(self.header), values, list(self.provenance))

    def render(self) -> str:
        buffer = io.StringIO()
        for line in self.provenance:
            buffer.write(f"# {line}\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([format_number(v) for v in row])
        return buffer.getvalue()

    def write(self, directory: Path) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / self.name
        path.write_text(self.render(), encoding="utf-8")
        logger.info(f"Wrote {path} ({len(self.rows)} rows)")
        return path


def read_table(path: Path) -> CsvTable:
    """Parse a CSV written by CsvTable.write."""
    path = Path(path)
    provenance = []
    data_lines = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            provenance.append(line[1:].strip())
        elif line.strip():
            data_lines.append(line)
    if not data_lines:
        raise ConfigurationError(f"{path} has no header row")
    reader = csv.reader(data_lines)
    header = next(reader)
    rows = [[float(v) for v in row] for row in reader]
    return CsvTable(path.name, header, np.array(rows) if rows else np.empty((0, len(header))), provenance)


def provenance_block(figure_tag: str, echo: Iterable[Sequence[str]], extra: Optional[List[str]] = None) -> List[str]:
    """Version, figure tag and sorted config echo; no timestamps so reruns are byte-identical."""
    lines = [f"boxgas {OUTPUT_CONFIG['version']}", f"figure: {figure_tag}"]
    lines.extend(f"config: {key} = {value}" for key, value in echo)
    lines.extend(extra or [])
    return lines


_PLOT_PREAMBLE = """set datafile separator ','
set datafile commentschars '#'
set key autotitle columnhead
set terminal pngcairo size 900,600
set output '{stem}.png'
"""


def plot_script(table: CsvTable, figure_tag: str) -> str:
    """gnuplot script that renders the table next to it."""
    stem = table.name[:-len(".csv")]
    data = f"'{table.name}'"
    lines = [_PLOT_PREAMBLE.format(stem=stem).rstrip("\n")]

    if figure_tag == "fig1b":
        experimental = format_number(OUTPUT_CONFIG["experimental_ratio"])
        lines += [
            "set logscale x",
            "set xlabel 'L / lambda_T'",
            "set ylabel 'Delta S / k_B'",
            f"set arrow from {experimental}, graph 0 to {experimental}, graph 1 nohead dashtype 3",
            f"plot {data} using 1:2 with linespoints title 'free expansion', \\",
            "     '' using 1:3 with linespoints title 'isothermal', \\",
            "     '' using 1:4 with lines dashtype 2 lc rgb 'gray' title 'ln 2'",
        ]
    elif figure_tag == "fig2":
        lines += [
            "set logscale y",
            "set xlabel 'level m'",
            "set ylabel 'occupation'",
            f"plot {data} using 1:2 with impulses lw 2 title 'post-quench', \\",
            "     '' using 1:3 with lines dashtype 2 title 'thermal reference'",
        ]
    elif figure_tag == "fig3" and "x" in table.header and "p_steady" in table.header:
        lines += [
            "set xlabel 'x / L'",
            "set ylabel 'p(x)'",
            f"plot {data} using 1:2 with lines title 'dephased', \\",
            "     '' using 1:3 with lines dashtype 2 title 'equilibrium'",
        ]
    elif figure_tag == "fig3":
        temperatures = sorted(set(table.column("T"))) if table.rows.size else []
        lines += [
            f"set multiplot layout {max(len(temperatures), 1)},1",
            "set xlabel 't (hbar / alpha)'",
            "set ylabel 'x'",
            "set cblabel 'p(x, t)'",
        ]
        for T in temperatures:
            lines += [
                f"set title 'T = {format_number(T)}'",
                f"plot {data} using 2:3:($1 == {format_number(T)} ? $4 : 1/0) with points pt 5 ps 0.3 palette notitle",
            ]
        lines.append("unset multiplot")
    elif figure_tag == "fig4":
        marker = OUTPUT_CONFIG["plot_marker_constant"]
        lines += [
            "set logscale x",
            "set xlabel 'E / alpha'",
            "set ylabel 'S / k_B'",
            f"plot {data} using 2:3 with linespoints title 'free expansion', \\",
            "     '' using 4:5 with linespoints title 'equilibrium', \\",
            f"     {marker} with lines dashtype 2 lc rgb 'gray' title '{marker}'",
        ]
    else:
        raise ConfigurationError(f"no plot layout for figure {figure_tag!r}")
    return "\n".join(lines) + "\n"


def emit_plot_script(table: CsvTable, figure_tag: str, directory: Path) -> Path:
    path = Path(directory) / (table.name[:-len(".csv")] + ".plot")
    path.write_text(plot_script(table, figure_tag), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
