import math

import numpy as np
import pytest
from click.testing import CliRunner

from artifacts import read_table
from main import EXIT_ALL_FAILED, EXIT_CONFIG, EXIT_OK, cli
from orchestration import _temperature_label

SWEEP = ["-q", "entropy-sweep", "--ratios", "0.05,1,50", "--no-emit-plots"]


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture(scope="module")
def sweep_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("sweep")
    result = CliRunner().invoke(cli, SWEEP + ["--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    return out


class TestEntropySweep:
    def test_writes_table_with_provenance(self, sweep_dir):
        table = read_table(sweep_dir / "fig1b.csv")
        assert table.header == ["ratio", "delta_s_fe", "delta_s_iso", "s_classical"]
        assert len(table.rows) == 3
        assert "figure: fig1b" in table.provenance
        assert "classical_limit = PASS" in " ".join(table.comments("check:"))

    def test_classical_column_is_ln2(self, sweep_dir):
        table = read_table(sweep_dir / "fig1b.csv")
        np.testing.assert_allclose(table.column("s_classical"), math.log(2.0), rtol=1e-11)

    def test_rerun_is_byte_identical(self, runner, sweep_dir, tmp_path):
        assert runner.invoke(cli, SWEEP + ["--out", str(tmp_path)]).exit_code == EXIT_OK
        assert (tmp_path / "fig1b.csv").read_bytes() == (sweep_dir / "fig1b.csv").read_bytes()

    def test_rerun_from_written_table(self, runner, sweep_dir, tmp_path):
        args = ["-q", "entropy-sweep", "--config", str(sweep_dir / "fig1b.csv"), "--out", str(tmp_path)]
        assert runner.invoke(cli, args).exit_code == EXIT_OK
        assert (tmp_path / "fig1b.csv").read_bytes() == (sweep_dir / "fig1b.csv").read_bytes()

    def test_plot_script(self, runner, tmp_path):
        result = runner.invoke(cli, ["-q", "entropy-sweep", "--ratios", "0.5,2", "--emit-plots",
                                     "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK
        assert "'fig1b.csv'" in (tmp_path / "fig1b.plot").read_text()

    def test_output_directory_from_environment(self, tmp_path):
        runner = CliRunner(env={"BOXGAS_OUT": str(tmp_path / "env_out")})
        assert runner.invoke(cli, ["-q", "entropy-sweep", "--ratios", "0.5,2"]).exit_code == EXIT_OK
        assert (tmp_path / "env_out" / "fig1b.csv").is_file()

    def test_every_point_failing(self, runner, tmp_path):
        result = runner.invoke(cli, ["-q", "entropy-sweep", "--ratios", "50,60", "--n-max", "16",
                                     "--out", str(tmp_path)])
        assert result.exit_code == EXIT_ALL_FAILED
        table = read_table(tmp_path / "fig1b.csv")
        assert any(line.startswith("diagnostic:") for line in table.provenance)


class TestConfigurationErrors:
    def test_unknown_config_key(self, runner, tmp_path):
        path = tmp_path / "bad.env"
        path.write_text("temperature = 3\n")
        result = runner.invoke(cli, ["-q", "entropy-sweep", "--config", str(path), "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG

    def test_unsorted_axis(self, runner, tmp_path):
        result = runner.invoke(cli, ["-q", "entropy-sweep", "--ratios", "2,1", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG
        assert not (tmp_path / "fig1b.csv").exists()

    def test_zero_temperature_sweep(self, runner, tmp_path):
        result = runner.invoke(cli, ["-q", "entropy-sweep", "--T", "0", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG


class TestOtherSubcommands:
    def test_distribution(self, runner, tmp_path):
        result = runner.invoke(cli, ["-q", "distribution", "--temps", "1,100", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK
        for T in ("1", "100"):
            table = read_table(tmp_path / f"fig2_T{T}.csv")
            assert table.header == ["m", "d_m", "thermal_reference"]
            assert "even_odd_split = PASS" in " ".join(table.comments("check:"))

    def test_se_curve(self, runner, tmp_path):
        result = runner.invoke(cli, ["-q", "se-curve", "--temps", "0,1,10", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK
        table = read_table(tmp_path / "fig4.csv")
        assert table.column("e_fe")[0] == 4.0
        assert table.column("s_eq")[0] == 0.0
        assert "marker: C = 1.035" in table.provenance

    def test_dynamics(self, runner, tmp_path):
        result = runner.invoke(cli, ["-q", "dynamics", "--temps", "1", "--nx", "41", "--nt", "5",
                                     "--n-max", "32", "--windows", "0:1", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK
        movie = read_table(tmp_path / "fig3.csv")
        assert movie.header == ["T", "t", "x", "p"]
        assert len(movie.rows) == 41 * 5
        assert (tmp_path / "fig3_steady_T1.csv").is_file()


class TestCheckCommand:
    def test_reproduces_embedded_verdicts(self, runner, sweep_dir):
        assert runner.invoke(cli, ["check", str(sweep_dir)]).exit_code == EXIT_OK

    def test_detects_tampered_verdict(self, runner, sweep_dir, tmp_path):
        text = (sweep_dir / "fig1b.csv").read_text()
        (tmp_path / "fig1b.csv").write_text(text.replace("classical_limit = PASS", "classical_limit = FAIL"))
        assert runner.invoke(cli, ["check", str(tmp_path)]).exit_code == EXIT_ALL_FAILED

    def test_empty_directory(self, runner, tmp_path):
        assert runner.invoke(cli, ["check", str(tmp_path)]).exit_code == EXIT_ALL_FAILED


@pytest.mark.slow
def test_all_figures(runner, tmp_path):
    result = runner.invoke(cli, ["-q", "fig", "all", "--out", str(tmp_path)])
    assert result.exit_code == EXIT_OK
    for name in ("fig1b.csv", "fig2_T1.csv", "fig3.csv", "fig4.csv", "fig1b.plot"):
        assert (tmp_path / name).is_file()
    assert runner.invoke(cli, ["check", str(tmp_path)]).exit_code == EXIT_OK


class TestTemperatureLabels:
    def test_round_values_stay_short(self):
        assert [_temperature_label(T) for T in (1.0, 100.0, 1000.0)] == ["1", "100", "1000"]

    def test_close_temperatures_get_distinct_files(self):
        assert _temperature_label(1.0) != _temperature_label(1.0000001)
