import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DomainError, PositivityError
from quench import diagonal_distribution
from spectral import TrapConfig, classical_iso_limit
from thermo import (
    SweepResult,
    delta_s_free_expansion,
    delta_s_isothermal,
    entropy,
    entropy_diagonal,
    equilibrium_point,
    ratio_to_config,
    se_curves,
    sweep_ratio,
)

LN2 = math.log(2.0)


class TestEntropy:
    def test_pure_state(self):
        v = np.array([1.0, 1.0j]) / math.sqrt(2)
        assert entropy(np.outer(v, v.conj())) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        assert entropy(np.eye(4) / 4) == pytest.approx(math.log(4), rel=1e-14)

    def test_diag_half(self):
        assert entropy(np.diag([0.5, 0.5])) == pytest.approx(LN2, rel=1e-14)

    def test_rejects_non_hermitian(self):
        with pytest.raises(DomainError):
            entropy(np.array([[0.5, 0.1], [0.3, 0.5]]))

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(PositivityError):
            entropy(np.diag([1.1, -0.1]))

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            entropy(np.ones((2, 3)))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=2, max_value=12))
    def test_unitary_invariance(self, seed, size):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
        rho = a @ a.conj().T
        rho /= np.trace(rho).real
        q, _ = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
        assert entropy(q @ rho @ q.conj().T) == pytest.approx(entropy(rho), abs=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=2, max_value=40))
    def test_diagonal_agrees_with_matrix(self, seed, size):
        d = np.random.default_rng(seed).dirichlet(np.ones(size))
        assert entropy_diagonal(d) == pytest.approx(entropy(np.diag(d)), abs=1e-12)

    def test_diagonal_rejects_negative(self):
        with pytest.raises(DomainError):
            entropy_diagonal([0.6, 0.5, -1e-9])


class TestEntropyChanges:
    def test_zero_temperature_free_expansion(self, ground):
        assert entropy_diagonal(diagonal_distribution(ground, 256).d) == pytest.approx(1.035, abs=1e-3)
        assert delta_s_free_expansion(ground) == pytest.approx(1.035, abs=1e-3)

    def test_zero_temperature_isothermal(self, ground):
        assert delta_s_isothermal(ground) == 0.0

    @pytest.mark.parametrize("ratio,tolerance", [(100.0, 1e-2), (40.0, 2e-2)])
    def test_classical_limit(self, ratio, tolerance):
        cfg = ratio_to_config(TrapConfig(T=1.0), ratio)
        assert delta_s_free_expansion(cfg) == pytest.approx(LN2, abs=tolerance)
        assert delta_s_isothermal(cfg) == pytest.approx(LN2, abs=tolerance)

    def test_classical_limit_approached_from_above(self):
        cfg = ratio_to_config(TrapConfig(T=1.0), 100.0)
        assert delta_s_isothermal(cfg) > LN2
        assert delta_s_isothermal(cfg) == pytest.approx(classical_iso_limit(100.0), abs=1e-9)

    def test_ratio_to_config_sets_size(self):
        base = TrapConfig(T=2.0)
        cfg = ratio_to_config(base, 3.0)
        assert cfg.size_ratio == pytest.approx(3.0, rel=1e-14)

    def test_ratio_undefined_at_zero_temperature(self, ground):
        with pytest.raises(DomainError):
            ratio_to_config(ground, 1.0)

    def test_equilibrium_point_ground(self, ground):
        assert equilibrium_point(ground) == (pytest.approx(1.0), 0.0)

    def test_free_expansion_error_halves_with_basis(self, ground):
        reference = entropy_diagonal(diagonal_distribution(ground, 4096).d)
        errors = [reference - entropy_diagonal(diagonal_distribution(ground, n).d) for n in (32, 64, 128, 256)]
        assert all(later <= earlier / 2 for earlier, later in zip(errors, errors[1:]))


class TestSweep:
    def test_shape_of_crossover(self):
        result = sweep_ratio(TrapConfig(T=1.0), [0.1, 1.0, 10.0, 40.0, 100.0])
        assert result.failures == 0
        assert np.all(np.diff(result.ds_fe) < 0)
        assert result.ds_fe[0] == pytest.approx(1.035, abs=1e-3)
        assert np.all(np.diff(result.ds_iso[:3]) > 0)
        assert result.ds_iso[0] == pytest.approx(0.0, abs=1e-3)
        assert np.all(result.ds_fe[:2] >= result.ds_iso[:2])

    def test_classical_side_converges_from_above(self):
        result = sweep_ratio(TrapConfig(T=1.0), [5.0, 10.0, 20.0, 40.0, 100.0])
        assert np.all(np.diff(result.ds_fe) < 0)
        assert np.all(np.diff(result.ds_iso) < 0)
        assert np.all(result.ds_iso > LN2)

    def test_rejects_unsorted_axis(self):
        with pytest.raises(DomainError):
            sweep_ratio(TrapConfig(T=1.0), [1.0, 0.5])

    def test_parallel_matches_serial(self):
        ratios = [0.5, 2.0, 8.0]
        serial = sweep_ratio(TrapConfig(T=1.0), ratios)
        parallel = sweep_ratio(TrapConfig(T=1.0), ratios, workers=2)
        np.testing.assert_array_equal(serial.ds_fe, parallel.ds_fe)
        np.testing.assert_array_equal(serial.ds_iso, parallel.ds_iso)

    def test_failed_point_becomes_nan(self):
        result = sweep_ratio(TrapConfig(T=1.0), [0.5, 50.0], n_max=16)
        assert math.isnan(result.ds_fe[1])
        assert result.failures == 1
        assert "ratio=50" in result.diagnostics[0]

    def test_result_validates_columns(self):
        with pytest.raises(DomainError):
            SweepResult(axis=np.array([1.0, 2.0]), ds_fe=np.array([0.1]), ds_iso=np.array([0.1, 0.2]))


class TestEntropyEnergyCurves:
    def test_curves(self):
        fe, eq, diagnostics = se_curves(TrapConfig(L=1.0), [0.0, 1.0, 10.0, 100.0, 1000.0, 10000.0])
        assert diagnostics == []
        assert fe.energy[0] == pytest.approx(4.0, rel=1e-12)
        assert fe.entropy[0] == pytest.approx(1.035, abs=1e-3)
        assert eq.energy[0] == pytest.approx(1.0, rel=1e-12)
        assert eq.entropy[0] == 0.0
        assert fe.is_monotone() and eq.is_monotone()
        assert abs(fe.entropy[-1] - eq.entropy[-1]) / eq.entropy[-1] < 0.02

    def test_free_expansion_energy_is_half_trap_energy(self):
        fe, eq, _ = se_curves(TrapConfig(L=1.0), [100.0])
        assert fe.energy[0] > eq.energy[0]
