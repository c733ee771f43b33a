import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from errors import DomainError
from spectral import (
    FULL,
    HALF,
    SpectralBasis,
    TrapConfig,
    classical_iso_limit,
    equipartition_ratio,
    gaussian_cutoff,
    half_trap_wavefunction,
    internal_energy,
    odd_tail,
    overlap,
    overlap_matrix,
    overlap_tail_bound,
    partition_function,
    reduced_partition_function,
    reduced_weights,
    thermal_entropy,
    thermal_occupations,
    theta3,
)


class TestTrapConfig:
    def test_alpha_natural_units(self, natural):
        assert natural.alpha == pytest.approx(math.pi ** 2 / 2, rel=1e-15)

    @pytest.mark.parametrize("T", [0.01, 1.0, 100.0, 1e4])
    @pytest.mark.parametrize("L", [0.1, 1.0, 7.0])
    def test_q_matches_wavelength(self, T, L):
        cfg = TrapConfig(L=L, T=T)
        assert cfg.q == pytest.approx(math.pi * (cfg.thermal_wavelength / L) ** 2, rel=1e-12)

    def test_zero_temperature(self, ground):
        assert ground.q == math.inf
        assert ground.thermal_wavelength == math.inf
        assert ground.size_ratio == 0.0

    def test_basis_energies_are_closed_form(self, natural):
        basis = SpectralBasis(natural, 8)
        np.testing.assert_array_equal(basis.energies, natural.alpha * np.arange(1, 9) ** 2)

    def test_basis_needs_four_levels(self, natural):
        with pytest.raises(DomainError):
            SpectralBasis(natural, 3)

    @pytest.mark.parametrize("kwargs", [{"L": 0.0}, {"M": -1.0}, {"T": -1.0}, {"hbar": 0.0}, {"L": math.inf}])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(DomainError):
            TrapConfig(**kwargs)

    def test_domain_error_is_value_error(self):
        with pytest.raises(ValueError):
            TrapConfig(L=-2.0)


class TestPartitionFunction:
    def test_large_q_is_single_term(self):
        assert partition_function(50.0) == pytest.approx(math.exp(-50.0), rel=1e-15)

    def test_known_value(self):
        assert partition_function(2 * math.pi) == pytest.approx(1.86744e-3, rel=1e-5)

    @pytest.mark.parametrize("q", [0.01, 0.3, 1.0, 4.0])
    def test_matches_triple_product(self, q):
        x = math.exp(-q)
        k = np.arange(1, 4000)
        product = np.prod((1 - x ** (2 * k)) * (1 + x ** (2 * k - 1)) ** 2)
        assert theta3(x) == pytest.approx(product, rel=1e-10)
        assert partition_function(q) == pytest.approx((product - 1) / 2, rel=1e-10)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(min_value=1e-3, max_value=50.0), st.floats(min_value=1.01, max_value=3.0))
    def test_decreasing_in_q(self, q, factor):
        assert partition_function(q * factor) < partition_function(q)

    def test_reduced_form_survives_underflow(self):
        assert reduced_partition_function(2000.0) == 1.0
        with pytest.raises(DomainError):
            partition_function(2000.0)

    @pytest.mark.parametrize("q", [0.0, -1.0, math.nan, math.inf])
    def test_invalid_q(self, q):
        with pytest.raises(DomainError):
            partition_function(q)


class TestOverlaps:
    def test_ground_pair(self):
        assert overlap(1, 1) ** 2 == pytest.approx(32 / (9 * math.pi ** 2), rel=1e-14)

    @pytest.mark.parametrize("n", [1, 2, 5, 30])
    def test_resonant_even_level(self, n):
        assert overlap(2 * n, n) ** 2 == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("m,n", [(2, 2), (4, 1), (6, 2), (8, 3)])
    def test_other_even_levels_vanish(self, m, n):
        assert overlap(m, n) == 0.0

    def test_matches_quadrature(self):
        m_values = np.arange(1, 51)
        n_values = np.arange(1, 26)
        cfg = TrapConfig(L=1.0)
        nodes, weights = np.polynomial.legendre.leggauss(600)
        x = -0.25 + 0.25 * nodes  # maps [-1, 1] onto [-L/2, 0]
        psi = SpectralBasis(cfg, 50).wavefunctions(x)
        phi = np.column_stack([half_trap_wavefunction(n, x, cfg) for n in n_values])
        quadrature = psi.T @ (0.25 * weights[:, None] * phi)
        assert np.max(np.abs(quadrature - overlap_matrix(m_values, n_values))) < 1e-10

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=1, max_value=5000), st.integers(min_value=1, max_value=2000))
    def test_bounded_by_one(self, m, n):
        assert abs(overlap(m, n)) <= 1.0

    @pytest.mark.parametrize("n", [1, 3, 10])
    def test_completeness(self, n):
        m_max = overlap_tail_bound(n, 1e-10)
        total = np.sum(overlap_matrix(np.arange(1, m_max + 1), [n]) ** 2)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_tail_bound_is_conservative(self):
        n, eps = 2, 1e-6
        m_max = overlap_tail_bound(n, eps)
        retained = np.sum(overlap_matrix(np.arange(1, m_max + 1), [n]) ** 2)
        assert 1.0 - retained <= eps

    def test_orthonormal_half_trap_states(self):
        m_max = overlap_tail_bound(10, 1e-10)
        columns = overlap_matrix(np.arange(1, m_max + 1), np.arange(1, 11))
        gram = columns.T @ columns
        assert np.max(np.abs(gram - np.eye(10))) <= 1e-8

    @pytest.mark.parametrize("m,n", [(0, 1), (1, 0), (-3, 2)])
    def test_invalid_indices(self, m, n):
        with pytest.raises(DomainError):
            overlap(m, n)


class TestOddTail:
    @pytest.mark.parametrize("n_max", [4, 17, 64, 301])
    def test_agrees_with_direct_sum(self, n_max):
        n = np.array([1, 2, 3, 7])
        mass, energy = odd_tail(n, n_max)
        odd = np.arange(n_max + 1 + (n_max % 2), 400001, 2)
        squares = overlap_matrix(odd, n) ** 2
        assert mass == pytest.approx(squares.sum(axis=0), rel=1e-4, abs=1e-12)
        direct_energy = (odd[:, None] ** 2 * squares).sum(axis=0)
        assert energy[0] == pytest.approx(direct_energy[0], rel=1e-3)

    def test_series_branch_at_smallest_basis(self):
        mass, energy = odd_tail([1], 1)
        assert mass[0] == pytest.approx(0.5 - 32 / (9 * math.pi ** 2), abs=1e-13)
        assert energy[0] == pytest.approx(2.0 - 32 / (9 * math.pi ** 2), abs=1e-12)

    def test_complement_branch_for_large_n(self):
        n_max = 10
        mass, _ = odd_tail([20], n_max)
        retained = np.sum(overlap_matrix(np.arange(1, n_max + 1, 2), [20]) ** 2)
        assert mass[0] == pytest.approx(0.5 - retained, abs=1e-14)


class TestThermal:
    def test_weights_normalised(self, natural):
        size = gaussian_cutoff(natural.q)
        assert thermal_occupations(natural, size).sum() == pytest.approx(1.0, abs=1e-12)

    def test_zero_temperature_point_mass(self, ground):
        p = thermal_occupations(ground, 8, HALF)
        assert p[0] == 1.0 and p[1:].sum() == 0.0

    def test_reduced_weights_large_q(self):
        p = reduced_weights(5000.0, 4)
        assert p[0] == 1.0 and p[1] == 0.0

    def test_zero_temperature_energies(self, ground):
        assert internal_energy(ground, HALF) == pytest.approx(4 * ground.alpha, rel=1e-15)
        assert internal_energy(ground, FULL) == pytest.approx(ground.alpha, rel=1e-15)
        assert thermal_entropy(ground, FULL) == 0.0

    @pytest.mark.parametrize("q", [0.01, 1e-3, 1e-4])
    def test_equipartition_exact_form(self, q):
        cfg = TrapConfig(L=1.0, T=4 * (math.pi ** 2 / 2) / q)
        assert internal_energy(cfg, HALF) / cfg.T == pytest.approx(equipartition_ratio(q), rel=1e-9)

    def test_equipartition_approach(self):
        assert equipartition_ratio(1e-4) == pytest.approx(0.5, rel=1e-2)

    @pytest.mark.parametrize("ratio", [5.0, 10.0, 40.0, 100.0])
    def test_isothermal_exact_form(self, ratio):
        base = TrapConfig(T=1.0)
        cfg = base.with_size(ratio * base.thermal_wavelength)
        delta = thermal_entropy(cfg, FULL) - thermal_entropy(cfg, HALF)
        assert delta == pytest.approx(classical_iso_limit(ratio), abs=1e-9)

    def test_invalid_variant(self, natural):
        with pytest.raises(DomainError):
            internal_energy(natural, "quarter")
