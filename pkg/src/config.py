"""
Configuration file for tunable parameters of the boxgas simulations.
Adjust these values to change numerical tolerances and figure defaults.
"""

# Physical defaults (natural units: kB = hbar = M = 1)
SPECTRAL_CONFIG = {
    "hbar": 1.0,
    "kB": 1.0,
    "mass": 1.0,
    "temperature": 1.0,
    "trap_size": 1.0,

    # Partition-function series stops once the next term is below tol * sum
    "partition_tol": 1e-16,

    # Gaussian occupations are cut where exp(-q n^2) < rel * exp(-q)
    "gaussian_rel_cutoff": 1e-16,

    # Remainder allowed for tail-bounded overlap sums (odd-m power-law tail)
    "overlap_tail_eps": 1e-10,
}

# Quench construction
QUENCH_CONFIG = {
    "min_n_max": 4,
    "thermo_n_max": 512,  # floor for thermodynamic sweeps
    "dynamics_n_max": 128,  # dense evolution and profiles
    "trace_tolerance": 1e-6,  # unaccounted probability that raises TruncationError
    "mass_tail_tol": 1e-9,
    "entropy_tail_tol": 1e-6,
    "max_auto_n_max": 65536,
}

# Entropy evaluation
THERMO_CONFIG = {
    "eigenvalue_floor": 1e-14,  # eigenvalues below are treated as zero
    "positivity_tolerance": 1e-8,
    "diagonal_negativity_tolerance": 1e-12,
    "hermiticity_tolerance": 1e-10,
    "zero_temperature_entropy": 1.035,  # free-expansion entropy at T -> 0, units kB
}

# Dephasing dynamics (times in units hbar/alpha, rates in alpha/hbar)
DYNAMICS_CONFIG = {
    "gamma": 0.1,
    "nx": 400,
    "nt": 250,
    "windows": [(0.0, 5.0), (35.0, 40.0)],
    "stability_limit": 0.1,  # dt * max(omega, Gamma)
    "trace_drift_tolerance": 1e-7,
    "imaginary_residual_tolerance": 1e-10,
    "nyquist_significance": 1e-3,  # coherences below this fraction are ignored
}

# Output and figure defaults
OUTPUT_CONFIG = {
    "version": "1.0.0",
    "significant_digits": 12,
    "output_env_var": "BOXGAS_OUT",
    "workers_env_var": "BOXGAS_WORKERS",
    "default_output_dir": "boxgas_out",

    # Entropy sweep axis: geometric grid over L / lambda_T
    "ratio_start": 0.05,
    "ratio_stop": 100.0,
    "ratio_count": 60,

    "distribution_temps": [1.0, 100.0, 1000.0],
    "dynamics_temps": [1.0, 100.0],

    # Entropy-energy curves: T = 0 plus a geometric grid
    "se_temp_start": 0.1,
    "se_temp_stop": 10000.0,
    "se_temp_count": 41,

    "plot_marker_constant": 1.035,
    "experimental_ratio": 40.0,  # L / lambda_T of typical cold-atom traps
}
