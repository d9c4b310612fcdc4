import math

import numpy as np
import pytest

import diracgb as dg


def test_dirac_algebra_and_projectors():
    alpha, beta = dg.dirac_matrices()
    eye = np.eye(4)
    for a in alpha:
        assert np.array_equal(a @ beta + beta @ a, np.zeros((4, 4)))
        assert np.array_equal(a @ a, eye)
    pot = dg.make_potential("harmonic")
    x, xi = np.array([0.3, -0.1, 0.2]), np.array([0.5, 0.4, -0.7])
    p = dg.projector(dg.Branch.Plus, x, xi, pot)
    q = dg.projector(dg.Branch.Minus, x, xi, pot)
    assert np.abs(p @ p - p).max() < 1e-13
    assert np.abs(p + q - eye).max() < 1e-13
    lam = math.sqrt(xi @ xi + 1.0)
    assert dg.eigenvalue_h(dg.Branch.Plus, x, xi, pot) == pytest.approx(lam + 0.5 * x @ x)


def test_lagrangian_beams_track_the_exact_solution():
    eps = 1.0 / 256
    data = dg.example1_data(1)
    zero = dg.make_potential("zero")
    beams = dg.init_beams(data, dg.beam_mesh(1, -0.5, 0.5, 0.5 * math.sqrt(eps)), eps, zero)
    assert len(beams) > 0
    beams = dg.evolve(beams, 0.5, 0.5 * math.sqrt(eps), zero)
    assert beams.t == 0.5
    grid = dg.box_grid(1, -0.5, 0.5, 201)
    field = dg.sum_beams(beams, grid)
    assert field.values.shape == (201, 4)
    err = dg.error_norms(field, dg.exact_example1(grid, 0.5, eps))
    assert 0.0 < err.linf < 1.0


def test_spectral_mass_and_field_values():
    eps = 1.0 / 64
    grid = dg.periodic_grid(1, -1.0, 1.0, 128)
    f0 = dg.sample_initial(dg.example1_data(1), grid, eps)
    solver = dg.SpectralSolver(grid, eps)
    f1 = solver.strang_solve(f0, 0.2, 0.01, dg.make_potential("harmonic"))
    assert abs(dg.mass(f1) - dg.mass(f0)) < 1e-12 * dg.mass(f0)
    f1.values = np.zeros((128, 4), dtype=complex)
    assert f1.max_abs() == 0.0
    with pytest.raises(ValueError):
        f1.values = np.zeros((3, 4))


def test_eulerian_reconstruction_runs():
    eps = 1.0 / 256
    data = dg.gaussian_packet(np.zeros(1), np.zeros(1), cosine_bump=0.05)
    zero = dg.make_potential("zero")
    g = dg.phase_grid(1, -0.5, 0.5, 33, -0.6, 0.6, 33)
    plus = dg.evolve_phase(dg.init_phase_fields(data, g, dg.Branch.Plus, zero), 0.1, 0.01, zero)
    minus = dg.evolve_phase(dg.init_phase_fields(data, g, dg.Branch.Minus, zero), 0.1, 0.01, zero)
    field, info = dg.reconstruct(plus, minus, dg.box_grid(1, -0.3, 0.3, 61), eps)
    assert info["active"] > 0
    assert field.max_abs() > 0.5


def test_config_errors_raise(tmp_path):
    with pytest.raises(dg.ConfigError, match=r"\[experiment\] method"):
        dg.validate_config("[experiment]\nmethod = magic\n")
    text = "[experiment]\ndim = 1\nepsilon = 1/64, 1/128\ntimes = 0.25\n[output]\nfields = none\n"
    result = dg.run_experiment(text, str(tmp_path / "run"))
    assert (tmp_path / "run" / "errors.csv").exists()
    assert any(r["norm"] == "linf" for r in result["rates"])
