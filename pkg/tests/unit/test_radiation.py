import numpy as np
import pytest

from csslab.radial import ComplexField, RadialGrid, l2_norm
from csslab.radiation import (
    RadiationSpec,
    data_distance,
    dt_z,
    expansion_profiles,
    hankel_j2,
    pseudoconformal,
    psi_z,
    z_full,
    z_lin_hat,
    z_values,
)


@pytest.fixture(scope="module")
def r_grid() -> RadialGrid:
    return RadialGrid.log_uniform(2048, 10.0)


def test_spec_requires_positive_exponent():
    with pytest.raises(ValueError):
        RadiationSpec(q=1.0, nu=-0.5)


@pytest.mark.parametrize("nu, count", [(0.5, 0), (2.0, 1), (2.5, 1), (3.0, 2), (4 + 1j, 2)])
def test_number_of_expansion_profiles(nu, count):
    assert RadiationSpec(nu=nu).n_profiles == count


def test_reversed_conjugates_parameters():
    spec = RadiationSpec(q=1 + 2j, nu=2 - 0.5j).reversed()
    assert spec.q == 1 - 2j
    assert spec.nu == 2 + 0.5j


@pytest.mark.parametrize("t", [1e-3, -1e-3, 0.2])
def test_linear_radiation_is_stationary_for_quadratic_profile(r_grid, t):
    # for ν = 2 the self-similar profile is exactly Y², so ẑ_lin = z*
    spec = RadiationSpec(q=0.7 - 0.2j, nu=2.0)
    lin = z_lin_hat(spec, t, r_grid)
    assert np.allclose(lin.values, spec.z_star(r_grid).values, rtol=1e-12, atol=1e-14)


def test_radiation_is_undefined_at_blowup_time(r_grid):
    with pytest.raises(ValueError):
        z_lin_hat(RadiationSpec(), 0.0, r_grid)


@pytest.mark.parametrize("nu", [2.5, 1 + 0.5j])
def test_time_reversal_symmetry(r_grid, nu):
    spec = RadiationSpec(q=0.5 + 0.5j, nu=nu)
    past = z_values(spec, -1e-3, r_grid)
    future = z_values(spec.reversed(), 1e-3, r_grid)
    assert np.array_equal(past.values, np.conj(future.values))


def test_trivial_radiation(r_grid):
    spec = RadiationSpec(q=0.0, nu=2.0)
    rad = z_full(spec, -1e-3, r_grid)
    assert not np.any(rad.z.values)
    assert rad.gamma_z == 0.0
    assert psi_z(spec, -1e-3, r_grid).psi_z_l2 == 0.0


def test_expansion_starts_from_zero_correction(r_grid):
    prof = expansion_profiles(RadiationSpec(nu=2.5), r_grid)
    assert len(prof.g) == 2
    assert not np.any(prof.g[0].values)
    assert np.any(prof.g[1].values)


@pytest.mark.parametrize("t", [-1e-3, 1e-3])
def test_analytic_time_derivative_matches_finite_difference(r_grid, t):
    spec = RadiationSpec(q=1.0, nu=2.5)
    report = psi_z(spec, t, r_grid)
    assert report.dt_mismatch <= 1e-5
    assert l2_norm(dt_z(spec, t, r_grid)) > 0


def test_residual_norm_ordering(r_grid):
    report = psi_z(RadiationSpec(q=1.0, nu=2.5), -1e-3, r_grid)
    assert np.isfinite(report.psi_z_l2)
    assert report.psi_z_weighted >= report.psi_z_h1 * 0.5
    assert report.delta_z == 0.01


def test_data_distance_shrinks_toward_blowup_time(r_grid):
    spec = RadiationSpec(q=1.0, nu=2.0)
    distances = [data_distance(spec, t, r_grid) for t in (-1e-2, -1e-3, -1e-4)]
    assert distances[0] > distances[1] > distances[2]


def test_hankel_of_gaussian():
    nodes = np.linspace(0.0, 12.0, 6001)
    weights = np.full(nodes.size, nodes[1])
    weights[[0, -1]] *= 0.5
    rho = np.array([0.5, 2.0, 5.0])
    values = hankel_j2(nodes**2 * np.exp(-(nodes**2)), nodes, weights, rho)
    # ∫ J₂(kr) r³ e^{−r²} dr = k² e^{−k²/4}/8 with k = ρ/2
    k = rho / 2
    exact = -0.5j * k**2 * np.exp(-(k**2) / 4) / 8
    assert np.allclose(values, exact, rtol=1e-8, atol=1e-14)


@pytest.fixture(scope="module")
def wide_grid() -> RadialGrid:
    return RadialGrid.log_uniform(4096, 40.0)


def test_pseudoconformal_preserves_mass(wide_grid):
    u = ComplexField(wide_grid, np.exp(-(wide_grid.radii**2)) * (1 + 0.5j), 0)
    moved, t_new = pseudoconformal(u, -0.5)
    assert t_new == 2.0
    assert l2_norm(moved) == pytest.approx(l2_norm(u), rel=1e-6)


def test_pseudoconformal_twice_negates_radial_profiles(wide_grid):
    r = wide_grid.radii
    u = ComplexField(wide_grid, np.exp(-(r**2)) * (1 + 0.5j * r), 0)
    once, t_new = pseudoconformal(u, -0.5)
    twice, t_back = pseudoconformal(once, t_new)
    assert t_back == -0.5
    inner = r < 5
    assert np.max(np.abs(twice.values + u.values)[inner]) < 1e-5


def test_pseudoconformal_is_singular_at_zero(wide_grid):
    with pytest.raises(ValueError):
        pseudoconformal(ComplexField.zeros(wide_grid), 0.0)
