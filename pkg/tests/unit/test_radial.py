import logging

import numpy as np
import pytest

from csslab.radial import (
    ComplexField,
    Cutoff,
    RadialGrid,
    cumulative_primitive,
    d_r,
    field_from_csv,
    field_to_csv,
    integrate,
    l2_norm,
    laplacian_m,
    laplacian_matrix,
    norms,
    real_inner,
    resample,
    resample_values,
    rescale,
    scaling_gen_trunc,
    tail_logweight,
)


def gaussian(grid: RadialGrid, m: int = 0) -> ComplexField:
    return ComplexField(grid, grid.radii ** abs(m) * np.exp(-grid.radii**2), m)


def test_grid_rejects_unordered_radii():
    with pytest.raises(ValueError):
        RadialGrid(np.array([1.0, 0.5, 2.0, 3.0]), "log")


def test_grid_rejects_nonpositive_radii():
    with pytest.raises(ValueError):
        RadialGrid(np.array([0.0, 0.5, 2.0, 3.0]), "uniform")


def test_refined_grid_halves_log_step(grid):
    fine = grid.refined()
    assert fine.r_min == pytest.approx(grid.r_min)
    assert fine.r_max == pytest.approx(grid.r_max)
    assert fine.step == pytest.approx(grid.step / 2)


@pytest.mark.parametrize("kind", ["log", "uniform"])
def test_integrate_gaussian(kind):
    grid = RadialGrid.log_uniform(4096, 20.0) if kind == "log" else RadialGrid.uniform(4000, 20.0)
    assert integrate(gaussian(grid)).real == pytest.approx(np.pi, rel=1e-5)


def test_cumulative_primitive_matches_closed_form(grid):
    r = grid.radii
    primitive = cumulative_primitive(gaussian(grid))
    exact = 0.5 * (1.0 - np.exp(-(r**2)))
    assert np.max(np.abs(primitive - exact)) < 3e-5


def test_tail_and_primitive_are_discrete_adjoints(grid, rng):
    r = grid.radii
    a = rng.normal(size=grid.n) * np.exp(-(r**2))
    c = rng.normal(size=grid.n) * r**2 * np.exp(-(r**2))
    w = grid.weights
    lhs = np.sum(w * r * a * tail_logweight(c, grid))
    rhs = np.sum(w * r * (c / r**2) * cumulative_primitive(a, grid))
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_tail_integral_warns_on_boundary_mass(grid, caplog):
    with caplog.at_level(logging.WARNING, logger="csslab.radial"):
        tail_logweight(np.ones(grid.n), grid)
    assert "boundary mass" in caplog.text


def test_derivative_of_gaussian(grid):
    u = gaussian(grid)
    r = grid.radii
    inner = r < 5
    assert np.max(np.abs(d_r(u).values - (-2 * r * np.exp(-(r**2))))[inner]) < 5e-4


@pytest.mark.parametrize("m", [0, 1, 2])
def test_laplacian_on_gaussian(grid, m):
    u = gaussian(grid, m)
    r = grid.radii
    # Δ^{(m)}(r^m e^{-r²}) = (4r² − 4(m + 1)) r^m e^{-r²}
    exact = (4 * r**2 - 4 * (m + 1)) * r**m * np.exp(-(r**2))
    inner = (r > 1e-3) & (r < 6)
    assert np.max(np.abs(laplacian_m(u).values - exact)[inner]) < 1e-3


@pytest.mark.parametrize("m", [0, 1, 3])
def test_log_laplacian_origin_row(m):
    grid = RadialGrid.log_uniform(256, 10.0)
    lap = laplacian_matrix(grid, m).toarray()
    r = grid.radii
    # the first row annihilates r^{|m|}
    assert lap[0, 0] * r[0] ** m + lap[0, 1] * r[1] ** m == pytest.approx(0.0, abs=1e-9 * abs(lap[0, 0]) * r[0] ** m)
    # and is symmetric against the quadrature weights
    mu = grid.weights * r
    assert mu[0] * lap[0, 1] == pytest.approx(mu[1] * lap[1, 0], rel=1e-12)
    assert mu[1] * lap[1, 2] == pytest.approx(mu[2] * lap[2, 1], rel=1e-12)


def test_cutoff_profile():
    cut = Cutoff(2.0)
    r = np.array([0.5, 1.9, 2.0, 3.0, 4.0, 5.0])
    values = cut(r)
    assert values[0] == 1.0 and values[1] == 1.0
    assert 0.0 < values[3] < 1.0
    assert values[4] == 0.0 and values[5] == 0.0


def test_cutoff_derivative_matches_finite_difference():
    cut = Cutoff(1.5)
    r = np.linspace(1.6, 2.9, 7)
    h = 1e-6
    fd = (cut(r + h) - cut(r - h)) / (2 * h)
    assert np.allclose(cut.d1(r), fd, atol=1e-6)


def test_truncated_scaling_generator_is_antisymmetric(random_field):
    f, g = random_field(), random_field()
    lhs = real_inner(scaling_gen_trunc(f, 1.0), g)
    rhs = -real_inner(f, scaling_gen_trunc(g, 1.0))
    assert lhs == pytest.approx(rhs, rel=1e-3, abs=1e-8)


def test_resample_onto_finer_grid(grid):
    u = gaussian(grid, 1)
    fine = RadialGrid.log_uniform(3000, 50.0)
    moved = resample(u, fine)
    exact = fine.radii * np.exp(-fine.radii**2)
    assert np.max(np.abs(moved.values - exact)) < 1e-8


def test_resample_outside_grid(grid):
    u = gaussian(grid, 2)
    values = resample_values(u, np.array([grid.r_min / 10, 2 * grid.r_max]))
    assert values[0] == pytest.approx(u.values[0] / 100)
    assert values[1] == 0


def test_rescale_preserves_mass(grid):
    u = gaussian(grid)
    scaled = rescale(u, 0.25, 0.7)
    assert l2_norm(scaled) == pytest.approx(l2_norm(u), rel=1e-6)
    assert np.angle(scaled.values[0]) == pytest.approx(0.7)


def test_norms_of_gaussian(grid):
    n = norms(gaussian(grid))
    # ‖e^{-r²}‖² = π/2, ‖∂_r e^{-r²}‖² = π, ‖r e^{-r²}‖² = π/4
    assert n.l2 == pytest.approx(np.sqrt(np.pi / 2), rel=1e-5)
    assert n.h1_dot == pytest.approx(np.sqrt(np.pi), rel=1e-4)
    assert n.r_weighted == pytest.approx(np.sqrt(np.pi / 4), rel=1e-5)
    assert n.h11 == pytest.approx(np.sqrt(np.pi / 2 + np.pi + np.pi / 4), rel=1e-4)


def test_field_csv_round_trip(grid):
    u = gaussian(grid, 1) * (1 + 0.5j)
    back = field_from_csv(field_to_csv(u))
    assert back.m == 1
    assert np.array_equal(back.r, u.r)
    assert np.array_equal(back.values, u.values)
