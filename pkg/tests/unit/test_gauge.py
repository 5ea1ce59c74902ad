import numpy as np
import pytest

from csslab.gauge import (
    bogomolnyi,
    energy,
    form_m40,
    form_m41,
    form_m6,
    grad_energy,
    grad_energy_selfdual,
    l_u,
    l_u_star,
    mass,
    multilinear_forms,
    n30,
    n31,
    n32,
    n51,
    n52,
    nonlinearity,
    nonlinearity_derivative,
    nonlinearity_increment,
    nonlinearity_rotated,
    nonlinearity_total,
    theta_z,
    virial_rates,
)
from csslab.radial import d_r_values, integrate_real, l2_norm, real_inner
from csslab.soliton import vortex


@pytest.mark.parametrize("trial", range(20))
def test_duality_relations(random_field, trial):
    p = [random_field() for _ in range(6)]
    assert real_inner(n30(p[0], p[1], p[2]), p[3]) == pytest.approx(4 * form_m40(*p[:4]), rel=1e-9)
    assert real_inner(n31(p[0], p[1], p[2]), p[3]) == pytest.approx(2 * form_m41(*p[:4]), rel=1e-9)
    assert real_inner(n32(p[0], p[1], p[2]), p[3]) == pytest.approx(2 * form_m41(p[2], p[3], p[0], p[1]), rel=1e-9)
    assert real_inner(n51(*p[:5]), p[5]) == pytest.approx(2 * form_m6(*p), rel=1e-9)
    assert real_inner(n52(*p[:5]), p[5]) == pytest.approx(
        4 * form_m6(p[0], p[1], p[4], p[5], p[2], p[3]), rel=1e-9
    )


def test_multilinear_forms_need_six_profiles(random_field):
    with pytest.raises(ValueError):
        multilinear_forms(*[random_field() for _ in range(4)])


@pytest.mark.parametrize("m", [0, 1])
def test_breakdown_assembles_potential_form(random_field, m):
    u = random_field(m)
    parts = nonlinearity(u, m)
    assert np.allclose(parts.total.values, nonlinearity_total(u, m).values, rtol=1e-10, atol=1e-10)


def test_rotated_nonlinearity_shifts_by_theta(random_field):
    z = random_field(-2)
    expected = nonlinearity_total(z, -2) - z * theta_z(z, -2)
    assert np.allclose(nonlinearity_rotated(z, -2).values, expected.values, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("m", [0, 1, 2])
def test_vortex_is_self_dual(fine_grid, m):
    q = vortex(m, fine_grid).field
    assert np.max(np.abs(bogomolnyi(q, m).values)) <= 1e-4 * np.max(q.values.real)
    assert abs(energy(q, m)) <= 1e-8 * mass(q)


@pytest.mark.parametrize("m", [0, 1])
def test_energy_forms_agree(random_field, grid, m):
    u = random_field(m) * 0.3
    kinetic = 0.5 * integrate_real(np.abs(d_r_values(u.values, grid)) ** 2, grid)
    assert energy(u, m, "coulomb") == pytest.approx(energy(u, m, "selfdual"), abs=1e-4 * kinetic)


def test_linearized_operator_is_derivative_of_bogomolnyi(random_field):
    u, w = random_field(), random_field()
    delta = 1e-6
    fd = (bogomolnyi(u + w * delta, 0) - bogomolnyi(u - w * delta, 0)) * (0.5 / delta)
    lin = l_u(u, w, 0)
    assert lin.m == 1
    assert np.allclose(lin.values, fd.values, rtol=1e-5, atol=1e-6 * np.max(np.abs(fd.values)))


def test_adjoint_of_linearized_operator(random_field):
    u, w = random_field(), random_field()
    v = random_field(1)
    lhs = real_inner(l_u(u, w, 0), v)
    rhs = real_inner(w, l_u_star(u, v, 0))
    assert lhs == pytest.approx(rhs, rel=1e-3, abs=1e-6)


def test_gradient_routes_agree(random_field, grid):
    u = random_field() * 0.3
    r = grid.radii
    inner = (r > 1e-2) & (r < 5)
    direct = grad_energy(u, 0).values[inner]
    selfdual = grad_energy_selfdual(u, 0).values[inner]
    assert np.max(np.abs(direct - selfdual)) <= 1e-2 * np.max(np.abs(direct))


def test_virial_rate_vanishes_for_real_profiles(fine_grid):
    q = vortex(0, fine_grid).field
    rate, second = virial_rates(q, 0)
    assert rate == 0.0
    assert abs(second) < 1e-6


def test_charge_of_vortex(fine_grid):
    big_r = fine_grid.r_max
    for m in (0, 1, 2):
        q = vortex(m, fine_grid).field
        # ∫_0^R Q² r dr = 4(m + 1)(1 − 1/(1 + R^{2m+2}))
        truncated = 8 * np.pi * (m + 1) * (1 - 1 / (1 + big_r ** (2 * m + 2)))
        assert mass(q) == pytest.approx(truncated, rel=1e-5)


@pytest.mark.parametrize("m", [0, 1])
def test_increment_matches_difference_of_nonlinearity(random_field, m):
    u, z = random_field(m), random_field(m)
    diff = nonlinearity_total(u + z, m) - nonlinearity_total(u, m)
    assert l2_norm(nonlinearity_increment(u, z, m) - diff) <= 1e-9 * l2_norm(diff)


def test_increment_keeps_accuracy_for_small_perturbations(fine_grid):
    q = vortex(0, fine_grid).field
    r = fine_grid.radii
    w = q.with_values((1.0 + 0.5j) * r**2 * np.exp(-((r - 2.0) ** 2)))
    scale = 1e-14
    increment = nonlinearity_increment(q, w * scale, 0)
    linear = nonlinearity_derivative(q, w, 0)
    assert l2_norm(increment * (1.0 / scale) - linear) <= 1e-6 * l2_norm(linear)
