import numpy as np
import pytest
from scipy.special import gamma as scipy_gamma

from csslab.modulation import (
    ModState,
    ModulationODEError,
    RegimeError,
    TubeError,
    averaging_radii,
    boundary_seed,
    closed_form,
    closed_form_dt,
    corrected_closed_form,
    decompose,
    initial_data,
    interaction_RQz,
    interaction_prediction,
    mod_ode_integrate,
    modulation_forcing,
    prescribed_eps,
    rate_consistency,
    reconstruct,
    refined_params,
    renormalized_grid,
)
from csslab.radial import RadialGrid, l2_norm, rescale
from csslab.radiation import RadiationSpec
from csslab.soliton import build_ortho_profiles, solve_rho, vortex


@pytest.fixture(scope="module")
def y_grid() -> RadialGrid:
    return RadialGrid.log_uniform(2048, 60.0)


@pytest.fixture(scope="module")
def rho(y_grid):
    return solve_rho(0, y_grid)


@pytest.fixture(scope="module")
def ortho(y_grid, rho):
    return build_ortho_profiles(y_grid, rho)


@pytest.fixture(scope="module")
def physical_grid() -> RadialGrid:
    return RadialGrid.log_uniform(4096, 100.0)


def test_closed_form_reference_values():
    state = closed_form(1.0, 2.0, -0.01)
    assert state.lam == pytest.approx(4.095e-5, rel=1e-3)
    assert state.b == pytest.approx(3.353e-7, rel=1e-3)
    assert state.eta == pytest.approx(0.0, abs=1e-20)


@pytest.mark.parametrize("nu", [2.0, 1 + 0.5j, 2.5 - 1j])
def test_closed_form_complex_reference_values(nu):
    t, q = -0.01, 1.0 - 0.5j
    state = closed_form(q, nu, t)
    log_t = abs(np.log(abs(t)))
    g = scipy_gamma(nu / 2) / (np.real(nu) + 1)
    modulus = 0.5 * abs(g) ** 2 * abs(q) ** 2 * (4 * abs(t)) ** (np.real(nu) + 1) / log_t**2
    # |(4it)^{ν/2+1}|² picks up e^{π Im ν/2} from arg(4it) = −π/2
    expected = (nu / 2 + 1) * modulus * np.exp(np.pi * np.imag(nu) / 2)
    assert state.b_c == pytest.approx(expected, rel=1e-9)
    assert state.b_c == pytest.approx(-(nu / 2 + 1) * state.lam**2 / t, rel=1e-12)


@pytest.mark.parametrize("nu", [2.0, 1 + 0.5j])
def test_closed_form_balances_modulation_system(nu):
    t = -1e-3
    state = closed_form(1.0, nu, t)
    w = nu / 2 + 1
    log_t = abs(np.log(abs(t)))
    # scaled 𝐛|t|/|𝛌|² sits at w, and the forcing at w(w − 1) up to log B₀ against |log|t||
    assert state.b_c * abs(t) / state.lam**2 == pytest.approx(w, rel=1e-12)
    forcing = modulation_forcing(1.0, nu, state)
    expected = w * (w - 1) * (np.real(nu) + 1) * log_t / (2 * np.log(state.B0))
    assert forcing == pytest.approx(expected, rel=1e-9)


def test_closed_form_rate_matches_finite_difference():
    t, h = -1e-3, 1e-8
    fd = (closed_form(1 + 0.5j, 2.5, t + h).lam_c - closed_form(1 + 0.5j, 2.5, t - h).lam_c) / (2 * h)
    assert closed_form_dt(1 + 0.5j, 2.5, t) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("t", [-1e-2, -1e-3])
@pytest.mark.parametrize("nu", [2.0, 1 + 0.5j])
def test_rate_consistency(t, nu):
    report = rate_consistency(1.0, nu, t)
    assert report.passed
    assert report.ratio == pytest.approx(report.expected, rel=0.05)


@pytest.mark.parametrize("q, t", [(1.0, 0.01), (0.0, -0.01)])
def test_rates_outside_regime(q, t):
    with pytest.raises(RegimeError):
        closed_form(q, 2.0, t)


def test_modulation_system_backward_tracks_corrected_form():
    start = corrected_closed_form(1.0, 2.0, -1e-4)
    path = mod_ode_integrate(1.0, 2.0, start, -1e-3)
    assert path[0].t == pytest.approx(-1e-4)
    assert path[-1].t == pytest.approx(-1e-3)
    for state in path:
        assert state.lam == pytest.approx(corrected_closed_form(1.0, 2.0, state.t).lam, rel=0.05)


@pytest.mark.parametrize("nu", [2.0, 1 + 0.5j])
def test_modulation_system_toward_blowup(nu):
    seed = boundary_seed(1.0, nu, -1e-3)
    assert seed.t == pytest.approx(-1e-3)
    path = mod_ode_integrate(1.0, nu, seed, -1e-4)
    assert path[-1].t == pytest.approx(-1e-4)
    for state in path:
        target = corrected_closed_form(1.0, nu, state.t)
        assert state.lam == pytest.approx(target.lam, rel=0.05)
        assert abs(np.angle(np.exp(1j * (state.gamma - target.gamma)))) <= 0.05
        assert state.b_c == pytest.approx(target.b_c, rel=0.1)


def test_leading_order_misses_by_inverse_log():
    for t in (-1e-3, -1e-4):
        log_t = abs(np.log(abs(t)))
        deviation = abs(corrected_closed_form(1.0, 2.0, t).lam / closed_form(1.0, 2.0, t).lam - 1.0)
        assert 0.5 / log_t <= deviation <= 4.0 / log_t


def test_corrected_form_needs_regime():
    with pytest.raises(RegimeError):
        corrected_closed_form(1.0, 2.0, 1e-3)


def test_modulation_system_rejects_nonpositive_scale():
    with pytest.raises(ModulationODEError) as info:
        mod_ode_integrate(1.0, 2.0, ModState(t=-1e-3, lam=-1.0, gamma=0.0), -1e-2)
    assert info.value.t == -1e-3


def test_averaging_radii():
    radii = averaging_radii(50.0, -1e-3)
    log_l = np.log(abs(np.log(1e-3)))
    assert np.all(radii > 50.0 * np.exp(-0.2 * log_l))
    assert np.all(radii < 50.0 * np.exp(-0.1 * log_l))
    assert np.all(np.diff(radii) > 0)
    with pytest.raises(ValueError):
        averaging_radii(50.0, -1e-3, avg_lo=0.1, avg_hi=0.2)


@pytest.fixture(scope="module")
def exact_decomposition(ortho, physical_grid):
    u = rescale(vortex(0, ortho.grid).field, 0.5, 0.3, physical_grid)
    dec = decompose(u, None, ortho, ModState(t=-100.0, lam=0.52, gamma=0.28))
    return u, dec


def test_decompose_recovers_modulation(exact_decomposition):
    _, dec = exact_decomposition
    assert dec.lam == pytest.approx(0.5, rel=1e-5)
    assert dec.gamma == pytest.approx(0.3, abs=1e-5)
    assert max(abs(v) for v in dec.ortho_resid) <= 1e-9
    assert dec.eps_l2 < 1e-4 * l2_norm(vortex(0, dec.eps.grid).field)


def test_reconstruct_inverts_decompose(exact_decomposition, physical_grid):
    u, dec = exact_decomposition
    back = reconstruct(dec, None, physical_grid)
    r = physical_grid.radii
    inner = r < 20
    assert np.max(np.abs(back.values - u.values)[inner]) < 1e-4 * np.max(np.abs(u.values))


def test_decompose_outside_tube(ortho, physical_grid):
    u = rescale(vortex(0, ortho.grid).field, 0.5, 0.0, physical_grid)
    with pytest.raises(TubeError):
        decompose(u, None, ortho, ModState(t=-100.0, lam=5.0, gamma=0.0))


def test_refined_params_of_pure_vortex(exact_decomposition, rho):
    _, dec = exact_decomposition
    ref = refined_params(dec, -100.0, rho)
    assert ref.B0 == pytest.approx(20.0, rel=1e-5)
    assert abs(ref.b) < 1e-5
    assert abs(ref.eta) < 1e-5
    assert ref.zeta == pytest.approx(0.5 * np.exp(0.3j), rel=1e-4)
    assert ref.B_range[0] < ref.B_range[1] < ref.B0


def test_refined_params_need_large_core(exact_decomposition, rho):
    _, dec = exact_decomposition
    with pytest.raises(RegimeError):
        refined_params(dec, -1.0, rho)


def test_prescribed_eps_removes_vortex_tail(y_grid, rho):
    state = ModState(t=-0.01, lam=0.01, gamma=0.0, b=1e-3, eta=2e-4)
    eps = prescribed_eps(state, y_grid, rho)
    q = vortex(0, y_grid).field
    far = y_grid.radii > 2 * state.B0
    assert np.allclose(eps.values[far], -q.values[far])


def test_initial_data_needs_large_core(physical_grid, rho):
    with pytest.raises(RegimeError):
        initial_data(RadiationSpec(q=1.0, nu=2.0), -0.5, physical_grid, rho)


def test_interaction_without_radiation_vanishes(y_grid):
    spec = RadiationSpec(q=0.0, nu=2.0)
    state = closed_form(1.0, 2.0, -1e-3)
    inter = interaction_RQz(spec, state, y_grid)
    assert l2_norm(inter.field) == 0.0
    assert interaction_prediction(spec, state) == 0


def test_interaction_prediction_scaling():
    spec = RadiationSpec(q=1.0, nu=2.0)
    state = ModState(t=-1e-3, lam=1e-3, gamma=0.0)
    # for ν = 2 the prediction is 8√8π λ³ p q with p = 1
    assert interaction_prediction(spec, state) == pytest.approx(8 * np.sqrt(8) * np.pi * 1e-9, rel=1e-9)


@pytest.mark.parametrize("t", [float(t) for t in -np.geomspace(1e-2, 1e-3, 5)])
def test_interaction_matches_prediction_at_small_times(physical_grid, t):
    spec = RadiationSpec(q=1.0, nu=2.0)
    state = closed_form(spec.q, spec.nu, t)
    y_grid = renormalized_grid(physical_grid, state.lam, state.B0, physical_grid.n)
    inter = interaction_RQz(spec, state, y_grid)
    scale = np.hypot(inter.pred_lambda_q, inter.pred_iq)
    assert abs(inter.ip_lambda_q - inter.pred_lambda_q) <= 0.1 * scale
    assert abs(inter.ip_iq - inter.pred_iq) <= 0.1 * scale
