"""Entropy maps, fluxes, and 1D/2D transforms checked against independent oracles."""

import numpy as np
import pytest
import sympy as sp

from esdg.physics import (
    AdmissibilityError,
    Euler,
    ShallowWater,
    lax_friedrichs,
    lift_1d_to_2d,
    log_mean,
    normal_ec_flux,
    project_2d_to_1d,
    transform_matrix,
)

ALL_MODELS = [
    ShallowWater(1), ShallowWater(2),
    Euler(1), Euler(2),
]


def random_states(model, n, rng, lo=0.5, hi=5.0):
    """Random admissible states with conservative components in [lo, hi].

    Euler draws keep p > 0.05 so the exp/log entropy maps stay far from
    the vacuum where they lose precision.
    """
    out = np.empty((model.ncons, n))
    filled = 0
    while filled < n:
        cand = rng.uniform(lo, hi, size=(model.ncons, n))
        if isinstance(model, Euler):
            ok = model.pressure(cand) > 0.05
        else:
            ok = cand[0] > lo / 2
        take = min(int(ok.sum()), n - filled)
        out[:, filled:filled + take] = cand[:, ok][:, :take]
        filled += take
    return out


# ---------------------------------------------------------------- log mean
def test_log_mean_fixed_point():
    for x in (0.3, 1.0, 7.5):
        assert log_mean(x, x) == pytest.approx(x, abs=0.0)


def test_log_mean_closed_form():
    assert log_mean(1.0, np.e) == pytest.approx(np.e - 1.0, rel=1e-14)


def test_log_mean_near_equal_series():
    # Series oracle: logmean(1, 1+eps) = 1 + eps/2 - eps^2/24 + O(eps^3).
    val = log_mean(1.0, 1.0 + 1e-12)
    assert abs(val - (1.0 + 5e-13)) < 1e-13


def test_log_mean_bounds_and_domain():
    rng = np.random.default_rng(3)
    a = rng.uniform(0.1, 10.0, 1000)
    b = rng.uniform(0.1, 10.0, 1000)
    lm = log_mean(a, b)
    assert np.all(lm >= np.minimum(a, b) - 1e-14)
    assert np.all(lm <= np.maximum(a, b) + 1e-14)
    with pytest.raises(ValueError):
        log_mean(-1.0, 2.0)


# ---------------------------------------------------------------- entropy
def test_entropy_values():
    swe = ShallowWater(1, g=1.0)
    assert swe.entropy(np.array([2.0, 0.0])) == pytest.approx(2.0, abs=1e-14)
    eul = Euler(1, gamma=1.4)
    u = np.array([1.0, 0.0, 1.0 / 0.4])
    assert eul.entropy(u) == pytest.approx(0.0, abs=1e-14)
    # rho=2, u=0, p=2: S = -2 log(2/2^1.4) = 0.8 log 2
    u2 = np.array([2.0, 0.0, 2.0 / 0.4])
    assert eul.entropy(u2) == pytest.approx(0.8 * np.log(2.0), rel=1e-13)


def test_entropy_variable_values():
    swe = ShallowWater(2, g=1.0)
    u = np.array([2.0, 6.0, 0.0])
    assert np.allclose(swe.entropy_variables(u), [-2.5, 3.0, 0.0], atol=1e-14)
    eul = Euler(2, gamma=1.4)
    u = np.array([1.0, 0.0, 0.0, 2.5])
    assert np.allclose(eul.entropy_variables(u), [1.4, 0.0, 0.0, -0.4], atol=1e-14)


@pytest.mark.parametrize("model", ALL_MODELS)
def test_entropy_variables_are_entropy_gradient(model):
    rng = np.random.default_rng(11)
    u = random_states(model, 50, rng)
    v = model.entropy_variables(u)
    scale = np.linalg.norm(u, axis=0)
    for c in range(model.ncons):
        du = np.zeros_like(u)
        du[c] = 1e-6 * scale
        fd = (model.entropy(u + du) - model.entropy(u - du)) / (2.0 * du[c])
        err = np.abs(fd - v[c]) / np.maximum(1.0, np.abs(v[c]))
        assert np.max(err) < 1e-6


def test_inverse_map_values():
    swe = ShallowWater(2, g=1.0)
    assert np.allclose(
        swe.conservative_from_entropy(np.array([-2.5, 3.0, 0.0])),
        [2.0, 6.0, 0.0], atol=1e-13,
    )
    eul = Euler(2, gamma=1.4)
    assert np.allclose(
        eul.conservative_from_entropy(np.array([1.4, 0.0, 0.0, -0.4])),
        [1.0, 0.0, 0.0, 2.5], atol=1e-13,
    )


@pytest.mark.parametrize("model", ALL_MODELS)
def test_entropy_round_trip(model):
    rng = np.random.default_rng(7)
    u = random_states(model, 10_000, rng)
    back = model.conservative_from_entropy(model.entropy_variables(u))
    err = np.abs(back - u) / np.maximum(1.0, np.abs(u))
    assert np.max(err) < 1e-12


def test_inverse_map_domain_error():
    eul = Euler(1)
    with pytest.raises(AdmissibilityError):
        eul.conservative_from_entropy(np.array([1.0, 0.0, 0.1]))
    swe = ShallowWater(1)
    with pytest.raises(AdmissibilityError):
        swe.conservative_from_entropy(np.array([-5.0, 0.0]))


# ---------------------------------------------------------------- fluxes
def test_physical_flux_values():
    swe = ShallowWater(1, g=1.0)
    assert np.allclose(swe.physical_flux(np.array([4.0, 0.0]), 0), [0.0, 8.0])
    # Euler rho=1, u=2, p=1: E = 4.5, f = (2, 5, 11).  Cross-checked
    # symbolically below; u(E+p) = 2 * 5.5.
    eul = Euler(1, gamma=1.4)
    u = np.array([1.0, 2.0, 4.5])
    assert np.allclose(eul.physical_flux(u, 0), [2.0, 5.0, 11.0], atol=1e-14)


def test_euler_flux_symbolic_oracle():
    rho, uu, p, gam = sp.symbols("rho u p gamma", positive=True)
    E = rho * uu**2 / 2 + p / (gam - 1)
    flux = [rho * uu, rho * uu**2 + p, uu * (E + p)]
    vals = {rho: 1, uu: 2, p: 1, gam: sp.Rational(7, 5)}
    exact = [float(f.subs(vals)) for f in flux]
    eul = Euler(1, gamma=1.4)
    got = eul.physical_flux(np.array([1.0, 2.0, float(E.subs(vals))]), 0)
    assert np.allclose(got, exact, atol=1e-14)


def test_ec_flux_example_swe():
    swe = ShallowWater(1, g=1.0)
    uL = np.array([1.0, 0.0])
    uR = np.array([3.0, 0.0])
    assert np.allclose(swe.ec_flux(uL, uR, 0), [0.0, 1.5], atol=1e-14)


@pytest.mark.parametrize("model", ALL_MODELS)
def test_ec_flux_consistency(model):
    rng = np.random.default_rng(5)
    u = random_states(model, 10_000, rng)
    for d in range(model.dim):
        fs = model.ec_flux(u, u, d)
        f = model.physical_flux(u, d)
        assert np.max(np.abs(fs - f)) < 1e-12


@pytest.mark.parametrize("model", ALL_MODELS)
def test_ec_flux_symmetry(model):
    rng = np.random.default_rng(6)
    uL = random_states(model, 2000, rng)
    uR = random_states(model, 2000, rng)
    for d in range(model.dim):
        assert np.max(np.abs(model.ec_flux(uL, uR, d) - model.ec_flux(uR, uL, d))) < 1e-14


@pytest.mark.parametrize("model", ALL_MODELS)
def test_ec_flux_entropy_identity(model):
    # (vL - vR) . f_S = psi(uL) - psi(uR), to 1e-10 relative.
    rng = np.random.default_rng(8)
    uL = random_states(model, 10_000, rng)
    uR = random_states(model, 10_000, rng)
    vL = model.entropy_variables(uL)
    vR = model.entropy_variables(uR)
    for d in range(model.dim):
        lhs = np.sum((vL - vR) * model.ec_flux(uL, uR, d), axis=0)
        rhs = model.entropy_potential(uL, d) - model.entropy_potential(uR, d)
        scale = np.maximum(1.0, np.abs(model.entropy_potential(uL, d))
                           + np.abs(model.entropy_potential(uR, d)))
        assert np.max(np.abs(lhs - rhs) / scale) < 1e-10


def test_entropy_potential_values():
    swe = ShallowWater(1, g=1.0)
    assert swe.entropy_potential(np.array([2.0, 6.0]), 0) == pytest.approx(6.0)
    eul = Euler(1, gamma=1.4)
    u = np.array([1.0, 2.0, 4.5])
    assert eul.entropy_potential(u, 0) == pytest.approx(0.8, rel=1e-14)
    # Zero velocity kills the potential.
    assert swe.entropy_potential(np.array([3.0, 0.0]), 0) == 0.0
    assert eul.entropy_potential(np.array([3.0, 0.0, 5.0]), 0) == 0.0


@pytest.mark.parametrize("model", ALL_MODELS)
def test_potential_gradient_is_flux(model):
    # The potential is the flux potential in the entropy variables:
    # d psi_i / d v = f_i(u(v)).  Central differences in v.
    rng = np.random.default_rng(13)
    u = random_states(model, 50, rng)
    v = model.entropy_variables(u)
    scale = np.linalg.norm(v, axis=0)
    for d in range(model.dim):
        f = model.physical_flux(u, d)
        for c in range(model.ncons):
            dv = np.zeros_like(v)
            dv[c] = 1e-6 * scale
            psi_p = model.entropy_potential(
                model.conservative_from_entropy(v + dv), d)
            psi_m = model.entropy_potential(
                model.conservative_from_entropy(v - dv), d)
            fd = (psi_p - psi_m) / (2.0 * dv[c])
            err = np.abs(fd - f[c]) / np.maximum(1.0, np.abs(f[c]))
            assert np.max(err) < 1e-6


# ---------------------------------------------------------------- wavespeed
def test_wavespeed_values():
    swe = ShallowWater(1, g=1.0)
    assert swe.wavespeed(np.array([4.0, 0.0])) == pytest.approx(2.0)
    eul = Euler(1, gamma=1.4)
    u = np.array([1.0, 0.0, 2.5])
    assert eul.wavespeed(u) == pytest.approx(np.sqrt(1.4), rel=1e-14)


@pytest.mark.parametrize("model", ALL_MODELS)
def test_wavespeed_nonnegative(model):
    rng = np.random.default_rng(17)
    u = random_states(model, 1000, rng)
    assert np.all(model.wavespeed(u) >= 0.0)


# ---------------------------------------------------------------- transforms
def test_lift_axis_aligned():
    R = transform_matrix(ShallowWater(1), (1.0, 0.0))
    u1 = np.array([2.0, 3.0])
    assert np.allclose(lift_1d_to_2d(u1, R), [2.0, 3.0, 0.0])
    Re = transform_matrix(Euler(1), (0.0, 1.0))
    u1 = np.array([1.0, 2.0, 4.5])
    assert np.allclose(lift_1d_to_2d(u1, Re), [1.0, 0.0, 2.0, 4.5])


@pytest.mark.parametrize("model", [ShallowWater(1), Euler(1)])
def test_project_lift_identity(model):
    rng = np.random.default_rng(23)
    u1 = random_states(model, 10_000, rng)
    theta = rng.uniform(0.0, 2.0 * np.pi, 10)
    for th in theta:
        R = transform_matrix(model, (np.cos(th), np.sin(th)))
        assert np.max(np.abs(R.T @ R - np.eye(model.ncons))) < 1e-14
        back = project_2d_to_1d(lift_1d_to_2d(u1, R), R)
        assert np.max(np.abs(back - u1)) < 1e-14


@pytest.mark.parametrize(
    "m1, m2",
    [(ShallowWater(1), ShallowWater(2)), (Euler(1), Euler(2))],
)
def test_rotational_flux_consistency(m1, m2):
    # R^T (n1 f1S + n2 f2S)(R a, R b) equals the 1D EC flux of (a, b).
    rng = np.random.default_rng(29)
    a = random_states(m1, 500, rng)
    b = random_states(m1, 500, rng)
    for th in rng.uniform(0.0, 2 * np.pi, 8):
        n = np.array([np.cos(th), np.sin(th)])
        R = transform_matrix(m1, n)
        f2 = normal_ec_flux(m2, lift_1d_to_2d(a, R), lift_1d_to_2d(b, R), n[0], n[1])
        f1 = m1.ec_flux(a, b, 0)
        assert np.max(np.abs(project_2d_to_1d(f2, R) - f1)) < 1e-12


# ---------------------------------------------------------------- walls / LF
def test_mirror_state():
    swe = ShallowWater(1)
    assert np.allclose(swe.mirror_state(np.array([4.0, 3.0])), [4.0, -3.0])
    u = np.array([4.0, 0.0])
    assert np.allclose(swe.mirror_state(u), u)
    eul = Euler(1)
    u = np.array([2.0, 1.5, 7.0])
    m = eul.mirror_state(u)
    assert np.allclose(m, [2.0, -1.5, 7.0])
    assert eul.entropy(m) == pytest.approx(eul.entropy(u), rel=1e-14)
    with pytest.raises(ValueError):
        ShallowWater(2).mirror_state(np.array([1.0, 0.0, 0.0]))


def test_wall_state_2d_reflects_normal_momentum():
    rng = np.random.default_rng(31)
    for model in (ShallowWater(2), Euler(2)):
        u = random_states(model, 200, rng)
        th = 0.7
        nx, ny = np.cos(th), np.sin(th)
        w = model.wall_state(u, nx, ny)
        # Normal momentum flips, tangential momentum unchanged.
        un = u[1] * nx + u[2] * ny
        wn = w[1] * nx + w[2] * ny
        ut = -u[1] * ny + u[2] * nx
        wt = -w[1] * ny + w[2] * nx
        assert np.max(np.abs(wn + un)) < 1e-13
        assert np.max(np.abs(wt - ut)) < 1e-13
        assert np.max(np.abs(model.entropy(w) - model.entropy(u))) < 1e-12


def test_wall_flux_is_entropy_neutral_pointwise():
    # n . (psi(u) - v(u) . f_S(u, wall(u))) = 0 at every point.
    rng = np.random.default_rng(37)
    for model in (ShallowWater(2), Euler(2)):
        u = random_states(model, 500, rng)
        for th in rng.uniform(0, 2 * np.pi, 5):
            nx, ny = np.cos(th), np.sin(th)
            w = model.wall_state(u, nx, ny)
            f = normal_ec_flux(model, w, u, nx, ny)
            vdotf = np.sum(model.entropy_variables(u) * f, axis=0)
            psi_n = nx * model.entropy_potential(u, 0) + ny * model.entropy_potential(u, 1)
            assert np.max(np.abs(vdotf - psi_n)) < 1e-11
            # No mass crosses the wall.
            assert np.max(np.abs(f[0])) < 1e-13
    for model in (ShallowWater(1), Euler(1)):
        u = random_states(model, 500, rng)
        f = model.ec_flux(u, model.mirror_state(u), 0)
        vdotf = np.sum(model.entropy_variables(u) * f, axis=0)
        assert np.max(np.abs(vdotf - model.entropy_potential(u, 0))) < 1e-11
        assert np.max(np.abs(f[0])) < 1e-13


def test_lax_friedrichs_examples():
    swe = ShallowWater(1, g=1.0)
    uL, uR = np.array([4.0, 0.0]), np.array([1.0, 0.0])
    out = lax_friedrichs(swe, uL, uR, np.zeros(2))
    assert np.allclose(out, [3.0, 0.0])
    same = lax_friedrichs(swe, uL, uL, np.array([1.0, 2.0]))
    assert np.allclose(same, [1.0, 2.0])


@pytest.mark.parametrize("model", ALL_MODELS)
def test_lax_friedrichs_dissipation_sign(model):
    # (vL - vR) . (lambda/2)(uR - uL) <= 0 by monotonicity of v in u.
    rng = np.random.default_rng(41)
    uL = random_states(model, 10_000, rng)
    uR = random_states(model, 10_000, rng)
    vL = model.entropy_variables(uL)
    vR = model.entropy_variables(uR)
    lam = np.maximum(model.wavespeed(uL), model.wavespeed(uR))
    contrib = np.sum((vL - vR) * (0.5 * lam * (uR - uL)), axis=0)
    assert np.max(contrib) < 1e-11


def test_admissibility_errors():
    swe = ShallowWater(1)
    with pytest.raises(AdmissibilityError):
        swe.check_admissible(np.array([-1.0, 0.0]))
    eul = Euler(2)
    with pytest.raises(AdmissibilityError):
        eul.check_admissible(np.array([1.0, 10.0, 0.0, 1.0]))  # negative pressure
    with pytest.raises(AdmissibilityError):
        eul.check_admissible(np.array([np.nan, 0.0, 0.0, 1.0]))
