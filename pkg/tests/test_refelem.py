"""Reference-element checks: quadrature exactness, orthonormality, SBP identities."""

import numpy as np
import pytest
import sympy as sp

from esdg.refelem import (
    ElementKind,
    OperatorConsistencyError,
    build_basis,
    build_operators,
    build_quadrature,
    sbp_residuals,
)

DEGREES = [1, 2, 3, 4, 5]
KINDS = [ElementKind.INTERVAL, ElementKind.TRIANGLE]


def interval_monomial_integral(i):
    x = sp.symbols("x")
    return float(sp.integrate(x**i, (x, -1, 1)))


def tri_monomial_integral(i, j):
    # Bi-unit right triangle: r in [-1,1], s in [-1,-r].
    r, s = sp.symbols("r s")
    return float(sp.integrate(sp.integrate(r**i * s**j, (s, -1, -r)), (r, -1, 1)))


def test_weight_sums_equal_reference_measure():
    for kind in KINDS:
        for n in DEGREES:
            vol, surf = build_quadrature(n, kind)
            assert vol.weights.min() > 0
            assert surf.weights.min() > 0
            assert abs(vol.weights.sum() - 2.0) < 1e-13
            if kind is ElementKind.INTERVAL:
                perimeter = 2.0
            else:
                perimeter = 4.0 + 2.0 * np.sqrt(2.0)
            assert abs(surf.weights.sum() - perimeter) < 1e-12


def test_interval_surface_rule_is_endpoints():
    _, surf = build_quadrature(3, ElementKind.INTERVAL)
    assert np.allclose(surf.points.ravel(), [-1.0, 1.0])
    assert np.allclose(surf.weights, [1.0, 1.0])
    assert np.allclose(surf.normals.ravel(), [-1.0, 1.0])


@pytest.mark.parametrize("n", DEGREES)
def test_interval_volume_exactness(n):
    vol, _ = build_quadrature(n, ElementKind.INTERVAL)
    x = vol.points[:, 0]
    for deg in range(2 * n):
        exact = interval_monomial_integral(deg)
        assert abs(np.dot(vol.weights, x**deg) - exact) < 1e-12


@pytest.mark.parametrize("n", DEGREES)
def test_triangle_volume_exactness(n):
    vol, _ = build_quadrature(n, ElementKind.TRIANGLE)
    r, s = vol.points[:, 0], vol.points[:, 1]
    for i in range(2 * n):
        for j in range(2 * n - i):
            exact = tri_monomial_integral(i, j)
            got = np.dot(vol.weights, r**i * s**j)
            assert abs(got - exact) < 1e-12, (n, i, j)


def test_triangle_example_monomial_rs():
    # Spec example at N=2: the mixed monomial r*s integrated exactly.
    vol, _ = build_quadrature(2, ElementKind.TRIANGLE)
    r, s = vol.points[:, 0], vol.points[:, 1]
    exact = tri_monomial_integral(1, 1)
    assert abs(np.dot(vol.weights, r * s) - exact) < 1e-12


@pytest.mark.parametrize("n", DEGREES)
def test_triangle_surface_exactness(n):
    # Each face rule must integrate 1D polynomials of degree 2N along the face.
    _, surf = build_quadrature(n, ElementKind.TRIANGLE)
    t = sp.symbols("t")
    nfp = surf.nfp
    for f in range(3):
        pts = surf.points[f * nfp:(f + 1) * nfp]
        wts = surf.weights[f * nfp:(f + 1) * nfp]
        length = wts.sum()
        for deg in range(2 * n + 1):
            # The r-coordinate is affine in arc length on faces 0 and 1;
            # on the left face it is constant, so use s there.  Each
            # coordinate spans [-1, 1] along its face.
            coord = pts[:, 0] if f != 2 else pts[:, 1]
            exact = float(sp.integrate(t**deg, (t, -1, 1))) * length / 2.0
            got = np.dot(wts, coord**deg)
            assert abs(got - exact) < 1e-11 * max(1.0, length), (n, f, deg)


def test_basis_dimensions_and_constants():
    tri = build_basis(3, ElementKind.TRIANGLE)
    assert tri.Np == 10
    line = build_basis(0, ElementKind.INTERVAL)
    pts = np.array([[-0.7], [0.0], [0.3]])
    vals = line.vals(pts)
    assert np.allclose(vals, 1.0 / np.sqrt(2.0))
    (dv,) = line.grads(pts)
    assert np.allclose(dv, 0.0)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", DEGREES)
def test_basis_orthonormal(kind, n):
    ops = build_operators(n, kind)
    assert np.max(np.abs(ops.M - np.eye(ops.Np))) < 1e-13


def test_interval_n1_mass_identity():
    ops = build_operators(1, ElementKind.INTERVAL)
    assert np.allclose(ops.M, np.eye(2), atol=1e-14)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", DEGREES)
def test_sbp_identities(kind, n):
    ops = build_operators(n, kind)
    for name, resid in sbp_residuals(ops).items():
        assert resid < 1e-12, (kind, n, name, resid)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("n", DEGREES)
def test_differentiation_exactness(kind, n):
    ops = build_operators(n, kind)
    basis = build_basis(n, kind)
    rng = np.random.default_rng(0)
    if kind is ElementKind.INTERVAL:
        monos = [(i,) for i in range(n + 1)]
    else:
        monos = [(i, j) for i in range(n + 1) for j in range(n + 1 - i)]
    pts = ops.xq
    for mono in monos:
        vals = np.ones(pts.shape[0])
        for d, p in enumerate(mono):
            vals = vals * pts[:, d] ** p
        coeffs = ops.Pq @ vals
        for d in range(ops.dim):
            dmono = list(mono)
            if dmono[d] == 0:
                dvals = np.zeros_like(vals)
            else:
                dvals = np.full(pts.shape[0], float(dmono[d]))
                dmono[d] -= 1
                for dd, p in enumerate(dmono):
                    dvals = dvals * pts[:, dd] ** p
            got = ops.Vq @ (ops.D[d] @ coeffs)
            assert np.max(np.abs(got - dvals)) < 1e-11, (kind, n, mono, d)
    # Random degree-N polynomial interpolation at volume and face points.
    coeffs = rng.standard_normal(ops.Np)
    exact_q = basis.vals(ops.xq) @ coeffs
    exact_f = basis.vals(ops.xf) @ coeffs
    assert np.max(np.abs(ops.Vq @ coeffs - exact_q)) < 1e-11
    assert np.max(np.abs(ops.Vf @ coeffs - exact_f)) < 1e-11


def test_degree_zero_allowed():
    ops = build_operators(0, ElementKind.INTERVAL)
    assert ops.Np == 1


def test_operator_matrix_lookup():
    ops = build_operators(2, ElementKind.TRIANGLE)
    assert ops.matrix("Vq").shape == (ops.Nq, ops.Np)
    assert ops.matrix("Qh2").shape == (ops.Nq + ops.Nqf,) * 2
    assert ops.matrix("B1").shape == (ops.Nqf, ops.Nqf)
    with pytest.raises(KeyError):
        ops.matrix("nope")
