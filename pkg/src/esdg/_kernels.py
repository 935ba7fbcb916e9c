"""Flux-differencing volume kernels.

Each kernel accumulates [2 (Q_h o F) 1] per element over all pairs of
combined volume+surface quadrature points.  The hybridized operators are
passed as a strict upper triangle plus diagonal so the pairwise loop can
exploit the exact antisymmetry of the off-diagonal entries (flux matrices
are symmetric), halving the flux evaluations.

The logarithmic mean here mirrors esdg.physics.log_mean.
"""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _log_mean(a, b):
    if abs(a - b) < 1e-4 * (a + b):
        f = (a - b) / (a + b)
        u = f * f
        return (a + b) / (2.0 * (1.0 + u * (1.0 / 3.0 + u * (0.2 + u / 7.0))))
    return (b - a) / (np.log(b) - np.log(a))


@njit(cache=True)
def vol1d_swe(h, u, g, QU, qd, out):
    K, n = h.shape
    for k in range(K):
        for l in range(n):
            hl, ul = h[k, l], u[k, l]
            # Diagonal: consistency, f_S(u, u) = f(u).
            f0 = hl * ul
            f1 = f0 * ul + 0.5 * g * hl * hl
            out[0, k, l] += qd[l] * f0
            out[1, k, l] += qd[l] * f1
            for m in range(l + 1, n):
                q = QU[l, m]
                if q == 0.0:
                    continue
                hr, ur = h[k, m], u[k, m]
                f0 = 0.5 * (hl * ul + hr * ur)
                f1 = f0 * 0.5 * (ul + ur) + 0.5 * g * hl * hr
                out[0, k, l] += q * f0
                out[0, k, m] -= q * f0
                out[1, k, l] += q * f1
                out[1, k, m] -= q * f1


@njit(cache=True)
def vol1d_euler(rho, u, beta, gamma, QU, qd, out):
    K, n = rho.shape
    gm1 = gamma - 1.0
    for k in range(K):
        for l in range(n):
            rl, ul, bl = rho[k, l], u[k, l], beta[k, l]
            for m in range(l, n):
                rr, ur, br = rho[k, m], u[k, m], beta[k, m]
                rlog = _log_mean(rl, rr)
                blog = _log_mean(bl, br)
                pavg = (rl + rr) / (2.0 * (bl + br))
                uavg = 0.5 * (ul + ur)
                ehat = rlog * (1.0 / (2.0 * blog * gm1) + 0.5 * ul * ur)
                f0 = rlog * uavg
                f1 = f0 * uavg + pavg
                f2 = (ehat + pavg) * uavg
                if m == l:
                    out[0, k, l] += qd[l] * f0
                    out[1, k, l] += qd[l] * f1
                    out[2, k, l] += qd[l] * f2
                else:
                    q = QU[l, m]
                    if q == 0.0:
                        continue
                    out[0, k, l] += q * f0
                    out[0, k, m] -= q * f0
                    out[1, k, l] += q * f1
                    out[1, k, m] -= q * f1
                    out[2, k, l] += q * f2
                    out[2, k, m] -= q * f2


@njit(cache=True)
def vol2d_swe(h, u, v, g, gmat, QrU, QsU, qrd, qsd, out):
    K, n = h.shape
    for k in range(K):
        g11, g12 = gmat[k, 0, 0], gmat[k, 0, 1]
        g21, g22 = gmat[k, 1, 0], gmat[k, 1, 1]
        for l in range(n):
            hl, ul, vl = h[k, l], u[k, l], v[k, l]
            for m in range(l, n):
                hr, ur, vr = h[k, m], u[k, m], v[k, m]
                uavg = 0.5 * (ul + ur)
                vavg = 0.5 * (vl + vr)
                pavg = 0.5 * g * hl * hr
                fx0 = 0.5 * (hl * ul + hr * ur)
                fx1 = fx0 * uavg + pavg
                fx2 = fx0 * vavg
                fy0 = 0.5 * (hl * vl + hr * vr)
                fy1 = fy0 * uavg
                fy2 = fy0 * vavg + pavg
                if m == l:
                    out[0, k, l] += qrd[l] * (g11 * fx0 + g21 * fy0) + qsd[l] * (
                        g12 * fx0 + g22 * fy0)
                    out[1, k, l] += qrd[l] * (g11 * fx1 + g21 * fy1) + qsd[l] * (
                        g12 * fx1 + g22 * fy1)
                    out[2, k, l] += qrd[l] * (g11 * fx2 + g21 * fy2) + qsd[l] * (
                        g12 * fx2 + g22 * fy2)
                else:
                    qr, qs = QrU[l, m], QsU[l, m]
                    if qr == 0.0 and qs == 0.0:
                        continue
                    s0 = qr * (g11 * fx0 + g21 * fy0) + qs * (g12 * fx0 + g22 * fy0)
                    s1 = qr * (g11 * fx1 + g21 * fy1) + qs * (g12 * fx1 + g22 * fy1)
                    s2 = qr * (g11 * fx2 + g21 * fy2) + qs * (g12 * fx2 + g22 * fy2)
                    out[0, k, l] += s0
                    out[0, k, m] -= s0
                    out[1, k, l] += s1
                    out[1, k, m] -= s1
                    out[2, k, l] += s2
                    out[2, k, m] -= s2


@njit(cache=True)
def vol2d_euler(rho, u, v, beta, gamma, gmat, QrU, QsU, qrd, qsd, out):
    K, n = rho.shape
    gm1 = gamma - 1.0
    for k in range(K):
        g11, g12 = gmat[k, 0, 0], gmat[k, 0, 1]
        g21, g22 = gmat[k, 1, 0], gmat[k, 1, 1]
        for l in range(n):
            rl, ul, vl, bl = rho[k, l], u[k, l], v[k, l], beta[k, l]
            for m in range(l, n):
                rr, ur, vr, br = rho[k, m], u[k, m], v[k, m], beta[k, m]
                rlog = _log_mean(rl, rr)
                blog = _log_mean(bl, br)
                pavg = (rl + rr) / (2.0 * (bl + br))
                uavg = 0.5 * (ul + ur)
                vavg = 0.5 * (vl + vr)
                ehat = rlog * (1.0 / (2.0 * blog * gm1)
                               + 0.5 * (ul * ur + vl * vr))
                fx0 = rlog * uavg
                fx1 = fx0 * uavg + pavg
                fx2 = fx0 * vavg
                fx3 = (ehat + pavg) * uavg
                fy0 = rlog * vavg
                fy1 = fy0 * uavg
                fy2 = fy0 * vavg + pavg
                fy3 = (ehat + pavg) * vavg
                if m == l:
                    out[0, k, l] += qrd[l] * (g11 * fx0 + g21 * fy0) + qsd[l] * (
                        g12 * fx0 + g22 * fy0)
                    out[1, k, l] += qrd[l] * (g11 * fx1 + g21 * fy1) + qsd[l] * (
                        g12 * fx1 + g22 * fy1)
                    out[2, k, l] += qrd[l] * (g11 * fx2 + g21 * fy2) + qsd[l] * (
                        g12 * fx2 + g22 * fy2)
                    out[3, k, l] += qrd[l] * (g11 * fx3 + g21 * fy3) + qsd[l] * (
                        g12 * fx3 + g22 * fy3)
                else:
                    qr, qs = QrU[l, m], QsU[l, m]
                    if qr == 0.0 and qs == 0.0:
                        continue
                    s0 = qr * (g11 * fx0 + g21 * fy0) + qs * (g12 * fx0 + g22 * fy0)
                    s1 = qr * (g11 * fx1 + g21 * fy1) + qs * (g12 * fx1 + g22 * fy1)
                    s2 = qr * (g11 * fx2 + g21 * fy2) + qs * (g12 * fx2 + g22 * fy2)
                    s3 = qr * (g11 * fx3 + g21 * fy3) + qs * (g12 * fx3 + g22 * fy3)
                    out[0, k, l] += s0
                    out[0, k, m] -= s0
                    out[1, k, l] += s1
                    out[1, k, m] -= s1
                    out[2, k, l] += s2
                    out[2, k, m] -= s2
                    out[3, k, l] += s3
                    out[3, k, m] -= s3
