"""Reference-element bases, quadrature rules, and SBP-type operator matrices.

Everything here lives on one of two reference elements: the interval
[-1, 1] or the bi-unit right triangle with vertices (-1,-1), (1,-1),
(-1,1).  Bases are L2-orthonormal (Legendre on the interval,
Koornwinder-Dubiner on the triangle), so the mass matrix under the
supplied quadrature is the identity up to roundoff.  Operator identities
are verified at build time; a residual above HARD_TOL indicates an
inconsistent basis/quadrature combination and raises.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import roots_jacobi


class ElementKind(Enum):
    INTERVAL = "interval"
    TRIANGLE = "triangle"


# Bi-unit right triangle; faces ordered bottom, hypotenuse, left.
TRI_VERTICES = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
TRI_FACES = ((0, 1), (1, 2), (2, 0))
TRI_FACE_LENGTHS = (2.0, 2.0 * math.sqrt(2.0), 2.0)

# Operators are rejected outright past this residual; tests pin 1e-12.
HARD_TOL = 1e-10


class OperatorConsistencyError(RuntimeError):
    """An SBP identity failed beyond HARD_TOL at operator build time."""


def jacobi_poly(x, alpha, beta, n):
    """Orthonormal Jacobi polynomial of degree n at points x.

    Normalized so that int_{-1}^{1} (1-x)^alpha (1+x)^beta p_n^2 dx = 1.
    Three-term recurrence in the orthonormal normalization.
    """
    x = np.asarray(x, dtype=float)
    gamma0 = (
        2.0 ** (alpha + beta + 1)
        / (alpha + beta + 1)
        * math.gamma(alpha + 1)
        * math.gamma(beta + 1)
        / math.gamma(alpha + beta + 1)
    )
    p_prev = np.full_like(x, 1.0 / math.sqrt(gamma0))
    if n == 0:
        return p_prev
    gamma1 = (alpha + 1) * (beta + 1) / (alpha + beta + 3) * gamma0
    p = ((alpha + beta + 2) * x / 2 + (alpha - beta) / 2) / math.sqrt(gamma1)
    if n == 1:
        return p
    aold = 2.0 / (2 + alpha + beta) * math.sqrt(
        (alpha + 1) * (beta + 1) / (alpha + beta + 3)
    )
    for i in range(1, n):
        h1 = 2 * i + alpha + beta
        anew = 2.0 / (h1 + 2) * math.sqrt(
            (i + 1)
            * (i + 1 + alpha + beta)
            * (i + 1 + alpha)
            * (i + 1 + beta)
            / (h1 + 1)
            / (h1 + 3)
        )
        bnew = -(alpha**2 - beta**2) / (h1 * (h1 + 2))
        p_prev, p = p, (-aold * p_prev + (x - bnew) * p) / anew
        aold = anew
    return p


def grad_jacobi_poly(x, alpha, beta, n):
    """Derivative of the orthonormal Jacobi polynomial of degree n."""
    x = np.asarray(x, dtype=float)
    if n == 0:
        return np.zeros_like(x)
    return math.sqrt(n * (n + alpha + beta + 1)) * jacobi_poly(
        x, alpha + 1, beta + 1, n - 1
    )


def _rs_to_ab(r, s):
    # Collapsed coordinates; the top vertex s=1 maps to a=-1.
    a = np.where(np.abs(1.0 - s) > 1e-14, 2.0 * (1.0 + r) / (1.0 - s) - 1.0, -1.0)
    return a, s


def _dubiner(a, b, i, j):
    return (
        math.sqrt(2.0)
        * jacobi_poly(a, 0, 0, i)
        * jacobi_poly(b, 2 * i + 1, 0, j)
        * (1.0 - b) ** i
    )


def _grad_dubiner(a, b, i, j):
    fa = jacobi_poly(a, 0, 0, i)
    dfa = grad_jacobi_poly(a, 0, 0, i)
    gb = jacobi_poly(b, 2 * i + 1, 0, j)
    dgb = grad_jacobi_poly(b, 2 * i + 1, 0, j)

    dr = dfa * gb
    if i > 0:
        dr = dr * (0.5 * (1.0 - b)) ** (i - 1)
    ds = dfa * (gb * (0.5 * (1.0 + a)))
    if i > 0:
        ds = ds * (0.5 * (1.0 - b)) ** (i - 1)
    tmp = dgb * (0.5 * (1.0 - b)) ** i
    if i > 0:
        tmp = tmp - 0.5 * i * gb * (0.5 * (1.0 - b)) ** (i - 1)
    ds = ds + fa * tmp
    fac = 2.0 ** (i + 0.5)
    return fac * dr, fac * ds


def basis_dimension(n_degree: int, kind: ElementKind) -> int:
    if kind is ElementKind.INTERVAL:
        return n_degree + 1
    return (n_degree + 1) * (n_degree + 2) // 2


@dataclass(frozen=True)
class BasisEvaluator:
    """Orthonormal modal basis on a reference element.

    ``vals`` returns the (npts, Np) Vandermonde matrix; ``grads`` returns
    one such matrix per reference coordinate.
    """

    degree: int
    kind: ElementKind
    dim: int
    Np: int

    def _as_points(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if pts.shape[1] != self.dim:
            pts = pts.T
        if pts.shape[1] != self.dim:
            raise ValueError(f"points must have {self.dim} coordinates")
        return pts

    def vals(self, pts):
        pts = self._as_points(pts)
        V = np.empty((pts.shape[0], self.Np))
        if self.kind is ElementKind.INTERVAL:
            x = pts[:, 0]
            for j in range(self.Np):
                V[:, j] = jacobi_poly(x, 0, 0, j)
        else:
            a, b = _rs_to_ab(pts[:, 0], pts[:, 1])
            col = 0
            for i in range(self.degree + 1):
                for j in range(self.degree + 1 - i):
                    V[:, col] = _dubiner(a, b, i, j)
                    col += 1
        return V

    def grads(self, pts):
        pts = self._as_points(pts)
        if self.kind is ElementKind.INTERVAL:
            x = pts[:, 0]
            Vr = np.empty((pts.shape[0], self.Np))
            for j in range(self.Np):
                Vr[:, j] = grad_jacobi_poly(x, 0, 0, j)
            return (Vr,)
        a, b = _rs_to_ab(pts[:, 0], pts[:, 1])
        Vr = np.empty((pts.shape[0], self.Np))
        Vs = np.empty_like(Vr)
        col = 0
        for i in range(self.degree + 1):
            for j in range(self.degree + 1 - i):
                Vr[:, col], Vs[:, col] = _grad_dubiner(a, b, i, j)
                col += 1
        return (Vr, Vs)


def build_basis(n_degree: int, kind: ElementKind) -> BasisEvaluator:
    if n_degree < 0:
        raise ValueError("polynomial degree must be >= 0")
    dim = 1 if kind is ElementKind.INTERVAL else 2
    return BasisEvaluator(n_degree, kind, dim, basis_dimension(n_degree, kind))


@dataclass(frozen=True)
class Quadrature:
    """Points (npts, dim) and positive weights on a reference element."""

    points: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class SurfaceQuadrature:
    """Per-face quadrature with unit outward reference normals.

    Points are grouped face-by-face, ``nfp`` points per face.  Weights
    carry the reference face measure (they sum to the face length), so
    the boundary matrices are B_i = diag(weights * normals[:, i]).
    """

    points: np.ndarray
    weights: np.ndarray
    normals: np.ndarray
    nfaces: int
    nfp: int


def build_quadrature(n_degree: int, kind: ElementKind):
    """Volume and surface rules exact to degrees >= 2N-1 and >= 2N.

    Interval: (N+1)-point Gauss (exact to 2N+1) with endpoint "faces".
    Triangle: collapsed (N+1)^2 Gauss x Gauss-Jacobi(1,0) tensor rule
    (exact to total degree 2N+1) and (N+1)-point Gauss per edge.
    """
    if n_degree < 0:
        raise ValueError("polynomial degree must be >= 0")
    npt = n_degree + 1
    gx, gw = np.polynomial.legendre.leggauss(npt)
    if kind is ElementKind.INTERVAL:
        vol = Quadrature(gx[:, None].copy(), gw.copy())
        surf = SurfaceQuadrature(
            points=np.array([[-1.0], [1.0]]),
            weights=np.array([1.0, 1.0]),
            normals=np.array([[-1.0], [1.0]]),
            nfaces=2,
            nfp=1,
        )
        return vol, surf

    jb, jw = roots_jacobi(npt, 1.0, 0.0)
    A, B = np.meshgrid(gx, jb, indexing="ij")
    WA, WB = np.meshgrid(gw, jw, indexing="ij")
    r = (1.0 + A) * (1.0 - B) / 2.0 - 1.0
    s = B
    w = 0.5 * WA * WB
    vol = Quadrature(
        np.column_stack([r.ravel(), s.ravel()]), w.ravel().copy()
    )

    pts, wts, nrm = [], [], []
    for (va, vb), flen in zip(TRI_FACES, TRI_FACE_LENGTHS):
        xa, xb = TRI_VERTICES[va], TRI_VERTICES[vb]
        t = gx
        face_pts = np.outer((1.0 - t) / 2.0, xa) + np.outer((1.0 + t) / 2.0, xb)
        edge = xb - xa
        n = np.array([edge[1], -edge[0]])
        n = n / np.linalg.norm(n)
        pts.append(face_pts)
        wts.append(gw * (flen / 2.0))
        nrm.append(np.tile(n, (npt, 1)))
    surf = SurfaceQuadrature(
        points=np.vstack(pts),
        weights=np.concatenate(wts),
        normals=np.vstack(nrm),
        nfaces=3,
        nfp=npt,
    )
    return vol, surf


@dataclass(frozen=True)
class OperatorSet:
    """All reference-element matrices used by the flux-differencing solver.

    The hybridized operators Qh[i] act on stacked (volume, surface)
    quadrature values and satisfy Qh + Qh^T = blockdiag(0, B_i) and
    Qh @ 1 = 0; both are enforced at build time.
    """

    degree: int
    kind: ElementKind
    dim: int
    Np: int
    Nq: int
    Nqf: int
    nfaces: int
    nfp: int
    xq: np.ndarray
    wq: np.ndarray
    xf: np.ndarray
    wf: np.ndarray
    nhat: np.ndarray
    Vq: np.ndarray
    Vf: np.ndarray
    VqVf: np.ndarray
    M: np.ndarray
    Minv: np.ndarray
    Pq: np.ndarray
    D: tuple
    Qhat: tuple
    Q: tuple
    E: np.ndarray
    B: tuple
    Qh: tuple

    def matrix(self, name: str) -> np.ndarray:
        """Look up an operator matrix by name (for debug CSV dumps)."""
        plain = {
            "Vq": self.Vq, "Vf": self.Vf, "M": self.M, "Minv": self.Minv,
            "Pq": self.Pq, "E": self.E, "W": np.diag(self.wq),
            "Wf": np.diag(self.wf),
        }
        if name in plain:
            return plain[name]
        for stem, group in (("D", self.D), ("Qhat", self.Qhat),
                            ("Q", self.Q), ("B", self.B), ("Qh", self.Qh)):
            for i, mat in enumerate(group):
                if name == f"{stem}{i + 1}":
                    return np.diag(mat) if mat.ndim == 1 else mat
        raise KeyError(f"unknown operator name: {name}")


def sbp_residuals(ops: OperatorSet) -> dict:
    """Max-abs residuals of the operator identities, keyed by identity."""
    res = {}
    for i in range(ops.dim):
        Bi = np.diag(ops.B[i])
        res[f"Qhat{i+1}_sbp"] = np.max(
            np.abs(ops.Qhat[i] + ops.Qhat[i].T - ops.Vf.T @ Bi @ ops.Vf)
        )
        res[f"Q{i+1}_sbp"] = np.max(
            np.abs(ops.Q[i] + ops.Q[i].T - ops.E.T @ Bi @ ops.E)
        )
        Bh = np.zeros((ops.Nq + ops.Nqf, ops.Nq + ops.Nqf))
        Bh[ops.Nq:, ops.Nq:] = Bi
        res[f"Qh{i+1}_sbp"] = np.max(np.abs(ops.Qh[i] + ops.Qh[i].T - Bh))
        res[f"Qh{i+1}_null"] = np.max(
            np.abs(ops.Qh[i] @ np.ones(ops.Nq + ops.Nqf))
        )
    res["PqVq_identity"] = np.max(np.abs(ops.Pq @ ops.Vq - np.eye(ops.Np)))
    return res


def build_operators(n_degree: int, kind: ElementKind) -> OperatorSet:
    basis = build_basis(n_degree, kind)
    vol, surf = build_quadrature(n_degree, kind)

    Vq = basis.vals(vol.points)
    Vf = basis.vals(surf.points)
    wq, wf = vol.weights, surf.weights

    M = Vq.T @ (wq[:, None] * Vq)
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise OperatorConsistencyError(
            f"mass matrix not SPD for N={n_degree}, {kind.value}"
        ) from exc
    Minv = np.linalg.inv(M)
    Pq = Minv @ (Vq.T * wq)

    Vder = basis.grads(vol.points)
    D = tuple(Pq @ Vd for Vd in Vder)
    Qhat = tuple(M @ Di for Di in D)
    Q = tuple(Pq.T @ Qh @ Pq for Qh in Qhat)
    E = Vf @ Pq
    B = tuple(wf * surf.normals[:, i] for i in range(basis.dim))

    Nq, Nqf = len(wq), len(wf)
    Qh = []
    for i in range(basis.dim):
        top = np.hstack([0.5 * (Q[i] - Q[i].T), 0.5 * (E.T * B[i])])
        bot = np.hstack([-0.5 * (B[i][:, None] * E), 0.5 * np.diag(B[i])])
        Qh.append(np.vstack([top, bot]))

    ops = OperatorSet(
        degree=n_degree, kind=kind, dim=basis.dim, Np=basis.Np,
        Nq=Nq, Nqf=Nqf, nfaces=surf.nfaces, nfp=surf.nfp,
        xq=vol.points, wq=wq, xf=surf.points, wf=wf, nhat=surf.normals,
        Vq=Vq, Vf=Vf, VqVf=np.vstack([Vq, Vf]),
        M=M, Minv=Minv, Pq=Pq, D=D, Qhat=Qhat, Q=Q, E=E, B=B,
        Qh=tuple(Qh),
    )

    worst = max(sbp_residuals(ops).values())
    if worst > HARD_TOL:
        raise OperatorConsistencyError(
            f"SBP residual {worst:.3e} exceeds {HARD_TOL:.0e} "
            f"for N={n_degree}, {kind.value}"
        )
    return ops
