"""Entropy rate, conserved totals, and probe extraction.

The entropy rate is the width-weighted quadrature approximation of
d/dt int S(u): channels contribute A * sum_k 1^T J^k W dS(u_q)/dt and
patches the same with unit weight.  Two algebraically identical
evaluations are provided (pointwise chain rule at quadrature points and
the projected-coefficient form); the tests check they agree to roundoff.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from esdg.refelem import build_basis
from esdg.solver import Simulation, _CompiledChannel, _CompiledPatch

_EDGE_TOL = 1e-9


def _sub_scale(sub):
    return sub.width if isinstance(sub, _CompiledChannel) else 1.0


def entropy_rate(sim: Simulation, state, dudt) -> float:
    """Quadrature form: sum over points of w J v(u_q) . (du/dt)_q."""
    total = 0.0
    for sub in sim.subdomains:
        ops = sub.ops
        uq = state[sub.name] @ ops.Vq.T
        dq = dudt[sub.name] @ ops.Vq.T
        v = sub.model.entropy_variables(uq)
        cell = np.einsum("ckq,ckq,q->k", v, dq, ops.wq)
        total += _sub_scale(sub) * float(np.dot(sub.J, cell))
    return total


def entropy_rate_projected(sim: Simulation, state, dudt) -> float:
    """Projected form: sum of v_h^T (M^k du/dt); equals entropy_rate."""
    total = 0.0
    for sub in sim.subdomains:
        ops = sub.ops
        uq = state[sub.name] @ ops.Vq.T
        vh = sub.model.entropy_variables(uq) @ ops.Pq.T
        mdu = dudt[sub.name] @ ops.M
        cell = np.einsum("ckj,ckj->k", vh, mdu)
        total += _sub_scale(sub) * float(np.dot(sub.J, cell))
    return total


def conserved_totals(sim: Simulation, state) -> np.ndarray:
    """Width-weighted integrals of the conserved fields.

    Slots follow the 2D component layout; 1D channels place their axial
    momentum in the first momentum slot.
    """
    n2 = sim.model2d.ncons
    out = np.zeros(n2)
    for sub in sim.subdomains:
        ops = sub.ops
        uq = state[sub.name] @ ops.Vq.T
        cell = np.einsum("ckq,q->ck", uq, ops.wq)
        vals = _sub_scale(sub) * (cell @ sub.J)
        if isinstance(sub, _CompiledChannel):
            slots = [0, 1] + ([n2 - 1] if sim.network.system == "euler" else [])
        else:
            slots = list(range(n2))
        for c, s in enumerate(slots):
            out[s] += vals[c]
    return out


@dataclass(frozen=True)
class Probe1D:
    name: str
    subdomain: str
    xi: float


@dataclass(frozen=True)
class Probe2D:
    """Width-averaged sample along the segment p0 -> p1."""

    name: str
    subdomain: str
    p0: tuple
    p1: tuple


class CompiledProbe:
    """Probe reduced to one weight row per conservative component."""

    def __init__(self, probe, sim: Simulation):
        self.name = probe.name
        self.subdomain = probe.subdomain
        sub = sim._by_name[probe.subdomain]
        basis = build_basis(sub.ops.degree, sub.ops.kind)
        if isinstance(probe, Probe1D):
            self._rows = self._rows_1d(probe, sub, basis)
        else:
            self._rows = self._rows_2d(probe, sub, basis)

    @staticmethod
    def _rows_1d(probe, sub, basis):
        mesh = sub.mesh
        if not mesh.x[0] - 1e-12 <= probe.xi <= mesh.x[-1] + 1e-12:
            raise ValueError(
                f"probe {probe.name}: {probe.xi} outside channel {sub.name}"
            )
        tol = _EDGE_TOL * (mesh.x[-1] - mesh.x[0])
        hits = []
        for k in range(mesh.K):
            if mesh.x[k] - tol <= probe.xi <= mesh.x[k + 1] + tol:
                hits.append(k)
        rows = np.zeros((len(hits), sub.ops.Np))
        for i, k in enumerate(hits):
            xhat = (probe.xi - mesh.centers[k]) / mesh.J[k]
            rows[i] = basis.vals(np.array([[np.clip(xhat, -1.0, 1.0)]]))[0]
        # Element-boundary ties average the one-sided values.
        weights = np.full(len(hits), 1.0 / len(hits))
        return [(k, w * row) for k, w, row in zip(hits, weights, rows)]

    @staticmethod
    def _rows_2d(probe, sub, basis):
        mesh = sub.mesh
        p0 = np.asarray(probe.p0, dtype=float)
        p1 = np.asarray(probe.p1, dtype=float)
        seg = p1 - p0
        seg_len = float(np.hypot(*seg))
        if seg_len <= 0:
            raise ValueError(f"probe {probe.name}: degenerate segment")
        gx, gw = np.polynomial.legendre.leggauss(sub.ops.degree + 1)
        tol = _EDGE_TOL
        pieces = []  # (k, t-quad points, weights)
        for k in range(mesh.K):
            x = mesh.vx[mesh.tris[k]]
            y = mesh.vy[mesh.tris[k]]
            # Barycentric coordinates are affine in the segment parameter.
            T = np.array([[x[1] - x[0], x[2] - x[0]], [y[1] - y[0], y[2] - y[0]]])
            Tinv = np.linalg.inv(T)
            lam12_0 = Tinv @ (p0 - np.array([x[0], y[0]]))
            lam12_d = Tinv @ seg
            alphas = np.array([1.0 - lam12_0.sum(), lam12_0[0], lam12_0[1]])
            betas = np.array([-lam12_d.sum(), lam12_d[0], lam12_d[1]])
            lo, hi = 0.0, 1.0
            ok = True
            for a, b in zip(alphas, betas):
                if abs(b) < 1e-14:
                    if a < -tol:
                        ok = False
                        break
                elif b > 0:
                    lo = max(lo, (-tol - a) / b)
                else:
                    hi = min(hi, (-tol - a) / b)
            if not ok or hi - lo < 1e-8:
                continue
            tq = 0.5 * (lo + hi) + 0.5 * (hi - lo) * gx
            wq = 0.5 * (hi - lo) * gw * seg_len
            pieces.append((k, tq, wq))
        covered = sum(w.sum() for _, _, w in pieces)
        if covered < seg_len * (1.0 - 1e-6):
            raise ValueError(
                f"probe {probe.name}: segment not covered by patch "
                f"{sub.name} ({covered:.3g} of {seg_len:.3g})"
            )
        rows = []
        for k, tq, wq in pieces:
            pts = p0[None, :] + tq[:, None] * seg[None, :]
            x = mesh.vx[mesh.tris[k]]
            y = mesh.vy[mesh.tris[k]]
            T = np.array([[x[1] - x[0], x[2] - x[0]], [y[1] - y[0], y[2] - y[0]]])
            lam12 = np.linalg.solve(T, (pts - np.array([x[0], y[0]])).T)
            # Reference coordinates from barycentric: r = 2 lam1 - 1, s = 2 lam2 - 1.
            ref = np.column_stack([2.0 * lam12[0] - 1.0, 2.0 * lam12[1] - 1.0])
            V = basis.vals(ref)
            rows.append((k, (wq / covered) @ V))
        return rows

    def __call__(self, state) -> np.ndarray:
        u = state[self.subdomain]
        out = None
        for k, row in self._rows:
            val = u[:, k, :] @ row
            out = val if out is None else out + val
        return out


def make_recorder(probes=()):
    """Standard recorder: entropy rate, conserved totals, probe values."""
    compiled = {}

    def recorder(sim, t, state):
        if "probes" not in compiled:
            compiled["probes"] = [CompiledProbe(p, sim) for p in probes]
        dudt = sim.rhs(state, t)
        row = {
            "entropy_rate": entropy_rate(sim, state, dudt),
            "totals": conserved_totals(sim, state),
        }
        row["probes"] = {
            cp.name: cp(state) for cp in compiled["probes"]
        }
        return row

    return recorder
