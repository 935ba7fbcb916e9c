"""Semi-discrete entropy-stable DG assembly and low-storage RK stepping.

The right-hand side on each element is the hybridized flux-differencing
form

    M^k du/dt = -[Vq; Vf]^T sum_i 2 (Q^k_{i,h} o F_i) 1
                - Vf^T B^k_i (f_{i,S}(u_ext, u_int) - f_i(u_int)),

evaluated on the entropy-projected trace.  Exterior states come from
neighbors (interior and periodic faces), mirror states (walls), lifted
1D junction states (1D-2D interfaces), or the coefficient-weighted flux
sharing of 1D-1D junctions.  With penalization off the assembled network
is entropy conservative to roundoff; Lax-Friedrichs penalization makes
every coupling dissipative.

All loops run in a fixed order and the assembly is single-threaded, so a
given build produces bit-identical results run to run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from esdg import _kernels
from esdg.network import Network, end_sign
from esdg.physics import (
    AdmissibilityError,
    Euler,
    ShallowWater,
    lift_1d_to_2d,
    normal_ec_flux,
    normal_flux,
    transform_matrix,
)
from esdg.refelem import ElementKind, build_operators

# Carpenter-Kennedy 4th-order 5-stage low-storage coefficients.
LSRK45_A = (
    0.0,
    -567301805773.0 / 1357537059087.0,
    -2404267990393.0 / 2016746695238.0,
    -3550918686646.0 / 2091501179385.0,
    -1275806237668.0 / 842570457699.0,
)
LSRK45_B = (
    1432997174477.0 / 9575080441755.0,
    5161836677717.0 / 13612068292357.0,
    1720146321549.0 / 2090206949498.0,
    3134564353537.0 / 4481467310338.0,
    2277821191437.0 / 14882151754819.0,
)
LSRK45_C = (
    0.0,
    1432997174477.0 / 9575080441755.0,
    2526269341429.0 / 6820363962896.0,
    2006345519317.0 / 3224310063776.0,
    2802321613138.0 / 2924317926251.0,
)


class SimulationError(RuntimeError):
    """A run aborted; carries the simulation time and location."""

    def __init__(self, message, t=None, subdomain=None):
        super().__init__(message)
        self.t = t
        self.subdomain = subdomain


def _upper_and_diag(Q2):
    return np.ascontiguousarray(np.triu(Q2, 1)), np.ascontiguousarray(np.diag(Q2))


def _make_models(network: Network):
    if network.system == "swe":
        return ShallowWater(1, network.g), ShallowWater(2, network.g)
    if network.system == "euler":
        return Euler(1, network.gamma), Euler(2, network.gamma)
    raise ValueError(f"unknown system {network.system!r}")


class _CompiledChannel:
    """A 1D subdomain with its operators and end-face bookkeeping."""

    def __init__(self, channel, model, ops):
        self.src = channel
        self.name = channel.name
        self.model = model
        self.ops = ops
        self.mesh = channel.mesh
        self.width = channel.width
        self.K = channel.mesh.K
        self.J = channel.mesh.J
        # End handling is settled at network compile time.
        self.end_bc = {"left": channel.bc_left, "right": channel.bc_right}
        Q2 = 2.0 * ops.Qh[0]
        self.QU, self.qd = _upper_and_diag(Q2)
        self.h_min = channel.mesh.h_min

    def initial_field(self):
        xi = self.mesh.points(self.ops.xq[:, 0])
        vals = np.asarray(self.src.ic(xi), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None, None]
        vals = np.broadcast_to(vals, (self.model.ncons, self.K, self.ops.Nq))
        return np.ascontiguousarray(vals @ self.ops.Pq.T)

    def project(self, u):
        ops = self.ops
        uq = u @ ops.Vq.T
        self.model.check_admissible(uq, f"in {self.name}")
        vq = self.model.entropy_variables(uq)
        vtilde = (vq @ ops.Pq.T) @ ops.VqVf.T
        utilde = self.model.conservative_from_entropy(vtilde)
        self.model.check_admissible(utilde, f"in {self.name} (projected trace)")
        return uq, utilde

    def end_state(self, utilde, end):
        uf = utilde[:, :, self.ops.Nq:]
        if end == "left":
            return uf[:, 0, 0]
        return uf[:, -1, 1]

    def volume(self, utilde):
        out = np.zeros_like(utilde)
        h = np.ascontiguousarray(utilde[0])
        if isinstance(self.model, ShallowWater):
            vel = np.ascontiguousarray(utilde[1] / utilde[0])
            _kernels.vol1d_swe(h, vel, self.model.g, self.QU, self.qd, out)
        else:
            vel = np.ascontiguousarray(utilde[1] / utilde[0])
            beta = np.ascontiguousarray(
                utilde[0] / (2.0 * self.model.pressure(utilde))
            )
            _kernels.vol1d_euler(h, vel, beta, self.model.gamma,
                                 self.QU, self.qd, out)
        return out

    def _end_flux(self, uf, end, penalize):
        """Wall or periodic flux where no junction claims the end."""
        model = self.model
        bc = self.end_bc[end]
        if bc == "wall":
            u_end = uf[:, 0, 0] if end == "left" else uf[:, -1, 1]
            ext = model.mirror_state(u_end)
            f = model.ec_flux(u_end, ext, 0)
            if penalize:
                sign = end_sign(end)
                lam = np.maximum(model.wavespeed(u_end), model.wavespeed(ext))
                f = f - sign * 0.5 * lam * (ext - u_end)
            return f
        if bc == "periodic":
            a, b = uf[:, -1, 1], uf[:, 0, 0]
            f = model.ec_flux(a, b, 0)
            if penalize:
                lam = np.maximum(model.wavespeed(a), model.wavespeed(b))
                f = f - 0.5 * lam * (b - a)
            return f
        raise SimulationError(
            f"channel {self.name}: {end} end declared {bc!r} but no junction "
            "claims it"
        )

    def assemble(self, utilde, out_vol, end_fluxes, penalize):
        ops, model = self.ops, self.model
        uf = utilde[:, :, ops.Nq:]
        a, b = uf[:, :-1, 1], uf[:, 1:, 0]
        f_int = model.ec_flux(a, b, 0)
        if penalize and self.K > 1:
            lam = np.maximum(model.wavespeed(a), model.wavespeed(b))
            f_int = f_int - 0.5 * lam * (b - a)
        fL = end_fluxes["left"]
        fR = end_fluxes["right"]
        if fL is None or fR is None:
            if self.end_bc["left"] == "periodic" or self.end_bc["right"] == "periodic":
                if self.end_bc["left"] != "periodic" or self.end_bc["right"] != "periodic":
                    raise SimulationError(
                        f"channel {self.name}: periodic needs both ends periodic"
                    )
                f_per = self._end_flux(uf, "left", penalize)
                fL = f_per if fL is None else fL
                fR = f_per if fR is None else fR
            else:
                if fL is None:
                    fL = self._end_flux(uf, "left", penalize)
                if fR is None:
                    fR = self._end_flux(uf, "right", penalize)

        left_flux = np.concatenate([fL[:, None], f_int], axis=1)
        right_flux = np.concatenate([f_int, fR[:, None]], axis=1)
        dL = left_flux - model.physical_flux(uf[:, :, 0], 0)
        dR = right_flux - model.physical_flux(uf[:, :, 1], 0)
        r = out_vol @ ops.VqVf
        r += -dL[:, :, None] * ops.Vf[0][None, None, :]
        r += dR[:, :, None] * ops.Vf[1][None, None, :]
        return -(r @ ops.Minv) / self.J[None, :, None]


class _CompiledPatch:
    """A 2D subdomain with gather maps for all face exchanges."""

    def __init__(self, patch, model, ops):
        self.src = patch
        self.name = patch.name
        self.model = model
        self.ops = ops
        mesh = patch.mesh
        self.mesh = mesh
        self.K = mesh.K
        self.J = mesh.J
        self.gmat = np.ascontiguousarray(mesh.gmat)
        self.h_min = mesh.h_min
        self.QrU, self.qrd = _upper_and_diag(2.0 * ops.Qh[0])
        self.QsU, self.qsd = _upper_and_diag(2.0 * ops.Qh[1])

        nfp, Nqf = ops.nfp, ops.Nqf
        rep = np.repeat(np.arange(3), nfp)
        self.nxp = mesh.nxf[:, rep]
        self.nyp = mesh.nyf[:, rep]
        self.wsJ = ops.wf[None, :] * mesh.sJ[:, rep]

        # Gather maps: exterior trace point for each face point.
        self.src_k = np.tile(np.arange(self.K)[:, None], (1, Nqf))
        self.src_p = np.tile(np.arange(Nqf)[None, :], (self.K, 1))
        self._wall_k, self._wall_p = [], []
        unresolved = {}
        rev = nfp - 1 - np.arange(nfp)
        for k in range(self.K):
            for f in range(3):
                k2, f2 = mesh.etoe[k, f], mesh.etof[k, f]
                cols = f * nfp + np.arange(nfp)
                if k2 >= 0:
                    self.src_k[k, cols] = k2
                    self.src_p[k, cols] = f2 * nfp + rev
                else:
                    unresolved[(k, f)] = cols
        for k, f in mesh.btags.get("wall", []):
            cols = unresolved.pop((k, f))
            self._wall_k.extend([k] * nfp)
            self._wall_p.extend(cols)
        self._resolve_periodic(unresolved)
        self.junction_slots = {}  # interface index -> (karr, parr)
        self._unresolved = unresolved
        self._wall_k = np.array(self._wall_k, dtype=np.int64)
        self._wall_p = np.array(self._wall_p, dtype=np.int64)

    def _resolve_periodic(self, unresolved):
        mesh, nfp = self.mesh, self.ops.nfp
        tol = 1e-10 * max(mesh.diameter, 1.0)
        rev = nfp - 1 - np.arange(nfp)
        for tag_a, tag_b, shift in self.src.periodic:
            faces_a = mesh.btags.get(tag_a, [])
            faces_b = list(mesh.btags.get(tag_b, []))
            if len(faces_a) != len(faces_b):
                raise SimulationError(
                    f"patch {self.name}: periodic tags {tag_a}/{tag_b} "
                    "have different face counts"
                )
            for k, f in faces_a:
                mx, my = mesh.face_midpoint(k, f)
                target = (mx + shift[0], my + shift[1])
                match = None
                for k2, f2 in faces_b:
                    m2 = mesh.face_midpoint(k2, f2)
                    if abs(m2[0] - target[0]) < tol and abs(m2[1] - target[1]) < tol:
                        match = (k2, f2)
                        break
                if match is None:
                    raise SimulationError(
                        f"patch {self.name}: no periodic partner for face "
                        f"({k}, {f}) under shift {shift}"
                    )
                faces_b.remove(match)
                k2, f2 = match
                cols = unresolved.pop((k, f))
                cols2 = unresolved.pop((k2, f2))
                self.src_k[k, cols] = k2
                self.src_p[k, cols] = f2 * nfp + rev
                self.src_k[k2, cols2] = k
                self.src_p[k2, cols2] = f * nfp + rev

    def register_interface(self, idx, faces):
        nfp = self.ops.nfp
        karr, parr = [], []
        for k, f in faces:
            cols = self._unresolved.pop((k, f), None)
            if cols is None:
                raise SimulationError(
                    f"patch {self.name}: interface face ({k}, {f}) already "
                    "claimed or not a boundary face"
                )
            karr.extend([k] * nfp)
            parr.extend(cols)
        self.junction_slots[idx] = (
            np.array(karr, dtype=np.int64),
            np.array(parr, dtype=np.int64),
        )

    def finalize(self):
        if self._unresolved:
            (k, f) = next(iter(self._unresolved))
            raise SimulationError(
                f"patch {self.name}: boundary face ({k}, {f}) has no wall, "
                "periodic, or junction treatment"
            )

    def initial_field(self):
        x = np.empty((self.K, self.ops.Nq))
        y = np.empty_like(x)
        verts = self.mesh.tris
        r, s = self.ops.xq[:, 0], self.ops.xq[:, 1]
        lam = np.stack([-0.5 * (r + s), 0.5 * (1 + r), 0.5 * (1 + s)])
        x[:] = np.tensordot(self.mesh.vx[verts], lam, axes=(1, 0))
        y[:] = np.tensordot(self.mesh.vy[verts], lam, axes=(1, 0))
        vals = np.asarray(self.src.ic(x, y), dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None, None]
        vals = np.broadcast_to(vals, (self.model.ncons, self.K, self.ops.Nq))
        return np.ascontiguousarray(vals @ self.ops.Pq.T)

    def project(self, u):
        ops = self.ops
        uq = u @ ops.Vq.T
        self.model.check_admissible(uq, f"in {self.name}")
        vq = self.model.entropy_variables(uq)
        vtilde = (vq @ ops.Pq.T) @ ops.VqVf.T
        utilde = self.model.conservative_from_entropy(vtilde)
        self.model.check_admissible(utilde, f"in {self.name} (projected trace)")
        return uq, utilde

    def volume(self, utilde):
        out = np.zeros_like(utilde)
        if isinstance(self.model, ShallowWater):
            h = np.ascontiguousarray(utilde[0])
            u = np.ascontiguousarray(utilde[1] / utilde[0])
            v = np.ascontiguousarray(utilde[2] / utilde[0])
            _kernels.vol2d_swe(h, u, v, self.model.g, self.gmat,
                               self.QrU, self.QsU, self.qrd, self.qsd, out)
        else:
            rho = np.ascontiguousarray(utilde[0])
            u = np.ascontiguousarray(utilde[1] / utilde[0])
            v = np.ascontiguousarray(utilde[2] / utilde[0])
            beta = np.ascontiguousarray(
                utilde[0] / (2.0 * self.model.pressure(utilde))
            )
            _kernels.vol2d_euler(rho, u, v, beta, self.model.gamma, self.gmat,
                                 self.QrU, self.QsU, self.qrd, self.qsd, out)
        return out

    def exterior(self, utilde):
        uf = utilde[:, :, self.ops.Nq:]
        ext = uf[:, self.src_k, self.src_p]
        if self._wall_k.size:
            kk, pp = self._wall_k, self._wall_p
            ext[:, kk, pp] = self.model.wall_state(
                uf[:, kk, pp], self.nxp[kk, pp], self.nyp[kk, pp]
            )
        return ext

    def fluxes(self, utilde, ext, penalize):
        """Pointwise normal numerical flux before consistency subtraction."""
        uf = utilde[:, :, self.ops.Nq:]
        fstar = normal_ec_flux(self.model, ext, uf, self.nxp, self.nyp)
        if penalize:
            lam = np.maximum(self.model.wavespeed(ext), self.model.wavespeed(uf))
            fstar = fstar - 0.5 * lam * (ext - uf)
        return fstar

    def assemble(self, utilde, out_vol, fstar):
        ops = self.ops
        uf = utilde[:, :, ops.Nq:]
        fn_int = normal_flux(self.model, uf, self.nxp, self.nyp)
        r = out_vol @ ops.VqVf
        r += ((fstar - fn_int) * self.wsJ) @ ops.Vf
        return -(r @ ops.Minv) / self.J[None, :, None]


@dataclass
class RunResult:
    times: np.ndarray
    records: list
    final_state: dict
    steps: int


class Simulation:
    """A compiled network ready for time integration."""

    def __init__(self, network: Network, n_1d=3, n_2d=3, cfl=0.25,
                 penalize=True):
        network.validate()
        self.network = network
        self.cfl = float(cfl)
        self.penalize = bool(penalize)
        self.model1d, self.model2d = _make_models(network)
        self.n_1d, self.n_2d = int(n_1d), int(n_2d)
        if min(self.n_1d, self.n_2d) < 1:
            raise ValueError("polynomial degrees must be >= 1")

        ops1 = build_operators(self.n_1d, ElementKind.INTERVAL)
        self.channels = [
            _CompiledChannel(ch, self.model1d, ops1) for ch in network.channels
        ]
        if network.patches:
            ops2 = build_operators(self.n_2d, ElementKind.TRIANGLE)
            self.patches = [
                _CompiledPatch(p, self.model2d, ops2) for p in network.patches
            ]
        else:
            self.patches = []
        self._by_name = {c.name: c for c in self.channels}
        self._by_name.update({p.name: p for p in self.patches})

        # Junction bookkeeping: claimed channel ends.
        self._claimed = {}
        for j_idx, jn in enumerate(network.junctions):
            for nm, end in jn.members:
                self._claimed[(nm, end)] = ("junction11", j_idx)
        self._itf = []
        for i_idx, itf in enumerate(network.interfaces):
            self._claimed[(itf.channel, itf.end)] = ("junction12", i_idx)
            patch = self._by_name[itf.patch]
            patch.register_interface(i_idx, itf.faces)
            R = transform_matrix(self.model1d, itf.axis)
            karr, parr = patch.junction_slots[i_idx]
            w = patch.wsJ[karr, parr]
            self._itf.append(
                {
                    "channel": itf.channel,
                    "end": itf.end,
                    "sign": itf.sign,
                    "patch": itf.patch,
                    "R": R,
                    "karr": karr,
                    "parr": parr,
                    "w": w,
                    "wsum": float(w.sum()),
                }
            )
        for p in self.patches:
            p.finalize()

        self.subdomains = self.channels + self.patches
        self.dt_nominal = self._compute_dt()

    # -- timestep -----------------------------------------------------------
    def _compute_dt(self):
        cands = []
        if self.channels:
            c1 = (self.n_1d + 1) ** 2 / 2.0
            h1 = min(c.h_min for c in self.channels)
            cands.append(self.cfl * h1 / c1)
        if self.patches:
            c2 = (self.n_2d + 1) * (self.n_2d + 2) / 2.0
            h2 = min(p.h_min for p in self.patches)
            cands.append(self.cfl * h2 / c2)
        if not cands:
            raise SimulationError("empty network")
        return min(cands)

    # -- fields -------------------------------------------------------------
    def initial_state(self):
        return {s.name: s.initial_field() for s in self.subdomains}

    def _junction11_fluxes(self, jn, traces, penalize):
        model = self.model1d
        states = []
        for nm, end in jn.members:
            ch = self._by_name[nm]
            states.append(ch.end_state(traces[nm][1], end))
        signs = jn.signs
        out = []
        for i, (nm_i, _) in enumerate(jn.members):
            acc = np.zeros(model.ncons)
            for j in range(len(jn.members)):
                c = jn.coeffs[i, j]
                if c == 0.0:
                    continue
                if j == i or signs[i] == signs[j]:
                    partner = model.mirror_state(states[j])
                else:
                    partner = states[j]
                f = model.ec_flux(states[i], partner, 0)
                if penalize:
                    lam = max(model.wavespeed(states[i]), model.wavespeed(partner))
                    f = f - signs[i] * 0.5 * lam * (partner - states[i])
                acc += c * f
            out.append(acc)
        return out

    def rhs(self, state, t=0.0):
        """Mass-solved time derivative for every subdomain."""
        try:
            traces = {
                s.name: s.project(state[s.name]) for s in self.subdomains
            }
        except AdmissibilityError as exc:
            raise SimulationError(str(exc), t=t) from exc
        volumes = {
            s.name: s.volume(traces[s.name][1]) for s in self.subdomains
        }

        exts = {p.name: p.exterior(traces[p.name][1]) for p in self.patches}
        for itf in self._itf:
            ch = self._by_name[itf["channel"]]
            u_j = ch.end_state(traces[itf["channel"]][1], itf["end"])
            lifted = lift_1d_to_2d(u_j, itf["R"])
            exts[itf["patch"]][:, itf["karr"], itf["parr"]] = lifted[:, None]

        fstars = {
            p.name: p.fluxes(traces[p.name][1], exts[p.name], self.penalize)
            for p in self.patches
        }

        end_fluxes = {c.name: {"left": None, "right": None} for c in self.channels}
        for itf in self._itf:
            F = fstars[itf["patch"]][:, itf["karr"], itf["parr"]]
            avg = (F * itf["w"]) @ np.ones(len(itf["w"]))
            f_j = -itf["sign"] * (itf["R"].T @ avg) / itf["wsum"]
            end_fluxes[itf["channel"]][itf["end"]] = f_j
        for jn in self.network.junctions:
            fj = self._junction11_fluxes(jn, traces, self.penalize)
            for (nm, end), f in zip(jn.members, fj):
                end_fluxes[nm][end] = f

        dudt = {}
        for c in self.channels:
            dudt[c.name] = c.assemble(
                traces[c.name][1], volumes[c.name], end_fluxes[c.name],
                self.penalize,
            )
        for p in self.patches:
            dudt[p.name] = p.assemble(
                traces[p.name][1], volumes[p.name], fstars[p.name]
            )
        return dudt

    # -- time integration ------------------------------------------------
    def lsrk45_step(self, state, t, dt, registers=None):
        if registers is None:
            registers = {k: np.zeros_like(v) for k, v in state.items()}
        for a, b, c in zip(LSRK45_A, LSRK45_B, LSRK45_C):
            k = self.rhs(state, t + c * dt)
            for name in state:
                registers[name] *= a
                registers[name] += dt * k[name]
                state[name] += b * registers[name]
        return state

    def run(self, T, output_stride=10, recorder=None, state=None):
        """Integrate to T, recording at step 0, every stride steps, and T."""
        if T < 0:
            raise ValueError("T must be nonnegative")
        if state is None:
            state = self.initial_state()
        registers = {k: np.zeros_like(v) for k, v in state.items()}
        times, records = [], []

        def record(t):
            times.append(t)
            if recorder is not None:
                records.append(recorder(self, t, state))

        record(0.0)
        t, step = 0.0, 0
        while t < T - 1e-14 * max(T, 1.0):
            dt = min(self.dt_nominal, T - t)
            try:
                self.lsrk45_step(state, t, dt, registers)
            except SimulationError as exc:
                exc.t = t
                raise
            t += dt
            step += 1
            if step % output_stride == 0 or t >= T - 1e-14 * max(T, 1.0):
                record(t)
        return RunResult(np.array(times), records, state, step)


def lsrk45_scalar(rhs, y0, T, dt):
    """Reference scalar/array ODE integrator with the same coefficients."""
    y = np.array(y0, dtype=float)
    res = np.zeros_like(y)
    t = 0.0
    while t < T - 1e-12:
        step = min(dt, T - t)
        for a, b, c in zip(LSRK45_A, LSRK45_B, LSRK45_C):
            res = a * res + step * np.asarray(rhs(t + c * step, y))
            y = y + b * res
        t += step
    return y
