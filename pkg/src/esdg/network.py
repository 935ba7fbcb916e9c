"""Network topology: channels, 2D patches, and the junctions coupling them.

Junction coefficient tables c_ij must satisfy the flux-sharing
constraints sum_j c_ij = 1 and A_i c_ij = A_j c_ji; the named schemes
(straight_flow, partial_wall, equal_share) expand to tables satisfying
them by construction, and ``Network.validate`` re-checks everything.

Channel ends are识 by 'left'/'right'; the outward junction sign is -1 at
a left end and +1 at a right end.  When two coupled channels present the
same sign at a junction their through-flow orientations conflict, and
the pairwise flux uses the partner's mirror state to realign them (this
is what keeps, e.g., a three-way junction entropy conservative).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from esdg.mesh import Mesh1D, Mesh2D

COEFF_TOL = 1e-13
WIDTH_TOL = 1e-10
NORMAL_TOL = 1e-12


class TopologyError(ValueError):
    pass


def end_sign(end: str) -> int:
    if end == "right":
        return 1
    if end == "left":
        return -1
    raise ValueError(f"channel end must be 'left' or 'right', got {end!r}")


# ---------------------------------------------------------------- schemes
def straight_flow_coeffs(widths, trunk: int) -> np.ndarray:
    """One trunk channel fed by the others; requires sum(branches) = trunk.

    c[trunk, i] = A_i / A_trunk for branches, c[i, trunk] = 1.
    """
    widths = np.asarray(widths, dtype=float)
    m = len(widths)
    others = [i for i in range(m) if i != trunk]
    if abs(widths[others].sum() - widths[trunk]) > WIDTH_TOL:
        raise TopologyError(
            "straight_flow requires branch widths to sum to the trunk width"
        )
    c = np.zeros((m, m))
    for i in others:
        c[i, trunk] = 1.0
        c[trunk, i] = widths[i] / widths[trunk]
    return c


def partial_wall_coeffs(widths, trunk: int, shared) -> np.ndarray:
    """Trunk coupled to branches over shared widths, walls on the rest.

    ``shared[i]`` is the width branch i shares with the trunk; the
    leftover of each channel is closed by a mirror-state wall through the
    diagonal coefficient c_ii.
    """
    widths = np.asarray(widths, dtype=float)
    m = len(widths)
    shared = dict(shared)
    others = [i for i in range(m) if i != trunk]
    if sorted(shared) != sorted(others):
        raise TopologyError("shared widths must be given for every branch")
    tot = sum(shared.values())
    if tot > widths[trunk] + WIDTH_TOL:
        raise TopologyError("shared widths exceed the trunk width")
    c = np.zeros((m, m))
    c[trunk, trunk] = (widths[trunk] - tot) / widths[trunk]
    for i in others:
        if shared[i] > widths[i] + WIDTH_TOL:
            raise TopologyError(f"shared width of channel {i} exceeds its width")
        c[i, trunk] = shared[i] / widths[i]
        c[i, i] = (widths[i] - shared[i]) / widths[i]
        c[trunk, i] = shared[i] / widths[trunk]
    return c


def equal_share_coeffs(m: int) -> np.ndarray:
    """c_ii = 0, c_ij = 1/(m-1); valid for equal channel widths."""
    if m < 2:
        raise TopologyError("equal_share needs at least two channels")
    c = np.full((m, m), 1.0 / (m - 1))
    np.fill_diagonal(c, 0.0)
    return c


def validate_coefficients(c: np.ndarray, widths) -> None:
    c = np.asarray(c, dtype=float)
    widths = np.asarray(widths, dtype=float)
    m = c.shape[0]
    if c.shape != (m, m) or len(widths) != m:
        raise TopologyError("coefficient table shape mismatch")
    if np.any(c < -COEFF_TOL):
        raise TopologyError("junction coefficients must be nonnegative")
    rows = c.sum(axis=1)
    bad = np.nonzero(np.abs(rows - 1.0) > COEFF_TOL)[0]
    if bad.size:
        i = int(bad[0])
        raise TopologyError(f"row {i} of junction coefficients sums to {rows[i]!r}")
    for i in range(m):
        for j in range(m):
            lhs, rhs = widths[i] * c[i, j], widths[j] * c[j, i]
            if abs(lhs - rhs) > COEFF_TOL * max(1.0, abs(lhs)):
                raise TopologyError(
                    f"width symmetry A_i c_ij = A_j c_ji fails for pair ({i}, {j})"
                )


# ---------------------------------------------------------------- topology
@dataclass
class Channel:
    """1D subdomain: mesh, width, and the initial condition in local xi."""

    name: str
    mesh: Mesh1D
    width: float
    ic: object = None  # callable xi -> (ncons,) or (ncons, npts)
    bc_left: str = "wall"
    bc_right: str = "wall"

    def __post_init__(self):
        if self.width <= 0:
            raise TopologyError(f"channel {self.name}: width must be positive")


@dataclass
class Patch:
    """2D subdomain; boundary faces are tagged wall/junction/periodic."""

    name: str
    mesh: Mesh2D
    ic: object = None  # callable (x, y) -> (ncons,) or (ncons, npts)
    periodic: list = field(default_factory=list)  # (tag_a, tag_b, (dx, dy))


@dataclass
class Junction1D1D:
    """Coupling of several channel ends through a coefficient table."""

    members: list  # (channel_name, 'left'|'right')
    coeffs: np.ndarray

    @property
    def signs(self):
        return [end_sign(end) for _, end in self.members]


@dataclass
class Interface1D2D:
    """A channel end glued to a set of collinear patch boundary faces.

    ``axis`` is the channel's unit direction of increasing xi at this
    end, in patch coordinates.  The patch faces' outward normal must be
    -sign * axis (they look back into the channel).
    """

    channel: str
    end: str
    patch: str
    faces: list  # (element, local face)
    axis: tuple

    @property
    def sign(self):
        return end_sign(self.end)


@dataclass
class Network:
    """A full multi-subdomain problem: geometry, couplings, and ICs."""

    system: str  # 'swe' | 'euler'
    channels: list = field(default_factory=list)
    patches: list = field(default_factory=list)
    junctions: list = field(default_factory=list)
    interfaces: list = field(default_factory=list)
    g: float = 1.0
    gamma: float = 1.4

    def channel(self, name: str) -> Channel:
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise KeyError(f"no channel named {name!r}")

    def patch(self, name: str) -> Patch:
        for p in self.patches:
            if p.name == name:
                return p
        raise KeyError(f"no patch named {name!r}")

    def subdomain_names(self):
        return [c.name for c in self.channels] + [p.name for p in self.patches]

    def validate(self):
        names = self.subdomain_names()
        if len(set(names)) != len(names):
            raise TopologyError("duplicate subdomain names")
        ends_used = set()
        for jn in self.junctions:
            widths = [self.channel(nm).width for nm, _ in jn.members]
            validate_coefficients(jn.coeffs, widths)
            for nm, end in jn.members:
                if (nm, end) in ends_used:
                    raise TopologyError(f"channel end {nm}:{end} used twice")
                ends_used.add((nm, end))
        for itf in self.interfaces:
            if (itf.channel, itf.end) in ends_used:
                raise TopologyError(
                    f"channel end {itf.channel}:{itf.end} used twice"
                )
            ends_used.add((itf.channel, itf.end))
            self._validate_interface(itf)
        return self

    def _validate_interface(self, itf: Interface1D2D):
        ch = self.channel(itf.channel)
        mesh = self.patch(itf.patch).mesh
        axis = np.asarray(itf.axis, dtype=float)
        if abs(axis @ axis - 1.0) > NORMAL_TOL:
            raise TopologyError(f"interface {itf.channel}:{itf.end}: axis not unit")
        if not itf.faces:
            raise TopologyError(f"interface {itf.channel}:{itf.end}: empty face set")
        want_n = -itf.sign * axis
        total = 0.0
        mids = []
        for k, f in itf.faces:
            n = np.array([mesh.nxf[k, f], mesh.nyf[k, f]])
            if np.max(np.abs(n - want_n)) > NORMAL_TOL:
                raise TopologyError(
                    f"interface {itf.channel}:{itf.end}: face normal {n} "
                    f"differs from {want_n}"
                )
            total += mesh.face_length(k, f)
            mids.append(mesh.face_midpoint(k, f))
        if abs(total - ch.width) > WIDTH_TOL * max(1.0, ch.width):
            raise TopologyError(
                f"interface {itf.channel}:{itf.end}: face widths sum to "
                f"{total}, channel width is {ch.width}"
            )
        # Collinearity: all midpoints on one line perpendicular to the axis.
        proj = [m[0] * axis[0] + m[1] * axis[1] for m in mids]
        if max(proj) - min(proj) > WIDTH_TOL * max(1.0, mesh.diameter):
            raise TopologyError(
                f"interface {itf.channel}:{itf.end}: faces are not collinear"
            )


def collect_interface_faces(mesh: Mesh2D, tag: str):
    """Faces previously tagged for an interface, in tag order."""
    if tag not in mesh.btags:
        raise TopologyError(f"no boundary faces tagged {tag!r}")
    return list(mesh.btags[tag])
