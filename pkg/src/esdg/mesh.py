"""1D channel meshes and affine 2D triangulations with face connectivity.

Triangles are stored counterclockwise; the affine map from the bi-unit
reference triangle gives constant Jacobians J (physical area / 2) and
constant geometric factors g[i][j] = J * d(xhat_j)/d(x_i) per element.
Face bookkeeping uses local faces (v0,v1), (v1,v2), (v2,v0); two
conforming ccw triangles always traverse a shared face in opposite
directions, so neighbor face points are reversed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from esdg.refelem import TRI_FACE_LENGTHS, TRI_FACES

NODE_TOL = 1e-10


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Mesh1D:
    """Contiguous ordered 1D elements on [x[0], x[-1]]."""

    x: np.ndarray  # element boundaries, shape (K+1,), increasing

    @property
    def K(self) -> int:
        return len(self.x) - 1

    @property
    def J(self) -> np.ndarray:
        return 0.5 * np.diff(self.x)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.x[:-1] + self.x[1:])

    @property
    def h_min(self) -> float:
        return float(np.min(np.diff(self.x)))

    def points(self, xhat: np.ndarray) -> np.ndarray:
        """Map reference points to physical, shape (K, len(xhat))."""
        return self.centers[:, None] + self.J[:, None] * np.asarray(xhat)[None, :]


def build_uniform_1d(a: float, b: float, K: int) -> Mesh1D:
    if K < 1:
        raise ValueError("K must be >= 1")
    if not a < b:
        raise ValueError("need a < b")
    return Mesh1D(np.linspace(a, b, K + 1))


@dataclass
class Mesh2D:
    """Affine triangulation with connectivity and boundary tags.

    etoe/etof give the neighbor element and its local face through each
    face, -1 on the boundary.  btags maps a tag to the ordered list of
    (element, local face) pairs carrying it.
    """

    vx: np.ndarray
    vy: np.ndarray
    tris: np.ndarray
    J: np.ndarray = field(init=False)
    gmat: np.ndarray = field(init=False)
    nxf: np.ndarray = field(init=False)
    nyf: np.ndarray = field(init=False)
    sJ: np.ndarray = field(init=False)
    etoe: np.ndarray = field(init=False)
    etof: np.ndarray = field(init=False)
    btags: dict = field(default_factory=dict)

    def __post_init__(self):
        self.tris = np.asarray(self.tris, dtype=np.int64)
        self._orient_ccw()
        self._geometric_factors()
        self._connect()

    @property
    def K(self) -> int:
        return self.tris.shape[0]

    @property
    def diameter(self) -> float:
        return float(
            np.hypot(self.vx.max() - self.vx.min(), self.vy.max() - self.vy.min())
        )

    @property
    def h_min(self) -> float:
        """Shortest edge length over all elements."""
        lens = self.sJ * np.array(TRI_FACE_LENGTHS)[None, :]
        return float(lens.min())

    @property
    def total_area(self) -> float:
        return float(2.0 * self.J.sum())

    def _orient_ccw(self):
        x, y = self.vx[self.tris], self.vy[self.tris]
        twice_area = (x[:, 1] - x[:, 0]) * (y[:, 2] - y[:, 0]) - (
            x[:, 2] - x[:, 0]
        ) * (y[:, 1] - y[:, 0])
        flipped = twice_area < 0
        if np.any(flipped):
            warnings.warn(
                f"reoriented {int(flipped.sum())} clockwise triangle(s)",
                stacklevel=3,
            )
            self.tris[flipped, 1], self.tris[flipped, 2] = (
                self.tris[flipped, 2].copy(),
                self.tris[flipped, 1].copy(),
            )
        if np.any(np.abs(twice_area) < 1e-14):
            raise MeshError("degenerate (zero-area) triangle")

    def _geometric_factors(self):
        x, y = self.vx[self.tris], self.vy[self.tris]
        xr = 0.5 * (x[:, 1] - x[:, 0])
        xs = 0.5 * (x[:, 2] - x[:, 0])
        yr = 0.5 * (y[:, 1] - y[:, 0])
        ys = 0.5 * (y[:, 2] - y[:, 0])
        self.J = xr * ys - xs * yr
        if np.any(self.J <= 0):
            raise MeshError("non-positive Jacobian after orientation fix")
        # g[i][j] = J * d(xhat_j)/d(x_i): cofactors of the forward map.
        g = np.empty((self.K, 2, 2))
        g[:, 0, 0] = ys
        g[:, 0, 1] = -yr
        g[:, 1, 0] = -xs
        g[:, 1, 1] = xr
        self.gmat = g

        self.nxf = np.empty((self.K, 3))
        self.nyf = np.empty((self.K, 3))
        self.sJ = np.empty((self.K, 3))
        for f, (a, b) in enumerate(TRI_FACES):
            dx = x[:, b] - x[:, a]
            dy = y[:, b] - y[:, a]
            length = np.hypot(dx, dy)
            self.nxf[:, f] = dy / length
            self.nyf[:, f] = -dx / length
            self.sJ[:, f] = length / TRI_FACE_LENGTHS[f]

    def _connect(self):
        tol = NODE_TOL * max(self.diameter, 1.0)
        lookup: dict = {}
        for k in range(self.K):
            for f, (a, b) in enumerate(TRI_FACES):
                key = (min(self.tris[k, a], self.tris[k, b]),
                       max(self.tris[k, a], self.tris[k, b]))
                lookup.setdefault(key, []).append((k, f))
        self.etoe = -np.ones((self.K, 3), dtype=np.int64)
        self.etof = -np.ones((self.K, 3), dtype=np.int64)
        for key, members in lookup.items():
            if len(members) > 2:
                raise MeshError(f"face {key} shared by {len(members)} triangles")
            if len(members) == 2:
                (k1, f1), (k2, f2) = members
                self.etoe[k1, f1], self.etof[k1, f1] = k2, f2
                self.etoe[k2, f2], self.etof[k2, f2] = k1, f1
                # Matched faces must coincide geometrically.
                va, vb = TRI_FACES[f1]
                wa, wb = TRI_FACES[f2]
                p1 = np.array([[self.vx[self.tris[k1, va]], self.vy[self.tris[k1, va]]],
                               [self.vx[self.tris[k1, vb]], self.vy[self.tris[k1, vb]]]])
                p2 = np.array([[self.vx[self.tris[k2, wb]], self.vy[self.tris[k2, wb]]],
                               [self.vx[self.tris[k2, wa]], self.vy[self.tris[k2, wa]]]])
                if np.max(np.abs(p1 - p2)) > tol:
                    raise MeshError(f"matched face endpoints differ at {key}")

    # -- tagging --------------------------------------------------------
    def boundary_faces(self):
        """All untagged and tagged boundary (element, face) pairs, ordered."""
        out = []
        for k in range(self.K):
            for f in range(3):
                if self.etoe[k, f] < 0:
                    out.append((k, f))
        return out

    def face_midpoint(self, k: int, f: int):
        a, b = TRI_FACES[f]
        return (
            0.5 * (self.vx[self.tris[k, a]] + self.vx[self.tris[k, b]]),
            0.5 * (self.vy[self.tris[k, a]] + self.vy[self.tris[k, b]]),
        )

    def face_length(self, k: int, f: int) -> float:
        return float(self.sJ[k, f] * TRI_FACE_LENGTHS[f])

    def tag_boundary(self, tag: str, predicate) -> int:
        """Tag untagged boundary faces whose midpoint satisfies predicate."""
        tagged = {kf for faces in self.btags.values() for kf in faces}
        hits = []
        for k, f in self.boundary_faces():
            if (k, f) in tagged:
                continue
            if predicate(*self.face_midpoint(k, f)):
                hits.append((k, f))
        if hits:
            self.btags.setdefault(tag, []).extend(hits)
        return len(hits)

    def untagged_boundary(self):
        tagged = {kf for faces in self.btags.values() for kf in faces}
        return [kf for kf in self.boundary_faces() if kf not in tagged]

    def sever_internal_faces(self, predicate, tag: str = "wall") -> int:
        """Turn matched interior faces into paired boundary faces.

        Faces whose midpoint satisfies the predicate lose their neighbor
        link on both sides and get the tag (used for thin internal walls).
        """
        hits = []
        for k in range(self.K):
            for f in range(3):
                k2 = self.etoe[k, f]
                if k2 < 0 or k2 < k:
                    continue
                if predicate(*self.face_midpoint(k, f)):
                    hits.append((k, f, k2, self.etof[k, f]))
        for k, f, k2, f2 in hits:
            self.etoe[k, f] = self.etof[k, f] = -1
            self.etoe[k2, f2] = self.etof[k2, f2] = -1
            self.btags.setdefault(tag, []).extend([(k, f), (k2, f2)])
        return len(hits)


def build_structured_channel_2d(
    x0: float, x1: float, y0: float, y1: float, nx: int, ny: int
) -> Mesh2D:
    """Diagonal-split structured triangulation of a rectangle."""
    if not (x1 > x0 and y1 > y0):
        raise ValueError("degenerate extents")
    if nx < 1 or ny < 1:
        raise ValueError("need nx, ny >= 1")
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    vid = np.arange((nx + 1) * (ny + 1)).reshape(nx + 1, ny + 1)
    tris = []
    for i in range(nx):
        for j in range(ny):
            v00, v10 = vid[i, j], vid[i + 1, j]
            v01, v11 = vid[i, j + 1], vid[i + 1, j + 1]
            tris.append((v00, v10, v11))
            tris.append((v00, v11, v01))
    return Mesh2D(vx=X.ravel(), vy=Y.ravel(), tris=np.array(tris))


def mesh_from_triangle(p0, p1, p2) -> Mesh2D:
    """Single-triangle mesh (used for small junction patches)."""
    pts = np.array([p0, p1, p2], dtype=float)
    return Mesh2D(vx=pts[:, 0], vy=pts[:, 1], tris=np.array([[0, 1, 2]]))


def load_mesh_text(path) -> Mesh2D:
    """Parse the plain-text mesh format.

    Header ``nv nt nb``, then nv ``x y`` lines, nt ``v0 v1 v2`` lines
    (0-based), and nb ``v0 v1 tag`` boundary-edge lines.  ``#`` starts a
    comment.  Duplicate vertices are merged with a warning; clockwise
    triangles are reoriented with a warning; a once-used face missing
    from the boundary list is a hard error.
    """
    tokens = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                for tok in line.split():
                    tokens.append((lineno, tok))

    pos = 0

    def take(n, conv, what):
        nonlocal pos
        if pos + n > len(tokens):
            lineno = tokens[-1][0] if tokens else 0
            raise MeshError(f"{path}:{lineno}: truncated file while reading {what}")
        out = []
        for lineno, tok in tokens[pos:pos + n]:
            try:
                out.append(conv(tok))
            except ValueError as exc:
                raise MeshError(f"{path}:{lineno}: bad token {tok!r} in {what}") from exc
        pos += n
        return out

    nv, nt, nb = take(3, int, "header")
    coords = np.array(take(2 * nv, float, "vertices")).reshape(nv, 2)
    tris = np.array(take(3 * nt, int, "triangles")).reshape(nt, 3)
    bedges = []
    for _ in range(nb):
        lineno = tokens[pos][0]
        v0, v1 = take(2, int, "boundary edge")
        _, tag = tokens[pos]
        pos += 1
        bedges.append((lineno, v0, v1, tag))
    if pos != len(tokens):
        raise MeshError(f"{path}:{tokens[pos][0]}: trailing data")

    if np.any(tris < 0) or np.any(tris >= nv):
        raise MeshError(f"{path}: triangle vertex index out of range")

    # Merge duplicate vertices within tolerance.
    scale = max(np.ptp(coords[:, 0]), np.ptp(coords[:, 1]), 1.0)
    remap = np.arange(nv)
    kept = []
    for i in range(nv):
        merged = False
        for j in kept:
            if np.max(np.abs(coords[i] - coords[j])) < NODE_TOL * scale:
                remap[i] = remap[j]
                merged = True
                warnings.warn(f"{path}: merged duplicate vertex {i} into {j}")
                break
        if not merged:
            remap[i] = len(kept)
            kept.append(i)
    coords = coords[kept]
    tris = remap[tris]
    if np.any(tris[:, 0] == tris[:, 1]) or np.any(tris[:, 1] == tris[:, 2]) or np.any(
        tris[:, 0] == tris[:, 2]
    ):
        raise MeshError(f"{path}: triangle collapsed after vertex merge")

    mesh = Mesh2D(vx=coords[:, 0], vy=coords[:, 1], tris=tris)

    edge_to_face = {}
    for k in range(mesh.K):
        for f, (a, b) in enumerate(TRI_FACES):
            key = (min(mesh.tris[k, a], mesh.tris[k, b]),
                   max(mesh.tris[k, a], mesh.tris[k, b]))
            if mesh.etoe[k, f] < 0:
                edge_to_face[key] = (k, f)
    for lineno, v0, v1, tag in bedges:
        key = (min(remap[v0], remap[v1]), max(remap[v0], remap[v1]))
        if key not in edge_to_face:
            raise MeshError(
                f"{path}:{lineno}: boundary edge {v0}-{v1} is not a boundary face"
            )
        mesh.btags.setdefault(tag, []).append(edge_to_face[key])

    missing = mesh.untagged_boundary()
    if missing:
        k, f = missing[0]
        raise MeshError(
            f"{path}: unmatched interior face on element {k} (local face {f}); "
            "every boundary edge must be listed with a tag"
        )
    return mesh
