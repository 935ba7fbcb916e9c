"""Mesh builders, the text-mesh loader, and junction coefficient schemes."""

import numpy as np
import pytest

from esdg.mesh import (
    MeshError,
    build_structured_channel_2d,
    build_uniform_1d,
    load_mesh_text,
    mesh_from_triangle,
)
from esdg.network import (
    Channel,
    Interface1D2D,
    Junction1D1D,
    Network,
    Patch,
    TopologyError,
    equal_share_coeffs,
    partial_wall_coeffs,
    straight_flow_coeffs,
    validate_coefficients,
)
from esdg.refelem import TRI_FACES


# ---------------------------------------------------------------- 1D
def test_uniform_1d():
    m = build_uniform_1d(-4.0, 4.0, 32)
    assert m.K == 32
    assert np.allclose(np.diff(m.x), 0.25)
    assert np.allclose(m.J, 0.125)
    single = build_uniform_1d(0.0, 2.0, 1)
    assert np.allclose(single.J, [1.0])
    m2 = build_uniform_1d(1.0, 3.0, 5)
    assert np.allclose(m2.x, 1.0 + np.arange(6) * (2.0 / 5))
    with pytest.raises(ValueError):
        build_uniform_1d(0.0, 1.0, 0)
    with pytest.raises(ValueError):
        build_uniform_1d(2.0, 1.0, 4)


# ---------------------------------------------------------------- 2D builders
def test_unit_square_two_triangles():
    m = build_structured_channel_2d(0, 1, 0, 1, 1, 1)
    assert m.K == 2
    assert m.total_area == pytest.approx(1.0, abs=1e-14)


def test_structured_counts_and_area():
    m = build_structured_channel_2d(-4, 4, -1, 1, 32, 8)
    assert m.K == 512
    assert m.total_area == pytest.approx(16.0, abs=1e-12)


def test_affine_map_reproduces_vertices():
    m = build_structured_channel_2d(0, 2, 0, 1, 3, 2)
    ref = np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
    for k in range(m.K):
        x = m.vx[m.tris[k]]
        y = m.vy[m.tris[k]]
        for v in range(3):
            r, s = ref[v]
            xm = (
                -0.5 * (r + s) * x[0] + 0.5 * (1 + r) * x[1] + 0.5 * (1 + s) * x[2]
            )
            ym = (
                -0.5 * (r + s) * y[0] + 0.5 * (1 + r) * y[1] + 0.5 * (1 + s) * y[2]
            )
            assert abs(xm - x[v]) < 1e-12
            assert abs(ym - y[v]) < 1e-12


def test_connectivity_involution_and_normals():
    m = build_structured_channel_2d(0, 3, 0, 2, 4, 3)
    for k in range(m.K):
        for f in range(3):
            k2, f2 = m.etoe[k, f], m.etof[k, f]
            if k2 < 0:
                continue
            assert m.etoe[k2, f2] == k
            assert m.etof[k2, f2] == f
            # Antiparallel unit normals.
            assert abs(np.hypot(m.nxf[k, f], m.nyf[k, f]) - 1.0) < 1e-13
            assert abs(m.nxf[k, f] + m.nxf[k2, f2]) < 1e-13
            assert abs(m.nyf[k, f] + m.nyf[k2, f2]) < 1e-13


def test_boundary_perimeter():
    m = build_structured_channel_2d(0, 3, 0, 2, 6, 4)
    per = sum(m.face_length(k, f) for k, f in m.boundary_faces())
    assert per == pytest.approx(10.0, abs=1e-10)


def test_sever_internal_faces():
    m = build_structured_channel_2d(0, 2, -1, 1, 4, 4)
    n = m.sever_internal_faces(lambda x, y: abs(y) < 1e-12, tag="wall")
    assert n == 4
    assert len(m.btags["wall"]) == 8
    per = sum(m.face_length(k, f) for k, f in m.boundary_faces())
    assert per == pytest.approx(8.0 + 2 * 2.0, abs=1e-10)


# ---------------------------------------------------------------- text loader
def write(tmp_path, text):
    p = tmp_path / "mesh.txt"
    p.write_text(text)
    return p


def test_load_single_triangle(tmp_path):
    p = write(
        tmp_path,
        """# one triangle
        3 1 3
        0.0 0.0
        1.0 0.0
        0.0 1.0
        0 1 2
        0 1 wall
        1 2 wall
        2 0 inflow
        """,
    )
    m = load_mesh_text(p)
    assert m.K == 1
    assert m.J[0] == pytest.approx(0.25)  # area/2
    assert set(m.btags) == {"wall", "inflow"}


def test_load_clockwise_fixed(tmp_path):
    p = write(
        tmp_path,
        """3 1 3
        0 0
        1 0
        0 1
        0 2 1
        0 1 wall
        1 2 wall
        2 0 wall
        """,
    )
    with pytest.warns(UserWarning, match="reoriented"):
        m = load_mesh_text(p)
    assert m.J[0] > 0


def test_load_duplicate_vertex_merged(tmp_path):
    p = write(
        tmp_path,
        """5 2 4
        0 0
        1 0
        0 1
        1 0
        1 1
        0 1 2
        3 4 2
        0 1 wall
        1 4 wall
        4 2 wall
        2 0 wall
        """,
    )
    with pytest.warns(UserWarning, match="merged duplicate vertex"):
        m = load_mesh_text(p)
    assert m.K == 2
    assert len(m.vx) == 4
    # The shared face is interior now.
    assert sum(1 for _ in m.boundary_faces()) == 4


def test_load_parse_error_has_line_number(tmp_path):
    p = write(tmp_path, "3 1 0\n0 0\n1 zap\n0 1\n0 1 2\n")
    with pytest.raises(MeshError, match=":3"):
        load_mesh_text(p)


def test_load_unmatched_interior_face(tmp_path):
    p = write(
        tmp_path,
        """3 1 2
        0 0
        1 0
        0 1
        0 1 2
        0 1 wall
        1 2 wall
        """,
    )
    with pytest.raises(MeshError, match="unmatched interior face"):
        load_mesh_text(p)


def test_load_bogus_boundary_edge(tmp_path):
    p = write(
        tmp_path,
        """3 1 3
        0 0
        1 0
        0 1
        0 1 2
        0 1 wall
        1 2 wall
        1 0 wall
        """,
    )
    # Edge 1-0 duplicates 0-1; edge 2-0 is then missing.
    with pytest.raises(MeshError):
        load_mesh_text(p)


# ---------------------------------------------------------------- schemes
def test_straight_flow_example():
    c = straight_flow_coeffs([1.0, 1.0, 2.0], trunk=2)
    assert c[0, 2] == 1.0 and c[1, 2] == 1.0
    assert c[2, 0] == pytest.approx(0.5)
    assert c[2, 1] == pytest.approx(0.5)
    validate_coefficients(c, [1.0, 1.0, 2.0])
    with pytest.raises(TopologyError):
        straight_flow_coeffs([1.0, 1.5, 2.0], trunk=2)


def test_partial_wall_example():
    rt2 = np.sqrt(2.0)
    c = partial_wall_coeffs([1.0, 1.0, rt2], trunk=2, shared={0: rt2 / 2, 1: rt2 / 2})
    assert c[0, 0] == pytest.approx(1.0 - rt2 / 2)
    assert c[0, 2] == pytest.approx(rt2 / 2)
    assert c[2, 0] == pytest.approx(0.5)
    assert c[2, 2] == pytest.approx(0.0, abs=1e-15)
    validate_coefficients(c, [1.0, 1.0, rt2])


def test_equal_share_example():
    c = equal_share_coeffs(3)
    assert np.allclose(np.diag(c), 0.0)
    assert np.allclose(c[0, 1], 0.5)
    validate_coefficients(c, [1.0, 1.0, 1.0])


def test_random_admissible_tables():
    rng = np.random.default_rng(2)
    for _ in range(50):
        m = rng.integers(2, 6)
        w = rng.uniform(0.1, 2.0, size=(m, m))
        w = 0.5 * (w + w.T)
        widths = w.sum(axis=1)
        c = w / widths[:, None]
        validate_coefficients(c, widths)


def test_validation_rejects_bad_tables():
    with pytest.raises(TopologyError, match="sums"):
        validate_coefficients(np.array([[0.5, 0.4], [1.0, 0.0]]), [1.0, 1.0])
    with pytest.raises(TopologyError, match=r"pair \(0, 1\)"):
        validate_coefficients(np.array([[0.0, 1.0], [0.5, 0.5]]), [1.0, 1.0])
    with pytest.raises(TopologyError, match="nonnegative"):
        validate_coefficients(np.array([[1.5, -0.5], [-0.5, 1.5]]), [1.0, 1.0])


# ---------------------------------------------------------------- network
def square_patch_network(width=1.0):
    mesh = build_structured_channel_2d(0.0, 1.0, 0.0, width, 2, 2)
    mesh.tag_boundary("junc", lambda x, y: abs(x) < 1e-12)
    mesh.tag_boundary("wall", lambda x, y: True)
    ch = Channel("ch", build_uniform_1d(-1.0, 0.0, 4), width=width,
                 bc_left="wall", bc_right="junction")
    patch = Patch("p", mesh)
    itf = Interface1D2D("ch", "right", "p", mesh.btags["junc"], axis=(1.0, 0.0))
    return Network(system="swe", channels=[ch], patches=[patch],
                   interfaces=[itf])


def test_interface_width_bookkeeping():
    net = square_patch_network()
    net.validate()
    total = sum(
        net.patch("p").mesh.face_length(k, f) for k, f in net.interfaces[0].faces
    )
    assert total == pytest.approx(1.0, abs=1e-12)


def test_interface_width_mismatch_rejected():
    net = square_patch_network()
    net.channels[0].width = 2.0
    with pytest.raises(TopologyError, match="width"):
        net.validate()


def test_interface_normal_mismatch_rejected():
    net = square_patch_network()
    net.interfaces[0] = Interface1D2D(
        "ch", "right", "p", net.interfaces[0].faces, axis=(0.0, 1.0)
    )
    with pytest.raises(TopologyError, match="normal"):
        net.validate()


def test_interface_noncollinear_rejected():
    mesh = build_structured_channel_2d(0.0, 1.0, 0.0, 1.0, 2, 2)
    mesh.tag_boundary("west", lambda x, y: abs(x) < 1e-12 and y < 0.5)
    mesh.tag_boundary("east", lambda x, y: abs(x - 1.0) < 1e-12 and y < 0.5)
    mesh.tag_boundary("wall", lambda x, y: True)
    faces = mesh.btags["west"] + mesh.btags["east"]
    ch = Channel("ch", build_uniform_1d(-1.0, 0.0, 2), width=1.0)
    itf = Interface1D2D("ch", "right", "p", faces, axis=(1.0, 0.0))
    net = Network(system="swe", channels=[ch], patches=[Patch("p", mesh)],
                  interfaces=[itf])
    with pytest.raises(TopologyError):
        net.validate()


def test_junction_end_reuse_rejected():
    ch1 = Channel("a", build_uniform_1d(0, 1, 2), width=1.0)
    ch2 = Channel("b", build_uniform_1d(0, 1, 2), width=1.0)
    c = equal_share_coeffs(2)
    jn1 = Junction1D1D([("a", "right"), ("b", "left")], c)
    jn2 = Junction1D1D([("a", "right"), ("b", "right")], c)
    net = Network(system="swe", channels=[ch1, ch2], junctions=[jn1, jn2])
    with pytest.raises(TopologyError, match="used twice"):
        net.validate()


def test_single_triangle_patch():
    m = mesh_from_triangle((0.0, -0.5), (0.5, 0.0), (0.0, 0.5))
    assert m.K == 1
    assert m.total_area == pytest.approx(0.25, abs=1e-14)
    # Face normals: SE, NE, W per the vertex ordering.
    assert np.allclose([m.nxf[0, 2], m.nyf[0, 2]], [-1.0, 0.0], atol=1e-14)
