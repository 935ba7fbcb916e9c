"""Experiment presets: geometries, junction tables, and initial data.

Each preset builds a validated Network plus its probe set.  Structured
triangulations stand in for the original unstructured meshes at matching
resolution (element sizes noted per preset); channel initial data is
written in each channel mesh's own coordinate.

Conventions shared by the parallel-split family: the channel network
lives on x in [-4, 4], width 2, with the split half carrying two width-1
channels; periodicity in x is realized through the junctions (1D models)
or a periodic face pairing (fully 2D).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from esdg.diagnostics import Probe1D, Probe2D
from esdg.mesh import (
    build_structured_channel_2d,
    build_uniform_1d,
    mesh_from_triangle,
)
from esdg.network import (
    Channel,
    Interface1D2D,
    Junction1D1D,
    Network,
    Patch,
    equal_share_coeffs,
    partial_wall_coeffs,
    straight_flow_coeffs,
)

RT2 = np.sqrt(2.0)


def _fn(val):
    if callable(val):
        return val
    return lambda *args: np.full_like(np.asarray(args[0], dtype=float), float(val))


def swe1d(h, u=0.0):
    hf, uf = _fn(h), _fn(u)

    def ic(xi):
        hh = hf(xi)
        return np.stack([hh, hh * uf(xi)])

    return ic


def swe2d(h, u=0.0, v=0.0):
    hf, uf, vf = _fn(h), _fn(u), _fn(v)

    def ic(x, y):
        hh = hf(x, y)
        return np.stack([hh, hh * uf(x, y), hh * vf(x, y)])

    return ic


def euler1d(rho, u, p, gamma=1.4):
    rf, uf, pf = _fn(rho), _fn(u), _fn(p)

    def ic(xi):
        r = rf(xi)
        uu = uf(xi)
        e = pf(xi) / (gamma - 1.0) + 0.5 * r * uu * uu
        return np.stack([r, r * uu, e])

    return ic


def euler2d(rho, u, v, p, gamma=1.4):
    rf, uf, vf, pf = _fn(rho), _fn(u), _fn(v), _fn(p)

    def ic(x, y):
        r = rf(x, y)
        uu, vv = uf(x, y), vf(x, y)
        e = pf(x, y) / (gamma - 1.0) + 0.5 * r * (uu * uu + vv * vv)
        return np.stack([r, r * uu, r * vv, e])

    return ic


@dataclass(frozen=True)
class Preset:
    name: str
    system: str
    T: float
    description: str
    builder: object = field(repr=False)

    def build(self, g=1.0, gamma=1.4):
        """Returns (network, probes)."""
        net, probes = self.builder(g, gamma)
        net.g = g
        net.gamma = gamma
        return net.validate(), probes


PRESETS: dict = {}


def _register(name, system, T, description):
    def deco(fn):
        PRESETS[name] = Preset(name, system, T, description, fn)
        return fn

    return deco


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}"
        ) from None


def list_presets():
    return [PRESETS[k] for k in PRESETS]


# ------------------------------------------------------------------ parallel split
def _ps_ics(system, variant, g, gamma):
    """Initial data keyed by region: trunk (x<0), upper, lower branch."""
    if system == "swe":
        if variant == "ic2":
            trunk, up, low = 4.0, 5.0, 6.0
        else:
            trunk, up, low = 3.0, 4.0, 4.0
        ch1 = swe1d(trunk)
        ch2, ch3 = swe1d(up), swe1d(low)
        patch = swe2d(lambda x, y: np.where(y > 0, up, low))
        full = swe2d(
            lambda x, y: np.where(x < 0, trunk, np.where(y > 0, up, low))
        )
        return ch1, ch2, ch3, patch, full
    rho = lambda x, *rest: np.sin(np.pi * x / 2.0) + 2.0
    ch1 = euler1d(rho, 2.0, 2.0, gamma)
    ch23 = euler1d(rho, 2.0, 2.0, gamma)
    patch = euler2d(lambda x, y: rho(x), 2.0, 0.0, 2.0, gamma)
    return ch1, ch23, ch23, patch, patch


def _make_ps_1d2d(system, variant=""):
    def build(g, gamma):
        ic1, _, _, icp, _ = _ps_ics(system, variant, g, gamma)
        mesh = build_structured_channel_2d(0.0, 4.0, -1.0, 1.0, 8, 4)
        mesh.sever_internal_faces(lambda x, y: abs(y) < 1e-12, tag="wall")
        mesh.tag_boundary("jL", lambda x, y: abs(x) < 1e-12)
        mesh.tag_boundary("jR", lambda x, y: abs(x - 4.0) < 1e-12)
        mesh.tag_boundary("wall", lambda x, y: True)
        ch1 = Channel("channel1", build_uniform_1d(-4.0, 0.0, 16), width=2.0, ic=ic1)
        patch = Patch("split", mesh, ic=icp)
        itfs = [
            Interface1D2D("channel1", "right", "split", mesh.btags["jL"], (1.0, 0.0)),
            Interface1D2D("channel1", "left", "split", mesh.btags["jR"], (1.0, 0.0)),
        ]
        net = Network(system=system, channels=[ch1], patches=[patch],
                      interfaces=itfs, g=g, gamma=gamma)
        probes = [
            Probe1D("P1", "channel1", -2.0),
            Probe2D("P2", "split", (2.0, 0.0), (2.0, 1.0)),
            Probe2D("P3", "split", (2.0, -1.0), (2.0, 0.0)),
        ]
        return net, probes

    return build


def _make_ps_1d1d(system, variant=""):
    def build(g, gamma):
        ic1, ic2, ic3, _, _ = _ps_ics(system, variant, g, gamma)
        ch1 = Channel("channel1", build_uniform_1d(-4.0, 0.0, 16), width=2.0, ic=ic1)
        ch2 = Channel("channel2", build_uniform_1d(0.0, 4.0, 16), width=1.0, ic=ic2)
        ch3 = Channel("channel3", build_uniform_1d(0.0, 4.0, 16), width=1.0, ic=ic3)
        split = Junction1D1D(
            [("channel1", "right"), ("channel2", "left"), ("channel3", "left")],
            straight_flow_coeffs([2.0, 1.0, 1.0], trunk=0),
        )
        merge = Junction1D1D(
            [("channel2", "right"), ("channel3", "right"), ("channel1", "left")],
            straight_flow_coeffs([1.0, 1.0, 2.0], trunk=2),
        )
        net = Network(system=system, channels=[ch1, ch2, ch3],
                      junctions=[split, merge], g=g, gamma=gamma)
        probes = [
            Probe1D("P1", "channel1", -2.0),
            Probe1D("P2", "channel2", 2.0),
            Probe1D("P3", "channel3", 2.0),
        ]
        return net, probes

    return build


def _make_ps_full2d(system, variant=""):
    def build(g, gamma):
        *_, icf = _ps_ics(system, variant, g, gamma)
        mesh = build_structured_channel_2d(-4.0, 4.0, -1.0, 1.0, 16, 4)
        mesh.sever_internal_faces(
            lambda x, y: abs(y) < 1e-12 and x > -1e-12, tag="wall"
        )
        mesh.tag_boundary("px", lambda x, y: abs(x + 4.0) < 1e-12)
        mesh.tag_boundary("qx", lambda x, y: abs(x - 4.0) < 1e-12)
        mesh.tag_boundary("wall", lambda x, y: True)
        patch = Patch("domain", mesh, ic=icf,
                      periodic=[("px", "qx", (8.0, 0.0))])
        net = Network(system=system, patches=[patch], g=g, gamma=gamma)
        probes = [
            Probe2D("P1", "domain", (-2.0, -1.0), (-2.0, 1.0)),
            Probe2D("P2", "domain", (2.0, 0.0), (2.0, 1.0)),
            Probe2D("P3", "domain", (2.0, -1.0), (2.0, 0.0)),
        ]
        return net, probes

    return build


_register(
    "parallel_split_swe_1d2d", "swe", 2.0,
    "Split-and-converge channel, 1D trunk + 2D split half; dam heights 3/4",
)(_make_ps_1d2d("swe"))
_register(
    "parallel_split_swe_1d1d", "swe", 2.0,
    "Split-and-converge as three 1D channels with straight-flow junctions",
)(_make_ps_1d1d("swe"))
_register(
    "parallel_split_swe_full2d", "swe", 2.0,
    "Fully 2D split-and-converge reference",
)(_make_ps_full2d("swe"))
_register(
    "parallel_split_swe_ic2_1d2d", "swe", 2.0,
    "Parallel split, second height set (4/5/6), 1D-2D model",
)(_make_ps_1d2d("swe", "ic2"))
_register(
    "parallel_split_swe_ic2_1d1d", "swe", 2.0,
    "Parallel split, second height set (4/5/6), 1D-1D model",
)(_make_ps_1d1d("swe", "ic2"))
_register(
    "parallel_split_swe_ic2_full2d", "swe", 2.0,
    "Parallel split, second height set (4/5/6), fully 2D",
)(_make_ps_full2d("swe", "ic2"))
_register(
    "parallel_split_euler_1d2d", "euler", 1.0,
    "Smooth density wave advecting through the 1D-2D split",
)(_make_ps_1d2d("euler"))
_register(
    "parallel_split_euler_1d1d", "euler", 1.0,
    "Smooth density wave through straight-flow 1D junctions",
)(_make_ps_1d1d("euler"))
_register(
    "parallel_split_euler_full2d", "euler", 1.0,
    "Fully 2D reference for the smooth Euler wave",
)(_make_ps_full2d("euler"))


# ------------------------------------------------------------- nonmatching widths
@_register(
    "parallel_split_nonmatching_swe_1d1d", "swe", 2.0,
    "Width-sqrt(2) trunk split into two width-1 channels via partial walls",
)
def _nonmatching(g, gamma):
    ch1 = Channel("channel1", build_uniform_1d(-4.0, 0.0, 16), width=RT2,
                  ic=swe1d(3.0), bc_left="wall")
    ch2 = Channel("channel2", build_uniform_1d(0.0, 4.0, 16), width=1.0,
                  ic=swe1d(4.0), bc_right="wall")
    ch3 = Channel("channel3", build_uniform_1d(0.0, 4.0, 16), width=1.0,
                  ic=swe1d(4.0), bc_right="wall")
    jn = Junction1D1D(
        [("channel1", "right"), ("channel2", "left"), ("channel3", "left")],
        partial_wall_coeffs([RT2, 1.0, 1.0], trunk=0,
                            shared={1: RT2 / 2, 2: RT2 / 2}),
    )
    net = Network(system="swe", channels=[ch1, ch2, ch3], junctions=[jn],
                  g=g, gamma=gamma)
    probes = [
        Probe1D("P1", "channel1", -2.0),
        Probe1D("P2", "channel2", 2.0),
        Probe1D("P3", "channel3", 2.0),
    ]
    return net, probes


# ------------------------------------------------------------------ diamond
def _diamond_junction_patches():
    s = RT2 / 2
    x_r = 12.0
    left = mesh_from_triangle((0.0, -s), (s, 0.0), (0.0, s))
    right = mesh_from_triangle((x_r, -s), (x_r, s), (x_r - s, 0.0))
    return left, right, x_r


def _diamond_net_1d2d(system, ic_trunk, ic_arm, ic_patch, g, gamma):
    left, right, _ = _diamond_junction_patches()
    # Left triangle faces: 0 -> lower arm, 1 -> upper arm, 2 -> trunk.
    left.tag_boundary("to3", lambda x, y: y < -0.1)
    left.tag_boundary("to2", lambda x, y: y > 0.1)
    left.tag_boundary("to1", lambda x, y: True)
    # Right triangle (ccw (x,-s),(x,s),(x-s,0)): face 0 -> trunk,
    # face 1 -> upper arm, face 2 -> lower arm.
    right.tag_boundary("to1", lambda x, y: x > 11.9)
    right.tag_boundary("to2", lambda x, y: y > 0.1)
    right.tag_boundary("to3", lambda x, y: True)
    ch1 = Channel("channel1", build_uniform_1d(0.0, 10.0, 16), width=RT2,
                  ic=ic_trunk)
    ch2 = Channel("channel2", build_uniform_1d(0.0, 10.0, 16), width=1.0,
                  ic=ic_arm)
    ch3 = Channel("channel3", build_uniform_1d(0.0, 10.0, 16), width=1.0,
                  ic=ic_arm)
    d = RT2 / 2
    itfs = [
        Interface1D2D("channel1", "right", "jleft", left.btags["to1"], (1.0, 0.0)),
        Interface1D2D("channel2", "left", "jleft", left.btags["to2"], (d, d)),
        Interface1D2D("channel3", "left", "jleft", left.btags["to3"], (d, -d)),
        Interface1D2D("channel1", "left", "jright", right.btags["to1"], (1.0, 0.0)),
        Interface1D2D("channel2", "right", "jright", right.btags["to2"], (d, -d)),
        Interface1D2D("channel3", "right", "jright", right.btags["to3"], (d, d)),
    ]
    net = Network(
        system=system,
        channels=[ch1, ch2, ch3],
        patches=[Patch("jleft", left, ic=ic_patch),
                 Patch("jright", right, ic=ic_patch)],
        interfaces=itfs, g=g, gamma=gamma,
    )
    probes = [Probe1D("P1", "channel1", 5.0), Probe1D("P2", "channel2", 5.0)]
    return net, probes


@_register(
    "diamond_swe_1d2d", "swe", 5.0,
    "Diamond split/converge; triangle junction patches, heights 3/4",
)
def _diamond_swe_1d2d(g, gamma):
    return _diamond_net_1d2d("swe", swe1d(3.0), swe1d(4.0), swe2d(4.0), g, gamma)


@_register(
    "diamond_euler_1d2d", "euler", 5.0,
    "Diamond with pressure jump 3/4 at rest",
)
def _diamond_euler_1d2d(g, gamma):
    return _diamond_net_1d2d(
        "euler",
        euler1d(2.0, 0.0, 3.0, gamma),
        euler1d(2.0, 0.0, 4.0, gamma),
        euler2d(2.0, 0.0, 0.0, 4.0, gamma),
        g, gamma,
    )


@_register(
    "diamond_euler_1d2d_smooth", "euler", 5.0,
    "Diamond with a smooth pressure wave in the trunk channel",
)
def _diamond_euler_1d2d_smooth(g, gamma):
    p_trunk = lambda xi: 2.0 + np.sin(np.pi * xi / 5.0)
    return _diamond_net_1d2d(
        "euler",
        euler1d(2.0, 0.0, p_trunk, gamma),
        euler1d(2.0, 0.0, 2.0, gamma),
        euler2d(2.0, 0.0, 0.0, 2.0, gamma),
        g, gamma,
    )


@_register(
    "diamond_swe_1d1d", "swe", 5.0,
    "Diamond as four channel segments with partial-wall junctions",
)
def _diamond_swe_1d1d(g, gamma):
    ch1 = Channel("channel1", build_uniform_1d(0.0, 10.0, 16), width=RT2,
                  ic=swe1d(3.0))
    ch2 = Channel("channel2", build_uniform_1d(0.0, 10.0, 16), width=1.0,
                  ic=swe1d(4.0))
    ch3 = Channel("channel3", build_uniform_1d(0.0, 10.0, 16), width=1.0,
                  ic=swe1d(4.0))
    split = Junction1D1D(
        [("channel1", "right"), ("channel2", "left"), ("channel3", "left")],
        partial_wall_coeffs([RT2, 1.0, 1.0], trunk=0,
                            shared={1: RT2 / 2, 2: RT2 / 2}),
    )
    merge = Junction1D1D(
        [("channel2", "right"), ("channel3", "right"), ("channel1", "left")],
        partial_wall_coeffs([1.0, 1.0, RT2], trunk=2,
                            shared={0: RT2 / 2, 1: RT2 / 2}),
    )
    net = Network(system="swe", channels=[ch1, ch2, ch3],
                  junctions=[split, merge], g=g, gamma=gamma)
    probes = [Probe1D("P1", "channel1", 5.0), Probe1D("P2", "channel2", 5.0)]
    return net, probes


# ------------------------------------------------------------------ T junction
def _t_junction(ic1, ic2, ic3):
    def build(g, gamma):
        ch1 = Channel("channel1", build_uniform_1d(0.0, 10.0, 32), width=1.0,
                      ic=ic1, bc_left="wall")
        ch2 = Channel("channel2", build_uniform_1d(0.0, 10.0, 32), width=1.0,
                      ic=ic2, bc_right="wall")
        ch3 = Channel("channel3", build_uniform_1d(-10.0, 0.0, 32), width=1.0,
                      ic=ic3, bc_left="wall")
        jn = Junction1D1D(
            [("channel1", "right"), ("channel2", "left"), ("channel3", "right")],
            equal_share_coeffs(3),
        )
        net = Network(system="swe", channels=[ch1, ch2, ch3], junctions=[jn],
                      g=g, gamma=gamma)
        probes = [
            Probe1D("P1", "channel1", 5.0),
            Probe1D("P2", "channel2", 5.0),
            Probe1D("P3", "channel3", -5.0),
        ]
        return net, probes

    return build


_register(
    "t_junction_swe_ic1", "swe", 6.0,
    "T junction, dam in the horizontal channel (6 for x<=4, else 4)",
)(_t_junction(swe1d(lambda x: np.where(x <= 4.0, 6.0, 4.0)),
              swe1d(4.0), swe1d(4.0)))
_register(
    "t_junction_swe_ic2", "swe", 6.0,
    "T junction, dams in channels 1 and 2",
)(_t_junction(swe1d(lambda x: np.where(x <= 4.0, 6.0, 4.0)),
              swe1d(lambda y: np.where(y >= 4.0, 6.0, 4.0)), swe1d(4.0)))
_register(
    "t_junction_swe_ic3", "swe", 6.0,
    "T junction, dams in all three channels",
)(_t_junction(swe1d(lambda x: np.where(x <= 4.0, 6.0, 4.0)),
              swe1d(lambda y: np.where(y >= 4.0, 5.0, 4.0)),
              swe1d(lambda y: np.where(y <= -4.0, 5.5, 4.0))))
_register(
    "t_junction_swe_ic4", "swe", 6.0,
    "T junction, smooth sine perturbations in every channel",
)(_t_junction(swe1d(lambda x: 4.0 + 0.1 * np.sin(np.pi * x)),
              swe1d(lambda y: 4.0 + 0.1 * np.sin(np.pi * y)),
              swe1d(lambda y: 4.0 + 0.1 * np.sin(-np.pi * y))))


# ------------------------------------------------------------------ turns
def _turn(name, description):
    @_register(name, "swe", 6.0, description)
    def build(g, gamma):
        ch1 = Channel("channel1", build_uniform_1d(0.0, 10.0, 32), width=1.0,
                      ic=swe1d(lambda x: np.where(x <= 4.0, 6.0, 4.0)),
                      bc_left="wall")
        ch2 = Channel("channel2", build_uniform_1d(0.0, 10.0, 32), width=1.0,
                      ic=swe1d(4.0), bc_right="wall")
        jn = Junction1D1D(
            [("channel1", "right"), ("channel2", "left")],
            np.array([[0.0, 1.0], [1.0, 0.0]]),
        )
        net = Network(system="swe", channels=[ch1, ch2], junctions=[jn],
                      g=g, gamma=gamma)
        probes = [Probe1D("P1", "channel1", 5.0), Probe1D("P2", "channel2", 5.0)]
        return net, probes

    return build


# A 1D junction carries no angle information, so the two turning-channel
# experiments share one network; they are kept as separate names to match
# the experiment catalog.
_turn("turn45_swe", "45-degree turning channel (angle-blind 1D junction)")
_turn("turn90_swe", "90-degree turning channel (angle-blind 1D junction)")


# ------------------------------------------------------------------ dam break
def _dam_geometry():
    res = build_structured_channel_2d(0.0, 2.5, 0.0, 2.5, 10, 10)
    res.tag_boundary(
        "to1",
        lambda x, y: abs(x - 2.5) < 1e-12 and 1.0 - 1e-9 < y < 1.5 + 1e-9,
    )
    res.tag_boundary("wall", lambda x, y: True)
    w = 0.5
    v0 = np.array([6.5, 1.0])
    q2 = v0 + w * np.array([RT2 / 2, RT2 / 2])
    v1 = np.array([6.5, 1.5])
    turn = mesh_from_triangle(v0, q2, v1)
    turn.tag_boundary("to1", lambda x, y: abs(x - 6.5) < 1e-12)
    turn.tag_boundary("to2", lambda x, y: x > 6.5 + 1e-12 and y < 1.25)
    turn.tag_boundary("wall", lambda x, y: True)
    return res, turn


def _dam_net(system, ic_res, ic_ch1, ic_ch2, ic_turn, g, gamma):
    res, turn = _dam_geometry()
    ch1 = Channel("channel1", build_uniform_1d(2.5, 6.5, 16), width=0.5, ic=ic_ch1)
    ch2 = Channel("channel2", build_uniform_1d(0.0, 4.0, 16), width=0.5,
                  ic=ic_ch2, bc_right="wall")
    d = RT2 / 2
    itfs = [
        Interface1D2D("channel1", "left", "reservoir", res.btags["to1"], (1.0, 0.0)),
        Interface1D2D("channel1", "right", "turn", turn.btags["to1"], (1.0, 0.0)),
        Interface1D2D("channel2", "left", "turn", turn.btags["to2"], (d, -d)),
    ]
    net = Network(
        system=system,
        channels=[ch1, ch2],
        patches=[Patch("reservoir", res, ic=ic_res), Patch("turn", turn, ic=ic_turn)],
        interfaces=itfs, g=g, gamma=gamma,
    )
    probes = [Probe1D("P1", "channel1", 4.5), Probe1D("P2", "channel2", 2.0)]
    return net, probes


@_register(
    "dam_break_swe_1d2d", "swe", 2.5,
    "Reservoir dam break into a width-0.5 channel with a 45-degree turn",
)
def _dam_swe(g, gamma):
    return _dam_net("swe", swe2d(10.0), swe1d(6.0), swe1d(6.0), swe2d(6.0),
                    g, gamma)


@_register(
    "dam_break_swe_1d2d_smooth", "swe", 2.5,
    "Dam-break geometry with a small sine wave in the first channel",
)
def _dam_swe_smooth(g, gamma):
    wave = lambda x: 2.0 + 0.1 * np.sin(2.0 * np.pi * (x - 4.375) / 3.75)
    return _dam_net("swe", swe2d(2.0), swe1d(wave), swe1d(2.0), swe2d(2.0),
                    g, gamma)


@_register(
    "dam_break_euler_1d2d", "euler", 5.0,
    "Gas-dynamics analogue of the dam break: pressure 5 in the reservoir",
)
def _dam_euler(g, gamma):
    return _dam_net(
        "euler",
        euler2d(2.0, 0.0, 0.0, 5.0, gamma),
        euler1d(2.0, 0.0, 2.0, gamma),
        euler1d(2.0, 0.0, 2.0, gamma),
        euler2d(2.0, 0.0, 0.0, 2.0, gamma),
        g, gamma,
    )
