"""Discrete exterior calculus on a structured (r, theta) cell complex.

Cochains store integrated values: a 0-cochain lives on vertices, a
1-cochain holds line integrals over edges, a 2-cochain holds integrals
over faces. The weighted inner products are diagonal (one Hodge-star
entry per cell), assembled from per-cell integrals of ``f exp(-U)`` and
``exp(-U) / f`` with 4-point Gauss-Legendre in r and exact theta extents.

Topologies:

* ``disk``: a single apex vertex at r = 0, rings at r = h, 2h, ..., r_max;
  the faces touching the apex are triangles.
* ``cylinder``: rings at r = -r_max, ..., r_max, periodic theta.
* ``torus``: periodic in both directions; ``r_max`` is the r-period.

Every edge is oriented towards increasing r or increasing theta and every
face carries the orientation of ``dr ^ dtheta``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
import scipy.sparse as sp

from . import serialize
from .radial_geometry import (
    CYLINDER_LIKE,
    PLANE_LIKE,
    TORUS_FLAT,
    CompatibleTriple,
    WeightSpec,
    tail_mass,
)

DISK = "disk"
CYLINDER = "cylinder"
TORUS = "torus"
TOPOLOGIES = (DISK, CYLINDER, TORUS)
EULER = {DISK: 1, CYLINDER: 0, TORUS: 0}
BETTI1 = {DISK: 0, CYLINDER: 1, TORUS: 2}

TAIL_MASS_BOUND = 1e-8

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)

_KIND_FOR_TOPOLOGY = {DISK: PLANE_LIKE, CYLINDER: CYLINDER_LIKE, TORUS: TORUS_FLAT}


class MeshWarning(UserWarning):
    pass


@dataclass(eq=False)
class MeshComplex:
    """Index tables and coboundaries of the truncated complex.

    ``vert``, ``rad``, ``ang`` and ``face`` are (row, theta-index) tables of
    cell ids; ``rad_inner[i]`` is the ring a radial row starts from (-1 for
    the apex) and ``rad_outer[i]`` the ring it ends on.
    """

    topology: str
    n_r: int
    n_theta: int
    r_max: float
    rings: np.ndarray
    ring_lo: np.ndarray
    ring_hi: np.ndarray
    rad_r0: np.ndarray
    rad_r1: np.ndarray
    rad_inner: np.ndarray
    rad_outer: np.ndarray
    vert: np.ndarray
    rad: np.ndarray
    ang: np.ndarray
    face: np.ndarray
    apex: Optional[int]
    vertex_r: np.ndarray
    vertex_theta: np.ndarray
    edge_mid_r: np.ndarray
    edge_mid_theta: np.ndarray
    d0: sp.csr_matrix
    d1: sp.csr_matrix

    @property
    def dtheta(self) -> float:
        return 2.0 * np.pi / self.n_theta

    @property
    def n_vertices(self) -> int:
        return self.d0.shape[1]

    @property
    def n_edges(self) -> int:
        return self.d0.shape[0]

    @property
    def n_faces(self) -> int:
        return self.d1.shape[0]

    @property
    def n_radial_edges(self) -> int:
        return self.rad.size

    def counts(self, degree: int) -> int:
        return (self.n_vertices, self.n_edges, self.n_faces)[degree]

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def describe(self) -> dict:
        return {
            "topology": self.topology,
            "n_r": self.n_r,
            "n_theta": self.n_theta,
            "r_max": float(self.r_max),
            "vertices": self.n_vertices,
            "edges": self.n_edges,
            "faces": self.n_faces,
            "euler_characteristic": self.euler_characteristic,
        }


@dataclass(eq=False)
class WeightedMass:
    """Diagonal Hodge stars ``M0, M1, M2`` of the L^2_lambda pairing."""

    m0: np.ndarray
    m1: np.ndarray
    m2: np.ndarray
    triple: CompatibleTriple
    weight: WeightSpec
    tail_estimate: Optional[float] = None
    warnings: list = field(default_factory=list)

    @property
    def profile(self):
        return self.triple.profile

    def diag(self, degree: int) -> np.ndarray:
        return (self.m0, self.m1, self.m2)[degree]

    def matrix(self, degree: int) -> sp.dia_matrix:
        return sp.diags(self.diag(degree))

    @property
    def M0(self):
        return self.matrix(0)

    @property
    def M1(self):
        return self.matrix(1)

    @property
    def M2(self):
        return self.matrix(2)


@dataclass(frozen=True, eq=False)
class Cochain:
    """Discrete k-form: one value per k-cell."""

    degree: int
    values: np.ndarray

    def __post_init__(self):
        if self.degree not in (0, 1, 2):
            raise ValueError("cochain degree must be 0, 1 or 2")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def __len__(self):
        return self.values.size

    def _other(self, other):
        if isinstance(other, Cochain):
            if other.degree != self.degree:
                raise ValueError("degree mismatch")
            return other.values
        return other

    def __add__(self, other):
        return Cochain(self.degree, self.values + self._other(other))

    def __sub__(self, other):
        return Cochain(self.degree, self.values - self._other(other))

    def __mul__(self, scalar: float):
        return Cochain(self.degree, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Cochain(self.degree, -self.values)


# -- assembly ---------------------------------------------------------------


def _gl_integral(fn: Callable, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes = mid[..., None] + half[..., None] * _GL_X
    return half * np.sum(_GL_W * fn(nodes), axis=-1)


def _check_topology(triple: CompatibleTriple, topology: str) -> None:
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}; choose from {TOPOLOGIES}")
    want = _KIND_FOR_TOPOLOGY[topology]
    if triple.profile.kind != want:
        raise ValueError(f"topology {topology!r} needs a {want} profile, "
                         f"got {triple.profile.family!r} ({triple.profile.kind})")


def auto_r_max(triple: CompatibleTriple, weight: WeightSpec, topology: str) -> float:
    """Smallest r_max (rounded up to a multiple of 0.5) whose tail mass
    ``int_{r_max}^inf exp(-U) f dr`` is below 1e-8."""
    if topology == TORUS:
        return 2.0 * np.pi
    if not weight.proper:
        raise ValueError("r_max='auto' needs a proper weight (U -> inf); "
                         "pass an explicit r_max")
    profile = triple.profile
    lo, hi = 0.5, 1.0
    while tail_mass(profile, weight, hi) >= 0.5 * TAIL_MASS_BOUND:
        lo, hi = hi, 2.0 * hi
        if hi > 1e4:
            raise ValueError("tail mass does not decay; pass an explicit r_max")
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail_mass(profile, weight, mid) >= 0.5 * TAIL_MASS_BOUND:
            lo = mid
        else:
            hi = mid
    return float(np.ceil(hi * 2.0) / 2.0)


def _layout(topology: str, n_r: int, n_t: int, r_max: float):
    if topology == DISK:
        h = r_max / n_r
        rings = h * np.arange(1, n_r + 1)
        ring_lo = rings - 0.5 * h
        ring_hi = np.minimum(rings + 0.5 * h, r_max)
        rad_inner = np.arange(-1, n_r - 1)
        rad_outer = np.arange(n_r)
        rad_r0 = h * np.arange(n_r)
        rad_r1 = h * np.arange(1, n_r + 1)
    elif topology == CYLINDER:
        h = 2.0 * r_max / n_r
        rings = -r_max + h * np.arange(n_r + 1)
        ring_lo = np.maximum(rings - 0.5 * h, -r_max)
        ring_hi = np.minimum(rings + 0.5 * h, r_max)
        rad_inner = np.arange(n_r)
        rad_outer = np.arange(1, n_r + 1)
        rad_r0 = rings[:-1].copy()
        rad_r1 = rings[1:].copy()
    else:
        h = r_max / n_r
        rings = h * np.arange(n_r)
        ring_lo = rings - 0.5 * h
        ring_hi = rings + 0.5 * h
        rad_inner = np.arange(n_r)
        rad_outer = (np.arange(n_r) + 1) % n_r
        rad_r0 = rings.copy()
        rad_r1 = rings + h
    return rings, ring_lo, ring_hi, rad_inner, rad_outer, rad_r0, rad_r1


def build_complex(topology: str, n_r: int, n_theta: int, r_max: float) -> MeshComplex:
    """Index tables and integer coboundaries (no geometry beyond coordinates)."""
    if topology not in TOPOLOGIES:
        raise ValueError(f"unknown topology {topology!r}; choose from {TOPOLOGIES}")
    if n_r < 4 or n_theta < 4:
        raise ValueError("n_r and n_theta must both be >= 4")
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    n_t = n_theta
    rings, ring_lo, ring_hi, rad_inner, rad_outer, rad_r0, rad_r1 = _layout(topology, n_r, n_t, r_max)
    n_rings = rings.size
    n_rows = rad_r0.size
    dth = 2.0 * np.pi / n_t
    jj = np.arange(n_t)
    jp = (jj + 1) % n_t

    apex = 0 if topology == DISK else None
    off = 1 if apex is not None else 0
    vert = off + np.arange(n_rings * n_t).reshape(n_rings, n_t)
    n_v = off + n_rings * n_t
    rad = np.arange(n_rows * n_t).reshape(n_rows, n_t)
    ang = rad.size + np.arange(n_rings * n_t).reshape(n_rings, n_t)
    n_e = rad.size + ang.size
    face = np.arange(n_rows * n_t).reshape(n_rows, n_t)

    # d0: edge <- vertices
    inner_v = np.where(rad_inner[:, None] < 0, 0, vert[np.maximum(rad_inner, 0)][:, jj])
    outer_v = vert[rad_outer][:, jj]
    rows = np.concatenate([rad.ravel(), rad.ravel(), ang.ravel(), ang.ravel()])
    cols = np.concatenate([inner_v.ravel(), outer_v.ravel(), vert.ravel(), vert[:, jp].ravel()])
    data = np.concatenate([-np.ones(rad.size), np.ones(rad.size), -np.ones(ang.size), np.ones(ang.size)])
    d0 = sp.csr_matrix((data.astype(np.int64), (rows, cols)), shape=(n_e, n_v))

    # d1: face <- edges, boundary of [r0, r1] x [theta_j, theta_j+1]
    f_rows = [face.ravel(), face.ravel(), face.ravel()]
    f_cols = [rad.ravel(), rad[:, jp].ravel(), ang[rad_outer].ravel()]
    f_data = [np.ones(face.size), -np.ones(face.size), np.ones(face.size)]
    has_inner = rad_inner >= 0
    f_rows.append(face[has_inner].ravel())
    f_cols.append(ang[rad_inner[has_inner]].ravel())
    f_data.append(-np.ones(int(has_inner.sum()) * n_t))
    d1 = sp.csr_matrix((np.concatenate(f_data).astype(np.int64),
                        (np.concatenate(f_rows), np.concatenate(f_cols))), shape=(face.size, n_e))

    vertex_r = np.empty(n_v)
    vertex_theta = np.empty(n_v)
    if apex is not None:
        vertex_r[apex] = 0.0
        vertex_theta[apex] = 0.0
    vertex_r[vert] = rings[:, None]
    vertex_theta[vert] = jj[None, :] * dth
    edge_mid_r = np.empty(n_e)
    edge_mid_theta = np.empty(n_e)
    edge_mid_r[rad] = (0.5 * (rad_r0 + rad_r1))[:, None]
    edge_mid_theta[rad] = jj[None, :] * dth
    edge_mid_r[ang] = rings[:, None]
    edge_mid_theta[ang] = (jj[None, :] + 0.5) * dth

    return MeshComplex(
        topology=topology, n_r=n_r, n_theta=n_t, r_max=float(r_max),
        rings=rings, ring_lo=ring_lo, ring_hi=ring_hi,
        rad_r0=rad_r0, rad_r1=rad_r1, rad_inner=rad_inner, rad_outer=rad_outer,
        vert=vert, rad=rad, ang=ang, face=face, apex=apex,
        vertex_r=vertex_r, vertex_theta=vertex_theta,
        edge_mid_r=edge_mid_r, edge_mid_theta=edge_mid_theta,
        d0=d0, d1=d1,
    )


def assemble_mass(mesh: MeshComplex, triple: CompatibleTriple, weight: WeightSpec) -> WeightedMass:
    profile = triple.profile
    f = profile.f
    U = weight.U
    n_t = mesh.n_theta
    dth = mesh.dtheta

    # sample f inside every cell the assembly touches
    probe = np.concatenate([
        mesh.rings,
        (mesh.ring_lo[:, None] + (mesh.ring_hi - mesh.ring_lo)[:, None] * (0.5 + 0.5 * _GL_X)).ravel(),
        (mesh.rad_r0[:, None] + (mesh.rad_r1 - mesh.rad_r0)[:, None] * (0.5 + 0.5 * _GL_X)).ravel(),
    ])
    if np.any(~(f(probe) > 0)):
        bad = probe[~(f(probe) > 0)][0]
        raise ValueError(f"profile {profile.family!r} is not positive at r={bad:.6g} inside the mesh")

    def fe(r):
        return f(r) * np.exp(-U(r))

    def ef(r):
        return np.exp(-U(r)) / f(r)

    m0 = np.empty(mesh.n_vertices)
    m0[mesh.vert] = (dth * _gl_integral(fe, mesh.ring_lo, mesh.ring_hi))[:, None]
    if mesh.apex is not None:
        m0[mesh.apex] = 2.0 * np.pi * float(_gl_integral(fe, np.array(0.0), np.array(mesh.rad_r1[0] / 2)))

    h = mesh.rad_r1 - mesh.rad_r0
    m1 = np.empty(mesh.n_edges)
    m1[mesh.rad] = (dth / h ** 2 * _gl_integral(fe, mesh.rad_r0, mesh.rad_r1))[:, None]
    m1[mesh.ang] = (_gl_integral(ef, mesh.ring_lo, mesh.ring_hi) / dth)[:, None]

    area = dth * _gl_integral(f, mesh.rad_r0, mesh.rad_r1)
    m2 = np.empty(mesh.n_faces)
    m2[mesh.face] = (dth * _gl_integral(fe, mesh.rad_r0, mesh.rad_r1) / area ** 2)[:, None]

    for k, m in enumerate((m0, m1, m2)):
        if not np.all(np.isfinite(m)) or np.any(m <= 0):
            raise ValueError(f"mass matrix M{k} is not positive definite")

    mass = WeightedMass(m0, m1, m2, triple, weight)
    if weight.proper and mesh.topology != TORUS:
        tail = tail_mass(profile, weight, mesh.r_max)
        if mesh.topology == CYLINDER:
            tail += tail_mass(_reflected(profile), _reflected(weight), mesh.r_max)
        mass.tail_estimate = float(tail)
        if tail >= TAIL_MASS_BOUND:
            msg = (f"tail mass {tail:.3e} beyond r_max={mesh.r_max:g} exceeds "
                   f"{TAIL_MASS_BOUND:g}; truncation is visible")
            mass.warnings.append(msg)
            warnings.warn(msg, MeshWarning, stacklevel=3)
    return mass


class _reflected:
    # r -> -r view of a profile or weight, for the second cylinder end
    def __init__(self, obj):
        self._obj = obj

    def f(self, r):
        return self._obj.f(-np.asarray(r, dtype=float))

    def U(self, r):
        return self._obj.U(-np.asarray(r, dtype=float))


def build_mesh(triple: CompatibleTriple, weight: WeightSpec, topology: str,
               n_r: int, n_theta: int, r_max: Union[float, str] = "auto"):
    """Assemble the complex and its weighted masses.

    ``r_max='auto'`` applies the tail-mass rule. Returns ``(mesh, mass)``.
    """
    _check_topology(triple, topology)
    if r_max == "auto" or r_max is None:
        r_max = auto_r_max(triple, weight, topology)
    mesh = build_complex(topology, int(n_r), int(n_theta), float(r_max))
    return mesh, assemble_mass(mesh, triple, weight)


# -- operators --------------------------------------------------------------


def d(mesh: MeshComplex, c: Cochain) -> Cochain:
    """Coboundary: exact integer incidence applied to the values."""
    if c.degree == 2:
        raise ValueError("no 3-cells: d is undefined on 2-cochains")
    op = mesh.d0 if c.degree == 0 else mesh.d1
    if c.values.size != op.shape[1]:
        raise ValueError(f"{c.degree}-cochain has {c.values.size} values, mesh has {op.shape[1]} cells")
    return Cochain(c.degree + 1, op @ c.values)


def codifferential(mesh: MeshComplex, mass: WeightedMass, c: Cochain) -> Cochain:
    """Weighted adjoint of d: solves ``M_{k-1} x = d^T M_k c``."""
    if c.degree == 0:
        raise ValueError("codifferential needs degree >= 1")
    op = mesh.d0 if c.degree == 1 else mesh.d1
    if c.values.size != op.shape[0]:
        raise ValueError(f"{c.degree}-cochain has {c.values.size} values, mesh has {op.shape[0]} cells")
    rhs = op.T @ (mass.diag(c.degree) * c.values)
    return Cochain(c.degree - 1, rhs / mass.diag(c.degree - 1))


def inner(mass: WeightedMass, a: Cochain, b: Cochain) -> float:
    if a.degree != b.degree:
        raise ValueError("degree mismatch")
    return float(np.dot(a.values * mass.diag(a.degree), b.values))


def norm(mass: WeightedMass, c: Cochain) -> float:
    return float(np.sqrt(max(inner(mass, c, c), 0.0)))


def sample_function(mesh: MeshComplex, fn: Callable) -> Cochain:
    """0-cochain of point values ``fn(r, theta)``."""
    return Cochain(0, np.broadcast_to(fn(mesh.vertex_r, mesh.vertex_theta), (mesh.n_vertices,)))


def sample_oneform(mesh: MeshComplex, a: Callable, b: Callable) -> Cochain:
    """Midpoint-rule line integrals of ``a dr + b dtheta`` over every edge."""
    vals = np.empty(mesh.n_edges)
    r_rad = mesh.edge_mid_r[mesh.rad]
    t_rad = mesh.edge_mid_theta[mesh.rad]
    h = (mesh.rad_r1 - mesh.rad_r0)[:, None]
    vals[mesh.rad] = np.broadcast_to(a(r_rad, t_rad), r_rad.shape) * h
    r_ang = mesh.edge_mid_r[mesh.ang]
    t_ang = mesh.edge_mid_theta[mesh.ang]
    vals[mesh.ang] = np.broadcast_to(b(r_ang, t_ang), r_ang.shape) * mesh.dtheta
    return Cochain(1, vals)


def laplacian0(mesh: MeshComplex, mass: WeightedMass) -> sp.csr_matrix:
    """Weighted graph Laplacian ``d0^T M1 d0`` (the normal-equation matrix)."""
    return (mesh.d0.T @ sp.diags(mass.m1) @ mesh.d0).tocsr()


def hodge_form1(mesh: MeshComplex, mass: WeightedMass) -> sp.csr_matrix:
    """Quadratic form of the weighted 1-form Laplacian in the M1 pairing:
    ``M1 d0 M0^-1 d0^T M1 + d1^T M2 d1``."""
    grad = sp.diags(mass.m1) @ mesh.d0
    K = grad @ sp.diags(1.0 / mass.m0) @ grad.T + mesh.d1.T @ sp.diags(mass.m2) @ mesh.d1
    K = K.tocsr()
    return (0.5 * (K + K.T)).tocsr()


def rotation_permutation(mesh: MeshComplex, degree: int, steps: int = 1, axis: str = "theta") -> np.ndarray:
    """Index map of the pullback by a grid symmetry: ``(F^* c) = c[perm]``.

    ``axis='theta'`` rotates by ``steps * dtheta``; ``axis='r'`` shifts the
    periodic r-direction of the torus.
    """
    if axis == "theta":
        def shift(table):
            return np.roll(table, -steps, axis=1)
    elif axis == "r":
        if mesh.topology != TORUS:
            raise ValueError("r-shifts are symmetries of the torus only")

        def shift(table):
            return np.roll(table, -steps, axis=0)
    else:
        raise ValueError(f"unknown axis {axis!r}")
    perm = np.arange(mesh.counts(degree))
    if degree == 0:
        perm[mesh.vert] = shift(mesh.vert)
    elif degree == 1:
        perm[mesh.rad] = shift(mesh.rad)
        perm[mesh.ang] = shift(mesh.ang)
    else:
        perm[mesh.face] = shift(mesh.face)
    return perm


# -- per-face / per-edge reconstruction ---------------------------------------


def face_components(mesh: MeshComplex, c: Cochain) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares constant ``(a, b)`` of ``a dr + b dtheta`` on each face,
    as (rows, n_theta) arrays. Apex triangles see only their outer ring."""
    if c.degree != 1:
        raise ValueError("face_components expects a 1-cochain")
    v = c.values
    jp = np.roll(np.arange(mesh.n_theta), -1)
    h = (mesh.rad_r1 - mesh.rad_r0)[:, None]
    a = 0.5 * (v[mesh.rad] + v[mesh.rad[:, jp]]) / h
    outer = v[mesh.ang[mesh.rad_outer]]
    inner_ok = mesh.rad_inner >= 0
    inner = np.where(inner_ok[:, None], v[mesh.ang[np.maximum(mesh.rad_inner, 0)]], 0.0)
    b = (outer + inner) / (1.0 + inner_ok[:, None]) / mesh.dtheta
    return a, b


def edge_components(mesh: MeshComplex, c: Cochain) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate components averaged from the faces adjacent to each edge.

    Returns per-edge arrays ``(a_e, b_e)``: for radial edges the dtheta
    component is interpolated, for angular edges the dr component.
    """
    a_f, b_f = face_components(mesh, c)
    jm = np.roll(np.arange(mesh.n_theta), 1)
    a_e = np.zeros(mesh.n_edges)
    b_e = np.zeros(mesh.n_edges)
    # radial edge (i, j) is shared by faces (i, j-1) and (i, j)
    b_e[mesh.rad] = 0.5 * (b_f + b_f[:, jm])
    a_e[mesh.rad] = c.values[mesh.rad] / (mesh.rad_r1 - mesh.rad_r0)[:, None]
    # angular edge on ring k touches the rows ending or starting there
    n_rings = mesh.rings.size
    acc = np.zeros((n_rings, mesh.n_theta))
    cnt = np.zeros(n_rings)
    np.add.at(acc, mesh.rad_outer, a_f)
    np.add.at(cnt, mesh.rad_outer, 1.0)
    ok = mesh.rad_inner >= 0
    np.add.at(acc, mesh.rad_inner[ok], a_f[ok])
    np.add.at(cnt, mesh.rad_inner[ok], 1.0)
    a_e[mesh.ang] = acc / cnt[:, None]
    b_e[mesh.ang] = c.values[mesh.ang] / mesh.dtheta
    return a_e, b_e


# -- external interface ------------------------------------------------------


def mesh_to_json(mesh: MeshComplex, mass: Optional[WeightedMass] = None) -> dict:
    """``{topology, n_r, n_theta, r_max, arrays}`` with base64 little-endian arrays."""
    d0 = mesh.d0.tocoo()
    d1 = mesh.d1.tocoo()
    arrays = {
        "vertex_r": serialize.b64_array(mesh.vertex_r),
        "vertex_theta": serialize.b64_array(mesh.vertex_theta),
        "d0_row": serialize.b64_array(d0.row), "d0_col": serialize.b64_array(d0.col),
        "d0_val": serialize.b64_array(d0.data),
        "d1_row": serialize.b64_array(d1.row), "d1_col": serialize.b64_array(d1.col),
        "d1_val": serialize.b64_array(d1.data),
    }
    if mass is not None:
        arrays.update({f"m{k}": serialize.b64_array(mass.diag(k)) for k in range(3)})
    return {
        "topology": mesh.topology,
        "n_r": mesh.n_r,
        "n_theta": mesh.n_theta,
        "r_max": float(mesh.r_max),
        "shape": [mesh.n_vertices, mesh.n_edges, mesh.n_faces],
        "arrays": arrays,
    }


def operators_from_json(record: dict) -> dict:
    """Decode a :func:`mesh_to_json` record into sparse ``d0, d1`` and mass diagonals."""
    arr = {k: serialize.array_from_b64(v) for k, v in record["arrays"].items()}
    nv, ne, nf = record["shape"]
    out = {
        "d0": sp.csr_matrix((arr["d0_val"], (arr["d0_row"], arr["d0_col"])), shape=(ne, nv)),
        "d1": sp.csr_matrix((arr["d1_val"], (arr["d1_row"], arr["d1_col"])), shape=(nf, ne)),
        "vertex_r": arr["vertex_r"],
        "vertex_theta": arr["vertex_theta"],
    }
    for k in range(3):
        if f"m{k}" in arr:
            out[f"m{k}"] = arr[f"m{k}"]
    return out


def cochain_rows(c: Cochain):
    return ((i, float(x)) for i, x in enumerate(c.values))


def write_cochain_csv(path, c: Cochain, column: str = "value") -> None:
    serialize.write_csv(path, ["cell_id", column], cochain_rows(c))
