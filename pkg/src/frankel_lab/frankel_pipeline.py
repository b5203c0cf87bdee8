"""Hamiltonian test for the circle action on a discretized surface.

The contraction ``alpha = i_xi omega`` is decomposed in L^2_lambda; the
action is declared Hamiltonian when the harmonic remainder is negligible,
in which case the potential is the momentum map. Each intermediate fact
the argument relies on (rotation invariance of harmonic forms, vanishing
of ``alpha(xi_M)`` at fixed points, J-invariance of the harmonic space)
is measured and reported alongside the verdict.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from . import dec_core, hodge_engine
from .dec_core import Cochain, MeshComplex, WeightedMass
from .hodge_engine import HarmonicBasis, HodgeSplit
from .radial_geometry import (
    CompatibleTriple,
    WeightSpec,
    analytic_momentum,
    partial_integral_growth,
    xi_norm_sq,
)

log = logging.getLogger(__name__)

HAMILTONIAN = "hamiltonian"
NON_HAMILTONIAN = "non-hamiltonian"
INDETERMINATE = "indeterminate"
EXIT_CODES = {HAMILTONIAN: 0, NON_HAMILTONIAN: 2, INDETERMINATE: 3}

DEFAULT_TOL_H = 1e-2
BAND = 3.0

_GL_X, _GL_W = np.polynomial.legendre.leggauss(4)


def _xi_components(xi: Sequence[float], mesh: MeshComplex) -> tuple[float, float]:
    p, q = (float(x) for x in xi)
    if q != 0.0 and mesh.topology != dec_core.TORUS:
        raise ValueError("d/dr generates a symmetry only on the flat torus")
    return p, q


def contraction(mesh: MeshComplex, triple: CompatibleTriple, xi=(1.0, 0.0)) -> Cochain:
    """Sampled ``i_xi omega`` for ``xi = p d/dtheta + q d/dr``:
    ``-p f dr + q f dtheta``."""
    p, q = _xi_components(xi, mesh)
    f = triple.profile.f
    return dec_core.sample_oneform(mesh, lambda r, t: -p * f(r), lambda r, t: q * f(r))


def xi_flat(mesh: MeshComplex, triple: CompatibleTriple, xi=(1.0, 0.0)) -> Cochain:
    """Sampled ``g(xi, .) = q dr + p f^2 dtheta``."""
    p, q = _xi_components(xi, mesh)
    f = triple.profile.f
    return dec_core.sample_oneform(mesh, lambda r, t: q + 0.0 * r, lambda r, t: p * f(r) ** 2)


# -- step 1 ---------------------------------------------------------------------


def _symmetry_axes(xi) -> list:
    p, q = (float(x) for x in xi)
    axes = []
    if p != 0.0:
        axes.append("theta")
    if q != 0.0:
        axes.append("r")
    return axes or ["theta"]


def _check_symmetric(mesh: MeshComplex, mass: WeightedMass, axis: str) -> None:
    for k in range(3):
        perm = dec_core.rotation_permutation(mesh, k, axis=axis)
        m = mass.diag(k)
        if not np.allclose(m[perm], m, rtol=1e-12, atol=0.0):
            raise ValueError(f"mesh weights are not invariant under the {axis}-shift; "
                             "step 1 needs a symmetric profile and weight")


def step1_invariance(basis: HarmonicBasis, mesh: MeshComplex, mass: WeightedMass,
                     axes: Sequence[str] = ("theta",)) -> dict:
    """Relative change of each harmonic form under a one-cell grid rotation,
    the discrete stand-in for ``L_xi chi = 0``."""
    for axis in axes:
        _check_symmetric(mesh, mass, axis)
    per_vector = []
    for chi in basis.basis:
        n = dec_core.norm(mass, chi)
        worst = 0.0
        for axis in axes:
            perm = dec_core.rotation_permutation(mesh, 1, axis=axis)
            moved = Cochain(1, chi.values[perm])
            worst = max(worst, dec_core.norm(mass, moved - chi) / n if n > 0 else 0.0)
        per_vector.append(worst)
    return {"per_vector": per_vector, "max": max(per_vector, default=0.0), "axes": list(axes)}


# -- step 2 ---------------------------------------------------------------------


def evaluate_on_xi(mesh: MeshComplex, c: Cochain, xi=(1.0, 0.0)) -> np.ndarray:
    """Face values of the scalar ``c(xi_M)``."""
    p, q = _xi_components(xi, mesh)
    a, b = dec_core.face_components(mesh, c)
    return p * b + q * a


def step2_fixed_point_pairing(basis: HarmonicBasis, mesh: MeshComplex, mass: WeightedMass,
                              xi_b: Cochain, xi=(1.0, 0.0)) -> dict:
    """For each harmonic ``alpha``: spread of ``alpha(xi_M)`` over faces, its
    value next to the fixed point, and ``<xi_flat, alpha>_lambda``."""
    fixed = mesh.apex is not None
    rows = []
    for alpha in basis.basis:
        vals = evaluate_on_xi(mesh, alpha, xi)
        at_fixed = float(np.mean(vals[0])) if fixed else None
        rows.append({
            "mean": float(np.mean(vals)),
            "variance": float(np.var(vals)),
            "value_at_fixed_point": at_fixed,
            "pairing": dec_core.inner(mass, xi_b, alpha),
        })
    if fixed:
        note = "fixed point present: alpha(xi_M) must vanish"
    elif rows:
        note = "no fixed point available: alpha(xi_M) constant but not forced to vanish"
    else:
        note = "no harmonic forms"
    return {"fixed_point_present": fixed, "per_vector": rows, "note": note}


# -- momentum error -------------------------------------------------------------


def momentum_l2_error(mesh: MeshComplex, mass: WeightedMass, mu: Cochain, exact) -> float:
    """Relative L^2_lambda distance between the bilinear interpolant of the
    vertex values ``mu`` and the radial function ``exact(r)``.

    A constant offset is removed first unless the mesh has an apex (where
    both are anchored at zero).
    """
    profile = mass.profile
    U = mass.weight.U
    vals = mu.values.copy()
    if mesh.apex is None:
        diff = vals - exact(mesh.vertex_r)
        vals -= np.dot(mass.m0, diff) / mass.m0.sum()
    n_t = mesh.n_theta
    jp = np.roll(np.arange(n_t), -1)
    outer = vals[mesh.vert[mesh.rad_outer]]
    inner = np.where(mesh.rad_inner[:, None] < 0,
                     vals[mesh.apex] if mesh.apex is not None else 0.0,
                     vals[mesh.vert[np.maximum(mesh.rad_inner, 0)]])
    inner_p = np.where(mesh.rad_inner[:, None] < 0, inner, inner[:, jp])
    s = 0.5 * (1.0 + _GL_X)                       # nodes on [0, 1]
    w = 0.5 * _GL_W
    r0 = mesh.rad_r0[:, None, None, None]
    h = (mesh.rad_r1 - mesh.rad_r0)[:, None, None, None]
    S = s[None, None, :, None]
    T = s[None, None, None, :]
    interp = ((1 - S) * (1 - T) * inner[:, :, None, None] + S * (1 - T) * outer[:, :, None, None]
              + (1 - S) * T * inner_p[:, :, None, None] + S * T * outer[:, jp][:, :, None, None])
    r = r0 + h * S
    dens = profile.f(r) * np.exp(-U(r)) * h * mesh.dtheta * w[None, None, :, None] * w[None, None, None, :]
    ex = exact(r)
    err = np.sum((interp - ex) ** 2 * dens)
    ref = np.sum(np.broadcast_to(ex ** 2 * dens, interp.shape))
    return float(np.sqrt(err / ref))


# -- report ---------------------------------------------------------------------


@dataclass
class FrankelReport:
    case: dict
    mesh: dict
    xi: list
    tol_H: float
    harmonic: dict
    step1_invariance_defect: dict
    j_invariance_defect: float
    step2_pairing: dict
    step3_split: HodgeSplit
    step3_harmonic_pairings: list
    rho: float
    verdict: str
    fixed_point_present: bool
    xi_norm: dict
    step4_momentum: Optional[Cochain] = None
    momentum_error: Optional[dict] = None
    warnings: list = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def as_dict(self) -> dict:
        return {
            "case": self.case,
            "mesh": self.mesh,
            "xi": self.xi,
            "tol_H": self.tol_H,
            "verdict": self.verdict,
            "exit_code": self.exit_code,
            "rho": self.rho,
            "fixed_point_present": self.fixed_point_present,
            "xi_norm": self.xi_norm,
            "harmonic": self.harmonic,
            "step1_invariance_defect": self.step1_invariance_defect,
            "j_invariance_defect": self.j_invariance_defect,
            "step2_pairing": self.step2_pairing,
            "step3_split": self.step3_split.as_dict(),
            "step3_harmonic_pairings": self.step3_harmonic_pairings,
            "momentum_error": self.momentum_error,
            "warnings": list(self.warnings),
        }


def classify(rho: float, tol_H: float) -> str:
    if rho < tol_H / BAND:
        return HAMILTONIAN
    if rho > tol_H * BAND:
        return NON_HAMILTONIAN
    return INDETERMINATE


def xi_norm_diagnostics(triple: CompatibleTriple, weight: WeightSpec, mesh: MeshComplex,
                        mass: WeightedMass, alpha: Cochain, xi=(1.0, 0.0)) -> dict:
    """Discrete ``|i_xi omega|^2``, its quadrature value on the truncated
    domain, and a convergence certificate for the untruncated integral."""
    p, q = _xi_components(xi, mesh)
    profile = triple.profile
    discrete = dec_core.inner(mass, alpha, alpha)
    out = {"discrete": discrete}
    if mesh.topology == dec_core.TORUS:
        # f = 1, U = 0 on the flat torus
        out.update({"quadrature": 2.0 * np.pi * mesh.r_max * (p * p + q * q), "verdict": "finite"})
        return out
    r_min = 0.0 if mesh.topology == dec_core.DISK else -mesh.r_max
    quad = p * p * xi_norm_sq(profile, weight, mesh.r_max, r_min=r_min)
    sides = 1 if mesh.topology == dec_core.DISK else 2

    def integrand(r):
        return 2.0 * np.pi * p * p * float(profile.f(r)) ** 3 * float(np.exp(-weight.U(r)))

    cert = partial_integral_growth(integrand, 0.0, max(mesh.r_max, 1.0))
    verdict = {"convergent": "finite", "divergent": "infinite"}.get(cert.verdict, "inconclusive")
    out.update({"quadrature": quad, "sides": sides, "verdict": verdict, "certificate": cert.as_dict()})
    return out


def run_frankel(triple: CompatibleTriple, weight: WeightSpec, topology: str,
                n_r: int, n_theta: int, r_max: Union[float, str] = "auto",
                tol_H: float = DEFAULT_TOL_H, xi=(1.0, 0.0),
                spectral_threshold: float = hodge_engine.HARMONIC_REL_THRESHOLD,
                mesh_and_mass: Optional[tuple] = None) -> FrankelReport:
    """Run the four-step argument on one case and return the full report."""
    if tol_H <= 0:
        raise ValueError("tol_H must be positive")
    if mesh_and_mass is None:
        mesh, mass = dec_core.build_mesh(triple, weight, topology, n_r, n_theta, r_max)
    else:
        mesh, mass = mesh_and_mass
    xi = [float(x) for x in xi]
    basis = hodge_engine.harmonic_basis(mesh, mass, rel_threshold=spectral_threshold)

    s1 = step1_invariance(basis, mesh, mass, axes=_symmetry_axes(xi))
    j_def = hodge_engine.j_invariance_defect(basis, mesh, mass, triple)
    xb = xi_flat(mesh, triple, xi)
    s2 = step2_fixed_point_pairing(basis, mesh, mass, xb, xi)

    alpha = contraction(mesh, triple, xi)
    gauge = "apex" if mesh.apex is not None else "mean"
    split = hodge_engine.hodge_decompose(mesh, mass, alpha, gauge=gauge)
    rho = split.rho
    pairings = [dec_core.inner(mass, alpha, chi) for chi in basis.basis]
    verdict = classify(rho, tol_H)

    report = FrankelReport(
        case={"profile": triple.profile.config(), "weight": weight.config(),
              "topology": mesh.topology, "sigma": triple.sigma},
        mesh={**mesh.describe(), "tail_estimate": mass.tail_estimate},
        xi=xi, tol_H=float(tol_H),
        harmonic=basis.as_dict(),
        step1_invariance_defect=s1,
        j_invariance_defect=j_def,
        step2_pairing=s2,
        step3_split=split,
        step3_harmonic_pairings=pairings,
        rho=rho, verdict=verdict,
        fixed_point_present=mesh.apex is not None,
        xi_norm=xi_norm_diagnostics(triple, weight, mesh, mass, alpha, xi),
        warnings=list(mass.warnings),
    )
    if verdict == INDETERMINATE:
        report.warnings.append(f"rho={rho:.3e} lies within a factor {BAND:g} of tol_H={tol_H:g}: "
                               "indeterminate at this resolution")
    if verdict == HAMILTONIAN:
        mu = split.potential
        report.step4_momentum = mu
        perm = dec_core.rotation_permutation(mesh, 0)
        err = {"rotation_defect": float(np.max(np.abs(mu.values[perm] - mu.values)))}
        if mesh.apex is not None:
            err["apex_value"] = float(mu.values[mesh.apex])
        p, q = xi
        if q == 0.0:
            def exact(r):
                return p * np.asarray(analytic_momentum(triple.profile, r))
            err["relative_l2"] = momentum_l2_error(mesh, mass, mu, exact)
            shift = 0.0 if mesh.apex is not None else np.dot(
                mass.m0, mu.values - exact(mesh.vertex_r)) / mass.m0.sum()
            err["max_nodal"] = float(np.max(np.abs(mu.values - shift - exact(mesh.vertex_r))))
        report.momentum_error = err
    return report
