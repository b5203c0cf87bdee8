"""Weighted Hodge decomposition of closed 1-cochains.

A closed 1-cochain ``alpha`` splits as ``d phi + chi`` where ``phi`` solves
the weighted normal equations ``(d0^T M1 d0) phi = d0^T M1 alpha`` and the
remainder ``chi`` is M1-orthogonal to every exact cochain, i.e. it is
coclosed for the weighted codifferential. The harmonic space (kernel of
the weighted 1-form Laplacian) is extracted by shift-invert Lanczos.
"""

from __future__ import annotations

import logging
import warnings
import weakref
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.csgraph
import scipy.sparse.linalg as spla

from . import dec_core
from .dec_core import Cochain, MeshComplex, WeightedMass
from .radial_geometry import CompatibleTriple

log = logging.getLogger(__name__)

CLOSED_TOL = 1e-8
HARMONIC_REL_THRESHOLD = 1e-10
AMBIGUOUS_GAP = 1e-3
DIRECT_SOLVE_LIMIT = 100_000
CG_RTOL = 1e-12


class NotClosedError(ValueError):
    def __init__(self, d_norm: float, alpha_norm: float):
        self.d_norm = d_norm
        self.alpha_norm = alpha_norm
        super().__init__(f"input 1-cochain is not closed: |d alpha| = {d_norm:.3e} "
                         f"vs |alpha| = {alpha_norm:.3e}")


class SpectralGapWarning(UserWarning):
    pass


# -- normal-equation solver ---------------------------------------------------


class PotentialSolver:
    """Factorized weighted Laplacian ``d0^T M1 d0`` with one pinned vertex per
    connected component. Immutable after construction."""

    def __init__(self, mesh: MeshComplex, mass: WeightedMass,
                 direct_limit: int = DIRECT_SOLVE_LIMIT):
        self.mesh = mesh
        self.mass = mass
        A = dec_core.laplacian0(mesh, mass)
        n_comp, labels = scipy.sparse.csgraph.connected_components(abs(mesh.d0.T @ mesh.d0), directed=False)
        self.labels = labels
        self.n_components = n_comp
        pins = np.array([np.flatnonzero(labels == k)[0] for k in range(n_comp)])
        if mesh.apex is not None:
            pins[labels[mesh.apex]] = mesh.apex
        self.pins = pins
        keep = np.ones(A.shape[0], dtype=bool)
        keep[pins] = False
        self.keep = keep
        self.A_red = A[keep][:, keep].tocsc()
        self.method = "direct" if self.A_red.shape[0] <= direct_limit else "cg"
        if self.method == "direct":
            try:
                self._lu = spla.splu(self.A_red, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0)
            except RuntimeError as exc:
                raise np.linalg.LinAlgError(
                    f"normal system is singular beyond the constant null space: {exc}") from exc
            if np.any(self._lu.U.diagonal() <= 0):
                raise np.linalg.LinAlgError("normal system is not positive definite after pinning")
        else:
            self._precond = spla.LinearOperator(self.A_red.shape, matvec=lambda x, d=self.A_red.diagonal(): x / d)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Potential with the pinned vertices set to zero."""
        b = rhs[self.keep]
        if self.method == "direct":
            x = self._lu.solve(b)
        else:
            x, info = spla.cg(self.A_red, b, rtol=CG_RTOL, atol=0.0, M=self._precond, maxiter=20 * b.size)
            if info != 0:
                raise np.linalg.LinAlgError(f"conjugate gradient did not converge (info={info})")
        phi = np.zeros(self.A_red.shape[0] + self.pins.size)
        phi[self.keep] = x
        return phi

    def regauge(self, phi: np.ndarray, gauge: Union[str, int]) -> np.ndarray:
        out = phi.copy()
        if gauge == "pinned":
            return out
        if gauge == "mean":
            m0 = self.mass.m0
            for k in range(self.n_components):
                sel = self.labels == k
                out[sel] -= np.dot(m0[sel], phi[sel]) / m0[sel].sum()
            return out
        if gauge == "apex":
            if self.mesh.apex is None:
                raise ValueError("gauge 'apex' needs a disk mesh")
            gauge = self.mesh.apex
        if isinstance(gauge, (int, np.integer)):
            sel = self.labels == self.labels[gauge]
            out[sel] -= phi[gauge]
            return out
        raise ValueError(f"unknown gauge {gauge!r}")


_SOLVERS: "weakref.WeakKeyDictionary[WeightedMass, PotentialSolver]" = weakref.WeakKeyDictionary()


def potential_solver(mesh: MeshComplex, mass: WeightedMass) -> PotentialSolver:
    """Shared factorization for ``(mesh, mass)``; built once."""
    solver = _SOLVERS.get(mass)
    if solver is None or solver.mesh is not mesh:
        solver = PotentialSolver(mesh, mass)
        _SOLVERS[mass] = solver
    return solver


# -- decomposition ------------------------------------------------------------


@dataclass
class HodgeSplit:
    """``alpha = exact_part + harmonic_part`` with ``exact_part = d potential``."""

    potential: Cochain
    exact_part: Cochain
    harmonic_part: Cochain
    residuals: dict
    norms: dict

    @property
    def rho(self) -> float:
        """Relative harmonic residual ``|chi| / |alpha|``."""
        a = self.norms["alpha"]
        return self.norms["harmonic"] / a if a > 0 else 0.0

    def as_dict(self) -> dict:
        return {"norms": dict(self.norms), "residuals": dict(self.residuals), "rho": self.rho}


def check_closed(mesh: MeshComplex, alpha: Cochain, tol: float = CLOSED_TOL) -> float:
    """Relative Euclidean size of ``d alpha``; raises NotClosedError above ``tol``."""
    if alpha.degree != 1:
        raise ValueError("expected a 1-cochain")
    dn = float(np.linalg.norm(mesh.d1 @ alpha.values))
    an = float(np.linalg.norm(alpha.values))
    if dn > tol * an:
        raise NotClosedError(dn, an)
    return dn / an if an > 0 else 0.0


def hodge_decompose(mesh: MeshComplex, mass: WeightedMass, alpha: Cochain,
                    gauge: Union[str, int] = "mean") -> HodgeSplit:
    """Split a closed 1-cochain into ``d phi`` plus a weighted-harmonic remainder.

    ``gauge`` fixes the additive constant of ``phi``: ``'mean'`` (zero
    M0-weighted mean per component), ``'apex'``, a vertex index, or
    ``'pinned'``. The exact and harmonic parts do not depend on it.
    """
    closed_rel = check_closed(mesh, alpha)
    solver = potential_solver(mesh, mass)
    m1 = mass.m1
    phi = solver.solve(mesh.d0.T @ (m1 * alpha.values))
    exact = Cochain(1, mesh.d0 @ phi)
    chi = alpha - exact
    potential = Cochain(0, solver.regauge(phi, gauge))

    a_norm = dec_core.norm(mass, alpha)
    e_norm = dec_core.norm(mass, exact)
    h_norm = dec_core.norm(mass, chi)
    d_chi = dec_core.d(mesh, chi)
    delta_chi = dec_core.codifferential(mesh, mass, chi)
    residuals = {
        "input_closedness": closed_rel,
        "closedness": dec_core.norm(mass, d_chi),
        "coclosedness": dec_core.norm(mass, delta_chi),
        "orthogonality": abs(dec_core.inner(mass, exact, chi)) / a_norm ** 2 if a_norm > 0 else 0.0,
        "reconstruction": dec_core.norm(mass, alpha - exact - chi),
        "pythagoras": abs(a_norm ** 2 - e_norm ** 2 - h_norm ** 2) / a_norm ** 2 if a_norm > 0 else 0.0,
    }
    norms = {"alpha": a_norm, "exact": e_norm, "harmonic": h_norm}
    return HodgeSplit(potential, exact, chi, residuals, norms)


def kodaira_dense(mesh: MeshComplex, mass: WeightedMass, alpha: Cochain) -> dict:
    """Three-term split ``d beta + delta gamma + chi`` by dense weighted least
    squares. Validation path for tiny meshes only."""
    if mesh.n_edges > 4000:
        raise ValueError("kodaira_dense is meant for meshes with at most 4000 edges")
    w = np.sqrt(mass.m1)
    D0 = mesh.d0.toarray().astype(float)
    D1 = mesh.d1.toarray().astype(float)
    co = (D1.T * mass.m2) / mass.m1[:, None]          # delta on 2-cochains
    basis = np.hstack([D0, co])
    coef, *_ = np.linalg.lstsq(w[:, None] * basis, w * alpha.values, rcond=None)
    exact = D0 @ coef[: D0.shape[1]]
    coexact = co @ coef[D0.shape[1]:]
    chi = alpha.values - exact - coexact
    return {"exact": Cochain(1, exact), "coexact": Cochain(1, coexact), "harmonic": Cochain(1, chi)}


# -- harmonic space -------------------------------------------------------------


@dataclass
class HarmonicBasis:
    dimension: int
    basis: list
    eigenvalues: np.ndarray
    first_discarded: float
    lambda_max: float
    gap_ratio: float
    reliable: bool
    residuals: list = field(default_factory=list)

    def matrix(self) -> np.ndarray:
        if not self.basis:
            return np.zeros((0, 0))
        return np.column_stack([b.values for b in self.basis])

    def as_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "first_discarded": self.first_discarded,
            "lambda_max": self.lambda_max,
            "gap_ratio": self.gap_ratio,
            "reliable": self.reliable,
            "residuals": [float(x) for x in self.residuals],
        }


def _normalized_form(mesh, mass):
    K = dec_core.hodge_form1(mesh, mass)
    s = 1.0 / np.sqrt(mass.m1)
    S = sp.diags(s)
    return (S @ K @ S).tocsc(), s


def harmonic_residual(mesh: MeshComplex, mass: WeightedMass, chi: Cochain) -> float:
    """``(|d chi|_M2 + |delta chi|_M0) / |chi|_M1``."""
    n = dec_core.norm(mass, chi)
    if n == 0:
        return 0.0
    dn = dec_core.norm(mass, dec_core.d(mesh, chi))
    cn = dec_core.norm(mass, dec_core.codifferential(mesh, mass, chi))
    return (dn + cn) / n


def harmonic_basis(mesh: MeshComplex, mass: WeightedMass,
                   rel_threshold: float = HARMONIC_REL_THRESHOLD,
                   method: str = "sparse", n_probe: int = 6) -> HarmonicBasis:
    """Null space of the weighted 1-form Laplacian.

    Eigenpairs of ``K x = lambda M1 x`` below ``rel_threshold * lambda_max``
    are kept; the basis is M1-orthonormal. ``method='dense'`` runs a full
    symmetric eigendecomposition instead of shift-invert Lanczos.
    """
    A, s = _normalized_form(mesh, mass)
    n = A.shape[0]
    if method == "dense":
        vals, vecs = scipy.linalg.eigh(A.toarray())
        lam_max = float(vals[-1])
    elif method == "sparse":
        # fixed start vector: ARPACK's own seed advances between calls
        v0 = np.random.default_rng(0).standard_normal(n)
        lam_max = float(spla.eigsh(A, k=1, which="LA", tol=1e-6, v0=v0, return_eigenvectors=False)[0])
        sigma = -1e-6 * lam_max
        k = min(n_probe, n - 2)
        while True:
            vals, vecs = spla.eigsh(A, k=k, sigma=sigma, which="LM", tol=0.0, v0=v0)
            order = np.argsort(vals)
            vals, vecs = vals[order], vecs[:, order]
            if np.sum(vals < rel_threshold * lam_max) < k or k >= n - 2:
                break
            k = min(2 * k, n - 2)
    else:
        raise ValueError(f"unknown method {method!r}")

    keep = vals < rel_threshold * lam_max
    dim = int(keep.sum())
    kept = vals[keep]
    discarded = vals[~keep]
    first_discarded = float(discarded[0]) if discarded.size else float("inf")
    floor = max(float(np.max(np.abs(kept))) if dim else 0.0, np.finfo(float).eps * lam_max)
    gap_ratio = first_discarded / floor
    reliable = (1.0 / gap_ratio) <= AMBIGUOUS_GAP
    if not reliable:
        warnings.warn(f"ambiguous spectral gap (ratio {gap_ratio:.3e}); harmonic dimension "
                      f"{dim} is unreliable", SpectralGapWarning, stacklevel=2)

    W = vecs[:, keep]
    if dim:
        # orthonormal in the Euclidean sense => M1-orthonormal after rescaling
        W, _ = np.linalg.qr(W)
    basis = [Cochain(1, s * W[:, i]) for i in range(dim)]
    residuals = [harmonic_residual(mesh, mass, b) for b in basis]
    return HarmonicBasis(dim, basis, kept, first_discarded, lam_max, float(gap_ratio), reliable, residuals)


# -- complex structure ------------------------------------------------------------


def j_apply(mesh: MeshComplex, triple: CompatibleTriple, c: Cochain) -> Cochain:
    """Pointwise complex structure on a 1-cochain.

    Face-wise least-squares components ``(a, b)`` of ``a dr + b dtheta`` are
    averaged onto the edges, rotated in the orthonormal coframe
    ``(dr, f dtheta)`` by ``(A, B) -> (-sigma B, sigma A)`` and integrated
    back along each edge. Second order in the interior; edges on the outer
    ring and the apex spokes use one-sided data.
    """
    if c.degree != 1:
        raise ValueError("j_apply expects a 1-cochain")
    a_e, b_e = dec_core.edge_components(mesh, c)
    f = triple.profile.f
    s = triple.sigma
    out = np.empty(mesh.n_edges)
    r_rad = mesh.edge_mid_r[mesh.rad]
    h = (mesh.rad_r1 - mesh.rad_r0)[:, None]
    out[mesh.rad] = -s * b_e[mesh.rad] / f(r_rad) * h
    r_ang = mesh.edge_mid_r[mesh.ang]
    out[mesh.ang] = s * a_e[mesh.ang] * f(r_ang) * mesh.dtheta
    return Cochain(1, out)


def j_invariance_defect(basis: HarmonicBasis, mesh: MeshComplex, mass: WeightedMass,
                        triple: CompatibleTriple) -> float:
    """Largest relative distance of ``J chi_i`` from the harmonic span."""
    if basis.dimension == 0:
        return 0.0
    B = basis.matrix()
    worst = 0.0
    for chi in basis.basis:
        jc = j_apply(mesh, triple, chi).values
        coeff = B.T @ (mass.m1 * jc)
        rest = jc - B @ coeff
        jn = np.sqrt(np.dot(mass.m1 * jc, jc))
        if jn == 0:
            continue
        worst = max(worst, float(np.sqrt(np.dot(mass.m1 * rest, rest)) / jn))
    return min(worst, 1.0)
