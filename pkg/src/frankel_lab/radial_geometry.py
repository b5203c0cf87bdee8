"""Closed-form geometry of rotationally symmetric surfaces.

A surface of revolution carries the metric ``g = dr^2 + f(r)^2 dtheta^2``,
the area form ``omega = f(r) dr ^ dtheta`` and the rotation generator
``d/dtheta``. Everything here is a pure function of a :class:`Profile`
(the warping function ``f``) and a :class:`WeightSpec` (the exponent ``U``
of the reference measure ``exp(-U) dV_g``).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "PLANE_LIKE",
    "CYLINDER_LIKE",
    "TORUS_FLAT",
    "Profile",
    "WeightSpec",
    "CompatibleTriple",
    "DefinedByLimitError",
    "make_profile",
    "make_weight",
    "from_config",
    "gaussian_curvature",
    "xi_norm_sq",
    "analytic_momentum",
    "compatible_triple_check",
    "tail_mass",
    "partial_integral_growth",
]

PLANE_LIKE = "plane-like"
CYLINDER_LIKE = "cylinder-like"
TORUS_FLAT = "torus-flat"

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-10

RealFn = Callable[[np.ndarray], np.ndarray]


class DefinedByLimitError(ValueError):
    """Raised when a quantity is only defined as a limit at the apex."""


def _const(value: float) -> RealFn:
    return lambda r: np.full_like(np.asarray(r, dtype=float), value)


@dataclass(frozen=True, eq=False)
class Profile:
    """Warping function ``f`` of a surface of revolution.

    ``curvature_at_apex`` is the limit of ``-f''/f`` at ``r = 0`` for
    plane-like families that know it; ``momentum`` is a closed-form
    ``-int_0^r f`` when available.
    """

    kind: str
    family: str
    params: tuple
    f: RealFn
    df: RealFn
    d2f: RealFn
    curvature_at_apex: Optional[float] = None
    momentum: Optional[RealFn] = None

    def __post_init__(self):
        if self.kind not in (PLANE_LIKE, CYLINDER_LIKE, TORUS_FLAT):
            raise ValueError(f"unknown profile kind {self.kind!r}")

    @property
    def r_domain(self) -> tuple[float, float]:
        if self.kind == PLANE_LIKE:
            return (0.0, np.inf)
        if self.kind == CYLINDER_LIKE:
            return (-np.inf, np.inf)
        return (0.0, 2.0 * np.pi)

    def config(self) -> dict:
        return {"family": self.family, "params": list(self.params)}


@dataclass(frozen=True, eq=False)
class WeightSpec:
    """Exponent ``U`` of the reference measure ``d lambda = exp(-U) dV_g``.

    ``proper`` records whether ``U -> inf`` along the ends, which is what
    makes the tail-mass truncation rule meaningful. The Gong-Wang potential
    is ``V = -U``.
    """

    family: str
    params: tuple
    U: RealFn
    dU: RealFn
    d2U: RealFn
    proper: bool
    convention: str = "dlambda = exp(-U) dV_g"

    def V(self, r):
        return -self.U(r)

    @property
    def is_trivial(self) -> bool:
        return self.family == "none"

    def config(self) -> dict:
        return {"family": self.family, "params": list(self.params)}


@dataclass(frozen=True, eq=False)
class CompatibleTriple:
    """``(omega, g, J)`` on a surface of revolution.

    ``J`` acts on the orthonormal frame ``E1 = d/dr``, ``E2 = f^-1 d/dtheta``
    by ``E1 -> sigma E2``, ``E2 -> -sigma E1``; the coframe ``(dr, f dtheta)``
    transforms the same way.
    """

    profile: Profile
    sigma: int = 1

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError("orientation sign must be +1 or -1")

    def metric(self, r: float) -> np.ndarray:
        f = float(self.profile.f(np.asarray(r)))
        return np.array([[1.0, 0.0], [0.0, f * f]])

    def omega(self, r: float) -> np.ndarray:
        f = float(self.profile.f(np.asarray(r)))
        return np.array([[0.0, f], [-f, 0.0]])

    def J(self, r: float) -> np.ndarray:
        # columns are J(d/dr), J(d/dtheta) in coordinate components
        f = float(self.profile.f(np.asarray(r)))
        s = self.sigma
        return np.array([[0.0, -s * f], [s / f, 0.0]])


# -- builtin families -------------------------------------------------------


def _plane():
    return Profile(
        PLANE_LIKE, "plane", (),
        f=lambda r: np.asarray(r, dtype=float) * 1.0,
        df=_const(1.0), d2f=_const(0.0),
        curvature_at_apex=0.0,
        momentum=lambda r: -0.5 * np.asarray(r, dtype=float) ** 2,
    )


def _sinh(c: float = 1.0):
    if c <= 0:
        raise ValueError("sinh scale must be positive")
    return Profile(
        PLANE_LIKE, "sinh", (c,),
        f=lambda r: np.sinh(c * np.asarray(r, dtype=float)),
        df=lambda r: c * np.cosh(c * np.asarray(r, dtype=float)),
        d2f=lambda r: c * c * np.sinh(c * np.asarray(r, dtype=float)),
        curvature_at_apex=-c * c,
        momentum=lambda r: -(np.cosh(c * np.asarray(r, dtype=float)) - 1.0) / c,
    )


def _decaying(s: float):
    if s <= 0:
        raise ValueError("decay exponent s must be positive")

    def f(r):
        r = np.asarray(r, dtype=float)
        return r * (1.0 + r * r) ** (-s)

    def df(r):
        r = np.asarray(r, dtype=float)
        return (1.0 + r * r) ** (-s - 1.0) * (1.0 + (1.0 - 2.0 * s) * r * r)

    def d2f(r):
        r = np.asarray(r, dtype=float)
        return -2.0 * s * r * (1.0 + r * r) ** (-s - 2.0) * (3.0 + (1.0 - 2.0 * s) * r * r)

    def momentum(r):
        r = np.asarray(r, dtype=float)
        if s == 1.0:
            return -0.5 * np.log1p(r * r)
        return -((1.0 + r * r) ** (1.0 - s) - 1.0) / (2.0 * (1.0 - s))

    return Profile(PLANE_LIKE, "decaying", (s,), f, df, d2f,
                   curvature_at_apex=6.0 * s, momentum=momentum)


def _cylinder(radius: float = 1.0):
    if radius <= 0:
        raise ValueError("cylinder radius must be positive")
    return Profile(
        CYLINDER_LIKE, "cylinder", (radius,),
        f=_const(radius), df=_const(0.0), d2f=_const(0.0),
        momentum=lambda r: -radius * np.asarray(r, dtype=float),
    )


def _catenoid():
    return Profile(
        CYLINDER_LIKE, "catenoid", (),
        f=lambda r: np.cosh(np.asarray(r, dtype=float)),
        df=lambda r: np.sinh(np.asarray(r, dtype=float)),
        d2f=lambda r: np.cosh(np.asarray(r, dtype=float)),
        momentum=lambda r: -np.sinh(np.asarray(r, dtype=float)),
    )


def _torus():
    return Profile(
        TORUS_FLAT, "torus", (),
        f=_const(1.0), df=_const(0.0), d2f=_const(0.0),
        momentum=lambda r: -np.asarray(r, dtype=float),
    )


_PROFILES = {
    "plane": _plane,
    "sinh": _sinh,
    "hyperbolic": _sinh,
    "decaying": _decaying,
    "cylinder": _cylinder,
    "catenoid": _catenoid,
    "torus": _torus,
}


def make_profile(family: str, params: Sequence[float] = ()) -> Profile:
    """Build a builtin profile: plane, sinh[c], decaying[s], cylinder[rho],
    catenoid or torus."""
    try:
        factory = _PROFILES[family]
    except KeyError:
        raise ValueError(f"unknown profile family {family!r}; "
                         f"choose from {sorted(_PROFILES)}") from None
    try:
        return factory(*[float(p) for p in params])
    except TypeError:
        raise ValueError(f"bad parameters {list(params)} for profile {family!r}") from None


def _w_none():
    return WeightSpec("none", (), _const(0.0), _const(0.0), _const(0.0), proper=False)


def _w_gauss(c: float = 1.0):
    if c <= 0:
        raise ValueError("gauss weight scale must be positive")
    return WeightSpec(
        "gauss", (c,),
        U=lambda r: c * np.asarray(r, dtype=float) ** 2,
        dU=lambda r: 2.0 * c * np.asarray(r, dtype=float),
        d2U=_const(2.0 * c),
        proper=True,
    )


def _w_poly(a: float, c: float = 1.0):
    if a <= 0:
        raise ValueError("weight exponent a must be positive")

    def U(r):
        return c * np.abs(np.asarray(r, dtype=float)) ** a

    def dU(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return c * a * np.sign(r) * np.abs(r) ** (a - 1.0)

    def d2U(r):
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return c * a * (a - 1.0) * np.abs(r) ** (a - 2.0)

    return WeightSpec("poly", (a, c) if c != 1.0 else (a,), U, dU, d2U, proper=True)


def _w_log(c: float = 1.0):
    def U(r):
        return c * np.log1p(np.asarray(r, dtype=float) ** 2)

    def dU(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * c * r / (1.0 + r * r)

    def d2U(r):
        r = np.asarray(r, dtype=float)
        return 2.0 * c * (1.0 - r * r) / (1.0 + r * r) ** 2

    return WeightSpec("log", (c,), U, dU, d2U, proper=True)


_WEIGHTS = {"none": _w_none, "gauss": _w_gauss, "poly": _w_poly, "log": _w_log}


def make_weight(family: str = "none", params: Sequence[float] = ()) -> WeightSpec:
    """Build a builtin weight: none, gauss[c] (c r^2), poly[a, c] (c |r|^a) or
    log[c] (c log(1+r^2))."""
    try:
        factory = _WEIGHTS[family]
    except KeyError:
        raise ValueError(f"unknown weight family {family!r}; "
                         f"choose from {sorted(_WEIGHTS)}") from None
    try:
        return factory(*[float(p) for p in params])
    except TypeError:
        raise ValueError(f"bad parameters {list(params)} for weight {family!r}") from None


def from_config(record: dict) -> tuple[Profile, WeightSpec]:
    """``{family, params, weight: {family, params}}`` -> (Profile, WeightSpec)."""
    profile = make_profile(record["family"], record.get("params", ()))
    w = record.get("weight") or {"family": "none"}
    return profile, make_weight(w.get("family", "none"), w.get("params", ()))


# -- operations -------------------------------------------------------------


def gaussian_curvature(profile: Profile, r):
    """``K = -f''/f``. At the apex of a plane-like surface the builtin limit
    is returned; otherwise a zero of ``f`` raises DefinedByLimitError."""
    r_arr = np.asarray(r, dtype=float)
    f = profile.f(r_arr)
    zero = f == 0.0
    if np.any(zero):
        if profile.curvature_at_apex is None:
            raise DefinedByLimitError(
                f"K = -f''/f is only defined as a limit where f = 0 "
                f"(profile {profile.family!r} provides no limit value)")
    if np.any(f < 0):
        raise ValueError("gaussian_curvature requires f(r) > 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        K = -profile.d2f(r_arr) / f
    if np.any(zero):
        K = np.where(zero, profile.curvature_at_apex, K)
    return float(K) if np.ndim(K) == 0 else K


def _quad(fn, a, b):
    val, _ = integrate.quad(fn, a, b, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=400)
    return val


def _piecewise_quad(fn, a: float, b: float, pieces: int = 16) -> float:
    # split long ranges so the adaptive rule sees the bulk of the integrand
    if not np.isfinite(b):
        return _quad(fn, a, b)
    edges = np.linspace(a, b, pieces + 1)
    return float(sum(_quad(fn, lo, hi) for lo, hi in zip(edges[:-1], edges[1:])))


def xi_norm_sq(profile: Profile, weight: WeightSpec, r_max: float, r_min: float = 0.0) -> float:
    """Squared L^2_lambda norm of ``i_{d/dtheta} omega = -f dr`` on ``[r_min, r_max]``:
    ``2 pi int f^3 exp(-U) dr``."""
    if r_max <= r_min:
        raise ValueError("r_max must exceed r_min")

    def integrand(r):
        return float(profile.f(r)) ** 3 * float(np.exp(-weight.U(r)))

    return 2.0 * np.pi * _piecewise_quad(integrand, r_min, r_max)


def analytic_momentum(profile: Profile, r):
    """``mu(r) = -int_0^r f``, normalized so that ``mu(0) = 0``."""
    if profile.momentum is not None:
        out = profile.momentum(np.asarray(r, dtype=float))
        return float(out) if np.ndim(out) == 0 else out
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    vals = np.array([-_quad(lambda s: float(profile.f(s)), 0.0, x) for x in r_arr])
    return float(vals[0]) if np.ndim(r) == 0 else vals


def compatible_triple_check(triple: CompatibleTriple, sample_points) -> float:
    """Max of ``|g(X, Y) - omega(X, J Y)|`` over samples and coordinate pairs."""
    pts = np.asarray(sample_points, dtype=float)
    radii = pts[:, 0] if pts.ndim == 2 else np.atleast_1d(pts)
    worst = 0.0
    for r in radii:
        r = float(r)
        if float(triple.profile.f(r)) == 0.0:
            raise ValueError(f"sample point r={r} sits on a zero of f")
        G = triple.metric(r)
        OJ = triple.omega(r) @ triple.J(r)
        worst = max(worst, float(np.max(np.abs(G - OJ))))
    return worst


def tail_mass(profile: Profile, weight: WeightSpec, r_max: float) -> float:
    """``int_{r_max}^inf exp(-U) f dr`` (one end)."""
    return _quad(lambda r: float(np.exp(-weight.U(r))) * float(profile.f(r)), r_max, np.inf)


@dataclass
class GrowthCertificate:
    """Partial integrals ``I(R0 2^j)`` and the resulting convergence verdict."""

    radii: list
    partials: list
    ratios: list = field(default_factory=list)
    increment_ratios: list = field(default_factory=list)
    verdict: str = "inconclusive"

    @property
    def divergent(self) -> bool:
        return self.verdict == "divergent"

    def as_dict(self) -> dict:
        return {"radii": self.radii, "partials": self.partials, "ratios": self.ratios,
                "increment_ratios": self.increment_ratios, "verdict": self.verdict}


def _ratio(a: float, b: float) -> float:
    if a == 0.0:
        return 0.0 if b == 0.0 else float(np.inf)
    return float(b / a)


def partial_integral_growth(integrand: Callable[[float], float], r0: float, r_start: float,
                            doublings: int = 3, ratio: float = 1.5) -> GrowthCertificate:
    """Divergence detector for ``int_{r0}^inf integrand``.

    Divergent when every partial-integral ratio over ``doublings`` doublings
    of the cut-off exceeds ``ratio`` (geometric growth), or when the
    increments over successive doublings do not shrink. Convergent when
    the increments shrink strictly at every doubling.
    """
    radii = [r_start * 2.0 ** j for j in range(doublings + 1)]
    head = _piecewise_quad(integrand, r0, radii[0])
    increments = [_piecewise_quad(integrand, lo, hi) for lo, hi in zip(radii[:-1], radii[1:])]
    partials = [head]
    for inc in increments:
        partials.append(partials[-1] + inc)
    ratios = [_ratio(a, b) for a, b in zip(partials[:-1], partials[1:])]
    inc_ratios = [_ratio(a, b) for a, b in zip(increments[:-1], increments[1:])]
    cert = GrowthCertificate(radii, partials, ratios, inc_ratios)
    if all(x > ratio for x in ratios) or all(x >= 1.0 for x in inc_ratios):
        cert.verdict = "divergent"
    elif all(x < 1.0 for x in inc_ratios):
        cert.verdict = "convergent"
    return cert
