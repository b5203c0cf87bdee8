"""Finite-range certificates for the sufficient conditions that guarantee a
strong weighted Hodge decomposition.

Every check samples the relevant inequality on ``r_range`` and supplements
it with an asymptotic argument (fitted exponent, or re-evaluation on the
doubled range), because the conditions are statements about the whole end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, optimize

from .radial_geometry import (
    CYLINDER_LIKE,
    PLANE_LIKE,
    TORUS_FLAT,
    Profile,
    WeightSpec,
    gaussian_curvature,
    partial_integral_growth,
)

PASS = "pass"
FAIL = "fail"
ASYMPTOTIC_FAIL = "asymptotic-fail"
INCOMPATIBLE = "incompatible"
NOT_APPLICABLE = "not-applicable"

TROYANOV_EXPONENT = 1.0 / 3.0
TROYANOV_BAND = 0.05
EPS_GRID = tuple(0.01 * j for j in range(1, 101))
EXPONENT_SLACK = 1e-12
GROWTH_SLACK = 0.05
N_SAMPLES = 400


@dataclass
class CriterionReport:
    criterion: str
    verdict: str
    constants: dict = field(default_factory=dict)
    r_range: tuple = (0.0, 0.0)
    witness: Optional[float] = None
    flags: list = field(default_factory=list)
    detail: str = ""

    def __post_init__(self):
        if self.verdict in (FAIL, ASYMPTOTIC_FAIL) and self.witness is None:
            raise ValueError(f"{self.criterion}: a failing report needs a witness radius")
        if self.verdict == PASS and not self.constants:
            raise ValueError(f"{self.criterion}: a passing report needs its constants")

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def failed(self) -> bool:
        return self.verdict in (FAIL, ASYMPTOTIC_FAIL, INCOMPATIBLE)

    def as_dict(self) -> dict:
        return {"criterion": self.criterion, "verdict": self.verdict,
                "constants": self.constants, "r_range": list(self.r_range),
                "witness": self.witness, "flags": list(self.flags), "detail": self.detail}


# -- end models -----------------------------------------------------------------


def _zero(r):
    return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class EndModel:
    """Radial data of a complete end: ``Delta r``, a lower bound for the
    transverse eigenvalues of ``Hess r``, and the volume density in ``r``.
    ``|grad r| = 1`` throughout."""

    kind: str
    dimension: int
    params: tuple
    laplacian_r: Callable
    hess_r_lower: Callable = _zero
    volume_density: Callable = lambda r: np.ones_like(np.asarray(r, dtype=float))
    curvature: Optional[tuple] = None   # (kappa1, kappa2) when computable

    @classmethod
    def cylindrical(cls, n: int = 2) -> "EndModel":
        return cls("cylindrical", int(n), (int(n),), _zero)

    @classmethod
    def conic(cls, n: int) -> "EndModel":
        n = int(n)
        if n < 2:
            raise ValueError("conic ends need dimension >= 2")
        return cls("conic", n, (n,), lambda r: (n - 1) / np.asarray(r, dtype=float),
                   volume_density=lambda r: np.asarray(r, dtype=float) ** (n - 1))

    @classmethod
    def fibered(cls, k: int, l: int) -> "EndModel":
        k, l = int(k), int(l)
        if k < 1 or l < 0:
            raise ValueError("fibered ends need k >= 1 and l >= 0")
        return cls("fibered", 1 + k + l, (k, l), lambda r: k / np.asarray(r, dtype=float),
                   volume_density=lambda r: np.asarray(r, dtype=float) ** k)

    @classmethod
    def qac(cls, n: int, c: Optional[float] = None) -> "EndModel":
        n = int(n)
        c = float(n - 1) if c is None else float(c)
        return cls("qac", n, (n, c), lambda r: c / np.asarray(r, dtype=float),
                   volume_density=lambda r: np.asarray(r, dtype=float) ** c)

    @classmethod
    def from_profile(cls, profile: Profile, r_range=(1.0, 1e3)) -> "EndModel":
        """The end of a surface of revolution: ``Delta r = f'/f`` and the
        angular Hessian eigenvalue is also ``f'/f``."""
        if profile.kind == TORUS_FLAT:
            raise ValueError("the flat torus has no end")

        def ratio(r):
            r = np.asarray(r, dtype=float)
            return profile.df(r) / profile.f(r)

        r = np.geomspace(*r_range, N_SAMPLES)
        K = gaussian_curvature(profile, r)
        kappas = (max(0.0, -float(np.min(K))), max(0.0, float(np.max(K))))
        return cls("surface", 2, (profile.family, *profile.params), ratio, ratio,
                   volume_density=lambda r: profile.f(np.asarray(r, dtype=float)), curvature=kappas)

    def label(self) -> str:
        return f"{self.kind}:{','.join(str(p) for p in self.params)}"


def parse_end(spec: str) -> EndModel:
    """``cylindrical[:n]``, ``conic:n``, ``fibered:k,l`` or ``qac:n[,c]``."""
    kind, _, rest = spec.partition(":")
    args = [a for a in rest.split(",") if a.strip()] if rest else []
    try:
        if kind == "cylindrical":
            return EndModel.cylindrical(*(int(a) for a in args))
        if kind == "conic":
            (n,) = args
            return EndModel.conic(int(n))
        if kind == "fibered":
            k, l = args
            return EndModel.fibered(int(k), int(l))
        if kind == "qac":
            return EndModel.qac(int(args[0]), float(args[1]) if len(args) > 1 else None)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"bad end model {spec!r}: {exc}") from None
    raise ValueError(f"unknown end kind {kind!r}; choose cylindrical, conic, fibered or qac")


def builtin_end_for(profile: Profile) -> EndModel:
    """Closed-form end for the profiles whose end is a model: the plane is a
    2-dimensional cone and the round cylinder is cylindrical. Everything
    else falls back to the surface data."""
    if profile.family == "plane":
        return EndModel.conic(2)
    if profile.family == "cylinder":
        return EndModel.cylindrical(2)
    return EndModel.from_profile(profile)


# -- helpers --------------------------------------------------------------------


def _grid(r_range, n=N_SAMPLES) -> np.ndarray:
    lo, hi = (float(x) for x in r_range)
    if not 0 < lo < hi:
        raise ValueError("r_range must satisfy 0 < r0 < R")
    return np.geomspace(lo, hi, n)


def _extended(r: np.ndarray) -> np.ndarray:
    """The same samples continued out to twice the range."""
    ext = np.geomspace(r[-1], 2 * r[-1], r.size // 4)
    return np.concatenate([r, ext[1:]])


def _tail(r: np.ndarray) -> np.ndarray:
    """Mask of the last third of a log-spaced grid."""
    return np.arange(r.size) >= (2 * r.size) // 3


def _log_slope(r, y) -> float:
    return float(np.polyfit(np.log(r), np.log(y), 1)[0])


def _first(mask: np.ndarray, r: np.ndarray) -> Optional[float]:
    idx = np.flatnonzero(mask)
    return float(r[idx[0]]) if idx.size else None


# -- unweighted criteria --------------------------------------------------------


def troyanov_check(profile: Profile, r_range=(1.0, 1e4)) -> CriterionReport:
    """Decay ``f <= C r^{-k}`` with ``k > 1/3``, fitted on the tail third and
    cross-checked against the convergence of ``int f^3``."""
    if profile.kind != PLANE_LIKE:
        raise ValueError("the decay criterion applies to plane-like profiles")
    r = _grid(r_range)
    flags = []
    with np.errstate(over="ignore"):
        finite = np.isfinite(np.asarray(profile.f(r), dtype=float) ** 3)
    if not np.all(finite):
        # exponentially growing profile: fit where f^3 is representable
        r_range = (r_range[0], float(r[finite][-1]))
        r = _grid(r_range)
        flags.append("range-truncated")
    f = np.asarray(profile.f(r), dtype=float)
    tail = _tail(r)
    steps = np.diff(f[tail])
    if not (np.all(steps <= 0) or np.all(steps >= 0)):
        flags.append("unreliable-fit")
    k = -_log_slope(r[tail], f[tail])
    C = float(np.max(f * r ** k))
    cert = partial_integral_growth(lambda x: float(profile.f(x)) ** 3, 0.0, r_range[1] / 8.0)
    integral_ok = cert.verdict == "convergent"
    decay_ok = k > TROYANOV_EXPONENT
    if abs(k - TROYANOV_EXPONENT) < TROYANOV_BAND or cert.verdict == "inconclusive":
        flags.append("boundary")
    consistent = decay_ok == integral_ok
    if not consistent:
        flags.append("inconsistent")
    constants = {"k": k, "C": C, "integral_verdict": cert.verdict, "consistent": consistent,
                 "integral_certificate": cert.as_dict()}
    if decay_ok:
        return CriterionReport("troyanov", PASS, constants, tuple(r_range), flags=flags,
                               detail=f"f <= {C:.4g} r^-{k:.4f} with k > 1/3")
    local = -np.gradient(np.log(f), np.log(r))
    witness = _first(tail & (local <= TROYANOV_EXPONENT), r) or float(r[tail][0])
    return CriterionReport("troyanov", ASYMPTOTIC_FAIL, constants, tuple(r_range), witness, flags,
                           detail=f"fitted decay exponent k = {k:.4f} <= 1/3")


def mckean_contrast(profile: Profile, r_range=(0.0, 40.0), delta: float = GROWTH_SLACK) -> CriterionReport:
    """Curvature ``K <= -1`` forces exponential growth of ``f`` and therefore
    an infinite ``int f^3``: the curvature criterion cannot coexist with a
    square-integrable generator."""
    if profile.kind != PLANE_LIKE:
        raise ValueError("the curvature contrast applies to plane-like profiles")
    lo, hi = (float(x) for x in r_range)
    r = np.linspace(lo, hi, N_SAMPLES)
    K = gaussian_curvature(profile, r)
    K_max = float(np.max(K))
    constants = {"K_max": K_max, "K_min": float(np.min(K))}
    if K_max > -1.0 + 1e-10:
        return CriterionReport("mckean", FAIL, constants, (lo, hi), _first(K > -1.0 + 1e-10, r),
                               detail="K <= -1 fails; curvature criterion not applicable")
    half = r >= 0.5 * (lo + hi)
    slope = float(np.polyfit(r[half], np.log(profile.f(r[half])), 1)[0])
    cert = partial_integral_growth(lambda x: float(profile.f(x)) ** 3, 0.0, hi / 8.0)
    constants.update({"growth_rate": slope, "exponential": slope >= 1.0 - delta,
                      "integral_verdict": cert.verdict, "integral_certificate": cert.as_dict()})
    return CriterionReport("mckean", INCOMPATIBLE, constants, (lo, hi), witness=cert.radii[-1],
                           detail="K <= -1 holds, f grows exponentially and int f^3 diverges: "
                                  "incompatible with a square-integrable generator")


# -- weighted criteria: U = c r^a -----------------------------------------------


def _as_grad_exp(a: float, c: float, theta: float, r0: float) -> float:
    """``sup_{r >= r0} |grad U|^2 exp(-theta U)`` for ``U = c r^a``."""
    def g(r):
        return (c * a) ** 2 * r ** (2 * a - 2) * np.exp(-theta * c * r ** a)
    r_star = ((2 * a - 2) / (theta * c * a)) ** (1.0 / a) if a > 1 else r0
    return float(g(max(r0, r_star)))


def _as_ii_holds(eps, a, c, r):
    lhs = np.log(eps) + (1 + eps) * (np.log(c) + a * np.log(r))
    rhs = np.logaddexp(0.0, 2 * np.log(c * a) + (2 * a - 2) * np.log(r))
    return lhs <= rhs + 1e-12


def _as_ii_witness(eps, a, c, r0) -> float:
    """First ``r >= r0`` where condition ii fails for this ``eps``."""
    def g(x):
        return (np.log(eps) + (1 + eps) * (np.log(c) + a * x)
                - np.logaddexp(0.0, 2 * np.log(c * a) + (2 * a - 2) * x))
    x0 = np.log(r0)
    if g(x0) > 0:
        return float(r0)
    hi = x0 + 1.0
    while g(hi) <= 0:
        hi = x0 + 2 * (hi - x0)
        if hi > 700:
            return float("inf")
    return float(np.exp(optimize.brentq(g, x0, hi, xtol=1e-12)))


def ahmed_stroock_check(end: EndModel, a: float, c: float = 1.0, r_range=(1.0, 1e3),
                        kappa1: Optional[float] = None, kappa2: Optional[float] = None,
                        theta: float = 0.5) -> list:
    """Hypotheses for ``U = c r^a`` on an end: curvature bounds, i) Laplacian
    bound, ii) the ``eps U^{1+eps}`` bound, iii) Hessian bound and the
    gradient-exponential bound."""
    if a <= 0:
        raise ValueError("weight exponent a must be positive")
    if c <= 0:
        raise ValueError("weight scale c must be positive")
    if not 0 < theta < 1:
        raise ValueError("theta must lie in (0, 1)")
    rr = tuple(float(x) for x in r_range)
    r = _grid(rr)
    r2 = _extended(r)
    reports = []

    # curvature inputs
    if kappa1 is None and kappa2 is None and end.curvature is not None:
        k1, k2 = end.curvature
        source = "computed from K"
    else:
        k1 = 0.0 if kappa1 is None else float(kappa1)
        k2 = 0.0 if kappa2 is None else float(kappa2)
        source = "supplied" if (kappa1 is not None or kappa2 is not None) else "model default (flat cross-section)"
    reports.append(CriterionReport("AS.curvature", PASS, {"kappa1": k1, "kappa2": k2, "source": source}, rr,
                                   detail="Ric >= -kappa1, curvature operator <= kappa2"))

    def dU(x):
        return c * a * x ** (a - 1)

    def d2U(x):
        return c * a * (a - 1) * x ** (a - 2)

    def lapU(x):
        return d2U(x) + dU(x) * end.laplacian_r(x)

    # i) Laplacian
    q = lapU(r) / (1 + c * r ** a)
    q2 = lapU(r2) / (1 + c * r2 ** a)
    C_i = max(0.0, float(np.max(q)))
    stable = float(np.max(q2)) <= C_i * (1 + 1e-9) + 1e-300
    growth = _log_slope(r[_tail(r)], np.abs(lapU(r[_tail(r)])) + 1e-300)
    const = {"C": C_i, "lap_growth_exponent": growth, "a": a}
    if stable or growth <= a + 1e-9:
        reports.append(CriterionReport("AS.i", PASS, const, rr,
                                       detail="Delta U <= C (1 + U)"))
    else:
        reports.append(CriterionReport("AS.i", ASYMPTOTIC_FAIL, const, rr, witness=rr[1],
                                       detail="Delta U grows faster than U"))

    # ii) eps U^{1+eps} <= 1 + |grad U|^2
    feasible = [e for e in EPS_GRID if a * (1 + e) <= 2 * a - 2 + EXPONENT_SLACK]
    confirmed = [e for e in feasible if np.all(_as_ii_holds(e, a, c, r2))]
    eps_exact = (a - 2) / a if a > 2 else 0.0
    if confirmed:
        eps = max(confirmed)
        reports.append(CriterionReport("AS.ii", PASS, {"epsilon": eps, "epsilon_bound": min(eps_exact, 1.0)},
                                       rr, detail=f"eps = {eps:.2f} on [r0, 2R]; asymptotically a(1+eps) <= 2a-2"))
    else:
        eps = EPS_GRID[0]
        w = _as_ii_witness(eps, a, c, rr[0])
        verdict = FAIL if w <= rr[1] else ASYMPTOTIC_FAIL
        reports.append(CriterionReport("AS.ii", verdict, {"epsilon": None, "epsilon_tested": eps}, rr, witness=w,
                                       detail=f"no eps in (0,1] works: a(1+eps) > 2a-2 for a = {a:g}; "
                                              f"eps = {eps:.2f} first fails at r = {w:.4g}"))

    # iii) Hessian lower bound
    def hess_low(x):
        return np.minimum(d2U(x), dU(x) * end.hess_r_lower(x))

    B = max(0.0, -float(np.min(hess_low(r))))
    B2 = max(0.0, -float(np.min(hess_low(r2))))
    const = {"B": B}
    if B2 <= B * (1 + 1e-9) + 1e-12:
        reports.append(CriterionReport("AS.iii", PASS, const, rr, detail="Hess U >= -B"))
    else:
        lows = hess_low(r2)
        reports.append(CriterionReport("AS.iii", ASYMPTOTIC_FAIL, const, rr, witness=float(r2[np.argmin(lows)]),
                                       detail="Hessian lower bound keeps decreasing"))

    # gradient-exponential bound
    C_g = _as_grad_exp(a, c, theta, rr[0])
    ok = np.all(2 * np.log(dU(r2)) <= np.log(C_g) + theta * c * r2 ** a + 1e-9)
    if ok:
        reports.append(CriterionReport("AS.grad_exp", PASS, {"C": C_g, "theta": theta}, rr,
                                       detail="|grad U|^2 <= C exp(theta U)"))
    else:
        reports.append(CriterionReport("AS.grad_exp", FAIL, {"C": C_g, "theta": theta}, rr,
                                       witness=float(r2[0]), detail="numeric check failed"))
    return reports


def weight_power(weight: WeightSpec) -> Optional[tuple]:
    """``(a, c)`` when the weight is ``c r^a``; None otherwise."""
    if weight.family == "gauss":
        return 2.0, float(weight.params[0]) if weight.params else 1.0
    if weight.family == "poly":
        a = float(weight.params[0])
        return a, float(weight.params[1]) if len(weight.params) > 1 else 1.0
    return None


def gong_wang_check(weight: WeightSpec, end: Optional[EndModel] = None, profile: Optional[Profile] = None,
                    r_range=(1.0, 1e3), ricci_lower: Optional[float] = None) -> list:
    """Hypotheses with ``V = -U``: finite mass, ``Ric - Hess V`` bounded below,
    ``U + V`` bounded, ``|grad U| -> inf`` and ``limsup Delta U/|grad U|^2 < 1``."""
    if weight.is_trivial:
        raise ValueError("these hypotheses concern a nontrivial weight")
    if end is None:
        if profile is None:
            raise ValueError("need a profile or an end model")
        end = builtin_end_for(profile) if profile.family in ("plane", "cylinder") else EndModel.from_profile(profile, r_range)
    rr = tuple(float(x) for x in r_range)
    r = _grid(rr)
    r2 = _extended(r)
    tail = _tail(r)
    reports = []

    # finite mass
    base = 0.0 if profile is not None and profile.kind == PLANE_LIKE else rr[0]

    def dens(x):
        return float(np.exp(-weight.U(x))) * float(end.volume_density(x))

    cert = partial_integral_growth(dens, base, rr[1] / 8.0)
    if cert.verdict == "convergent":
        mass = integrate.quad(dens, base, np.inf, limit=400)[0]
        reports.append(CriterionReport("GW.mass", PASS, {"mass": mass, "certificate": cert.as_dict()}, rr,
                                       detail="finite total mass"))
    else:
        verdict = FAIL if cert.verdict == "divergent" else ASYMPTOTIC_FAIL
        reports.append(CriterionReport("GW.mass", verdict, {"certificate": cert.as_dict()}, rr,
                                       witness=cert.radii[-1], detail=f"mass integral {cert.verdict}"))

    # Ric + Hess U bounded below
    if ricci_lower is not None:
        def ric(x):
            return np.full_like(np.asarray(x, dtype=float), -float(ricci_lower))
    elif profile is not None and profile.kind != TORUS_FLAT:
        def ric(x):
            return gaussian_curvature(profile, x)
    else:
        def ric(x):
            return np.zeros_like(np.asarray(x, dtype=float))

    def low(x):
        return ric(x) + np.minimum(weight.d2U(x), weight.dU(x) * end.hess_r_lower(x))

    C1 = max(0.0, -float(np.min(low(r))))
    C2 = max(0.0, -float(np.min(low(r2))))
    if C2 <= C1 * (1 + 1e-9) + 1e-12:
        reports.append(CriterionReport("GW.ricci_hess", PASS, {"C": C1}, rr, detail="Ric - Hess V >= -C"))
    else:
        reports.append(CriterionReport("GW.ricci_hess", ASYMPTOTIC_FAIL, {"C": C1, "C_doubled": C2}, rr,
                                       witness=float(r2[np.argmin(low(r2))]),
                                       detail="lower bound keeps decreasing"))

    reports.append(CriterionReport("GW.bounded_sum", PASS, {"sup_abs_U_plus_V": 0.0}, rr,
                                   detail="U + V = 0 by the convention V = -U"))

    # |grad U| -> infinity
    g = np.abs(weight.dU(r))
    rising = np.diff(g) > 0
    slope = _log_slope(r[tail], g[tail] + 1e-300)
    const = {"grad_growth_exponent": slope, "grad_at_R": float(g[-1])}
    if weight.proper and np.all(rising[tail[1:]]) and slope > 1e-3:
        reports.append(CriterionReport("GW.grad_infinity", PASS, const, rr, detail="|grad U| -> infinity"))
    else:
        w = _first(~rising, r[1:]) or float(r[0])
        reports.append(CriterionReport("GW.grad_infinity", FAIL, const, rr, witness=w,
                                       detail=f"|grad U| does not tend to infinity (log-slope {slope:.3g})"))

    # limsup Delta U / |grad U|^2 < 1
    def ratio(x):
        lap = weight.d2U(x) + weight.dU(x) * end.laplacian_r(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = lap / weight.dU(x) ** 2
        return np.where(np.isfinite(q), q, np.inf)

    tail2 = r2[r2 >= r[tail][0]]
    q_tail = ratio(tail2)
    limsup = float(np.max(q_tail))
    if limsup < 1.0:
        reports.append(CriterionReport("GW.ratio", PASS, {"limsup": limsup}, rr,
                                       detail="limsup Delta U/|grad U|^2 < 1"))
    else:
        reports.append(CriterionReport("GW.ratio", FAIL, {"limsup": limsup}, rr,
                                       witness=float(tail2[np.argmax(q_tail >= 1.0)]),
                                       detail="Delta U/|grad U|^2 reaches 1 on the tail"))
    return reports


# -- aggregation ----------------------------------------------------------------


def norm_certificate(profile: Profile, weight: WeightSpec, r_start: float = 8.0):
    """Convergence certificate for ``2 pi int f^3 exp(-U)`` over one end."""
    if profile.kind == TORUS_FLAT:
        return None

    def integrand(x):
        with np.errstate(over="ignore"):
            return 2.0 * np.pi * float(profile.f(x)) ** 3 * float(np.exp(-weight.U(x)))

    return partial_integral_growth(integrand, 0.0, r_start)


def criteria_for(profile: Optional[Profile], weight: WeightSpec, end: Optional[EndModel] = None,
                 kappa1: Optional[float] = None, kappa2: Optional[float] = None) -> list:
    """Every criterion row applicable to a case."""
    rows = []
    if weight.is_trivial:
        if profile is not None and profile.kind == PLANE_LIKE:
            rows.append(troyanov_check(profile))
            rows.append(mckean_contrast(profile))
        return rows
    if end is None and profile is not None and profile.kind != TORUS_FLAT:
        end = builtin_end_for(profile)
    if end is None:
        return rows
    power = weight_power(weight)
    if power is not None:
        rows.extend(ahmed_stroock_check(end, power[0], power[1], kappa1=kappa1, kappa2=kappa2))
    rows.extend(gong_wang_check(weight, end=end, profile=profile, ricci_lower=kappa1))
    return rows


def _family_passes(rows: Sequence[CriterionReport], prefix: str) -> bool:
    sel = [r for r in rows if r.criterion.startswith(prefix)]
    return bool(sel) and all(r.passed for r in sel)


def hypothesis_dashboard(profile: Profile, weight: WeightSpec, end: Optional[EndModel] = None,
                         grid: Optional[tuple] = None, j_tol: float = 1e-3) -> dict:
    """Aggregate norm finiteness, the applicable criterion family, the
    J-invariance defect (when ``grid = (n_r, n_theta, r_max)`` is given) and
    the fixed-point flag into one yes/no/partial summary."""
    cert = norm_certificate(profile, weight)
    norm_verdict = "finite" if cert is None or cert.verdict == "convergent" else (
        "infinite" if cert.verdict == "divergent" else "inconclusive")
    out = {"profile": profile.config(), "weight": weight.config(),
           "norm": {"verdict": norm_verdict, "certificate": cert.as_dict() if cert else None}}
    if norm_verdict == "infinite":
        out.update({"family": None, "criteria": [], "j_invariance_defect": None,
                    "fixed_points": profile.kind == PLANE_LIKE, "pipeline_skipped": True,
                    "summary": "no", "message": "generator not square integrable; Frankel pipeline skipped"})
        return out

    rows = criteria_for(profile, weight, end)
    if profile.kind == TORUS_FLAT:
        family, ok = "compact", True
    elif weight.is_trivial:
        family, ok = "unweighted", _family_passes(rows, "troyanov")
    else:
        family = "weighted"
        ok = _family_passes(rows, "AS.") or _family_passes(rows, "GW.")

    j_defect = None
    if grid is not None:
        from . import dec_core, hodge_engine
        from .radial_geometry import CompatibleTriple
        topology = {PLANE_LIKE: dec_core.DISK, CYLINDER_LIKE: dec_core.CYLINDER,
                    TORUS_FLAT: dec_core.TORUS}[profile.kind]
        triple = CompatibleTriple(profile)
        mesh, mass = dec_core.build_mesh(triple, weight, topology, *grid)
        basis = hodge_engine.harmonic_basis(mesh, mass)
        j_defect = hodge_engine.j_invariance_defect(basis, mesh, mass, triple)

    fixed = profile.kind == PLANE_LIKE
    reasons = []
    if not ok:
        reasons.append("no Hodge criterion certified")
    if j_defect is not None and j_defect > j_tol:
        reasons.append("J-hypothesis fails")
    if not fixed:
        reasons.append("no fixed points")
    if norm_verdict == "inconclusive":
        reasons.append("norm finiteness inconclusive")
    if reasons:
        summary = "partial: " + "; ".join(reasons)
        message = summary
    else:
        summary = "yes"
        message = f"{family} criteria satisfied"
    out.update({"family": family, "criteria": [r.as_dict() for r in rows], "j_invariance_defect": j_defect,
                "fixed_points": fixed, "pipeline_skipped": False, "summary": summary, "message": message})
    return out
