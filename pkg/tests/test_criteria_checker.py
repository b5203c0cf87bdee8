import numpy as np
import pytest
from scipy import integrate

from frankel_lab import criteria_checker as cc
from frankel_lab import radial_geometry as rg

ENDS = {
    "cylindrical": cc.EndModel.cylindrical(2),
    "conic": cc.EndModel.conic(4),
    "fibered": cc.EndModel.fibered(2, 1),
    "qac": cc.EndModel.qac(6),
}


def _row(rows, name):
    (hit,) = [r for r in rows if r.criterion == name]
    return hit


def _integral_oracle(s):
    # int_0^inf (r (1+r^2)^-s)^3 dr converges iff 3 - 6s < -1, i.e. s > 2/3
    return s > 2.0 / 3.0


# -- decay criterion ------------------------------------------------------------


@pytest.mark.parametrize("s", [0.4, 0.5, 0.7, 1.0, 2.0])
def test_decay_exponent_and_consistency(s):
    rep = cc.troyanov_check(rg.make_profile("decaying", [s]))
    # the profile decays like r^(1-2s)
    assert rep.constants["k"] == pytest.approx(2 * s - 1, abs=2e-3)
    assert rep.passed == _integral_oracle(s)
    assert (rep.constants["integral_verdict"] == "convergent") == _integral_oracle(s)
    assert rep.constants["consistent"]
    assert "boundary" not in rep.flags


@pytest.mark.parametrize("s", [2 / 3 - 0.01, 2 / 3, 2 / 3 + 0.01])
def test_boundary_exponent_is_flagged(s):
    rep = cc.troyanov_check(rg.make_profile("decaying", [s]))
    assert "boundary" in rep.flags


def test_decay_fit_constant_bounds_profile():
    prof = rg.make_profile("decaying", [1.0])
    rep = cc.troyanov_check(prof)
    r = np.geomspace(1, 1e4, 400)
    assert np.all(prof.f(r) <= rep.constants["C"] * r ** -rep.constants["k"] * (1 + 1e-12))


def test_plane_fails_decay_with_witness():
    rep = cc.troyanov_check(rg.make_profile("plane"))
    assert rep.verdict == cc.ASYMPTOTIC_FAIL and rep.witness is not None
    assert rep.constants["k"] == pytest.approx(-1.0, abs=1e-9)
    assert rep.constants["consistent"]


def test_sinh_decay_range_is_truncated():
    rep = cc.troyanov_check(rg.make_profile("sinh", [1.0]))
    assert rep.failed and "range-truncated" in rep.flags


def test_decay_rejects_non_plane_profiles():
    with pytest.raises(ValueError):
        cc.troyanov_check(rg.make_profile("cylinder"))


# -- curvature contrast ---------------------------------------------------------


@pytest.mark.parametrize("lam", [1.0, 2.0])
def test_curvature_contrast_on_hyperbolic_profiles(lam):
    rep = cc.mckean_contrast(rg.make_profile("sinh", [lam]))
    assert rep.verdict == cc.INCOMPATIBLE
    assert rep.constants["K_max"] == pytest.approx(-lam * lam, abs=1e-10)
    assert rep.constants["growth_rate"] == pytest.approx(lam, rel=1e-6)
    cert = rep.constants["integral_certificate"]
    assert rep.constants["integral_verdict"] == "divergent"
    assert len(cert["ratios"]) >= 3 and all(x > 1.5 for x in cert["ratios"])


def test_curvature_contrast_plane_fails():
    rep = cc.mckean_contrast(rg.make_profile("plane"))
    assert rep.verdict == cc.FAIL and rep.witness == 0.0
    assert "K <= -1 fails" in rep.detail


# -- weighted criteria, U = c r^a ----------------------------------------------


@pytest.mark.parametrize("end", list(ENDS))
@pytest.mark.parametrize("a", [1.5, 2.0])
def test_condition_ii_fails_for_small_exponents(end, a):
    row = _row(cc.ahmed_stroock_check(ENDS[end], a), "AS.ii")
    assert row.failed and row.witness is not None and row.witness > 0


@pytest.mark.parametrize("end", list(ENDS))
@pytest.mark.parametrize("a", [2.5, 3.0, 4.0])
def test_condition_ii_epsilon_tracks_exponent_law(end, a):
    row = _row(cc.ahmed_stroock_check(ENDS[end], a), "AS.ii")
    assert row.passed
    assert row.constants["epsilon"] == pytest.approx((a - 2) / a, rel=0.1)
    assert row.constants["epsilon"] <= row.constants["epsilon_bound"] + 1e-12


def test_condition_ii_witness_is_a_crossing():
    # eps U^(1+eps) = 1 + |U'|^2 at the witness for a = 2, c = 1, eps = 0.01
    row = _row(cc.ahmed_stroock_check(ENDS["conic"], 2.0), "AS.ii")
    w, eps = row.witness, row.constants["epsilon_tested"]
    assert eps * w ** (2 * (1 + eps)) == pytest.approx(1 + 4 * w * w, rel=1e-8)


def test_cylindrical_cubic_weight_passes_all():
    rows = cc.ahmed_stroock_check(ENDS["cylindrical"], 3.0)
    assert all(r.passed for r in rows)
    assert _row(rows, "AS.curvature").constants["source"] == "model default (flat cross-section)"


def test_laplacian_constant_matches_closed_form():
    # conic n: Delta U = a(a-1) r^(a-2) + a(n-1) r^(a-2); sup of Delta U / (1 + r^a) on [1, inf)
    a, n = 2.0, 4
    row = _row(cc.ahmed_stroock_check(cc.EndModel.conic(n), a), "AS.i")
    r = np.geomspace(1, 2e3, 20000)
    oracle = np.max((a * (a - 1) + a * (n - 1)) * r ** (a - 2) / (1 + r ** a))
    assert row.constants["C"] == pytest.approx(oracle, rel=1e-3)


def test_fibered_matches_conic_of_same_growth():
    # fibered k=3, l=0 has Delta r = 3/r like a 4-dimensional cone
    a = _row(cc.ahmed_stroock_check(cc.EndModel.fibered(3, 0), 3.0), "AS.i").constants
    b = _row(cc.ahmed_stroock_check(cc.EndModel.conic(4), 3.0), "AS.i").constants
    assert a["C"] == pytest.approx(b["C"], rel=1e-12)


def test_gradient_exponential_sup_is_attained():
    a, c, theta = 3.0, 1.0, 0.5
    row = _row(cc.ahmed_stroock_check(ENDS["conic"], a, c, theta=theta), "AS.grad_exp")
    r = np.linspace(1, 5, 200001)
    g = (c * a) ** 2 * r ** (2 * a - 2) * np.exp(-theta * c * r ** a)
    assert row.constants["C"] == pytest.approx(np.max(g), rel=1e-6)


def test_supplied_curvature_is_recorded():
    row = _row(cc.ahmed_stroock_check(ENDS["conic"], 3.0, kappa1=0.5), "AS.curvature")
    assert row.constants == {"kappa1": 0.5, "kappa2": 0.0, "source": "supplied"}


@pytest.mark.parametrize("kw", [{"a": 0.0}, {"a": -1.0}, {"a": 3.0, "c": 0.0}, {"a": 3.0, "theta": 1.0}])
def test_weighted_input_validation(kw):
    with pytest.raises(ValueError):
        cc.ahmed_stroock_check(ENDS["conic"], **kw)


def test_plane_gaussian_passes_second_family():
    rows = cc.gong_wang_check(rg.make_weight("gauss", [1.0]), profile=rg.make_profile("plane"))
    assert [r.criterion for r in rows] == ["GW.mass", "GW.ricci_hess", "GW.bounded_sum",
                                            "GW.grad_infinity", "GW.ratio"]
    assert all(r.passed for r in rows)


def test_mass_constant_for_plane_gaussian():
    rows = cc.gong_wang_check(rg.make_weight("gauss", [1.0]), end=cc.EndModel.conic(2),
                              profile=rg.make_profile("plane"))
    # int_0^inf r e^{-r^2} dr = 1/2 (per unit angle)
    assert _row(rows, "GW.mass").constants["mass"] == pytest.approx(0.5, rel=1e-8)


def test_linear_weight_gradient_does_not_blow_up():
    rows = cc.gong_wang_check(rg.make_weight("poly", [1.0]), profile=rg.make_profile("plane"))
    row = _row(rows, "GW.grad_infinity")
    assert row.verdict == cc.FAIL and row.witness is not None


def test_log_weight_fails_with_witness():
    rows = cc.gong_wang_check(rg.make_weight("log", [1.0]), profile=rg.make_profile("plane"))
    bad = [r for r in rows if r.failed]
    assert bad and all(r.witness is not None for r in bad)
    assert _row(rows, "GW.grad_infinity").failed


def test_trivial_weight_rejected():
    with pytest.raises(ValueError):
        cc.gong_wang_check(rg.make_weight(), profile=rg.make_profile("plane"))


@pytest.mark.parametrize("a", [2.5, 3.0, 4.0])
@pytest.mark.parametrize("end", list(ENDS))
def test_pass_on_range_survives_doubling(a, end):
    # a pass certified on [r0, R] must remain a pass on [r0, 2R]
    short = cc.ahmed_stroock_check(ENDS[end], a, r_range=(1.0, 500.0))
    long = cc.ahmed_stroock_check(ENDS[end], a, r_range=(1.0, 1000.0))
    for s, l in zip(short, long):
        if s.passed:
            assert l.passed, s.criterion


def test_weight_power():
    assert cc.weight_power(rg.make_weight("gauss", [2.0])) == (2.0, 2.0)
    assert cc.weight_power(rg.make_weight("poly", [3.0])) == (3.0, 1.0)
    assert cc.weight_power(rg.make_weight("log", [1.0])) is None


# -- end models -----------------------------------------------------------------


def test_parse_end():
    assert cc.parse_end("conic:4").params == (4,)
    assert cc.parse_end("cylindrical").dimension == 2
    assert cc.parse_end("fibered:3,0").dimension == 4
    assert cc.parse_end("qac:5,2.5").params == (5, 2.5)
    for bad in ("conic", "fibered:1", "nope:2", "conic:1", "fibered:0,1"):
        with pytest.raises(ValueError):
            cc.parse_end(bad)


def test_surface_end_curvature_bounds():
    end = cc.EndModel.from_profile(rg.make_profile("sinh", [1.0]), r_range=(1.0, 10.0))
    assert end.kind == "surface"
    assert end.curvature == pytest.approx((1.0, 0.0), abs=1e-10)
    np.testing.assert_allclose(end.laplacian_r(np.array([2.0])), 1 / np.tanh(2.0))
    with pytest.raises(ValueError):
        cc.EndModel.from_profile(rg.make_profile("torus"))


def test_builtin_end():
    assert cc.builtin_end_for(rg.make_profile("plane")).label() == "conic:2"
    assert cc.builtin_end_for(rg.make_profile("cylinder")).label() == "cylindrical:2"


def test_conic_volume_density_integrates():
    end = cc.EndModel.conic(3)
    val = integrate.quad(lambda r: float(end.volume_density(r)), 0, 2)[0]
    assert val == pytest.approx(8 / 3)


# -- reports and dashboard ------------------------------------------------------


def test_report_invariants():
    with pytest.raises(ValueError):
        cc.CriterionReport("x", cc.FAIL, {"a": 1})
    with pytest.raises(ValueError):
        cc.CriterionReport("x", cc.PASS, {})
    rep = cc.CriterionReport("x", cc.ASYMPTOTIC_FAIL, {}, (1, 2), witness=2.0)
    assert rep.failed and not rep.passed
    assert rep.as_dict()["r_range"] == [1, 2]


def test_dashboard_plane_gaussian_yes():
    dash = cc.hypothesis_dashboard(rg.make_profile("plane"), rg.make_weight("gauss", [1.0]))
    assert dash["summary"] == "yes"
    assert dash["message"] == "weighted criteria satisfied"
    assert dash["fixed_points"] and not dash["pipeline_skipped"]


def test_dashboard_unweighted_plane_skips_pipeline():
    dash = cc.hypothesis_dashboard(rg.make_profile("plane"), rg.make_weight())
    assert dash["summary"] == "no" and dash["pipeline_skipped"]


def test_dashboard_decaying_unweighted():
    dash = cc.hypothesis_dashboard(rg.make_profile("decaying", [1.0]), rg.make_weight())
    assert dash["summary"] == "yes" and dash["family"] == "unweighted"


def test_dashboard_cylinder_reports_missing_hypotheses():
    dash = cc.hypothesis_dashboard(rg.make_profile("cylinder"), rg.make_weight("gauss", [1.0]),
                                   grid=(16, 8, "auto"))
    assert dash["summary"].startswith("partial: ")
    assert "J-hypothesis fails" in dash["summary"]
    assert "no fixed points" in dash["summary"]
    assert dash["j_invariance_defect"] >= 0.5


def test_dashboard_torus():
    dash = cc.hypothesis_dashboard(rg.make_profile("torus"), rg.make_weight(), grid=(8, 8, "auto"))
    assert dash["family"] == "compact"
    assert dash["j_invariance_defect"] <= 1e-6
    assert dash["summary"] == "partial: no fixed points"
