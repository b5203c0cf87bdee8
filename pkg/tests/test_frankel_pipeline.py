import dataclasses
import types

import numpy as np
import pytest

from frankel_lab import dec_core as dc
from frankel_lab import frankel_pipeline as fp
from frankel_lab import hodge_engine as he
from frankel_lab import radial_geometry as rg
from frankel_lab.dec_core import Cochain


def _triple(family, params=()):
    return rg.CompatibleTriple(rg.make_profile(family, params))


GAUSS = rg.make_weight("gauss", [1.0])
NONE = rg.make_weight()


@pytest.fixture(scope="module")
def plane_report():
    return fp.run_frankel(_triple("plane"), GAUSS, "disk", 64, 32)


def test_plane_is_hamiltonian_with_anchored_momentum(plane_report):
    rep = plane_report
    assert rep.verdict == fp.HAMILTONIAN and rep.exit_code == 0
    assert rep.fixed_point_present
    assert rep.step4_momentum.values[0] == 0.0
    assert rep.momentum_error["relative_l2"] <= 1e-2
    assert rep.momentum_error["rotation_defect"] <= 1e-12
    assert rep.harmonic["dimension"] == 0
    assert rep.step2_pairing["per_vector"] == []
    assert rep.xi_norm["verdict"] == "finite"
    assert rep.xi_norm["discrete"] == pytest.approx(rep.xi_norm["quadrature"], rel=5e-3)


def test_momentum_is_linear_in_xi(plane_report):
    rep2 = fp.run_frankel(_triple("plane"), GAUSS, "disk", 64, 32, xi=(2.5, 0.0))
    np.testing.assert_allclose(rep2.step4_momentum.values, 2.5 * plane_report.step4_momentum.values,
                               rtol=1e-12, atol=1e-12)


def test_residual_shrinks_or_stays_small_under_refinement():
    rhos = [fp.run_frankel(_triple("decaying", [1.0]), GAUSS, "disk", n, n // 2).rho for n in (16, 32, 64)]
    assert all(r <= 1e-2 / 3 for r in rhos)


def test_torus_counterexample():
    rep = fp.run_frankel(_triple("torus"), NONE, "torus", 16, 16, xi=(0.0, 1.0))
    assert rep.verdict == fp.NON_HAMILTONIAN and rep.exit_code == 2
    assert rep.rho >= 0.9
    assert rep.step4_momentum is None and rep.momentum_error is None
    assert not rep.fixed_point_present
    assert rep.j_invariance_defect <= 1e-6


def test_cylinder_hamiltonian_without_fixed_points():
    rep = fp.run_frankel(_triple("cylinder"), GAUSS, "cylinder", 32, 16)
    assert rep.verdict == fp.HAMILTONIAN
    assert rep.momentum_error["relative_l2"] <= 1e-8
    assert rep.j_invariance_defect >= 0.5
    (row,) = rep.step2_pairing["per_vector"]
    assert row["variance"] <= 1e-20 and abs(row["mean"]) > 0.1
    assert row["value_at_fixed_point"] is None
    assert "constant but not forced to vanish" in rep.step2_pairing["note"]


def test_indeterminate_band():
    rep = fp.run_frankel(_triple("torus"), NONE, "torus", 8, 8, xi=(0.0, 1.0), tol_H=0.5)
    assert rep.verdict == fp.INDETERMINATE and rep.exit_code == 3
    assert rep.step4_momentum is None
    assert any("indeterminate" in w for w in rep.warnings)
    with pytest.raises(ValueError):
        fp.run_frankel(_triple("torus"), NONE, "torus", 8, 8, tol_H=0.0)


@pytest.mark.parametrize("rho,tol,verdict", [(0.0, 1e-2, fp.HAMILTONIAN), (3.4e-3, 1e-2, fp.INDETERMINATE),
                                             (3.0e-2, 1e-2, fp.INDETERMINATE), (3.1e-2, 1e-2, fp.NON_HAMILTONIAN),
                                             (1.0, 1e-2, fp.NON_HAMILTONIAN)])
def test_classify(rho, tol, verdict):
    assert fp.classify(rho, tol) == verdict


def test_radial_generator_needs_torus():
    with pytest.raises(ValueError):
        fp.run_frankel(_triple("plane"), GAUSS, "disk", 8, 8, xi=(0.0, 1.0))


def test_step1_exact_zero_for_shift_invariant_form():
    mesh, mass = dc.build_mesh(_triple("torus"), NONE, "torus", 8, 8)
    c = dc.sample_oneform(mesh, lambda r, t: 1 + 0 * r, lambda r, t: 0 * r)
    res = fp.step1_invariance(types.SimpleNamespace(basis=[c]), mesh, mass, axes=("theta", "r"))
    assert res["max"] == 0.0


def test_step1_weighted_cylinder_basis():
    mesh, mass = dc.build_mesh(_triple("cylinder"), GAUSS, "cylinder", 32, 16)
    basis = he.harmonic_basis(mesh, mass)
    assert fp.step1_invariance(basis, mesh, mass)["max"] <= 1e-10


@pytest.mark.parametrize("eps", [1e-6, 1e-4, 1e-2])
def test_step1_detects_injected_noise(eps):
    mesh, mass = dc.build_mesh(_triple("cylinder"), GAUSS, "cylinder", 32, 16)
    chi = he.harmonic_basis(mesh, mass).basis[0]
    noise = np.cos(3 * mesh.edge_mid_theta) * chi.values
    noisy = chi + eps * Cochain(1, noise) * (1.0 / dc.norm(mass, Cochain(1, noise)))
    defect = fp.step1_invariance(types.SimpleNamespace(basis=[noisy]), mesh, mass)["max"]
    assert 0.1 * eps <= defect <= 10 * eps


def test_step1_rejects_asymmetric_weights():
    mesh, mass = dc.build_mesh(_triple("cylinder"), GAUSS, "cylinder", 8, 8)
    m1 = mass.m1.copy()
    m1[mesh.ang[0, 0]] *= 1.5
    skewed = dataclasses.replace(mass, m1=m1)
    with pytest.raises(ValueError, match="not invariant"):
        fp.step1_invariance(types.SimpleNamespace(basis=[]), mesh, skewed)


def test_step2_on_torus_pairs_generators():
    mesh, mass = dc.build_mesh(_triple("torus"), NONE, "torus", 8, 8)
    dth2 = dc.sample_oneform(mesh, lambda r, t: 0 * r, lambda r, t: 1 + 0 * r)
    dth1 = dc.sample_oneform(mesh, lambda r, t: 1 + 0 * r, lambda r, t: 0 * r)
    xi = (0.0, 1.0)
    xb = fp.xi_flat(mesh, _triple("torus"), xi)
    rep = fp.step2_fixed_point_pairing(types.SimpleNamespace(basis=[dth2, dth1]), mesh, mass, xb, xi)
    a, b = rep["per_vector"]
    assert a["mean"] == 0.0 and a["pairing"] == 0.0
    assert b["mean"] == pytest.approx(1.0) and b["variance"] <= 1e-28
    assert b["pairing"] == pytest.approx(2 * np.pi * 2 * np.pi)
    assert not rep["fixed_point_present"]


def test_contraction_and_flat_samples():
    mesh, _ = dc.build_mesh(_triple("plane"), GAUSS, "disk", 8, 8)
    alpha = fp.contraction(mesh, _triple("plane"))
    np.testing.assert_allclose(alpha.values[mesh.rad], -mesh.edge_mid_r[mesh.rad] * (mesh.rad_r1 - mesh.rad_r0)[:, None])
    assert np.all(alpha.values[mesh.ang] == 0.0)
    xb = fp.xi_flat(mesh, _triple("plane"))
    np.testing.assert_allclose(xb.values[mesh.ang], mesh.edge_mid_r[mesh.ang] ** 2 * mesh.dtheta)


def test_momentum_error_oracle_is_second_order():
    errs = []
    for n in (16, 32, 64):
        mesh, mass = dc.build_mesh(_triple("plane"), GAUSS, "disk", n, n)
        mu = Cochain(0, -0.5 * mesh.vertex_r ** 2)
        errs.append(fp.momentum_l2_error(mesh, mass, mu, lambda r: -0.5 * r ** 2))
    orders = np.log2(np.array(errs[:-1]) / errs[1:])
    np.testing.assert_allclose(orders, 2.0, atol=0.05)
    # a constant offset is not an error on fixed-point-free meshes
    mesh, mass = dc.build_mesh(_triple("cylinder"), GAUSS, "cylinder", 16, 8)
    mu = Cochain(0, -mesh.vertex_r + 3.0)
    assert fp.momentum_l2_error(mesh, mass, mu, lambda r: -r) <= 1e-12


def test_unweighted_plane_norm_is_flagged_infinite():
    mesh, mass = dc.build_mesh(_triple("plane"), NONE, "disk", 8, 8, 5.0)
    alpha = fp.contraction(mesh, _triple("plane"))
    diag = fp.xi_norm_diagnostics(_triple("plane"), NONE, mesh, mass, alpha)
    assert diag["verdict"] == "infinite"


def test_report_serializes():
    from frankel_lab import serialize
    rep = fp.run_frankel(_triple("torus"), NONE, "torus", 8, 8)
    text = serialize.dumps(rep.as_dict())
    assert '"verdict"' in text and text == serialize.dumps(rep.as_dict())
