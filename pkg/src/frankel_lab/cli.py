"""Command-line front end.

Usage:
    frankel-lab frankel   --profile plane --weight gauss:1 --grid 128x64
    frankel-lab decompose --profile cylinder --weight gauss:1 --form xi
    frankel-lab check     --end conic:4 --weight poly:3
    frankel-lab check     --matrix cases.json
    frankel-lab sweep     --matrix sweep.json
    frankel-lab mesh-info --profile plane --grid 32x16

Exit codes: 0 Hamiltonian / success, 2 non-Hamiltonian, 3 indeterminate,
1 runtime failure, 64 bad configuration or usage.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import criteria_checker, dec_core, frankel_pipeline, hodge_engine, serialize
from .config import (
    CaseConfig,
    ConfigError,
    expand_matrix,
    load_config,
    load_json,
    parse_family,
    parse_grid,
    parse_r_max,
    parse_xi,
)
from .radial_geometry import CompatibleTriple, PLANE_LIKE

log = logging.getLogger("frankel_lab")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 64

CRITERIA_HEADER = ["criterion", "verdict", "witness", "r0", "R", "constants", "flags", "detail"]
MATRIX_HEADER = ["case_key"] + CRITERIA_HEADER
SWEEP_HEADER = [
    "case_key", "profile", "weight", "end", "status", "error", "norm",
    "troyanov", "troyanov_k", "troyanov_flags", "mckean",
    "AS.i", "AS.ii", "AS.ii_epsilon", "AS.ii_witness", "AS.iii", "AS.grad_exp",
    "GW.mass", "GW.ricci_hess", "GW.grad_infinity", "GW.ratio",
    "frankel_verdict", "rho", "summary",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _compact(obj) -> str:
    return json.dumps(serialize.decode_floats(json.loads(serialize.dumps(obj))), sort_keys=False,
                      separators=(",", ":"))


# -- configuration from flags ---------------------------------------------------


def _add_case_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON case file; flags override its fields")
    p.add_argument("--profile", help="profile family[:params], e.g. plane, sinh:2, decaying:1")
    p.add_argument("--weight", help="weight family[:params], e.g. none, gauss:1, poly:3, log:1")
    p.add_argument("--topology", choices=sorted(dec_core.BETTI1), help="defaults from the profile")
    p.add_argument("--grid", help="N_RxN_THETA, e.g. 128x64")
    p.add_argument("--r-max", dest="r_max", help="truncation radius or 'auto'")
    p.add_argument("--xi", help="generator: theta, theta1, theta2 or 'p,q'")
    p.add_argument("--tol-h", dest="tol_H", type=float, help="harmonic residual tolerance")
    p.add_argument("--spectral-threshold", type=float, help="relative null-space threshold")
    p.add_argument("--end", help="end model: cylindrical[:n], conic:n, fibered:k,l, qac:n[,c]")
    p.add_argument("--kappa1", type=float, help="Ricci lower bound -kappa1 for end models")
    p.add_argument("--kappa2", type=float, help="curvature operator upper bound for end models")
    p.add_argument("--out", help="output directory")


def config_from_args(args) -> CaseConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else CaseConfig()
    record = cfg.to_dict()
    if args.profile is not None:
        record["profile"] = args.profile
    elif args.end is not None and not args.config:
        record["profile"] = None
    for name in ("weight", "topology", "end", "kappa1", "kappa2", "tol_H", "spectral_threshold"):
        v = getattr(args, name, None)
        if v is not None:
            record[name] = v
    if args.grid is not None:
        record["n_r"], record["n_theta"] = parse_grid(args.grid)
    if args.r_max is not None:
        record["r_max"] = parse_r_max(args.r_max)
    if args.xi is not None:
        record["xi"] = parse_xi(args.xi)
    if args.out is not None:
        record["output_dir"] = args.out
    return CaseConfig.from_dict(record, where="flags")


def _objects(cfg: CaseConfig):
    profile = cfg.profile_obj()
    return CompatibleTriple(profile), cfg.weight_obj()


# -- criteria rows --------------------------------------------------------------


def case_criteria(cfg: CaseConfig) -> list:
    weight = cfg.weight_obj()
    profile = cfg.profile_obj() if cfg.profile is not None else None
    end = cfg.end_obj()
    on = cfg.criteria
    rows = []
    if weight.is_trivial:
        if profile is not None and profile.kind == PLANE_LIKE:
            if on["troyanov"]:
                rows.append(criteria_checker.troyanov_check(profile))
            if on["mckean"]:
                rows.append(criteria_checker.mckean_contrast(profile))
        return rows
    if end is None and profile is not None and profile.kind != "torus-flat":
        end = criteria_checker.builtin_end_for(profile)
    if end is None:
        return rows
    power = criteria_checker.weight_power(weight)
    if on["ahmed_stroock"] and power is not None:
        rows.extend(criteria_checker.ahmed_stroock_check(end, power[0], power[1],
                                                         kappa1=cfg.kappa1, kappa2=cfg.kappa2))
    if on["gong_wang"]:
        rows.extend(criteria_checker.gong_wang_check(weight, end=end, profile=profile,
                                                     ricci_lower=cfg.kappa1))
    return rows


def _criterion_row(rep) -> list:
    return [rep.criterion, rep.verdict, rep.witness, rep.r_range[0], rep.r_range[1],
            _compact(rep.constants), ";".join(rep.flags), rep.detail]


# -- subcommands ----------------------------------------------------------------


def cmd_frankel(cfg: CaseConfig) -> int:
    triple, weight = _objects(cfg)
    report = frankel_pipeline.run_frankel(
        triple, weight, cfg.resolved_topology(), cfg.n_r, cfg.n_theta, cfg.r_max,
        tol_H=cfg.tol_H, xi=cfg.xi, spectral_threshold=cfg.spectral_threshold)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    mesh, mass = dec_core.build_mesh(triple, weight, cfg.resolved_topology(), cfg.n_r, cfg.n_theta,
                                     report.mesh["r_max"])
    serialize.write_json(out / "frankel_report.json", {"config": cfg.to_dict(), **report.as_dict()})

    chi = report.step3_split.harmonic_part
    serialize.write_csv(out / "chi.csv", ["edge_id", "r_mid", "theta_mid", "chi"],
                        zip(range(mesh.n_edges), mesh.edge_mid_r, mesh.edge_mid_theta, chi.values))
    basis = hodge_engine.harmonic_basis(mesh, mass, rel_threshold=cfg.spectral_threshold)
    cols = [f"h{i}" for i in range(basis.dimension)]
    vecs = [b.values for b in basis.basis]
    serialize.write_csv(out / "harmonic_basis.csv", ["edge_id", "r_mid", "theta_mid"] + cols,
                        ([i, mesh.edge_mid_r[i], mesh.edge_mid_theta[i]] + [v[i] for v in vecs]
                         for i in range(mesh.n_edges)))
    if report.step4_momentum is not None:
        mu = report.step4_momentum.values
        p, q = cfg.xi
        exact = (p * triple.profile.momentum(mesh.vertex_r) if q == 0.0 and triple.profile.momentum
                 else np.full(mu.shape, np.nan))
        serialize.write_csv(out / "momentum.csv", ["vertex_id", "r", "theta", "mu", "mu_analytic"],
                            zip(range(mu.size), mesh.vertex_r, mesh.vertex_theta, mu, exact))
    print(f"{report.verdict}: rho={report.rho:.6g} tol_H={report.tol_H:g} "
          f"b1={report.harmonic['dimension']} -> {out}")
    return report.exit_code


def _form(mesh, triple, name: str, xi):
    if name == "xi":
        return frankel_pipeline.contraction(mesh, triple, xi)
    if name == "dr":
        return dec_core.sample_oneform(mesh, lambda r, t: 1.0 + 0.0 * r, lambda r, t: 0.0 * r)
    if name == "dtheta":
        return dec_core.sample_oneform(mesh, lambda r, t: 0.0 * r, lambda r, t: 1.0 + 0.0 * r)
    raise ConfigError("form", f"unknown form {name!r}")


def cmd_decompose(cfg: CaseConfig, form: str = "xi") -> int:
    triple, weight = _objects(cfg)
    mesh, mass = dec_core.build_mesh(triple, weight, cfg.resolved_topology(), cfg.n_r, cfg.n_theta, cfg.r_max)
    alpha = _form(mesh, triple, form, cfg.xi)
    split = hodge_engine.hodge_decompose(mesh, mass, alpha)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    serialize.write_json(out / "hodge_split.json", {"config": cfg.to_dict(), "form": form,
                                                    "mesh": mesh.describe(), **split.as_dict()})
    dec_core.write_cochain_csv(out / "potential.csv", split.potential, "phi")
    dec_core.write_cochain_csv(out / "exact.csv", split.exact_part, "exact")
    dec_core.write_cochain_csv(out / "harmonic.csv", split.harmonic_part, "harmonic")
    print(f"rho={split.rho:.6g} pythagoras={split.residuals['pythagoras']:.3g} -> {out}")
    return EXIT_OK


def cmd_check(cfg: CaseConfig) -> int:
    rows = case_criteria(cfg)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    serialize.write_csv(out / "criteria.csv", CRITERIA_HEADER, (_criterion_row(r) for r in rows))
    serialize.write_json(out / "criteria.json", {"config": cfg.to_dict(), "criteria": [r.as_dict() for r in rows]})
    for r in rows:
        w = "" if r.witness is None else f" witness r={r.witness:.4g}"
        print(f"{r.criterion:18s} {r.verdict}{w}")
    return EXIT_OK


def _threads() -> int:
    raw = os.environ.get("FRANKEL_LAB_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return max(1, min(8, os.cpu_count() or 1))


def _parallel(fn, cases: Sequence[CaseConfig]) -> list:
    if not cases:
        return []
    with ThreadPoolExecutor(max_workers=min(_threads(), len(cases))) as pool:
        return list(pool.map(fn, cases))


def cmd_check_matrix(cases: Sequence[CaseConfig], out: Path) -> int:
    def one(cfg):
        try:
            return cfg.key(), [_criterion_row(r) for r in case_criteria(cfg)]
        except Exception as exc:  # recorded in-row, the sweep continues
            return cfg.key(), [["error", "error", None, None, None, "", "", f"{type(exc).__name__}: {exc}"]]

    results = sorted(_parallel(one, cases), key=lambda kv: kv[0])
    out.mkdir(parents=True, exist_ok=True)
    serialize.write_csv(out / "criteria.csv", MATRIX_HEADER,
                        ([key] + row for key, rows in results for row in rows))
    print(f"{len(results)} cases -> {out / 'criteria.csv'}")
    return EXIT_OK


def sweep_row(cfg: CaseConfig, run_frankel: bool = False) -> list:
    row = dict.fromkeys(SWEEP_HEADER)
    row.update({"case_key": cfg.key(), "profile": cfg.profile, "weight": cfg.weight, "end": cfg.end})
    try:
        for rep in case_criteria(cfg):
            row[rep.criterion] = rep.verdict
            if rep.criterion == "troyanov":
                row["troyanov_k"] = rep.constants["k"]
                row["troyanov_flags"] = ";".join(rep.flags)
            if rep.criterion == "AS.ii":
                row["AS.ii_epsilon"] = rep.constants.get("epsilon")
                row["AS.ii_witness"] = rep.witness
        if cfg.profile is not None:
            profile, weight = cfg.profile_obj(), cfg.weight_obj()
            cert = criteria_checker.norm_certificate(profile, weight)
            row["norm"] = "finite" if cert is None else cert.verdict
            if run_frankel:
                dash = criteria_checker.hypothesis_dashboard(profile, weight, cfg.end_obj())
                row["summary"] = dash["summary"]
                if not dash["pipeline_skipped"]:
                    rep = frankel_pipeline.run_frankel(
                        CompatibleTriple(profile), weight, cfg.resolved_topology(), cfg.n_r, cfg.n_theta,
                        cfg.r_max, tol_H=cfg.tol_H, xi=cfg.xi, spectral_threshold=cfg.spectral_threshold)
                    row["frankel_verdict"] = rep.verdict
                    row["rho"] = rep.rho
        row["status"] = "ok"
    except Exception as exc:  # recorded in-row, the sweep continues
        row["status"] = "error"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return [row[c] for c in SWEEP_HEADER]


def cmd_sweep(cases: Sequence[CaseConfig], out: Path, run_frankel: bool = False) -> int:
    rows = sorted(_parallel(lambda c: sweep_row(c, run_frankel), cases), key=lambda r: r[0])
    out.mkdir(parents=True, exist_ok=True)
    serialize.write_csv(out / "sweep.csv", SWEEP_HEADER, rows)
    print(f"{len(rows)} cases -> {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_mesh_info(cfg: CaseConfig, export: Optional[str] = None) -> int:
    triple, weight = _objects(cfg)
    mesh, mass = dec_core.build_mesh(triple, weight, cfg.resolved_topology(), cfg.n_r, cfg.n_theta, cfg.r_max)
    info = {**mesh.describe(), "tail_estimate": mass.tail_estimate,
            "betti1_expected": dec_core.BETTI1[mesh.topology], "warnings": list(mass.warnings)}
    print(serialize.dumps(info))
    if export:
        serialize.write_json(Path(export), dec_core.mesh_to_json(mesh, mass))
    return EXIT_OK


# -- entry point ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="frankel-lab", description="Hamiltonian tests for circle actions on "
                                                 "weighted surfaces of revolution.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("frankel", help="run the Hamiltonian test and recover the momentum map")
    _add_case_flags(p)
    p = sub.add_parser("decompose", help="weighted Hodge split of a sampled 1-form")
    _add_case_flags(p)
    p.add_argument("--form", default="xi", choices=["xi", "dr", "dtheta"])
    p = sub.add_parser("check", help="evaluate the sufficient criteria")
    _add_case_flags(p)
    p.add_argument("--matrix", help="JSON matrix of cases; one CSV row per (case, criterion)")
    p = sub.add_parser("sweep", help="one summary row per case of a matrix")
    _add_case_flags(p)
    p.add_argument("--matrix", required=True, help="JSON matrix of cases")
    p.add_argument("--with-frankel", action="store_true", help="also run the mesh pipeline per case")
    p = sub.add_parser("mesh-info", help="print mesh statistics")
    _add_case_flags(p)
    p.add_argument("--export", help="write the mesh and weights as JSON")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"frankel-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        if args.command in ("check", "sweep") and getattr(args, "matrix", None):
            cases = expand_matrix(load_json(args.matrix), cfg)
            out = Path(cfg.output_dir)
            if args.command == "check":
                return cmd_check_matrix(cases, out)
            return cmd_sweep(cases, out, run_frankel=args.with_frankel)
        if args.command == "frankel":
            return cmd_frankel(cfg)
        if args.command == "decompose":
            return cmd_decompose(cfg, args.form)
        if args.command == "check":
            return cmd_check(cfg)
        return cmd_mesh_info(cfg, args.export)
    except ConfigError as exc:
        print(f"frankel-lab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, hodge_engine.NotClosedError) as exc:
        print(f"frankel-lab: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
