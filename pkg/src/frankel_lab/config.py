"""Case configuration: flag/JSON parsing, validation and round-tripping."""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Union

from . import dec_core
from .radial_geometry import CYLINDER_LIKE, PLANE_LIKE, TORUS_FLAT, make_profile, make_weight

DEFAULT_CRITERIA = {"troyanov": True, "mckean": True, "ahmed_stroock": True, "gong_wang": True}

_GRID_RE = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*$")
_XI_NAMES = {"theta": [1.0, 0.0], "theta2": [1.0, 0.0], "theta1": [0.0, 1.0]}


class ConfigError(ValueError):
    """Invalid configuration; ``where`` names the field or file position."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where
        self.message = message


def parse_family(spec: str, what: str) -> tuple[str, list]:
    """``"decaying:1.0"`` -> ``("decaying", [1.0])``."""
    family, _, rest = str(spec).partition(":")
    try:
        params = [float(p) for p in rest.split(",")] if rest.strip() else []
    except ValueError:
        raise ConfigError(what, f"bad parameters in {spec!r}") from None
    return family.strip(), params


def parse_grid(spec: str) -> tuple[int, int]:
    m = _GRID_RE.match(str(spec))
    if not m:
        raise ConfigError("grid", f"expected N_RxN_THETA like 128x64, got {spec!r}")
    return int(m.group(1)), int(m.group(2))


def parse_xi(spec: str) -> list:
    if spec in _XI_NAMES:
        return list(_XI_NAMES[spec])
    try:
        p, q = (float(x) for x in spec.split(","))
    except ValueError:
        raise ConfigError("xi", f"expected theta, theta1, theta2 or 'p,q', got {spec!r}") from None
    return [p, q]


def parse_r_max(spec) -> Union[float, str]:
    if spec == "auto":
        return "auto"
    try:
        return float(spec)
    except (TypeError, ValueError):
        raise ConfigError("r_max", f"expected a number or 'auto', got {spec!r}") from None


_TOPOLOGY_FOR = {PLANE_LIKE: dec_core.DISK, CYLINDER_LIKE: dec_core.CYLINDER, TORUS_FLAT: dec_core.TORUS}


@dataclass
class CaseConfig:
    profile: Optional[str] = "plane"
    weight: str = "none"
    topology: Optional[str] = None
    n_r: int = 64
    n_theta: int = 32
    r_max: Union[float, str] = "auto"
    tol_H: float = 1e-2
    spectral_threshold: float = 1e-10
    xi: list = field(default_factory=lambda: [1.0, 0.0])
    end: Optional[str] = None
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    criteria: dict = field(default_factory=lambda: dict(DEFAULT_CRITERIA))
    output_dir: str = "frankel_out"

    def validate(self) -> "CaseConfig":
        if self.profile is not None:
            fam, params = parse_family(self.profile, "profile")
            try:
                prof = make_profile(fam, params)
            except ValueError as exc:
                raise ConfigError("profile", str(exc)) from None
            expected = _TOPOLOGY_FOR[prof.kind]
            if self.topology is not None and self.topology != expected:
                raise ConfigError("topology", f"profile {fam!r} lives on a {expected}, not {self.topology}")
        elif self.topology is not None and self.topology not in dec_core.BETTI1:
            raise ConfigError("topology", f"unknown topology {self.topology!r}")
        fam, params = parse_family(self.weight, "weight")
        try:
            make_weight(fam, params)
        except ValueError as exc:
            raise ConfigError("weight", str(exc)) from None
        if self.end is not None:
            from .criteria_checker import parse_end
            try:
                parse_end(self.end)
            except ValueError as exc:
                raise ConfigError("end", str(exc)) from None
        for name in ("n_r", "n_theta"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 2:
                raise ConfigError(name, f"expected an integer >= 2, got {v!r}")
        if self.r_max != "auto":
            if isinstance(self.r_max, bool) or not isinstance(self.r_max, (int, float)) or self.r_max <= 0:
                raise ConfigError("r_max", f"expected a positive number or 'auto', got {self.r_max!r}")
            self.r_max = float(self.r_max)
        for name in ("tol_H", "spectral_threshold"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ConfigError(name, f"tolerances must be positive, got {v!r}")
            setattr(self, name, float(v))
        if not (isinstance(self.xi, list) and len(self.xi) == 2):
            raise ConfigError("xi", f"expected two components, got {self.xi!r}")
        self.xi = [float(x) for x in self.xi]
        unknown = set(self.criteria) - set(DEFAULT_CRITERIA)
        if unknown:
            raise ConfigError("criteria", f"unknown toggles {sorted(unknown)}")
        self.criteria = {**DEFAULT_CRITERIA, **{k: bool(v) for k, v in self.criteria.items()}}
        return self

    # -- derived objects -----------------------------------------------------

    def profile_obj(self):
        return make_profile(*parse_family(self.profile or "plane", "profile"))

    def weight_obj(self):
        return make_weight(*parse_family(self.weight, "weight"))

    def end_obj(self):
        if self.end is None:
            return None
        from .criteria_checker import parse_end
        return parse_end(self.end)

    def resolved_topology(self) -> str:
        return self.topology or _TOPOLOGY_FOR[self.profile_obj().kind]

    def key(self) -> str:
        return "|".join([self.profile or "-", self.weight, self.end or "-", f"{self.n_r}x{self.n_theta}"])

    # -- serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, record: dict, where: str = "config") -> "CaseConfig":
        if not isinstance(record, dict):
            raise ConfigError(where, "expected a JSON object")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(record) - names)
        if unknown:
            raise ConfigError(f"{where}.{unknown[0]}", "unknown field")
        try:
            return cls(**record).validate()
        except ConfigError as exc:
            raise ConfigError(f"{where}.{exc.where}", exc.message) from None


def load_json(path: Union[str, Path]):
    """Read a JSON file, reporting syntax errors with line and column."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(str(path), exc.strerror or str(exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def load_config(path: Union[str, Path]) -> CaseConfig:
    return CaseConfig.from_dict(load_json(path), where=str(path))


def expand_matrix(record: dict, base: Optional[CaseConfig] = None) -> list:
    """Cases of a sweep file: an explicit ``cases`` list, or the product of
    ``profiles`` x ``weights`` x ``ends`` over a ``base`` config."""
    if not isinstance(record, dict):
        raise ConfigError("matrix", "expected a JSON object")
    base_dict = (base or CaseConfig()).to_dict()
    base_dict.update(record.get("base", {}))
    if "cases" in record:
        return [CaseConfig.from_dict({**base_dict, **c}, where=f"cases[{i}]")
                for i, c in enumerate(record["cases"])]
    profiles = record.get("profiles", [base_dict["profile"]])
    weights = record.get("weights", [base_dict["weight"]])
    ends = record.get("ends", [base_dict["end"]])
    out = []
    for p in profiles:
        for w in weights:
            for e in ends:
                out.append(CaseConfig.from_dict({**base_dict, "profile": p, "weight": w, "end": e},
                                                where=f"matrix[{p}|{w}|{e}]"))
    return out
