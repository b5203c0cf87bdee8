"""Discrete weighted Hodge theory for circle actions on surfaces of revolution."""

from .radial_geometry import CompatibleTriple, Profile, WeightSpec, make_profile, make_weight
from .dec_core import Cochain, MeshComplex, WeightedMass, build_mesh
from .hodge_engine import HarmonicBasis, HodgeSplit, harmonic_basis, hodge_decompose
from .frankel_pipeline import FrankelReport, run_frankel
from .criteria_checker import CriterionReport, EndModel, hypothesis_dashboard
from .config import CaseConfig

__version__ = "0.1.0"

__all__ = [
    "CaseConfig", "Cochain", "CompatibleTriple", "CriterionReport", "EndModel", "FrankelReport",
    "HarmonicBasis", "HodgeSplit", "MeshComplex", "Profile", "WeightSpec", "WeightedMass",
    "build_mesh", "harmonic_basis", "hodge_decompose", "hypothesis_dashboard", "make_profile",
    "make_weight", "run_frankel",
]
