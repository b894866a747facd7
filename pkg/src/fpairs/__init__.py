"""Exact (f0, f1) toolkit for convex polytopes: hulls, face lattices,
constructions with transition laws, a feasibility oracle and a witness planner."""

from .geometry import VPolytope, facet_enumeration
from .lattice import FPair, FaceLattice, build_face_lattice, fpair, polar_dual
from .constructions import Recipe, execute, predict, recipe, step
from .oracle import Verdict, feasible
from .planner import CertifiedWitness, NoPlanFound, certify, construct, plan, table

__all__ = [
    "VPolytope", "facet_enumeration",
    "FPair", "FaceLattice", "build_face_lattice", "fpair", "polar_dual",
    "Recipe", "execute", "predict", "recipe", "step",
    "Verdict", "feasible",
    "CertifiedWitness", "NoPlanFound", "certify", "construct", "plan", "table",
]
