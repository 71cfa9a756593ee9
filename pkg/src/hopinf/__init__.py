"""Hamiltonian operator inference for canonical Hamiltonian PDE models.

Full-order models, symplectic time integration, cotangent-lift bases,
symmetric-constrained operator learning and reduced-model diagnostics.
"""

from .basis import CotangentLiftBasis, cotangent_lift, lift, project
from .inference import (ReducedOperators, extract_subrom, infer, intrusive_project,
                        solve_symmetric_ls, standard_opinf)
from .integrator import FieldHandle, NewtonOptions, Trajectory, integrate, midpoint_step
from .models import FomModel, ModelKind, ModelSpec, StateSplit, build_model
from .rom import HamiltonianRom

__all__ = [
    "CotangentLiftBasis", "FieldHandle", "FomModel", "HamiltonianRom", "ModelKind",
    "ModelSpec", "NewtonOptions", "ReducedOperators", "StateSplit", "Trajectory",
    "build_model", "cotangent_lift", "extract_subrom", "infer", "integrate",
    "intrusive_project", "lift", "midpoint_step", "project", "solve_symmetric_ls",
    "standard_opinf",
]
