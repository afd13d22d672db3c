"""Sharp operators: linear relations, mimetic cubical complexes and their spectra.

Modules:

- ``linrel``: dense linear-relation calculus (adjoints, reduced and sharp operators)
- ``domain``, ``cubical``: voxel domains and their cubical cochain complexes
- ``torus``, ``projector``, ``lanczos``, ``spectra``: curl# and div#grad# spectra
- ``evolution``: heat and wave equations by eigenexpansion
- ``verify``, ``cli``: invariant suites and the ``sharpspec`` command
"""
from .domain import DomainSpec, VoxelDomain, voxelize
from .results import Check, EigResult, Report

__version__ = "0.1.0"

__all__ = ["Check", "DomainSpec", "EigResult", "Report", "VoxelDomain", "voxelize", "__version__"]
