"""Central numerical tolerance settings.

All structural identities (antisymmetry, Fourier round trips, exact algebra)
are checked against ``structural``; eigenvalue-level statements (purity,
spectral bounds) against ``spectral``.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    structural: float = 1e-10
    spectral: float = 1e-8
    # maximum admissible relative symmetric part of an "antisymmetric" input
    antisymmetry_input: float = 1e-8
    # relative floor separating the structural kernel from slow modes
    adr_relative: float = 1e-8
    adr_absolute: float = 1e-10


DEFAULT_TOL = Tolerances()
