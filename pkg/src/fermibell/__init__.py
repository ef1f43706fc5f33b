"""Entanglement and Bell-violation analysis for fermion pairs and distinguishable pairs."""

from .bell import (
    BellCertificate,
    ChshConfiguration,
    PauliTriplet,
    chsh_value,
    correlation_distinguishable,
    correlation_pi,
    gisin_distinguishable,
    map_to_distinguishable,
    optimize_chsh_pi,
    eta4_angles,
    pauli_triplet_on,
    pipeline_certify,
    stationary_angles,
)
from .exterior import FermionState, antisymmetrize, is_decomposable, wedge
from .individuation import ProjectorPair, check_exhaustion, constituents_pure, individuate, pi_local_filter
from .slater import FermionPairState, SlaterDecomposition, XiGamma, is_gmw_entangled, slater_decompose, slater_rank, xi_gamma

__version__ = "0.1.0"

__all__ = [
    "BellCertificate",
    "ChshConfiguration",
    "FermionPairState",
    "FermionState",
    "PauliTriplet",
    "ProjectorPair",
    "SlaterDecomposition",
    "XiGamma",
    "antisymmetrize",
    "check_exhaustion",
    "chsh_value",
    "constituents_pure",
    "correlation_distinguishable",
    "correlation_pi",
    "gisin_distinguishable",
    "individuate",
    "is_decomposable",
    "is_gmw_entangled",
    "map_to_distinguishable",
    "optimize_chsh_pi",
    "eta4_angles",
    "pauli_triplet_on",
    "pi_local_filter",
    "pipeline_certify",
    "slater_decompose",
    "slater_rank",
    "stationary_angles",
    "wedge",
    "xi_gamma",
]
