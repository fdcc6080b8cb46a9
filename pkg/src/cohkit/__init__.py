"""Coherence transformations under strictly incoherent operations.

Majorization tools, Kraus-channel checks, certificates for mapping one pair
of pure states onto another, a two-stage distillation pipeline for rank-two
mixed states and single-state convertibility tests.
"""

from .config import override, tolerances
from .convert import (BlochVector, bloch_to_density, density_to_bloch, mixed_to_pure_convertible,
                      pure_conversion_channel, pure_convertible, qubit_ico_convertible,
                      state_to_bloch)
from .distill import (DistillationParams, MaxCoherentMixture, build_theorem3_input, choose_alpha,
                      distill, glay_channel, phase1_channel, theorem4_transform)
from .errors import (CohKitError, ConditionsNotMetError, HypothesisError,
                     InternalInconsistencyError, NecessaryConditionError, NotMajorizedError,
                     ValidationError)
from .linalg import (as_density, as_probs, as_state, basis_state, coherence_rank, dephase,
                     max_coherent_state, mix, trace_distance)
from .majorization import (BirkhoffDecomposition, birkhoff_decompose, block_birkhoff_decompose,
                           d_majorizes, is_doubly_stochastic, majorizes, transfer_matrix)
from .preorder import (PairCertificate, PairInstance, SpaceDecomposition,
                       brute_force_feasible, build_channel_from_certificate, canonicalize,
                       derive_d1, search_certificate, shared_d_channel, space_decomposition,
                       verify_certificate)
from .sio import KrausChannel, apply_channel, classify_channel

__version__ = "0.1.0"

__all__ = [
    "apply_channel", "as_density", "as_probs", "as_state", "basis_state", "birkhoff_decompose",
    "BirkhoffDecomposition", "bloch_to_density", "BlochVector", "block_birkhoff_decompose",
    "brute_force_feasible", "build_channel_from_certificate", "build_theorem3_input",
    "canonicalize", "choose_alpha", "classify_channel", "coherence_rank", "CohKitError",
    "ConditionsNotMetError", "d_majorizes", "density_to_bloch", "dephase", "derive_d1", "distill",
    "DistillationParams", "glay_channel", "HypothesisError", "InternalInconsistencyError",
    "is_doubly_stochastic", "KrausChannel", "majorizes", "max_coherent_state",
    "MaxCoherentMixture", "mix", "mixed_to_pure_convertible", "NecessaryConditionError",
    "NotMajorizedError", "override", "PairCertificate", "PairInstance", "phase1_channel",
    "pure_conversion_channel", "pure_convertible", "qubit_ico_convertible", "search_certificate",
    "shared_d_channel", "space_decomposition", "SpaceDecomposition", "state_to_bloch",
    "theorem4_transform", "tolerances", "trace_distance", "transfer_matrix", "ValidationError",
    "verify_certificate",
]
