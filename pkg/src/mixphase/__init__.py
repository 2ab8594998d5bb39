"""Relative and geometric phases of decomposition-dependent mixed-state evolutions."""
from ._core import BACKEND
from .errors import (DegenerateSpectrum, DimensionMismatch, GridMismatch, IndexOutOfRange,
                     InvalidPath, InvalidState, MalformedEmbedding, MissingGenerator,
                     MixPhaseError, NotHermitian, UndefinedPhase)
from .numkernel import (PAULI, EigenSystem, eigh_hermitian, partial_trace, step_unitary,
                        unitarity_residual)
from .paths import (DecompositionPath, UnitaryPath, accumulated_phase_factor, connection,
                    gauge_compose, path_from_drive, path_from_hamiltonians)
from .phases import (PhaseResult, cp_geometric_phase, decomposition_geometric_phase,
                     decomposition_relative_phase, kraus_relative_phase,
                     mixed_geometric_phase, pancharatnam_phase, per_kraus_geometric_phase,
                     recombine, visibility)
from .states import (Decomposition, DensityOperator, EmbeddedState, embed, equivalent, mix,
                     random_decomposition)
from .transport import admissible_gauge, parallelize, transport_residuals

__version__ = "0.1.0"
