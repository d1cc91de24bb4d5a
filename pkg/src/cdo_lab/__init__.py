"""Convolution-dominated operators on finitely generated discrete groups."""

from .algebra import (
    DiagonalForm,
    EnvelopeFunction,
    Multiplier,
    TruncatedMatrix,
    apply,
    form_envelope,
    l1_norm,
    minimal_envelope,
    q_operator_norm,
    represent,
    sparse_section,
    twisted_involution,
    twisted_product,
)
from .decay import DecayReport, decay_fit, decay_report, inverse_envelope, neumann_oracle, shell_mass, truncated_inverse
from .groups import GROUP_IDS, Ball, GroupModel, ball, get_group
from .library import builtin_element
from .spectral import (
    GapReport,
    RadiusSequence,
    hermitian_spectrum,
    hulanicki_gap,
    operator_norm_estimate,
    power_radius_sequence,
)

__version__ = "0.1.0"
