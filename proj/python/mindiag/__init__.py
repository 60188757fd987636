"""Best diagonal approximants of Hermitian matrices."""

from ._core import (
    Certificate,
    DegenerateMatrixError,
    InputError,
    OptimizeResult,
    RankOneSolution,
    certify,
    closed_polygon_angles,
    export_sdpa,
    minimize,
    minimize_from,
    minimizing_diagonal,
    orthogonal_partner,
    spectral_norm,
)

__all__ = [
    "Certificate",
    "DegenerateMatrixError",
    "InputError",
    "OptimizeResult",
    "RankOneSolution",
    "certify",
    "closed_polygon_angles",
    "export_sdpa",
    "minimize",
    "minimize_from",
    "minimizing_diagonal",
    "orthogonal_partner",
    "spectral_norm",
]
