"""Exact canonical perturbation theory for perturbed oscillators in ladder operators."""

from .ladder_algebra import (
    AlphaSeries,
    DimensionMismatchError,
    GaussianRational,
    LadderMonomial,
    OperatorExpression,
    adjoint,
    commutator,
    from_position_momentum,
    hbar_power,
    is_hermitian,
    multiply,
    normal_order_product,
)
from .superoperators import (
    KatoKind,
    ModeSystem,
    composition_count,
    integrate,
    kato_apply,
    kato_generator,
    kato_series_apply,
    liouville_h0,
    project,
    weight,
)
from .transforms import (
    BlockDiagonalResult,
    BlockDiagonalizationError,
    GeneratorSeries,
    RunStats,
    deprit_forward_apply,
    deprit_inverse_apply,
    fast_inverse_transform,
    kato_block_diagonalize,
    kato_effective_direct,
    magnus_block_diagonalize,
    van_vleck_block_diagonalize,
)
from .oracle import (
    EigenvalueReport,
    FockMatrix,
    eigenvalue_check,
    fock_matrix,
    matrix_integrate,
    matrix_project,
    series_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaSeries",
    "DimensionMismatchError",
    "GaussianRational",
    "LadderMonomial",
    "OperatorExpression",
    "adjoint",
    "commutator",
    "from_position_momentum",
    "hbar_power",
    "is_hermitian",
    "multiply",
    "normal_order_product",
    "KatoKind",
    "ModeSystem",
    "composition_count",
    "integrate",
    "kato_apply",
    "kato_generator",
    "kato_series_apply",
    "liouville_h0",
    "project",
    "weight",
    "BlockDiagonalResult",
    "BlockDiagonalizationError",
    "GeneratorSeries",
    "RunStats",
    "deprit_forward_apply",
    "deprit_inverse_apply",
    "fast_inverse_transform",
    "kato_block_diagonalize",
    "kato_effective_direct",
    "magnus_block_diagonalize",
    "van_vleck_block_diagonalize",
    "EigenvalueReport",
    "FockMatrix",
    "eigenvalue_check",
    "fock_matrix",
    "matrix_integrate",
    "matrix_project",
    "series_matrix",
    "__version__",
]
