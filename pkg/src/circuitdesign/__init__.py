"""Circuit bases of integer model matrices and robust nested sub-designs.

The package computes the circuit basis of a design's integer model matrix,
uses it to decide saturation and measure design robustness exactly, and
runs a greedy loss-guided removal that turns any n-run design into a nested
sequence of robust sub-designs down to a saturated minimal fraction.
"""

__version__ = "0.1.0"

from .bench import (
    BenchReport,
    RobustnessDistribution,
    bench_report,
    distribution,
    percentile,
    write_report,
)
from .circuits import Circuit, CircuitBasis, enumerate_circuits, reduce_basis, restrict
from .designs import (
    Design,
    FactorSpec,
    ModelSpec,
    full_factorial,
    load_design_csv,
    load_model_json,
    model_matrix,
    orthogonal_array_3_4,
    plackett_burman_12,
    save_design_csv,
)
from .errors import (
    CircuitDesignError,
    DimensionError,
    ModelError,
    ParseError,
    RankError,
    SizeLimitError,
)
from .linalg import IntegerMatrix, Rational, determinant, minimal_kernel_vector, rank
from .removal import RemovalStep, RemovalTrace, loss, nested_sequence, remove_step
from .robustness import (
    Fraction,
    RobustnessValue,
    is_saturated_circuits,
    is_saturated_det,
    robustness_exact,
    robustness_sampled,
)

__all__ = [
    "__version__",
    "IntegerMatrix", "Rational", "rank", "determinant", "minimal_kernel_vector",
    "FactorSpec", "ModelSpec", "Design",
    "full_factorial", "plackett_burman_12", "orthogonal_array_3_4",
    "load_design_csv", "save_design_csv", "load_model_json", "model_matrix",
    "Circuit", "CircuitBasis", "enumerate_circuits", "reduce_basis", "restrict",
    "Fraction", "RobustnessValue",
    "is_saturated_circuits", "is_saturated_det", "robustness_exact", "robustness_sampled",
    "RemovalStep", "RemovalTrace", "loss", "remove_step", "nested_sequence",
    "RobustnessDistribution", "BenchReport", "percentile", "distribution",
    "bench_report", "write_report",
    "CircuitDesignError", "DimensionError", "RankError", "ModelError",
    "SizeLimitError", "ParseError",
]
