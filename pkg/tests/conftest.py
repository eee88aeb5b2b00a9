from __future__ import annotations

import itertools
from pathlib import Path

import pytest

import circuitdesign as cd
from circuitdesign.designs import parse_term

DATA = Path(__file__).parent / "data"


# The seven circuits of the 9-run fraction of the 3x2x2 example, columns in
# run order, exactly as printed in the source material for cross-checking.
F9_CIRCUIT_TABLE = [
    (0, 0, 0, 1, -1, 0, -1, 0, 1),
    (0, 1, -1, -1, 0, 1, 1, 0, -1),
    (0, 1, -1, 0, -1, 1, 0, 0, 0),
    (1, -1, 0, -1, 1, 0, 1, -1, 0),
    (1, -1, 0, 0, 0, 0, 0, -1, 1),
    (1, 0, -1, -1, 0, 1, 1, -1, 0),
    (1, 0, -1, 0, -1, 1, 0, -1, 1),
]

F9_RUNS = [
    (-1, -1, 1), (-1, 1, -1), (-1, 1, 1),
    (0, -1, -1), (0, 1, -1), (0, 1, 1),
    (1, -1, -1), (1, -1, 1), (1, 1, -1),
]

# Highest-loss runs at the first two steps of the worked example.
F9_STEP1_TIES = [(-1, 1, -1), (0, 1, -1), (1, 1, -1)]
F9_STEP2_TIES = [(0, -1, -1), (0, 1, -1), (1, -1, -1), (1, 1, -1)]


def make_model_322() -> cd.ModelSpec:
    return cd.ModelSpec(
        factors=(
            cd.FactorSpec("A", (-1, 0, 1)),
            cd.FactorSpec("B", (-1, 1)),
            cd.FactorSpec("C", (-1, 1)),
        ),
        terms=tuple(map(parse_term, ["1", "A", "B", "C", "B*C"])),
    )


def make_design_f9() -> cd.Design:
    return cd.Design(
        factor_names=("A", "B", "C"),
        runs=tuple(F9_RUNS),
        labels=tuple(str(i + 1) for i in range(9)),
    )


def two_level_main_effects_matrix(d: int) -> cd.IntegerMatrix:
    runs = list(itertools.product((-1, 1), repeat=d))
    rows = [[1] * len(runs)] + [[r[j] for r in runs] for j in range(d)]
    return cd.IntegerMatrix(rows)


def pb12_main_effects_matrix(n_factors: int = 5) -> cd.IntegerMatrix:
    design = cd.plackett_burman_12()
    cols = [[1] + [row[j] for j in range(n_factors)] for row in design.runs]
    return cd.IntegerMatrix.from_columns(cols)


def make_model_me5() -> cd.ModelSpec:
    return cd.ModelSpec(
        factors=tuple(cd.FactorSpec(f"F{i+1}", (-1, 1)) for i in range(5)),
        terms=tuple(map(parse_term, ["1", "F1", "F2", "F3", "F4", "F5"])),
    )


def make_model_oa27() -> cd.ModelSpec:
    return cd.ModelSpec(
        factors=tuple(cd.FactorSpec(f"X{i+1}", (0, 1, 2)) for i in range(4)),
        terms=tuple(map(parse_term, ["1", "X1", "X2", "X3", "X4"])),
    )


@pytest.fixture(scope="session")
def model_322():
    return make_model_322()


@pytest.fixture(scope="session")
def design_f9():
    return make_design_f9()


@pytest.fixture(scope="session")
def matrix_f9(design_f9, model_322):
    return cd.model_matrix(design_f9, model_322)


@pytest.fixture(scope="session")
def basis_f9(matrix_f9):
    return cd.enumerate_circuits(matrix_f9, reduced=True)


@pytest.fixture(scope="session")
def frac_f9(design_f9, model_322):
    return cd.Fraction.of(design_f9, model_322)


@pytest.fixture(scope="session")
def model_me5():
    return make_model_me5()


@pytest.fixture(scope="session")
def design_pb12():
    return cd.plackett_burman_12()


@pytest.fixture(scope="session")
def basis_pb12(design_pb12, model_me5):
    return cd.enumerate_circuits(cd.model_matrix(design_pb12, model_me5), reduced=True)
