from __future__ import annotations

import pytest

from picardlab.periods import ModelConfig

LAM1 = -0.7 + 0.3j
LAM2 = 1.9 - 0.4j

# (N, A, c) for every configuration of the test matrix
MATRIX = {
    "n2_N5_A2": (5, 2, (0, 1)),
    "n2_N5_A3": (5, 3, (0, 1)),
    "n3_N2_A1": (2, 1, (0, 1, 0.5 + 0.9j)),
    "n4_N3_A1": (3, 1, (0, 1, 0.5 + 0.9j, 0.4 - 0.8j)),
}


def make_config(key: str = "n2_N5_A2", lam1: complex = LAM1, lam2: complex = LAM2) -> ModelConfig:
    N, A, c = MATRIX[key]
    return ModelConfig(N, A, c, lam1, lam2)


@pytest.fixture
def canonical() -> ModelConfig:
    return make_config()


@pytest.fixture(params=sorted(MATRIX))
def matrix_config(request) -> ModelConfig:
    return make_config(request.param)
