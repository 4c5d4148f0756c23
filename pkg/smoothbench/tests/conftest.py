# File: smoothbench/tests/conftest.py

from pathlib import Path

import numpy as np
import pytest

from smoothbench.inference.smoother import build_problem
from smoothbench.models.belief import SmoothingProblem
from smoothbench.tests.cases import build_case, get_case

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def _problem(case_id: str) -> SmoothingProblem:
    sys, prior, obs = build_case(get_case(case_id))
    return build_problem(sys, prior, obs)


@pytest.fixture(scope="module")
def toy_problem() -> SmoothingProblem:
    return _problem("toy")


@pytest.fixture(scope="module")
def four_state_problem() -> SmoothingProblem:
    return _problem("four_state_full_rank")


@pytest.fixture(scope="module")
def three_state_problem() -> SmoothingProblem:
    return _problem("three_state_rank_two")
