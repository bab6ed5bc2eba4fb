import numpy as np
import pytest
from fastapi.testclient import TestClient

from app.main import app
from app.models.polynomial import UnivariateIntPoly
from app.utils.poly_parser import MULTIVARIATE, parse_poly
from app.utils.record_store import RecordStore


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def client():
    return TestClient(app)


@pytest.fixture
def store(tmp_path):
    return RecordStore(str(tmp_path / "records.jsonl"))


@pytest.fixture
def z():
    return lambda text: parse_poly(text)


@pytest.fixture
def xs():
    return lambda text, num_vars=None: parse_poly(text, MULTIVARIATE, num_vars)


def random_knomial(rng, k: int, max_coeff: int = 100, max_degree: int = 200) -> UnivariateIntPoly:
    """k nonzero coefficients, distinct exponents, nonzero constant term"""
    exponents = sorted(rng.choice(np.arange(1, max_degree + 1), size=k - 1, replace=False).tolist(), reverse=True)
    coefficients = [int(c) * int(rng.choice([-1, 1])) for c in rng.integers(1, max_coeff + 1, size=k)]
    return UnivariateIntPoly.knomial(coefficients, exponents)


@pytest.fixture
def knomial_corpus(rng):
    """Small seeded corpus of k-nomials, 2 <= k <= 8"""
    return [random_knomial(rng, int(rng.integers(2, 9))) for _ in range(60)]
