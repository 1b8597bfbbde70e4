import numpy as np
import pytest

from lincfa.lab.generators import GeneratorSpec, gen_bivariate, gen_ddim
from lincfa.stats import Dataset


@pytest.fixture
def ddim_small():
    return gen_ddim(GeneratorSpec("ddim", n=300, sigma=10.0, D=20, seed=3))


@pytest.fixture
def bivariate_sample():
    return gen_bivariate(GeneratorSpec("bivariate", n=500, sigma=0.5, weights=(0.2, 0.8), seed=11))


def random_dataset(rng: np.random.Generator, n: int, D: int) -> tuple[Dataset, np.ndarray]:
    base = rng.normal(size=(n, 1))
    x = base * rng.uniform(0, 2, D) + rng.normal(size=(n, D)) * rng.uniform(0.05, 1.5, D)
    y = x @ rng.normal(size=D) + rng.normal(size=n) * rng.uniform(0.1, 5)
    return Dataset(x, tuple(f"f{j}" for j in range(D))), y
