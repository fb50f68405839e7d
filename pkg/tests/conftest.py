"""Shared fixtures: the bundled mixture model and common schedules."""

import numpy as np
import pytest

from noisecoder.sampler import build_schedule
from noisecoder.score_models import GaussianMixtureModel, load_default_model


@pytest.fixture(scope="session")
def desk_model():
    return load_default_model()


@pytest.fixture(scope="session")
def schedule40():
    return build_schedule(steps=40)


@pytest.fixture(scope="session")
def unit_gaussian_model():
    """Single zero-mean unit-std component on a small carrier.

    The probability-flow ODE for this model has the closed-form solution
    x(sigma) = x(sigma_from) * sqrt((s^2 + sigma^2) / (s^2 + sigma_from^2)),
    which the solver tests use as an independent oracle.
    """
    shape = (3, 8, 8)
    return GaussianMixtureModel(
        means=np.zeros((1, *shape)),
        weights=np.array([1.0]),
        stds=np.array([1.0]),
    )


class IdentityModel:
    """Denoiser D(x) = x; the ODE drift vanishes so trajectories are constant."""

    def __init__(self, shape=(3, 8, 8)):
        self.shape = tuple(shape)
        self.thread_safe = True

    def denoise(self, x, sigma, context=None):
        return np.array(x, dtype=np.float64, copy=True)


class CountingModel:
    """Wrapper that counts denoiser calls; budgets are part of the contract."""

    def __init__(self, inner):
        self.inner = inner
        self.shape = tuple(inner.shape)
        self.thread_safe = getattr(inner, "thread_safe", False)
        self.calls = 0

    def denoise(self, x, sigma, context=None):
        self.calls += 1
        return self.inner.denoise(x, sigma, context=context)


@pytest.fixture
def identity_model():
    return IdentityModel()


@pytest.fixture
def counting(unit_gaussian_model):
    return CountingModel(unit_gaussian_model)
