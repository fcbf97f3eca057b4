import numpy as np
import pytest

from normsol.model import NonlinearityModel, builtin_model


@pytest.fixture(scope="session")
def cubic():
    # -u'' + lam u = u^3 family
    return NonlinearityModel.power_sum(2, 2, [(0.25, 4)], name="cubic")


@pytest.fixture(scope="session")
def quintic():
    # -u'' + lam u = u^5 family (constraint-critical for m = 1)
    return NonlinearityModel.power_sum(2, 2, [(1 / 6, 6)], name="quintic")


@pytest.fixture(scope="session")
def sign_changing():
    # F = s^4/4 - s^3/3, negative on (0, 4/3)
    return NonlinearityModel.power_sum(2, 2, [(0.25, 4), (-1 / 3, 3)], name="sign-changing")


@pytest.fixture(scope="session")
def octic():
    # F = s^8/8, above the m = 1 critical growth 6
    return NonlinearityModel.power_sum(2, 2, [(0.125, 8)], name="octic")


@pytest.fixture(scope="session")
def twelfth():
    # F = s^12/12, above the m = 2 critical growth 10
    return NonlinearityModel.power_sum(2, 2, [(1 / 12, 12)], name="twelfth")


@pytest.fixture(scope="session")
def degenerate_cosine():
    return builtin_model("degenerate-cosine")


@pytest.fixture(scope="session")
def cubic_generic():
    # the cubic triple as black-box callables: exercises the sampled tier
    return NonlinearityModel.generic(
        F=lambda s: np.asarray(s) ** 4 / 4,
        F_prime=lambda s: np.asarray(s) ** 3,
        G=lambda s: np.asarray(s) ** 2 / 2,
        G_prime=lambda s: np.asarray(s, dtype=float),
        K=lambda s: np.asarray(s) ** 2,
        name="cubic-generic",
    )
