import numpy as np
import pytest

from risrelay.channels import ChannelSet, FadingParams, SystemGeometry, generate_scenario


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_channels(rng, M=3, N=3, K=2, L=4, noise_power=1.0):
    """Unit-variance i.i.d. channels, handy for algebraic checks."""
    return ChannelSet(
        H_TR=crandn(rng, N, M),
        H_TI=crandn(rng, L, M),
        H_IR=crandn(rng, N, L),
        h_T=crandn(rng, K, M),
        h_R=crandn(rng, K, N),
        h_I=crandn(rng, K, L),
        noise_power=noise_power,
    )


def scenario(seed=0, placement="users-center", params=FadingParams(), **sizes):
    return generate_scenario(SystemGeometry.preset(placement, **sizes), params, seed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# acceptance criteria report one line each at the end of the session
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
