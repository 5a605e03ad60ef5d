"""
Shared fixtures: small spectrum settings, a simulated aggregate series and its fit.
"""

import os

import numpy as np
import pytest

from seasonal_aggregate.model import SeasonalSpec, SpectrumConfig
from seasonal_aggregate.simulate import McConfig, simulate_aggregate
from seasonal_aggregate.whittle import fit

# d=-0.1, D=0.3 aggregated over m=60 with z=10
TRUE_D = -0.1
TRUE_SEASONAL_D = 0.3


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_cfg():
    """Spectrum settings with a coarse autocovariance grid."""
    return SpectrumConfig(M=50, tail_correction=True, grid_size=2 ** 14)


@pytest.fixture(scope="session")
def mc_config():
    return McConfig(
        d=TRUE_D,
        D=(TRUE_SEASONAL_D,),
        phi1=0.0,
        sigma=2.0,
        z=(10,),
        m=60,
        N=512,
        replicates=1,
        seed=2024,
        max_order=1,
        grid_size=2 ** 16,
    )


@pytest.fixture(scope="session")
def aggregate_series(mc_config):
    return simulate_aggregate(mc_config, 0)


@pytest.fixture(scope="session")
def aggregate_fit(aggregate_series, mc_config):
    spec = SeasonalSpec(z=mc_config.z)
    return fit(aggregate_series, spec, mc_config.spectrum_config(), bounds=1)


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    """Keep SAGG_* settings from the developer environment out of the tests."""
    for key in list(os.environ):
        if key.startswith("SAGG_"):
            monkeypatch.delenv(key, raising=False)
