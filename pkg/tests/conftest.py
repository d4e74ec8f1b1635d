import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

SEED = 20260415


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


def random_real_field(rng, n, components=(), band=None):
    """Real samples whose spectrum is confined to |k| <= band (default n/4)."""
    from wildflow2d.spectral_field import from_modes, to_modes, wavenumber_norm

    band = n // 4 if band is None else band
    vals = rng.standard_normal(tuple(components) + (n, n))
    modes = to_modes(vals) * (wavenumber_norm(n) <= band)
    return from_modes(modes)
