"""Shared test configuration.

Hypothesis: no deadline (exact-arithmetic properties can be slow on the
shrinker's worst cases) and a fixed, generous example budget so runs are
reproducible in CI.
"""

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=200,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")
