"""Python bindings for the D2D offloading model and simulator."""

from ._core import (  # noqa: F401
    Boundary,
    CachePolicy,
    CachingError,
    ConfigError,
    Scheme,
    SystemConfig,
    analytic,
    config,
    expint_e1,
    expint_ei,
    figure_csv,
    monte_carlo,
    offloading_opportunity,
    optimal_caching,
    optimal_power,
    parse_config_text,
    upper_gamma,
    xi1,
    xi2,
    zipf,
)

__version__ = "0.1.0"
