"""Quadrotor flight dynamics, geometric tracking control on SE(3), and
parameter-identification toolkit (native core)."""

from ._core import (
    GRAVITY,
    ConfigError,
    DegeneracyError,
    DivergenceError,
    RigidBodyState,
    control,
    harness,
    ident,
    model,
    sim,
    so3,
    trajectory,
)

__version__ = "0.1.0"

__all__ = [
    "GRAVITY",
    "ConfigError",
    "DegeneracyError",
    "DivergenceError",
    "RigidBodyState",
    "control",
    "harness",
    "ident",
    "model",
    "sim",
    "so3",
    "trajectory",
    "__version__",
]
