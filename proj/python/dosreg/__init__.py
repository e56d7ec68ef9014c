"""Learning-based optimal output regulation under denial-of-service attacks."""

from ._dosreg import (
    DosregError,
    generate_schedule,
    hewer,
    kron,
    learn,
    oracle,
    pendulum_config,
    simulate,
    unvecs,
    vecs,
    vecv,
    verify_schedule,
)

__all__ = [
    "DosregError",
    "generate_schedule",
    "hewer",
    "kron",
    "learn",
    "oracle",
    "pendulum_config",
    "simulate",
    "unvecs",
    "vecs",
    "vecv",
    "verify_schedule",
]
