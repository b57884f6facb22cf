"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np


def random_spd(gen: np.random.Generator, r: int, jitter: float = 0.5) -> np.ndarray:
    """A well-conditioned random symmetric positive definite r x r matrix."""
    a = gen.standard_normal((r, r))
    return a @ a.T / r + jitter * np.eye(r)
