"""Correlated bivariate Gaussian sources.

Samples are built from a common component so that tests can reach it::

    s1 = sqrt(rho) * s + v1,    s2 = sqrt(rho) * s + v2

with ``Var(s) = sigma2`` and ``Var(v1) = Var(v2) = sigma2 * (1 - rho)``.
Gaussian draws use numpy's ``Generator.standard_normal`` (ziggurat), in the
fixed order s, v1, v2.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np


@dataclasses.dataclass(frozen=True)
class SourceModel:
    sigma2: float
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma2) and self.sigma2 > 0):
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")
        if not (0.0 < self.rho < 1.0):
            raise ValueError(f"rho must lie in the open interval (0, 1), got {self.rho}")

    @property
    def diff_variance(self) -> float:
        """Variance of s1 - s2."""
        return 2.0 * self.sigma2 * (1.0 - self.rho)


@dataclasses.dataclass(frozen=True, eq=False)
class SourceBlock:
    s1: np.ndarray
    s2: np.ndarray
    s3: np.ndarray
    common: np.ndarray | None = None

    @classmethod
    def from_pair(cls, s1, s2, common=None) -> "SourceBlock":
        s1 = np.asarray(s1, dtype=float)
        s2 = np.asarray(s2, dtype=float)
        return cls(s1=s1, s2=s2, s3=s1 - s2, common=common)

    def swapped(self) -> "SourceBlock":
        return SourceBlock(s1=self.s2, s2=self.s1, s3=self.s2 - self.s1, common=self.common)


def generate_block(model: SourceModel, n, rng: np.random.Generator) -> SourceBlock:
    """Draw i.i.d. source pairs; ``n`` is a length or a batch shape ``(blocks, n)``."""
    shape = (n,) if np.isscalar(n) else tuple(n)
    if any(int(k) < 1 for k in shape):
        raise ValueError(f"block shape must be positive, got {shape}")
    sd_common = math.sqrt(model.sigma2)
    sd_private = math.sqrt(model.sigma2 * (1.0 - model.rho))
    s = sd_common * rng.standard_normal(shape)
    v1 = sd_private * rng.standard_normal(shape)
    v2 = sd_private * rng.standard_normal(shape)
    root = math.sqrt(model.rho)
    return SourceBlock.from_pair(root * s + v1, root * s + v2, common=s)
