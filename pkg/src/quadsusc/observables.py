"""Observables and test functions: reproducible C^3 bump sums.

The generic-observable family is a seeded sum of polynomial bumps
(1-u^2)^4, which is exactly C^3 at the support edges and cheap to evaluate
in bulk (see _kernels.bump_sum).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels


@dataclass(frozen=True)
class BumpSum:
    """phi(x) = sum_i a_i (1 - ((x-m_i)/w_i)^2)^4 restricted to |u| < 1."""

    centers: np.ndarray
    widths: np.ndarray
    amps: np.ndarray

    def __call__(self, x):
        return _kernels.bump_sum(np.asarray(x, dtype=float), self.centers,
                                 self.widths, self.amps)

    def deriv(self, x):
        return _kernels.bump_sum_deriv(np.asarray(x, dtype=float), self.centers,
                                       self.widths, self.amps)

    @property
    def support(self) -> tuple[float, float]:
        return (float(np.min(self.centers - self.widths)),
                float(np.max(self.centers + self.widths)))


def random_bump_sum(seed: int, n_bumps: int = 4,
                    support: tuple[float, float] = (-1.6, 1.5)) -> BumpSum:
    """Seeded generic observable supported inside `support` (within [-2, 2])."""
    rng = np.random.default_rng(seed)
    lo, hi = support
    span = hi - lo
    centers = rng.uniform(lo + 0.15 * span, hi - 0.15 * span, n_bumps)
    widths = rng.uniform(0.08 * span, 0.15 * span, n_bumps)
    amps = rng.uniform(-1.0, 1.0, n_bumps)
    # clip so every bump stays inside the requested support
    widths = np.minimum(widths, np.minimum(centers - lo, hi - centers))
    return BumpSum(centers=centers, widths=widths, amps=amps)


def single_bump(center: float, width: float, amp: float = 1.0) -> BumpSum:
    return BumpSum(centers=np.array([center]), widths=np.array([width]),
                   amps=np.array([amp]))


@dataclass
class TestFunction:
    """C^0/C^1 test function with derivative, compactly supported.

    Used in distributional pairings; callers rely on the value vanishing at
    the support endpoints.
    """

    f: object
    df: object
    support: tuple[float, float]
    smoothness: str = "C1"

    def __call__(self, x):
        return self.f(x)

    def deriv(self, x):
        return self.df(x)

    @staticmethod
    def from_bumps(b: BumpSum, smoothness: str = "C1") -> "TestFunction":
        return TestFunction(f=b, df=b.deriv, support=b.support, smoothness=smoothness)


@dataclass
class Observable:
    """C^1 observable phi supported in [-2, 2], evaluable at postcritical points."""

    f: object
    df: object
    support: tuple[float, float] = (-2.0, 2.0)
    smoothness: str = "C1"

    def __call__(self, x):
        return self.f(x)

    def deriv(self, x):
        return self.df(x)

    @staticmethod
    def from_bumps(b: BumpSum) -> "Observable":
        return Observable(f=b, df=b.deriv, support=b.support, smoothness="C3")

    def shifted(self, const: float) -> "Observable":
        """phi - const (used to zero the mu_t-mean; support grows to the full line)."""
        return Observable(f=lambda x: self.f(x) - const,
                          df=self.df, support=(-2.0, 2.0), smoothness=self.smoothness)
