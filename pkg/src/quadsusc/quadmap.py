"""The quadratic family f_t(x) = t - x^2: orbits, derivative cocycles, signs.

Everything here is a pure function of its arguments; float64 and
double-double paths are provided side by side (the solver needs residuals
around 1e-25, beyond binary64).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ddouble import DD


class DomainError(ValueError):
    """Argument outside the family's parameter or phase domain."""


class PrecisionExhausted(RuntimeError):
    """Derivative product overflowed before the requested horizon."""

    def __init__(self, horizon: int, msg: str = ""):
        super().__init__(msg or f"derivative product overflows at k={horizon}")
        self.horizon = horizon


@dataclass(frozen=True)
class Parameter:
    """Family parameter t in (1, 2], optionally with a clamping radius."""

    t: float
    clamp_eps: float | None = None

    def __post_init__(self):
        t = float(self.t)
        if not 1.0 < t <= 2.0:
            raise DomainError(f"parameter t={t} outside (1, 2]")
        if self.clamp_eps is not None:
            eps = float(self.clamp_eps)
            if eps <= 0 or t - eps <= 1.0:
                raise DomainError("clamping radius must satisfy t - eps > 1")


@dataclass
class CriticalOrbit:
    """Postcritical data: c_k, Df^k(c_1) and its signs, for one parameter.

    c[k-1] = f^k(0) for k = 1..N;  D[k] = Df^k(c_1) for k = 0..N-1 with
    D[0] = 1;  s[k] = sgn(D[k]).  `periodic_tag` is a coarse (L, p) candidate
    from the closing heuristic; confirmation belongs to the solver.
    `growth_rate` is the least-squares slope of log|D_k| against k
    (an empirical Collet-Eckmann lambda, no constant claimed).
    """

    t: float
    c: np.ndarray
    D: np.ndarray
    s: np.ndarray
    periodic_tag: tuple[int, int] | None = None
    growth_rate: float | None = None

    @property
    def horizon(self) -> int:
        return len(self.c)


def eval_iter(t: float, x, n: int):
    """f_t^n(x); n = 0 returns x unchanged."""
    if n < 0:
        raise DomainError("iteration count must be >= 0")
    y = np.asarray(x, dtype=float) if np.ndim(x) else float(x)
    for _ in range(n):
        y = t - y * y
    return y


def invariant_interval(t: float) -> tuple[float, float]:
    """Endpoints (a_t, -a_t) of the invariant interval, a_t = (-1-sqrt(1+4t))/2."""
    if not 1.0 < t <= 2.0:
        raise DomainError(f"parameter t={t} outside (1, 2]")
    a = (-1.0 - np.sqrt(1.0 + 4.0 * t)) / 2.0
    return a, -a


def clamp_family(t0: float, eps0: float, t: float) -> float:
    """Effective parameter of the clamped family: t clipped to [t0-eps0, t0+eps0]."""
    if t0 - eps0 <= 1.0 or t0 + eps0 >= 2.0:
        raise DomainError("clamping window must stay inside (1, 2)")
    return min(max(t, t0 - eps0), t0 + eps0)


_CLOSE_TOL = 1e-8


def _detect_closing(c: np.ndarray, tol: float = _CLOSE_TOL) -> tuple[int, int] | None:
    n = len(c)
    for k in range(n):
        for j in range(1, n - k):
            if abs(c[k + j] - c[k]) < tol * max(1.0, abs(c[k])):
                return k + 1, j  # L (1-based index of c), period candidate
    return None


def critical_orbit(t: float, N: int, detect_closing: bool = True) -> CriticalOrbit:
    """Orbit of the critical value with derivative products and signs."""
    if N < 1:
        raise DomainError("orbit horizon must be >= 1")
    c = np.empty(N)
    D = np.empty(N)
    s = np.empty(N, dtype=np.int8)
    ck = 0.0
    Dk = 1.0
    for k in range(N):
        ck = t - ck * ck
        c[k] = ck
        D[k] = Dk  # Df^k(c_1), so D[0] = 1 before multiplying by -2c_1
        s[k] = 0 if Dk == 0 else (1 if Dk > 0 else -1)
        Dk = Dk * (-2.0 * ck)
        if not np.isfinite(Dk):
            raise PrecisionExhausted(k + 1)
    tag = _detect_closing(c) if detect_closing else None
    ladder = np.log(np.abs(D[1:]) + 1e-300)
    ks = np.arange(1, N)
    growth = float(np.exp((ladder @ ks) / (ks @ ks))) if N > 2 else None
    return CriticalOrbit(t=t, c=c, D=D, s=s, periodic_tag=tag, growth_rate=growth)


def critical_orbit_dd(t: DD, N: int) -> tuple[list[DD], list[DD], list[int]]:
    """Double-double orbit: (c_1..c_N, D_0..D_{N-1}, s_0..s_{N-1})."""
    if N < 1:
        raise DomainError("orbit horizon must be >= 1")
    c: list[DD] = []
    D: list[DD] = [DD(1.0)]
    s: list[int] = [1]
    ck = DD(0.0)
    for k in range(N):
        ck = t - ck * ck
        c.append(ck)
        if k < N - 1:
            Dk = D[-1] * (DD(-2.0) * ck)
            if not np.isfinite(Dk.hi):
                raise PrecisionExhausted(k + 1)
            D.append(Dk)
            s.append(1 if Dk.hi > 0 else (-1 if Dk.hi < 0 else 0))
    return c, D, s
