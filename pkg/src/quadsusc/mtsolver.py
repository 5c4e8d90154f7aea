"""Misiurewicz-Thurston parameter enumeration and high-precision refinement.

The pipeline is: a vectorized coarse scan over a parameter grid locates
approximate solutions of f^(k+j)(0) = f^k(0) together with their sign
pattern, then the Milnor-Thurston contraction refines each candidate in
double-double arithmetic to ~30 digits.  Superstable parameters
(f^p(0) = 0) get the same treatment with the closure onto 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .ddouble import DD
from .quadmap import DomainError, critical_orbit_dd

ITERATION_CAP = 500
DEDUP_T_TOL = 1e-7


class RefinementError(RuntimeError):
    """Refinement left the basin (negative radicand) or failed to converge."""


@dataclass(frozen=True)
class MTCombinatorics:
    """Closure combinatorics: f^(k+j)(0) = f^k(0) with orbit signs sigma_1..sigma_(k+j-1)."""

    k: int
    j: int
    signs: tuple[int, ...]

    def __post_init__(self):
        if self.k < 1 or self.j < 1:
            raise DomainError("need k >= 1 and j >= 1")
        if len(self.signs) != self.k + self.j - 1:
            raise DomainError("sign pattern must have length k+j-1")
        if self.signs[0] != 1:
            raise DomainError("sigma_1 must be +1 (c_1 = t > 0)")


@dataclass
class MTParameter:
    """A refined MT parameter with its certificate.

    `t` carries ~31 digits; `residual` is |f^(k+j)(0) - f^k(0)| recomputed
    from scratch at the refined t; (L, p) is the canonical preperiod/period
    extracted from the refined orbit, not the search combinatorics.
    """

    t: DD
    comb: MTCombinatorics
    residual: float
    iterations: int
    L: int
    p: int
    multiplier: float  # Df^p(c_L), repelling iff |.| > 1

    @property
    def t_float(self) -> float:
        return float(self.t)

    @property
    def cycle_sign(self) -> int:
        return 1 if self.multiplier > 0 else -1


@dataclass
class PeriodicParameter:
    """Superstable parameter: f^p(0) = 0."""

    t: DD
    p: int
    signs: tuple[int, ...]
    residual: float
    iterations: int


# ---------------------------------------------------------------------------
# coarse scan
# ---------------------------------------------------------------------------

def scan_candidates(t_range: tuple[float, float], grid: int, k_max: int,
                    j_max: int, tol: float = 1e-4) -> list[tuple[float, MTCombinatorics]]:
    """Locate approximate MT parameters on a uniform grid.

    A grid point t is a candidate for (k, j) when |c_(k+j) - c_k| < tol and
    the orbit sign pattern matches its grid neighbours (so the combinatorics
    is stable on the cell).  The list is deduplicated on (combinatorics,
    rounded t) and sorted by t.
    """
    t_lo, t_hi = t_range
    if not (1.0 < t_lo < t_hi <= 2.0):
        raise DomainError("scan range must satisfy 1 < t_lo < t_hi <= 2")
    if grid < 10:
        raise DomainError("grid too coarse")
    ts = np.linspace(t_lo, t_hi, grid)
    K = k_max + j_max
    C = _kernels.orbit_matrix(ts, K)  # shape (K, grid), C[i] = c_{i+1}
    sign_ok = np.all(np.abs(C) > 1e-12, axis=0)
    patt = C > 0

    out: list[tuple[float, MTCombinatorics]] = []
    seen: set[tuple] = set()
    for k in range(1, k_max + 1):
        for j in range(1, j_max + 1):
            res = np.abs(C[k + j - 1] - C[k - 1])
            hit = (res < tol) & sign_ok
            # combinatorics stable across the cell: same sign rows as a neighbour
            hit[1:] &= np.all(patt[: k + j - 1, 1:] == patt[: k + j - 1, :-1], axis=0)
            idx = np.flatnonzero(hit)
            if idx.size == 0:
                continue
            # keep one representative per contiguous run: the residual argmin
            splits = np.flatnonzero(np.diff(idx) > 1)
            for run in np.split(idx, splits + 1):
                best = run[np.argmin(res[run])]
                t_apx = float(ts[best])
                signs = tuple(1 if patt[i, best] else -1 for i in range(k + j - 1))
                key = (k, j, signs, round(t_apx / DEDUP_T_TOL))
                if key in seen:
                    continue
                seen.add(key)
                out.append((t_apx, MTCombinatorics(k=k, j=j, signs=signs)))
    out.sort(key=lambda c: c[0])
    return out


# ---------------------------------------------------------------------------
# Milnor-Thurston refinement
# ---------------------------------------------------------------------------

def _iterate_contraction(xh: np.ndarray, xl: np.ndarray, k: int,
                         signs: np.ndarray, digits: int):
    """Shared driver: run mt_step_batch until coordinates settle."""
    tol = 10.0 ** (-digits)
    iters = np.zeros(xh.shape[0], dtype=np.int64)
    done = np.zeros(xh.shape[0], dtype=bool)
    failed = np.zeros(xh.shape[0], dtype=bool)
    prev_delta = np.full(xh.shape[0], np.inf)
    worse_count = np.zeros(xh.shape[0], dtype=np.int64)
    for it in range(ITERATION_CAP):
        yh, yl, bad = _kernels.mt_step_batch(xh, xl, k, signs)
        delta = np.max(np.abs(yh - xh) + np.abs(yl - xl), axis=1)
        failed |= bad & ~done
        newly_done = (~done) & (~failed) & (delta < tol)
        iters[newly_done] = it + 1
        done |= newly_done
        # divergence heuristic: residual grows 10 steps in a row (pre-convergence only)
        worse_count = np.where(delta > prev_delta, worse_count + 1, 0)
        failed |= (worse_count >= 10) & ~done
        prev_delta = delta
        xh, xl = yh, yl
        if np.all(done | failed):
            break
    return xh, xl, iters, done & ~failed


def mt_refine(comb: MTCombinatorics, t_init: float, digits: int = 30) -> MTParameter:
    """Refine one candidate to an MTParameter; raises RefinementError off-basin."""
    params = refine_candidates([(t_init, comb)], digits=digits)
    if not params:
        raise RefinementError(f"contraction failed for {comb} from t={t_init}")
    return params[0]


def refine_candidates(cands: list[tuple[float, MTCombinatorics]],
                      digits: int = 30) -> list[MTParameter]:
    """Refine a candidate list, batched by (k, j); drops failures, dedups, sorts."""
    groups: dict[tuple[int, int], list[tuple[float, MTCombinatorics]]] = {}
    for t_apx, comb in cands:
        groups.setdefault((comb.k, comb.j), []).append((t_apx, comb))

    refined: list[MTParameter] = []
    for (k, j), group in groups.items():
        n = k + j - 1
        xh = np.empty((len(group), n))
        signs = np.empty((len(group), n))
        for row, (t_apx, comb) in enumerate(group):
            orb = [t_apx]
            for _ in range(n - 1):
                orb.append(t_apx - orb[-1] ** 2)
            xh[row] = orb
            signs[row] = comb.signs
        xl = np.zeros_like(xh)
        xh, xl, iters, ok = _iterate_contraction(xh, xl, k, signs, digits)
        for row, (t_apx, comb) in enumerate(group):
            if not ok[row]:
                continue
            t = DD(xh[row, 0], xl[row, 0])
            if not (DD(1.0) < t <= DD(2.0)):
                continue
            param = _certify(t, comb, int(iters[row]))
            if param is not None:
                refined.append(param)

    refined.sort(key=lambda p: (p.t_float, p.L + p.p))
    out: list[MTParameter] = []
    for p in refined:
        if out and abs(p.t_float - out[-1].t_float) < DEDUP_T_TOL \
                and (p.L, p.p) == (out[-1].L, out[-1].p):
            if p.residual < out[-1].residual:
                out[-1] = p
            continue
        out.append(p)
    return out


def _certify(t: DD, comb: MTCombinatorics, iterations: int) -> MTParameter | None:
    """Recompute the closure from scratch and extract canonical (L, p)."""
    k, j = comb.k, comb.j
    horizon = k + 2 * j + 2
    c, D, s = critical_orbit_dd(t, horizon)
    residual = abs(float(c[k + j - 1] - c[k - 1]))
    tol = 1e-18
    # minimal period: smallest divisor p of j closing the cycle
    p = None
    for cand in range(1, j + 1):
        if j % cand:
            continue
        if abs(float(c[k + cand - 1] - c[k - 1])) < tol:
            p = cand
            break
    if p is None:
        p = j
    # minimal preperiod (>= 1)
    L = k
    while L > 1 and abs(float(c[L - 2 + p] - c[L - 2])) < tol:
        L -= 1
    # cycle multiplier Df^p(c_L) = prod of -2 c_m over the cycle
    mult = DD(1.0)
    for m in range(L, L + p):
        mult = mult * (DD(-2.0) * c[m - 1])
    if abs(float(mult)) <= 1.0:
        return None  # not repelling: not MT
    # orbit signs must match the search combinatorics
    for i, sig in enumerate(comb.signs):
        if (c[i].hi > 0) != (sig > 0):
            return None
    return MTParameter(t=t, comb=comb, residual=residual, iterations=iterations,
                       L=L, p=p, multiplier=float(mult))


def verify_closure(t: DD | float, comb: MTCombinatorics, tol: float) -> tuple[bool, float]:
    """Recompute the closing residual and sign pattern from scratch in double-double."""
    t_dd = t if isinstance(t, DD) else DD(float(t))
    c, _, _ = critical_orbit_dd(t_dd, comb.k + comb.j)
    residual = abs(float(c[comb.k + comb.j - 1] - c[comb.k - 1]))
    signs_ok = all((c[i].hi > 0) == (sig > 0) for i, sig in enumerate(comb.signs))
    return (residual < tol and signs_ok), residual


# ---------------------------------------------------------------------------
# superstable (periodic-critical) parameters
# ---------------------------------------------------------------------------

def scan_periodic(t_range: tuple[float, float], grid: int, p_max: int,
                  tol: float = 1e-3) -> list[tuple[float, int, tuple[int, ...]]]:
    """Sign changes of t -> f_t^p(0) locate superstable candidates."""
    t_lo, t_hi = t_range
    ts = np.linspace(t_lo, t_hi, grid)
    C = _kernels.orbit_matrix(ts, p_max)
    out = []
    seen = set()
    for p in range(2, p_max + 1):
        cp = C[p - 1]
        flips = np.flatnonzero(np.sign(cp[:-1]) * np.sign(cp[1:]) < 0)
        for i in flips:
            # reject if a shorter period already closes here
            if any(abs(C[q - 1][i]) < tol for q in range(2, p) if p % q == 0):
                continue
            t_apx = float(ts[i] - cp[i] * (ts[i + 1] - ts[i]) / (cp[i + 1] - cp[i]))
            signs = tuple(1 if C[m][i] > 0 else -1 for m in range(p - 1))
            key = (p, round(t_apx / DEDUP_T_TOL))
            if key in seen:
                continue
            seen.add(key)
            out.append((t_apx, p, signs))
    out.sort(key=lambda c: c[0])
    return out


def periodic_refine(p: int, signs: tuple[int, ...], t_init: float,
                    digits: int = 30) -> PeriodicParameter:
    """Refine a superstable parameter with the closure f^p(0) = 0.

    Coordinates are (c_1 .. c_{p-1}); the image of the last one is 0, so the
    last contraction coordinate is sigma_{p-1} sqrt(x_1 - 0).
    """
    if p < 2:
        raise DomainError("period must be >= 2 (p=1 closure forces t=0)")
    if len(signs) != p - 1 or signs[0] != 1:
        raise DomainError("need sigma_1..sigma_{p-1} with sigma_1 = +1")
    n = p - 1
    orb = [t_init]
    for _ in range(n - 1):
        orb.append(t_init - orb[-1] ** 2)
    xh = np.array([orb + [0.0]])  # pad coordinate fixed at 0
    xl = np.zeros_like(xh)
    sg = np.array([list(signs) + [0]], dtype=float)
    # closing onto the pad: kernel coordinate n+1 (1-based) holds constant 0
    xh_fin, xl_fin, iters, ok = _iterate_contraction(xh, xl, n + 1, sg, digits)
    if not ok[0]:
        raise RefinementError(f"periodic contraction failed for p={p} from t={t_init}")
    t = DD(xh_fin[0, 0], xl_fin[0, 0])
    if not (DD(1.0) < t < DD(2.0)):
        raise RefinementError(f"refined parameter {float(t)} left (1, 2)")
    c, _, _ = critical_orbit_dd(t, p)
    residual = abs(float(c[p - 1]))
    return PeriodicParameter(t=t, p=p, signs=signs, residual=residual,
                             iterations=int(iters[0]))


# ---------------------------------------------------------------------------
# atlas I/O
# ---------------------------------------------------------------------------

@dataclass
class Atlas:
    """Refined MT parameters plus later-joined transversality columns."""

    params: list[MTParameter]
    j_columns: dict[str, list[float]] = field(default_factory=dict)

    COLUMNS = ("t", "L", "p", "residual")

    def write_csv(self, path) -> None:
        jnames = sorted(self.j_columns)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(self.COLUMNS) + jnames)
            for i, p in enumerate(self.params):
                row = [p.t.to_str(30), p.L, p.p, repr(p.residual)]
                row += [repr(self.j_columns[name][i]) for name in jnames]
                w.writerow(row)
