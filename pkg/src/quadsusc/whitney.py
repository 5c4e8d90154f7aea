"""Whitney fractional integrals and Marchaud derivatives on fat Cantor sets.

The integrals are ordinary fractional kernels with the domain restricted to
a finite union of closed intervals; the interval abutting the evaluation
point (or a spike) gets tanh-sinh treatment, the rest plain Gauss.
"""

from __future__ import annotations

import math

import numpy as np

from .cantor import FatCantorSet
from .fraccalc import SQRT_PI, SpikeTerm
from .quadrature import gauss_composite, split_segments, ts_quad


class OutsideOmegaError(ValueError):
    """Evaluation point not in the Whitney set."""


def _sided_intervals(omega: FatCantorSet, t: float, side: str):
    """Omega intersected with the half-line the side integrates over."""
    out = []
    for lo, hi in omega.intervals():
        if side == "+":  # tau <= t
            lo, hi = lo, min(hi, t)
        else:
            lo, hi = max(lo, t), hi
        if hi > lo:
            out.append((lo, hi))
    return out


def whitney_rl(omega: FatCantorSet, side: str, eta: float, g, t: float, *,
               level: int = 8, singular_points=()) -> float:
    """I^(eta,Omega)_side g(t): the RL kernel integrated over Omega only.

    side '+' uses (t - tau)^(eta-1) on Omega n (-inf, t], '-' the mirror,
    'riesz' their sum over all of Omega divided by 2 cos(eta pi/2).
    `g` may be a SpikeTerm (integrated with exact distances) or a callable
    with listed singular points.
    """
    if side == "riesz":
        if abs(eta - 1.0) < 1e-12:
            raise ValueError("riesz combination undefined at eta = 1")
        return (whitney_rl(omega, "+", eta, g, t, level=level, singular_points=singular_points)
                + whitney_rl(omega, "-", eta, g, t, level=level, singular_points=singular_points)) \
            / (2.0 * math.cos(eta * math.pi / 2.0))
    if side not in ("+", "-"):
        raise ValueError("side must be '+', '-' or 'riesz'")
    if not omega.contains(t):
        raise OutsideOmegaError(f"t={t} not in Omega")

    if isinstance(g, SpikeTerm):
        singular_points = (g.x0,)
        geval = g
    else:
        geval = g

    total = 0.0
    for lo, hi in _sided_intervals(omega, t, side):
        for clo, chi in split_segments(lo, hi, [s for s in singular_points if lo < s < hi]):
            sing_at_t = abs(clo - t) < 1e-14 if side == "-" else abs(chi - t) < 1e-14

            def f(tau, da, db):
                kern_dist = np.abs(tau - t)
                if side == "-" and abs(clo - t) < 1e-14:
                    kern_dist = da
                elif side == "+" and abs(chi - t) < 1e-14:
                    kern_dist = db
                kern = np.maximum(kern_dist, 1e-300) ** (eta - 1.0)
                if isinstance(geval, SpikeTerm):
                    d = np.abs(tau - geval.x0)
                    if abs(clo - geval.x0) < 1e-14:
                        d = da
                    elif abs(chi - geval.x0) < 1e-14:
                        d = db
                    on = (geval.side * (tau - geval.x0) > 0) | \
                         ((abs(clo - geval.x0) < 1e-14) & (geval.side > 0)) | \
                         ((abs(chi - geval.x0) < 1e-14) & (geval.side < 0))
                    inside = on & (d < geval.truncation) & (d > 0)
                    with np.errstate(divide="ignore"):
                        v = np.maximum(d, 1e-300) ** (-0.5 if geval.kind == "spike" else 0.5)
                    vals = geval.coef * np.where(inside, v, 0.0)
                else:
                    vals = np.asarray(geval(tau), dtype=float)
                return kern * vals

            needs_ts = sing_at_t or any(abs(clo - s) < 1e-14 or abs(chi - s) < 1e-14
                                        for s in singular_points)
            if needs_ts:
                total += ts_quad(f, clo, chi, level=level, singular=True)
            else:
                total += gauss_composite(
                    lambda tau: np.abs(tau - t) ** (eta - 1.0)
                    * np.asarray(geval(tau), dtype=float),
                    clo, chi, cells=max(1, int((chi - clo) * 16)), n=10)
    return total / math.gamma(eta)


def whitney_abel_A(omega: FatCantorSet, c_k: float, sigma: int, t: float) -> float:
    """A^Omega(c_k, t): the Whitney beta-integral of the parameter spike.

    Equal to (1/Gamma(1/2)) int over {u in [0,1]: t + (c_k - t) u in Omega} of
    (u(1-u))^(-1/2) du, evaluated exactly by arcsine differences on the
    u-preimages of Omega's intervals.  Requires sigma t > sigma c_k; bounded
    by sqrt(pi) with equality at full Omega.
    """
    if not sigma * (t - c_k) > 0:
        raise ValueError("need sigma t > sigma c_k")
    slope = c_k - t

    def u_of(tau):
        return (tau - t) / slope

    total = 0.0
    for lo, hi in omega.intervals():
        u1, u2 = sorted((u_of(lo), u_of(hi)))
        u1, u2 = max(u1, 0.0), min(u2, 1.0)
        if u2 > u1:
            total += 2.0 * (math.asin(math.sqrt(u2)) - math.asin(math.sqrt(u1)))
    return total / SQRT_PI


def whitney_marchaud(omega: FatCantorSet, side: str, eta: float, g, x: float, *,
                     dg=None, gdiff=None, lead=None, level: int = 6) -> float:
    """M^(eta,Omega)_side g(x): the Marchaud kernel integrated over Omega.

    For Lipschitz g the kernel is integrable and no epsilon limit is needed.
    Integration runs in the distance variable d = |x - y| on dyadic cells so
    the kernel stays graded as eta -> 1.  The cell abutting x needs a stable
    near-field treatment because the kernel mass concentrates at d = 0 as
    eta approaches the regularity exponent: pass ``lead = (zeta, coef)``
    with g(x) - g(x - sgn d) = coef(sgn) d^zeta + o(d^zeta) for a closed-form
    leading term (``dg`` is shorthand for the Lipschitz case zeta = 1), and
    optionally ``gdiff(d, sgn) = g(x) - g(x - sgn d)`` for a cancellation-free
    remainder.
    """
    if not omega.contains(x):
        raise OutsideOmegaError(f"x={x} not in Omega")
    if side == "two":
        return 0.5 * (whitney_marchaud(omega, "+", eta, g, x, dg=dg, gdiff=gdiff,
                                       lead=lead, level=level)
                      - whitney_marchaud(omega, "-", eta, g, x, dg=dg, gdiff=gdiff,
                                         lead=lead, level=level))
    if side not in ("+", "-"):
        raise ValueError("side must be '+', '-' or 'two'")
    sgn = 1 if side == "+" else -1
    gx = float(np.asarray(g(x)).ravel()[0])
    if lead is None and dg is not None:
        gpx = float(np.asarray(dg(x)).ravel()[0])
        lead = (1.0, lambda s: gpx * s)

    def diff_at(d):
        if gdiff is not None:
            return np.asarray(gdiff(d, sgn), dtype=float)
        return gx - np.asarray(g(x - sgn * d), dtype=float)

    total = 0.0
    for lo, hi in _sided_intervals(omega, x, "+" if sgn > 0 else "-"):
        d1 = (x - hi) if sgn > 0 else (lo - x)
        d2 = (x - lo) if sgn > 0 else (hi - x)
        d1 = max(d1, 0.0)
        if d2 <= d1 + 1e-300:
            continue
        if d1 < 1e-13:
            # head cell touching x: singularity at d = 0.  The closed-form
            # leading term is essential as eta approaches the regularity
            # exponent (the kernel mass below any fixed cutoff dominates);
            # remainders are evaluated with overflow-safe products.
            if lead is not None:
                zeta_l, cfun = lead
                c = float(cfun(sgn))
                total += c * d2 ** (zeta_l - eta) / (zeta_l - eta)

                def rem(d, da, db):
                    da = np.maximum(da, 1e-200)
                    r = diff_at(da) - c * da ** zeta_l
                    with np.errstate(over="ignore", invalid="ignore"):
                        out = r * da ** (-1.0 - eta)
                    return np.where(r == 0.0, 0.0, np.nan_to_num(out, posinf=0.0, neginf=0.0))

                total += ts_quad(rem, 0.0, d2, level=level, singular=True)
            else:
                def head(d, da, db):
                    da = np.maximum(da, 1e-200)
                    with np.errstate(over="ignore", invalid="ignore"):
                        out = diff_at(da) * da ** (-1.0 - eta)
                    return np.nan_to_num(out, posinf=0.0, neginf=0.0)

                total += ts_quad(head, 0.0, d2, level=level, singular=True)
        else:
            edges = [d1]
            while edges[-1] < d2:
                edges.append(min(edges[-1] * 2.0, d2))
            for clo, chi in zip(edges[:-1], edges[1:]):
                total += gauss_composite(lambda d: diff_at(d) * d ** (-1.0 - eta),
                                         clo, chi, cells=2, n=12)
    return total * eta / math.gamma(1.0 - eta)


def whitney_limit_probe(omega: FatCantorSet, g, x: float, zeta: float = 1.0,
                        eta_schedule=(0.9, 0.99, 0.999), dg=None, gdiff=None,
                        lead=None) -> dict:
    """Report M^(eta,Omega) g(x) along the schedule with the zeta-rescaled
    limit law: for zeta = 1 the values tend to the Omega-Whitney derivative;
    for zeta < 1 they are multiplied by Gamma(1-eta)/(zeta Gamma(zeta-eta))
    before extrapolation."""
    rows = []
    for eta in eta_schedule:
        v = whitney_marchaud(omega, "two", eta, g, x, dg=dg, gdiff=gdiff, lead=lead)
        if zeta < 1.0:
            v *= math.gamma(1.0 - eta) / (zeta * math.gamma(zeta - eta))
        rows.append((eta, v))
    vals = [v for _, v in rows]
    limit = vals[-1]
    if len(vals) >= 3:
        d1, d2 = vals[-2] - vals[-3], vals[-1] - vals[-2]
        if abs(d1) > 1e-15 and abs(d2) < abs(d1):
            limit = vals[-1] + d2 * (d2 / d1) / (1.0 - d2 / d1)
    converged = len(vals) >= 2 and abs(vals[-1] - vals[-2]) < 0.2 * max(1.0, abs(vals[-1]))
    return {"schedule": rows, "extrapolated": limit, "converged": bool(converged),
            "zeta": zeta}
