"""Transversality sums, rational susceptibility series, residues, and the
pole-structure probes for the frozen/response susceptibility at MT parameters.

At an MT parameter the postcritical orbit is eventually periodic, so every
series here has a finite part plus a geometric cycle part summed in closed
form.  The z = 1 residue assembly follows the corrected sign bookkeeping
(see the pole term of the two-sided spike derivative in `fraccalc`): every
piece is proportional to the signed half-transversality sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .ddouble import DD
from .fraccalc import SQRT_PI, hilbert, marchaud_c1
from .mtsolver import MTParameter, PeriodicParameter
from .observables import Observable
from .quadmap import DomainError, critical_orbit, critical_orbit_dd, invariant_interval
from .quadrature import _gauss_rule, _ts_rule, gauss_composite, ts_quad
from .transfer import SingularDensity, invariant_density, solve_phi_t, transfer_values


class PoleProximityError(ValueError):
    """Evaluation point too close to a pole of the rational extension."""


# ---------------------------------------------------------------------------
# transversality sums
# ---------------------------------------------------------------------------

def _orbit_arrays(t: float, count: int):
    orb = critical_orbit(t, count + 1, detect_closing=False)
    return orb.c, orb.D, orb.s


def j_eta(t, eta: float, n_cap: int = 400, signed: bool = True):
    """J_eta(t) = sum_k s_k |Df^k(c_1)|^(-eta) with a certified tail.

    For an MTParameter the cycle tail is geometric and summed exactly
    (certificate 0 up to roundoff); for a float parameter the sum is
    truncated at n_cap with a remainder bound from the measured growth rate.
    With ``signed=False`` the absolute series J^+ is summed instead.
    Returns (value, tail_bound).
    """
    if isinstance(t, MTParameter):
        L, p = t.L, t.p
        c, D, s = _orbit_arrays(t.t_float, L + p + 1)
        lam = abs(t.multiplier)
        sgn_lam = t.cycle_sign if signed else 1
        ratio = sgn_lam * lam ** (-eta)
        total = 0.0
        for k in range(L - 1):
            total += (s[k] if signed else 1.0) * abs(D[k]) ** (-eta)
        block = 0.0
        for k in range(L - 1, L + p - 1):
            block += (s[k] if signed else 1.0) * abs(D[k]) ** (-eta)
        total += block / (1.0 - ratio)
        return total, 0.0
    tf = float(t)
    # log-space accumulation survives escaping orbits (|D_k| overflows fast)
    logD = np.zeros(n_cap)
    sgn = np.ones(n_cap)
    ck = 0.0
    acc = 0.0
    sacc = 1.0
    for k in range(1, n_cap):
        ck = tf - ck * ck
        acc += math.log(abs(2.0 * ck)) if ck != 0 else -math.inf
        sacc *= -math.copysign(1.0, ck)
        logD[k] = acc
        sgn[k] = sacc
    with np.errstate(under="ignore"):
        terms = (sgn if signed else np.ones_like(sgn)) * np.exp(-eta * logD)
    total = float(np.sum(terms))
    slope = float((logD[1:] @ np.arange(1, n_cap)) / (np.arange(1, n_cap) @ np.arange(1, n_cap)))
    if slope <= 0.0:
        raise DomainError("no derivative growth established; tail unbounded")
    tail = math.exp(-eta * logD[-1]) * math.exp(-eta * slope) / (1.0 - math.exp(-eta * slope))
    return total, tail


def j_eta_dd(param: MTParameter, eta: float) -> DD:
    """Double-double cycle-tail evaluation; eta restricted to {1/2, 1}."""
    if eta not in (0.5, 1.0):
        raise DomainError("double-double path supports eta in {1/2, 1}")
    L, p = param.L, param.p
    c, D, s = critical_orbit_dd(param.t, L + p + 1)

    def poweta(x: DD) -> DD:
        return x.sqrt() if eta == 0.5 else x

    one = DD(1.0)
    mult = DD(1.0)
    for m in range(L, L + p):
        mult = mult * (DD(-2.0) * c[m - 1])
    sgn_lam = 1 if mult.hi > 0 else -1
    ratio = one / poweta(abs(mult))
    if sgn_lam < 0:
        ratio = -ratio
    total = DD(0.0)
    for k in range(L - 1):
        term = one / poweta(abs(D[k]))
        total = total + (term if s[k] > 0 else -term)
    block = DD(0.0)
    for k in range(L - 1, L + p - 1):
        term = one / poweta(abs(D[k]))
        block = block + (term if s[k] > 0 else -term)
    return total + block / (one - ratio)


def j_per(pp: PeriodicParameter, eta: float) -> float:
    """Finite transversality sum over a superstable cycle (k = 0..p-1)."""
    _, D, s = _orbit_arrays(float(pp.t), pp.p)
    return float(sum(s[k] * abs(D[k]) ** (-eta) for k in range(pp.p)))


# ---------------------------------------------------------------------------
# rational series
# ---------------------------------------------------------------------------

def u_series(param: MTParameter, rho0: float, z, variant: str = "signed",
             terms_direct: int | None = None):
    """U_{1/2}(z) (signed) or U^+_{1/2}(z) (plus) in closed rational form.

    ``terms_direct`` switches to the truncated direct sum (an oracle for the
    closed form).  Raises PoleProximityError within 1e-6 of the cycle pole.
    """
    if variant not in ("signed", "plus"):
        raise ValueError("variant must be 'signed' or 'plus'")
    signed = variant == "signed"
    u_t = -rho0 / (2.0 * SQRT_PI)
    front = u_t * math.pi if signed else u_t
    L, p = param.L, param.p
    c, D, s = _orbit_arrays(param.t_float, L + p + 1)
    lam = abs(param.multiplier)
    q = (param.cycle_sign if signed else 1) / math.sqrt(lam)
    z = complex(z)
    if terms_direct is not None:
        total = 0.0
        sk = 1.0
        Dk = 1.0
        ck = 0.0
        t = param.t_float
        for m in range(terms_direct):
            total += (sk if signed else 1.0) / (z ** m * math.sqrt(abs(Dk)))
            ck = t - ck * ck
            Dk *= -2.0 * ck
            sk = math.copysign(1.0, Dk)
        return front * total
    if abs(z ** p - q) < 1e-6:
        raise PoleProximityError(f"z^p within 1e-6 of the cycle pole {q}")
    total = 0.0j
    for m in range(L):
        total += (s[m] if signed else 1.0) * z ** (L - 1 - m) / math.sqrt(abs(D[m]))
    for m in range(L, L + p):
        total += (s[m] if signed else 1.0) * z ** (L + p - 1 - m) / math.sqrt(abs(D[m])) \
            / (z ** p - q)
    val = front * total / z ** (L - 1)
    return val.real if abs(val.imag) < 1e-14 * max(1.0, abs(val.real)) else val


def u_series_poles(param: MTParameter, variant: str = "signed") -> np.ndarray:
    lam = abs(param.multiplier)
    q = (param.cycle_sign if variant == "signed" else 1) / math.sqrt(lam)
    p = param.p
    base = complex(q) ** (1.0 / p)
    return np.array([abs(base) * np.exp(2j * np.pi * (np.angle(complex(q)) / (2 * np.pi) + k) / p)
                     for k in range(p)])


def _cycle_series(finite_coefs, cycle_coefs, cycle_start: int, ratio_sign: int, z):
    """sum_l a_l z^(l-1) with a_(l+p) = ratio_sign a_l for l >= cycle_start."""
    z = complex(z)
    p = len(cycle_coefs)
    total = 0.0j
    for i, a in enumerate(finite_coefs):
        total += a * z ** i
    denom = 1.0 - ratio_sign * z ** p
    if abs(denom) < 1e-9:
        raise PoleProximityError("z too close to a cycle pole")
    for i, a in enumerate(cycle_coefs):
        total += a * z ** (cycle_start - 1 + i) / denom
    return total


@dataclass
class RationalEvaluator:
    """Closed-form evaluators for the MT rational series, with pole data."""

    param: MTParameter
    rho0: float
    phi: Observable
    hilbert_coefs: np.ndarray  # H(1_I phi)(c_l), l = 1..L+p-1
    phi_coefs: np.ndarray      # phi(c_l)

    def u(self, z, variant="signed"):
        return u_series(self.param, self.rho0, z, variant=variant)

    def sigma(self, z, variant="plain"):
        return sigma_series(self.param, self.phi, variant, z,
                            _cached=(self.phi_coefs, self.hilbert_coefs))

    def sigma_poles(self, variant="plain") -> np.ndarray:
        p = self.param.p
        if variant == "plain":
            return np.exp(2j * np.pi * np.arange(p) / p)
        root = complex(self.param.cycle_sign) ** (1.0 / p)
        return np.array([root * np.exp(2j * np.pi * k / p) for k in range(p)])


def hilbert_at_postcritical(param: MTParameter, phi: Observable,
                            count: int | None = None) -> np.ndarray:
    """H(1_{I_t} phi)(c_l) for l = 1..count (default L+p-1)."""
    t = param.t_float
    a_t, b_t = invariant_interval(t)
    count = count or (param.L + param.p - 1)
    c, _, _ = _orbit_arrays(t, count + 1)
    return np.array([hilbert(phi, (a_t, b_t), float(c[l - 1])) for l in range(1, count + 1)])


def sigma_series(param: MTParameter, phi: Observable, variant: str, z,
                 density: SingularDensity | None = None, _cached=None):
    """Sigma series at z in closed rational form.

    plain:   coefficients phi(c_l), poles at the p-th roots of unity;
    hilbert: coefficients -s_l H(1_I phi)(c_l), poles at the p-th roots of
             sgn(Df^p(c_L));
    chi:     coefficients s_l int phi (chi~_(l+1) - mean) dx (Lebesgue mean;
             the pairing against phi makes the function-valued series scalar).
    """
    L, p = param.L, param.p
    t = param.t_float
    c, D, s = _orbit_arrays(t, L + p + 1)
    if variant == "plain":
        coefs = np.array([float(phi(np.array([c[l - 1]]))[0]) for l in range(1, L + p)])
        return _cycle_series(coefs[: L - 1], coefs[L - 1: L + p - 1], L, 1, z)
    if variant == "hilbert":
        hil = _cached[1] if _cached is not None else hilbert_at_postcritical(param, phi)
        coefs = np.array([-s[l] * hil[l - 1] for l in range(1, L + p)])
        return _cycle_series(coefs[: L - 1], coefs[L - 1: L + p - 1], L,
                             param.cycle_sign, z)
    if variant == "chi":
        coefs = np.array([s[l] * _chi_pairing(param, phi, l) for l in range(1, L + p)])
        return _cycle_series(coefs[: L - 1], coefs[L - 1: L + p - 1], L,
                             param.cycle_sign, z)
    raise ValueError("variant must be 'plain', 'hilbert' or 'chi'")


def _chi_pairing(param: MTParameter, phi: Observable, ell: int) -> float:
    """int_I phi(x) (chi~_(l+1)(x) - Lebesgue mean) dx."""
    from .transfer import _chi_tilde_integral, chi_tilde_factory

    t = param.t_float
    L, p = param.L, param.p
    a_t, b_t = invariant_interval(t)
    c, _, _ = _orbit_arrays(t, L + p + 2)
    m = ell + 1
    idx = m - 1 if m - 1 < L + p else (L - 1 + ((m - 1 - (L - 1)) % p))
    cm = c[idx]
    cm_prev = c[m - 2] if m - 2 < L + p else c[L - 1 + ((m - 2 - (L - 1)) % p)]
    sgn_prev = 1 if -2.0 * cm_prev > 0 else -1
    f = chi_tilde_factory(t, cm, cm_prev, sgn_prev)
    mean = _chi_tilde_integral(t, a_t, b_t, t, cm, cm_prev, sgn_prev) / (b_t - a_t)

    def low(x, da, db):
        return np.asarray(phi(x), dtype=float) * (
            -1.0 / (cm_prev * np.sqrt(db))
            + 1.0 / (cm_prev * (math.sqrt(max(t - cm, 0.0)) + np.sqrt(db)))
            - mean)

    total = ts_quad(low, a_t, t, level=7, singular=True)
    total += ts_quad(lambda x: np.asarray(phi(x), dtype=float) * (f(x) - mean),
                     t + 1e-300, b_t, level=6)
    return total


# ---------------------------------------------------------------------------
# integration against densities
# ---------------------------------------------------------------------------

def density_mesh(density: SingularDensity, cells: int = 512, n: int = 6,
                 spike_level: int = 6):
    """Quadrature nodes/weights for int f d(density): Gauss on the smooth part
    (interpolated) plus tanh-sinh nodes weighted by each spike."""
    g = density.smooth
    gx, gw = _gauss_rule(n)
    edges = np.linspace(g.a, g.b, cells + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1] - edges[0])
    xs = (mids[:, None] + half * gx[None, :]).ravel()
    ws = np.tile(gw * half, cells) * g(xs)
    nodes = [xs]
    weights = [ws]
    da, db, w = _ts_rule(spike_level)
    for sp in density.spikes:
        lo, hi = sp.support
        length = hi - lo
        d_end = (da if sp.side > 0 else db) * length
        x_sp = sp.x0 + sp.side * d_end
        vals = sp.value_at_dist(np.maximum(d_end, 1e-300))
        nodes.append(x_sp)
        weights.append(vals * w * length)
    return np.concatenate(nodes), np.concatenate(weights)


def integrate_against_density(density: SingularDensity, f, cells: int = 512) -> float:
    xs, ws = density_mesh(density, cells=cells)
    return float(np.sum(np.asarray(f(xs), dtype=float) * ws))


# ---------------------------------------------------------------------------
# susceptibility coefficients
# ---------------------------------------------------------------------------

def _phi_kernel_args(phi):
    b = getattr(phi, "f", phi)
    if hasattr(b, "centers"):
        return b.centers, b.widths, b.amps
    raise TypeError("observable must wrap a BumpSum for the kernel path")


def ruelle_psi_coeff(param_or_t, phi: Observable, k: int,
                     density: SingularDensity) -> float:
    """int (phi o f^k)' rho dx with singularity-aware quadrature."""
    t = param_or_t.t_float if isinstance(param_or_t, MTParameter) else float(param_or_t)
    centers, widths, amps = _phi_kernel_args(phi)

    def dpsi(x):
        return _kernels.dpsi_k_values(np.ascontiguousarray(x, dtype=float), t, k,
                                      centers, widths, amps)

    cells = max(512, min(2 ** k * 8, 1 << 15))
    return integrate_against_density(density, dpsi, cells=cells)


def psi_rsp_coeff(param_or_t, phi: Observable, eta: float, k: int,
                  density: SingularDensity, side: str = "two",
                  method: str = "direct", chunk: int = 48) -> float:
    """int M^eta_x(phi o f^k) rho dx.

    method 'direct': the Marchaud factor is evaluated pointwise on the
    spike-aware density mesh (cost grows like 4^k; use for k <= 8).
    method 'primitive': fractional integration by parts moves everything
    onto the k-independent half-integral S of the density (two-sided only),
    so each coefficient costs one oscillatory quadrature; see
    DensityHalfIntegral.
    """
    t = param_or_t.t_float if isinstance(param_or_t, MTParameter) else float(param_or_t)
    centers, widths, amps = _phi_kernel_args(phi)

    def dpsi(x):
        return _kernels.dpsi_k_values(np.ascontiguousarray(x, dtype=float), t, k,
                                      centers, widths, amps)

    if method == "primitive":
        if side != "two":
            raise ValueError("primitive route implements the two-sided derivative")
        S = DensityHalfIntegral.get(density, eta)
        return S.pair_with(dpsi, k)

    def psi(x):
        return _kernels.psi_k_values(np.ascontiguousarray(x, dtype=float), t, k,
                                     centers, widths, amps)

    cells = max(384, min(2 ** k * 6, 1 << 13))
    xs, ws = density_mesh(density, cells=min(cells, 4096))
    osc = max(96, min(2 ** k * 6, 1 << 13))
    out = np.empty_like(xs)
    for i in range(0, xs.size, chunk):
        sl = slice(i, min(i + chunk, xs.size))
        out[sl] = marchaud_c1(side, eta, psi, dpsi, xs[sl],
                              support=(-2.0 - 1e-9, 2.0 + 1e-9),
                              osc_cells=osc, gauss_n=6)
    return float(np.sum(out * ws))


class DensityHalfIntegral:
    """S(x) = (1/2 Gamma(1-eta)) int rho(y) |x-y|^(-eta) dy.

    This is the pointwise limit of the two-sided Marchaud derivative of the
    density's primitive, so <M^eta rho, psi> = -int S psi' dx and the
    response coefficients become a_k = int S (phi o f^k)' dx.  The smooth
    part is an exact-kernel grid convolution (FFT); spike contributions use
    closed forms at eta = 1/2 and quadrature otherwise.  S carries integrable
    log-type singularities at the spike locations.
    """

    _cache: dict = {}

    def __init__(self, density: SingularDensity, eta: float):
        self.density = density
        self.eta = eta
        g = density.smooth
        self.a, self.b = g.a, g.b
        n = g.values.size
        h = g.step
        # exact cell integrals of the kernel: K_m = int_{(m-1/2)h}^{(m+1/2)h} |u|^-eta du
        m = np.arange(n)
        up = (m + 0.5) ** (1.0 - eta)
        lo = np.maximum(m - 0.5, 0.0) ** (1.0 - eta)
        K = (up - lo) * h ** (1.0 - eta) / (1.0 - eta)
        kern = np.concatenate([K[::-1], K[1:]])
        # linear convolution via FFT, sliced to the aligned 'valid' part
        size = 1 << int(np.ceil(np.log2(kern.size + n)))
        fa = np.fft.rfft(g.values, size)
        fb = np.fft.rfft(kern, size)
        full = np.fft.irfft(fa * fb, size)
        self.smooth_conv = full[n - 1: 2 * n - 1]
        self.front = 1.0 / (2.0 * math.gamma(1.0 - eta))
        self.xs = g.x

    @classmethod
    def get(cls, density: SingularDensity, eta: float) -> "DensityHalfIntegral":
        key = (id(density), round(eta, 12))
        if key not in cls._cache:
            cls._cache[key] = cls(density, eta)
        return cls._cache[key]

    def _spike_part(self, x: np.ndarray) -> np.ndarray:
        """sum over spikes of coef int_0^w d^(-1/2) |x - x0 - s d|^(-eta) dd."""
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for sp in self.density.spikes:
            A = sp.side * (x - sp.x0)  # signed distance along the spike side
            U = math.sqrt(sp.truncation)
            if abs(self.eta - 0.5) < 1e-12:
                total = total + 2.0 * sp.coef * _halfint_sqrt_kernel(A, U)
            else:
                total = total + sp.coef * _spike_halfint_quad(A, U, self.eta)
        return total

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        sm = np.interp(x, self.xs, self.smooth_conv)
        return self.front * (sm + self._spike_part(x))

    def pair_with(self, dpsi, k: int) -> float:
        """int S(x) dpsi(x) dx with log-aware cells at the spike locations."""
        from .quadrature import split_segments

        sing = sorted({sp.x0 for sp in self.density.spikes})
        total = 0.0
        for lo, hi in split_segments(self.a, self.b, sing):
            cells = max(64, min(int(2 ** k * 6 * (hi - lo) / (self.b - self.a)) + 1,
                                1 << 13))
            total += gauss_composite(lambda x: self(x) * np.asarray(dpsi(x), float),
                                     lo, hi, cells=cells, n=6)
        return total


def _halfint_sqrt_kernel(A: np.ndarray, U: float) -> np.ndarray:
    """int_0^U du / sqrt|A - u^2| in closed form (A any sign)."""
    A = np.asarray(A, dtype=float)
    out = np.empty_like(A)
    neg = A <= 0
    an = np.sqrt(np.maximum(-A, 1e-300))
    out[neg] = np.arcsinh(U / an[neg])
    ap = np.sqrt(np.maximum(A, 1e-300))
    insideU = (~neg) & (U <= ap)
    out[insideU] = np.arcsin(np.minimum(U / ap[insideU], 1.0))
    beyond = (~neg) & (U > ap)
    out[beyond] = 0.5 * math.pi + np.arccosh(np.maximum(U / ap[beyond], 1.0))
    return out


def _spike_halfint_quad(A: np.ndarray, U: float, eta: float) -> np.ndarray:
    """2 int_0^U |A - u^2|^(-eta) du by tanh-sinh per element (eta != 1/2 path)."""
    da, _, w = _ts_rule(6)
    flat = np.ravel(np.asarray(A, dtype=float))
    out = np.empty_like(flat)
    for i, a in enumerate(flat):
        us = math.sqrt(a) if a > 0 else None
        segs = [(0.0, U)] if us is None or us >= U else [(0.0, us), (us, U)]
        acc = 0.0
        for lo, hi in segs:
            u = lo + (hi - lo) * da
            vals = np.abs(a - u * u) ** (-eta)
            acc += float(np.sum(vals * w) * (hi - lo))
        out[i] = 2.0 * acc
    return out.reshape(np.shape(A))


# ---------------------------------------------------------------------------
# frozen translation identity
# ---------------------------------------------------------------------------

def frozen_translation_check(t0: float, density: SingularDensity, taus, xs,
                             eps0: float | None = None) -> float:
    """max over samples of |L_(t0+tau) rho(x) - rho(x - tau_eff)|.

    tau_eff is tau clipped to [-eps0, eps0] (the family is frozen outside the
    clamping window).  Sample points falling within an exclusion zone of a
    (translated) spike are skipped.
    """
    xs = np.asarray(xs, dtype=float)
    h = 12 * density.smooth.step
    worst = 0.0
    for tau in np.atleast_1d(taus):
        tau_eff = tau if eps0 is None else float(np.clip(tau, -eps0, eps0))
        teff = t0 + tau_eff
        lhs = transfer_values(teff, density.eval, xs)
        rhs = density.eval(xs - tau_eff)
        keep = np.ones_like(xs, dtype=bool)
        for loc in {*density.spike_locations(), t0}:
            keep &= np.abs(xs - (loc + tau_eff)) > h
            keep &= np.abs(xs - loc) > h
        keep &= (xs > density.smooth.a + 2 * h) & (xs < t0 - 2 * h)
        if np.any(keep):
            worst = max(worst, float(np.max(np.abs(lhs[keep] - rhs[keep]))))
    return worst


# ---------------------------------------------------------------------------
# semifreddo / Whitney susceptibility coefficient
# ---------------------------------------------------------------------------

def whitney_semifreddo_coeff(param_or_t, phi: Observable, eta: float, k: int,
                             omega, density: SingularDensity, *,
                             frozen_observable: bool = True,
                             eps0: float | None = None,
                             tau_level: int = 5, cells: int = 1024) -> float:
    """z^k coefficient of the Omega-restricted fractional susceptibility.

    Uses the translation identity: (L_(t0+tau) - L_t0) rho(x) = rho(x - tau~)
    - rho(x), so the x-integral becomes F_k(tau) - G_k(tau) with
    F_k(tau) = int psi_k^tau(y + tau~) d rho(y); the frozen flag freezes the
    observable's map at t0 (semifreddo) or lets it move (full definition).
    """
    t0 = param_or_t.t_float if isinstance(param_or_t, MTParameter) else float(param_or_t)
    if not omega.contains(t0):
        raise DomainError("Omega must contain the base parameter")
    centers, widths, amps = _phi_kernel_args(phi)
    xs, ws = density_mesh(density, cells=cells)

    def fk_minus_gk(tau: float) -> float:
        tau_eff = tau if eps0 is None else float(np.clip(tau, -eps0, eps0))
        tmap = t0 if frozen_observable else t0 + tau
        lhs = _kernels.psi_k_values(np.ascontiguousarray(xs + tau_eff), tmap, k,
                                    centers, widths, amps)
        rhs = _kernels.psi_k_values(np.ascontiguousarray(xs), tmap, k,
                                    centers, widths, amps)
        return float(np.sum((lhs - rhs) * ws))

    def kernel_vals(taus, mags):
        return np.array([fk_minus_gk(tv) * math.copysign(1.0, tv) * m ** (-1.0 - eta)
                         for tv, m in zip(taus, mags)])

    total = 0.0
    for lo, hi in omega.intervals():
        lo_t, hi_t = lo - t0, hi - t0
        if hi_t < 0 or lo_t > 0:  # cell on one side of tau = 0
            total += ts_quad(lambda tau: kernel_vals(tau, np.abs(tau)),
                             lo_t, hi_t, level=tau_level)
        else:
            if -lo_t > 1e-12:
                total += ts_quad(lambda tau, da, db: kernel_vals(-db, db),
                                 lo_t, 0.0, level=tau_level, singular=True)
            if hi_t > 1e-12:
                total += ts_quad(lambda tau, da, db: kernel_vals(da, da),
                                 0.0, hi_t, level=tau_level, singular=True)
    return total * eta / (2.0 * math.gamma(1.0 - eta))


# ---------------------------------------------------------------------------
# residues and the theorem-C probe
# ---------------------------------------------------------------------------

def residues(param: MTParameter, phi: Observable, density: SingularDensity,
             phi_t: SingularDensity | None = None) -> dict:
    """z = 1 pole data: P(1), P+(1), and the full W residue.

    P(1) and P+(1) are the actual limits lim (z-1) U Sigma (so they match a
    z -> 1 extrapolation oracle).  W_res uses the corrected assembly (every
    term proportional to J_(1/2)) with phi zero-meaned against mu_t; it is
    only nonzero for cycle sign +1 and needs phi_t.
    """
    t = param.t_float
    L, p = param.L, param.p
    rho0 = float(density.eval(0.0))
    u_t = -rho0 / (2.0 * SQRT_PI)
    J, _ = j_eta(param, 0.5)
    Jp, _ = j_eta(param, 0.5, signed=False)
    c, D, s = _orbit_arrays(t, L + p + 1)
    hil = hilbert_at_postcritical(param, phi, count=L + p)
    cyc = range(L, L + p)  # l = L..L+p-1 spans one period
    sum_phi = sum(float(phi(np.array([c[l - 1]]))[0]) for l in cyc)
    sum_sH = sum(s[l] * hil[l - 1] for l in cyc)
    sum_sprevH = sum(s[l - 1] * hil[l - 1] for l in cyc)
    P1 = u_t * math.pi * J * (-1.0 / p) * sum_phi
    if param.cycle_sign == 1:
        P1_plus = u_t * Jp * (1.0 / p) * sum_sH
    else:
        P1_plus = 0.0
    out = {"P1": P1, "P1_plus": P1_plus, "rho0": rho0, "J_half": J,
           "J_half_plus": Jp, "sum_phi_cycle": sum_phi,
           "sum_sH_cycle": sum_sH, "u_t": u_t}
    if param.cycle_sign == 1 and phi_t is not None:
        mean = integrate_against_density(density, phi)
        phi0 = phi.shifted(mean)
        hil0 = hil - mean * np.array(
            [hilbert(Observable(f=lambda x: np.ones_like(np.asarray(x, float)),
                                df=lambda x: np.zeros_like(np.asarray(x, float)),
                                support=(-2.0, 2.0)),
                     invariant_interval(t), float(c[l - 1])) for l in range(1, L + p + 1)])
        sum_phi0 = sum(float(phi0(np.array([c[l - 1]]))[0]) for l in cyc)
        sum_sprevH0 = sum(s[l - 1] * hil0[l - 1] for l in cyc)
        int_phi_phit = _integrate_against_signed(phi0, phi_t)
        s_Lm1 = s[L - 1]
        res_A1 = u_t * math.pi * (J / p) * sum_phi0
        res_A2 = -u_t * math.pi * (J / p) * sum_sprevH0
        res_B = u_t * (J / (p * s_Lm1)) * int_phi_phit
        out.update({"W_res": res_A2 + res_B, "res_A1": res_A1, "res_A2": res_A2,
                    "res_B": res_B, "z1_residue": res_A1 + res_A2 + res_B,
                    "phi_mean": mean})
    return out


def _integrate_against_signed(f, dens: SingularDensity) -> float:
    """int f * dens for a signed spikes+smooth object."""
    xs = dens.smooth.x
    total = float(np.trapz(np.asarray(f(xs), dtype=float) * dens.smooth.values,
                           dx=dens.smooth.step))
    da, db, w = _ts_rule(6)
    for sp in dens.spikes:
        lo, hi = sp.support
        length = hi - lo
        if length <= 0:
            continue
        d_end = (da if sp.side > 0 else db) * length
        x_sp = sp.x0 + sp.side * d_end
        vals = sp.value_at_dist(np.maximum(d_end, 1e-300))
        total += float(np.sum(np.asarray(f(x_sp), dtype=float) * vals * w * length))
    return total


def alpha_half(param: MTParameter, ell: int, z, m_cap: int = 60) -> complex:
    """alpha_(1/2)(c_l, z) = -sum_m z^-m s_(m,l) / sqrt|Df^m(c_l)| truncated,
    with the geometric cycle tail bound folded in via m_cap."""
    t = param.t_float
    c, _, _ = _orbit_arrays(t, ell + m_cap + 2)
    z = complex(z)
    total = 0.0j
    Dm = 1.0
    for m in range(1, m_cap + 1):
        Dm *= -2.0 * c[ell + m - 2]  # Df at c_(l+m-1)
        total += -math.copysign(1.0, Dm) / (z ** m * math.sqrt(abs(Dm)))
        if abs(Dm) > 1e280:
            break
    return total


def theorem_c_probe(param: MTParameter, phi: Observable,
                    density: SingularDensity, *, k_quad: int = 12,
                    eta: float = 0.5, sign_calibration: int = 1) -> dict:
    """Averaged-coefficient probe of the z = 1 pole of Psi^rsp(1/2, .).

    Computes response coefficients a_k directly by quadrature, averages over
    the cycle period (2p when the cycle sign is -1, killing the poles at the
    p-th roots of -1), extrapolates geometrically, and compares with the
    closed-form -(z=1 residue).  `sign_calibration` is the one-time global
    sign fixed by the brute-force run and then frozen in the test suite.
    """
    mean = integrate_against_density(density, phi)
    phi0 = phi.shifted(mean)
    aks = np.array([psi_rsp_coeff(param, phi0, eta, k, density)
                    for k in range(k_quad + 1)])
    p = param.p
    window = p if param.cycle_sign == 1 else 2 * p
    avgs = np.array([np.mean(aks[m - window + 1: m + 1])
                     for m in range(window - 1, k_quad + 1)])
    # geometric extrapolation on the last averages
    extrap = float(avgs[-1])
    if len(avgs) >= 3:
        d1, d2 = avgs[-2] - avgs[-3], avgs[-1] - avgs[-2]
        if abs(d1) > 1e-14 and abs(d2 / d1) < 0.95:
            extrap = float(avgs[-1] + d2 * (d2 / d1) / (1.0 - d2 / d1))
    out = {"a_k": aks, "averages": avgs, "extrapolated": extrap,
           "window": window, "cycle_sign": param.cycle_sign}
    if param.cycle_sign == 1:
        phi_t, info = solve_phi_t(param, density)
        res = residues(param, phi, density, phi_t=phi_t)
        closed = -res["z1_residue"] * sign_calibration
        out.update({"closed_limit": closed, "residue_parts": res,
                    "phi_t_info": {k: v for k, v in info.items() if k != "m0"},
                    "rel_diff": abs(extrap - closed) / max(abs(closed), 1e-12)})
    else:
        res = residues(param, phi, density)
        out.update({"closed_limit": -res["P1"] * sign_calibration,
                    "residue_parts": res,
                    "bounded": bool(np.max(np.abs(avgs)) < 10 * (np.abs(aks).max() + 1e-12))})
    return out
