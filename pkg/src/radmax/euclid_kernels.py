"""Euclidean evolution kernels and their convolution with radial data.

Three nonnegative radial-decreasing unit-mass kernels are supported:

  poisson_rd   c_d * t / (r^2 + t^2)^((d+1)/2),  c_d = Gamma((d+1)/2)/pi^((d+1)/2)
  heat_rd      (4 pi t)^(-d/2) * exp(-r^2 / 4t)
  phi11_rd     inverse Fourier transform of exp(-t * m(|xi|)),
               m(rho) = (-1 + sqrt(1 + 16 pi^2 rho^2)) / 2

The third kernel has no closed form; it is evaluated as the 1-d Hankel-type
integral

  phi(r, t) = 2 pi r^(1 - d/2) int_0^inf e^{-t m(p)} J_{d/2-1}(2 pi r p) p^(d/2) dp,

split at the zeros of the Bessel factor with an averaged alternating tail,
and by the non-oscillatory limit form at (and near) r = 0.  Since the panel
nodes live in Bessel-argument space they are shared by every (r, t) pair,
which makes batched evaluation cheap.  A subordination representation (a
smooth positive superposition of heat kernels) provides an independent
route used for cross-checks and window-mass estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma, gammainc, ive, jv

from .numerics import gauss_legendre_01, sin_power_integral, sphere_area, trapezoid_weights
from .profiles import RadialProfile

EUCLID_FAMILIES = ("poisson_rd", "heat_rd", "phi11_rd")
SPHERE_FAMILIES = ("poisson_sphere", "heat_sphere")

_PHI11_ZEROS = 160
_PHI11_GL = 12
_PHI11_TAIL = 24


class KernelAccuracyError(RuntimeError):
    """Quadrature failed its accuracy budget; carries the achieved estimate."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


@dataclass(frozen=True)
class KernelSpec:
    """Which evolution kernel to use, with evaluation parameters.

    family: poisson_rd | heat_rd | phi11_rd | poisson_sphere | heat_sphere.
    The flow parameter traverses [t_min, t_max]; the spherical Poisson

    parameter is rho = 1 - t with t in the window, so rho sweeps [0, 1).
    """

    family: str
    d: int
    eps: float = 1e-8
    t_min: float = 1e-4
    t_max: float = 1e4

    def __post_init__(self):
        if self.family not in EUCLID_FAMILIES + SPHERE_FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not 0 < self.t_min < self.t_max:
            raise ValueError("need 0 < t_min < t_max")
        if self.family == "heat_sphere" and self.t_min < 1e-3:
            # below this the Gegenbauer series needs thousands of terms
            object.__setattr__(self, "t_min", 1e-3)
        if self.family == "poisson_sphere":
            object.__setattr__(self, "t_min", max(self.t_min, 1e-8))
            object.__setattr__(self, "t_max", min(self.t_max, 1.0))

    @property
    def is_euclidean(self) -> bool:
        return self.family in EUCLID_FAMILIES


@dataclass(frozen=True)
class EvolutionSnapshot:
    """u(., param) = (|u0| * kernel(., param)) sampled on the base profile's nodes."""

    base: object
    param: float
    values: np.ndarray = field(repr=False)


def poisson_kernel_rd(r, t, d: int):
    """Poisson kernel on R^d: c_d * t / (r^2 + t^2)^((d+1)/2)."""
    if np.any(np.asarray(t) <= 0):
        raise ValueError("flow parameter t must be positive")
    c = gamma((d + 1) / 2.0) / np.pi ** ((d + 1) / 2.0)
    return c * t / (np.asarray(r) ** 2 + np.asarray(t) ** 2) ** ((d + 1) / 2.0)


def heat_kernel_rd(r, t, d: int):
    """Gauss-Weierstrass kernel on R^d: (4 pi t)^(-d/2) exp(-r^2 / 4t)."""
    if np.any(np.asarray(t) <= 0):
        raise ValueError("flow parameter t must be positive")
    return (4.0 * np.pi * np.asarray(t)) ** (-d / 2.0) * np.exp(-np.asarray(r) ** 2 / (4.0 * np.asarray(t)))


def _symbol_m(p):
    """Exponent of the third kernel's Fourier multiplier exp(-t m(p))."""
    return 0.5 * (-1.0 + np.sqrt(1.0 + 16.0 * np.pi ** 2 * np.asarray(p) ** 2))


@lru_cache(maxsize=64)
def bessel_zeros(nu: float, count: int) -> tuple[float, ...]:
    """First `count` positive zeros of J_nu via McMahon brackets refined by brentq.

    Handles the non-integer orders d/2 - 1 arising in odd dimensions.
    """
    zeros: list[float] = []
    for k in range(1, count + 1):
        approx = (k + nu / 2.0 - 0.25) * np.pi
        lo = max(approx - 0.49 * np.pi, zeros[-1] + 1e-9 if zeros else 1e-6)
        hi = approx + 0.49 * np.pi
        if jv(nu, lo) * jv(nu, hi) > 0:
            grid = np.linspace(zeros[-1] + 1e-9 if zeros else 1e-6, hi, 128)
            vals = jv(nu, grid)
            idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
            lo, hi = grid[idx[-0]], grid[idx[0] + 1]
        zeros.append(brentq(lambda x: jv(nu, x), lo, hi, xtol=1e-13))
    return tuple(zeros)


@lru_cache(maxsize=16)
def _phi11_panels(nu: float):
    """Gauss-Legendre nodes between consecutive Bessel zeros, in argument space."""
    edges = np.concatenate([[0.0], bessel_zeros(nu, _PHI11_ZEROS)])
    x, w = gauss_legendre_01(_PHI11_GL)
    a = edges[:-1][:, None]
    h = np.diff(edges)[:, None]
    xs = a + h * x[None, :]              # (P, G)
    ws = h * w[None, :]
    return xs, ws, jv(nu, xs), edges


def _phi11_cutoff(t: float, d: int) -> float:
    """p beyond which exp(-t m(p)) p^(d-1) drops ~1e-18 below its peak."""
    target = 42.0 + 4.0 * d
    p = max(1.0, target / (2.0 * np.pi * t))
    for _ in range(8):
        p = (target + (d - 1) * np.log1p(p)) / (2.0 * np.pi * t) + 1.0 / (2.0 * np.pi)
    return p


def _phi11_smooth(r: np.ndarray, t: float, d: int) -> np.ndarray:
    """Non-oscillatory branch for radii with no Bessel zero before the decay cutoff."""
    cut = _phi11_cutoff(t, d)
    edges = np.concatenate([[0.0], np.geomspace(cut * 1e-6, cut, 24)])
    x, w = gauss_legendre_01(16)
    a = edges[:-1][:, None]
    h = np.diff(edges)[:, None]
    p = (a + h * x[None, :]).ravel()
    wp = (h * w[None, :]).ravel()
    nu = d / 2.0 - 1.0
    decay = np.exp(-t * _symbol_m(p))
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(len(r))
    at0 = r == 0.0
    if np.any(at0):
        out[at0] = sphere_area(d - 1) * np.dot(wp, decay * p ** (d - 1))
    pos = ~at0
    if np.any(pos):
        rp = r[pos]
        vals = (np.exp(-t * _symbol_m(p))[None, :] * jv(nu, 2.0 * np.pi * rp[:, None] * p[None, :])
                * p[None, :] ** (d / 2.0)) @ wp
        out[pos] = 2.0 * np.pi * rp ** (-(d / 2.0 - 1.0)) * vals
    return out


def _phi11_oscillatory(r: np.ndarray, t, d: int):
    """Zero-split Hankel quadrature for an array of radii (t scalar or per-radius).

    Returns (values, error_estimates); the estimate is the spread of the
    averaged tail, or the last panel size when the integrand has decayed.
    """
    nu = d / 2.0 - 1.0
    xs, ws, jvals, _ = _phi11_panels(nu)
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t = np.broadcast_to(np.asarray(t, dtype=float), r.shape)
    twopir = 2.0 * np.pi * r
    p = xs[None, :, :] / twopir[:, None, None]                       # (R, P, G)
    integ = np.exp(-t[:, None, None] * _symbol_m(p)) * jvals[None, :, :] * p ** (d / 2.0)
    pieces = (integ * ws[None, :, :]).sum(axis=2) / twopir[:, None]  # (R, P)
    partial = np.cumsum(pieces, axis=1)
    tail_est, tail_err = _tail_average(partial)
    decayed = np.abs(pieces[:, -1]) <= 1e-18 * np.maximum(np.abs(partial[:, -1]), 1e-300)
    val = np.where(decayed, partial[:, -1], tail_est)
    err = np.where(decayed, np.abs(pieces[:, -1]), tail_err)
    pref = 2.0 * np.pi * r ** (-(d / 2.0 - 1.0))
    return pref * val, pref * err


def _tail_average(partial: np.ndarray):
    s = partial[:, -_PHI11_TAIL:]
    while s.shape[1] > 2:
        s = 0.5 * (s[:, 1:] + s[:, :-1])
    return s[:, -1], np.abs(s[:, -1] - s[:, 0])


def phi11_profile(r, t: float, d: int) -> np.ndarray:
    """phi11(., t) on an array of radii, dispatching smooth vs oscillatory branch."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    nu = d / 2.0 - 1.0
    first_zero = bessel_zeros(nu, 1)[0]
    cut = _phi11_cutoff(t, d)
    out = np.empty(len(r))
    small = 2.0 * np.pi * r * cut < first_zero
    if np.any(small):
        out[small] = _phi11_smooth(r[small], t, d)
    if np.any(~small):
        out[~small] = _phi11_oscillatory(r[~small], t, d)[0]
    return out


def phi11_kernel_rd(r: float, t: float, d: int, *, rel_budget: float = 1e-3,
                    with_error: bool = False):
    """Third kernel at a single (r, t), with its quadrature error estimate.

    Raises KernelAccuracyError when the oscillatory tail estimate exceeds
    rel_budget relative to the on-axis value phi11(0, t).
    """
    if t <= 0:
        raise ValueError("flow parameter t must be positive")
    if r < 0:
        raise ValueError("radius must be nonnegative")
    nu = d / 2.0 - 1.0
    scale = float(_phi11_smooth(np.array([0.0]), t, d)[0])
    if 2.0 * np.pi * r * _phi11_cutoff(t, d) < bessel_zeros(nu, 1)[0]:
        val, err = float(_phi11_smooth(np.array([r]), t, d)[0]), 1e-12 * abs(scale)
    else:
        v, e = _phi11_oscillatory(np.array([r]), t, d)
        val, err = float(v[0]), float(e[0])
    if err > rel_budget * abs(scale):
        raise KernelAccuracyError(
            f"phi11 Hankel quadrature did not converge at r={r:g}, t={t:g}, d={d}", err)
    return (val, err) if with_error else val


def phi11_subordination(r, t: float, d: int):
    """Independent phi11 route: superposition of heat kernels over a subordinator.

    phi(r, t) = e^{t/2} (t / 2 sqrt(pi)) int_0^inf s^{-3/2}
                e^{-t^2/4s - s/4} (4 pi s)^{-d/2} e^{-r^2/4s} ds.

    Positive smooth integrand; reliable oracle for the oscillatory route and
    a direct witness of nonnegativity.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    s, ws = _subordinator_rule(t)
    base = s ** (-1.5) * np.exp(-t * t / (4.0 * s) - s / 4.0) * (4.0 * np.pi * s) ** (-d / 2.0)
    vals = np.exp(-r[:, None] ** 2 / (4.0 * s[None, :])) @ (ws * base)
    out = np.exp(t / 2.0) * t / (2.0 * np.sqrt(np.pi)) * vals
    return out if out.shape != (1,) else float(out[0])


def _subordinator_rule(t: float, n_panels: int = 40, n_gl: int = 12):
    s_lo = max(t * t / (4.0 * (t / 4.0 + 46.0)), 1e-14)
    s_hi = 4.0 * (46.0 + t / 2.0) + max(t, 1e-12)
    edges = np.geomspace(s_lo, s_hi, n_panels)
    x, w = gauss_legendre_01(n_gl)
    a = edges[:-1][:, None]
    h = np.diff(edges)[:, None]
    return (a + h * x[None, :]).ravel(), (h * w[None, :]).ravel()


def phi11_mass_in_window(t: float, d: int, rho_max: float) -> float:
    """Mass of phi11(., t) inside |x| <= rho_max, via the subordination route."""
    s, ws = _subordinator_rule(t)
    integ = s ** (-1.5) * np.exp(-t * t / (4.0 * s) - s / 4.0) \
        * gammainc(d / 2.0, rho_max ** 2 / (4.0 * s))
    return float(np.exp(t / 2.0) * t / (2.0 * np.sqrt(np.pi)) * np.dot(ws, integ))


def kernel_mass_in_window(family: str, t, d: int, rho_max: float):
    """Kernel mass inside |x| <= rho_max: closed forms for Poisson/heat, subordination for phi11."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if family == "heat_rd":
        out = gammainc(d / 2.0, rho_max ** 2 / (4.0 * t_arr))
    elif family == "poisson_rd":
        c = gamma((d + 1) / 2.0) / np.pi ** ((d + 1) / 2.0)
        out = sphere_area(d - 1) * c * sin_power_integral(np.arctan(rho_max / t_arr), d - 1)
    elif family == "phi11_rd":
        out = np.array([phi11_mass_in_window(tv, d, rho_max) for tv in t_arr])
    else:
        raise ValueError(f"not a Euclidean family: {family}")
    return out if np.ndim(t) else float(out[0])


@lru_cache(maxsize=1024)
def _phi11_interp_table(d: int, t: float):
    """Coarse geometric profile of phi11(., t) for monotone linear interpolation."""
    spatial = 10.0 * max(np.sqrt(t * (t + 2.0)), t, 0.5)
    r_grid = np.concatenate([[0.0], np.geomspace(1e-4 * spatial, spatial, 192)])
    vals = np.maximum(phi11_profile(r_grid, t, d), 0.0)
    return r_grid, vals


def kernel_values(family: str, rho, t: float, d: int) -> np.ndarray:
    """Kernel profile phi(rho, t) on an array of radii."""
    if family == "poisson_rd":
        return poisson_kernel_rd(rho, t, d)
    if family == "heat_rd":
        return heat_kernel_rd(rho, t, d)
    if family == "phi11_rd":
        r_grid, vals = _phi11_interp_table(d, float(t))
        return np.interp(np.asarray(rho, dtype=float), r_grid, vals, right=0.0)
    raise ValueError(f"not a Euclidean family: {family}")


def heat_angular_factor_bessel(r, s, t, d: int):
    """Closed-form angular factor of the heat kernel via the modified Bessel I.

    A(r, s, t) = kappa_{d-2} int_0^pi heat(sqrt(r^2+s^2-2rs cos g), t) sin(g)^{d-2} dg
               = (1 / 2t) (r s)^{1 - d/2} e^{-(r-s)^2/4t} ive(d/2 - 1, r s / 2t),

    with the exponentially scaled ive for stability at large arguments.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    z = r * s / (2.0 * t)
    return (1.0 / (2.0 * t)) * (r * s) ** (1.0 - d / 2.0) \
        * np.exp(-(r - s) ** 2 / (4.0 * t)) * ive(d / 2.0 - 1.0, z)


@lru_cache(maxsize=8)
def _angular_rule(n_gamma: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite angular rule on [0, pi], geometrically refined toward gamma = 0.

    Near-delta kernels peak at gamma -> 0 with widths down to ~1e-6 of pi,
    which a global Gauss rule cannot see; the bulk keeps uniform panels so
    smooth integrands converge at the usual composite-Gauss rate.
    """
    n_geo = max(n_gamma // 4, 8)
    edges = np.pi * np.concatenate([
        [0.0],
        np.geomspace(1e-7, 0.125, n_geo, endpoint=False),
        np.linspace(0.125, 1.0, 8),
    ])
    x, w = gauss_legendre_01(8)
    a = edges[:-1][:, None]
    h = np.diff(edges)[:, None]
    return (a + h * x[None, :]).ravel(), (h * w[None, :]).ravel()


def angular_factor_quadrature(family: str, r, s, t, d: int, n_gamma: int = 64):
    """A_k(r, s, t) = kappa_{d-2} int_0^pi phi(dist(r, s, g), t) sin(g)^{d-2} dg for d >= 2."""
    if d < 2:
        raise ValueError("angular factor needs d >= 2")
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    g, w = _angular_rule(n_gamma)
    wg = w * np.sin(g) ** (d - 2) * sphere_area(d - 2)
    dist = np.sqrt(np.maximum(
        r[..., None] ** 2 + s[..., None] ** 2
        - 2.0 * r[..., None] * s[..., None] * np.cos(g), 0.0))
    return np.sum(kernel_values(family, dist, t, d) * wg, axis=-1)


def radial_convolve(spec: KernelSpec, u0: RadialProfile, t: float,
                    n_gamma: int = 64, n_sub: int = 4) -> EvolutionSnapshot:
    """Evolution snapshot u(r, t) = int_0^inf u0(s) A_k(r, s, t) s^(d-1) ds.

    The s-integral runs over the stored grid with an n_sub-point Gauss rule
    per interval applied to the piecewise-linear datum (u0 is zero beyond
    r_max).  d = 1 degenerates to the two-point reflection sum
    phi(|r-s|) + phi(r+s); the heat family uses the closed-form Bessel
    angular factor (the gamma-quadrature route is kept for cross-checks).
    """
    if not spec.is_euclidean:
        raise ValueError("radial_convolve needs a Euclidean kernel family")
    if not spec.t_min <= t <= spec.t_max:
        raise ValueError(f"t={t:g} outside the family window [{spec.t_min:g}, {spec.t_max:g}]")
    nodes = u0.nodes
    x, gw = gauss_legendre_01(n_sub)
    edges = np.concatenate([[0.0], nodes])   # the [0, r_min] head carries u0(first node)
    h = np.diff(edges)
    s = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    ws = (h[:, None] * gw[None, :]).ravel()
    density = ws * u0(s) * s ** (spec.d - 1)
    vals = np.empty(len(nodes))
    chunk = max(1, 2 ** 23 // (len(s) * (1 if spec.d == 1 or spec.family == "heat_rd" else n_gamma)))
    for i0 in range(0, len(nodes), chunk):
        i1 = min(i0 + chunk, len(nodes))
        r = nodes[i0:i1][:, None]
        if spec.d == 1:
            a = kernel_values(spec.family, np.abs(r - s[None, :]), t, 1) \
                + kernel_values(spec.family, r + s[None, :], t, 1)
        elif spec.family == "heat_rd":
            a = heat_angular_factor_bessel(r, s[None, :], t, spec.d)
        else:
            a = angular_factor_quadrature(spec.family,
                                          np.broadcast_to(r, (i1 - i0, len(s))),
                                          np.broadcast_to(s[None, :], (i1 - i0, len(s))),
                                          t, spec.d, n_gamma)
        vals[i0:i1] = a @ density
    return EvolutionSnapshot(base=u0, param=float(t), values=vals)
