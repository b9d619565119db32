"""Poisson and heat kernels on S^d, spherical convolution, and their maximal functions.

Both kernels are functions of the geodesic distance gamma alone:

  poisson_sphere  P(cos g, rho) = (1 - rho^2) / (kappa_d (rho^2 - 2 rho cos g + 1)^{d/2})
  heat_sphere     K(cos g, t)   = (1/kappa_d) sum_n e^{-t n (n+d-1)} ((n+l)/l) C_n^l(cos g),

with l = (d-1)/2 and C_n^l the Gegenbauer polynomials of the generating
function (1 - 2 x r + r^2)^(-l).  The 1/kappa_d prefactor makes the n = 0
term the uniform density, so both kernels have unit mass on S^d.  The heat
series is truncated once the tail bound via C_n^l(1) = binom(n + 2l - 1, n)
drops below the requested tolerance.
"""

from __future__ import annotations

import numpy as np
from scipy.special import comb

from .euclid_kernels import EvolutionSnapshot, KernelAccuracyError, KernelSpec
from .numerics import gauss_legendre_01, sphere_area
from .profiles import PolarProfile

_HARD_CAP = 6000


class GegenbauerEvaluator:
    """Three-term recurrence workspace for C_n^lambda on a fixed argument array.

    n C_n = 2 (n + lambda - 1) x C_{n-1} - (n + 2 lambda - 2) C_{n-2},
    C_0 = 1, C_1 = 2 lambda x.
    """

    def __init__(self, lam: float, max_degree: int = _HARD_CAP):
        if lam <= 0:
            raise ValueError("Gegenbauer index must be positive (d >= 2)")
        self.lam = float(lam)
        self.max_degree = int(max_degree)

    def value_at_one(self, n: int) -> float:
        """C_n^lambda(1) = binom(n + 2 lambda - 1, n), the polynomial's maximum on [-1, 1]."""
        return float(comb(n + 2.0 * self.lam - 1.0, n))

    def iterate(self, x: np.ndarray):
        """Yield (n, C_n(x)) for n = 0, 1, 2, ... up to max_degree."""
        x = np.asarray(x, dtype=float)
        c_prev = np.ones_like(x)
        yield 0, c_prev
        c_cur = 2.0 * self.lam * x
        n = 1
        while n <= self.max_degree:
            yield n, c_cur
            c_cur, c_prev = ((2.0 * (n + self.lam) * x * c_cur
                              - (n + 2.0 * self.lam - 1.0) * c_prev) / (n + 1.0)), c_cur
            n += 1

    def __call__(self, n: int, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        for k, c in self.iterate(x):
            if k == n:
                return c if c.shape != (1,) else float(c[0])
        raise ValueError(f"degree {n} beyond max_degree {self.max_degree}")


def gegenbauer(n: int, lam: float, x):
    """Gegenbauer polynomial C_n^lambda(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    return GegenbauerEvaluator(lam, max_degree=max(n, 1))(n, x)


def poisson_kernel_sphere(cos_gamma, rho: float, d: int):
    """Spherical Poisson kernel (1 - rho^2) / (kappa_d |rho xi - eta|^(d+1)).

    This is the harmonic-extension kernel of the unit ball in R^(d+1); the
    exponent d+1 is what gives unit mass on S^d and the rho^n multiplier on
    degree-n harmonics.
    """
    if not 0.0 <= rho < 1.0:
        raise ValueError(f"Poisson parameter must lie in [0, 1), got {rho}")
    cg = np.asarray(cos_gamma, dtype=float)
    out = (1.0 - rho ** 2) / (sphere_area(d) * (rho ** 2 - 2.0 * rho * cg + 1.0) ** ((d + 1) / 2.0))
    return out if np.ndim(cos_gamma) else float(out)


def heat_series_length(t: float, d: int, eps: float) -> int:
    """Smallest N with the remaining heat-series tail below eps (geometric tail bound)."""
    lam = (d - 1) / 2.0
    n = 1
    while n < _HARD_CAP:
        term = np.exp(-t * n * (n + d - 1)) * ((n + lam) / lam) * comb(n + d - 2.0, n)
        ratio = np.exp(-t * (2 * n + d))  # term_{n+1}/term_n bound for the exponential part
        if term / max(1.0 - ratio, 1e-3) < eps * sphere_area(d):
            return n
        n += 1
    raise KernelAccuracyError(
        f"heat series on S^{d} needs more than {_HARD_CAP} terms at t={t:g}", float("nan"))


def heat_kernel_sphere(cos_gamma, t: float, d: int, eps: float = 1e-8):
    """Spherical heat kernel by the truncated Gegenbauer series."""
    if t <= 0:
        raise ValueError("flow parameter t must be positive")
    if d < 2:
        raise ValueError("sphere dimension must be >= 2")
    cg = np.atleast_1d(np.asarray(cos_gamma, dtype=float))
    if np.any(np.abs(cg) > 1.0 + 1e-12):
        raise ValueError("cos(gamma) must lie in [-1, 1]")
    cg = np.clip(cg, -1.0, 1.0)
    lam = (d - 1) / 2.0
    n_terms = heat_series_length(t, d, eps)
    acc = np.zeros_like(cg)
    for n, c in GegenbauerEvaluator(lam, max_degree=n_terms).iterate(cg):
        acc += np.exp(-t * n * (n + d - 1)) * ((n + lam) / lam) * c
        if n == n_terms:
            break
    acc /= sphere_area(d)
    return acc if np.ndim(cos_gamma) else float(acc[0])


def sphere_kernel_profile(spec: KernelSpec, gamma: np.ndarray, t: float) -> np.ndarray:
    """Kernel value as a function of geodesic distance, for one window parameter t.

    The Poisson family is parameterized as rho = 1 - t so t -> 0 is the
    approximate-identity end for both families.
    """
    if spec.family == "poisson_sphere":
        return poisson_kernel_sphere(np.cos(gamma), 1.0 - t, spec.d)
    if spec.family == "heat_sphere":
        return heat_kernel_sphere(np.cos(gamma), t, spec.d, spec.eps)
    raise ValueError(f"not a spherical family: {spec.family}")


def sphere_convolve(spec: KernelSpec, u0: PolarProfile, param: float,
                    n_phi: int = 64, n_sub: int = 4) -> EvolutionSnapshot:
    """Snapshot of the spherical convolution of a polar profile.

    u(theta, param) = kappa_{d-2} int_0^pi u0(t') sin(t')^{d-1}
        [ int_0^pi K(cos th cos t' + sin th sin t' cos phi, param) sin(phi)^{d-2} dphi ] dt'

    The theta'-integral applies an n_sub-point Gauss rule per stored
    interval of the piecewise-linear datum; the azimuthal integral uses a
    composite rule refined toward phi = 0 where near-identity kernels peak.
    The kernel itself is interpolated from a dense distance table.
    """
    if spec.family not in ("poisson_sphere", "heat_sphere"):
        raise ValueError("sphere_convolve needs a spherical kernel family")
    if spec.d != u0.d:
        raise ValueError(f"kernel dimension {spec.d} != profile dimension {u0.d}")
    t = (1.0 - param) if spec.family == "poisson_sphere" else param
    if not spec.t_min <= t <= spec.t_max:
        raise ValueError(f"parameter outside the family window")

    gamma_table = np.concatenate([[0.0], np.geomspace(1e-7, np.pi, 2048)])
    kernel_on_dist = sphere_kernel_profile(spec, gamma_table, t)

    from .euclid_kernels import _angular_rule
    phi, wphi = _angular_rule(n_phi)
    wphi = wphi * np.sin(phi) ** (spec.d - 2) * sphere_area(spec.d - 2)

    x, gw = gauss_legendre_01(n_sub)
    edges = np.concatenate([[0.0], u0.nodes, [np.pi]])
    h = np.diff(edges)
    tp = (edges[:-1, None] + h[:, None] * x[None, :]).ravel()
    ws = (h[:, None] * gw[None, :]).ravel()
    density = ws * u0(tp) * np.sin(tp) ** (spec.d - 1)

    vals = np.empty(len(u0.nodes))
    chunk = max(1, 2 ** 23 // (len(tp) * len(phi) // 8 + 1))
    for i0 in range(0, len(u0.nodes), chunk):
        i1 = min(i0 + chunk, len(u0.nodes))
        th = u0.nodes[i0:i1][:, None, None]
        cosg = np.cos(th) * np.cos(tp)[None, :, None] \
            + np.sin(th) * np.sin(tp)[None, :, None] * np.cos(phi)[None, None, :]
        g = np.arccos(np.clip(cosg, -1.0, 1.0))
        a = np.interp(g, gamma_table, kernel_on_dist) @ wphi
        vals[i0:i1] = a @ density
    return EvolutionSnapshot(base=u0, param=float(param), values=vals)
