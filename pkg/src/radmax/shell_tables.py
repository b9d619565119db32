"""Shell-mean tables: the shared reduction behind averages and evolutions.

For a radial profile u0 and a center at distance c from the origin, the
surface integral of u0 over the sphere of radius rho about the center is

  S_c(rho) = kappa_{d-2} rho^{d-1} int_0^pi u0(sqrt(c^2 + rho^2 - 2 c rho cos g)) sin(g)^{d-2} dg

(d = 1 uses the two-point reflection sum).  Tabulating S on a fixed rho grid
for all node centers gives, at once,

  * ball averages  avg(c, rho) = cum(w S)(rho) / cum(w a)(rho)   (HL operators),
  * evolutions     u(c, t) = sum_m w_m phi(rho_m, t) S_c(rho_m)  (kernel flows),

with a = the same shell quadrature applied to the constant-1 profile.  The
averages are convex combinations of shell means, and the evolution is an
Abel resummation of the same cumulative sums, so for any nonincreasing
kernel column the discrete bound u(c, t) <= mass * sup_rho avg(c, rho)
holds by construction.

The polar (sphere) table is the same construction with geodesic shells:
cos theta(eta) = cos(c) cos(rho) + sin(c) sin(rho) cos(psi).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import gauss_legendre_01, sphere_area, trapezoid_weights
from .profiles import PolarProfile, RadialProfile

_CHUNK = 32


@dataclass
class ShellTable:
    """Tabulated shell integrals of one profile around every chosen center."""

    geometry: str                       # "rd" | "sphere"
    d: int
    profile: object = field(repr=False)
    centers: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)      # quadrature weights on rho
    shell: np.ndarray = field(repr=False)        # S[c_i, rho_m]
    shell_area: np.ndarray = field(repr=False)   # a[rho_m], same quadrature on 1

    def __post_init__(self):
        self._cum_mass = np.cumsum(self.weights * self.shell, axis=1)
        self._cum_area = np.cumsum(self.weights * self.shell_area)

    @property
    def cum_mass(self) -> np.ndarray:
        return self._cum_mass

    @property
    def cum_area(self) -> np.ndarray:
        return self._cum_area

    def averages(self) -> np.ndarray:
        """Ball averages avg[c_i, rho_m]; zero-radius columns hold the center value."""
        return self._ratio(self._cum_mass, np.asarray(self.profile(self.centers)))

    def _ratio(self, cum_mass: np.ndarray, center_vals: np.ndarray) -> np.ndarray:
        ca = self._cum_area
        avg = cum_mass / np.where(ca > 0, ca, 1.0)
        if np.any(ca <= 0):
            avg[:, ca <= 0] = center_vals[:, None]
        return avg

    def evolution(self, phi_columns: np.ndarray) -> np.ndarray:
        """u[c_i, j] = sum_m w_m phi_columns[j, m] S[c_i, m]."""
        return (self.weights * self.shell) @ phi_columns.T

    def column_mass(self, phi_columns: np.ndarray) -> np.ndarray:
        """Discrete kernel mass of each column under the table quadrature."""
        return phi_columns @ (self.weights * self.shell_area)

    def rebuilt_at(self, centers: np.ndarray, n_gamma: int = 64) -> "ShellTable":
        """Same profile and rho grid, new (possibly off-node) centers."""
        build = radial_shell_table if self.geometry == "rd" else polar_shell_table
        return build(self.profile, rho=self.rho, n_gamma=n_gamma,
                     centers=np.asarray(centers, dtype=float))

    def averages_at(self, centers: np.ndarray, n_gamma: int = 64) -> np.ndarray:
        """Ball averages avg[j, rho_m] for a batch of arbitrary centers."""
        centers = np.asarray(centers, dtype=float)
        sub = self.rebuilt_at(centers, n_gamma=n_gamma)
        return self._ratio(sub._cum_mass, np.asarray(self.profile(centers)))


def default_rho_grid(rho_max: float, n_log: int = 320, n_lin: int = 704,
                     rho_tiny: float = 1e-6) -> np.ndarray:
    """rho grid with a geometric head (resolves near-delta kernels) and uniform body."""
    split = min(0.5, 0.25 * rho_max)
    return np.concatenate([
        [0.0],
        np.geomspace(rho_tiny * min(rho_max, 1.0), split, n_log, endpoint=False),
        np.linspace(split, rho_max, n_lin),
    ])


def radial_shell_table(u0: RadialProfile, rho: np.ndarray | None = None,
                       rho_max: float | None = None, n_gamma: int = 64,
                       centers: np.ndarray | None = None) -> ShellTable:
    """Shell integrals of a radial profile around every node (or given) center.

    The angular rule is restricted to the cone where the shell meets the
    support ball dist <= r_max (u0 vanishes beyond its grid), so far-out
    centers do not waste nodes on empty arcs.
    """
    d = u0.d
    if rho_max is None:
        rho_max = 2.0 * u0.r_max + 5.0
    if rho is None:
        rho = default_rho_grid(rho_max)
    if centers is None:
        centers = u0.nodes
    centers = np.asarray(centers, dtype=float)
    w = trapezoid_weights(rho)
    if d == 1:
        shell = u0(np.abs(centers[:, None] - rho[None, :])) + u0(centers[:, None] + rho[None, :])
        area = np.full_like(rho, 2.0)
        return ShellTable("rd", d, u0, centers, rho, w, shell, area)

    x, gl_w = gauss_legendre_01(n_gamma)
    kap = sphere_area(d - 2)
    shell = np.empty((len(centers), len(rho)))
    for i0 in range(0, len(centers), _CHUNK):
        i1 = min(i0 + _CHUNK, len(centers))
        c = centers[i0:i1][:, None]
        cr = c * rho[None, :]
        cos_star = (c ** 2 + rho[None, :] ** 2 - u0.r_max ** 2) / np.where(cr > 0, 2.0 * cr, 1.0)
        g_star = np.arccos(np.clip(cos_star, -1.0, 1.0))
        g = g_star[:, :, None] * x
        wts = g_star[:, :, None] * gl_w
        dist = np.sqrt(np.maximum(
            c[:, :, None] ** 2 + rho[None, :, None] ** 2
            - 2.0 * c[:, :, None] * rho[None, :, None] * np.cos(g), 0.0))
        shell[i0:i1] = (u0(dist) * np.sin(g) ** (d - 2) * wts).sum(axis=2) * kap * rho[None, :] ** (d - 1)
    full_angle = kap * float(((np.sin(np.pi * x) ** (d - 2)) * (np.pi * gl_w)).sum())
    area = rho ** (d - 1) * full_angle
    return ShellTable("rd", d, u0, centers, rho, w, shell, area)


def polar_shell_table(f: PolarProfile, rho: np.ndarray | None = None,
                      n_gamma: int = 64, centers: np.ndarray | None = None) -> ShellTable:
    """Geodesic shell integrals of a polar profile around every node (or given) center."""
    d = f.d
    if rho is None:
        rho = np.concatenate([
            [0.0],
            np.geomspace(1e-6, 0.1, 256, endpoint=False),
            np.linspace(0.1, np.pi, 768),
        ])
    if centers is None:
        centers = f.nodes
    centers = np.asarray(centers, dtype=float)
    w = trapezoid_weights(rho)
    x, gl_w = gauss_legendre_01(n_gamma)
    psi = np.pi * x
    wts = np.pi * gl_w * np.sin(psi) ** (d - 2) * sphere_area(d - 2)
    sin_rho_pow = np.sin(rho) ** (d - 1)
    shell = np.empty((len(centers), len(rho)))
    for i0 in range(0, len(centers), _CHUNK):
        i1 = min(i0 + _CHUNK, len(centers))
        c = centers[i0:i1][:, None, None]
        cos_th = np.cos(c) * np.cos(rho)[None, :, None] \
            + np.sin(c) * np.sin(rho)[None, :, None] * np.cos(psi)
        theta = np.arccos(np.clip(cos_th, -1.0, 1.0))
        shell[i0:i1] = (f(theta) * wts).sum(axis=2) * sin_rho_pow[None, :]
    area = sin_rho_pow * wts.sum()
    return ShellTable("sphere", d, f, centers, rho, w, shell, area)
