"""Geodesic-ball geometry on S^d: ball measures, latitude sections, averages.

Angles are geodesic distances from the north pole (the polar angle theta);
every computation reduces to meridian-plane trigonometry, so points enter
as polar pairs (theta, phi) on the 2-sphere section spanned by the
configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import sin_power_integral, sphere_area, trapezoid_weights
from .profiles import PolarProfile

_ANGLE_TOL = 1e-12


@dataclass(frozen=True)
class GeodesicBall:
    """Open geodesic ball with center on the meridian at polar angle c."""

    c: float
    rho: float
    d: int

    def __post_init__(self):
        if not 0.0 <= self.c <= np.pi:
            raise ValueError(f"center angle must lie in [0, pi], got {self.c}")
        if not 0.0 <= self.rho <= np.pi:
            raise ValueError(f"radius must lie in [0, pi], got {self.rho}")
        if self.d < 2:
            raise ValueError("sphere dimension must be >= 2")

    @property
    def pole_distance(self) -> float:
        """w(center) = min(c, pi - c), the distance to the nearest pole."""
        return min(self.c, np.pi - self.c)


def sigma_ball(r, d: int):
    """Surface measure of a geodesic ball: kappa_{d-1} int_0^r sin(t)^(d-1) dt.

    Exact for every integer d via the sine-power reduction (no quadrature).
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < -_ANGLE_TOL) or np.any(r_arr > np.pi + _ANGLE_TOL):
        raise ValueError("ball radius must lie in [0, pi]")
    out = sphere_area(d - 1) * sin_power_integral(np.clip(r_arr, 0.0, np.pi), d - 1)
    return out if np.ndim(r) else float(out)


def sigma_ball_derivative(r, d: int):
    """sigma'(r) = kappa_{d-1} sin(r)^(d-1), the boundary (d-1)-measure."""
    return sphere_area(d - 1) * np.sin(np.asarray(r, dtype=float)) ** (d - 1)


def ball_area_ratio(t, d: int):
    """sigma(t) / (t sigma'(t)); tends to 1/d as t -> 0+."""
    t_arr = np.asarray(t, dtype=float)
    out = np.empty_like(t_arr)
    small = t_arr < 1e-8
    out[small] = 1.0 / d
    big = ~small
    out[big] = sin_power_integral(t_arr[big], d - 1) / (t_arr[big] * np.sin(t_arr[big]) ** (d - 1))
    return out if np.ndim(t) else float(out)


def cap_section_length(theta, c: float, rho: float, d: int):
    """(d-1)-measure of the intersection of a geodesic ball with a latitude set.

    For the ball of radius rho centered at polar angle c, the latitude
    sphere {theta(eta) = theta} (a (d-1)-sphere of radius sin theta) meets
    it in the azimuthal cap phi < phi*, where

        cos(rho) = cos(c) cos(theta) + sin(c) sin(theta) cos(phi*),

    clamped to the empty/full circle when the latitude misses/sits inside
    the ball.  The measure is kappa_{d-2} sin(theta)^{d-1} int_0^{phi*} sin(phi)^{d-2} dphi.
    """
    theta_arr = np.asarray(theta, dtype=float)
    denom = np.sin(c) * np.sin(theta_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos_phi = (np.cos(rho) - np.cos(c) * np.cos(theta_arr)) / denom
    # degenerate branch (center or latitude at a pole): circle is inside iff |theta - c| < rho
    inside_degenerate = np.abs(theta_arr - c) < rho
    cos_phi = np.where(denom < _ANGLE_TOL, np.where(inside_degenerate, -1.0, 1.0), cos_phi)
    phi_star = np.arccos(np.clip(cos_phi, -1.0, 1.0))
    out = sphere_area(d - 2) * np.sin(theta_arr) ** (d - 1) * sin_power_integral(phi_star, d - 2)
    return out if np.ndim(theta) else float(out)


def geodesic_average(f: PolarProfile, ball: GeodesicBall) -> float:
    """Ball average (1/sigma(rho)) int f(theta) l(theta; c, rho) dtheta on stored nodes.

    The zero-radius ball returns the profile value at the center.
    """
    if ball.d != f.d:
        raise ValueError(f"ball dimension {ball.d} != profile dimension {f.d}")
    if ball.rho == 0.0:
        return float(f(ball.c))
    w = trapezoid_weights(f.nodes)
    section = cap_section_length(f.nodes, ball.c, ball.rho, ball.d)
    return float(np.sum(w * f.values * section) / sigma_ball(ball.rho, ball.d))


def polar_to_xyz(theta, phi):
    """Meridian-plane coordinates -> unit vector (cos t, sin t cos p, sin t sin p)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi)], axis=-1)


def geodesic_distance(p, q) -> float:
    """Arc distance between unit vectors."""
    return float(np.arccos(np.clip(np.dot(p, q), -1.0, 1.0)))


def vertex_angle(p, q, s) -> float:
    """Angle at vertex q of the geodesic triangle (p, q, s), by the law of cosines.

    Arguments are unit vectors (use polar_to_xyz for (theta, phi) input).
    Degenerate configurations (coincident or antipodal pairs) are rejected.
    """
    a = geodesic_distance(q, p)
    b = geodesic_distance(q, s)
    opposite = geodesic_distance(p, s)
    for name, side in (("qp", a), ("qs", b)):
        if not _ANGLE_TOL < side < np.pi - _ANGLE_TOL:
            raise ValueError(f"degenerate triangle: side {name} has length {side:.3e}")
    cos_angle = (np.cos(opposite) - np.cos(a) * np.cos(b)) / (np.sin(a) * np.sin(b))
    return float(np.arccos(np.clip(cos_angle, -1.0, 1.0)))


@dataclass(frozen=True)
class SphericalTriangle:
    """Geodesic triangle with side lengths a, b, c opposite vertices A, B, C."""

    a: float
    b: float
    c: float
    angle_a: float
    angle_b: float
    angle_c: float

    @staticmethod
    def from_points(pa, pb, pc) -> "SphericalTriangle":
        a = geodesic_distance(pb, pc)
        b = geodesic_distance(pc, pa)
        c = geodesic_distance(pa, pb)
        return SphericalTriangle(
            a=a, b=b, c=c,
            angle_a=vertex_angle(pb, pa, pc),
            angle_b=vertex_angle(pc, pb, pa),
            angle_c=vertex_angle(pa, pc, pb),
        )

    def law_of_cosines_residual(self) -> float:
        """max |cos(side) - cos cos - sin sin cos(angle)| over the three sides."""
        res = 0.0
        for opp, s1, s2, ang in (
            (self.a, self.b, self.c, self.angle_a),
            (self.b, self.c, self.a, self.angle_b),
            (self.c, self.a, self.b, self.angle_c),
        ):
            res = max(res, abs(np.cos(opp) - (np.cos(s1) * np.cos(s2)
                                              + np.sin(s1) * np.sin(s2) * np.cos(ang))))
        return float(res)
