"""Shared quadrature and search primitives.

Everything here is a pure function of its arguments; Gauss-Legendre rules
are cached per node count.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma

INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0


def sphere_area(n: int) -> float:
    """Total surface measure of the unit n-sphere, 2*pi^((n+1)/2)/Gamma((n+1)/2).

    n = 0 gives 2 (counting measure on two points), n = 1 gives 2*pi,
    n = 2 gives 4*pi.
    """
    if n < 0:
        raise ValueError(f"sphere dimension must be >= 0, got {n}")
    return float(2.0 * np.pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0))


@lru_cache(maxsize=32)
def gauss_legendre_01(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def panel_gauss(f, a: float, b: float, n: int = 16) -> float:
    """Integrate f over [a, b] with a single n-point Gauss-Legendre rule."""
    x, w = gauss_legendre_01(n)
    return float((b - a) * np.dot(w, f(a + (b - a) * x)))


def composite_gauss(f, edges: np.ndarray, n: int = 16) -> float:
    """Gauss-Legendre panel quadrature over consecutive [edges[i], edges[i+1]]."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre_01(n)
    a = edges[:-1][:, None]
    h = np.diff(edges)[:, None]
    vals = f((a + h * x[None, :]).ravel()).reshape(len(edges) - 1, n)
    return float(np.sum(h[:, 0] * (vals @ w)))


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    """Composite-trapezoid weights for samples at (possibly nonuniform) x."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need at least two nodes")
    w = np.empty_like(x)
    w[0] = 0.5 * (x[1] - x[0])
    w[-1] = 0.5 * (x[-1] - x[-2])
    w[1:-1] = 0.5 * (x[2:] - x[:-2])
    return w


def sin_power_integral(x, n: int):
    """Exact antiderivative value int_0^x sin(t)^n dt for integer n >= 0.

    Uses the stable downward reduction
    I_n(x) = ((n-1) I_{n-2}(x) - cos(x) sin(x)^{n-1}) / n, vectorized in x.
    """
    if n < 0:
        raise ValueError(f"power must be >= 0, got {n}")
    x = np.asarray(x, dtype=float)
    i_prev = x.copy()          # I_0
    if n == 0:
        return i_prev if i_prev.ndim else float(i_prev)
    i_cur = 1.0 - np.cos(x)    # I_1
    for k in range(2, n + 1):
        i_cur, i_prev = ((k - 1) * i_prev - np.cos(x) * np.sin(x) ** (k - 1)) / k, i_cur
    return i_cur if i_cur.ndim else float(i_cur)


def log_linear_grid(x_min: float, x_break: float, x_max: float,
                    n_log: int, n_lin: int) -> np.ndarray:
    """Geometric nodes on [x_min, x_break) followed by uniform nodes on [x_break, x_max]."""
    if not (0 < x_min < x_break < x_max):
        raise ValueError("need 0 < x_min < x_break < x_max")
    return np.concatenate([
        np.geomspace(x_min, x_break, n_log, endpoint=False),
        np.linspace(x_break, x_max, n_lin),
    ])


def golden_max(f, lo: np.ndarray, hi: np.ndarray, iters: int = 40):
    """Vectorized golden-section maximization of lane-wise unimodal f.

    f maps an array of abscissae (one per lane) to an array of values.
    Returns (argmax, max) per lane; the supremum estimate is the best value
    seen, so it never falls below f evaluated at the probe points.
    """
    a = np.asarray(lo, dtype=float).copy()
    b = np.asarray(hi, dtype=float).copy()
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc = f(c)
    fd = f(d)
    best_x = np.where(fc >= fd, c, d)
    best_v = np.maximum(fc, fd)
    for _ in range(iters):
        go_right = fc < fd
        a = np.where(go_right, c, a)
        b = np.where(go_right, b, d)
        c = b - INV_PHI * (b - a)
        d = a + INV_PHI * (b - a)
        fc = f(c)
        fd = f(d)
        step_x = np.where(fc >= fd, c, d)
        step_v = np.maximum(fc, fd)
        upd = step_v > best_v
        best_x = np.where(upd, step_x, best_x)
        best_v = np.where(upd, step_v, best_v)
    return best_x, best_v


def alternating_tail(partial_sums: np.ndarray, depth: int = 12):
    """Euler-style iterated averaging of partial sums of an alternating series.

    partial_sums has shape (..., k); averaging acts on the last axis.
    Returns (limit_estimate, error_estimate) where the error estimate is the
    spread of the last averaging stage.
    """
    s = np.asarray(partial_sums, dtype=float)
    for _ in range(min(depth, s.shape[-1] - 1)):
        s = 0.5 * (s[..., 1:] + s[..., :-1])
        if s.shape[-1] <= 2:
            break
    est = s[..., -1]
    err = np.abs(s[..., -1] - s[..., 0]) if s.shape[-1] > 1 else np.zeros_like(est)
    return est, err
