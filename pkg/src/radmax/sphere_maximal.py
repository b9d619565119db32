"""Hardy-Littlewood operators on S^d for polar data, and the flow maximal functions.

Centers are restricted to the meridian through the evaluation point: the
geodesic-ball average of a polar function depends only on the center's
polar angle and the radius, and the containment constraint
rho >= |theta0 - c| is loosest on the meridian.  Three variants:

  uncentered    sup over all balls containing the point,
  centered      balls centered at the point,
  small-radius  uncentered with rho <= w(c)/4, w(c) = min(c, pi - c)
                (the auxiliary operator behind the near-pole estimates).

Every supremum includes the zero-radius ball, i.e. the datum itself.
"""

from __future__ import annotations

import numpy as np

from .euclid_kernels import KernelSpec
from .profiles import PolarProfile
from .results import MaximalResult
from .results import detachment_components as _components_of
from .shell_tables import ShellTable, polar_shell_table
from .sweeps import sweep_supremum
from .numerics import golden_max

_GOLDEN_ITERS = 36


def default_tolerance(f) -> float:
    return 1e-6 * float(np.max(f.values))


# --- continuum-radius averages on a shell table (shared with euclid code path) ---

from .euclid_maximal import _average_at_radius, _refine_rho  # noqa: E402


def hl_centered_sphere(f: PolarProfile, table: ShellTable | None = None,
                       tol: float | None = None) -> MaximalResult:
    """Centered HL maximal function: sup over rho of the ball average at each node."""
    if table is None:
        table = polar_shell_table(f)
    if tol is None:
        tol = default_tolerance(f)
    avg = table.averages()
    rows = np.arange(avg.shape[0])
    j = np.argmax(avg, axis=1)
    grid_v = avg[rows, j]
    z, v = _refine_rho(table, rows, j)
    best_v = np.maximum(grid_v, v)
    best_rho = np.where(v > grid_v, z, table.rho[j])
    values = np.maximum(f.values, best_v)
    detached = values > f.values + tol
    return MaximalResult(
        variant="hl_centered_sphere",
        nodes=f.nodes,
        values=values,
        arg1=f.nodes.copy(),
        arg2=np.where(detached, best_rho, 0.0),
        detached=detached,
        meta={"tol": tol},
    )


def _suffix_max_with_arg(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rev = np.flip(a, axis=1)
    run = np.maximum.accumulate(rev, axis=1)
    fresh = rev >= run
    idx = np.where(fresh, np.arange(a.shape[1])[None, :], 0)
    run_idx = np.maximum.accumulate(idx, axis=1)
    return np.flip(run, axis=1), a.shape[1] - 1 - np.flip(run_idx, axis=1)


def _uncentered_search(f: PolarProfile, table: ShellTable, radius_cap=None):
    """Grid search over meridian centers (poles included) with rho >= |theta0 - c|.

    radius_cap maps center angles to the largest admissible radius (None
    for the unrestricted operator).  Returns (values, center, rho) triples
    of the best ball per node, refined in rho within the admissible range.
    """
    centers = np.concatenate([[0.0], f.nodes, [np.pi]])
    ext = table.rebuilt_at(centers)
    avg = ext._cum_mass / np.where(table.cum_area > 0, table.cum_area, 1.0)
    if np.any(table.cum_area <= 0):
        avg[:, table.cum_area <= 0] = np.asarray(f(centers))[:, None]
    if radius_cap is not None:
        caps = radius_cap(centers)
        avg = np.where(table.rho[None, :] <= caps[:, None] + 1e-15, avg, -np.inf)
    suf, sufarg = _suffix_max_with_arg(avg)

    nodes = f.nodes
    delta = np.abs(centers[:, None] - nodes[None, :])
    idx = np.minimum(np.searchsorted(table.rho, delta, side="left"), avg.shape[1] - 1)
    cand = suf[np.arange(len(centers))[:, None], idx]
    best_c_idx = np.argmax(cand, axis=0)
    cols = np.arange(len(nodes))
    grid_v = cand[best_c_idx, cols]
    best_rho_idx = sufarg[best_c_idx, idx[best_c_idx, cols]]
    best_c = centers[best_c_idx]
    best_rho = table.rho[np.maximum(best_rho_idx, 0)]

    feasible = np.isfinite(grid_v)
    ext_table = ShellTable(table.geometry, table.d, f, centers, table.rho,
                           table.weights, ext.shell, table.shell_area)
    floor = np.abs(best_c - nodes)
    ceil = radius_cap(best_c) if radius_cap is not None else np.full(len(nodes), np.pi)
    z, v = _refine_rho_capped(ext_table, best_c_idx, np.maximum(best_rho_idx, 0), floor, ceil)
    improve = feasible & (v > grid_v)
    out_v = np.where(feasible, np.where(improve, v, grid_v), -np.inf)
    out_rho = np.where(improve, z, best_rho)
    return out_v, best_c, out_rho


def _refine_rho_capped(table, rows, j, floor, ceil):
    rho = table.rho
    lo = np.clip(rho[np.maximum(j - 1, 0)], floor, ceil)
    hi = np.clip(rho[np.minimum(j + 1, len(rho) - 1)], floor, ceil)
    hi = np.maximum(hi, lo + 1e-15)
    return golden_max(lambda z: _average_at_radius(table, rows, np.clip(z, floor, ceil)),
                      lo, hi, iters=_GOLDEN_ITERS)


def hl_uncentered_sphere(f: PolarProfile, table: ShellTable | None = None,
                         centered: MaximalResult | None = None,
                         tol: float | None = None) -> MaximalResult:
    """Uncentered HL maximal function on S^d for a polar profile.

    Grid search over (center, rho) with golden-section polish in rho; the
    centered result and the zero-radius datum are folded in, making the
    chain centered <= uncentered structural.
    """
    if table is None:
        table = polar_shell_table(f)
    if tol is None:
        tol = default_tolerance(f)
    if centered is None:
        centered = hl_centered_sphere(f, table=table, tol=tol)
    best_v, best_c, best_rho = _uncentered_search(f, table)
    values = np.maximum.reduce([f.values, centered.values, best_v])
    detached = values > f.values + tol
    centered_wins = centered.values >= best_v
    arg_c = np.where(centered_wins, f.nodes, best_c)
    arg_rho = np.where(centered_wins, centered.arg2, best_rho)
    return MaximalResult(
        variant="hl_uncentered_sphere",
        nodes=f.nodes,
        values=values,
        arg1=np.where(detached, arg_c, f.nodes),
        arg2=np.where(detached, arg_rho, 0.0),
        detached=detached,
        meta={"tol": tol},
    )


def hl_auxiliary_sphere(f: PolarProfile, table: ShellTable | None = None,
                        tol: float | None = None) -> MaximalResult:
    """Small-radius uncentered operator: balls with rho <= w(center)/4.

    Every recorded maximizer satisfies the radius cap; the zero-radius ball
    keeps the supremum at least the datum.
    """
    if table is None:
        table = polar_shell_table(f)
    if tol is None:
        tol = default_tolerance(f)
    cap = lambda c: np.minimum(c, np.pi - c) / 4.0
    best_v, best_c, best_rho = _uncentered_search(f, table, radius_cap=cap)
    values = np.maximum(f.values, best_v)
    detached = values > f.values + tol
    best_rho = np.minimum(best_rho, cap(best_c))
    return MaximalResult(
        variant="hl_aux_i",
        nodes=f.nodes,
        values=values,
        arg1=np.where(detached, best_c, f.nodes),
        arg2=np.where(detached, best_rho, 0.0),
        detached=detached,
        meta={"tol": tol, "radius_cap": "rho <= min(c, pi - c) / 4"},
    )


def maximal_sphere_convolution(u0: PolarProfile, spec: KernelSpec,
                               table: ShellTable | None = None,
                               tol: float | None = None,
                               per_decade: int = 64) -> MaximalResult:
    """u* = sup over the window parameter of the spherical kernel evolution.

    The heat family sweeps t in [t_min, t_max]; the Poisson family sweeps
    rho = 1 - t, so the approximate-identity end t -> 0 is shared and the
    datum enters the supremum exactly.  Kernels on S^d have no window
    truncation, so the exact column mass is 1.
    """
    from .sphere_kernels import sphere_kernel_profile
    if spec.family not in ("poisson_sphere", "heat_sphere"):
        raise ValueError("maximal_sphere_convolution needs a spherical family")
    if spec.d != u0.d:
        raise ValueError(f"kernel dimension {spec.d} != profile dimension {u0.d}")
    if table is None:
        table = polar_shell_table(u0)
    if tol is None:
        tol = default_tolerance(u0)
    decades = np.log10(spec.t_max / spec.t_min)
    ts = np.geomspace(spec.t_min, spec.t_max, max(int(np.ceil(per_decade * decades)) + 1, 8))

    def columns_fn(t_arr):
        return np.stack([sphere_kernel_profile(spec, table.rho, t) for t in np.atleast_1d(t_arr)])

    mass_fn = lambda t_arr: np.ones(len(np.atleast_1d(t_arr)))
    refine = "quantized" if spec.family == "heat_sphere" else "golden"
    best_v, best_t = sweep_supremum(table, ts, columns_fn, mass_fn, refine=refine)
    values = np.maximum(u0.values, best_v)
    detached = values > u0.values + tol
    param = (1.0 - best_t) if spec.family == "poisson_sphere" else best_t
    limit = 1.0 if spec.family == "poisson_sphere" else 0.0
    return MaximalResult(
        variant=spec.family,
        nodes=u0.nodes,
        values=values,
        arg1=np.where(detached, param, limit),
        arg2=np.full(len(values), np.nan),
        detached=detached,
        meta={"tol": tol, "t_window": [spec.t_min, spec.t_max], "per_decade": per_decade},
    )


def sphere_detachment(result: MaximalResult, f: PolarProfile | None = None,
                      tol: float | None = None):
    """Maximal detached runs in theta with valley indices."""
    if f is not None and tol is not None:
        result = MaximalResult(result.variant, result.nodes, result.values,
                               result.arg1, result.arg2,
                               result.values > f.values + tol, result.meta)
    return _components_of(result)


def stable_meridian_derivative(result: MaximalResult, agreement_factor: float = 10.0):
    """One-sided difference quotients of the result values with a stability mask.

    Maximal functions are only Lipschitz; a node counts as stable when its
    left and right difference quotients agree within agreement_factor times
    the local scale tol / h.
    """
    nodes, vals = result.nodes, result.values
    left = np.full(len(nodes), np.nan)
    right = np.full(len(nodes), np.nan)
    left[1:] = (vals[1:] - vals[:-1]) / (nodes[1:] - nodes[:-1])
    right[:-1] = (vals[1:] - vals[:-1]) / (nodes[1:] - nodes[:-1])
    deriv = 0.5 * (left + right)
    h = np.gradient(nodes)
    tol = result.meta.get("tol", 1e-6 * max(float(np.max(vals)), 1e-300))
    stable = np.abs(left - right) <= agreement_factor * tol / h
    stable &= np.isfinite(left) & np.isfinite(right)
    return deriv, stable
