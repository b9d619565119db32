"""Maximal operators for radial data: kernel flows and Hardy-Littlewood variants.

All suprema run over the shared shell-table reduction (see shell_tables),
so the computed chain

  u0 <= u* <= M u0 <= uncentered M u0

holds discretely by construction: the evolution is an Abel resummation of
the same cumulative shell sums the ball averages are made of, centered
balls are a subset of the uncentered candidate set, and the zero-parameter
limit contributes u0 exactly to every supremum.

Kernel columns are normalized by the ratio of their discrete window mass to
the exact window mass, which removes the quadrature bias of near-delta
kernels without ever "correcting" genuine truncation at the window edge.
"""

from __future__ import annotations

import numpy as np

from .euclid_kernels import KernelSpec, kernel_mass_in_window, kernel_values
from .profiles import RadialProfile
from .results import DetachmentComponent, MaximalResult
from .results import detachment_components as _components_of
from .shell_tables import ShellTable, radial_shell_table
from .sweeps import sweep_supremum

_GOLDEN_ITERS = 36


def default_tolerance(u0) -> float:
    return 1e-6 * float(np.max(u0.values))


def _kernel_columns(spec: KernelSpec, rho: np.ndarray, ts: np.ndarray) -> np.ndarray:
    """phi(rho_m, t_j) rows for every t; phi11 goes through its per-t profile table."""
    if spec.family == "phi11_rd":
        return np.stack([kernel_values("phi11_rd", rho, t, spec.d) for t in np.atleast_1d(ts)])
    if spec.family == "heat_rd":
        return (4.0 * np.pi * ts[:, None]) ** (-spec.d / 2.0) \
            * np.exp(-rho[None, :] ** 2 / (4.0 * ts[:, None]))
    if spec.family == "poisson_rd":
        from scipy.special import gamma as _g
        c = _g((spec.d + 1) / 2.0) / np.pi ** ((spec.d + 1) / 2.0)
        return c * ts[:, None] / (rho[None, :] ** 2 + ts[:, None] ** 2) ** ((spec.d + 1) / 2.0)
    raise ValueError(f"not a Euclidean family: {spec.family}")


def t_grid(spec: KernelSpec, per_decade: int = 64) -> np.ndarray:
    decades = np.log10(spec.t_max / spec.t_min)
    count = max(int(np.ceil(per_decade * decades)) + 1, 8)
    return np.geomspace(spec.t_min, spec.t_max, count)


def maximal_convolution(u0: RadialProfile, spec: KernelSpec,
                        table: ShellTable | None = None, tol: float | None = None,
                        per_decade: int = 64) -> MaximalResult:
    """u*(r) = sup over the flow parameter of the kernel evolution, per node.

    Log-spaced parameter sweep (per_decade values per decade) followed by
    golden-section refinement in log t around the discrete argmax; the
    t -> 0 limit contributes u0(r) exactly.
    """
    if not spec.is_euclidean:
        raise ValueError("maximal_convolution needs a Euclidean kernel family")
    if spec.d != u0.d:
        raise ValueError(f"kernel dimension {spec.d} != profile dimension {u0.d}")
    if table is None:
        table = radial_shell_table(u0)
    if tol is None:
        tol = default_tolerance(u0)
    ts = t_grid(spec, per_decade)
    columns_fn = lambda t: _kernel_columns(spec, table.rho, t)
    mass_fn = lambda t: kernel_mass_in_window(spec.family, t, spec.d, float(table.rho[-1]))
    # golden section would rebuild the phi11 profile table per iteration;
    # that family refines by re-evaluated parabolic peaks instead
    refine = "quantized" if spec.family == "phi11_rd" else "golden"
    best_v, best_t = sweep_supremum(table, ts, columns_fn, mass_fn, refine=refine)

    values = np.maximum(u0.values, best_v)
    detached = values > u0.values + tol
    arg1 = np.where(detached, best_t, 0.0)
    return MaximalResult(
        variant=spec.family,
        nodes=u0.nodes,
        values=values,
        arg1=arg1,
        arg2=np.full(len(values), np.nan),
        detached=detached,
        meta={
            "tol": tol,
            "t_window": [spec.t_min, spec.t_max],
            "per_decade": per_decade,
            "rho_window": float(table.rho[-1]),
        },
    )


# ---------------------------------------------------------------------------
# ball averages as functions of a continuum radius (between rho-grid points)

def _interp_cums(table: ShellTable, rows: np.ndarray, z: np.ndarray):
    """cumulative mass/area at arbitrary radii z, one row index per lane.

    Extends the trapezoid cumulative sums with the piecewise-linear shell
    interpolant, so every value remains a convex combination of shell means.
    """
    rho = table.rho
    idx = np.clip(np.searchsorted(rho, z, side="right") - 1, 0, len(rho) - 2)
    frac = (z - rho[idx])
    s_lo = table.shell[rows, idx]
    s_hi = table.shell[rows, idx + 1]
    drho = rho[idx + 1] - rho[idx]
    s_z = s_lo + (s_hi - s_lo) * frac / drho
    # cumulative trapezoid sum strictly to rho[idx], then the partial piece to z
    cum_to_idx = table.cum_mass[rows, idx] - _half_forward(table, idx) * s_lo
    cum = cum_to_idx + 0.5 * (s_lo + s_z) * frac
    a_lo = table.shell_area[idx]
    a_hi = table.shell_area[idx + 1]
    a_z = a_lo + (a_hi - a_lo) * frac / drho
    cum_a_to_idx = table.cum_area[idx] - _half_forward(table, idx) * a_lo
    cum_a = cum_a_to_idx + 0.5 * (a_lo + a_z) * frac
    return cum, cum_a


def _half_forward(table: ShellTable, idx: np.ndarray) -> np.ndarray:
    # trapezoid weight at node idx includes half the forward interval, except at the end
    rho = table.rho
    fwd = np.where(idx + 1 < len(rho), rho[np.minimum(idx + 1, len(rho) - 1)] - rho[idx], 0.0)
    return 0.5 * fwd


def _average_at_radius(table: ShellTable, rows: np.ndarray, z: np.ndarray) -> np.ndarray:
    cum, cum_a = _interp_cums(table, rows, z)
    center_vals = np.asarray(table.profile(table.centers[rows]))
    return np.where(cum_a > 0, cum / np.where(cum_a > 0, cum_a, 1.0), center_vals)


def _refine_rho(table: ShellTable, rows: np.ndarray, j: np.ndarray,
                rho_floor: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Golden-section polish of the ball average in rho around grid argmax j."""
    from .numerics import golden_max
    rho = table.rho
    lo = rho[np.maximum(j - 1, 0)]
    hi = rho[np.minimum(j + 1, len(rho) - 1)]
    if rho_floor is not None:
        lo = np.maximum(lo, rho_floor)
        hi = np.maximum(hi, lo + 1e-15)
    return golden_max(lambda z: _average_at_radius(table, rows, z), lo, hi,
                      iters=_GOLDEN_ITERS)


def hl_centered_radial(u0: RadialProfile, table: ShellTable | None = None,
                       tol: float | None = None) -> MaximalResult:
    """Centered Hardy-Littlewood maximal function of a radial profile.

    M u0(r) = sup_rho (ball average over B_rho(x)), via the shell-table
    cumulative ratios on the rho grid plus golden-section polish; the
    rho -> 0 limit contributes u0(r) exactly.
    """
    if table is None:
        table = radial_shell_table(u0)
    if tol is None:
        tol = default_tolerance(u0)
    avg = table.averages()
    j = np.argmax(avg, axis=1)
    rows = np.arange(avg.shape[0])
    grid_v = avg[rows, j]
    z, v = _refine_rho(table, rows, j)
    best_v = np.maximum(grid_v, v)
    best_rho = np.where(v > grid_v, z, table.rho[j])
    values = np.maximum(u0.values, best_v)
    detached = values > u0.values + tol
    return MaximalResult(
        variant="hl_centered",
        nodes=u0.nodes,
        values=values,
        arg1=np.where(detached, best_rho, 0.0),
        arg2=np.full(len(values), np.nan),
        detached=detached,
        meta={"tol": tol, "rho_window": float(table.rho[-1])},
    )


def hl_uncentered_radial(u0: RadialProfile, table: ShellTable | None = None,
                         centered: MaximalResult | None = None,
                         tol: float | None = None) -> MaximalResult:
    """Uncentered Hardy-Littlewood maximal function of a radial profile.

    Centers are restricted to the ray through x (ball averages of radial
    data depend only on (|center|, rho) and the containment constraint
    rho >= | |center| - r | is loosest there); candidates are the profile
    nodes plus the origin.  The centered result is folded in explicitly so
    the computed pointwise domination M u0 <= uncentered M u0 is structural.
    """
    if table is None:
        table = radial_shell_table(u0)
    if tol is None:
        tol = default_tolerance(u0)
    if centered is None:
        centered = hl_centered_radial(u0, table=table, tol=tol)

    origin = table.rebuilt_at(np.array([0.0]))
    avg = np.vstack([origin._cum_mass / np.where(table.cum_area > 0, table.cum_area, 1.0),
                     table.averages()])
    if np.any(table.cum_area <= 0):
        avg[0, table.cum_area <= 0] = float(u0(0.0))
    centers = np.concatenate([[0.0], table.centers])

    # suffix maxima in rho: best average using radius >= rho_m, per center row
    suf = np.flip(np.maximum.accumulate(np.flip(avg, axis=1), axis=1), axis=1)
    sufarg = np.flip(_accumulate_argmax(np.flip(avg, axis=1)), axis=1)
    sufarg = avg.shape[1] - 1 - sufarg

    nodes = u0.nodes
    n = len(nodes)
    delta = np.abs(centers[:, None] - nodes[None, :])          # (C, n)
    idx = np.searchsorted(table.rho, delta, side="left")
    idx = np.minimum(idx, avg.shape[1] - 1)
    cand = suf[np.arange(len(centers))[:, None], idx]           # (C, n)
    best_c_idx = np.argmax(cand, axis=0)
    grid_v = cand[best_c_idx, np.arange(n)]
    best_rho_idx = sufarg[best_c_idx, idx[best_c_idx, np.arange(n)]]
    best_c = centers[best_c_idx]
    best_rho = table.rho[best_rho_idx]

    # polish rho at the winning center, respecting the containment floor
    ext = ShellTable(table.geometry, table.d, table.profile, centers, table.rho,
                     table.weights, np.vstack([origin.shell, table.shell]),
                     table.shell_area)
    floor = np.abs(best_c - nodes)
    z, v = _refine_rho(ext, best_c_idx, best_rho_idx, rho_floor=floor)
    improve = v > grid_v
    best_v = np.where(improve, v, grid_v)
    best_rho = np.where(improve, z, best_rho)

    values = np.maximum.reduce([u0.values, centered.values, best_v])
    detached = values > u0.values + tol
    centered_wins = centered.values >= best_v
    arg_c = np.where(centered_wins, nodes, best_c)
    arg_rho = np.where(centered_wins, centered.arg1, best_rho)
    return MaximalResult(
        variant="hl_uncentered",
        nodes=nodes,
        values=values,
        arg1=np.where(detached, arg_c, nodes),
        arg2=np.where(detached, arg_rho, 0.0),
        detached=detached,
        meta={"tol": tol,
              "rho_window": float(table.rho[-1]),
              "rho_cap_rule": "rho <= center + r_max + 5"},
    )


def _accumulate_argmax(a: np.ndarray) -> np.ndarray:
    """Row-wise index of the running maximum (ties keep the earliest index)."""
    m = np.maximum.accumulate(a, axis=1)
    fresh = a >= m
    idx = np.where(fresh, np.arange(a.shape[1])[None, :], 0)
    return np.maximum.accumulate(idx, axis=1)


def detachment_components(result: MaximalResult, u0: RadialProfile | None = None,
                          tol: float | None = None) -> list[DetachmentComponent]:
    """Maximal runs of detached nodes with valley indices.

    With u0 and tol given, the mask is recomputed as values > u0 + tol;
    otherwise the mask stored on the result is used.
    """
    if u0 is not None and tol is not None:
        result = MaximalResult(result.variant, result.nodes, result.values,
                               result.arg1, result.arg2,
                               result.values > u0.values + tol, result.meta)
    return _components_of(result)


def check_mean_value_subharmonic(result: MaximalResult, u0: RadialProfile,
                                 radii_fractions=(0.25, 0.5, 0.85),
                                 max_samples_per_component: int = 12) -> dict:
    """Smallest (ball average of u* minus u*(center)) over the detachment set.

    Samples interior nodes of every detachment component and ball radii that
    keep the ball inside the component; subharmonicity of u* there makes
    every sampled deficit nonnegative up to quadrature error.
    """
    ustar = u0.with_values(np.maximum(result.values, 0.0))
    comps = _components_of(result)
    samples = []
    table = None
    for comp in comps:
        first, last = comp.first, comp.last
        if last - first < 4:
            continue
        inner = np.linspace(first + 1, last - 1, min(max_samples_per_component, last - first - 1))
        for i in np.unique(inner.astype(int)):
            r0 = u0.nodes[i]
            margin = min(r0 - u0.nodes[first], u0.nodes[last] - r0)
            local_h = u0.nodes[min(i + 1, len(u0.nodes) - 1)] - u0.nodes[max(i - 1, 0)]
            for frac in radii_fractions:
                rho = frac * margin
                if rho <= local_h:
                    continue
                if table is None:
                    table = radial_shell_table(ustar)
                avg = _average_at_radius(table, np.array([i]), np.array([rho]))[0]
                samples.append({"node": float(r0), "rho": float(rho),
                                "deficit": float(avg - ustar.values[i])})
    worst = min((s["deficit"] for s in samples), default=0.0)
    return {"worst_deficit": worst, "n_samples": len(samples), "samples": samples}
