"""Independent brute-force references for the symmetry-reduced computations.

Monte Carlo averages sample the full-dimensional balls and caps directly
(no meridian reduction, no shell tables), so agreement validates every
reduction step at once.  Sampling is split into seed-derived substreams
whose (count, sum, sum of squares) merge associatively, making results
bit-reproducible for a fixed seed regardless of batching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .profiles import PolarProfile, RadialProfile

DEFAULT_SEED = 0xC0FFEE
_BATCH = 1 << 14


class SamplingError(RuntimeError):
    """Rejection sampling failed to collect enough points within budget."""


@dataclass(frozen=True)
class OracleConfig:
    seed: int = DEFAULT_SEED
    samples: int = 100_000
    confidence: float = 3.0          # acceptance bands are +- confidence * stderr
    rejection_budget: int = 64       # max oversampling factor for rejection loops

    def __post_init__(self):
        if self.samples < 1000:
            raise ValueError("sample count must be at least 1000")


@dataclass(frozen=True)
class MonteCarloEstimate:
    mean: float
    stderr: float
    n: int

    def band(self, confidence: float) -> tuple[float, float]:
        return self.mean - confidence * self.stderr, self.mean + confidence * self.stderr


def _substreams(cfg: OracleConfig, n_batches: int):
    return [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(n_batches)]


def _merge(stats) -> MonteCarloEstimate:
    n = sum(s[0] for s in stats)
    total = sum(s[1] for s in stats)
    total_sq = sum(s[2] for s in stats)
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return MonteCarloEstimate(mean=float(mean), stderr=float(np.sqrt(var / n)), n=int(n))


def mc_ball_average_rd(f, center_distance: float, rho: float, d: int,
                       cfg: OracleConfig = OracleConfig()) -> MonteCarloEstimate:
    """Monte Carlo average of f over the d-ball of radius rho centered on the first axis.

    f is a RadialProfile (evaluated at |y|) or a callable on the sample
    points (shape (batch, d)).  Points are drawn exactly uniformly via a
    Gaussian direction and a U^(1/d) radius.
    """
    if d not in (1, 2, 3):
        raise ValueError("Monte Carlo ball averages support d in {1, 2, 3}")
    if rho <= 0:
        raise ValueError("ball radius must be positive")
    evaluate = f if callable(f) and not isinstance(f, RadialProfile) else \
        (lambda pts: f(np.linalg.norm(pts, axis=1)))
    n_batches = (cfg.samples + _BATCH - 1) // _BATCH
    stats = []
    remaining = cfg.samples
    for rng in _substreams(cfg, n_batches):
        k = min(_BATCH, remaining)
        remaining -= k
        direction = rng.standard_normal((k, d))
        direction /= np.linalg.norm(direction, axis=1, keepdims=True)
        radius = rho * rng.random(k) ** (1.0 / d)
        pts = radius[:, None] * direction
        pts[:, 0] += center_distance
        vals = np.asarray(evaluate(pts), dtype=float)
        stats.append((k, vals.sum(), np.square(vals).sum()))
    return _merge(stats)


def mc_geodesic_average(f: PolarProfile, center_angle: float, rho: float, d: int,
                        cfg: OracleConfig = OracleConfig()) -> MonteCarloEstimate:
    """Monte Carlo average of a polar profile over a geodesic ball on S^d.

    Uniform points on the sphere come from normalized (d+1)-Gaussians and
    are rejected to the ball around the center at polar angle center_angle;
    raises SamplingError if the acceptance budget runs out.
    """
    if d not in (2, 3):
        raise ValueError("Monte Carlo geodesic averages support d in {2, 3}")
    if rho <= 0:
        raise ValueError("ball radius must be positive")
    center = np.zeros(d + 1)
    center[0] = np.cos(center_angle)
    center[1] = np.sin(center_angle)
    cos_rho = np.cos(rho)
    n_batches = cfg.rejection_budget * ((cfg.samples + _BATCH - 1) // _BATCH)
    stats = []
    accepted = 0
    for rng in _substreams(cfg, n_batches):
        z = rng.standard_normal((_BATCH, d + 1))
        z /= np.linalg.norm(z, axis=1, keepdims=True)
        keep = z @ center > cos_rho
        if not np.any(keep):
            continue
        pts = z[keep]
        if accepted + len(pts) > cfg.samples:
            pts = pts[: cfg.samples - accepted]
        theta = np.arccos(np.clip(pts[:, 0], -1.0, 1.0))
        vals = np.asarray(f(theta), dtype=float)
        stats.append((len(pts), vals.sum(), np.square(vals).sum()))
        accepted += len(pts)
        if accepted >= cfg.samples:
            break
    if accepted < cfg.samples:
        raise SamplingError(
            f"accepted {accepted}/{cfg.samples} samples within budget "
            f"(ball fraction ~{max(accepted, 1) / (n_batches * _BATCH):.2e})")
    return _merge(stats)


def dense_maximal_search(f, variant: str, factor: int = 4,
                         spec=None, per_decade: int = 64) -> np.ndarray:
    """Exhaustive grid supremum at `factor` times the production grid sizes.

    No polish, no parabolic refinement: plain grid maxima, used as ground
    truth for the production searches.  Supported variants:
    hl_centered | hl_uncentered | hl_aux_i (geometry from the profile type)
    and any kernel family name (with `spec`).
    """
    if factor < 4:
        raise ValueError("dense search must use at least 4x the production grids")
    from .shell_tables import default_rho_grid, polar_shell_table, radial_shell_table
    is_radial = isinstance(f, RadialProfile)

    if is_radial:
        rho_max = 2.0 * f.r_max + 5.0
        rho = default_rho_grid(rho_max, n_log=320 * factor // 2, n_lin=704 * factor // 2)
        centers = _dense_centers(f.nodes, factor, lo=0.0, hi=float(f.nodes[-1]))
        table = radial_shell_table(f, rho=rho, centers=centers)
    else:
        rho = np.concatenate([
            [0.0],
            np.geomspace(1e-6, 0.1, 256 * factor // 2, endpoint=False),
            np.linspace(0.1, np.pi, 768 * factor // 2),
        ])
        centers = _dense_centers(f.nodes, factor, lo=0.0, hi=np.pi)
        table = polar_shell_table(f, rho=rho, centers=centers)

    if variant in ("hl_centered", "hl_uncentered", "hl_aux_i"):
        avg = table.averages()
        if variant == "hl_aux_i":
            caps = np.minimum(centers, np.pi - centers) / 4.0
            avg = np.where(table.rho[None, :] <= caps[:, None] + 1e-15, avg, -np.inf)
        if variant == "hl_centered":
            node_rows = np.searchsorted(centers, f.nodes)
            best = np.max(avg[node_rows], axis=1)
        else:
            delta = np.abs(centers[:, None] - f.nodes[None, :])
            idx = np.minimum(np.searchsorted(table.rho, delta, side="left"), avg.shape[1] - 1)
            suf = np.flip(np.maximum.accumulate(np.flip(avg, axis=1), axis=1), axis=1)
            best = np.max(suf[np.arange(len(centers))[:, None], idx], axis=0)
        return np.maximum(np.asarray(f(f.nodes)), best)

    if spec is None:
        raise ValueError("kernel variants need a KernelSpec")
    node_rows = np.searchsorted(centers, f.nodes)
    sub = _row_subset(table, node_rows)
    from .sweeps import sweep_supremum
    ts = np.geomspace(spec.t_min, spec.t_max,
                      int(np.ceil(per_decade * factor * np.log10(spec.t_max / spec.t_min))) + 1)
    if is_radial:
        from .euclid_kernels import kernel_mass_in_window
        from .euclid_maximal import _kernel_columns
        columns_fn = lambda t: _kernel_columns(spec, table.rho, np.atleast_1d(t))
        mass_fn = lambda t: kernel_mass_in_window(spec.family, np.atleast_1d(t), spec.d, float(table.rho[-1]))
    else:
        from .sphere_kernels import sphere_kernel_profile
        columns_fn = lambda t: np.stack([sphere_kernel_profile(spec, table.rho, tv)
                                         for tv in np.atleast_1d(t)])
        mass_fn = lambda t: np.ones(len(np.atleast_1d(t)))
    best, _ = sweep_supremum(sub, ts, columns_fn, mass_fn, refine="none")
    return np.maximum(np.asarray(f(f.nodes)), best)


def _dense_centers(nodes: np.ndarray, factor: int, lo: float, hi: float) -> np.ndarray:
    fine = np.linspace(lo, hi, len(nodes) * factor)
    return np.unique(np.concatenate([fine, nodes]))


def _row_subset(table, rows):
    from .shell_tables import ShellTable
    return ShellTable(table.geometry, table.d, table.profile, table.centers[rows],
                      table.rho, table.weights, table.shell[rows], table.shell_area)
