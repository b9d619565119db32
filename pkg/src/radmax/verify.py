"""Inequality and structure checks tying the computed operators together.

Every check records the measured quantity, its threshold, and a provenance
note; nothing is a bare boolean.  Implicit dimensional constants are not
knowable, so ratio-type checks compare against frozen first-run baselines
(bundled in data/baselines.json) with 5% headroom; absolute checks carry
tolerances derived from grid resolution or stated acceptance bounds.

Engineered negative controls are part of the suite: a control check passes
exactly when the corresponding violation IS detected.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources

import numpy as np

from .corpus import build_profile, corpus_names, corpus_profiles
from .euclid_kernels import KernelSpec
from .euclid_maximal import (check_mean_value_subharmonic, default_tolerance,
                             hl_centered_radial, hl_uncentered_radial,
                             maximal_convolution)
from .numerics import gauss_legendre_01, sphere_area
from .oracle import OracleConfig, mc_ball_average_rd, mc_geodesic_average
from .profiles import (PolarProfile, RadialProfile, gradient_l1,
                       gradient_l1_sphere, weak_derivative)
from .results import MaximalResult, detachment_components, valley_violation
from .shell_tables import polar_shell_table, radial_shell_table
from .sphere_geometry import (GeodesicBall, ball_area_ratio, geodesic_average,
                              polar_to_xyz, sigma_ball, sigma_ball_derivative,
                              vertex_angle)
from .sphere_maximal import (hl_auxiliary_sphere, hl_centered_sphere,
                             hl_uncentered_sphere, maximal_sphere_convolution,
                             stable_meridian_derivative)

BASELINE_HEADROOM = 1.05
_RD_FAMILIES = ("heat_rd", "poisson_rd", "phi11_rd")
_SPHERE_FAMILIES = ("poisson_sphere", "heat_sphere")


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    measured: float
    threshold: float
    passed: bool
    note: str = ""
    inputs_digest: str = ""


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    seed: int = 0
    recorded_baselines: dict = field(default_factory=dict)

    def add(self, check: VerificationCheck):
        self.checks.append(check)

    def sorted_checks(self) -> list:
        return sorted(self.checks, key=lambda c: c.name)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> str:
        payload = {
            "seed": self.seed,
            "all_passed": self.all_passed,
            "checks": [asdict(c) for c in self.sorted_checks()],
        }
        return json.dumps(payload, indent=1)


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(a, dtype=float).tobytes())
    return h.hexdigest()[:12]


def load_bundled_baselines() -> dict:
    path = resources.files("radmax").joinpath("data/baselines.json")
    try:
        with path.open("r") as fh:
            return json.load(fh)
    except FileNotFoundError:
        return {}


class SuiteContext:
    """Memoizes tables and operator results shared between checks.

    Computation of shared objects happens under a lock so concurrent checks
    never duplicate the heavy work; the checks themselves stay parallel.
    """

    def __init__(self, baselines: dict | None, seed: int = 0xC0FFEE,
                 corpus_n: int = 384):
        self.baselines = baselines
        self.recorded: dict = {}
        self.seed = seed
        self.corpus_n = corpus_n
        self._profiles: dict = {}
        self._tables: dict = {}
        self._results: dict = {}
        import threading
        self._lock = threading.RLock()

    def profile(self, geometry: str, name: str, d: int):
        key = (geometry, name, d)
        with self._lock:
            if key not in self._profiles:
                self._profiles[key] = build_profile(geometry, name, d, self.corpus_n)
            return self._profiles[key]

    def table(self, geometry: str, name: str, d: int):
        key = (geometry, name, d)
        with self._lock:
            if key not in self._tables:
                prof = self.profile(geometry, name, d)
                build = radial_shell_table if geometry == "rd" else polar_shell_table
                self._tables[key] = build(prof)
            return self._tables[key]

    def result(self, geometry: str, name: str, d: int, operator: str) -> MaximalResult:
        key = (geometry, name, d, operator)
        with self._lock:
            return self._result_locked(key, geometry, name, d, operator)

    def _result_locked(self, key, geometry, name, d, operator) -> MaximalResult:
        if key in self._results:
            return self._results[key]
        prof = self.profile(geometry, name, d)
        table = self.table(geometry, name, d)
        if geometry == "rd":
            if operator == "hl_centered":
                res = hl_centered_radial(prof, table=table)
            elif operator == "hl_uncentered":
                res = hl_uncentered_radial(
                    prof, table=table,
                    centered=self.result(geometry, name, d, "hl_centered"))
            else:
                res = maximal_convolution(prof, KernelSpec(operator, d), table=table)
        else:
            if operator == "hl_centered":
                res = hl_centered_sphere(prof, table=table)
            elif operator == "hl_uncentered":
                res = hl_uncentered_sphere(
                    prof, table=table,
                    centered=self.result(geometry, name, d, "hl_centered"))
            elif operator == "hl_aux_i":
                res = hl_auxiliary_sphere(prof, table=table)
            else:
                res = maximal_sphere_convolution(prof, KernelSpec(operator, d), table=table)
        self._results[key] = res
        return res

    def baseline_check(self, name: str, key: str, measured: float, digest: str,
                       note: str = "") -> VerificationCheck:
        """Compare a ratio against its frozen baseline (or record it)."""
        self.recorded[key] = measured
        if self.baselines is None:
            return VerificationCheck(name, measured, float("nan"), True,
                                     note=(note + " [record mode]").strip(), inputs_digest=digest)
        base = self.baselines.get(key)
        if base is None:
            return VerificationCheck(name, measured, float("nan"), False,
                                     note=f"missing baseline {key}", inputs_digest=digest)
        threshold = base * BASELINE_HEADROOM
        return VerificationCheck(name, measured, threshold, measured <= threshold,
                                 note=note or f"frozen baseline {base:.6g} + 5%",
                                 inputs_digest=digest)


# ---------------------------------------------------------------------------
# chain and gradient checks

def check_chain(ctx: SuiteContext, geometry: str, name: str, d: int,
                family: str) -> list[VerificationCheck]:
    """Pointwise domination chain u0 <= u* <= M u0 <= uncentered M u0, plus the
    composite derivative-integral inequality that feeds the gradient bound."""
    prof = ctx.profile(geometry, name, d)
    tol = default_tolerance(prof)
    ustar = ctx.result(geometry, name, d, family)
    m = ctx.result(geometry, name, d, "hl_centered")
    mt = ctx.result(geometry, name, d, "hl_uncentered")
    digest = _digest(prof.values)
    viols = {
        "u0<=u*": float(np.max(prof.values - ustar.values)),
        "u*<=M": float(np.max(ustar.values - m.values)),
        "M<=Mt": float(np.max(m.values - mt.values)),
    }
    out = [VerificationCheck(
        f"chain/{geometry}/d{d}/{family}/{name}",
        measured=max(viols.values()), threshold=tol,
        passed=max(viols.values()) <= tol,
        note="worst pairwise violation; tol = 1e-6 sup u0",
        inputs_digest=digest)]

    grad = gradient_l1 if geometry == "rd" else gradient_l1_sphere
    lhs = grad(prof.with_values(ustar.values))
    rhs = grad(prof) + grad(prof.with_values(mt.values))
    slack = 1e-3 * rhs + 1e-12
    out.append(VerificationCheck(
        f"chain_composite/{geometry}/d{d}/{family}/{name}",
        measured=lhs, threshold=rhs + slack, passed=lhs <= rhs + slack,
        note="weighted |grad| of u* vs |grad| u0 + |grad| uncentered-M; 0.1% quadrature slack",
        inputs_digest=digest))
    return out


def check_gradient_bound(ctx: SuiteContext, geometry: str, name: str, d: int,
                         operator: str) -> list[VerificationCheck]:
    """Ratio of gradient norms output/input against its frozen baseline."""
    prof = ctx.profile(geometry, name, d)
    grad = gradient_l1 if geometry == "rd" else gradient_l1_sphere
    denom = grad(prof)
    digest = _digest(prof.values)
    if denom <= 0:
        return [VerificationCheck(
            f"gradient/{geometry}/d{d}/{operator}/{name}", 0.0, 0.0, True,
            note="skipped: constant datum (zero gradient)", inputs_digest=digest)]
    res = ctx.result(geometry, name, d, operator)
    ratio = grad(prof.with_values(res.values)) / denom
    key = f"grad_ratio/{geometry}/{operator}/{name}/d{d}"
    return [ctx.baseline_check(f"gradient/{geometry}/d{d}/{operator}/{name}",
                               key, ratio, digest)]


def check_detachment(ctx: SuiteContext, geometry: str, name: str, d: int,
                     family: str) -> list[VerificationCheck]:
    """Valley property on every component; mean-value subharmonicity for
    Euclidean convolution flows."""
    prof = ctx.profile(geometry, name, d)
    res = ctx.result(geometry, name, d, family)
    comps = detachment_components(res)
    worst = max((valley_violation(res, c) for c in comps), default=0.0)
    tol = res.meta.get("tol", default_tolerance(prof))
    digest = _digest(prof.values)
    out = [VerificationCheck(
        f"detachment_valley/{geometry}/d{d}/{family}/{name}",
        measured=worst, threshold=tol,
        passed=worst <= tol,
        note=f"{len(comps)} components; worst wrong-direction step",
        inputs_digest=digest)]
    if geometry == "rd":
        sub = check_mean_value_subharmonic(res, prof)
        out.append(VerificationCheck(
            f"detachment_subharmonic/{geometry}/d{d}/{family}/{name}",
            measured=-sub["worst_deficit"], threshold=1e-4,
            passed=sub["worst_deficit"] >= -1e-4,
            note=f"negated worst mean-value deficit over {sub['n_samples']} samples",
            inputs_digest=digest))
    return out


def check_negative_controls(ctx: SuiteContext) -> list[VerificationCheck]:
    """Engineered violations must be detected (the suite tests its own power)."""
    prof = ctx.profile("rd", "gaussian", 2)
    res = ctx.result("rd", "gaussian", 2, "heat_rd")
    mt = ctx.result("rd", "gaussian", 2, "hl_uncentered")
    digest = _digest(prof.values)
    tol = default_tolerance(prof)
    out = []

    # swapped chain: uncentered-M <= u* should be violated somewhere
    swap_viol = float(np.max(mt.values - res.values))
    out.append(VerificationCheck(
        "controls/chain_swap_detected", measured=swap_viol, threshold=tol,
        passed=swap_viol > tol,
        note="swapping u* and uncentered-M must violate the chain", inputs_digest=digest))

    comps = detachment_components(res)
    comp = max(comps, key=lambda c: c.last - c.first)
    bumped = res.values.copy()
    mid = (comp.first + comp.last) // 2
    width = max((comp.last - comp.first) // 8, 2)
    lo, hi = mid - width, mid + width
    bumped[lo:hi] += 0.05 * np.max(prof.values) * np.hanning(hi - lo)
    bad = MaximalResult(res.variant, res.nodes, bumped, res.arg1, res.arg2,
                        res.detached, res.meta)

    valley_bad = max(valley_violation(bad, c) for c in detachment_components(bad))
    out.append(VerificationCheck(
        "controls/valley_bump_detected", measured=valley_bad, threshold=tol,
        passed=valley_bad > tol,
        note="interior bump must break the valley shape", inputs_digest=digest))

    sub = check_mean_value_subharmonic(bad, prof)
    out.append(VerificationCheck(
        "controls/subharmonic_bump_detected", measured=-sub["worst_deficit"],
        threshold=1e-4, passed=sub["worst_deficit"] < -1e-4,
        note="interior bump must produce a negative mean-value deficit",
        inputs_digest=digest))
    return out


# ---------------------------------------------------------------------------
# geometry lemmas

def check_geometry_triangles(ctx: SuiteContext, n_triangles: int = 100_000,
                             cap_radius: float = 0.1, gamma: float = 1.02) -> list[VerificationCheck]:
    """Random geodesic triangles inside the small cap about the pole:
    a sin(B) <= gamma b always, and |c - a cos(B)| <= b when B <= pi/2."""
    rng = np.random.default_rng(ctx.seed)
    u = rng.random((3, n_triangles))
    cos_th = 1.0 - u * (1.0 - np.cos(cap_radius))
    theta = np.arccos(cos_th)
    phi = rng.random((3, n_triangles)) * 2.0 * np.pi
    pts = [np.stack([np.cos(theta[i]), np.sin(theta[i]) * np.cos(phi[i]),
                     np.sin(theta[i]) * np.sin(phi[i])], axis=1) for i in range(3)]

    def dist(p, q):
        return np.arccos(np.clip(np.sum(p * q, axis=1), -1.0, 1.0))

    a = dist(pts[1], pts[2])
    b = dist(pts[2], pts[0])
    c = dist(pts[0], pts[1])
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_b_angle = (np.cos(b) - np.cos(c) * np.cos(a)) / (np.sin(c) * np.sin(a))
    ok = (np.sin(c) > 1e-12) & (np.sin(a) > 1e-12)
    angle_b = np.arccos(np.clip(cos_b_angle[ok], -1.0, 1.0))
    a_, b_, c_ = a[ok], b[ok], c[ok]

    sine_excess = float(np.max(a_ * np.sin(angle_b) - gamma * b_))
    digest = _digest(np.array([ctx.seed, n_triangles], dtype=float))
    out = [VerificationCheck(
        "geometry/triangle_sine_bound", measured=sine_excess, threshold=0.0,
        passed=sine_excess <= 0.0,
        note=f"max(a sinB - {gamma} b) over {int(ok.sum())} triangles in the {cap_radius}-cap",
        inputs_digest=digest)]

    acute = angle_b <= np.pi / 2
    proj_excess = float(np.max(np.abs(c_[acute] - a_[acute] * np.cos(angle_b[acute]))
                               - b_[acute], initial=-np.inf))
    out.append(VerificationCheck(
        "geometry/triangle_projection_bound", measured=proj_excess, threshold=1e-12,
        passed=proj_excess <= 1e-12,
        note="max(|c - a cosB| - b) over acute-at-B triangles",
        inputs_digest=digest))
    return out


def check_ball_area_ratio(ctx: SuiteContext, n_grid: int = 10_000) -> list[VerificationCheck]:
    """d sigma(t)/(t sigma'(t)) stays in [0.95, 1.05] on (0, 1/4] for d = 2..10."""
    t = np.linspace(1e-9, 0.25, n_grid)
    worst_lo, worst_hi = np.inf, -np.inf
    for d in range(2, 11):
        vals = d * ball_area_ratio(t, d)
        worst_lo = min(worst_lo, float(vals.min()))
        worst_hi = max(worst_hi, float(vals.max()))
    digest = _digest(t[:10])
    out = [VerificationCheck(
        "geometry/ball_area_ratio_upper", measured=worst_hi, threshold=1.05,
        passed=worst_hi <= 1.05, note="max over t in (0, 1/4], d = 2..10",
        inputs_digest=digest)]
    out.append(VerificationCheck(
        "geometry/ball_area_ratio_lower", measured=worst_lo, threshold=0.95,
        passed=worst_lo >= 0.95, note="min over t in (0, 1/4], d = 2..10 (threshold is a floor)",
        inputs_digest=digest))
    limit_dev = max(abs(d * ball_area_ratio(1e-12, d) - 1.0) for d in range(2, 11))
    out.append(VerificationCheck(
        "geometry/ball_area_ratio_limit", measured=limit_dev, threshold=1e-9,
        passed=limit_dev <= 1e-9, note="d * ratio -> 1 as t -> 0+",
        inputs_digest=digest))
    return out


# ---------------------------------------------------------------------------
# sphere derivative checks

def _ball_quadrature(d: int, c: float, radius: float, n_r: int = 64, n_psi: int = 64):
    """Nodes/weights for integrals over a geodesic ball around center angle c.

    Returns (theta_eta, dist_to_center, weight) flattened arrays; weight
    includes the full surface measure, so weights sum to sigma(radius).
    """
    xr, wr = gauss_legendre_01(n_r)
    xp, wp = gauss_legendre_01(n_psi)
    rp = radius * xr
    psi = np.pi * xp
    wr_full = radius * wr * sphere_area(d - 1) * np.sin(rp) ** (d - 1)
    wp_full = np.pi * wp * np.sin(psi) ** (d - 2) * sphere_area(d - 2) / sphere_area(d - 1)
    cos_th = np.cos(c) * np.cos(rp)[:, None] + np.sin(c) * np.sin(rp)[:, None] * np.cos(psi)[None, :]
    theta = np.arccos(np.clip(cos_th, -1.0, 1.0))
    w = wr_full[:, None] * wp_full[None, :]
    dist = np.broadcast_to(rp[:, None], theta.shape)
    return theta.ravel(), dist.ravel(), w.ravel()


def _boundary_candidates(f: PolarProfile, result: MaximalResult, max_nodes: int = 10):
    """Detached nodes with stable derivative and a near-side boundary argmax ball."""
    deriv, stable = stable_meridian_derivative(result)
    h = float(np.median(np.diff(f.nodes)))
    cand = []
    for i in np.nonzero(result.detached & stable)[0]:
        c, rho = result.arg1[i], result.arg2[i]
        theta0 = f.nodes[i]
        if not (0.0 <= c < theta0):
            continue
        if abs(rho - (theta0 - c)) > 2.0 * h:
            continue
        cand.append((int(i), float(c), float(rho), float(deriv[i])))
    if len(cand) > max_nodes:
        step = len(cand) / max_nodes
        cand = [cand[int(k * step)] for k in range(max_nodes)]
    return cand


def check_derivative_ball_bound(ctx: SuiteContext, name: str = "cos2",
                                d: int = 2) -> list[VerificationCheck]:
    """|meridian derivative of uncentered-M f| <= ball average of |f'| at the
    recorded argmax ball, evaluated at stable detached nodes."""
    f = ctx.profile("sphere", name, d)
    res = ctx.result("sphere", name, d, "hl_uncentered")
    deriv, stable = stable_meridian_derivative(res)
    fprime = np.abs(weak_derivative(f))
    abs_grad = f.with_values(fprime)
    h = float(np.median(np.diff(f.nodes)))
    digest = _digest(f.values)
    worst = -np.inf
    count = 0
    for i in np.nonzero(res.detached & stable)[0][::8]:
        rho = res.arg2[i]
        if rho <= 2 * h:
            continue
        ball = GeodesicBall(float(res.arg1[i]), float(rho), d)
        bound = geodesic_average(abs_grad, ball)
        worst = max(worst, abs(deriv[i]) - bound)
        count += 1
    if count == 0:
        return [VerificationCheck(
            f"derivative/ball_bound/{name}/d{d}", 0.0, 0.0, True,
            note="vacuous: no stable detached nodes", inputs_digest=digest)]
    tol = 30.0 * h * float(np.max(fprime) + 1.0)   # first-order fd + argmax slack
    return [VerificationCheck(
        f"derivative/ball_bound/{name}/d{d}", measured=worst, threshold=tol,
        passed=worst <= tol,
        note=f"max(|dM~f| - ball avg |f'|) over {count} stable detached nodes; grid tol",
        inputs_digest=digest)]


def boundary_identity_residuals(f: PolarProfile, result: MaximalResult) -> list[float]:
    """Residuals of the boundary-ball derivative identity at eligible nodes.

    At a detached node whose argmax ball touches it from the pole side, the
    meridian derivative of the maximal function equals

      (sigma'(r)/sigma(r)) * (ball average of
          f'(theta(eta)) cos(angle at eta between geodesics to the pole and
          to the center) * sigma(dist)/sigma'(dist)).
    """
    d = f.d
    fprime_prof = f.with_values(weak_derivative(f))
    out = []
    for i, c, rho, fd in _boundary_candidates(f, result):
        theta_eta, dist, w = _ball_quadrature(d, c, rho)
        inner = dist > 1e-12
        fp = fprime_prof(theta_eta[inner])
        with np.errstate(invalid="ignore", divide="ignore"):
            cos_angle = (np.cos(c) - np.cos(theta_eta[inner]) * np.cos(dist[inner])) \
                / (np.sin(theta_eta[inner]) * np.sin(dist[inner]))
        cos_angle = np.clip(np.nan_to_num(cos_angle), -1.0, 1.0)
        weight = sigma_ball(dist[inner], d) / np.maximum(sigma_ball_derivative(dist[inner], d), 1e-300)
        integral = float(np.sum(w[inner] * fp * cos_angle * weight))
        rhs = sigma_ball_derivative(rho, d) / sigma_ball(rho, d) * integral / sigma_ball(rho, d)
        out.append(abs(fd - rhs))
    return out


def check_boundary_identity(ctx: SuiteContext, name: str = "cos2",
                            d: int = 2) -> list[VerificationCheck]:
    f = ctx.profile("sphere", name, d)
    res = ctx.result("sphere", name, d, "hl_uncentered")
    residuals = boundary_identity_residuals(f, res)
    digest = _digest(f.values)
    if not residuals:
        return [VerificationCheck(
            f"derivative/boundary_identity/{name}/d{d}", 0.0, 0.0, True,
            note="vacuous: no stable boundary-argmax nodes", inputs_digest=digest)]
    h = float(np.median(np.diff(f.nodes)))
    scale = float(np.max(np.abs(weak_derivative(f))))
    tol = 60.0 * h * (scale + 1.0)
    worst = max(residuals)
    return [VerificationCheck(
        f"derivative/boundary_identity/{name}/d{d}", measured=worst, threshold=tol,
        passed=worst <= tol,
        note=f"max |fd - identity| over {len(residuals)} nodes; grid-scaled tol",
        inputs_digest=digest)]


def check_near_pole_derivative(ctx: SuiteContext, d: int = 2) -> list[VerificationCheck]:
    """Empirical constant of the near-pole derivative estimate, regression-bounded.

    At detached nodes inside the 0.1-cap whose argmax ball sits on the pole
    side, |dM~f| is compared against
    (1/theta0) avg_B(|f'| theta) + (rho c / theta0) avg_B(|f'|).
    """
    f = build_profile("special", "polar_bump", d)
    table = polar_shell_table(f)
    res = hl_uncentered_sphere(f, table=table)
    fprime = np.abs(weak_derivative(f))
    fp_prof = f.with_values(fprime)
    digest = _digest(f.values)
    ratios = []
    for i, c, rho, fd in _boundary_candidates(f, res, max_nodes=24):
        theta0 = f.nodes[i]
        if theta0 + 1e-12 > 0.1 or c + rho > 0.1:
            continue
        theta_eta, dist, w = _ball_quadrature(d, c, rho)
        fp = fp_prof(theta_eta)
        vol = sigma_ball(rho, d)
        avg_weighted = float(np.sum(w * fp * theta_eta)) / vol
        avg_plain = float(np.sum(w * fp)) / vol
        bound = avg_weighted / theta0 + rho * c / theta0 * avg_plain
        if bound > 0:
            ratios.append(abs(fd) / bound)
    if not ratios:
        return [VerificationCheck(
            f"nearpole/derivative_constant/d{d}", 0.0, 0.0, True,
            note="vacuous: no eligible near-pole nodes", inputs_digest=digest)]
    measured = max(ratios)
    return [ctx.baseline_check(
        f"nearpole/derivative_constant/d{d}", f"nearpole_constant/d{d}",
        measured, digest, note=f"empirical constant over {len(ratios)} nodes")]


def check_equator_gap(ctx: SuiteContext, name: str, d: int = 2) -> list[VerificationCheck]:
    """Gap of the uncentered maximal function over the datum at the equator,
    relative to the weighted gradient norm; regression-bounded ratio."""
    f = ctx.profile("sphere", name, d)
    res = ctx.result("sphere", name, d, "hl_uncentered")
    i = int(np.argmin(np.abs(f.nodes - np.pi / 2)))
    grad = gradient_l1_sphere(f)
    digest = _digest(f.values)
    if grad <= 0:
        return [VerificationCheck(
            f"equator/gap_ratio/{name}/d{d}", 0.0, 0.0, True,
            note="vacuous: constant datum", inputs_digest=digest)]
    gap = float(res.values[i] - f.values[i])
    ratio = gap / grad
    out = [ctx.baseline_check(f"equator/gap_ratio/{name}/d{d}",
                              f"equator_gap/{name}/d{d}", ratio, digest,
                              note="(M~f - f)(pi/2) / weighted grad norm")]
    band = (f.nodes >= np.pi / 4) & (f.nodes <= 3 * np.pi / 4)
    band_gap = float(res.values[i] - np.max(f.values[band]))
    out.append(ctx.baseline_check(
        f"equator/band_gap_ratio/{name}/d{d}", f"equator_band_gap/{name}/d{d}",
        max(band_gap, 0.0) / grad, digest,
        note="(M~f(pi/2) - sup of f on the quarter band) / weighted grad norm"))
    return out


def check_weighted_tail(ctx: SuiteContext, name: str, d: int) -> list[VerificationCheck]:
    """(d-1) int M~u0 r^(d-2) dr <= int |(M~u0)'| r^(d-1) dr on decaying profiles."""
    prof = ctx.profile("rd", name, d)
    res = ctx.result("rd", name, d, "hl_uncentered")
    digest = _digest(prof.values)
    mt_prof = prof.with_values(res.values)
    from .numerics import trapezoid_weights
    w = trapezoid_weights(prof.nodes)
    rhs = float(np.sum(w * np.abs(weak_derivative(mt_prof)) * prof.nodes ** (d - 1)))
    lhs = float((d - 1) * np.sum(w * res.values * prof.nodes ** (d - 2)))
    tail = float(res.values[-1] * prof.nodes[-1] ** (d - 1))
    if tail > 1e-3 * rhs:
        return [VerificationCheck(
            f"tail/weighted_chain/{name}/d{d}", lhs, rhs, True,
            note="skipped: maximal function does not decay enough on the grid",
            inputs_digest=digest)]
    slack = 0.02 * rhs + 1e-12   # boundary term at r_max plus quadrature
    return [VerificationCheck(
        f"tail/weighted_chain/{name}/d{d}", measured=lhs, threshold=rhs + slack,
        passed=lhs <= rhs + slack,
        note="(d-1) int M~ r^(d-2) vs int |(M~)'| r^(d-1), 2% slack for the truncated tail",
        inputs_digest=digest)]


def check_oracle_agreement(ctx: SuiteContext) -> list[VerificationCheck]:
    """Symmetry-reduced averages agree with Monte Carlo within 3 standard errors."""
    cfg = OracleConfig(seed=ctx.seed)
    out = []
    cases_rd = [("gaussian", 2, 1.2, 2.0), ("gaussian", 3, 0.8, 1.5),
                ("annulus", 2, 2.0, 1.0), ("two_bump", 3, 1.0, 2.5)]
    for name, d, c, rho in cases_rd:
        prof = ctx.profile("rd", name, d)
        table = ctx.table("rd", name, d)
        est = mc_ball_average_rd(prof, c, rho, d, cfg)
        det = float(table.averages_at(np.array([c]))[0][
            np.searchsorted(table.rho, rho)])
        dev = abs(det - est.mean)
        out.append(VerificationCheck(
            f"oracle/ball_rd/{name}/d{d}", measured=dev,
            threshold=cfg.confidence * est.stderr + 2e-3 * abs(est.mean),
            passed=dev <= cfg.confidence * est.stderr + 2e-3 * abs(est.mean),
            note=f"|deterministic - MC| at (c={c}, rho={rho}); 3 stderr + rho-grid slack",
            inputs_digest=_digest(prof.values)))
    cases_sp = [("cap", 2, np.pi / 2, np.pi / 2), ("cos2", 2, 1.0, 0.8),
                ("two_bump", 3, 2.0, 1.2)]
    for name, d, c, rho in cases_sp:
        prof = ctx.profile("sphere", name, d)
        est = mc_geodesic_average(prof, c, rho, d, cfg)
        det = geodesic_average(prof, GeodesicBall(c, rho, d))
        dev = abs(det - est.mean)
        out.append(VerificationCheck(
            f"oracle/cap_sphere/{name}/d{d}", measured=dev,
            threshold=cfg.confidence * est.stderr + 2e-3 * abs(est.mean) + 1e-4,
            passed=dev <= cfg.confidence * est.stderr + 2e-3 * abs(est.mean) + 1e-4,
            note=f"|section-length average - MC| at (c={c:.3f}, rho={rho:.3f})",
            inputs_digest=_digest(prof.values)))
    return out


# ---------------------------------------------------------------------------
# suite assembly

def _chain_jobs():
    jobs = []
    for name in corpus_names("rd"):
        for family in ("heat_rd", "poisson_rd"):
            jobs.append(("chain", ("rd", name, 2, family)))
    jobs.append(("chain", ("rd", "gaussian", 3, "heat_rd")))
    for name in corpus_names("sphere"):
        for family in _SPHERE_FAMILIES:
            jobs.append(("chain", ("sphere", name, 2, family)))
    jobs.append(("chain", ("sphere", "cap", 3, "poisson_sphere")))
    return jobs


def _gradient_jobs(dims=(2, 3, 4, 5)):
    jobs = []
    for d in dims:
        for name in corpus_names("rd"):
            for op in _RD_FAMILIES + ("hl_uncentered",):
                jobs.append(("gradient", ("rd", name, d, op)))
        for name in corpus_names("sphere"):
            for op in _SPHERE_FAMILIES + ("hl_uncentered",):
                jobs.append(("gradient", ("sphere", name, d, op)))
    return jobs


def _detachment_jobs():
    jobs = []
    for name in corpus_names("rd"):
        jobs.append(("detachment", ("rd", name, 2, "heat_rd")))
    jobs.append(("detachment", ("rd", "gaussian", 2, "poisson_rd")))
    for name in corpus_names("sphere"):
        jobs.append(("detachment", ("sphere", name, 2, "poisson_sphere")))
    return jobs


GROUPS = ("chain", "gradient", "detachment", "geometry", "derivative",
          "equator", "nearpole", "tail", "oracle", "controls")


def run_suite(only: str | None = None, baselines: dict | None = None,
              record: bool = False, seed: int = 0xC0FFEE,
              gradient_dims=(2, 3, 4, 5), max_workers: int = 4) -> VerificationReport:
    """Run the verification suite (optionally one group) and assemble the report.

    With record=True (or when no baselines exist) ratio checks record their
    measured values instead of comparing.
    """
    if baselines is None and not record:
        baselines = load_bundled_baselines() or None
        record = baselines is None
    ctx = SuiteContext(None if record else baselines, seed=seed)

    jobs: list = []
    if _want(only, "chain"):
        jobs += _chain_jobs()
    if _want(only, "gradient"):
        jobs += _gradient_jobs(gradient_dims)
    if _want(only, "detachment"):
        jobs += _detachment_jobs()
    if _want(only, "geometry"):
        jobs.append(("geometry_triangles", ()))
        jobs.append(("ball_area_ratio", ()))
    if _want(only, "derivative"):
        jobs.append(("derivative_ball_bound", ()))
        jobs.append(("boundary_identity", ()))
    if _want(only, "equator"):
        for name in corpus_names("sphere"):
            jobs.append(("equator", (name,)))
    if _want(only, "nearpole"):
        jobs.append(("nearpole", ()))
    if _want(only, "tail"):
        jobs.append(("tail", ("gaussian", 2)))
        jobs.append(("tail", ("annulus", 2)))
        jobs.append(("tail", ("gaussian", 3)))
    if _want(only, "oracle"):
        jobs.append(("oracle", ()))
    if _want(only, "controls"):
        jobs.append(("controls", ()))

    dispatch = {
        "chain": lambda args: check_chain(ctx, *args),
        "gradient": lambda args: check_gradient_bound(ctx, *args),
        "detachment": lambda args: check_detachment(ctx, *args),
        "geometry_triangles": lambda args: check_geometry_triangles(ctx),
        "ball_area_ratio": lambda args: check_ball_area_ratio(ctx),
        "derivative_ball_bound": lambda args: check_derivative_ball_bound(ctx),
        "boundary_identity": lambda args: check_boundary_identity(ctx),
        "equator": lambda args: check_equator_gap(ctx, *args),
        "nearpole": lambda args: check_near_pole_derivative(ctx),
        "tail": lambda args: check_weighted_tail(ctx, *args),
        "oracle": lambda args: check_oracle_agreement(ctx),
        "controls": lambda args: check_negative_controls(ctx),
    }

    report = VerificationReport(seed=seed)
    # operator results are memoized in ctx; prime them serially to avoid
    # duplicated work, then the independent checks can run concurrently
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = [pool.submit(dispatch[kind], args) for kind, args in jobs]
        for fut in futures:
            for check in fut.result():
                report.add(check)
    report.recorded_baselines = dict(ctx.recorded)
    report.checks = report.sorted_checks()
    return report


def _want(only: str | None, group: str) -> bool:
    return only is None or only == group
