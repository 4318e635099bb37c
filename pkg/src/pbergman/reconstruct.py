"""Recovering the point map behind an A^p isometry.

An isometry in weighted composition form transports the ratio vectors
(phi_1/phi_0, ..., phi_N/phi_0) on the source to (psi_1/psi_0, ..., psi_N/psi_0)
on the target: J_N(F(z)) = I_N(z). Given only an operator oracle, the map F
is recovered pointwise by solving J_N(w) = I_N(z) in least squares, and the
source set where phi_0 vanishes is reported as excluded rather than mapped.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product as iter_product
from typing import Callable, Sequence

import numpy as np

from ._rng import TAG_STARTS, stable_key, substream
from .errors import (
    ConfigError,
    NoBasisSupportError,
    PoleEvaluationError,
    PoleProximityWarning,
)
from .functions import LaurentPolynomial
from .geometry import BoundedDomain, sample
from .isometry import CompositionIsometry, FunctionFamily

STATUS_MAPPED = "mapped"
STATUS_EXCLUDED_ZERO = "excluded-zero-weight"
STATUS_EXCLUDED_NO_PREIMAGE = "excluded-no-preimage"
STATUS_UNRESOLVED = "unresolved-budget"


# -- oracle -------------------------------------------------------------------


@dataclass(frozen=True)
class IsometryOracle:
    """Black-box access to T: only images of supplied functions are used.

    ``supports_arbitrary`` marks oracles (like real operators) that accept any
    Laurent input, enabling the linearity spot check; injected test oracles
    may be defined on a fixed family only.
    """

    source: BoundedDomain
    target: BoundedDomain
    p: float
    evaluator: Callable
    supports_arbitrary: bool = False
    label: str = ""

    @classmethod
    def from_operator(cls, T: CompositionIsometry) -> "IsometryOracle":
        return cls(
            source=T.source,
            target=T.target,
            p=T.p,
            evaluator=T.apply,
            supports_arbitrary=True,
            label=T.label,
        )

    def apply(self, phi):
        return self.evaluator(phi)

    def spot_check_linearity(self, family: FunctionFamily, points, coeff: complex = 0.37 + 0.21j) -> float:
        """Max abs deviation of T(phi_i + c phi_j) from T(phi_i) + c T(phi_j)
        at the given target points; needs arbitrary-input support."""
        if not self.supports_arbitrary:
            raise ConfigError("oracle does not accept functions outside its family")
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        worst = 0.0
        members = family.members
        for i in range(len(members) - 1):
            a, b = members[i], members[i + 1]
            combo = self.apply(a + coeff * b)(pts)
            split = np.asarray(self.apply(a)(pts)) + coeff * np.asarray(self.apply(b)(pts))
            worst = max(worst, float(np.max(np.abs(combo - split))))
        return worst


# -- ratio maps ---------------------------------------------------------------


def _batch(points, dimension: int) -> np.ndarray:
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1) if dimension > 1 else pts.reshape(-1, 1)
    if pts.shape[1] != dimension:
        raise ConfigError(f"points of width {pts.shape[1]} for dimension {dimension}")
    return pts


@dataclass(frozen=True)
class RatioMaps:
    """Evaluators for I_N (source) and J_N (target), defined off the zero
    sets of the leading members."""

    count: int
    source: BoundedDomain
    target: BoundedDomain
    family: FunctionFamily
    images: tuple
    source_zero_axes: tuple
    target_zero_axes: tuple

    def _ratios(self, members, pts: np.ndarray) -> np.ndarray:
        denom = np.asarray(members[0](pts))
        if np.any(np.abs(denom) == 0.0):
            raise PoleEvaluationError("ratio map evaluated on the leading zero set")
        cols = [np.asarray(f(pts)) / denom for f in members[1:]]
        return np.stack(cols, axis=1)

    def source_ratios(self, points) -> np.ndarray:
        return self._ratios(self.family.members, _batch(points, self.source.dimension))

    def target_ratios(self, points) -> np.ndarray:
        return self._ratios(self.images, _batch(points, self.target.dimension))

    def lead_source(self, points):
        return self.family.members[0](points)

    def lead_target(self, points):
        return self.images[0](points)


def build_ratio_maps(oracle: IsometryOracle | CompositionIsometry, family: FunctionFamily) -> RatioMaps:
    """Push the family through the oracle and wrap both ratio maps.

    The zero set of a Laurent-monomial lead is recorded symbolically: it is
    exactly the union of coordinate hyperplanes with positive exponent.
    """
    if isinstance(oracle, CompositionIsometry):
        oracle = IsometryOracle.from_operator(oracle)
    if family.ratio_count < 1:
        raise ConfigError("ratio maps need at least two family members")
    images = tuple(oracle.apply(f) for f in family.members)
    if isinstance(images[0], LaurentPolynomial) and images[0].is_zero:
        raise ConfigError("degenerate family: T(phi_0) is identically zero")

    def zero_axes(f):
        if isinstance(f, LaurentPolynomial) and f.is_monomial:
            return f.positive_axes()
        return ()

    return RatioMaps(
        count=family.ratio_count,
        source=oracle.source,
        target=oracle.target,
        family=family,
        images=images,
        source_zero_axes=zero_axes(family.members[0]),
        target_zero_axes=zero_axes(images[0]),
    )


def pullback_family(T: CompositionIsometry, extra_monomials: Sequence = ()) -> FunctionFamily:
    """The family whose target ratios are the plain coordinates: members are
    T^{-1}(1), T^{-1}(w_1), ..., T^{-1}(w_n), plus optional extra pullbacks."""
    Tinv = T.inverse()
    n = T.target.dimension
    members = [Tinv.apply(LaurentPolynomial.one(n))]
    members.extend(Tinv.apply(LaurentPolynomial.coordinate(n, j)) for j in range(n))
    for exp in extra_monomials:
        members.append(Tinv.apply(LaurentPolynomial.monomial(n, tuple(exp))))
    return FunctionFamily(dimension=T.source.dimension, members=tuple(members), label="pullback")


def degree_family(dimension: int, max_degree: int = 3, lead=None) -> FunctionFamily:
    """All monomials of total degree <= max_degree; an optional non-constant
    lead (for exclusion detection) is prepended, else the constant 1 leads."""
    members = [] if lead is None else [lead]
    ranges = [range(max_degree + 1)] * dimension
    for exp in iter_product(*ranges):  # yields the constant 1 first
        if sum(exp) <= max_degree:
            mono = LaurentPolynomial.monomial(dimension, exp)
            if lead is None or mono != lead:
                members.append(mono)
    return FunctionFamily(dimension=dimension, members=tuple(members), label=f"degree<={max_degree}")


# -- point solver -------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    starts: int = 8
    max_iters: int = 80
    seed: int = 0
    fd_step: float = 1e-5
    exclusion_rel: float = 1e-8
    threads: int = 1


@dataclass(frozen=True)
class PointSolve:
    z: tuple
    status: str
    w: tuple | None
    residual: float
    iterations: int

    def to_json_obj(self) -> dict:
        return {
            "z": [{"re": c.real, "im": c.imag} for c in self.z],
            "status": self.status,
            "w": None if self.w is None else [{"re": c.real, "im": c.imag} for c in self.w],
            "residual": self.residual if math.isfinite(self.residual) else None,
            "iterations": self.iterations,
        }


def _fd_jacobian(fn, w: np.ndarray, h: float) -> np.ndarray:
    """4th-order finite-difference Jacobian of a batch evaluator at one point."""
    n = w.size
    pts = np.tile(w, (4 * n, 1))
    for j in range(n):
        pts[4 * j + 0, j] += 2 * h
        pts[4 * j + 1, j] += h
        pts[4 * j + 2, j] -= h
        pts[4 * j + 3, j] -= 2 * h
    vals = fn(pts)
    jac = np.empty((vals.shape[1], n), dtype=complex)
    for j in range(n):
        jac[:, j] = (
            -vals[4 * j + 0] + 8.0 * vals[4 * j + 1] - 8.0 * vals[4 * j + 2] + vals[4 * j + 3]
        ) / (12.0 * h)
    return jac


def _gn_from_start(maps: RatioMaps, target_vec: np.ndarray, w0: np.ndarray, cfg: SolverConfig):
    """Gauss-Newton descent of ||J_N(w) - I_N(z)||; iterates stay members of
    the target domain. Returns (w, residual, iterations, stalled)."""

    def residual(w):
        return np.asarray(maps.target_ratios(w.reshape(1, -1))[0]) - target_vec

    w = w0.copy()
    try:
        r = residual(w)
    except PoleEvaluationError:
        return w, math.inf, 0, True
    res = float(np.linalg.norm(r))
    stalled = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        if res < cfg.tol:
            break
        try:
            jac = _fd_jacobian(lambda pts: maps.target_ratios(pts), w, cfg.fd_step)
        except PoleEvaluationError:
            stalled = True
            break
        dw, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        step = 1.0
        improved = False
        for _ in range(30):
            w_new = w + step * dw
            if maps.target.contains(w_new.reshape(1, -1))[0]:
                try:
                    r_new = residual(w_new)
                    res_new = float(np.linalg.norm(r_new))
                except PoleEvaluationError:
                    res_new = math.inf
                if res_new < res:
                    w, r, res = w_new, r_new, res_new
                    improved = True
                    break
            step *= 0.5
        if not improved:
            stalled = True
            break
    return w, res, it, stalled


def _solve_against(maps: RatioMaps, z: np.ndarray, starts: np.ndarray, cfg: SolverConfig, lead_floor: float) -> PointSolve:
    lead_val = abs(complex(np.asarray(maps.lead_source(z.reshape(1, -1)))[0]))
    if lead_val <= lead_floor:
        return PointSolve(z=tuple(z), status=STATUS_EXCLUDED_ZERO, w=None, residual=math.inf, iterations=0)
    target_vec = np.asarray(maps.source_ratios(z.reshape(1, -1))[0])
    best_w = None
    best_res = math.inf
    total_it = 0
    all_stalled = True
    for w0 in starts:
        w, res, it, stalled = _gn_from_start(maps, target_vec, np.asarray(w0, dtype=complex), cfg)
        total_it += it
        all_stalled &= stalled
        if res < best_res:
            best_res, best_w = res, w
        if best_res < cfg.tol:
            break
    if best_res < cfg.tol:
        return PointSolve(z=tuple(z), status=STATUS_MAPPED, w=tuple(best_w), residual=best_res, iterations=total_it)
    status = STATUS_EXCLUDED_NO_PREIMAGE if all_stalled else STATUS_UNRESOLVED
    return PointSolve(z=tuple(z), status=status, w=None, residual=best_res, iterations=total_it)


def _shared_starts(maps: RatioMaps, cfg: SolverConfig) -> np.ndarray:
    gen = substream(cfg.seed, TAG_STARTS, stable_key([maps.target.label, maps.count]))
    return sample(maps.target, gen, cfg.starts).points


def solve_point(maps: RatioMaps, z, cfg: SolverConfig | None = None, lead_floor: float = 0.0) -> PointSolve:
    """Solve J_N(w) = I_N(z) for one source point by multi-start Gauss-Newton.

    ``lead_floor`` is the absolute |phi_0| exclusion threshold (callers with a
    grid derive it from the grid median); below it the point is excluded
    without solving.
    """
    cfg = cfg or SolverConfig()
    z = np.asarray(z, dtype=complex).reshape(-1)
    if z.size != maps.source.dimension:
        raise ConfigError("point dimension mismatch")
    return _solve_against(maps, z, _shared_starts(maps, cfg), cfg, lead_floor)


# -- grid reconstruction ------------------------------------------------------


@dataclass(frozen=True)
class ReconstructionResult:
    records: tuple
    threshold: float
    injectivity_violations: int
    diagnostics: dict = field(default_factory=dict)

    @property
    def mapped(self) -> tuple:
        return tuple(r for r in self.records if r.status == STATUS_MAPPED)

    @property
    def excluded(self) -> tuple:
        return tuple(r for r in self.records if r.status.startswith("excluded"))

    def status_counts(self) -> dict:
        out: dict[str, int] = {}
        for r in self.records:
            out[r.status] = out.get(r.status, 0) + 1
        return out

    def to_json_obj(self) -> dict:
        return {
            "records": [r.to_json_obj() for r in self.records],
            "threshold": self.threshold,
            "injectivity_violations": self.injectivity_violations,
            "status_counts": self.status_counts(),
            "diagnostics": dict(self.diagnostics),
        }


def grid_points(D: BoundedDomain, n_per_dim: int, margin: float = 0.1) -> np.ndarray:
    """Deterministic member grid.

    Dimension 1: an n x n re/im tensor clipped to the domain. Higher
    dimensions: n^2 uniform member points from a fixed stream; coordinate
    cross-grids concentrate on the thin slices of Reinhardt-type domains (and
    on zero sets of ratio leads), so they make poor reconstruction grids.
    """
    if n_per_dim < 1:
        raise ConfigError("grid needs at least one node per dimension")
    if D.dimension == 1:
        b = D.bounding_box[0]
        ticks = np.linspace(-b * (1.0 - margin), b * (1.0 - margin), n_per_dim)
        pts = (ticks[:, None] + 1j * ticks[None, :]).reshape(-1, 1)
        pts = pts[D.contains(pts)]
    else:
        gen = substream(0, TAG_STARTS, stable_key(["grid", D.label, int(n_per_dim)]))
        pts = sample(D, gen, n_per_dim * n_per_dim).points
    if pts.shape[0] == 0:
        raise ConfigError("grid produced no interior points; increase n_per_dim")
    return pts


def reconstruct_map(
    oracle: IsometryOracle | CompositionIsometry,
    family: FunctionFamily,
    grid,
    cfg: SolverConfig | None = None,
) -> ReconstructionResult:
    """Solve the ratio equations over a grid of source points.

    The exclusion threshold is relative: cfg.exclusion_rel times the grid
    median of |phi_0|. Mapped images are cross-checked for injectivity.
    """
    cfg = cfg or SolverConfig()
    maps = build_ratio_maps(oracle, family)
    pts = _batch(grid, maps.source.dimension)
    lead_abs = np.abs(np.asarray(maps.family.members[0](pts)))
    median = float(np.median(lead_abs))
    if median == 0.0:
        raise ConfigError("|phi_0| vanishes at more than half the grid; family is unusable")
    floor = cfg.exclusion_rel * median
    starts = _shared_starts(maps, cfg)

    def solve_one(i: int) -> PointSolve:
        return _solve_against(maps, pts[i], starts, cfg, floor)

    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            records = list(pool.map(solve_one, range(pts.shape[0])))
    else:
        records = [solve_one(i) for i in range(pts.shape[0])]

    mapped = [(i, r) for i, r in enumerate(records) if r.status == STATUS_MAPPED]
    violations = 0
    merge_tol = max(10.0 * cfg.tol, 1e-12)
    for a in range(len(mapped)):
        for b in range(a + 1, len(mapped)):
            wa = np.asarray(mapped[a][1].w)
            wb = np.asarray(mapped[b][1].w)
            if float(np.linalg.norm(wa - wb)) < merge_tol:
                violations += 1
    return ReconstructionResult(
        records=tuple(records),
        threshold=floor,
        injectivity_violations=violations,
        diagnostics={
            "grid_size": int(pts.shape[0]),
            "starts": int(cfg.starts),
            "median_lead": median,
        },
    )


# -- identity checks ----------------------------------------------------------


def verify_modulus_identity(
    oracle: IsometryOracle | CompositionIsometry,
    F,
    points,
    tests: Sequence[LaurentPolynomial],
    p: float | None = None,
    jacobian=None,
    fd_step: float = 1e-3,
) -> float:
    """Max relative error of |T(phi)(F(z))| |J_F(z)|^{2/p} = |phi(z)| over
    tests and points.

    ``F`` is any point map z -> w; its Jacobian determinant comes from
    ``jacobian`` if supplied, from F.jacobian_det when available, else from a
    4th-order finite-difference stencil on F itself.
    """
    if isinstance(oracle, CompositionIsometry):
        oracle = IsometryOracle.from_operator(oracle)
    p = oracle.p if p is None else float(p)
    pts = _batch(points, oracle.source.dimension)
    if jacobian is None and hasattr(F, "jacobian_det"):
        jacobian = F.jacobian_det
    images = [oracle.apply(phi) for phi in tests]
    worst = 0.0
    for i in range(pts.shape[0]):
        z = pts[i]
        w = np.asarray(F(z.reshape(1, -1))).reshape(-1)
        if jacobian is not None:
            jf = complex(np.asarray(jacobian(z.reshape(1, -1))).reshape(-1)[0])
        else:
            fn = lambda batch: np.asarray(F(batch))
            jf = complex(np.linalg.det(_fd_jacobian(fn, z.copy(), fd_step)))
            if abs(jf) < 1e-12:
                warnings.warn(
                    "finite-difference Jacobian nearly singular; the stencil may "
                    "straddle an excluded set",
                    PoleProximityWarning,
                    stacklevel=2,
                )
        factor = abs(jf) ** (2.0 / p)
        for phi, image in zip(tests, images):
            rhs = abs(complex(np.asarray(phi(z.reshape(1, -1)))[0]))
            if rhs == 0.0:
                continue
            lhs = abs(complex(np.asarray(image(w.reshape(1, -1)))[0])) * factor
            worst = max(worst, abs(lhs - rhs) / rhs)
    return worst


def verify_proportionality(
    oracle: IsometryOracle | CompositionIsometry,
    z,
    w,
    tests: Sequence[LaurentPolynomial],
    vanish_rel: float = 1e-8,
) -> tuple[complex, float]:
    """Ratios T(phi)(w)/phi(z) across tests: their mean and the max pairwise
    spread relative to the mean modulus. A small spread certifies (z, w) as a
    graph pair of the hidden map."""
    if isinstance(oracle, CompositionIsometry):
        oracle = IsometryOracle.from_operator(oracle)
    z = np.asarray(z, dtype=complex).reshape(1, -1)
    w = np.asarray(w, dtype=complex).reshape(1, -1)
    vals_z = np.array([complex(np.asarray(phi(z))[0]) for phi in tests])
    scale = float(np.max(np.abs(vals_z))) if len(tests) else 0.0
    keep = np.abs(vals_z) > vanish_rel * scale
    if scale == 0.0 or not np.any(keep):
        raise NoBasisSupportError("every test vanishes at z; no ratio certificate exists")
    ratios = []
    for phi, vz, ok in zip(tests, vals_z, keep):
        if not ok:
            continue
        tv = complex(np.asarray(oracle.apply(phi)(w))[0])
        ratios.append(tv / vz)
    ratios = np.asarray(ratios)
    lam = complex(np.mean(ratios))
    spread = 0.0
    for i in range(len(ratios)):
        for j in range(i + 1, len(ratios)):
            spread = max(spread, abs(ratios[i] - ratios[j]))
    return lam, spread / max(abs(lam), 1e-300)
