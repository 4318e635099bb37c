"""p-norms of holomorphic functions over bounded domains, three ways:
closed form for monomials on catalog domains, tensor quadrature through the
radial profile, and chunked Monte Carlo with delta-method errors.

All paths report a PNormResult; the closed form is the only one allowed to
claim zero standard error.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from ._rng import TAG_MC_NORM, substream
from .errors import ConfigError, DivergentIntegralError, PoleProximityWarning, UnsupportedDomainError
from .functions import LaurentPolynomial
from .geometry import BoundedDomain, RadialProfile, log_radial_moment

_MC_CHUNK = 1 << 16
_NODE_BUDGET = 4_000_000


@dataclass(frozen=True)
class PNormResult:
    """A computed p-norm with method tag and error estimate.

    `value` is the norm itself; `integral` recovers value**p (the metric
    d = norm^p is the natural quantity for p < 1).
    """

    value: float
    p: float
    method: str
    std_error: float
    samples_or_nodes: int
    seed: int | None = None

    def __post_init__(self):
        if self.value < 0 or self.std_error < 0:
            raise ValueError("norm and standard error must be nonnegative")
        if self.method == "closed_form":
            if self.std_error != 0.0:
                raise ValueError("closed-form results carry zero standard error")
        elif self.std_error == 0.0:
            raise ValueError(f"method {self.method!r} must report a positive standard error")

    @property
    def integral(self) -> float:
        return self.value**self.p

    def to_json_obj(self) -> dict:
        return {
            "value": self.value,
            "p": self.p,
            "method": self.method,
            "std_error": self.std_error,
            "samples_or_nodes": self.samples_or_nodes,
            "seed": self.seed,
        }


def _error_floor(value: float) -> float:
    return float(np.finfo(float).eps) * max(abs(value), 1.0)


# -- closed form -------------------------------------------------------------


def monomial_norm_closed(D: BoundedDomain, alpha: Sequence[int], p: float) -> PNormResult:
    """Exact p-norm of z^alpha on a catalog domain via the radial reduction.

    Computed in log space throughout (log-Gamma / log-Beta), so large
    exponents cannot overflow.
    """
    if p <= 0:
        raise ConfigError("p must be positive")
    if D.radial_profile is None:
        raise UnsupportedDomainError(f"no closed form: domain {D.label!r} has no radial profile")
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (D.dimension,):
        raise ConfigError(f"exponent of length {alpha.shape} for dimension {D.dimension}")
    try:
        log_moment = log_radial_moment(D.radial_profile, p * alpha)
    except DivergentIntegralError as exc:
        raise DivergentIntegralError(f"|z^{tuple(int(a) for a in alpha)}|^{p} is not integrable on {D.label}: {exc}") from exc
    log_integral = D.dimension * math.log(2.0 * math.pi) + log_moment
    return PNormResult(
        value=math.exp(log_integral / p),
        p=float(p),
        method="closed_form",
        std_error=0.0,
        samples_or_nodes=0,
    )


def closed_norm(D: BoundedDomain, f: LaurentPolynomial, p: float) -> PNormResult:
    """Closed-form norm for a single-term Laurent polynomial c*z^alpha."""
    exp, coeff = f.single_term()
    base = monomial_norm_closed(D, exp, p)
    return PNormResult(
        value=abs(coeff) * base.value,
        p=base.p,
        method="closed_form",
        std_error=0.0,
        samples_or_nodes=0,
    )


# -- Monte Carlo --------------------------------------------------------------


def _variance_diverges(D: BoundedDomain, f, p: float) -> bool:
    """True when the estimator variance of |f|^p is provably infinite: the
    closed-form test is the integrability of |f|^{2p}."""
    if not isinstance(f, LaurentPolynomial) or not f.is_monomial or D.radial_profile is None:
        return False
    exp, _ = f.single_term()
    try:
        log_radial_moment(D.radial_profile, 2.0 * p * np.asarray(exp, dtype=float))
        return False
    except DivergentIntegralError:
        return True


def _mc_chunk(D: BoundedDomain, items, seed: int, chunk_idx: int, chunk_size: int):
    g = substream(seed, TAG_MC_NORM, chunk_idx)
    b = np.asarray(D.bounding_box)
    u = g.random((chunk_size, 2 * D.dimension)) * 2.0 - 1.0
    pts = (u[:, ::2] + 1j * u[:, 1::2]) * b
    mask = D.contains(pts)
    members = pts[mask]
    out = []
    for f, p in items:
        sub = members
        neg = getattr(f, "_negative_axes", ())
        if neg and sub.shape[0]:
            keep = np.ones(sub.shape[0], dtype=bool)
            for j in neg:
                keep &= sub[:, j] != 0
            sub = sub[keep]
        if sub.shape[0]:
            vals = np.abs(np.asarray(f.evaluate(sub))) ** p
            out.append((float(vals.sum()), float((vals * vals).sum())))
        else:
            out.append((0.0, 0.0))
    return out


def mc_norm_batch(
    D: BoundedDomain,
    items: Sequence[tuple],
    samples: int,
    rng,
    threads: int = 1,
    warn_on_divergence: bool = True,
) -> list[PNormResult]:
    """Monte Carlo p-norms for several (f, p) pairs sharing one rejection
    sample stream over D's bounding box.

    The estimand is Y = 1_D(z)|f(z)|^p over box proposals, so rejection
    variance is included in the reported error. Chunk substreams are keyed by
    (seed, chunk index); results are byte-identical for any thread count.
    """
    if samples < 1_000:
        raise ConfigError("Monte Carlo needs at least 10^3 samples")
    seed = int(rng) if not isinstance(rng, np.random.Generator) else None
    if seed is None:
        raise ConfigError("mc_norm requires an integer seed so substreams stay reproducible")
    if warn_on_divergence:
        for f, p in items:
            if _variance_diverges(D, f, p):
                warnings.warn(
                    f"|f|^{p} has divergent sample variance on {D.label}; the MC error "
                    "estimate is unreliable, prefer quadrature_norm",
                    PoleProximityWarning,
                    stacklevel=2,
                )
    n_chunks = math.ceil(samples / _MC_CHUNK)
    sizes = [_MC_CHUNK] * (n_chunks - 1) + [samples - _MC_CHUNK * (n_chunks - 1)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(lambda i: _mc_chunk(D, items, seed, i, sizes[i]), range(n_chunks)))
    else:
        partials = [_mc_chunk(D, items, seed, i, sizes[i]) for i in range(n_chunks)]

    vol = D.box_volume
    results = []
    for j, (f, p) in enumerate(items):
        sum_y = 0.0
        sum_y2 = 0.0
        for part in partials:  # fixed order: reductions independent of thread count
            sum_y += part[j][0]
            sum_y2 += part[j][1]
        n = float(samples)
        mean = sum_y / n
        var = max(sum_y2 / n - mean * mean, 0.0) * n / max(n - 1.0, 1.0)
        integral = vol * mean
        sigma_i = vol * math.sqrt(var / n)
        value = integral ** (1.0 / p)
        if integral > 0.0:
            sigma = sigma_i / (p * integral ** (1.0 - 1.0 / p))
        else:
            sigma = sigma_i
        results.append(
            PNormResult(
                value=value,
                p=float(p),
                method="monte_carlo",
                std_error=max(sigma, _error_floor(value)),
                samples_or_nodes=int(samples),
                seed=seed,
            )
        )
    return results


def mc_norm(D: BoundedDomain, f, p: float, samples: int, rng, threads: int = 1) -> PNormResult:
    """Monte Carlo p-norm of f over D by rejection from the bounding box."""
    return mc_norm_batch(D, [(f, p)], samples, rng, threads=threads)[0]


# -- quadrature ---------------------------------------------------------------


@lru_cache(maxsize=64)
def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0  # on (0, 1)


def _radial_grid(profile: RadialProfile, n_r: int):
    """Flattened tensor grid (radii (M, n), weights (M,)) covering the moduli
    region; weights carry the dr measure including variable fiber limits, not
    the polar factor prod r_j."""
    x, w = _gl_nodes(n_r)
    if profile.kind == "polydisc":
        grids = [(R * x, R * w) for R in profile.radii]
        radii = [g[0] for g in grids]
        mesh = np.meshgrid(*radii, indexing="ij")
        pts = np.stack([m.reshape(-1) for m in mesh], axis=1)
        wts = np.ones(1)
        for _, wj in grids:
            wts = np.multiply.outer(wts, wj).reshape(-1)
        return pts, wts
    if profile.kind == "ball":
        pts = np.zeros((1, 0))
        wts = np.ones(1)
        cap = np.full(1, profile.radius)
        for _ in range(profile.n):
            r = cap[:, None] * x[None, :]
            wgt = wts[:, None] * (cap[:, None] * w[None, :])
            new_cap = np.sqrt(np.maximum(cap[:, None] ** 2 - r**2, 0.0))
            pts = np.concatenate(
                [np.repeat(pts, n_r, axis=0), r.reshape(-1, 1)], axis=1
            )
            wts = wgt.reshape(-1)
            cap = new_cap.reshape(-1)
        return pts, wts
    if profile.kind in ("hartogs_graph", "graph_with_factor"):
        r1 = x
        w1 = w
        if profile.kind == "hartogs_graph":
            cap = r1**profile.k
        else:
            cap = r1**profile.k * np.sqrt(np.maximum(1.0 - r1**2, 0.0))
        r2 = cap[:, None] * x[None, :]
        wts = (w1 * cap)[:, None] * w[None, :]
        pts = np.stack([np.repeat(r1, n_r), r2.reshape(-1)], axis=1)
        return pts, wts.reshape(-1)
    if profile.kind == "product":
        pts = np.zeros((1, 0))
        wts = np.ones(1)
        for f in profile.factors:
            fp, fw = _radial_grid(f, n_r)
            pts = np.concatenate(
                [np.repeat(pts, fp.shape[0], axis=0), np.tile(fp, (pts.shape[0], 1))], axis=1
            )
            wts = np.multiply.outer(wts, fw).reshape(-1)
        return pts, wts
    raise UnsupportedDomainError(f"unknown profile kind {profile.kind!r}")


def _quad_integral_monomial(profile: RadialProfile, n_r: int, exp, coeff, p: float) -> float:
    radii, wts = _radial_grid(profile, n_r)
    t = p * np.asarray(exp, dtype=float)
    vals = np.prod(radii ** (t + 1.0), axis=1)  # |z^a|^p times the polar factor
    n = radii.shape[1]
    return float(abs(coeff) ** p * (2.0 * math.pi) ** n * np.dot(wts, vals))


def _quad_integral_general(profile: RadialProfile, n_r: int, m_theta: int, f, p: float) -> float:
    radii, wts = _radial_grid(profile, n_r)
    n = radii.shape[1]
    if radii.shape[0] * m_theta**n > _NODE_BUDGET:
        raise ConfigError(
            f"quadrature grid of {radii.shape[0] * m_theta ** n} nodes exceeds the budget; "
            "reduce nodes or use Monte Carlo"
        )
    theta = 2.0 * math.pi * np.arange(m_theta) / m_theta
    phase = np.exp(1j * theta)
    polar = np.prod(radii, axis=1) * wts
    acc = np.zeros(radii.shape[0])
    # tensor over angle combinations; n <= 2 in every packaged use
    for combo in np.ndindex(*([m_theta] * n)):
        z = radii * phase[list(combo)]
        acc += np.abs(np.asarray(f.evaluate(z))) ** p
    return float((2.0 * math.pi / m_theta) ** n * np.dot(polar, acc))


def quadrature_norm(
    D: BoundedDomain,
    f,
    p: float,
    radial_nodes: int = 48,
    angular_nodes: int | None = None,
) -> PNormResult:
    """Deterministic p-norm on a radial-profile domain: Gauss-Legendre in
    each radius with exact fiber limits, trapezoid in each angle (spectrally
    accurate for these periodic integrands). The std_error field carries a
    coarse-grid Richardson discrepancy, floored at machine precision.
    """
    if p <= 0:
        raise ConfigError("p must be positive")
    if D.radial_profile is None:
        raise UnsupportedDomainError(f"quadrature needs a radial profile; {D.label!r} has none")
    if radial_nodes < 4:
        raise ConfigError("radial_nodes must be at least 4")
    profile = D.radial_profile

    is_monomial = isinstance(f, LaurentPolynomial) and f.is_monomial
    if is_monomial:
        exp, coeff = f.single_term()
        # convergence guard; quadrature on an interior grid would otherwise
        # silently return a finite answer for a divergent integral
        log_radial_moment(profile, p * np.asarray(exp, dtype=float))
        fine = _quad_integral_monomial(profile, radial_nodes, exp, coeff, p)
        coarse = _quad_integral_monomial(profile, max(4, (2 * radial_nodes) // 3), exp, coeff, p)
        m_used = _radial_grid(profile, radial_nodes)[0].shape[0]
    else:
        if isinstance(f, LaurentPolynomial):
            maxdeg = max((sum(abs(e) for e in exp) for exp in f.terms), default=0)
        else:
            maxdeg = 10
        m_theta = angular_nodes if angular_nodes is not None else max(21, 2 * maxdeg + 1)
        if isinstance(f, LaurentPolynomial) and m_theta < 2 * maxdeg + 1:
            raise ConfigError(f"angular_nodes must be at least {2 * maxdeg + 1} for this integrand")
        fine = _quad_integral_general(profile, radial_nodes, m_theta, f, p)
        coarse = _quad_integral_general(profile, max(4, (2 * radial_nodes) // 3), m_theta, f, p)
        m_used = _radial_grid(profile, radial_nodes)[0].shape[0] * m_theta**D.dimension

    value = fine ** (1.0 / p)
    sigma_i = abs(fine - coarse)
    sigma = sigma_i / (p * fine ** (1.0 - 1.0 / p)) if fine > 0 else sigma_i
    return PNormResult(
        value=value,
        p=float(p),
        method="quadrature",
        std_error=max(sigma, _error_floor(value)),
        samples_or_nodes=int(m_used),
    )


def agree_within(a: PNormResult, b: PNormResult, n_sigma: float = 3.0, floor: float = 1e-12) -> bool:
    """Agreement test used throughout: |a - b| within n_sigma combined errors."""
    sigma = math.hypot(a.std_error, b.std_error)
    return abs(a.value - b.value) <= n_sigma * sigma + floor * max(a.value, b.value, 1.0)
