"""Weighted composition operators T(phi)(w) = lambda * phi(G(w)) * g(w)
between A^p spaces, with |g|^p = |J_G|^2 so that T preserves p-norms by the
change-of-variables formula, plus the statistical equimeasurability checks
that characterize such operators.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from ._rng import TAG_BOXES, TAG_PUSHFORWARD, TAG_WEIGHTED, stable_key, substream
from .errors import (
    BranchError,
    ConfigError,
    DegenerateDomainError,
    DivergentIntegralError,
    NonInvertibleMapError,
    PoleProximityWarning,
)
from .functions import (
    AnalyticFunction,
    HoloMapExpr,
    LaurentPolynomial,
    LinearMap,
    MobiusFactors,
    MonomialMap,
    weight_branch,
)
from .geometry import BoundedDomain, sample, sample_radial_weighted
from .integrate import _variance_diverges, closed_norm, mc_norm_batch

_CHUNK = 1 << 16


@dataclass(frozen=True)
class FunctionFamily:
    """Ordered family phi_0, phi_1, ..., phi_N on a common domain; phi_0 is
    the ratio denominator everywhere it appears."""

    dimension: int
    members: tuple
    label: str = ""

    def __post_init__(self):
        if not self.members:
            raise ConfigError("family needs at least one member")
        for f in self.members:
            if getattr(f, "dimension", None) != self.dimension:
                raise ConfigError("family members must share the family dimension")
        lead = self.members[0]
        if isinstance(lead, LaurentPolynomial) and lead.is_zero:
            raise ConfigError("the leading member must not be identically zero")

    @property
    def lead(self):
        return self.members[0]

    @property
    def ratio_count(self) -> int:
        return len(self.members) - 1

    def to_json_obj(self) -> dict:
        return {
            "dimension": self.dimension,
            "label": self.label,
            "members": [_function_descriptor(f) for f in self.members],
        }

    @classmethod
    def coordinates(cls, dimension: int, label: str = "") -> "FunctionFamily":
        """The family {1, z_1, ..., z_n} whose ratio map is the identity."""
        members = [LaurentPolynomial.one(dimension)]
        members.extend(LaurentPolynomial.coordinate(dimension, j) for j in range(dimension))
        return cls(dimension=dimension, members=tuple(members), label=label or "coordinates")


def _function_descriptor(f):
    if isinstance(f, LaurentPolynomial):
        return {"laurent": f.to_json_obj()}
    return {"label": getattr(f, "label", "") or repr(f)}


# -- the operator -------------------------------------------------------------


class CompositionIsometry:
    """A^p(source) -> A^p(target), phi |-> lambda * (phi o G) * g, where G maps
    the target onto the source off null sets and |g|^p = |J_G|^2."""

    __slots__ = ("source", "target", "mapping", "weight", "p", "lam", "label")

    def __init__(
        self,
        source: BoundedDomain,
        target: BoundedDomain,
        mapping,
        weight,
        p: float,
        lam: complex = 1.0,
        label: str = "",
        validate: bool = True,
    ):
        if float(p) <= 0:
            raise ConfigError("p must be positive")
        if abs(abs(complex(lam)) - 1.0) > 1e-12:
            raise ConfigError("lambda must have modulus 1")
        if mapping.dimension != target.dimension:
            raise ConfigError("mapping dimension must match the target domain")
        if source.dimension != target.dimension:
            raise ConfigError("source and target must share one ambient dimension")
        self.source = source
        self.target = target
        self.mapping = mapping
        self.weight = weight
        self.p = float(p)
        self.lam = complex(lam)
        self.label = label or "composition-isometry"
        if validate:
            self._validate_weight()

    # -- validation ---------------------------------------------------------

    def _monomial_mapping(self) -> MonomialMap | None:
        if isinstance(self.mapping, MonomialMap):
            return self.mapping
        if isinstance(self.mapping, HoloMapExpr):
            try:
                return self.mapping.as_monomial_map()
            except BranchError:
                return None
        return None

    def _validate_weight(self) -> None:
        m = self._monomial_mapping()
        if m is not None and isinstance(self.weight, LaurentPolynomial) and self.weight.is_monomial:
            branch = weight_branch(m, self.p)  # BranchError propagates: no valid monomial weight
            be, bc = branch.single_term()
            bc = abs(bc)
            we, wc = self.weight.single_term()
            if be != we or abs(abs(wc) - bc) > 1e-12 * max(bc, 1.0):
                raise ConfigError(
                    f"weight {self.weight!r} violates |g|^p = |J_G|^2; expected modulus {branch!r}"
                )
            return
        self._numeric_weight_probe()

    def _numeric_weight_probe(self, count: int = 32, tol: float = 1e-12) -> None:
        gen = substream(0, TAG_WEIGHTED, stable_key(["weight-probe", self.target.label]))
        pts = sample(self.target, gen, count).points
        gp = np.abs(np.asarray(self.weight(pts))) ** self.p
        j2 = np.abs(np.asarray(self.mapping.jacobian_det(pts))) ** 2
        rel = float(np.max(np.abs(gp - j2) / np.maximum(j2, 1e-300)))
        if rel > tol:
            raise ConfigError(f"weight violates |g|^p = |J_G|^2 (relative error {rel:.3e})")

    # -- action -------------------------------------------------------------

    def apply(self, phi):
        """Exact Laurent image when the data is monomial, else a pointwise
        evaluator."""
        m = self._monomial_mapping()
        if (
            isinstance(phi, LaurentPolynomial)
            and m is not None
            and isinstance(self.weight, LaurentPolynomial)
        ):
            return (phi.compose_monomial(m) * self.weight) * self.lam
        lam, G, g = self.lam, self.mapping, self.weight

        def fn(pts):
            return lam * np.asarray(phi(G(pts))) * np.asarray(g(pts))

        return AnalyticFunction(self.target.dimension, fn, label=f"T[{phi!r}]")

    __call__ = apply

    def inverse(self) -> "CompositionIsometry":
        """The inverse operator, again in weighted composition form.

        With F = G^{-1} and g' = a branch of J_F^{2/p}, the composition
        g(F(z)) * g'(z) is a unimodular constant c (its modulus is
        |J_G(F)J_F|^{2/p} = 1), so lambda' = 1/(lambda*c) makes
        inverse(T)(T(phi)) = phi exactly.
        """
        m = self._monomial_mapping()
        if m is not None and isinstance(self.weight, LaurentPolynomial) and self.weight.is_monomial:
            F = m.inverse()
            winv = weight_branch(F, self.p)
            corr = self.weight.compose_monomial(F) * winv
            ce, cc = corr.single_term()
            if any(ce):
                raise NonInvertibleMapError("weight correction is not constant; weight is invalid")
            return CompositionIsometry(
                source=self.target,
                target=self.source,
                mapping=F,
                weight=winv,
                p=self.p,
                lam=1.0 / (self.lam * cc),
                label=f"inverse({self.label})",
                validate=False,
            )
        if isinstance(self.mapping, LinearMap) and isinstance(self.weight, LaurentPolynomial):
            we, wc = self.weight.single_term()
            if any(we):
                raise NonInvertibleMapError("linear maps need a constant weight to invert")
            F = self.mapping.inverse()
            det = complex(F.jacobian_det(np.zeros((1, self.source.dimension), dtype=complex))[0])
            gc = det ** (2.0 / self.p)  # principal power; constant, so single-valued
            c = wc * gc
            if abs(abs(c) - 1.0) > 1e-10:
                raise NonInvertibleMapError("weight correction is not a unimodular constant")
            return CompositionIsometry(
                source=self.target,
                target=self.source,
                mapping=F,
                weight=LaurentPolynomial.monomial(self.source.dimension, (0,) * self.source.dimension, gc),
                p=self.p,
                lam=1.0 / (self.lam * c),
                label=f"inverse({self.label})",
                validate=False,
            )
        if isinstance(self.mapping, MobiusFactors):
            F = self.mapping.inverse()
            winv = mobius_weight(F.params, self.p)
            probes = np.array(
                [
                    [0.11 + 0.07j] * self.source.dimension,
                    [-0.19 + 0.13j] * self.source.dimension,
                    [0.05 - 0.23j] * self.source.dimension,
                ]
            )
            c_vals = np.asarray(self.weight(F(probes))) * np.asarray(winv(probes))
            c = complex(c_vals[0])
            if np.max(np.abs(c_vals - c)) > 1e-10 or abs(abs(c) - 1.0) > 1e-10:
                raise NonInvertibleMapError("weight correction is not a unimodular constant")
            return CompositionIsometry(
                source=self.target,
                target=self.source,
                mapping=F,
                weight=winv,
                p=self.p,
                lam=1.0 / (self.lam * c),
                label=f"inverse({self.label})",
                validate=False,
            )
        raise NonInvertibleMapError(
            "inverse is available for monomial chains and Moebius factor maps only"
        )


def identity_operator(D: BoundedDomain, p: float, lam: complex = 1.0) -> CompositionIsometry:
    return CompositionIsometry(
        source=D,
        target=D,
        mapping=MonomialMap.identity(D.dimension),
        weight=LaurentPolynomial.one(D.dimension),
        p=p,
        lam=lam,
        label="identity",
    )


def mobius_weight(params: Sequence, p: float) -> AnalyticFunction:
    """Holomorphic branch of J^{2/p} for coordinate-wise disc automorphisms.

    Each factor contributes e^{2 pi i/p} (1-|a|^2)^{2/p} (1 - conj(a) w)^{-4/p},
    using the principal power of 1 - conj(a) w, which has positive real part on
    the disc, so the branch is single-valued there.
    """
    params = tuple(None if a is None else complex(a) for a in params)
    p = float(p)

    def fn(pts):
        out = np.ones(pts.shape[0], dtype=complex)
        for j, a in enumerate(params):
            if a is None:
                continue
            out = out * (
                np.exp(2j * math.pi / p)
                * (1.0 - abs(a) ** 2) ** (2.0 / p)
                * (1.0 - np.conj(a) * pts[:, j]) ** (-4.0 / p)
            )
        return out

    return AnalyticFunction(len(params), fn, label=f"mobius-weight{params}")


def mobius_operator(params, p: float, lam: complex = 1.0, radius: float = 1.0) -> CompositionIsometry:
    """Self-map operator of the disc (or polydisc) induced by coordinate-wise
    automorphisms w_j -> (a_j - w_j)/(1 - conj(a_j) w_j)."""
    from .geometry import make_catalog_domain

    if isinstance(params, (int, float, complex)):
        params = (params,)
    params = tuple(params)
    for a in params:
        if a is not None and abs(complex(a)) >= 1.0:
            raise ConfigError("Moebius parameters must lie inside the unit disc")
    n = len(params)
    D = make_catalog_domain(("disc", radius) if n == 1 else ("polydisc", n, (radius,) * n))
    if radius != 1.0 and any(a not in (None, 0) for a in params):
        raise ConfigError("Moebius factors are automorphisms of the unit disc only")
    return CompositionIsometry(
        source=D,
        target=D,
        mapping=MobiusFactors(params),
        weight=mobius_weight(params, p),
        p=p,
        lam=lam,
        label=f"mobius{params}",
    )


# -- norm verification --------------------------------------------------------


def verify_isometry(
    T: CompositionIsometry,
    tests: Sequence,
    method: str = "closed",
    samples: int = 1_000_000,
    seed: int = 0,
    threads: int = 1,
) -> float:
    """Max over tests of | ||T phi|| - ||phi|| | / ||phi|| with the chosen
    norm backend. Divergent test norms raise rather than being skipped."""
    if not tests:
        raise ConfigError("need at least one test function")
    if method == "closed":
        worst = 0.0
        for phi in tests:
            if not isinstance(phi, LaurentPolynomial) or not phi.is_monomial:
                raise ConfigError("closed method requires single-term Laurent tests")
            image = T.apply(phi)
            if not isinstance(image, LaurentPolynomial) or not image.is_monomial:
                raise ConfigError("closed method requires a monomial operator image")
            n_src = closed_norm(T.source, phi, T.p).value
            n_tgt = closed_norm(T.target, image, T.p).value
            worst = max(worst, abs(n_tgt - n_src) / n_src)
        return worst
    if method == "mc":
        images = [T.apply(phi) for phi in tests]
        src = mc_norm_batch(T.source, [(f, T.p) for f in tests], samples, seed, threads=threads)
        tgt = mc_norm_batch(T.target, [(f, T.p) for f in images], samples, seed, threads=threads)
        return max(abs(b.value - a.value) / a.value for a, b in zip(src, tgt))
    raise ConfigError(f"unknown norm method {method!r}; expected closed or mc")


# -- pushforward regions ------------------------------------------------------


@dataclass(frozen=True)
class Box:
    """Axis-aligned box in C^N: lo_j <= Re v_j <= hi_j and likewise Im."""

    lo: tuple
    hi: tuple
    label: str = ""

    def __post_init__(self):
        if len(self.lo) != len(self.hi) or not self.lo:
            raise ConfigError("box corners must be nonempty tuples of equal length")
        for a, b in zip(self.lo, self.hi):
            a, b = complex(a), complex(b)
            if a.real > b.real or a.imag > b.imag:
                raise ConfigError("box corners must satisfy lo <= hi componentwise")

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def __call__(self, vals: np.ndarray) -> np.ndarray:
        ok = np.ones(vals.shape[0], dtype=bool)
        for j, (a, b) in enumerate(zip(self.lo, self.hi)):
            a, b = complex(a), complex(b)
            re, im = vals[:, j].real, vals[:, j].imag
            ok &= (re >= a.real) & (re <= b.real) & (im >= a.imag) & (im <= b.imag)
        return ok.astype(float)

    def to_json_obj(self) -> dict:
        return {
            "label": self.label,
            "lo": [{"re": complex(c).real, "im": complex(c).imag} for c in self.lo],
            "hi": [{"re": complex(c).real, "im": complex(c).imag} for c in self.hi],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "Box":
        return cls(
            lo=tuple(complex(c["re"], c["im"]) for c in obj["lo"]),
            hi=tuple(complex(c["re"], c["im"]) for c in obj["hi"]),
            label=obj.get("label", ""),
        )


@dataclass(frozen=True)
class GaussianBump:
    """Smooth test u(v) = exp(-sum |v_j - center|^2 / (2 width^2))."""

    center: complex = 0.2 + 0.1j
    width: float = 0.4
    label: str = "gaussian-bump"

    def __call__(self, vals: np.ndarray) -> np.ndarray:
        d2 = np.sum(np.abs(vals - self.center) ** 2, axis=1)
        return np.exp(-d2 / (2.0 * self.width**2))


@dataclass(frozen=True)
class SigmoidProduct:
    """Smooth test u(v) = prod_j s(Re v_j/scale) s(Im v_j/scale), s logistic."""

    scale: float = 0.3
    label: str = "sigmoid-product"

    def __call__(self, vals: np.ndarray) -> np.ndarray:
        out = np.ones(vals.shape[0])
        for j in range(vals.shape[1]):
            out = out * expit(vals[:, j].real / self.scale) * expit(vals[:, j].imag / self.scale)
        return out


# -- pushforward mass ---------------------------------------------------------


def _side_key(D: BoundedDomain, lead, numerators) -> int:
    desc = {
        "domain": D.label,
        "lead": _function_descriptor(lead),
        "ratios": [_function_descriptor(f) for f in numerators],
    }
    return stable_key(desc)


def _ratio_matrix(lead, numerators, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Ratio vectors (f_j/lead)(pts) and the mask of usable rows (lead != 0)."""
    denom = np.asarray(lead(pts))
    good = np.abs(denom) > 0.0
    safe = np.where(good, denom, 1.0)
    if numerators:
        cols = [np.asarray(f(pts)) / safe for f in numerators]
        vals = np.stack(cols, axis=1)
    else:
        vals = np.zeros((pts.shape[0], 0), dtype=complex)
    return vals, good


def _pushforward_stats(
    D: BoundedDomain,
    lead,
    numerators: Sequence,
    regions: Sequence,
    p: float,
    samples: int,
    seed: int,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-region estimates of integral_D u(ratios) |lead|^p dA and standard
    errors, from one shared sample stream.

    When the lead is a Laurent monomial on a catalog domain the points are
    drawn exactly from the normalized density |lead|^p/C, leaving the bounded
    estimand C*u; rejection sampling with explicit |lead|^p weights (whose
    variance may diverge) is the fallback.
    """
    seed = int(seed)
    if samples < 1_000:
        raise ConfigError("pushforward needs at least 10^3 samples")
    key = _side_key(D, lead, numerators)
    weighted = False
    scale = None
    if isinstance(lead, LaurentPolynomial) and lead.is_monomial and D.radial_profile is not None:
        try:
            scale = closed_norm(D, lead, p).integral
            weighted = True
        except DivergentIntegralError:
            weighted = False
    if not weighted and _variance_diverges(D, lead, p):
        warnings.warn(
            f"|lead|^{p} has divergent sample variance on {D.label}; pushforward "
            "error estimates are unreliable",
            PoleProximityWarning,
            stacklevel=2,
        )

    n_chunks = math.ceil(samples / _CHUNK)
    sizes = [_CHUNK] * (n_chunks - 1) + [samples - _CHUNK * (n_chunks - 1)]

    if weighted:
        exp, _ = lead.single_term()
        t = tuple(p * e for e in exp)

        def chunk_stats(i: int):
            g = substream(seed, TAG_PUSHFORWARD, key, i)
            pts = sample_radial_weighted(D, t, g, sizes[i])
            vals, good = _ratio_matrix(lead, numerators, pts)
            out = []
            for u in regions:
                y = u(vals) * good
                out.append((float(y.sum()), float((y * y).sum())))
            return out

    else:
        b = np.asarray(D.bounding_box)

        def chunk_stats(i: int):
            g = substream(seed, TAG_PUSHFORWARD, key, i)
            u01 = g.random((sizes[i], 2 * D.dimension)) * 2.0 - 1.0
            pts = (u01[:, ::2] + 1j * u01[:, 1::2]) * b
            mask = D.contains(pts)
            members = pts[mask]
            out = [(0.0, 0.0)] * len(regions)
            if members.shape[0]:
                vals, good = _ratio_matrix(lead, numerators, members)
                w = np.abs(np.asarray(lead(members))) ** p * good
                out = []
                for u in regions:
                    y = u(vals) * w
                    out.append((float(y.sum()), float((y * y).sum())))
            return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partials = list(pool.map(chunk_stats, range(n_chunks)))
    else:
        partials = [chunk_stats(i) for i in range(n_chunks)]

    factor = scale if weighted else D.box_volume
    masses = np.empty(len(regions))
    sigmas = np.empty(len(regions))
    n = float(samples)
    for r in range(len(regions)):
        s1 = sum(part[r][0] for part in partials)
        s2 = sum(part[r][1] for part in partials)
        mean = s1 / n
        var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1.0, 1.0)
        masses[r] = factor * mean
        sigmas[r] = factor * math.sqrt(var / n)
    return masses, sigmas


def pushforward_mass(
    D: BoundedDomain,
    phi0,
    family: FunctionFamily,
    region,
    p: float,
    samples: int = 100_000,
    seed: int = 0,
    threads: int = 1,
) -> tuple[float, float]:
    """MC estimate (mass, sigma) of integral_D u(f_1/phi0, ..., f_N/phi0)
    |phi0|^p dA, where the f_j are the family members after phi0 (or all of
    them when phi0 is not the leading member)."""
    members = list(family.members)
    if members and isinstance(members[0], LaurentPolynomial) and isinstance(phi0, LaurentPolynomial):
        if members[0] == phi0:
            members = members[1:]
    masses, sigmas = _pushforward_stats(D, phi0, members, [region], p, samples, seed, threads)
    return float(masses[0]), float(sigmas[0])


# -- equimeasurability --------------------------------------------------------


@dataclass(frozen=True)
class RegionComparison:
    label: str
    mass_source: float
    sigma_source: float
    mass_target: float
    sigma_target: float
    difference: float
    sigma_combined: float
    passed: bool
    inconclusive: bool

    def to_json_obj(self) -> dict:
        return {
            "label": self.label,
            "mass_source": self.mass_source,
            "sigma_source": self.sigma_source,
            "mass_target": self.mass_target,
            "sigma_target": self.sigma_target,
            "difference": self.difference,
            "sigma_combined": self.sigma_combined,
            "passed": self.passed,
            "inconclusive": self.inconclusive,
        }


@dataclass(frozen=True)
class EquimeasureReport:
    regions: tuple
    verdict: str
    samples: int
    seed: int
    inconclusive: bool

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    @property
    def max_sigma_ratio(self) -> float:
        out = 0.0
        for r in self.regions:
            if r.sigma_combined > 0:
                out = max(out, r.difference / r.sigma_combined)
            elif r.difference > 0:
                out = math.inf
        return out

    def to_json_obj(self) -> dict:
        return {
            "regions": [r.to_json_obj() for r in self.regions],
            "verdict": self.verdict,
            "samples": self.samples,
            "seed": self.seed,
            "inconclusive": self.inconclusive,
        }


def random_boxes(
    T: CompositionIsometry,
    family: FunctionFamily,
    seed: int = 0,
    count: int = 20,
    probe_samples: int = 4096,
) -> list[Box]:
    """Random axis-aligned boxes spanning the bulk of the source-side ratio
    distribution (5th to 95th percentile per axis), independent of the
    operator weight so mutated operators face identical regions."""
    lead = family.lead
    numerators = family.members[1:]
    if not numerators:
        raise ConfigError("box generation needs at least one ratio coordinate")
    gen = substream(int(seed), TAG_BOXES, 0)
    if isinstance(lead, LaurentPolynomial) and lead.is_monomial and T.source.radial_profile is not None:
        exp, _ = lead.single_term()
        pts = sample_radial_weighted(T.source, tuple(T.p * e for e in exp), gen, probe_samples)
    else:
        pts = sample(T.source, gen, probe_samples).points
    vals, good = _ratio_matrix(lead, numerators, pts)
    vals = vals[good]
    boxes = []
    q_lo_re = np.quantile(vals.real, 0.05, axis=0)
    q_hi_re = np.quantile(vals.real, 0.95, axis=0)
    q_lo_im = np.quantile(vals.imag, 0.05, axis=0)
    q_hi_im = np.quantile(vals.imag, 0.95, axis=0)
    for i in range(count):
        g = substream(int(seed), TAG_BOXES, i + 1)
        lo, hi = [], []
        for j in range(vals.shape[1]):
            span_re = q_hi_re[j] - q_lo_re[j]
            span_im = q_hi_im[j] - q_lo_im[j]
            c_re = g.uniform(q_lo_re[j], q_hi_re[j])
            c_im = g.uniform(q_lo_im[j], q_hi_im[j])
            h_re = g.uniform(0.15, 0.45) * span_re
            h_im = g.uniform(0.15, 0.45) * span_im
            lo.append(complex(c_re - h_re, c_im - h_im))
            hi.append(complex(c_re + h_re, c_im + h_im))
        boxes.append(Box(lo=tuple(lo), hi=tuple(hi), label=f"box-{i:02d}"))
    return boxes


def equimeasure_check(
    T: CompositionIsometry,
    family: FunctionFamily,
    boxes: Sequence[Box] | None = None,
    samples: int = 1_000_000,
    seed: int = 0,
    threads: int = 1,
    smooth: bool = True,
) -> EquimeasureReport:
    """Compare pushforward masses of the ratio maps on both sides of T.

    Source side: integral u(phi_j/phi_0) |phi_0|^p over D_1; target side the
    same with psi_j = T(phi_j) over D_2. For a true isometry the two agree
    for every Borel region; each region is tested at 3 combined standard
    errors. Regions where neither mass rises 10 sigma above zero are flagged
    inconclusive.
    """
    if family.dimension != T.source.dimension:
        raise ConfigError("family dimension must match the source domain")
    if family.ratio_count < 1:
        raise ConfigError("equimeasurability needs at least one ratio coordinate")
    samples = max(int(samples), 100_000)
    seed = int(seed)
    psi = [T.apply(f) for f in family.members]
    if isinstance(psi[0], LaurentPolynomial) and psi[0].is_zero:
        raise DegenerateDomainError("T(phi_0) is identically zero")

    regions: list = list(boxes) if boxes is not None else random_boxes(T, family, seed=seed)
    if smooth:
        regions = regions + [GaussianBump(), SigmoidProduct()]
    for r in regions:
        if isinstance(r, Box) and r.dimension != family.ratio_count:
            raise ConfigError("box dimension must equal the number of ratio coordinates")

    m_src, s_src = _pushforward_stats(
        T.source, family.lead, family.members[1:], regions, T.p, samples, seed, threads
    )
    m_tgt, s_tgt = _pushforward_stats(
        T.target, psi[0], psi[1:], regions, T.p, samples, seed, threads
    )

    rows = []
    all_pass = True
    any_inconclusive = False
    for r, region in enumerate(regions):
        diff = abs(m_src[r] - m_tgt[r])
        comb = math.hypot(s_src[r], s_tgt[r])
        ok = diff <= 3.0 * comb
        weak = max(m_src[r], m_tgt[r]) < 10.0 * comb
        all_pass &= ok
        any_inconclusive |= weak
        rows.append(
            RegionComparison(
                label=getattr(region, "label", f"region-{r}"),
                mass_source=float(m_src[r]),
                sigma_source=float(s_src[r]),
                mass_target=float(m_tgt[r]),
                sigma_target=float(s_tgt[r]),
                difference=float(diff),
                sigma_combined=float(comb),
                passed=bool(ok),
                inconclusive=bool(weak),
            )
        )
    return EquimeasureReport(
        regions=tuple(rows),
        verdict="PASS" if all_pass else "FAIL",
        samples=samples,
        seed=seed,
        inconclusive=bool(any_inconclusive),
    )
