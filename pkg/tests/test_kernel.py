import math

import numpy as np
import pytest

from conftest import assert_rel
from pbergman import (
    BasisSpec,
    ConfigError,
    NoBasisSupportError,
    OptimizerConfig,
    bergman2_gram,
    boundary_probe,
    degree_basis,
    make_catalog_domain,
    pbergman_min_norm,
)

# deg-20 partial sum of sum (k+1) |z|^{2k} / pi at z = 0.5
DISC_DEG20_AT_HALF = 0.5658842421023615


class TestBasis:
    def test_degree_basis_size(self, disc):
        basis = degree_basis(disc, 20, 2.0)
        assert basis.size == 21
        assert basis.dropped == ()

    def test_divergent_index_dropped(self, punctured):
        basis = degree_basis(punctured, 3, 2.0, extra_indices=[(-1,)])
        assert (-1,) in basis.dropped
        assert (-1,) not in basis.indices

    def test_laurent_index_kept_at_p1(self, punctured):
        basis = degree_basis(punctured, 3, 1.0, extra_indices=[(-1,)])
        assert (-1,) in basis.indices
        assert basis.dropped == ()

    def test_duplicate_indices_rejected(self):
        with pytest.raises(ConfigError):
            BasisSpec(indices=((0,), (0,)), domain_label="disc(1)", p=2.0)

    def test_all_divergent_rejected(self, punctured):
        with pytest.raises(ConfigError):
            BasisSpec.validated(punctured, [(-1,)], 2.0)


class TestGram:
    def test_disc_center(self, disc):
        basis = degree_basis(disc, 20, 2.0)
        est = bergman2_gram(disc, basis, 0.0)
        assert_rel(est.value, 1.0 / math.pi, 1e-14)

    def test_disc_half(self, disc):
        basis = degree_basis(disc, 20, 2.0)
        est = bergman2_gram(disc, basis, 0.5)
        assert_rel(est.value, DISC_DEG20_AT_HALF, 1e-13)
        # the span estimate lies 4e-12 below the full-space kernel 16/(9 pi)
        assert est.value < 16.0 / (9.0 * math.pi)
        assert est.is_lower_bound

    def test_requires_p2(self, disc):
        basis = degree_basis(disc, 4, 1.0)
        with pytest.raises(ConfigError):
            bergman2_gram(disc, basis, 0.0)

    def test_ball_center(self, ball2):
        basis = degree_basis(ball2, 6, 2.0)
        est = bergman2_gram(ball2, basis, (0.0, 0.0))
        assert_rel(est.value, 2.0 / math.pi**2, 1e-14)


class TestMinNorm:
    def test_matches_gram_at_p2(self, disc):
        basis = degree_basis(disc, 10, 2.0)
        gram = bergman2_gram(disc, basis, 0.3)
        opt = pbergman_min_norm(disc, basis, 0.3)
        assert_rel(opt.value, gram.value, 1e-7)

    def test_p1_center_value(self, disc):
        basis = degree_basis(disc, 10, 1.0)
        est = pbergman_min_norm(disc, basis, 0.0)
        assert_rel(est.value, 1.0 / math.pi**2, 1e-2)

    def test_laurent_span_exact_optimum(self, punctured):
        # one-element span c/z: constraint forces c = z, so the norm is
        # 2 pi |z| and the kernel bound is exactly |z|^-2 / (2 pi)^2
        basis = BasisSpec.validated(punctured, [(-1,)], 1.0)
        z = 0.1
        est = pbergman_min_norm(punctured, basis, z, p=1.0)
        assert_rel(est.value, z**-2 / (2 * math.pi) ** 2, 1e-9)

    def test_no_support_at_zero(self, disc):
        basis = BasisSpec.validated(disc, [(1,), (2,)], 2.0)
        with pytest.raises(NoBasisSupportError):
            pbergman_min_norm(disc, basis, 0.0)

    def test_determinism(self, disc):
        basis = degree_basis(disc, 6, 3.0)
        a = pbergman_min_norm(disc, basis, 0.4)
        b = pbergman_min_norm(disc, basis, 0.4)
        assert a.value == b.value

    def test_warm_start_not_harmful(self, disc):
        basis = degree_basis(disc, 6, 3.0)
        plain = pbergman_min_norm(disc, basis, 0.4)
        cfg = OptimizerConfig(warm_starts=(((  (0,), (1,)), (0.5, 0.5)),))
        warmed = pbergman_min_norm(disc, basis, 0.4, cfg=cfg)
        assert warmed.value >= plain.value - 1e-9 * plain.value

    def test_unknown_warm_start_index_ignored(self, disc):
        basis = degree_basis(disc, 4, 2.0)
        cfg = OptimizerConfig(warm_starts=((((7,),), (1.0,)),))
        est = pbergman_min_norm(disc, basis, 0.4, cfg=cfg)
        assert est.value > 0

    def test_report_fields(self, disc):
        basis = degree_basis(disc, 4, 2.0)
        est = pbergman_min_norm(disc, basis, 0.4)
        rep = est.optimizer_report
        assert rep["iterations"] > 0
        assert math.isfinite(rep["final_gradient_norm"])
        assert rep["restarts"] >= 1
        obj = est.to_json_obj()
        assert obj["basis_size"] == basis.size
        assert obj["is_lower_bound"] is True


class TestMonotonicity:
    def test_basis_monotone_gram(self, disc):
        small = degree_basis(disc, 6, 2.0)
        large = degree_basis(disc, 10, 2.0)
        for z in (0.1, 0.45, 0.7):
            lo = bergman2_gram(disc, small, z).value
            hi = bergman2_gram(disc, large, z).value
            assert hi >= lo - 1e-14 * hi

    def test_basis_monotone_optimizer(self, disc):
        small = degree_basis(disc, 4, 3.0)
        large = degree_basis(disc, 7, 3.0)
        for z in (0.2, 0.5):
            lo = pbergman_min_norm(disc, small, z).value
            hi = pbergman_min_norm(disc, large, z).value
            assert hi >= lo * (1.0 - 1e-7)

    def test_domain_monotone(self):
        inner = make_catalog_domain(("disc", 1.0))
        outer = make_catalog_domain(("disc", 1.25))
        bi = degree_basis(inner, 8, 2.0)
        bo = degree_basis(outer, 8, 2.0)
        for z in (0.1, 0.5, 0.8):
            assert bergman2_gram(inner, bi, z).value >= bergman2_gram(outer, bo, z).value


class TestScaling:
    def test_exact_dilation_law_p2(self):
        base = make_catalog_domain(("disc", 1.0))
        double = make_catalog_domain(("disc", 2.0))
        bb = degree_basis(base, 6, 2.0)
        bd = degree_basis(double, 6, 2.0)
        for z in (0.2, 0.45):
            lhs = bergman2_gram(double, bd, 2.0 * z).value
            rhs = 2.0 ** (-4.0 / 2.0) * bergman2_gram(base, bb, z).value
            assert_rel(lhs, rhs, 1e-13)


class TestBoundaryProbe:
    def test_puncture_path(self, punctured):
        basis = degree_basis(punctured, 3, 1.0, extra_indices=[(-1,)])
        probes = boundary_probe(punctured, [0.2, 0.1], basis, 1.0)
        assert len(probes) == 2
        for pt, z in zip(probes, (0.2, 0.1)):
            assert abs(pt.distance - z) < 1e-5
            assert pt.diagnostic > 0
        # the kernel certificate keeps value * dist^2 off zero at the puncture
        assert probes[-1].diagnostic > 0.9 / (2 * math.pi) ** 2

    def test_path_point_outside_rejected(self, disc):
        basis = degree_basis(disc, 3, 2.0)
        with pytest.raises(ConfigError):
            boundary_probe(disc, [1.5], basis, 2.0)
