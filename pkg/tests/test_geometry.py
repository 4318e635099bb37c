import math

import numpy as np
import pytest

from conftest import assert_rel
from pbergman import (
    BoundedDomain,
    ConfigError,
    DegenerateDomainError,
    UnsupportedDomainError,
    boundary_distance,
    interior_closure_probe,
    make_catalog_domain,
    parse_domain,
    sample,
    sample_radial_weighted,
)


class TestMembership:
    def test_disc(self, disc):
        assert disc.contains(np.array([0.5 + 0.0j]))
        assert disc.contains(np.array([0.0 + 0.0j]))
        assert not disc.contains(np.array([1.0 + 0.0j]))

    def test_punctured_disc_excludes_origin(self, punctured):
        assert punctured.contains(np.array([0.5 + 0.0j]))
        assert not punctured.contains(np.array([0.0 + 0.0j]))
        assert punctured.null_exclusions == (0,)

    def test_ball(self, ball2):
        assert ball2.contains(np.array([0.6, 0.6j]))
        assert not ball2.contains(np.array([0.8, 0.7j]))

    def test_hartogs_graph(self, hartogs3):
        r1 = 0.9
        assert hartogs3.contains(np.array([r1, 0.99 * r1**3 + 0j]))
        assert not hartogs3.contains(np.array([r1, 1.01 * r1**3 + 0j]))
        # empty fibre over z1 = 0
        assert not hartogs3.contains(np.array([0.0j, 0.0j]))

    def test_fk_graph_with_factor(self, fk3):
        r1 = 0.8
        cap = r1**3 * math.sqrt(1 - r1**2)
        assert fk3.contains(np.array([r1, 0.99 * cap + 0j]))
        assert not fk3.contains(np.array([r1, 1.01 * cap + 0j]))
        assert not fk3.contains(np.array([0.0j, 0.0j]))
        # the second bound shrinks with the cap's peak
        assert fk3.bounding_box[1] < 0.5

    def test_product_offsets_and_exclusions(self):
        D = make_catalog_domain(("product", ("punctured_disc", 1.0), ("ball", 2)))
        assert D.dimension == 3
        assert D.null_exclusions == (0,)
        assert D.contains(np.array([0.5, 0.3, 0.3j]))
        assert not D.contains(np.array([0.0j, 0.3, 0.3j]))


class TestLabelsAndJson:
    def test_parse_label_roundtrip(self):
        for label in ["disc(1)", "punctured_disc(1)", "ball(2)", "hartogs(3)", "fk_ball_prime(2)"]:
            assert parse_domain(label).label == label

    def test_polydisc_radius_broadcast(self):
        D = parse_domain("polydisc(2;0.5)")
        assert D.bounding_box == (0.5, 0.5)

    def test_product_label(self):
        D = parse_domain("product(ball(2),hartogs(3))")
        assert D.dimension == 4
        assert D.label == "product(ball(2),hartogs(3))"

    def test_json_descriptor_roundtrip(self, hartogs3):
        rebuilt = make_catalog_domain(hartogs3.to_json_obj())
        assert rebuilt.label == hartogs3.label
        assert rebuilt.dimension == hartogs3.dimension

    def test_unknown_label_rejected(self):
        with pytest.raises(ConfigError):
            parse_domain("nonsense(3)")

    def test_bad_radius_rejected(self):
        with pytest.raises(ConfigError):
            make_catalog_domain(("disc", -1.0))


class TestVolume:
    def test_disc_volume(self, disc):
        assert_rel(disc.volume, math.pi, 1e-12)

    def test_ball_volume(self, ball2):
        assert_rel(ball2.volume, math.pi**2 / 2.0, 1e-12)

    def test_polydisc_volume(self, polydisc2):
        assert_rel(polydisc2.volume, math.pi**2, 1e-12)

    def test_hartogs_volume(self, hartogs3):
        # (2 pi)^2 * int_0^1 r1 * (r1^{2k} / 2) dr1 = pi^2 / (k + 1) for k = 3
        assert_rel(hartogs3.volume, math.pi**2 / 4.0, 1e-12)

    def test_fk_volume(self, fk3):
        # (2 pi)^2 * (1/2) * (1/2) B(4, 2) with B(4, 2) = 3!1!/5! = 1/20
        assert_rel(fk3.volume, math.pi**2 / 20.0, 1e-12)

    def test_volume_needs_profile(self):
        D = BoundedDomain(
            dimension=1,
            membership=lambda pts: np.abs(pts[:, 0]) < 1.0,
            bounding_box=(1.0,),
            label="custom",
        )
        with pytest.raises(UnsupportedDomainError):
            D.volume


class TestSampling:
    def test_points_are_members(self, hartogs3):
        batch = sample(hartogs3, 0, 500)
        assert batch.points.shape == (500, 2)
        assert np.all(hartogs3.contains(batch.points))
        assert 0 < batch.acceptance_rate <= 1

    def test_integer_seed_determinism(self, ball2):
        a = sample(ball2, 7, 200).points
        b = sample(ball2, 7, 200).points
        assert np.array_equal(a, b)

    def test_chunk_prefix_property(self, disc):
        small = sample(disc, 3, 50).points
        large = sample(disc, 3, 400).points
        assert np.array_equal(large[:50], small)

    def test_distinct_seeds_differ(self, disc):
        assert not np.array_equal(sample(disc, 0, 50).points, sample(disc, 1, 50).points)

    def test_degenerate_domain_detected(self):
        empty = BoundedDomain(
            dimension=1,
            membership=lambda pts: np.zeros(pts.shape[0], dtype=bool),
            bounding_box=(1.0,),
            label="empty",
        )
        with pytest.raises(DegenerateDomainError):
            sample(empty, 0, 10)

    def test_count_validation(self, disc):
        with pytest.raises(ConfigError):
            sample(disc, 0, 0)


class TestWeightedSampling:
    def test_disc_weighted_moment(self, disc):
        # density prop. to |z|^2: E|z|^2 = (t+2)/(t+4) = 2/3
        pts = sample_radial_weighted(disc, (2.0,), 0, 20000)
        m = float(np.mean(np.abs(pts[:, 0]) ** 2))
        assert abs(m - 2.0 / 3.0) < 0.01

    def test_ball_weighted_members(self, ball2):
        pts = sample_radial_weighted(ball2, (1.0, 3.0), 0, 2000)
        assert np.all(ball2.contains(pts))

    def test_hartogs_weighted_members_and_determinism(self, hartogs3):
        a = sample_radial_weighted(hartogs3, (2.0, 4.0), 11, 1000)
        b = sample_radial_weighted(hartogs3, (2.0, 4.0), 11, 1000)
        assert np.array_equal(a, b)
        assert np.all(hartogs3.contains(a))

    def test_fk_weighted_members(self, fk3):
        pts = sample_radial_weighted(fk3, (-1.0, 1.0), 0, 2000)
        assert np.all(fk3.contains(pts))


class TestBoundaryDistance:
    def test_disc_interior(self, disc):
        assert abs(boundary_distance(disc, np.array([0.3 + 0.0j])) - 0.7) < 1e-5

    def test_disc_exterior(self, disc):
        assert abs(boundary_distance(disc, np.array([1.5 + 0.0j])) - 0.5) < 1e-5

    def test_on_boundary_returns_zero(self, disc):
        assert boundary_distance(disc, np.array([1.0 + 0.0j])) == 0.0

    def test_puncture_counts_as_boundary(self, punctured):
        assert abs(boundary_distance(punctured, np.array([0.2 + 0.0j])) - 0.2) < 1e-5

    def test_ball_interior(self, ball2):
        w = np.array([0.3, 0.4j])
        assert abs(boundary_distance(ball2, w) - 0.5) < 1e-5


class TestClosureProbe:
    def test_disc_no_violation(self, disc):
        rep = interior_closure_probe(disc, 0.25)
        assert not rep.violation_found
        assert rep.grid_points > 0

    def test_puncture_is_witnessed(self, punctured):
        rep = interior_closure_probe(punctured, 0.25)
        assert rep.violation_found
        assert any(abs(w[0]) == 0.0 for w in rep.witnesses)
        assert "witness" in rep.verdict

    def test_resolution_validation(self, disc):
        with pytest.raises(ConfigError):
            interior_closure_probe(disc, 0.0)
