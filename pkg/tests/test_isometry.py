import math

import numpy as np
import pytest

from conftest import assert_rel, members
from pbergman import (
    Box,
    CompositionIsometry,
    ConfigError,
    FunctionFamily,
    LaurentPolynomial,
    LinearMap,
    MobiusFactors,
    MonomialMap,
    NonInvertibleMapError,
    equimeasure_check,
    identity_operator,
    mobius_operator,
    mobius_weight,
    pushforward_mass,
    random_boxes,
    verify_isometry,
)

SWAP = MonomialMap(((0, 1), (1, 0)))


def swap_operator(polydisc2, p=3.0, lam=1.0):
    return CompositionIsometry(
        source=polydisc2,
        target=polydisc2,
        mapping=SWAP,
        weight=LaurentPolynomial.one(2),
        p=p,
        lam=lam,
        label="swap",
    )


class TestConstruction:
    def test_identity_valid(self, disc):
        T = identity_operator(disc, 2.0, lam=1j)
        assert T.p == 2.0
        assert T.lam == 1j

    def test_p_and_lambda_validation(self, disc):
        with pytest.raises(ConfigError):
            identity_operator(disc, 0.0)
        with pytest.raises(ConfigError):
            identity_operator(disc, 2.0, lam=2.0)

    def test_wrong_weight_rejected(self, disc):
        z = LaurentPolynomial.coordinate(1, 0)
        with pytest.raises(ConfigError):
            CompositionIsometry(
                source=disc,
                target=disc,
                mapping=MonomialMap.identity(1),
                weight=z,
                p=2.0,
            )
        with pytest.raises(ConfigError):
            CompositionIsometry(
                source=disc,
                target=disc,
                mapping=MonomialMap.identity(1),
                weight=LaurentPolynomial.monomial(1, (0,), 2.0),
                p=2.0,
            )

    def test_wrong_weight_accepted_unvalidated(self, disc):
        T = CompositionIsometry(
            source=disc,
            target=disc,
            mapping=MonomialMap.identity(1),
            weight=LaurentPolynomial.coordinate(1, 0),
            p=2.0,
            validate=False,
        )
        assert T.weight == LaurentPolynomial.coordinate(1, 0)

    def test_dimension_mismatch(self, disc, polydisc2):
        with pytest.raises(ConfigError):
            CompositionIsometry(
                source=disc,
                target=polydisc2,
                mapping=MonomialMap.identity(2),
                weight=LaurentPolynomial.one(2),
                p=2.0,
            )


class TestApply:
    def test_exact_laurent_image(self, disc):
        T = identity_operator(disc, 2.0, lam=1j)
        phi = LaurentPolynomial.monomial(1, (2,), 3.0)
        assert T.apply(phi) == phi * 1j

    def test_swap_image(self, polydisc2):
        T = swap_operator(polydisc2)
        phi = LaurentPolynomial.monomial(2, (2, 1))
        assert T(phi) == LaurentPolynomial.monomial(2, (1, 2))

    def test_pointwise_image_matches_formula(self):
        T = mobius_operator(0.3, 1.0)
        phi = LaurentPolynomial(1, {(0,): 1.0, (1,): 2.0})
        pts = np.array([[0.2 + 0.1j], [-0.4 + 0.3j]])
        image = T.apply(phi)
        expect = T.lam * phi(T.mapping(pts)) * np.asarray(T.weight(pts))
        assert np.allclose(image(pts), expect, rtol=1e-12)


class TestVerifyIsometry:
    def test_identity_closed_exact(self, disc):
        T = identity_operator(disc, 2.0)
        tests = [LaurentPolynomial.monomial(1, (a,)) for a in range(4)]
        assert verify_isometry(T, tests, method="closed") == 0.0

    def test_swap_closed_exact(self, polydisc2):
        T = swap_operator(polydisc2, p=1.0)
        tests = [LaurentPolynomial.monomial(2, (a, b)) for a in range(3) for b in range(2)]
        assert verify_isometry(T, tests, method="closed") == 0.0

    def test_mobius_mc(self):
        T = mobius_operator(0.3, 1.0)
        tests = [LaurentPolynomial.monomial(1, (a,)) for a in range(3)]
        worst = verify_isometry(T, tests, method="mc", samples=50_000, seed=0)
        assert worst < 0.02

    def test_needs_tests(self, disc):
        with pytest.raises(ConfigError):
            verify_isometry(identity_operator(disc, 2.0), [], method="closed")

    def test_unknown_method(self, disc):
        T = identity_operator(disc, 2.0)
        with pytest.raises(ConfigError):
            verify_isometry(T, [LaurentPolynomial.one(1)], method="exact")


class TestInverse:
    def test_monomial_roundtrip(self, polydisc2):
        T = swap_operator(polydisc2, p=3.0, lam=1j)
        Ti = T.inverse()
        phi = LaurentPolynomial.monomial(2, (2, 1), 1.5 - 0.5j)
        assert Ti.apply(T.apply(phi)).allclose(phi)
        assert abs(abs(Ti.lam) - 1.0) < 1e-12

    def test_mobius_roundtrip(self):
        T = mobius_operator(0.3, 1.0)
        Ti = T.inverse()
        phi = LaurentPolynomial(1, {(0,): 1.0, (1,): 0.5})
        pts = np.array([[0.2 + 0.1j], [-0.1 - 0.3j], [0.45 + 0.0j]])
        image = T.apply(phi)
        back = Ti.apply(image)
        assert np.allclose(np.asarray(back(pts)), np.asarray(phi(pts)), rtol=1e-10)

    def test_linear_roundtrip(self, ball2):
        c, s = math.cos(0.7), math.sin(0.7)
        T = CompositionIsometry(
            source=ball2,
            target=ball2,
            mapping=LinearMap(((c, -s), (s, c))),
            weight=LaurentPolynomial.one(2),
            p=2.0,
            label="rotation",
        )
        Ti = T.inverse()
        phi = LaurentPolynomial(2, {(1, 0): 1.0, (0, 2): 2.0})
        pts = members(ball2, 16)
        back = Ti.apply(T.apply(phi))
        assert np.allclose(np.asarray(back(pts)), np.asarray(phi(pts)), rtol=1e-10)

    def test_invalid_weight_not_invertible(self, polydisc2):
        G = MonomialMap(((1, 0), (3, 1)))
        T = CompositionIsometry(
            source=polydisc2,
            target=polydisc2,
            mapping=G,
            weight=LaurentPolynomial.one(2),
            p=1.0,
            validate=False,
        )
        with pytest.raises(NonInvertibleMapError):
            T.inverse()


class TestMobiusWeight:
    @pytest.mark.parametrize("p", [1.0, 3.0])
    def test_modulus_identity(self, p):
        params = (0.3 + 0.1j,)
        g = mobius_weight(params, p)
        mu = MobiusFactors(params)
        pts = np.array([[0.2 + 0.1j], [-0.5 + 0.2j], [0.0 + 0.0j]])
        lhs = np.abs(np.asarray(g(pts))) ** p
        rhs = np.abs(np.asarray(mu.jacobian_det(pts))) ** 2
        assert np.allclose(lhs, rhs, rtol=1e-12)

    def test_bad_parameter_rejected(self):
        with pytest.raises(ConfigError):
            mobius_operator(1.0, 2.0)


class TestPushforwardMass:
    def test_box_mass_oracle(self, disc):
        family = FunctionFamily.coordinates(1)
        box = Box(lo=(0.0 + 0.0j,), hi=(0.4 + 0.4j,))
        mass, sigma = pushforward_mass(disc, family.lead, family, box, 2.0, samples=100_000)
        assert sigma < 0.01
        assert abs(mass - 0.16) <= 4.0 * sigma

    def test_sample_floor(self, disc):
        family = FunctionFamily.coordinates(1)
        box = Box(lo=(0.0,), hi=(0.4 + 0.4j,))
        with pytest.raises(ConfigError):
            pushforward_mass(disc, family.lead, family, box, 2.0, samples=100)


class TestBoxes:
    def test_json_roundtrip(self):
        box = Box(lo=(0.1 - 0.2j, -0.3), hi=(0.5, 0.7 + 0.4j), label="b")
        assert Box.from_json_obj(box.to_json_obj()) == box

    def test_corner_validation(self):
        with pytest.raises(ConfigError):
            Box(lo=(0.5,), hi=(0.1,))
        with pytest.raises(ConfigError):
            Box(lo=(), hi=())

    def test_indicator(self):
        box = Box(lo=(0.0,), hi=(1.0 + 1.0j,))
        vals = np.array([[0.5 + 0.5j], [1.5 + 0.5j], [0.5 - 0.5j]])
        assert list(box(vals)) == [1.0, 0.0, 0.0]

    def test_random_boxes_deterministic(self, disc):
        T = identity_operator(disc, 2.0)
        family = FunctionFamily.coordinates(1)
        a = random_boxes(T, family, seed=4, count=5)
        b = random_boxes(T, family, seed=4, count=5)
        assert [x.to_json_obj() for x in a] == [y.to_json_obj() for y in b]
        c = random_boxes(T, family, seed=5, count=5)
        assert [x.to_json_obj() for x in a] != [y.to_json_obj() for y in c]


class TestFunctionFamily:
    def test_coordinates(self, polydisc2):
        family = FunctionFamily.coordinates(2)
        assert family.ratio_count == 2
        assert family.lead == LaurentPolynomial.one(2)

    def test_validation(self):
        with pytest.raises(ConfigError):
            FunctionFamily(dimension=1, members=())
        with pytest.raises(ConfigError):
            FunctionFamily(dimension=1, members=(LaurentPolynomial.zero(1),))
        with pytest.raises(ConfigError):
            FunctionFamily(dimension=2, members=(LaurentPolynomial.one(1),))


class TestEquimeasure:
    def test_identity_is_exactly_equal(self, disc):
        T = identity_operator(disc, 2.0)
        family = FunctionFamily.coordinates(1)
        rep = equimeasure_check(T, family, samples=100_000, seed=0)
        assert rep.passed
        assert all(r.difference == 0.0 for r in rep.regions)

    def test_weight_mutation_fails(self, disc):
        T = CompositionIsometry(
            source=disc,
            target=disc,
            mapping=MonomialMap.identity(1),
            weight=LaurentPolynomial.coordinate(1, 0),
            p=2.0,
            validate=False,
        )
        family = FunctionFamily.coordinates(1)
        rep = equimeasure_check(T, family, samples=100_000, seed=0)
        assert not rep.passed
        assert any(not r.passed for r in rep.regions)
        assert rep.max_sigma_ratio > 3.0

    def test_box_dimension_guard(self, disc):
        T = identity_operator(disc, 2.0)
        family = FunctionFamily.coordinates(1)
        bad = Box(lo=(0.0, 0.0), hi=(0.5, 0.5))
        with pytest.raises(ConfigError):
            equimeasure_check(T, family, boxes=[bad], samples=100_000)

    def test_report_json_shape(self, disc):
        T = identity_operator(disc, 2.0)
        family = FunctionFamily.coordinates(1)
        rep = equimeasure_check(T, family, samples=100_000, seed=0)
        obj = rep.to_json_obj()
        assert obj["verdict"] == "PASS"
        assert obj["samples"] == 100_000
        assert {"label", "difference", "passed"} <= set(obj["regions"][0])
