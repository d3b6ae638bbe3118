from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from eiscoh.field import QuadElem, make_field
from eiscoh.numerics import PrecisionContext, RandomStream
from eiscoh.periods import G2_canonical
from eiscoh.recognition import (
    RecognitionKind,
    recognize_in_O,
    recognize_rational,
)


class TestRational:
    def test_simple_fractions(self, ctx):
        with ctx.working():
            r = recognize_rational(mpfr("0.25"), 100, ctx)
            assert r.ok and r.value == Fraction(1, 4)
            r = recognize_rational(mpfr("0.5"), 100, ctx)
            assert r.ok and r.value == Fraction(1, 2)

    def test_weight_two_table_value(self, ctx):
        got = G2_canonical(-67, ctx)
        r = recognize_rational(got, 10**6, ctx)
        assert r.ok and r.value == 38

    def test_pi_fails(self, ctx):
        with ctx.working():
            r = recognize_rational(gmpy2.const_pi(), 10**6, ctx)
        assert not r.ok
        assert r.residual > mpfr("1e-15")

    def test_nonreal_fails(self, ctx):
        with ctx.working():
            r = recognize_rational(mpc(mpfr("0.25"), mpfr("0.001")), 100, ctx)
        assert not r.ok


class TestRingElements:
    def test_constructed_input_with_noise(self, ctx):
        f = make_field(-7)
        e = f.element(3, -2)
        with ctx.working():
            x = e.as_complex(ctx) + mpfr("1e-40")
            r = recognize_in_O(x, -7, 100, ctx)
        assert r.ok and r.value == e
        assert r.residual < mpfr("1e-39")

    def test_half_integer_fails_in_O(self, ctx):
        with ctx.working():
            r = recognize_in_O(mpfr("0.5"), -7, 100, ctx)
        assert not r.ok

    def test_damerell_style_value(self, ctx):
        # 2 sqrt(d) G2(L_O) at d = -11 where G2(L_O) = 2: the recognized
        # element must square to 16 * (-11)
        with ctx.working():
            x = 2 * mpc(0, gmpy2.sqrt(mpfr(11))) * G2_canonical(-11, ctx)
            r = recognize_in_O(x, -11, 10**4, ctx)
        assert r.ok
        sq = r.value * r.value
        assert sq == QuadElem(-11, 16 * -11, 0)

    def test_height_bound_enforced(self, ctx):
        f = make_field(-7)
        with ctx.working():
            x = f.element(500, 1).as_complex(ctx)
            assert not recognize_in_O(x, -7, 100, ctx).ok
            assert recognize_in_O(x, -7, 1000, ctx).ok


class TestBulkBehaviour:
    def test_round_trip_thousand_elements(self, ctx):
        rng = RandomStream(17)
        f = make_field(-15)
        with ctx.working():
            noise = mpfr("1e-50")
            for _ in range(1000):
                e = f.element(rng.int_range(-10**6, 10**6),
                              rng.int_range(-10**6, 10**6))
                r = recognize_in_O(e.as_complex(ctx) + noise, -15, 10**6, ctx)
                assert r.ok and r.value == e

    def test_no_false_positives_on_random_boxes(self, ctx):
        rng = RandomStream(19)
        for _ in range(100):
            with ctx.working():
                z = rng.complex_in_box(mpfr(-50), mpfr(50), mpfr(-50),
                                       mpfr(50), ctx)
                assert not recognize_in_O(z, -7, 10**4, ctx).ok
