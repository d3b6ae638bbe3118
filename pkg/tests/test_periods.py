from __future__ import annotations

from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpc, mpfr

from eiscoh.kronecker import Lattice
from eiscoh.numerics import PrecisionContext, UnsupportedFieldError
from eiscoh.periods import (
    G2_canonical,
    PeriodSource,
    TABLE_CURVES,
    TABLE_G2,
    g2_g3,
    j_invariant,
    period_data,
    period_from_eta,
    period_from_table,
)

from ._helpers import abs_close, rel_close
from ._oracles import G2_ZI


class TestWeierstrassInvariants:
    def test_square_lattice_values(self, ctx):
        with ctx.working():
            g2, g3 = g2_g3(Lattice(mpc(0, 1), mpc(1)), ctx)
            assert abs_close(g2, mpfr(G2_ZI), mpfr("1e-50"))
            assert abs(g3) < ctx.tol

    def test_homogeneity(self, ctx):
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.3"), mpfr("1.4")), mpc(1))
            g2, g3 = g2_g3(lat, ctx)
            g2s, g3s = g2_g3(lat.scaled(mpfr(3)), ctx)
            assert rel_close(g2s, g2 / 81, ctx.tol)
            assert rel_close(g3s, g3 / 729, ctx.tol)

    def test_j_scale_invariance(self, ctx):
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.3"), mpfr("1.4")), mpc(1))
            j1 = j_invariant(lat, ctx)
            j2 = j_invariant(lat.scaled(mpc(2, 1)), ctx)
            assert rel_close(j1, j2, ctx.tol)


class TestTableRoute:
    @pytest.mark.parametrize("d", [-7, -19, -43])
    def test_scaled_lattice_reproduces_curve(self, ctx, d):
        data = period_from_table(d, ctx)
        assert data.source is PeriodSource.TABLE_CURVE
        assert (data.a_coeff, data.b_coeff) == TABLE_CURVES[d]
        from eiscoh.field import embed, make_field
        with ctx.working():
            lat = embed(make_field(d).ring, ctx).scaled(data.Omega)
            g2, g3 = g2_g3(lat, ctx)
            assert rel_close(g2, mpfr(data.a_coeff), ctx.tol)
            assert rel_close(g3, mpfr(data.b_coeff), ctx.tol)

    def test_j_invariant_guard_inputs_agree(self, ctx):
        from eiscoh.field import embed, make_field
        a, b = TABLE_CURVES[-19]
        with ctx.working():
            j_raw = j_invariant(embed(make_field(-19).ring, ctx), ctx)
            j_tab = mpfr(1728 * a**3) / (a**3 - 27 * b**2)
            assert rel_close(j_raw, j_tab, ctx.tol)

    def test_rejects_fields_outside_table(self):
        ctx = PrecisionContext(bits=192)
        with pytest.raises(UnsupportedFieldError):
            period_from_table(-15, ctx)
        with pytest.raises(UnsupportedFieldError):
            period_from_table(-5, ctx)


class TestEtaRoute:
    def test_unit_and_discriminant_relation(self, ctx):
        from eiscoh.field import embed, make_field
        data = period_from_eta(-15, ctx)
        assert data.source is PeriodSource.ETA_FORMULA
        with ctx.working():
            lat = embed(make_field(-15).ring, ctx).scaled(data.Omega)
            g2, g3 = g2_g3(lat, ctx)
            delta = g2**3 - 27 * g3**2
            assert rel_close(delta, mpfr(12) ** 6 * (-15) ** 3 * data.u, ctx.tol)
            assert rel_close(g2, data.a_coeff, ctx.tol)
            assert rel_close(g3, data.b_coeff, ctx.tol)
            assert data.b_coeff.real > 0
            assert abs(data.b_coeff.imag) < ctx.tol * abs(data.b_coeff)

    def test_rejects_wrong_residue_class(self, ctx):
        with pytest.raises(UnsupportedFieldError):
            period_from_eta(-20, ctx)
        with pytest.raises(UnsupportedFieldError):
            period_from_eta(-11, ctx)


class TestCanonicalWeightTwo:
    @pytest.mark.parametrize("d", [-7, -67, -163])
    def test_named_table_values(self, ctx, d):
        want = TABLE_G2[d]
        got = G2_canonical(d, ctx)
        with ctx.working():
            assert rel_close(got, mpfr(want.numerator) / want.denominator, ctx.tol)

    def test_dispatcher_covers_both_routes(self, ctx):
        assert period_data(-7, ctx).source is PeriodSource.TABLE_CURVE
        assert period_data(-23, ctx).source is PeriodSource.ETA_FORMULA
        with pytest.raises(UnsupportedFieldError):
            period_data(-20, ctx)
