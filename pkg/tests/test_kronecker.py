from __future__ import annotations

from fractions import Fraction

import gmpy2
import mpmath
import pytest
from gmpy2 import mpc, mpfr

from eiscoh.kronecker import (
    G_k_value,
    G_weight2_nonhol,
    KroneckerParams,
    Lattice,
    completed_E,
    g1_theta_quotient,
    kronecker_G,
    theta_pairing,
)
from eiscoh.numerics import (
    DomainError,
    PoleError,
    PrecisionContext,
    PrecisionUnderflowError,
    RandomStream,
    eisenstein_e2_qseries,
)

from ._helpers import (
    abs_close,
    lambda_ladder,
    neville_at_zero,
    random_coords,
    random_lattice,
    random_s,
    rel_close,
)
from ._oracles import EPSTEIN_ZI_2P5

ZERO = (Fraction(0), Fraction(0))


def _zi(ctx):
    with ctx.working():
        return Lattice(mpc(0, 1), mpc(1, 0))


def _epstein_oracle(s_str: str) -> mpc:
    """4 zeta(s) beta(s) on Z[i], via mpmath at 130 dps."""
    with mpmath.workdps(130):
        s = mpmath.mpf(s_str)
        beta = mpmath.mpf(4) ** (-s) * (
            mpmath.zeta(s, mpmath.mpf(1) / 4) - mpmath.zeta(s, mpmath.mpf(3) / 4)
        )
        digits = mpmath.nstr(4 * mpmath.zeta(s) * beta, 120)
    with gmpy2.context(precision=450):
        return mpc(digits)


class TestLattice:
    def test_rejects_wrong_orientation(self, ctx):
        with ctx.working():
            with pytest.raises(DomainError):
                Lattice(mpc(1, 0), mpc(0, 1))

    def test_area_pairing_positive(self, ctx):
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.3"), mpfr("1.7")), mpc(1))
            d = lat.w1 * lat.w2.conjugate() - lat.w1.conjugate() * lat.w2
            assert d.real == 0
            assert d.imag / 2 == lat.covolume > 0

    def test_shortest_vector_of_skew_basis(self, ctx):
        with ctx.working():
            # basis (6 + 7i, 7 + 8i) generates Z[i]
            lat = Lattice(mpc(6, 7), mpc(7, 8))
            assert abs(lat.shortest_vec - 1) < mpfr(2) ** -370
            assert abs(lat.covolume - 1) < mpfr(2) ** -370

    def test_coords_round_trip(self, ctx):
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.31"), mpfr("1.27")), mpc(1))
            z = lat.point((Fraction(3, 7), Fraction(-5, 2)))
            x, y = lat.coords_of(z)
            assert abs(x - mpfr(3) / 7) < mpfr(2) ** -370
            assert abs(y + mpfr(5) / 2) < mpfr(2) ** -370


class TestEpsteinAnchor:
    def test_convergent_region_frozen(self, ctx):
        got = kronecker_G(
            KroneckerParams(mpc("2.5"), 0, mpc(0), mpc(0), _zi(ctx), ZERO, ZERO), ctx)
        assert abs_close(got, gmpy2.mpfr(EPSTEIN_ZI_2P5, 600), mpfr("1e-50"))

    def test_continued_region(self, ctx):
        # 0.4 is inexact in binary: parse it at working precision, or the
        # 53-bit rounding of s alone shifts the value by ~2e-16
        with ctx.working():
            s = mpfr("0.4")
        got = kronecker_G(
            KroneckerParams(s, 0, mpc(0), mpc(0), _zi(ctx), ZERO, ZERO), ctx)
        assert abs_close(got, _epstein_oracle("0.4"), mpfr("1e-100"))

    def test_no_pole_at_one_half(self, ctx):
        # the pole set is {0, 1}: s = 1/2 is a regular point and matches the
        # product of completed zeta values there
        got = kronecker_G(
            KroneckerParams(mpfr("0.5"), 0, mpc(0), mpc(0), _zi(ctx), ZERO, ZERO), ctx)
        assert abs_close(got, _epstein_oracle("0.5"), mpfr("1e-100"))


class TestE2Identity:
    @pytest.mark.parametrize("tau_re,tau_im", [
        ("0", "1"), ("0", "2"), ("0.5", "sqrt7/2")])
    def test_weight_two_value(self, ctx, tau_re, tau_im):
        with ctx.working():
            im = gmpy2.sqrt(mpfr(7)) / 2 if tau_im == "sqrt7/2" else mpfr(tau_im)
            tau = mpc(mpfr(tau_re), im)
            lat = Lattice(tau, mpc(1))
            got = kronecker_G(KroneckerParams(mpc(1), 2, mpc(0), mpc(0), lat, ZERO, ZERO), ctx)
            pi = gmpy2.const_pi()
            want = pi * pi / 3 * eisenstein_e2_qseries(tau, ctx) - pi / tau.imag
        assert abs_close(got, want, ctx.tol)


class TestFunctionalEquation:
    def test_reflection_with_swapped_characteristics(self, ctx):
        rng = RandomStream(21)
        for k in (0, 1, 2, 3):
            with ctx.working():
                lat = random_lattice(rng, ctx)
                pc, qc = random_coords(rng), random_coords(rng)
                p, q = lat.point(pc), lat.point(qc)
                s = random_s(rng, ctx)
                lhs = completed_E(KroneckerParams(s, k, p, q, lat, pc, qc), ctx)
                rhs = theta_pairing(p, q, pc, qc, lat) * completed_E(
                    KroneckerParams(1 - s, k, q, p, lat, qc, pc), ctx)
            assert rel_close(lhs, rhs, ctx.tol), f"k={k}"

    def test_completed_self_reflection_at_zero_characteristics(self, ctx):
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.2"), mpfr("1.4")), mpc(1))
            s = mpc(mpfr("0.3"), mpfr("0.2"))
            lhs = completed_E(KroneckerParams(s, 2, mpc(0), mpc(0), lat, ZERO, ZERO), ctx)
            rhs = completed_E(KroneckerParams(1 - s, 2, mpc(0), mpc(0), lat, ZERO, ZERO), ctx)
        assert rel_close(lhs, rhs, ctx.tol)


class TestPoles:
    def test_pole_at_zero_with_q_in_lattice(self, ctx):
        with ctx.working():
            tiny = mpc(mpfr(2) ** -300)
            params = KroneckerParams(tiny, 0, mpc(2, 3), mpc(0), _zi(ctx), None, ZERO)
            with pytest.raises(PoleError):
                kronecker_G(params, ctx)
            with pytest.raises(PoleError):
                completed_E(params, ctx)

    def test_pole_at_one_with_p_in_lattice(self, ctx):
        with ctx.working():
            s = 1 + mpc(mpfr(2) ** -300)
            params = KroneckerParams(s, 0, mpc(0), mpc(2, 3), _zi(ctx), ZERO, None)
            with pytest.raises(PoleError):
                kronecker_G(params, ctx)

    def test_no_pole_for_positive_weight(self, ctx):
        with ctx.working():
            v = kronecker_G(
                KroneckerParams(mpc(0), 2, mpc(0), mpc(0), _zi(ctx), ZERO, ZERO), ctx)
            assert gmpy2.is_finite(v.real)


class TestTrivialZeros:
    def test_odd_symmetry_kills_weight_one(self, ctx):
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.31"), mpfr("1.27")), mpc(1))
            v = kronecker_G(
                KroneckerParams(mpc(mpfr(1) / 2), 1, mpc(0), mpc(0), lat, ZERO, ZERO), ctx)
        assert abs(v) < ctx.tol

    def test_g1_vanishes_at_zero(self, ctx):
        with ctx.working():
            lat = random_lattice(RandomStream(3), ctx)
            assert G_k_value(1, mpc(0), lat, ctx, z_coords=ZERO) == 0 or \
                abs(G_k_value(1, mpc(0), lat, ctx, z_coords=ZERO)) < ctx.tol


class TestHomogeneity:
    def test_gk_scaling(self, ctx):
        rng = RandomStream(31)
        with ctx.working():
            lat = random_lattice(rng, ctx)
            zc = random_coords(rng)
            z = lat.point(zc)
            alpha = mpc(1, 1)
            for k in (1, 2, 3):
                lhs = G_k_value(k, alpha * z, lat.scaled(alpha), ctx, z_coords=zc)
                rhs = alpha ** -k * G_k_value(k, z, lat, ctx, z_coords=zc)
                assert rel_close(lhs, rhs, ctx.tol), f"k={k}"

    def test_weight_two_nonhol_scaling(self, ctx):
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.11"), mpfr("1.05")), mpc(1))
            zc = (Fraction(2, 5), Fraction(1, 3))
            z = lat.point(zc)
            alpha = mpc(2, 1)
            # the bare continued sum picks up conj(alpha)/alpha
            bare = kronecker_G(KroneckerParams(mpc(0), 2, mpc(0), z, lat, ZERO, zc), ctx)
            bare_scaled = kronecker_G(
                KroneckerParams(mpc(0), 2, mpc(0), alpha * z, lat.scaled(alpha), ZERO, zc), ctx)
            assert rel_close(bare_scaled, alpha.conjugate() / alpha * bare, ctx.tol)
            # the area-normalized value therefore scales by alpha^-2
            full = G_weight2_nonhol(z, lat, ctx, z_coords=zc)
            full_scaled = G_weight2_nonhol(alpha * z, lat.scaled(alpha), ctx, z_coords=zc)
            assert rel_close(full_scaled, full / alpha ** 2, ctx.tol)

    def test_weight_two_nonhol_constant_term(self, ctx):
        # the (0,2) and (1,2) parameter routes agree at lattice points
        with ctx.working():
            lat = Lattice(mpc(mpfr("0.31"), mpfr("1.27")), mpc(1))
            zc = (Fraction(2), Fraction(-1))
            lhs = G_weight2_nonhol(lat.point(zc), lat, ctx, z_coords=zc)
            rhs = G_k_value(2, mpc(0), lat, ctx, z_coords=ZERO)
        assert rel_close(lhs, rhs, ctx.tol)


class TestHeckeLimit:
    def test_richardson_limit_matches_regularized_value(self, ctx):
        rng = RandomStream(41)
        k = 2
        for _ in range(5):
            with ctx.working():
                lat = random_lattice(rng, ctx)
                zc = random_coords(rng)
                z = lat.point(zc)
                lams = lambda_ladder(ctx)
                vals = [
                    kronecker_G(
                        KroneckerParams(mpc(mpfr(k) / 2 + lam / 2), k, mpc(0), z, lat,
                                        ZERO, zc), ctx)
                    for lam in lams
                ]
                extrap = neville_at_zero(lams, vals)
                exact = G_k_value(k, z, lat, ctx, z_coords=zc)
            assert rel_close(extrap, exact, 10 * ctx.tol)


class TestTruncationControl:
    def test_fixed_radius_too_small_raises(self):
        ctx = PrecisionContext(bits=384, trunc_radius=3.0)
        with ctx.working():
            lat = Lattice(mpc(0, 1), mpc(1, 0))
            with pytest.raises(PrecisionUnderflowError):
                kronecker_G(KroneckerParams(mpc(1), 2, mpc(0), mpc(0), lat, ZERO, ZERO), ctx)

    def test_generous_fixed_radius_matches_auto(self, ctx):
        fixed = PrecisionContext(bits=384, trunc_radius=22.0)
        with ctx.working():
            lat = Lattice(mpc(0, 1), mpc(1, 0))
            a = kronecker_G(KroneckerParams(mpc(1), 2, mpc(0), mpc(0), lat, ZERO, ZERO), fixed)
            b = kronecker_G(KroneckerParams(mpc(1), 2, mpc(0), mpc(0), lat, ZERO, ZERO), ctx)
        assert rel_close(a, b, ctx.tol)


class TestPrecisionMonotonicity:
    def test_more_bits_only_sharpen(self, ctx, ctx_hi):
        rng = RandomStream(51)
        for _ in range(3):
            lat_lo = random_lattice(rng, ctx)
            zc = random_coords(rng)
            s = random_s(rng, ctx)
            with ctx_hi.working():
                lat_hi = Lattice(mpc(lat_lo.w1), mpc(lat_lo.w2))
                z_hi = lat_hi.point(zc)
                hi = kronecker_G(KroneckerParams(s, 2, mpc(0), z_hi, lat_hi, ZERO, zc), ctx_hi)
            with ctx.working():
                lo = kronecker_G(
                    KroneckerParams(s, 2, mpc(0), lat_lo.point(zc), lat_lo, ZERO, zc), ctx)
            assert rel_close(lo, hi, ctx.tol)


class TestThetaQuotientFastPath:
    def test_matches_continued_sum(self, ctx):
        rng = RandomStream(61)
        for _ in range(5):
            with ctx.working():
                lat = random_lattice(rng, ctx)
                zc = random_coords(rng)
                fast = g1_theta_quotient(zc, lat, ctx)
                slow = G_k_value(1, lat.point(zc), lat, ctx, z_coords=zc)
            assert rel_close(fast, slow, ctx.tol)

    def test_lattice_point_gives_zero(self, ctx):
        with ctx.working():
            lat = random_lattice(RandomStream(62), ctx)
            assert g1_theta_quotient((Fraction(3), Fraction(-2)), lat, ctx) == 0

    def test_periodicity(self, ctx):
        with ctx.working():
            lat = random_lattice(RandomStream(63), ctx)
            zc = (Fraction(2, 7), Fraction(3, 5))
            shifted = (zc[0] + 4, zc[1] - 6)
            a = g1_theta_quotient(zc, lat, ctx)
            b = g1_theta_quotient(shifted, lat, ctx)
        assert rel_close(a, b, ctx.tol)
