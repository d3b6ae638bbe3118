from __future__ import annotations

import gmpy2
import pytest
from gmpy2 import mpc, mpfr

from eiscoh.numerics import (
    DomainError,
    PrecisionContext,
    RandomStream,
    bessel_k,
    dedekind_eta,
    eisenstein_e2_qseries,
    from_mp,
    to_mp,
)

from ._oracles import E2_AT_2I


def _close(a, b, bound) -> bool:
    # convert at a precision covering both operands: the ambient context
    # would round them to 53 bits before subtracting
    prec = max((max(x.precision) if isinstance(x, mpc) else
                x.precision if isinstance(x, mpfr) else 53)
               for x in (a, b))
    with gmpy2.context(precision=max(prec, 128) + 64):
        return abs(mpc(a) - mpc(b)) < mpfr(bound)


class TestPrecisionContext:
    def test_rejects_small_bits(self):
        with pytest.raises(DomainError):
            PrecisionContext(bits=64)

    def test_rejects_tol_below_noise_floor(self):
        with pytest.raises(DomainError):
            PrecisionContext(bits=128, tol_exp10=-40)

    def test_rejects_tiny_trunc_radius(self):
        with pytest.raises(DomainError):
            PrecisionContext(trunc_radius=2.0)

    def test_tol_and_eps(self, ctx):
        with ctx.working():
            assert ctx.tol == mpfr(10) ** -30
            assert ctx.eps() == mpfr(2) ** (-384 + 64)


class TestBridge:
    def test_round_trip_is_exact(self, ctx):
        rng = RandomStream(7)
        with ctx.working():
            for _ in range(20):
                x = rng.uniform_in(-10, 10, ctx) * gmpy2.exp(rng.uniform_in(-40, 40, ctx))
                assert from_mp(to_mp(x), ctx) == x
                z = mpc(x, rng.uniform_in(-5, 5, ctx))
                assert from_mp(to_mp(z), ctx) == z

    def test_zero_round_trip(self, ctx):
        assert from_mp(to_mp(mpfr(0)), ctx) == 0


class TestDedekindEta:
    def test_eta_at_i_closed_form(self, ctx):
        # eta(i) = Gamma(1/4) / (2 pi^(3/4))
        with ctx.working():
            want = gmpy2.gamma(mpfr(1) / 4) / (2 * gmpy2.const_pi() ** (mpfr(3) / 4))
            got = dedekind_eta(mpc(0, 1), ctx)
        assert _close(got, want, mpfr(2) ** -360)

    def test_eta_at_2i_closed_form(self, ctx):
        # eta(2i) = eta(i) / 2^(3/8)
        with ctx.working():
            want = dedekind_eta(mpc(0, 1), ctx) / mpfr(2) ** (mpfr(3) / 8)
            got = dedekind_eta(mpc(0, 2), ctx)
        assert _close(got, want, mpfr(2) ** -360)

    def test_shift_multiplies_by_root_of_unity(self, ctx):
        with ctx.working():
            pi = gmpy2.const_pi()
            phase = gmpy2.exp(mpc(0, 1) * pi / 12)
            for tau in (mpc(0, 1), mpc(mpfr("0.3"), mpfr("0.8")), mpc(-2, mpfr("1.7"))):
                ratio = dedekind_eta(tau + 1, ctx) / dedekind_eta(tau, ctx)
                assert _close(ratio, phase, mpfr(2) ** -350)

    def test_eta24_is_shift_invariant(self, ctx):
        with ctx.working():
            tau = mpc(mpfr("0.41"), mpfr("1.1"))
            a = dedekind_eta(tau, ctx) ** 24
            b = dedekind_eta(tau + 1, ctx) ** 24
        assert _close(a, b, mpfr(2) ** -330 * abs(a))

    def test_rejects_lower_half_plane(self, ctx):
        with pytest.raises(DomainError):
            dedekind_eta(mpc(0, -1), ctx)
        with pytest.raises(DomainError):
            dedekind_eta(mpc(2, 0), ctx)


class TestBesselK:
    @pytest.mark.parametrize("t", ["0.1", "1", "10", "50"])
    def test_half_integer_closed_form(self, ctx, t):
        # K_(1/2)(t) = sqrt(pi/(2t)) e^(-t)
        with ctx.working():
            tv = mpfr(t)
            want = gmpy2.sqrt(gmpy2.const_pi() / (2 * tv)) * gmpy2.exp(-tv)
            got = bessel_k(mpfr("0.5"), tv, ctx)
        assert _close(got, want, mpfr(2) ** -350 * abs(want))

    def test_value_prefix_at_one(self, ctx):
        got = bessel_k(mpfr("0.5"), mpfr(1), ctx)
        assert _close(got, gmpy2.mpfr("0.46106850444789455843957587387569", 120), mpfr("1e-19"))

    def test_even_in_order(self, ctx):
        a = bessel_k(1, mpfr(2), ctx)
        b = bessel_k(-1, mpfr(2), ctx)
        assert _close(a, b, mpfr(2) ** -350 * abs(a))

    def test_complex_order(self, ctx):
        # conjugate-symmetric in the order for real argument
        a = bessel_k(mpc(1, 1), mpfr(3), ctx)
        b = bessel_k(mpc(1, -1), mpfr(3), ctx)
        with ctx.working():
            want = mpc(b.real, -b.imag)
        assert _close(a, want, mpfr(2) ** -340 * abs(a))

    def test_rejects_nonpositive_t(self, ctx):
        with pytest.raises(DomainError):
            bessel_k(1, mpfr(0), ctx)


class TestEisensteinE2:
    def test_value_at_i(self, ctx):
        with ctx.working():
            want = 3 / gmpy2.const_pi()
        got = eisenstein_e2_qseries(mpc(0, 1), ctx)
        assert _close(got, want, mpfr(2) ** -350)

    def test_value_at_2i_frozen_oracle(self, ctx):
        got = eisenstein_e2_qseries(mpc(0, 2), ctx)
        assert _close(got, gmpy2.mpfr(E2_AT_2I, 600), mpfr("1e-50"))

    def test_tends_to_one(self, ctx):
        got = eisenstein_e2_qseries(mpc(0, 10), ctx)
        assert _close(got, 1, mpfr("1e-25"))

    def test_periodicity(self, ctx):
        with ctx.working():
            tau = mpc(mpfr("0.37"), mpfr("0.9"))
            a = eisenstein_e2_qseries(tau, ctx)
            b = eisenstein_e2_qseries(tau + 1, ctx)
        assert _close(a, b, mpfr(2) ** -340 * abs(a))

    def test_rejects_lower_half_plane(self, ctx):
        with pytest.raises(DomainError):
            eisenstein_e2_qseries(mpc(1, -2), ctx)


class TestPrecisionMonotonicity:
    """Doubling bits never changes a digit above the old noise floor."""

    def test_eta(self, ctx, ctx_hi):
        rng = RandomStream(11)
        for _ in range(20):
            tau = rng.complex_in_box(-2, 2, "0.3", 3, ctx)
            lo = dedekind_eta(tau, ctx)
            hi = dedekind_eta(tau, ctx_hi)
            assert _close(lo, hi, ctx.eps() * (1 + abs(lo)))

    def test_bessel(self, ctx, ctx_hi):
        rng = RandomStream(12)
        for _ in range(20):
            nu = rng.complex_in_box(-3, 3, -3, 3, ctx)
            t = rng.uniform_in("0.05", 30, ctx)
            lo = bessel_k(nu, t, ctx)
            hi = bessel_k(nu, t, ctx_hi)
            assert _close(lo, hi, ctx.eps() * (1 + abs(lo)))

    def test_e2(self, ctx, ctx_hi):
        rng = RandomStream(13)
        for _ in range(20):
            tau = rng.complex_in_box(-2, 2, "0.3", 3, ctx)
            lo = eisenstein_e2_qseries(tau, ctx)
            hi = eisenstein_e2_qseries(tau, ctx_hi)
            assert _close(lo, hi, ctx.eps() * (1 + abs(lo)))


class TestRandomStream:
    def test_deterministic(self, ctx):
        a = RandomStream(5)
        b = RandomStream(5)
        assert [a.bits(256) for _ in range(4)] == [b.bits(256) for _ in range(4)]
        assert a.uniform(ctx) == b.uniform(ctx)

    def test_seed_sensitivity(self):
        assert RandomStream(5).bits(256) != RandomStream(6).bits(256)

    def test_int_range_bounds(self):
        rng = RandomStream(9)
        draws = [rng.int_range(-3, 3) for _ in range(200)]
        assert min(draws) == -3 and max(draws) == 3

    def test_uniform_in_unit_interval(self, ctx):
        rng = RandomStream(1)
        for _ in range(50):
            u = rng.uniform(ctx)
            assert 0 <= u < 1
