"""Canonical periods and Weierstrass data of the normalized ideal lattices.

Two constructions of the period Omega are supported:

* ``period_from_table``: for the seven class-number-one fields with unit
  group {1, -1}, Omega is pinned by the tabulated Weierstrass coefficients
  (a, b) through ``Omega^2 = a*g3(O) / (b*g2(O))``.  The j-invariant of the
  raw lattice is compared against ``1728 a^3/(a^3 - 27 b^2)`` first, which
  guards against a transcription error in the table: j is scale invariant,
  so the two sides are computed from independent inputs.
* ``period_from_eta``: for discriminants congruent to 1 mod 8, Omega and
  the unit u come from eta quotients at tau = (1 + sqrt(d))/2, and the
  derived coefficients a = 12d(u-16), b = (2 sqrt(d))^3 sqrt(u(j-1728))
  (positive-real branch) are verified against g2/g3 of the scaled lattice
  at runtime.

The Weierstrass invariants themselves are evaluated through the
analytically continued lattice sums of the kronecker module: the weight-4
and weight-6 series converge absolutely, and the incomplete-gamma form is
just their exponentially convergent rearrangement.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

import gmpy2
from gmpy2 import mpc, mpfr

from .field import embed, make_field
from .kronecker import G_k_value, KroneckerParams, Lattice, kronecker_G
from .numerics import (
    PrecisionContext,
    RecognitionFailure,
    UnsupportedFieldError,
    dedekind_eta,
)

_ZERO = (Fraction(0), Fraction(0))

# Coefficients of y^2 = 4x^3 - ax - b with CM by the maximal order, for the
# seven class-number-one fields whose unit group is {1, -1}.
TABLE_CURVES: dict[int, tuple[int, int]] = {
    -7: (5 * 7, 7**2),
    -8: (2 * 3 * 5, 2**2 * 7),
    -11: (2**3 * 3 * 11, 7 * 11**2),
    -19: (2**3 * 19, 19**2),
    -43: (2**4 * 5 * 43, 3 * 7 * 43**2),
    -67: (2**3 * 5 * 11 * 67, 7 * 31 * 67**2),
    -163: (2**4 * 5 * 23 * 29 * 163, 7 * 11 * 19 * 127 * 163**2),
}

# Known weight-2 values on the normalized lattice for the same seven fields.
TABLE_G2: dict[int, Fraction] = {
    -7: Fraction(1, 2),
    -8: Fraction(1, 2),
    -11: Fraction(2),
    -19: Fraction(2),
    -43: Fraction(12),
    -67: Fraction(2 * 19),
    -163: Fraction(2**2 * 181),
}


class PeriodSource(Enum):
    ETA_FORMULA = "eta-formula"
    TABLE_CURVE = "table-curve"


@dataclass(frozen=True)
class PeriodData:
    """The period Omega of one field together with its Weierstrass data.

    ``a_coeff`` and ``b_coeff`` are exact integers for the table route and
    numeric values for the eta route; in both cases they agree with
    ``g2``/``g3`` of ``Omega * O`` to the context tolerance (checked at
    construction time).  ``u`` is only set by the eta route.
    """

    d_K: int
    Omega: mpc
    a_coeff: Union[int, mpc]
    b_coeff: Union[int, mpc]
    u: Optional[mpc]
    source: PeriodSource


def g2_g3(L: Lattice, ctx: PrecisionContext) -> tuple[mpc, mpc]:
    """The invariants (60 sum' 1/w^4, 140 sum' 1/w^6) of the lattice."""
    with ctx.working():
        g2 = 60 * kronecker_G(
            KroneckerParams(mpc(2), 4, mpc(0), mpc(0), L, _ZERO, _ZERO), ctx)
        g3 = 140 * kronecker_G(
            KroneckerParams(mpc(3), 6, mpc(0), mpc(0), L, _ZERO, _ZERO), ctx)
        return g2, g3


def j_invariant(L: Lattice, ctx: PrecisionContext) -> mpc:
    g2, g3 = g2_g3(L, ctx)
    with ctx.working():
        disc = g2**3 - 27 * g3**2
        return 1728 * g2**3 / disc


def _ring_lattice(d_K: int, ctx: PrecisionContext) -> Lattice:
    return embed(make_field(d_K).ring, ctx)


def period_from_table(d_K: int, ctx: PrecisionContext) -> PeriodData:
    """Period of the normalized lattice, pinned by the tabulated curve."""
    if d_K not in TABLE_CURVES:
        raise UnsupportedFieldError(
            f"no tabulated curve for discriminant {d_K}")
    a, b = TABLE_CURVES[d_K]
    with ctx.working():
        g2_raw, g3_raw = g2_g3(_ring_lattice(d_K, ctx), ctx)
        j_raw = 1728 * g2_raw**3 / (g2_raw**3 - 27 * g3_raw**2)
        j_tab = mpfr(1728 * a**3) / (a**3 - 27 * b**2)
        if abs(j_raw - j_tab) > ctx.tol * (1 + abs(j_tab)):
            raise RecognitionFailure(
                f"curve coefficients for {d_K} fail the j-invariant guard")
        om2 = a * g3_raw / (b * g2_raw)
        omega = gmpy2.sqrt(om2)
        if abs(g2_raw / om2**2 - a) > ctx.tol * abs(a) or \
                abs(g3_raw / om2**3 - b) > ctx.tol * abs(b):
            raise RecognitionFailure(
                f"period for {d_K} fails the Weierstrass consistency check")
    return PeriodData(d_K, omega, a, b, None, PeriodSource.TABLE_CURVE)


def period_from_eta(d_K: int, ctx: PrecisionContext) -> PeriodData:
    """Period and unit from eta quotients at tau = (1 + sqrt(d))/2."""
    if d_K % 8 != 1:
        raise UnsupportedFieldError(
            f"discriminant class mismatch: {d_K} is not 1 mod 8")
    make_field(d_K)  # validates fundamentality
    with ctx.working():
        rt = mpc(0, gmpy2.sqrt(mpfr(-d_K)))
        tau = (1 + rt) / 2
        eta1 = dedekind_eta(tau, ctx)
        eta2 = dedekind_eta(2 * tau, ctx)
        u = -(mpfr(2) ** 12) * eta2**24 / eta1**24
        pi = gmpy2.const_pi()
        omega = pi / gmpy2.rootn(mpfr(144 * -d_K), 4) * eta1**4 / eta2**2
        g2_raw, g3_raw = g2_g3(_ring_lattice(d_K, ctx), ctx)
        j = 1728 * g2_raw**3 / (g2_raw**3 - 27 * g3_raw**2)
        a = 12 * d_K * (u - 16)
        b = (2 * rt) ** 3 * gmpy2.sqrt(u * (j - 1728))
        if b.real < 0:
            b = -b
        if abs(b.imag) > ctx.tol * abs(b):
            raise RecognitionFailure(
                f"coefficient b for {d_K} is not real under either branch")
        g2_n = g2_raw / omega**4
        g3_n = g3_raw / omega**6
        delta = g2_n**3 - 27 * g3_n**2
        delta_want = mpfr(12) ** 6 * d_K**3 * u
        bad = (abs(g2_n - a) > ctx.tol * (1 + abs(a))
               or abs(g3_n - b) > ctx.tol * (1 + abs(b))
               or abs(delta - delta_want) > ctx.tol * (1 + abs(delta_want)))
        if bad:
            raise RecognitionFailure(
                f"eta-based period for {d_K} fails the Weierstrass checks")
    return PeriodData(d_K, omega, a, b, u, PeriodSource.ETA_FORMULA)


def period_data(d_K: int, ctx: PrecisionContext) -> PeriodData:
    """Dispatch to the table route when available, else the eta route."""
    if d_K in TABLE_CURVES:
        return period_from_table(d_K, ctx)
    if d_K % 8 == 1:
        return period_from_eta(d_K, ctx)
    raise UnsupportedFieldError(
        f"no period construction applies to discriminant {d_K}")


def G2_canonical(d_K: int, ctx: PrecisionContext) -> mpc:
    """The weight-2 value on the normalized lattice, Omega^-2 * G2(O)."""
    data = period_data(d_K, ctx)
    with ctx.working():
        g2_ring = G_k_value(2, mpc(0), _ring_lattice(d_K, ctx), ctx,
                            z_coords=_ZERO)
        return g2_ring / data.Omega**2
