"""Elliptic Dedekind sums and the Sczech cocycle on SL2 of the integers.

The Dedekind sum is the displayed normalization

    D(a, c, L) = (1/c) * sum over r in L/cL of G1(a r / c, L) G1(r / c, L)

with the complex prefactor 1/c, not 1/|c| (the cocycle additivity tests
double as a check of that convention).  The cocycle is the case split

    Phi_L(gamma) = I((a + d)/c) G2(L) - D(a, c, L)    when c != 0
    Phi_L(gamma) = I(b/d) G2(L)                       when c = 0

with I(z) = z - conj(z).

G1 values are evaluated through the theta-quotient fast path; each new
lattice/precision pair is certified once against the analytically continued
series before its fast values are trusted.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import gmpy2
from gmpy2 import mpc, mpfr

from .field import (
    FieldContext,
    FracIdeal,
    GammaMatrix,
    QuadElem,
    _hnf_from_rows,
    embed,
    lattice_coords,
)
from .kronecker import Coords, G_k_value, Lattice, g1_theta_quotient
from .numerics import (
    DomainError,
    PrecisionContext,
    PrecisionUnderflowError,
    RandomStream,
)

_ZERO: Coords = (Fraction(0), Fraction(0))

IntMatrix = tuple[tuple[int, int], tuple[int, int]]

_certified_lattices: set = set()


@dataclass(frozen=True)
class CocycleValue:
    """One evaluation of the cocycle, with the inputs that produced it."""

    value: mpc
    gamma: GammaMatrix
    ideal: FracIdeal


def _certify_fast_path(L: Lattice, coords: Coords, ctx: PrecisionContext) -> None:
    """Compare the theta-quotient G1 against the continued series, once."""
    key = (L.w1, L.w2, ctx.bits, ctx.tol_exp10)
    if key in _certified_lattices:
        return
    fast = g1_theta_quotient(coords, L, ctx)
    with ctx.working():
        slow = G_k_value(1, L.point(coords), L, ctx, z_coords=coords)
        if abs(fast - slow) > ctx.tol * (1 + abs(fast) + abs(slow)):
            raise PrecisionUnderflowError(
                "theta-quotient weight-1 value disagrees with the series")
    _certified_lattices.add(key)


def _mult_matrix_ideal(e: QuadElem, ideal: FracIdeal) -> IntMatrix:
    b1, b2 = ideal.basis()
    rows = []
    for w in (b2, b1):  # embedded basis order
        u, v = lattice_coords(e * w, ideal)
        if u.denominator != 1 or v.denominator != 1:
            raise DomainError(f"{e} does not stabilize the ideal lattice")
        rows.append((int(u), int(v)))
    return tuple(rows)


def _mult_matrix_lattice(e_num: mpc, L: Lattice,
                         ctx: PrecisionContext) -> IntMatrix:
    with ctx.working():
        snap = mpfr(2) ** -(ctx.bits // 2)
        rows = []
        for w in (L.w1, L.w2):
            x, y = L.coords_of(e_num * w)
            m, n = int(round(x)), int(round(y))
            if abs(x - m) > snap or abs(y - n) > snap:
                raise DomainError(
                    "multiplier does not stabilize the lattice")
            rows.append((m, n))
    return tuple(rows)


def _residue_data(m_c: IntMatrix) -> tuple[int, int, list[list[Fraction]]]:
    det = m_c[0][0] * m_c[1][1] - m_c[0][1] * m_c[1][0]
    if det == 0:
        raise DomainError("multiplication matrix is singular")
    inv = [[Fraction(m_c[1][1], det), Fraction(-m_c[0][1], det)],
           [Fraction(-m_c[1][0], det), Fraction(m_c[0][0], det)]]
    e1, _, e2 = _hnf_from_rows(list(m_c))
    return e1, e2, inv


def dedekind_sum(a: QuadElem, c: QuadElem,
                 lat: Union[FracIdeal, Lattice],
                 ctx: PrecisionContext) -> mpc:
    """The sum D(a, c, lat) over the residue classes of lat / c*lat.

    ``lat`` may be a fractional ideal (exact residue bookkeeping) or any
    complex lattice stable under multiplication by ``a`` and ``c`` (the
    integer action is recovered by rounding and verified).
    """
    if c.is_zero:
        raise DomainError("need c != 0")
    if isinstance(lat, FracIdeal):
        if a.disc != lat.disc or c.disc != lat.disc:
            raise DomainError("element and ideal from different fields")
        if not (a.is_integral and c.is_integral):
            raise DomainError("need a, c in the ring of integers")
        m_c = _mult_matrix_ideal(c, lat)
        m_a = _mult_matrix_ideal(a, lat)
        L = embed(lat, ctx)
    else:
        L = lat
        with ctx.working():
            m_c = _mult_matrix_lattice(c.as_complex(ctx), L, ctx)
            m_a = _mult_matrix_lattice(a.as_complex(ctx), L, ctx)
    e1, e2, inv = _residue_data(m_c)
    with ctx.working():
        total = mpc(0)
        for i in range(e1):
            for j in range(e2):
                v = (i * inv[0][0] + j * inv[1][0],
                     i * inv[0][1] + j * inv[1][1])
                if v[0].denominator != 1 or v[1].denominator != 1:
                    _certify_fast_path(L, v, ctx)
                g_r = g1_theta_quotient(v, L, ctx)
                if g_r == 0:
                    continue
                va = (v[0] * m_a[0][0] + v[1] * m_a[1][0],
                      v[0] * m_a[0][1] + v[1] * m_a[1][1])
                total += g1_theta_quotient(va, L, ctx) * g_r
        return total / c.as_complex(ctx)


def sczech_phi(gamma: GammaMatrix, ideal: FracIdeal,
               ctx: PrecisionContext) -> CocycleValue:
    """The cocycle value on the embedded ideal lattice."""
    if gamma.disc != ideal.disc:
        raise DomainError("matrix and ideal from different fields")
    L = embed(ideal, ctx)
    with ctx.working():
        g2 = G_k_value(2, mpc(0), L, ctx, z_coords=_ZERO)
        if gamma.c.is_zero:
            z = (gamma.b / gamma.d).as_complex(ctx)
            value = (z - z.conjugate()) * g2
        else:
            z = ((gamma.a + gamma.d) / gamma.c).as_complex(ctx)
            value = (z - z.conjugate()) * g2 - dedekind_sum(
                gamma.a, gamma.c, ideal, ctx)
    return CocycleValue(value, gamma, ideal)


def random_gamma(fld: FieldContext, seed: int, complexity: int,
                 max_c_norm: int = 5000) -> GammaMatrix:
    """Deterministic pseudorandom word of ``complexity`` elementary matrices.

    Each factor is upper or lower triangular with an integral offset whose
    coordinates are bounded by 3.  Words whose lower-left entry has norm
    above ``max_c_norm`` are redrawn from the same stream, keeping residue
    systems desk-scale.
    """
    if complexity < 0:
        raise DomainError("need complexity >= 0")
    rng = RandomStream(seed)
    one, zero = fld.element(1), fld.element(0)
    identity = GammaMatrix(one, zero, zero, one)
    while True:
        g = identity
        for _ in range(complexity):
            t = fld.element(rng.int_range(-3, 3), rng.int_range(-3, 3))
            if rng.int_range(0, 1):
                g = g @ GammaMatrix(one, t, zero, one)
            else:
                g = g @ GammaMatrix(one, zero, t, one)
        if abs(g.c.norm()) <= max_c_norm:
            return g
