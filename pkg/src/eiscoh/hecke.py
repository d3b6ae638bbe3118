"""Hecke characters of infinity type (-2, 0) and their L-values at 0.

A character is stored by exact data: the class-group generators g_j of
order n_j (from the field context), a generator alpha_j of each principal
ideal g_j^{n_j}, and an integer root choice r_j.  Numeric values are
derived from that data at whatever precision a caller asks for, so
character equality is combinatorial and never floating-point.

The unit-count weight w(a) is identically 2: the fields handled here have
unit group {+1, -1}, and the constant weight is the normalization under
which the class-number-one L-value collapses to half the ring-lattice
weight-2 value.  Fields with extra units are rejected when a character is
built.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import gmpy2
from gmpy2 import mpc, mpfr

from .field import FieldContext, FracIdeal, QuadElem, embed
from .kronecker import G_k_value
from .numerics import (
    DomainError,
    PrecisionContext,
    RandomStream,
    UnsupportedFieldError,
)
from .periods import PeriodData

_ZERO = (Fraction(0), Fraction(0))


@lru_cache(maxsize=512)
def g2_ideal(a: FracIdeal, ctx: PrecisionContext) -> mpc:
    """The weight-2 value at the origin of the embedded ideal lattice.

    Cached: restriction vectors and determinant rows ask for the same few
    class-representative products over and over.
    """
    with ctx.working():
        L = embed(a, ctx)
        return G_k_value(2, mpc(0), L, ctx, z_coords=_ZERO)


def _ideal_pow(a: FracIdeal, k: int) -> FracIdeal:
    base = a if k >= 0 else a.inverse()
    out = FracIdeal.unit_ideal(a.disc)
    for _ in range(abs(k)):
        out = out * base
    return out


@lru_cache(maxsize=None)
def _exponent_table(fc: FieldContext) -> dict:
    """class index -> exponent tuple over the class-group generators."""
    orders = [n for n, _ in fc.class_structure]
    table = {}
    for t in itertools.product(*(range(n) for n in orders)):
        a = FracIdeal.unit_ideal(fc.d_K)
        for (_, g), t_j in zip(fc.class_structure, t):
            a = a * _ideal_pow(g, t_j)
        table[fc.class_index(a)] = t
    if len(table) != fc.h:
        raise DomainError("class-group generators do not span the group")
    return table


@dataclass(frozen=True)
class ClassCharacter:
    """A character of the class group, as exponents on the generators."""

    orders: tuple[int, ...]
    exponents: tuple[int, ...]

    def __post_init__(self):
        if len(self.orders) != len(self.exponents):
            raise DomainError("exponent list does not match the generators")
        object.__setattr__(
            self,
            "exponents",
            tuple(e % n for e, n in zip(self.exponents, self.orders)),
        )

    @property
    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def value_at(self, t: tuple[int, ...], ctx: PrecisionContext) -> mpc:
        """The root of unity at a class with exponent tuple ``t``."""
        angle = sum(
            (Fraction(e * t_j, n) for e, t_j, n in zip(self.exponents, t, self.orders)),
            Fraction(0),
        ) % 1
        with ctx.working():
            arg = 2 * gmpy2.const_pi() * mpfr(angle.numerator) / angle.denominator
            return mpc(gmpy2.cos(arg), gmpy2.sin(arg))

    def value_on(self, a: FracIdeal, fc: FieldContext, ctx: PrecisionContext) -> mpc:
        return self.value_at(_exponent_table(fc)[fc.class_index(a)], ctx)


def all_class_characters(fc: FieldContext) -> tuple[ClassCharacter, ...]:
    orders = tuple(n for n, _ in fc.class_structure)
    return tuple(
        ClassCharacter(orders, exps)
        for exps in itertools.product(*(range(n) for n in orders))
    )


@dataclass(frozen=True)
class HeckeCharacter:
    """chi with chi((alpha)) = alpha^-2, pinned down by root choices.

    On a generator g_j of order n_j with g_j^{n_j} = (alpha_j), the value
    is chi(g_j) = zeta_{n_j}^{r_j} times the principal n_j-th root of
    alpha_j^-2; the twist records the r_j.  Values on arbitrary fractional
    ideals follow from the class-group decomposition and exact generator
    recovery on the principal part.
    """

    field: FieldContext
    twist: ClassCharacter
    gen_alphas: tuple[QuadElem, ...]

    def gen_values(self, ctx: PrecisionContext) -> tuple[mpc, ...]:
        vals = []
        with ctx.working():
            pi2 = 2 * gmpy2.const_pi()
            for (n, _), alpha, r in zip(
                self.field.class_structure, self.gen_alphas, self.twist.exponents
            ):
                root = gmpy2.exp(gmpy2.log(alpha.as_complex(ctx) ** -2) / n)
                phase = mpc(gmpy2.cos(pi2 * r / n), gmpy2.sin(pi2 * r / n))
                vals.append(root * phase)
        return tuple(vals)

    def value(self, a: FracIdeal, ctx: PrecisionContext) -> mpc:
        fc = self.field
        if a.disc != fc.d_K:
            raise DomainError("ideal from a different field")
        t = _exponent_table(fc)[fc.class_index(a)]
        principal = a
        for (_, g), t_j in zip(fc.class_structure, t):
            principal = principal * _ideal_pow(g, -t_j)
        beta = fc.generator_of(principal)
        if beta is None:
            raise DomainError("class decomposition left a non-principal part")
        with ctx.working():
            out = beta.as_complex(ctx) ** -2
            for v, t_j in zip(self.gen_values(ctx), t):
                out *= v**t_j
            return out

    def twisted_by(self, phi: ClassCharacter) -> "HeckeCharacter":
        merged = ClassCharacter(
            self.twist.orders,
            tuple(a + b for a, b in zip(self.twist.exponents, phi.exponents)),
        )
        return HeckeCharacter(self.field, merged, self.gen_alphas)


def build_character(
    fc: FieldContext, root_choices: list, ctx: PrecisionContext
) -> HeckeCharacter:
    """The character with chi(g_j) = zeta^{root_choices[j]} root(alpha_j^-2).

    The context is only used for the construction self-check on random
    relation words; the character itself is exact data.
    """
    if fc.d_K in (-3, -4):
        raise UnsupportedFieldError("unit group larger than {+1, -1}")
    orders = tuple(n for n, _ in fc.class_structure)
    if len(root_choices) != len(orders):
        raise DomainError("one root choice per class-group generator")
    alphas = []
    for n, g in fc.class_structure:
        alpha = fc.generator_of(_ideal_pow(g, n))
        if alpha is None:
            raise DomainError("generator power is not principal")
        alphas.append(alpha)
    chi = HeckeCharacter(fc, ClassCharacter(orders, tuple(root_choices)), tuple(alphas))

    rng = RandomStream(fc.d_K & 0xFFFF)
    with ctx.working():
        for _ in range(4):
            t = [rng.int_range(0, 2 * n - 1) for n in orders]
            word = FracIdeal.unit_ideal(fc.d_K)
            expect = mpc(1)
            for (n, g), alpha, t_j in zip(fc.class_structure, alphas, t):
                word = word * _ideal_pow(g, n * t_j)
                expect *= alpha.as_complex(ctx) ** (-2 * t_j)
            got = chi.value(word, ctx)
            if abs(got - expect) > ctx.tol * (1 + abs(expect)):
                raise DomainError(
                    "character relation check failed: class structure is wrong")
    return chi


def L_value_at_0(
    chi: HeckeCharacter, ctx: PrecisionContext, reps=None
) -> mpc:
    """Sum of chi(a_i)/2 times the weight-2 value on the a_i^-1 lattice.

    ``reps`` may override the class representatives; the value does not
    depend on the choice (chi and the weight-2 homogeneity cancel).
    """
    fc = chi.field
    if reps is None:
        reps = fc.class_reps
    terms = []
    for a in reps:
        chival = chi.value(a, ctx)
        g2val = g2_ideal(a.inverse(), ctx)
        terms.append((chival, g2val))
    with ctx.working():
        total = mpc(0)
        for chival, g2val in terms:
            total += chival * g2val / 2
        return total


def L_alg_int(
    chi: HeckeCharacter, period: PeriodData, ctx: PrecisionContext
) -> tuple[mpc, mpc]:
    """The pair (Omega^-2 L, 4 sqrt(d_K) Omega^-2 L) at s = 0."""
    lval = L_value_at_0(chi, ctx)
    with ctx.working():
        alg = lval / period.Omega**2
        root_d = gmpy2.sqrt(mpc(chi.field.d_K))
        return alg, 4 * root_d * alg


def L_norm_composite(chi: HeckeCharacter, ctx: PrecisionContext) -> mpc:
    """Product of L(phi chi, 0) over all class characters phi."""
    fc = chi.field
    table = _exponent_table(fc)
    data = []
    for a in fc.class_reps:
        chival = chi.value(a, ctx)
        g2val = g2_ideal(a.inverse(), ctx)
        data.append((table[fc.class_index(a)], chival, g2val))
    with ctx.working():
        total = mpc(1)
        for phi in all_class_characters(fc):
            factor = mpc(0)
            for t, chival, g2val in data:
                factor += phi.value_at(t, ctx) * chival * g2val / 2
            total *= factor
        return total
