"""Class-group basis matrices and the integrality report.

The weight-2 lattice values on ideal-class representatives assemble into
the group matrix M[i][j] = f(a_i^-1 a_j) of the class function

    f(b) = Omega^-2 chi(b)^-1 G2(b) / 2,

whose determinant factors as the product of the twisted algebraic
L-values over the class characters (the abelian group-determinant
factorization).  f really is a class function: rescaling b by a
principal ideal (lambda) multiplies G2 by lambda^-2 and chi^-1 by
lambda^2, so the matrix is assembled from the h values on the stored
representatives and every lattice sum runs over the same small set of
lattices.

For class-number-one fields the single entry is half the weight-2 value
of the ring lattice.  ``denominator_report`` packages that value, its
recognized rational form, and the primes the integrality statement
excludes (those dividing 2 d_K).  The upper-bound quantity circulates in
two normalizations, L^int / (2 sqrt(d_K)) and L^int / (4 sqrt(d_K));
the report carries both side by side, and asserts that the first equals
the generator at class number one.
"""

import itertools
from dataclasses import dataclass
from typing import Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from .field import FieldContext, make_field, normalize_discriminant
from .hecke import (HeckeCharacter, L_norm_composite, _exponent_table,
                    all_class_characters, build_character, g2_ideal)
from .numerics import (DomainError, PrecisionContext,
                       PrecisionUnderflowError, RandomStream,
                       UnsupportedFieldError)
from .periods import G2_canonical, PeriodData, period_data
from .recognition import (RecognitionKind, RecognitionResult,
                          recognize_rational)

__all__ = [
    "BasisMatrix",
    "DenominatorReport",
    "basis_matrix",
    "dedekind_determinant_check",
    "denominator_report",
    "group_determinant_residual",
]

_H1_DISCRIMINANTS = (-7, -8, -11, -19, -43, -67, -163)

_MAX_GENERATOR_DEN = 1000


def _parity(perm: Sequence[int]) -> int:
    flips = 0
    for i in range(len(perm)):
        for j in range(i + 1, len(perm)):
            if perm[i] > perm[j]:
                flips += 1
    return flips & 1


def _det(entries, ctx: PrecisionContext) -> mpc:
    """Determinant by signed permutation expansion (h <= 3 in practice)."""
    n = len(entries)
    with ctx.working():
        total = mpc(0)
        for perm in itertools.permutations(range(n)):
            term = mpc(-1) if _parity(perm) else mpc(1)
            for i, j in enumerate(perm):
                term *= entries[i][j]
            total += term
        return total


def _prime_factors(n: int) -> tuple[int, ...]:
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1 if p == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


@dataclass(frozen=True)
class BasisMatrix:
    """Group matrix of the weight-2 class function over the ideal classes.

    ``entries[i][j]`` is f(a_i^-1 a_j) for the representative list of
    ``chi.field``; ``det`` is its determinant, checked nonzero when the
    matrix is assembled.
    """

    entries: tuple
    chi: HeckeCharacter
    det: mpc

    @property
    def h(self) -> int:
        return len(self.entries)


def basis_matrix(chi: HeckeCharacter, period: PeriodData,
                 ctx: PrecisionContext) -> BasisMatrix:
    """Assemble the matrix of f(a_i^-1 a_j) over the class representatives.

    f is evaluated once per ideal class (on the stored representative,
    where the weight-2 value is cached); the h^2 entries are lookups into
    those h values, keyed by the class of the quotient ideal.
    """
    fld = chi.field
    if period.d_K != fld.d_K:
        raise DomainError("period and character belong to different fields")
    fvals = []
    for rep in fld.class_reps:
        chival = chi.value(rep, ctx)
        g2val = g2_ideal(rep, ctx)
        with ctx.working():
            fvals.append(g2val / (2 * chival * period.Omega**2))
    entries = tuple(
        tuple(fvals[fld.class_index(a_i.inverse() * a_j)]
              for a_j in fld.class_reps)
        for a_i in fld.class_reps)
    det = _det(entries, ctx)
    with ctx.working():
        if not abs(det) > ctx.tol:
            raise PrecisionUnderflowError(
                f"basis matrix determinant vanished at {ctx.bits} bits")
    return BasisMatrix(entries=entries, chi=chi, det=det)


def group_determinant_residual(values: Sequence,
                               ctx: PrecisionContext) -> mpfr:
    """Brute-force determinant-factorization residual on a cyclic group.

    ``values`` lists f(0), ..., f(n-1) for a function f on Z/n.  The
    matrix (f(j - i))_{ij} has determinant equal to the product, over the
    n characters k, of sum_a zeta_n^{ka} f(-a); the distance between the
    two sides is returned.
    """
    n = len(values)
    if n == 0:
        raise DomainError("need at least one function value")
    with ctx.working():
        vals = [mpc(v) for v in values]
        entries = tuple(
            tuple(vals[(j - i) % n] for j in range(n)) for i in range(n))
        det = _det(entries, ctx)
        pi2 = 2 * gmpy2.const_pi()
        prod = mpc(1)
        for k in range(n):
            column = mpc(0)
            for a in range(n):
                ang = pi2 * ((k * a) % n) / n
                column += mpc(gmpy2.cos(ang), gmpy2.sin(ang)) * vals[-a % n]
            prod *= column
        return abs(det - prod)


def _class_group_residual(fld: FieldContext, values: Sequence,
                          ctx: PrecisionContext) -> mpfr:
    """Factorization residual for one class function on the class group.

    ``values[k]`` is the function on the class of the k-th stored
    representative; characters are evaluated through the exact exponent
    decomposition, so this exercises the same bookkeeping the basis
    matrix uses, with none of the L-value machinery.
    """
    reps = fld.class_reps
    entries = tuple(
        tuple(values[fld.class_index(a_i.inverse() * a_j)] for a_j in reps)
        for a_i in reps)
    table = _exponent_table(fld)
    inv_index = [fld.class_index(rep.inverse()) for rep in reps]
    with ctx.working():
        det = _det(entries, ctx)
        prod = mpc(1)
        for phi in all_class_characters(fld):
            column = mpc(0)
            for k in range(fld.h):
                column += phi.value_at(table[k], ctx) * values[inv_index[k]]
            prod *= column
        return abs(det - prod)


def dedekind_determinant_check(chi: HeckeCharacter,
                               ctx: PrecisionContext) -> mpfr:
    """Residual of det(M) against the product of twisted algebraic L-values.

    Also replays the bare group-determinant factorization on one random
    complex-valued class function (same class group, no L-values), so a
    failure separates matrix-assembly problems from factorization
    problems.  Returns the larger of the two residuals.
    """
    fld = chi.field
    period = period_data(fld.d_K, ctx)
    mat = basis_matrix(chi, period, ctx)
    composite = L_norm_composite(chi, ctx)
    with ctx.working():
        target = composite / period.Omega ** (2 * fld.h)
        det_residual = abs(mat.det - target)
    stream = RandomStream(211 + abs(fld.d_K))
    with ctx.working():
        fvals = tuple(
            mpc(mpfr(stream.int_range(-999, 999)),
                mpfr(stream.int_range(-999, 999))) / 1024
            for _ in range(fld.h))
    random_residual = _class_group_residual(fld, fvals, ctx)
    return max(det_residual, random_residual)


@dataclass(frozen=True)
class DenominatorReport:
    """Integrality data for the cohomology classes of one h = 1 field.

    ``g2_value`` and ``denominator_generator`` are recognition outcomes,
    never bare floats: a failed recognition is reported as such instead
    of a silently rounded number.  ``bound`` and ``bound_alt`` carry the
    upper-bound quantity in its two circulating normalizations,
    L^int / (2 sqrt(d_K)) and L^int / (4 sqrt(d_K)); the first equals
    the generator at class number one, which is asserted when the report
    is built.
    """

    d_K: int
    g2_value: RecognitionResult
    denominator_generator: RecognitionResult
    excluded_primes: tuple
    bound: mpc
    bound_alt: mpc
    note: str


def denominator_report(d_K: int, ctx: PrecisionContext) -> DenominatorReport:
    """Weight-2 generator, excluded primes, and bound for one h = 1 field.

    The input may be a squarefree d or the discriminant; anything off the
    class-number-one list raises UnsupportedFieldError.  The recognized
    generator must agree between ``ctx`` and doubled precision, otherwise
    the report carries a failed recognition.
    """
    d = normalize_discriminant(d_K)
    if d not in _H1_DISCRIMINANTS:
        raise UnsupportedFieldError(
            f"the denominator report covers the class-number-one "
            f"discriminants {_H1_DISCRIMINANTS}, not {d}")
    fld = make_field(d)
    period = period_data(d, ctx)
    g2c = G2_canonical(d, ctx)
    rec = recognize_rational(g2c, _MAX_GENERATOR_DEN, ctx)
    ctx_hi = ctx.with_bits(2 * ctx.bits)
    rec_hi = recognize_rational(G2_canonical(d, ctx_hi),
                                _MAX_GENERATOR_DEN, ctx_hi)
    if rec.ok and not (rec_hi.ok and rec_hi.value == rec.value):
        rec = RecognitionResult(RecognitionKind.FAILED, None,
                                rec.residual, rec.height)

    chi = build_character(fld, [], ctx)
    composite = L_norm_composite(chi, ctx)
    with ctx.working():
        alg = composite / period.Omega**2
        root_d = gmpy2.sqrt(mpc(d))
        lint = 4 * root_d * alg
        bound = lint / (2 * root_d)
        bound_alt = lint / (4 * root_d)
        if not abs(bound - g2c) <= ctx.tol * (1 + abs(bound)):
            raise PrecisionUnderflowError(
                "upper bound and weight-2 generator disagree at class "
                "number one; raise the precision")

    if rec.ok:
        frac = rec.value
        if frac.denominator > 1:
            note = (f"the generator {frac} is a unit at every prime q "
                    f"outside {_prime_factors(frac.denominator)}, so the "
                    f"denominator ideal is trivial away from the excluded "
                    f"primes")
        else:
            note = f"the generator {frac} is integral"
    else:
        note = "weight-2 value not recognized at this precision"

    return DenominatorReport(
        d_K=d,
        g2_value=rec,
        denominator_generator=rec,
        excluded_primes=_prime_factors(2 * d),
        bound=bound,
        bound_alt=bound_alt,
        note=note,
    )
