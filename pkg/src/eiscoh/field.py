"""Exact arithmetic in imaginary quadratic fields.

Everything in this module is rational arithmetic: elements are stored as
integer triples, ideals as Hermite-normalized integer bases, and the class
group is built by enumerating reduced binary quadratic forms.  The only
floating-point surface is ``embed`` / ``d_pairing`` / ``QuadElem.as_complex``,
which hand exact data to the analytic layer at a chosen precision.

Conventions fixed here and relied on elsewhere:

* ``omega = (d + sqrt(d))/2`` generates the ring of integers for every
  fundamental discriminant ``d < 0``; ``sqrt(d)`` is the root with positive
  imaginary part.
* A fractional ideal is stored as ``(den, A, B, C)`` for the basis
  ``b1 = A/den``, ``b2 = (B + C*omega)/den`` with ``C | A``, ``C | B``,
  ``A*C | N(B + C*omega)``, ``0 <= B < A`` and ``gcd(den, A, B, C) = 1``.
  Equal ideals therefore have identical stored data.
* The stored basis order has ``Im(b1 * conj(b2)) < 0``, which makes the
  pairing ``b1*conj(b2) - conj(b1)*b2`` equal ``-sqrt(d) * N(a)`` on the
  nose; ``embed`` swaps the pair so the analytic layer sees an oriented
  basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import gmpy2
from gmpy2 import mpc, mpfr

from .kronecker import Coords, Lattice
from .numerics import DomainError, PrecisionContext, RandomStream, UnsupportedFieldError

Form = tuple[int, int, int]


def _is_squarefree(n: int) -> bool:
    n = abs(n)
    if n == 0:
        return False
    f = 2
    while f * f <= n:
        if n % (f * f) == 0:
            return False
        if n % f == 0:
            n //= f
        f += 1 if f == 2 else 2
    return True


def is_fundamental(d: int) -> bool:
    """True when ``d`` is a fundamental discriminant (of either sign)."""
    if d == 0 or d == 1:
        return False
    if d % 4 == 1:
        return _is_squarefree(d)
    if d % 4 == 0:
        m = d // 4
        return m % 4 in (2, 3) and _is_squarefree(m)
    return False


def normalize_discriminant(value: int) -> int:
    """Map a squarefree label or a discriminant to the fundamental discriminant.

    ``-7 -> -7`` (already fundamental), ``-2 -> -8`` (squarefree label for
    the even-discriminant field), ``-8 -> -8``.  Rejects anything that is
    neither a fundamental discriminant nor a squarefree integer.
    """
    if value >= 0:
        raise UnsupportedFieldError(f"need a negative value, got {value}")
    if is_fundamental(value):
        return value
    if _is_squarefree(value) and value % 4 in (2, 3):
        return 4 * value
    raise UnsupportedFieldError(
        f"{value} is neither a fundamental discriminant nor squarefree")


def _check_disc(d: int) -> None:
    if d >= 0 or not is_fundamental(d):
        raise UnsupportedFieldError(
            f"need a fundamental discriminant < 0, got {d}")


def _omega_norm(d: int) -> int:
    # omega * conj(omega) for omega = (d + sqrt(d))/2
    return d * (d - 1) // 4


@dataclass(frozen=True)
class QuadElem:
    """The element ``(x + y*omega)/den`` of the field with discriminant ``disc``.

    Stored in lowest terms with ``den >= 1``; equality and hashing are
    therefore structural.
    """

    disc: int
    x: int
    y: int
    den: int = 1

    def __post_init__(self):
        _check_disc(self.disc)
        if self.den == 0:
            raise DomainError("zero denominator")
        g = math.gcd(math.gcd(self.x, self.y), self.den)
        if self.den < 0:
            g = -g
        if g != 1:
            object.__setattr__(self, "x", self.x // g)
            object.__setattr__(self, "y", self.y // g)
            object.__setattr__(self, "den", self.den // g)

    def _coerce(self, other) -> Optional["QuadElem"]:
        if isinstance(other, QuadElem):
            if other.disc != self.disc:
                raise DomainError("elements of different fields")
            return other
        if isinstance(other, int):
            return QuadElem(self.disc, other, 0)
        if isinstance(other, Fraction):
            return QuadElem(self.disc, other.numerator, 0, other.denominator)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return QuadElem(self.disc, self.x * o.den + o.x * self.den,
                        self.y * o.den + o.y * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self):
        return QuadElem(self.disc, -self.x, -self.y, self.den)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d, n0 = self.disc, _omega_norm(self.disc)
        x = self.x * o.x - n0 * self.y * o.y
        y = self.x * o.y + self.y * o.x + d * self.y * o.y
        return QuadElem(self.disc, x, y, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def conjugate(self) -> "QuadElem":
        return QuadElem(self.disc, self.x + self.y * self.disc, -self.y, self.den)

    def norm(self) -> Fraction:
        n0 = _omega_norm(self.disc)
        num = self.x * self.x + self.disc * self.x * self.y + n0 * self.y * self.y
        return Fraction(num, self.den * self.den)

    def trace(self) -> Fraction:
        return Fraction(2 * self.x + self.disc * self.y, self.den)

    def inverse(self) -> "QuadElem":
        n = self.norm()
        if n == 0:
            raise DomainError("division by zero")
        c = self.conjugate()
        return QuadElem(self.disc, c.x * n.denominator, c.y * n.denominator,
                        c.den * n.numerator)

    @property
    def is_zero(self) -> bool:
        return self.x == 0 and self.y == 0

    @property
    def is_integral(self) -> bool:
        return self.den == 1

    def coords(self) -> tuple[Fraction, Fraction]:
        """Coordinates ``(x/den, y/den)`` with respect to the basis ``(1, omega)``."""
        return Fraction(self.x, self.den), Fraction(self.y, self.den)

    def as_complex(self, ctx: PrecisionContext) -> mpc:
        """Numeric value under the embedding with ``Im(sqrt(disc)) > 0``."""
        with ctx.working():
            rt = mpc(0, gmpy2.sqrt(mpfr(-self.disc)))
            omega = (self.disc + rt) / 2
            return (self.x + self.y * omega) / self.den

    def __str__(self) -> str:
        if self.y == 0:
            body = str(self.x)
        elif self.x == 0:
            body = f"{self.y}*w" if self.y not in (1, -1) else ("w" if self.y == 1 else "-w")
        else:
            sign = "+" if self.y > 0 else "-"
            ay = abs(self.y)
            body = f"{self.x} {sign} {ay}*w" if ay != 1 else f"{self.x} {sign} w"
        return body if self.den == 1 else f"({body})/{self.den}"


def _hnf_from_rows(rows: Sequence[tuple[int, int]]) -> tuple[int, int, int]:
    """Hermite form (A, B, C) of the lattice spanned by integer rows (x, y).

    The result describes the basis ``(A, 0)``, ``(B, C)`` with ``A, C > 0``
    and ``0 <= B < A``.  Raises if the rows do not span a rank-2 lattice.
    """
    pivot = None
    for x, y in rows:
        if y == 0:
            continue
        if pivot is None:
            pivot = (x, y)
            continue
        g, s, t = gmpy2.gcdext(pivot[1], y)
        pivot = (int(s) * pivot[0] + int(t) * x, int(g))
    if pivot is None:
        raise DomainError("generators span a rank < 2 lattice")
    if pivot[1] < 0:
        pivot = (-pivot[0], -pivot[1])
    c = pivot[1]
    a = 0
    for x, y in rows:
        a = math.gcd(a, x - (y // c) * pivot[0])
    if a == 0:
        raise DomainError("generators span a rank < 2 lattice")
    return a, pivot[0] % a, c


@dataclass(frozen=True)
class FracIdeal:
    """Fractional ideal with basis ``A/den`` and ``(B + C*omega)/den``.

    The stored data is the unique Hermite normalization described in the
    module docstring, so ``==`` is ideal equality.
    """

    disc: int
    den: int
    num_a: int
    num_b: int
    num_c: int

    def __post_init__(self):
        _check_disc(self.disc)
        a, b, c, den = self.num_a, self.num_b, self.num_c, self.den
        if den < 1 or a < 1 or c < 1 or not 0 <= b < a:
            raise DomainError("ideal data out of normal form")
        if a % c or b % c:
            raise DomainError("basis is not stable under omega")
        n_b2 = b * b + self.disc * b * c + _omega_norm(self.disc) * c * c
        if n_b2 % (a * c):
            raise DomainError("basis is not stable under omega")
        if math.gcd(math.gcd(den, a), math.gcd(b, c)) != 1:
            raise DomainError("ideal data not in lowest terms")

    @staticmethod
    def from_generators(disc: int, gens: Iterable[QuadElem]) -> "FracIdeal":
        """The fractional O-ideal generated by ``gens`` (not all zero)."""
        omega = QuadElem(disc, 0, 1)
        full = []
        for g in gens:
            if g.disc != disc:
                raise DomainError("generator from a different field")
            if not g.is_zero:
                full.extend((g, g * omega))
        if not full:
            raise DomainError("no nonzero generators")
        den = math.lcm(*(g.den for g in full))
        rows = [(g.x * (den // g.den), g.y * (den // g.den)) for g in full]
        a, b, c = _hnf_from_rows(rows)
        g = math.gcd(math.gcd(den, a), math.gcd(b, c))
        return FracIdeal(disc, den // g, a // g, b // g, c // g)

    @staticmethod
    def unit_ideal(disc: int) -> "FracIdeal":
        return FracIdeal(disc, 1, 1, 0, 1)

    @staticmethod
    def principal(alpha: QuadElem) -> "FracIdeal":
        return FracIdeal.from_generators(alpha.disc, [alpha])

    def basis(self) -> tuple[QuadElem, QuadElem]:
        """The stored basis ``(A/den, (B + C*omega)/den)``, rational part first."""
        return (QuadElem(self.disc, self.num_a, 0, self.den),
                QuadElem(self.disc, self.num_b, self.num_c, self.den))

    def norm(self) -> Fraction:
        return Fraction(self.num_a * self.num_c, self.den * self.den)

    @property
    def is_integral(self) -> bool:
        return self.den == 1

    def __mul__(self, other):
        if isinstance(other, FracIdeal):
            if other.disc != self.disc:
                raise DomainError("ideals of different fields")
            b1, b2 = self.basis()
            c1, c2 = other.basis()
            return FracIdeal.from_generators(
                self.disc, [b1 * c1, b1 * c2, b2 * c1, b2 * c2])
        if isinstance(other, (int, Fraction, QuadElem)):
            b1, b2 = self.basis()
            return FracIdeal.from_generators(self.disc, [b1 * other, b2 * other])
        return NotImplemented

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, FracIdeal):
            return NotImplemented
        if other.disc != self.disc:
            raise DomainError("ideals of different fields")
        return FracIdeal.from_generators(self.disc, [*self.basis(), *other.basis()])

    def conjugate(self) -> "FracIdeal":
        b1, b2 = self.basis()
        return FracIdeal.from_generators(self.disc, [b1, b2.conjugate()])

    def inverse(self) -> "FracIdeal":
        n = self.norm()
        return self.conjugate() * Fraction(n.denominator, n.numerator)

    def coords_of(self, e: QuadElem) -> tuple[Fraction, Fraction]:
        """Exact coordinates ``(u, v)`` with ``e = u*b1 + v*b2``."""
        if e.disc != self.disc:
            raise DomainError("element from a different field")
        v = Fraction(e.y * self.den, e.den * self.num_c)
        u = (Fraction(e.x * self.den, e.den) - v * self.num_b) / self.num_a
        return u, v

    def contains(self, e: QuadElem) -> bool:
        u, v = self.coords_of(e)
        return u.denominator == 1 and v.denominator == 1

    def primitive_part(self) -> tuple["FracIdeal", Fraction]:
        """Pair ``(p, q)`` with ``self = q * p`` and ``p`` integral primitive."""
        q = Fraction(self.num_c, self.den)
        a0 = self.num_a // self.num_c
        return FracIdeal(self.disc, 1, a0, self.num_b // self.num_c, 1), q

    def form(self) -> Form:
        """The binary quadratic form of discriminant ``disc`` attached to this ideal.

        The sign convention ``b = -(2*B0 + d)`` makes ideal multiplication
        match form composition.
        """
        prim, _ = self.primitive_part()
        a0, b0 = prim.num_a, prim.num_b
        b = -(2 * b0 + self.disc)
        c = (b * b - self.disc) // (4 * a0)
        return a0, b, c

    def __str__(self) -> str:
        b1, b2 = self.basis()
        return f"[{b1}, {b2}]"


def reduce_form(f: Form) -> Form:
    """Gauss reduction of a positive definite form."""
    a, b, c = f
    while True:
        r = b % (2 * a)
        if r > a:
            r -= 2 * a
        c = (r * r - (b * b - 4 * a * c)) // (4 * a)
        b = r
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return a, b, c


def _reduced_forms(d: int) -> list[Form]:
    """All reduced primitive positive definite forms of discriminant ``d``."""
    forms = []
    a = 1
    while 3 * a * a <= -d:
        for b in range(-a + 1, a + 1):
            if (b * b - d) % (4 * a):
                continue
            c = (b * b - d) // (4 * a)
            if c < a or (b < 0 and a == c):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                forms.append((a, b, c))
        a += 1
    forms.sort(key=lambda f: (f[0] != 1, f))
    return forms


def _ideal_of_form(d: int, f: Form) -> FracIdeal:
    a, b, _ = f
    b0 = ((-b - d) // 2) % a
    return FracIdeal(d, 1, a, b0, 1)


def _principal_solutions(form: Form) -> Optional[tuple[int, int]]:
    """An integer point with ``form(m, n) = 1``, or None."""
    a, b, c = form
    d = b * b - 4 * a * c
    n_max = math.isqrt(4 * a // -d)
    for n in range(-n_max, n_max + 1):
        disc_m = d * n * n + 4 * a
        if disc_m < 0:
            continue
        r = math.isqrt(disc_m)
        if r * r != disc_m:
            continue
        for sign in ((r,) if r == 0 else (r, -r)):
            num = -b * n + sign
            if num % (2 * a) == 0:
                return num // (2 * a), n
    return None


@dataclass(frozen=True)
class FieldContext:
    """Immutable bundle for one imaginary quadratic field.

    ``class_reps[i]`` is an integral ideal in the class of ``forms[i]``;
    ``class_reps[0]`` is the ring of integers.  Representatives are chosen so
    that conjugation permutes them: the representative of the conjugate class
    is the conjugate ideal, and self-conjugate classes get ideals fixed by
    conjugation.
    """

    d_K: int
    h: int
    forms: tuple[Form, ...]
    class_reps: tuple[FracIdeal, ...]
    class_structure: tuple[tuple[int, FracIdeal], ...]
    _form_index: dict = field(repr=False, hash=False, compare=False, default=None)

    @property
    def omega(self) -> QuadElem:
        return QuadElem(self.d_K, 0, 1)

    @property
    def one(self) -> QuadElem:
        return QuadElem(self.d_K, 1, 0)

    @property
    def ring(self) -> FracIdeal:
        return self.class_reps[0]

    def element(self, x=0, y=0, den: int = 1) -> QuadElem:
        """The element (x + y omega)/den; x and y may be int or Fraction."""
        x, y = Fraction(x), Fraction(y)
        lcm = den * (x.denominator * y.denominator //
                     math.gcd(x.denominator, y.denominator))
        return QuadElem(self.d_K, int(x * lcm // den), int(y * lcm // den), lcm)

    def class_index(self, a: FracIdeal) -> int:
        if a.disc != self.d_K:
            raise DomainError("ideal from a different field")
        return self._form_index[reduce_form(a.form())]

    def generator_of(self, a: FracIdeal) -> Optional[QuadElem]:
        """A generator when ``a`` is principal, else None."""
        prim, q = a.primitive_part()
        sol = _principal_solutions((prim.num_a, 2 * prim.num_b + self.d_K,
                                    int(QuadElem(self.d_K, prim.num_b, 1).norm())
                                    // prim.num_a))
        if sol is None:
            return None
        m, n = sol
        alpha = self.element(m * prim.num_a + n * prim.num_b, n)
        return alpha * q


def _ramified_prime_ideals(d: int) -> list[FracIdeal]:
    ideals = []
    n = -d
    p = 2
    while p * p <= n:
        if n % p == 0:
            ideals.append(_prime_above(d, p))
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        ideals.append(_prime_above(d, n))
    return ideals


def _prime_above(d: int, p: int) -> FracIdeal:
    for b0 in range(p):
        if int(QuadElem(d, b0, 1).norm()) % p == 0:
            cand = FracIdeal(d, 1, p, b0, 1)
            if cand.norm() == p:
                return cand
    raise DomainError(f"{p} is not ramified in discriminant {d}")


def make_field(d_K: int) -> FieldContext:
    """Build the field context for a fundamental discriminant ``d_K < 0``.

    The class group comes from exhaustive enumeration of reduced forms; the
    cyclic decomposition is found from element orders (rank at most two,
    which covers every discriminant at desk scale; larger ranks raise).
    """
    _check_disc(d_K)
    forms = tuple(_reduced_forms(d_K))
    h = len(forms)
    index = {f: i for i, f in enumerate(forms)}

    def mul(i: int, j: int) -> int:
        prod = _ideal_of_form(d_K, forms[i]) * _ideal_of_form(d_K, forms[j])
        return index[reduce_form(prod.form())]

    def order_of(i: int) -> int:
        k, acc = 1, i
        while acc != 0:
            acc = mul(acc, i)
            k += 1
        return k

    orders = [order_of(i) for i in range(h)]
    structure: tuple[tuple[int, FracIdeal], ...]
    n1 = max(orders)
    g1 = orders.index(n1)
    if n1 == h:
        structure = () if h == 1 else ((n1, _ideal_of_form(d_K, forms[g1])),)
    else:
        cyc1 = set()
        acc = g1
        while acc not in cyc1:
            cyc1.add(acc)
            acc = mul(acc, g1)
        structure = ()
        for g2 in range(1, h):
            n2 = orders[g2]
            if n1 * n2 != h:
                continue
            cyc2 = set()
            acc = g2
            while acc not in cyc2:
                cyc2.add(acc)
                acc = mul(acc, g2)
            if cyc1 & cyc2 == {0}:
                structure = ((n1, _ideal_of_form(d_K, forms[g1])),
                             (n2, _ideal_of_form(d_K, forms[g2])))
                break
        if not structure:
            raise UnsupportedFieldError(
                f"class group of {d_K} needs more than two generators")

    reps: list[Optional[FracIdeal]] = [None] * h
    reps[0] = FracIdeal.unit_ideal(d_K)
    inv = {i: index[reduce_form((f[0], -f[1], f[2]))] for i, f in enumerate(forms)}
    ambiguous_needed = {i for i in range(1, h) if inv[i] == i}
    if ambiguous_needed:
        primes = _ramified_prime_ideals(d_K)
        for mask in range(1, 1 << len(primes)):
            cand = FracIdeal.unit_ideal(d_K)
            for bit, pr in enumerate(primes):
                if mask >> bit & 1:
                    cand = cand * pr
            i = index[reduce_form(cand.form())]
            if i in ambiguous_needed and reps[i] is None:
                reps[i] = cand
        if any(reps[i] is None for i in ambiguous_needed):
            raise UnsupportedFieldError(
                f"no ambiguous ideal found for some class of {d_K}")
    for i, f in enumerate(forms):
        if reps[i] is not None:
            continue
        if f[1] > 0:
            reps[i] = _ideal_of_form(d_K, f)
            reps[inv[i]] = reps[i].conjugate()

    return FieldContext(d_K, h, forms, tuple(reps), structure, index)


def residue_system(c: QuadElem, a: FracIdeal) -> list[QuadElem]:
    """Coset representatives of ``a / c*a`` (exactly ``|N(c)|`` of them).

    Built from the Hermite form of the multiplication-by-``c`` matrix on the
    stored basis of ``a``.
    """
    if c.disc != a.disc:
        raise DomainError("element and ideal from different fields")
    if c.is_zero:
        raise DomainError("need c != 0")
    if not c.is_integral:
        raise DomainError("need c in the ring of integers")
    b1, b2 = a.basis()
    rows = []
    for e in (c * b1, c * b2):
        u, v = a.coords_of(e)
        rows.append((int(u), int(v)))
    # lower-triangular Hermite data of the row lattice: (e1, 0), (*, e2)
    e1, _, e2 = _hnf_from_rows(rows)
    return [b1 * i + b2 * j for i in range(e1) for j in range(e2)]


def embed(a: FracIdeal, ctx: PrecisionContext) -> Lattice:
    """The ideal as an oriented complex lattice at the context precision."""
    b1, b2 = a.basis()
    with ctx.working():
        return Lattice(b2.as_complex(ctx), b1.as_complex(ctx))


def lattice_coords(e: QuadElem, a: FracIdeal) -> Coords:
    """Exact coordinates of ``e`` in the basis of ``embed(a, ...)``.

    ``embed`` swaps the stored basis pair to orient it, so the coordinate
    pair from ``coords_of`` swaps too.
    """
    u, v = a.coords_of(e)
    return v, u


def d_pairing(a: FracIdeal, ctx: PrecisionContext) -> mpc:
    """The pairing ``b1*conj(b2) - conj(b1)*b2`` of the stored basis.

    Equals ``-sqrt(d_K) * N(a)`` exactly, with ``sqrt(d_K)`` the root with
    positive imaginary part.
    """
    n = a.norm()
    with ctx.working():
        rt = gmpy2.sqrt(mpfr(-a.disc))
        return mpc(0, -rt * n.numerator / n.denominator)


@dataclass(frozen=True)
class GammaMatrix:
    """A matrix in SL2 of the ring of integers."""

    a: QuadElem
    b: QuadElem
    c: QuadElem
    d: QuadElem

    def __post_init__(self):
        discs = {e.disc for e in (self.a, self.b, self.c, self.d)}
        if len(discs) != 1:
            raise DomainError("entries from different fields")
        if not all(e.is_integral for e in (self.a, self.b, self.c, self.d)):
            raise DomainError("entries must be integral")
        det = self.a * self.d - self.b * self.c
        if det != QuadElem(self.a.disc, 1, 0):
            raise DomainError("determinant must be 1")

    @property
    def disc(self) -> int:
        return self.a.disc

    def __matmul__(self, other: "GammaMatrix") -> "GammaMatrix":
        return GammaMatrix(self.a * other.a + self.b * other.c,
                           self.a * other.b + self.b * other.d,
                           self.c * other.a + self.d * other.c,
                           self.c * other.b + self.d * other.d)

    def __str__(self) -> str:
        return f"[[{self.a}, {self.b}], [{self.c}, {self.d}]]"
