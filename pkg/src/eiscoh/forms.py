"""Fourier evaluation of the weight-two Eisenstein one-form components.

The completed series attached to a Hecke character of infinity type (-2, 0)
has, at each cusp, dz and dzbar components with explicit Fourier expansions:
a constant term built from continued lattice sums plus a K-Bessel tail over
pairs (c, d) drawn from an ideal and its trace-dual lattice.  This module
evaluates both components, extracts boundary restriction vectors in the
(omega, conj omega) frame of a cusp, and checks the linear relation
expressing the completed form in the basis of class-indexed forms.

Conventions fixed here, chosen so the constant terms, the restriction
vectors, and the basis relation are mutually consistent and representative
independent:

* the area pairing of an embedded ideal is the oriented one, 2i times the
  covolume (equivalently i sqrt(|d_K|) N(a)); with the other sign the dzbar
  constant term comes out with the wrong sign;
* the prefactor N(a)^s / chi(a) multiplies the whole expansion, Bessel tail
  included, not just the constant term;
* the basis relation carries no unit-count division, and the dzbar
  coefficient of a completed-form restriction uses the character at the
  conjugate cusp representative.  Jointly these make the class-indexed
  restriction vectors exactly (delta, -delta) and every coefficient
  invariant under rescaling the cusp representative.

The dv component has no such expansion and is not exposed; consequently no
quadrature of the one-form happens here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import gmpy2
from gmpy2 import mpc, mpfr

from .field import FracIdeal, embed
from .hecke import HeckeCharacter, g2_ideal
from .kronecker import (
    KroneckerParams,
    Lattice,
    _enumerate_disk,
    _recip_gamma,
    kronecker_G,
)
from .numerics import (
    DomainError,
    PrecisionContext,
    PrecisionUnderflowError,
    bessel_k,
)

__all__ = [
    "H3Point",
    "RestrictionVector",
    "dual_lattice",
    "ehat_z_component",
    "ehat_zbar_component",
    "restriction_vector",
    "ehat_from_E_relation_check",
]

_ZERO_COORDS = (Fraction(0), Fraction(0))

# Cap on Bessel summands per component evaluation; hitting it means v is too
# small for the requested budget, not that more terms would help.
_MAX_PAIRS = 200_000


@dataclass(frozen=True)
class H3Point:
    """Upper half-space point z + jv with z horizontal and v > 0."""

    z: mpc
    v: mpfr

    def __post_init__(self):
        if not mpfr(self.v) > 0:
            raise DomainError(f"need v > 0, got v = {self.v}")


@dataclass(frozen=True)
class RestrictionVector:
    """Coefficients of a boundary restriction in a cusp's one-form frame."""

    coeff_dz: mpc
    coeff_dzbar: mpc
    cusp_class: int


def dual_lattice(a: FracIdeal | Lattice, ctx: PrecisionContext) -> Lattice:
    """Dual of ``a`` under the pairing (c, d) -> 2 Re(c d).

    The pairing is bilinear (no conjugation), so duals scale contravariantly:
    the dual of alpha L is (1/alpha) times the dual of L.  The dual basis is
    read off the inverse of the real Gram matrix of the embedded basis; for a
    fractional ideal it coincides with the embedding of the inverse ideal
    divided by the square root of the discriminant.
    """
    with ctx.working():
        L = a if isinstance(a, Lattice) else embed(a, ctx)
        w1, w2 = L.w1, L.w2
        g11 = 2 * (w1 * w1).real
        g12 = 2 * (w1 * w2).real
        g22 = 2 * (w2 * w2).real
        det = g11 * g22 - g12 * g12
        if not abs(det) > 0:
            raise DomainError("degenerate basis: Gram matrix is singular")
        v1 = (g22 * w1 - g12 * w2) / det
        v2 = (g11 * w2 - g12 * w1) / det
        if (v1 * (v2).conjugate()).imag < 0:
            v1, v2 = v2, v1
        return Lattice(v1, v2)


def _bessel_tail(L: Lattice, dual: Lattice, s: mpc, u: H3Point, pmax: mpfr,
                 zbar: bool, ctx: PrecisionContext) -> mpc:
    """Sum of the Bessel terms over pairs (c, d) with 0 < |cd| <= pmax.

    The dz weight is d^2 |d/c|^(s-1) K_(s-1); the dzbar weight is
    conj(c)^2 |d/c|^(s+1) K_(s+1).  Both carry the additive character
    exp(2 pi i (w + conj w)) at w = c d z, a unit-modulus phase.
    """
    four_pi = 4 * gmpy2.const_pi()
    v = mpfr(u.v)
    z = mpc(u.z)
    nu = s + 1 if zbar else s - 1
    shift = s + 1 if zbar else s - 1
    total = mpc(0)
    if pmax < L.shortest_vec * dual.shortest_vec:
        return total
    # every c in the outer disk admits at least the two shortest duals, so
    # the disk area already lower-bounds the pair count
    outer = pmax / dual.shortest_vec
    if gmpy2.const_pi() * outer * outer / L.covolume > _MAX_PAIRS:
        raise PrecisionUnderflowError(
            f"Bessel tail needs more than {_MAX_PAIRS} terms at v = {v}; "
            f"raise v or lower the budget")
    count = 0
    for mc, nc, c in _enumerate_disk(L, mpc(0), pmax / dual.shortest_vec):
        if mc == 0 and nc == 0:
            continue
        ac = abs(c)
        rad = pmax / ac
        if rad < dual.shortest_vec:
            continue
        weight_c = (c).conjugate() ** 2 if zbar else None
        for md, nd, d in _enumerate_disk(dual, mpc(0), rad):
            if md == 0 and nd == 0:
                continue
            count += 1
            if count > _MAX_PAIRS:
                raise PrecisionUnderflowError(
                    f"Bessel tail needs more than {_MAX_PAIRS} terms at "
                    f"v = {v}; raise v or lower the budget")
            ad = abs(d)
            kval = bessel_k(nu, four_pi * ac * ad * v, ctx)
            weight = weight_c if zbar else d * d
            weight = weight * gmpy2.exp(shift * gmpy2.log(ad / ac))
            phase = four_pi * (c * d * z).real
            total += weight * kval * mpc(gmpy2.cos(phase), gmpy2.sin(phase))
    return total


def _component(chi: HeckeCharacter, a: FracIdeal, u: H3Point, s, zbar: bool,
               n_terms: int | None, ctx: PrecisionContext) -> mpc:
    if a.disc != chi.field.d_K:
        raise DomainError("ideal and character come from different fields")
    with ctx.working():
        s = mpc(s)
        L = embed(a, ctx)
        v = mpfr(u.v)
        nrm = a.norm()
        log_n = gmpy2.log(mpfr(nrm.numerator) / mpfr(nrm.denominator))
        prefactor = gmpy2.exp(s * log_n) / chi.value(a, ctx)
        if zbar:
            bare = kronecker_G(
                KroneckerParams(s=s, k=2, p=mpc(0), q=mpc(0), L=L,
                                p_coords=_ZERO_COORDS, q_coords=_ZERO_COORDS),
                ctx)
            constant = -(gmpy2.const_pi() / L.covolume) * bare
        else:
            bare = kronecker_G(
                KroneckerParams(s=s + 1, k=2, p=mpc(0), q=mpc(0), L=L,
                                p_coords=_ZERO_COORDS, q_coords=_ZERO_COORDS),
                ctx)
            constant = gmpy2.exp(s * gmpy2.log(v)) * bare
        budget = ctx.bits if n_terms is None else n_terms
        tail = mpc(0)
        if budget > 0:
            pmax = mpfr(budget) * gmpy2.log(mpfr(2)) / (4 * gmpy2.const_pi() * v)
            raw = _bessel_tail(L, dual_lattice(a, ctx), s, u, pmax, zbar, ctx)
            # 2i/(area pairing) = 1/covolume, so the tail prefactor is real
            tail = (gmpy2.exp((s + 2) * gmpy2.log(2 * gmpy2.const_pi()))
                    * v * _recip_gamma(s + 2, ctx) / L.covolume) * raw
        return prefactor * (constant - tail)


def ehat_z_component(chi: HeckeCharacter, a: FracIdeal, u: H3Point, s,
                     ctx: PrecisionContext, n_terms: int | None = None) -> mpc:
    """The dz component of the completed form at u, continued in s.

    ``n_terms`` is the Bessel cutoff budget in bits: pairs whose Bessel
    argument exceeds n_terms * log 2 are dropped.  None uses the context
    precision; 0 keeps only the constant term.  At s = 0 the constant term
    is G_2(a) / chi(a).
    """
    return _component(chi, a, u, s, False, n_terms, ctx)


def ehat_zbar_component(chi: HeckeCharacter, a: FracIdeal, u: H3Point, s,
                        ctx: PrecisionContext, n_terms: int | None = None) -> mpc:
    """The dzbar component of the completed form at u, continued in s.

    At s = 0 the constant term is -G_2(a) / chi(a): the continued sum at
    shifted parameter, times the real prefactor pi / covolume, collapses to
    the weight-two value with a sign.
    """
    return _component(chi, a, u, s, True, n_terms, ctx)


def restriction_vector(chi: HeckeCharacter, a: FracIdeal, cusp_class: int,
                       ctx: PrecisionContext, family: str = "ehat",
                       rep: FracIdeal | None = None) -> RestrictionVector:
    """Boundary restriction at the cusp of class ``cusp_class``.

    family "ehat" gives the completed form's coefficients
    (chi(a_c a^-1) G_2(a a_c^-1), -chi(conj(a_c) a^-1) G_2(a conj(a_c)^-1));
    family "e" gives the class-indexed basis form's exact coefficients
    (delta_[a],[a_c], -delta_[a],[conj a_c]).  ``rep`` overrides the stored
    representative of the cusp class; any ideal in the same class gives the
    same vector, by the cancellation between character and weight-two
    homogeneity.
    """
    fld = chi.field
    if a.disc != fld.d_K:
        raise DomainError("ideal and character come from different fields")
    if not 0 <= cusp_class < fld.h:
        raise DomainError(f"cusp_class must index class_reps, got {cusp_class}")
    a_c = fld.class_reps[cusp_class] if rep is None else rep
    if rep is not None and fld.class_index(rep) != cusp_class:
        raise DomainError("rep is not in the requested ideal class")
    abar_c = a_c.conjugate()
    if family == "e":
        with ctx.working():
            ia = fld.class_index(a)
            dz = mpc(1 if ia == fld.class_index(a_c) else 0)
            dzbar = mpc(-1 if ia == fld.class_index(abar_c) else 0)
            return RestrictionVector(dz, dzbar, cusp_class)
    if family != "ehat":
        raise DomainError(f"family must be 'ehat' or 'e', got {family!r}")
    with ctx.working():
        inv = a.inverse()
        dz = chi.value(a_c * inv, ctx) * g2_ideal(a * a_c.inverse(), ctx)
        dzbar = -chi.value(abar_c * inv, ctx) * g2_ideal(a * abar_c.inverse(), ctx)
        return RestrictionVector(dz, dzbar, cusp_class)


def ehat_from_E_relation_check(chi: HeckeCharacter, a: FracIdeal,
                               ctx: PrecisionContext) -> mpfr:
    """Max residual of the completed-to-class-basis relation on restrictions.

    The completed form equals sum_i chi(a_i a^-1) G_2(a_i^-1 a) times the
    class-indexed form for a_i, with a_i running over class representatives.
    The class-indexed forms are not independently summable, so the identity
    is checked where it is linear and finite: on the restriction vectors at
    every cusp class.  Returns the largest coefficient residual.
    """
    fld = chi.field
    if a.disc != fld.d_K:
        raise DomainError("ideal and character come from different fields")
    with ctx.working():
        inv = a.inverse()
        coeffs = [chi.value(ai * inv, ctx) * g2_ideal(ai.inverse() * a, ctx)
                  for ai in fld.class_reps]
        worst = mpfr(0)
        for r in range(fld.h):
            lhs = restriction_vector(chi, a, r, ctx)
            rhs_dz = mpc(0)
            rhs_dzbar = mpc(0)
            for coeff, ai in zip(coeffs, fld.class_reps):
                evec = restriction_vector(chi, ai, r, ctx, family="e")
                rhs_dz += coeff * evec.coeff_dz
                rhs_dzbar += coeff * evec.coeff_dzbar
            worst = max(worst, abs(lhs.coeff_dz - rhs_dz),
                        abs(lhs.coeff_dzbar - rhs_dzbar))
        return worst
