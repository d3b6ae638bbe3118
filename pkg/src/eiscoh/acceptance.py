"""End-to-end checks covering every advertised numerical guarantee.

Each criterion reruns a slice of the public pipeline from scratch and
reduces it to a single pass/fail verdict with a deterministic detail
string, so the command-line verifier can print one line per criterion
and produce byte-identical reports for a fixed seed and precision.

The checks are intentionally redundant with the unit tests: they favor
whole-pipeline recomputation over clever shortcuts, and they never read
an expected value out of the code path they are checking.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

import gmpy2
from gmpy2 import mpc, mpfr

from .denominator import denominator_report, group_determinant_residual
from .denominator import dedekind_determinant_check
from .field import embed, make_field
from .forms import (
    H3Point,
    ehat_from_E_relation_check,
    ehat_z_component,
    ehat_zbar_component,
)
from .hecke import L_alg_int, build_character, g2_ideal
from .kronecker import (
    KroneckerParams,
    G_k_value,
    Lattice,
    completed_E,
    kronecker_G,
    theta_pairing,
)
from .numerics import DomainError, PrecisionContext, RandomStream
from .periods import G2_canonical, g2_g3, j_invariant, period_data
from .recognition import RecognitionKind, recognize_in_O, recognize_rational
from .sczech import random_gamma, sczech_phi

__all__ = [
    "CRITERIA",
    "CriterionResult",
    "random_coords",
    "random_lattice",
    "random_s",
    "run_criterion",
    "run_suite",
]

_H1_FIELDS = (-7, -8, -11, -19, -43, -67, -163)

_WEIGHT2_TABLE = {
    -7: Fraction(1, 2),
    -8: Fraction(1, 2),
    -11: Fraction(2),
    -19: Fraction(2),
    -43: Fraction(12),
    -67: Fraction(38),
    -163: Fraction(724),
}

# ---------------------------------------------------------------------------
# deterministic draws shared with the property tests

def random_lattice(rng: RandomStream, ctx: PrecisionContext) -> Lattice:
    """Random oriented lattice: fundamental-strip tau, twisted and rescaled."""
    with ctx.working():
        tau = mpc(rng.uniform_in("-0.5", "0.5", ctx), rng.uniform_in("0.6", "2.0", ctx))
        scale = mpc(rng.uniform_in("0.5", "1.5", ctx), rng.uniform_in("-0.4", "0.4", ctx))
        # random small unimodular twist keeps the basis generic
        a = rng.int_range(-2, 2)
        n = rng.int_range(-2, 2)
        w1, w2 = tau + a, mpc(1)
        w1, w2 = w1, w2 + n * w1
        return Lattice(scale * w1, scale * w2)


def random_coords(rng: RandomStream, den_max: int = 12) -> tuple[Fraction, Fraction]:
    """Random rational coordinates that are not a lattice point."""
    while True:
        dx = rng.int_range(2, den_max)
        dy = rng.int_range(2, den_max)
        x = Fraction(rng.int_range(-2 * dx, 2 * dx), dx)
        y = Fraction(rng.int_range(-2 * dy, 2 * dy), dy)
        if x.denominator > 1 or y.denominator > 1:
            return (x, y)


def random_s(rng: RandomStream, ctx: PrecisionContext) -> mpc:
    """Random s in a box, bounded away from the continued-sum poles."""
    with ctx.working():
        while True:
            s = mpc(rng.uniform_in("-1.5", "2.5", ctx), rng.uniform_in("-1.5", "1.5", ctx))
            if abs(s) > mpfr("0.15") and abs(s - 1) > mpfr("0.15"):
                return s


# ---------------------------------------------------------------------------
# result plumbing

@dataclass(frozen=True)
class CriterionResult:
    """One criterion's verdict: a stable name, pass/fail, and a summary."""

    name: str
    passed: bool
    detail: str


def _fmt(x) -> str:
    """Short deterministic rendering of a magnitude (8 significant digits)."""
    return str(gmpy2.mpfr(x, 24))


def _rel(got, want, ctx) -> mpfr:
    """|got - want| / (1 + |got| + |want|) at working precision."""
    with ctx.working():
        return abs(mpc(got) - mpc(want)) / (1 + abs(mpc(got)) + abs(mpc(want)))


def _tolerance(exp10: int, ctx: PrecisionContext) -> mpfr:
    with ctx.working():
        return mpfr(10) ** exp10


# ---------------------------------------------------------------------------
# criteria

def _run_period_tables(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """g2/g3 of the rescaled ring lattice against the curve table, per field.

    The j-invariant of the unscaled ring lattice is compared against the
    rational j of the tabulated coefficients first, so the period that the
    table route solves for never enters its own verification.
    """
    t0 = time.monotonic()
    tol = _tolerance(-25, ctx)
    worst = mpfr(0)
    for d in _H1_FIELDS:
        data = period_data(d, ctx)
        ring = embed(make_field(d).ring, ctx)
        a, b = data.a_coeff, data.b_coeff
        with ctx.working():
            j_want = mpfr(1728 * Fraction(a) ** 3 / (Fraction(a) ** 3 - 27 * Fraction(b) ** 2))
        r_j = _rel(j_invariant(ring, ctx), j_want, ctx)
        with ctx.working():
            scaled = ring.scaled(data.Omega)
        g2s, g3s = g2_g3(scaled, ctx)
        with ctx.working():
            r_g2 = abs(g2s - a) / abs(mpfr(a))
            r_g3 = abs(g3s - b) / abs(mpfr(b))
            worst = max(worst, r_j, r_g2, r_g3)
    elapsed = time.monotonic() - t0
    in_budget = elapsed < 300 or ctx.bits > 384
    passed = bool(worst < tol) and in_budget
    detail = f"worst residual {_fmt(worst)} over {len(_H1_FIELDS)} fields"
    if not in_budget:
        detail += "; exceeded the 300 s budget"
    return CriterionResult("period-tables", passed, detail)


def _run_weight2_table(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Normalized weight-2 values against the class-number-one table."""
    tol = _tolerance(-25, ctx)
    worst = mpfr(0)
    all_exact = True
    for d in _H1_FIELDS:
        want = _WEIGHT2_TABLE[d]
        val = G2_canonical(d, ctx)
        with ctx.working():
            worst = max(worst, abs(val - mpfr(want.numerator) / want.denominator)
                        / abs(mpfr(want.numerator) / want.denominator))
        rec = recognize_rational(val, 1000, ctx)
        if rec.kind is not RecognitionKind.RATIONAL or rec.value != want:
            all_exact = False
    passed = bool(worst < tol) and all_exact
    detail = f"worst residual {_fmt(worst)}; exact recognition " + (
        "on all fields" if all_exact else "failed")
    return CriterionResult("weight2-table", passed, detail)


def _run_integral_multiple(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Twice the root-discriminant multiple of the weight-2 value lies in O.

    Recognition is repeated at doubled precision and must return the same
    ring element both times.
    """
    tol = _tolerance(-20, ctx)
    hi = ctx.with_bits(2 * ctx.bits)
    worst = mpfr(0)
    stable = True
    for d in _H1_FIELDS:
        found = []
        for c in (ctx, hi):
            val = G2_canonical(d, c)
            with c.working():
                x = 2 * gmpy2.sqrt(mpc(d)) * val
            rec = recognize_in_O(x, d, 10**6, c)
            if rec.kind is not RecognitionKind.QUAD_ELEM:
                stable = False
                break
            found.append(rec)
        else:
            if found[0].value != found[1].value:
                stable = False
            with ctx.working():
                worst = max(worst, mpfr(found[0].residual), mpfr(found[1].residual))
    passed = stable and bool(worst < tol)
    detail = f"worst residual {_fmt(worst)}; " + (
        "stable at both precisions" if stable else "recognition unstable")
    return CriterionResult("integral-multiple", passed, detail)


def _run_cocycle_additivity(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """The parabolic value is additive over 200 random pairs per field."""
    t0 = time.monotonic()
    tol = _tolerance(-25, ctx)
    worst = mpfr(0)
    pairs_per_field = 200
    for d in (-7, -8, -11):
        fld = make_field(d)
        base = (seed * 7 + 1) * 10**6 + abs(d) * 10**4
        done = 0
        draw = 0
        while done < pairs_per_field:
            g1 = random_gamma(fld, base + 2 * draw, 4, max_c_norm=500)
            g2 = random_gamma(fld, base + 2 * draw + 1, 4, max_c_norm=500)
            draw += 1
            prod = g1 @ g2
            if abs(prod.c.norm()) > 500:
                continue
            done += 1
            v1 = sczech_phi(g1, fld.ring, ctx).value
            v2 = sczech_phi(g2, fld.ring, ctx).value
            v12 = sczech_phi(prod, fld.ring, ctx).value
            with ctx.working():
                r = abs(v12 - v1 - v2) / (1 + abs(v1) + abs(v2))
                worst = max(worst, r)
    elapsed = time.monotonic() - t0
    in_budget = elapsed < 600 or ctx.bits > 384
    passed = bool(worst < tol) and in_budget
    detail = f"worst scaled defect {_fmt(worst)} over {3 * pairs_per_field} pairs"
    if not in_budget:
        detail += "; exceeded the 600 s budget"
    return CriterionResult("cocycle-additivity", passed, detail)


def _run_cocycle_integrality(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Twice the period-normalized value lies in O for 100 draws per field."""
    tol = _tolerance(-20, ctx)
    worst = mpfr(0)
    failures = 0
    per_field = 100
    for d in (-7, -11):
        fld = make_field(d)
        omega = period_data(d, ctx).Omega
        base = (seed * 7 + 2) * 10**6 + abs(d) * 10**4
        for i in range(per_field):
            g = random_gamma(fld, base + i, 4, max_c_norm=800)
            phi = sczech_phi(g, fld.ring, ctx).value
            with ctx.working():
                y = 2 * phi / omega**2
            rec = recognize_in_O(y, d, 10**6, ctx)
            if rec.kind is not RecognitionKind.QUAD_ELEM:
                failures += 1
                continue
            with ctx.working():
                worst = max(worst, mpfr(rec.residual))
    passed = failures == 0 and bool(worst < tol)
    detail = f"worst residual {_fmt(worst)} over {2 * per_field} draws"
    if failures:
        detail += f"; {failures} unrecognized values"
    return CriterionResult("cocycle-integrality", passed, detail)


def _run_functional_equation(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Completed sum at (s, p, q) against its reflection at (1-s, q, p)."""
    tol = _tolerance(-25, ctx)
    rng = RandomStream((seed * 7 + 3) * 10**6)
    worst = mpfr(0)
    draws = 30
    for _ in range(draws):
        lat = random_lattice(rng, ctx)
        pc = random_coords(rng)
        qc = random_coords(rng)
        s = random_s(rng, ctx)
        k = rng.int_range(0, 3)
        with ctx.working():
            p = lat.point(pc)
            q = lat.point(qc)
        lhs = completed_E(KroneckerParams(s, k, p, q, lat, pc, qc), ctx)
        with ctx.working():
            rhs = theta_pairing(p, q, pc, qc, lat) * completed_E(
                KroneckerParams(1 - s, k, q, p, lat, qc, pc), ctx)
            worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs) + abs(rhs)))
    passed = bool(worst < tol)
    detail = f"worst scaled defect {_fmt(worst)} over {draws} draws"
    return CriterionResult("functional-equation", passed, detail)


def _run_homogeneity(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Weight-k rescaling laws for the special values and the full sum."""
    tol = _tolerance(-25, ctx)
    rng = RandomStream((seed * 7 + 4) * 10**6)
    worst = mpfr(0)
    draws = 20
    for _ in range(draws):
        lat = random_lattice(rng, ctx)
        zc = random_coords(rng)
        with ctx.working():
            alpha = mpc(rng.uniform_in("0.4", "1.6", ctx),
                        rng.uniform_in("-0.9", "0.9", ctx))
            z = lat.point(zc)
            scaled = lat.scaled(alpha)
        for k in (1, 2, 3):
            with ctx.working():
                az = alpha * z
            lhs = G_k_value(k, az, scaled, ctx, z_coords=zc)
            base = G_k_value(k, z, lat, ctx, z_coords=zc)
            with ctx.working():
                rhs = alpha**-k * base
                worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs) + abs(rhs)))
        pc = random_coords(rng)
        qc = random_coords(rng)
        s = random_s(rng, ctx)
        k = rng.int_range(0, 3)
        with ctx.working():
            p, q = lat.point(pc), lat.point(qc)
            ap, aq = alpha * p, alpha * q
        lhs = kronecker_G(KroneckerParams(s, k, ap, aq, scaled, pc, qc), ctx)
        base = kronecker_G(KroneckerParams(s, k, p, q, lat, pc, qc), ctx)
        with ctx.working():
            mod = gmpy2.exp(-(2 * s + k) * gmpy2.log(abs(alpha)))
            rhs = alpha.conjugate()**k * mod * base
            worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs) + abs(rhs)))
    passed = bool(worst < tol)
    detail = f"worst scaled defect {_fmt(worst)} over {draws} draws"
    return CriterionResult("homogeneity", passed, detail)


def _run_lvalue_determinant(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Value-at-zero identities: h = 1 collapse, determinant factorization,
    and the finite-group determinant lemma on brute-forced cyclic groups."""
    tol_h1 = _tolerance(-25, ctx)
    tol_det = _tolerance(-20, ctx)
    tol_grp = _tolerance(-30, ctx)
    worst_h1 = mpfr(0)
    for d in _H1_FIELDS:
        fld = make_field(d)
        chi = build_character(fld, [], ctx)
        alg, _ = L_alg_int(chi, period_data(d, ctx), ctx)
        g2c = G2_canonical(d, ctx)
        with ctx.working():
            worst_h1 = max(worst_h1, abs(alg - g2c / 2) / (1 + abs(g2c)))
    worst_det = mpfr(0)
    for d in (-15, -23):
        fld = make_field(d)
        chi = build_character(fld, [0] * len(fld.class_structure), ctx)
        with ctx.working():
            worst_det = max(worst_det, mpfr(dedekind_determinant_check(chi, ctx)))
    rng = RandomStream((seed * 7 + 5) * 10**6)
    worst_grp = mpfr(0)
    for n in (2, 3):
        for _ in range(10):
            with ctx.working():
                vals = [mpc(mpfr(rng.int_range(-999, 999)),
                            mpfr(rng.int_range(-999, 999))) / 1024
                        for _ in range(n)]
            with ctx.working():
                worst_grp = max(worst_grp, mpfr(group_determinant_residual(vals, ctx)))
    passed = bool(worst_h1 < tol_h1) and bool(worst_det < tol_det) \
        and bool(worst_grp < tol_grp)
    detail = (f"h=1 residual {_fmt(worst_h1)}; factorization residual "
              f"{_fmt(worst_det)}; cyclic-group residual {_fmt(worst_grp)}")
    return CriterionResult("lvalue-determinant", passed, detail)


def _run_fourier_constants(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Constant terms of both components at a high section against the
    weight-2 value, with the exponential tail dropped."""
    tol = _tolerance(-20, ctx)
    worst = mpfr(0)
    for d in (-7, -11):
        fld = make_field(d)
        chi = build_character(fld, [], ctx)
        a = fld.ring
        with ctx.working():
            u = H3Point(mpc(mpfr("0.3"), mpfr("0.2")), mpfr(6))
            want = g2_ideal(a, ctx) / chi.value(a, ctx)
        got_z = ehat_z_component(chi, a, u, 0, ctx, n_terms=0)
        got_zbar = ehat_zbar_component(chi, a, u, 0, ctx, n_terms=0)
        with ctx.working():
            worst = max(worst, abs(got_z - want), abs(got_zbar + want))
    passed = bool(worst < tol)
    detail = f"worst constant-term defect {_fmt(worst)} at v = 6"
    return CriterionResult("fourier-constants", passed, detail)


def _run_restriction_relation(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Completed-to-class-basis relation on restriction vectors, h = 1 and 2."""
    tol = _tolerance(-20, ctx)
    worst = mpfr(0)
    fld = make_field(-7)
    chi = build_character(fld, [], ctx)
    with ctx.working():
        worst = max(worst, mpfr(ehat_from_E_relation_check(chi, fld.ring, ctx)))
    fld = make_field(-15)
    chi = build_character(fld, [0] * len(fld.class_structure), ctx)
    for rep in fld.class_reps:
        with ctx.working():
            worst = max(worst, mpfr(ehat_from_E_relation_check(chi, rep, ctx)))
    passed = bool(worst < tol)
    detail = f"worst coefficient residual {_fmt(worst)}"
    return CriterionResult("restriction-relation", passed, detail)


def _small_primes(n: int) -> tuple[int, ...]:
    out = []
    n = abs(n)
    p = 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return tuple(out)


def _run_denominator_report(ctx: PrecisionContext, seed: int) -> CriterionResult:
    """Report generator, excluded primes, and bound for every h = 1 field."""
    tol = _tolerance(-20, ctx)
    bad = []
    worst = mpfr(0)
    for d in _H1_FIELDS:
        rep = denominator_report(d, ctx)
        gen = rep.denominator_generator
        if gen.kind is not RecognitionKind.RATIONAL or gen.value != _WEIGHT2_TABLE[d]:
            bad.append(f"{d}: generator {gen.value}")
            continue
        if rep.excluded_primes != _small_primes(2 * d):
            bad.append(f"{d}: excluded primes {rep.excluded_primes}")
            continue
        want = _WEIGHT2_TABLE[d]
        with ctx.working():
            r = abs(rep.bound - mpfr(want.numerator) / want.denominator)
            worst = max(worst, r)
    passed = not bad and bool(worst < tol)
    detail = f"worst bound defect {_fmt(worst)} over {len(_H1_FIELDS)} fields"
    if bad:
        detail += "; " + "; ".join(bad)
    return CriterionResult("denominator-report", passed, detail)


_RUNNERS: dict[str, Callable[[PrecisionContext, int], CriterionResult]] = {
    "period-tables": _run_period_tables,
    "weight2-table": _run_weight2_table,
    "integral-multiple": _run_integral_multiple,
    "cocycle-additivity": _run_cocycle_additivity,
    "cocycle-integrality": _run_cocycle_integrality,
    "functional-equation": _run_functional_equation,
    "homogeneity": _run_homogeneity,
    "lvalue-determinant": _run_lvalue_determinant,
    "fourier-constants": _run_fourier_constants,
    "restriction-relation": _run_restriction_relation,
    "denominator-report": _run_denominator_report,
}

CRITERIA: tuple[str, ...] = tuple(_RUNNERS)


def run_criterion(name: str, ctx: PrecisionContext, seed: int = 0) -> CriterionResult:
    """Run one named criterion."""
    if name not in _RUNNERS:
        raise DomainError(
            f"unknown criterion {name!r}; choose from {', '.join(CRITERIA)}")
    return _RUNNERS[name](ctx, seed)


def run_suite(ctx: PrecisionContext, seed: int = 0,
              names: Optional[Iterable[str]] = None) -> list[CriterionResult]:
    """Run the named criteria (default all) in registry order."""
    selected = CRITERIA if names is None else tuple(names)
    return [run_criterion(n, ctx, seed) for n in selected]
