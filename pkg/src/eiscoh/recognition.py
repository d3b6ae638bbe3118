"""Recognition of high-precision values as exact rationals or field elements.

Both recognizers are rounding-based: the targets in this package have known
small height, so solving the rounding problem in the relevant basis and
reporting the residual is both simpler and more honestly fallible than
integer-relation search.  A result is only accepted when the residual is
below the threshold (1e-20 by default) and, for rationals, when the
convergent is stable under dropping half the working bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

import gmpy2
from gmpy2 import mpc, mpfr

from .field import QuadElem
from .numerics import DomainError, PrecisionContext

DEFAULT_THRESHOLD_EXP10 = -20


class RecognitionKind(Enum):
    RATIONAL = "rational"
    QUAD_ELEM = "quad-elem"
    FAILED = "failed"


@dataclass(frozen=True)
class RecognitionResult:
    """Outcome of a recognition attempt.

    ``residual`` is the distance from the input to the embedded candidate
    (also reported for failures, where it documents why the candidate was
    rejected).  ``height`` is the largest coordinate magnitude of the
    candidate, at least 1.
    """

    kind: RecognitionKind
    value: Union[Fraction, QuadElem, None]
    residual: mpfr
    height: int

    @property
    def ok(self) -> bool:
        return self.kind is not RecognitionKind.FAILED


def _threshold(ctx: PrecisionContext, threshold: Optional[mpfr]) -> mpfr:
    if threshold is not None:
        return mpfr(threshold)
    return mpfr(10) ** DEFAULT_THRESHOLD_EXP10


def _exact_fraction(x: mpfr) -> Fraction:
    n, d = x.as_integer_ratio()
    return Fraction(int(n), int(d))


def recognize_rational(x, max_den: int, ctx: PrecisionContext,
                       threshold: Optional[mpfr] = None) -> RecognitionResult:
    """Best rational with denominator at most ``max_den``, or a failure.

    The continued-fraction convergent is recomputed from the input rounded
    to half the working bits; disagreement marks the value as unrecognized
    even when the full-precision residual happens to be small.
    """
    if max_den < 1:
        raise DomainError("need max_den >= 1")
    with ctx.working():
        z = mpc(x)
        thr = _threshold(ctx, threshold)
        cand = _exact_fraction(z.real).limit_denominator(max_den)
        residual = abs(z - mpfr(cand.numerator) / cand.denominator)
        half = gmpy2.mpfr(z.real, max(ctx.bits // 2, 53))
        stable = _exact_fraction(half).limit_denominator(max_den) == cand
        height = max(abs(cand.numerator), cand.denominator, 1)
        if residual < thr and stable:
            return RecognitionResult(RecognitionKind.RATIONAL, cand,
                                     residual, height)
        return RecognitionResult(RecognitionKind.FAILED, None, residual, height)


def recognize_in_O(x, d_K: int, height_bound: int, ctx: PrecisionContext,
                   threshold: Optional[mpfr] = None) -> RecognitionResult:
    """Nearest element of the ring of integers of discriminant ``d_K``.

    Solves the rounding problem in the basis (1, omega) and rejects the
    candidate when a coordinate exceeds ``height_bound`` or the residual
    reaches the threshold.
    """
    if height_bound < 1:
        raise DomainError("need height_bound >= 1")
    with ctx.working():
        z = mpc(x)
        thr = _threshold(ctx, threshold)
        rt = gmpy2.sqrt(mpfr(-d_K))
        n = int(round(2 * z.imag / rt))
        m = int(round(z.real - n * mpfr(d_K) / 2))
        omega_num = mpc(mpfr(d_K) / 2, rt / 2)
        residual = abs(z - (m + n * omega_num))
        height = max(abs(m), abs(n), 1)
        if max(abs(m), abs(n)) <= height_bound and residual < thr:
            return RecognitionResult(RecognitionKind.QUAD_ELEM,
                                     QuadElem(d_K, m, n), residual, height)
        return RecognitionResult(RecognitionKind.FAILED, None, residual, height)
