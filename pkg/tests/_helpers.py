"""Shared comparison and extrapolation helpers for the property tests."""
from __future__ import annotations

import gmpy2
from gmpy2 import mpc, mpfr

from eiscoh.acceptance import random_coords, random_lattice, random_s  # noqa: F401
from eiscoh.numerics import PrecisionContext


def neville_at_zero(xs, ys):
    """Neville polynomial extrapolation of (xs, ys) to x = 0."""
    vals = list(ys)
    n = len(vals)
    for level in range(1, n):
        for i in range(n - level):
            x0, x1 = xs[i], xs[i + level]
            vals[i] = (x1 * vals[i] - x0 * vals[i + 1]) / (x1 - x0)
    return vals[0]


def lambda_ladder(ctx: PrecisionContext, n: int = 16):
    """Geometric regularization nodes 2^-1 ... 2^-n (first three: 0.5, 0.25, 0.125)."""
    with ctx.working():
        return [mpfr(2) ** -(j + 1) for j in range(n)]


def _prec_of(x) -> int:
    """Mantissa precision carried by x (53 for exact python numbers)."""
    if isinstance(x, mpc):
        return max(x.precision)
    if isinstance(x, mpfr):
        return x.precision
    return 53


def rel_close(a, b, bound) -> bool:
    # compare at the operands' own precision: converting at the ambient
    # (53-bit) context would round a and b before subtracting and turn
    # every tolerance below ~1e-16 into a no-op
    with gmpy2.context(precision=max(_prec_of(a), _prec_of(b), 128) + 64):
        a, b = mpc(a), mpc(b)
        return abs(a - b) <= mpfr(bound) * (1 + abs(a) + abs(b))


def abs_close(a, b, bound) -> bool:
    with gmpy2.context(precision=max(_prec_of(a), _prec_of(b), 128) + 64):
        return abs(mpc(a) - mpc(b)) <= mpfr(bound)
