"""Arbitrary-precision building blocks shared by every evaluator.

Working arithmetic runs on gmpy2 (mpfr/mpc) at an explicit bit precision
carried by a PrecisionContext. The handful of special functions gmpy2 lacks
(K-Bessel and the upper incomplete gamma at complex order) are delegated to
mpmath through an exact mantissa/exponent bridge, so no digits are lost at
the boundary.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import gmpy2
import mpmath
from gmpy2 import mpc, mpfr, mpz

DEFAULT_BITS = 384
GUARD_BITS = 64
# mpmath works at a small pad above the mpfr precision so bridged values
# round-trip exactly.
BRIDGE_PAD = 32


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class PrecisionUnderflowError(ArithmeticError):
    """A tail bound or tolerance cannot be met at the configured precision."""


class UnsupportedFieldError(ValueError):
    """Discriminant outside the supported set for the requested operation."""


class RecognitionFailure(ArithmeticError):
    """A numeric value could not be identified with an exact element."""


class PoleError(ArithmeticError):
    """Evaluation requested within the pole guard of a continued function."""


@dataclass(frozen=True)
class PrecisionContext:
    """Precision policy threaded through every evaluator.

    bits is the binary working precision; tol the dimensionless acceptance
    tolerance; trunc_radius an optional lattice-sum cutoff in units of the
    shortest lattice vector (None lets each evaluator derive the radius from
    its own Gaussian tail bound, which is the recommended mode).
    """

    bits: int = DEFAULT_BITS
    tol_exp10: int = -30
    trunc_radius: float | None = None

    def __post_init__(self) -> None:
        if self.bits < 128:
            raise DomainError(f"bits must be >= 128, got {self.bits}")
        # tol >= 2^(-bits+guard): the tolerance must sit above the noise floor
        if mpfr(10) ** self.tol_exp10 < mpfr(2) ** (-self.bits + GUARD_BITS):
            raise DomainError(
                f"tol 1e{self.tol_exp10} below the 2^({-self.bits}+{GUARD_BITS}) noise floor"
            )
        if self.trunc_radius is not None and self.trunc_radius < 3:
            raise DomainError("trunc_radius must be >= 3 shortest-vector units")

    @property
    def tol(self) -> mpfr:
        with self.working():
            return mpfr(10) ** self.tol_exp10

    def working(self):
        """Thread-local gmpy2 context-manager at the working precision."""
        return gmpy2.context(precision=self.bits)

    def eps(self) -> mpfr:
        """Noise floor 2^(-bits + guard) at the working precision."""
        with self.working():
            return mpfr(2) ** (-self.bits + GUARD_BITS)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits=bits, tol_exp10=self.tol_exp10,
                                trunc_radius=self.trunc_radius)


# ---------------------------------------------------------------------------
# exact gmpy2 <-> mpmath bridge

def _raw_mpf(x: mpfr):
    """Exact raw-mpf tuple for a gmpy2 mpfr, immune to mpmath's precision."""
    if gmpy2.is_zero(x):
        return mpmath.libmp.fzero
    if not gmpy2.is_finite(x):
        raise DomainError(f"non-finite value crosses the bridge: {x}")
    m, e = x.as_mantissa_exp()
    # from_man_exp without a precision performs exact normalization
    return mpmath.libmp.from_man_exp(int(m), int(e))


def to_mp(x):
    """gmpy2 mpfr/mpc -> mpmath mpf/mpc, exact (mantissa/exponent transfer)."""
    if isinstance(x, mpc):
        return mpmath.mp.make_mpc((_raw_mpf(x.real), _raw_mpf(x.imag)))
    return mpmath.mp.make_mpf(_raw_mpf(mpfr(x)))


def from_mp(x, ctx: PrecisionContext):
    """mpmath mpf/mpc -> gmpy2, exact provided ctx.bits covers the mantissa."""
    if hasattr(x, "_mpc_"):
        return mpc(from_mp(x.real, ctx), from_mp(x.imag, ctx))
    # read the raw tuple directly: mpmath.mpf(x) would re-round to the
    # ambient mpmath precision
    raw = x._mpf_ if hasattr(x, "_mpf_") else mpmath.mpf(x)._mpf_
    sign, man, exp, _ = raw
    if man == 0:
        if exp == 0:
            return mpfr(0)
        raise DomainError(f"non-finite value crosses the bridge: {x}")
    with ctx.working():
        val = mpfr(mpz(man)) * mpfr(2) ** exp
        return -val if sign else val


class _Bridge:
    """Context manager pinning mpmath precision to ctx.bits + pad."""

    def __init__(self, ctx: PrecisionContext):
        self._target = ctx.bits + BRIDGE_PAD

    def __enter__(self):
        self._saved = mpmath.mp.prec
        mpmath.mp.prec = self._target
        return self

    def __exit__(self, *exc):
        mpmath.mp.prec = self._saved
        return False


def bridge(ctx: PrecisionContext) -> _Bridge:
    return _Bridge(ctx)


# ---------------------------------------------------------------------------
# special functions

def dedekind_eta(tau, ctx: PrecisionContext) -> mpc:
    """eta(tau) = e^(pi i tau/12) prod_(n>=1) (1 - e^(2 pi i n tau)).

    The q-product is truncated once the next factor differs from 1 by less
    than 2^-bits.
    """
    with ctx.working():
        tau = mpc(tau)
        if tau.imag <= 0:
            raise DomainError("dedekind_eta needs Im(tau) > 0")
        pi = gmpy2.const_pi()
        q = gmpy2.exp(2j * pi * tau)
        prefix = gmpy2.exp(1j * pi * tau / 12)
        cutoff = mpfr(2) ** (-ctx.bits)
        prod = mpc(1)
        qn = mpc(1)
        absq = abs(q)
        absqn = mpfr(1)
        while True:
            qn *= q
            absqn *= absq
            if absqn < cutoff:
                break
            prod *= 1 - qn
            if absqn == 0:
                raise PrecisionUnderflowError("eta q-power underflowed")
        return prefix * prod


def bessel_k(nu, t, ctx: PrecisionContext) -> mpc:
    """Modified Bessel K_nu(t) for t > 0, complex order allowed."""
    with ctx.working():
        t = mpfr(t)
        if t <= 0:
            raise DomainError("bessel_k needs t > 0")
        with bridge(ctx):
            val = mpmath.besselk(to_mp(mpc(nu)), to_mp(t))
        # from_mp reads the raw mantissa: wrapping val in mpmath.mpc() here
        # would re-round it at the ambient mpmath precision
        out = from_mp(val, ctx)
        return out if isinstance(out, mpc) else mpc(out)


def eisenstein_e2_qseries(tau, ctx: PrecisionContext) -> mpc:
    """E2(tau) = 1 - 24 sum_(n>=1) sigma_1(n) q^n, q = e^(2 pi i tau).

    Summed in the equivalent Lambert form 1 - 24 sum n q^n/(1-q^n) and
    truncated at |q|^n < 2^-bits.
    """
    with ctx.working():
        tau = mpc(tau)
        if tau.imag <= 0:
            raise DomainError("eisenstein_e2_qseries needs Im(tau) > 0")
        pi = gmpy2.const_pi()
        q = gmpy2.exp(2j * pi * tau)
        cutoff = mpfr(2) ** (-ctx.bits)
        acc = mpc(0)
        qn = mpc(1)
        absq = abs(q)
        absqn = mpfr(1)
        n = 0
        while True:
            n += 1
            qn *= q
            absqn *= absq
            if n * absqn < cutoff:
                break
            acc += n * qn / (1 - qn)
        return 1 - 24 * acc


# ---------------------------------------------------------------------------
# deterministic randomness for reproducible draws

class RandomStream:
    """Counter-based deterministic stream: block i is sha256(f"{seed}:{i}").

    The same (seed, draw sequence) yields byte-identical results on every
    platform, which the CLI's reproducibility contract requires.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self.counter = 0

    def _block(self) -> int:
        h = hashlib.sha256(f"{self.seed}:{self.counter}".encode()).digest()
        self.counter += 1
        return int.from_bytes(h, "big")

    def bits(self, nbits: int) -> int:
        """Uniform integer with nbits bits of entropy."""
        acc = 0
        got = 0
        while got < nbits:
            acc = (acc << 256) | self._block()
            got += 256
        return acc >> (got - nbits)

    def int_below(self, n: int) -> int:
        """Uniform integer in [0, n); deterministic rejection sampling."""
        if n <= 0:
            raise DomainError("int_below needs n > 0")
        nbits = max(n.bit_length() + 64, 80)
        return self.bits(nbits) % n

    def int_range(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.int_below(hi - lo + 1)

    def uniform(self, ctx: PrecisionContext) -> mpfr:
        """Uniform real in [0, 1) at the working precision."""
        with ctx.working():
            return mpfr(self.bits(ctx.bits)) / mpfr(2) ** ctx.bits

    def uniform_in(self, lo, hi, ctx: PrecisionContext) -> mpfr:
        with ctx.working():
            return mpfr(lo) + self.uniform(ctx) * (mpfr(hi) - mpfr(lo))

    def complex_in_box(self, re_lo, re_hi, im_lo, im_hi, ctx: PrecisionContext) -> mpc:
        with ctx.working():
            re = self.uniform_in(re_lo, re_hi, ctx)
            im = self.uniform_in(im_lo, im_hi, ctx)
            return mpc(re, im)
