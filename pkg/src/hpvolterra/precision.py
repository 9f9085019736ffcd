"""Arbitrary-precision scalars and the precision context that owns them.

Every real number in the package is an ``mpf`` belonging to the private
``mpmath.MPContext`` of a :class:`PrecisionContext`.  The context runs its
arithmetic with ``GUARD_DIGITS`` extra digits; values that leave a kernel
(quadrature results, linear solves, solution vectors) are rounded back to the
user precision with :meth:`PrecisionContext.round`.

No global mpmath state is touched, so contexts at different precisions can be
used side by side from different threads.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any

from mpmath import MPContext, libmp

from .exceptions import ConfigurationError, ParseError, PrecisionOverflowError

DEFAULT_DIGITS = 50
MIN_DIGITS = 15
GUARD_DIGITS = 10

# MPFR-style exponent range: binary exponents beyond +-2**30 count as overflow.
MAX_BINARY_EXPONENT = 2**30
_EXP_ARG_LIMIT = MAX_BINARY_EXPONENT * math.log(2)

# Type alias for documentation only; the concrete class is per-context.
HighPrecisionScalar = Any


def _first_bad_position(text: str) -> tuple[int, str] | None:
    """Scan a signed decimal with optional exponent; report the first bad index."""
    i, n = 0, len(text)
    if n == 0:
        return 0, "empty string"
    if text[i] in "+-":
        i += 1
    int_digits = 0
    while i < n and text[i].isdigit() and text[i].isascii():
        i += 1
        int_digits += 1
    frac_digits = 0
    if i < n and text[i] == ".":
        i += 1
        while i < n and text[i].isdigit() and text[i].isascii():
            i += 1
            frac_digits += 1
    if int_digits + frac_digits == 0:
        return i, "expected a digit"
    if i < n and text[i] in "eE":
        i += 1
        if i < n and text[i] in "+-":
            i += 1
        exp_digits = 0
        while i < n and text[i].isdigit() and text[i].isascii():
            i += 1
            exp_digits += 1
        if exp_digits == 0:
            return i, "expected exponent digits"
    if i < n:
        return i, f"unexpected character {text[i]!r}"
    return None


@dataclass(frozen=True)
class PrecisionContext:
    """Immutable working-precision descriptor.

    Parameters
    ----------
    decimal_digits : int
        Significant decimal digits guaranteed on user-visible values.
    """

    decimal_digits: int = DEFAULT_DIGITS
    mp: MPContext = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        digits = self.decimal_digits
        if isinstance(digits, bool) or not isinstance(digits, int):
            raise ConfigurationError(f"decimal_digits must be an int, got {digits!r}")
        if digits < MIN_DIGITS:
            raise ConfigurationError(
                f"decimal_digits must be >= {MIN_DIGITS}, got {digits}"
            )
        mp = MPContext()
        mp.dps = digits + GUARD_DIGITS
        object.__setattr__(self, "mp", mp)

    @property
    def prec(self) -> int:
        """User precision in bits."""
        return libmp.dps_to_prec(self.decimal_digits)

    @property
    def working_digits(self) -> int:
        return self.decimal_digits + GUARD_DIGITS

    @property
    def eps(self):
        """``10**-decimal_digits`` as a scalar."""
        return self.pow10(-self.decimal_digits)

    def pow10(self, k: int):
        return self.mp.mpf(10) ** k

    def scalar(self, value) -> HighPrecisionScalar:
        """Convert ``value`` into this context without passing through a double.

        Strings are parsed as decimals at the user precision; floats are taken
        by their shortest repr, so ``0.1`` means one tenth.
        """
        if isinstance(value, str):
            return scalar_from_decimal(value, self)
        if hasattr(value, "_mpf_"):
            return self.mp.make_mpf(value._mpf_)
        if isinstance(value, bool):
            raise TypeError("booleans are not scalars")
        if isinstance(value, int):
            return self.mp.mpf(value)
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ConfigurationError(f"non-finite value {value!r}")
            return scalar_from_decimal(repr(value), self)
        if isinstance(value, Decimal):
            return scalar_from_decimal(str(value), self)
        if isinstance(value, Fraction):
            return self.round(self.mp.mpf(value.numerator) / value.denominator)
        # numpy scalars and friends
        if hasattr(value, "item"):
            return self.scalar(value.item())
        raise TypeError(f"cannot convert {type(value).__name__} to a scalar")

    def round(self, x) -> HighPrecisionScalar:
        """Round ``x`` to the user precision (drops the guard digits)."""
        return self.mp.make_mpf(libmp.mpf_pos(x._mpf_, self.prec, libmp.round_nearest))

    def to_str(self, x) -> str:
        return to_decimal_string(x, self)

    def exp(self, x) -> HighPrecisionScalar:
        return scalar_exp(self.scalar(x))


def scalar_from_decimal(text: str, ctx: PrecisionContext) -> HighPrecisionScalar:
    """Parse a signed decimal string, e.g. ``"-1.25e-3"``, into ``ctx``.

    Raises
    ------
    ParseError
        With the offending character position.
    """
    stripped = text.strip()
    offset = len(text) - len(text.lstrip())
    bad = _first_bad_position(stripped)
    if bad is not None:
        pos, reason = bad
        raise ParseError(text, pos + offset, reason)
    value = libmp.from_str(stripped, ctx.prec, libmp.round_nearest)
    return ctx.mp.make_mpf(value)


def scalar_exp(x) -> HighPrecisionScalar:
    """``exp(x)`` in the context that owns ``x``.

    Raises
    ------
    PrecisionOverflowError
        If the result would exceed the representable exponent range.
    """
    if x > _EXP_ARG_LIMIT:
        raise PrecisionOverflowError(f"exp overflow for argument {x}")
    return x.context.exp(x)


def _format_digits(sign: str, digits: str, exponent: int) -> str:
    # digits: mantissa digits without trailing zeros, value = 0.d1d2... * 10**(exponent+1)
    if -6 < exponent < 6:
        if exponent >= 0:
            if len(digits) <= exponent + 1:
                body = digits + "0" * (exponent + 1 - len(digits))
            else:
                body = digits[: exponent + 1] + "." + digits[exponent + 1 :]
        else:
            body = "0." + "0" * (-exponent - 1) + digits
        return sign + body
    mantissa = digits[0] + ("." + digits[1:] if len(digits) > 1 else "")
    return f"{sign}{mantissa}e{exponent}"


def _digits_of(raw: str) -> tuple[str, str, int]:
    sign = ""
    if raw.startswith("-"):
        sign, raw = "-", raw[1:]
    mant, _, exp = raw.partition("e")
    digits = mant.replace(".", "").rstrip("0") or "0"
    return sign, digits, int(exp or 0)


def to_decimal_string(x, ctx: PrecisionContext) -> str:
    """Shortest decimal string that parses back to ``x`` at ``ctx`` precision.

    Values are first rounded to the user precision.  Scientific notation with a
    lowercase ``e`` is used when the decimal exponent is 6 or more in magnitude.
    """
    value = libmp.mpf_pos(x._mpf_, ctx.prec, libmp.round_nearest)
    if value == libmp.fzero:
        return "0"
    if value == libmp.finf:
        return "inf"
    if value == libmp.fninf:
        return "-inf"
    if value == libmp.fnan:
        return "nan"
    limit = libmp.repr_dps(ctx.prec)
    for n in range(1, limit + 1):
        raw = libmp.to_str(value, n, min_fixed=1, max_fixed=0)
        if libmp.from_str(raw, ctx.prec, libmp.round_nearest) == value:
            break
    return _format_digits(*_digits_of(raw))


@functools.lru_cache(maxsize=None)
def _shared_context(digits: int) -> PrecisionContext:
    return PrecisionContext(digits)


def context_for(x) -> PrecisionContext:
    """A context matching the precision ``x`` was computed in (default if unknown)."""
    mp = getattr(x, "context", None)
    if mp is None:
        return _shared_context(DEFAULT_DIGITS)
    return _shared_context(max(MIN_DIGITS, mp.dps - GUARD_DIGITS))
