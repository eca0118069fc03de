"""Non-negative scalars carried in one of two numeric backends.

Inequality verification needs exact rational arithmetic (a false
counterexample produced by rounding is the worst possible failure mode),
while large instances need log-domain floats.  ``NonNegValue`` carries a
quantity in exactly one backend; arithmetic never mixes backends
silently.  ``PowerProduct`` represents products of rational powers of
such values -- the shape every upper bound here takes -- and
``compare_product`` decides inequalities between them exactly, using a
float screen with a wide safety margin and an arbitrary-precision
integer fallback for near-ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence, Tuple, Union

NEG_INF = float("-inf")

RationalLike = Union[int, str, Fraction]


class Backend(str, Enum):
    EXACT = "exact"
    LOG = "log"


def parse_rational(text: str) -> Fraction:
    """Parse ``p`` or ``p/q`` into a Fraction."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def format_rational(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def log_of_int(n: int) -> float:
    if n < 0:
        raise ValueError("log of negative integer")
    if n == 0:
        return NEG_INF
    return math.log(n)  # CPython's math.log is exact-input for big ints


def log_of_fraction(x: Fraction) -> float:
    if x < 0:
        raise ValueError("log of negative rational")
    if x == 0:
        return NEG_INF
    return log_of_int(x.numerator) - log_of_int(x.denominator)


def lse_pair(a: float, b: float) -> float:
    """log(e^a + e^b), stable, with -inf as the additive zero."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


class NonNegValue:
    """A non-negative number, either an exact rational or a log float.

    EXACT payload is a canonical ``Fraction`` (gcd-reduced, positive
    denominator, value >= 0).  LOG payload is the natural log of the
    magnitude, with ``-inf`` as the distinguished zero, which compares
    below every finite value.
    """

    __slots__ = ("_frac", "_log")

    def __init__(self, frac: Fraction | None, logv: float | None):
        self._frac = frac
        self._log = logv

    @classmethod
    def exact(cls, value: RationalLike) -> "NonNegValue":
        if isinstance(value, str):
            value = parse_rational(value)
        frac = Fraction(value)
        if frac < 0:
            raise ValueError(f"negative value not allowed: {frac}")
        return cls(frac, None)

    @classmethod
    def from_log(cls, logv: float) -> "NonNegValue":
        if math.isnan(logv) or logv == math.inf:
            raise ValueError(f"invalid log magnitude: {logv}")
        return cls(None, float(logv))

    @classmethod
    def zero(cls, backend: Backend) -> "NonNegValue":
        if backend is Backend.EXACT:
            return cls.exact(0)
        return cls.from_log(NEG_INF)

    @classmethod
    def one(cls, backend: Backend) -> "NonNegValue":
        if backend is Backend.EXACT:
            return cls.exact(1)
        return cls.from_log(0.0)

    @property
    def backend(self) -> Backend:
        return Backend.EXACT if self._frac is not None else Backend.LOG

    @property
    def is_zero(self) -> bool:
        if self._frac is not None:
            return self._frac == 0
        return self._log == NEG_INF

    @property
    def fraction(self) -> Fraction:
        if self._frac is None:
            raise ValueError("log-backend value has no exact rational payload")
        return self._frac

    def log(self) -> float:
        if self._frac is not None:
            return log_of_fraction(self._frac)
        return self._log

    def to_log(self) -> "NonNegValue":
        if self._frac is not None:
            return NonNegValue.from_log(log_of_fraction(self._frac))
        return self

    def _require_same_backend(self, other: "NonNegValue") -> None:
        if self.backend is not other.backend:
            raise TypeError("cannot mix exact and log backends; convert explicitly")

    def __mul__(self, other: "NonNegValue") -> "NonNegValue":
        self._require_same_backend(other)
        if self._frac is not None:
            return NonNegValue(self._frac * other._frac, None)
        return NonNegValue(None, self._log + other._log)

    def __add__(self, other: "NonNegValue") -> "NonNegValue":
        self._require_same_backend(other)
        if self._frac is not None:
            return NonNegValue(self._frac + other._frac, None)
        return NonNegValue(None, lse_pair(self._log, other._log))

    def __pow__(self, k: int) -> "NonNegValue":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        if self._frac is not None:
            return NonNegValue(self._frac ** k, None)
        if k == 0:
            return NonNegValue.from_log(0.0)
        return NonNegValue(None, self._log * k)

    def _cmp_key(self, other: "NonNegValue"):
        self._require_same_backend(other)
        if self._frac is not None:
            return self._frac, other._frac
        return self._log, other._log

    def __lt__(self, other):
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other):
        a, b = self._cmp_key(other)
        return a <= b

    def __eq__(self, other):
        if not isinstance(other, NonNegValue):
            return NotImplemented
        if self.backend is not other.backend:
            return False
        if self._frac is not None:
            return self._frac == other._frac
        return self._log == other._log

    def __hash__(self):
        return hash((self.backend, self._frac, self._log))

    def __repr__(self):
        if self._frac is not None:
            return f"NonNegValue({format_rational(self._frac)})"
        return f"NonNegValue(log={self._log!r})"


class ValueSum:
    """Streaming sum of NonNegValues.

    EXACT accumulates rationals.  LOG keeps a running maximum and the sum
    of exponentials relative to it, so terms spanning hundreds of orders
    of magnitude accumulate without overflow.
    """

    def __init__(self, backend: Backend):
        self.backend = backend
        self._frac = Fraction(0)
        self._max = NEG_INF
        self._acc = 0.0

    def add(self, value: NonNegValue) -> None:
        if value.backend is not self.backend:
            raise TypeError("backend mismatch in sum")
        if self.backend is Backend.EXACT:
            self._frac += value.fraction
            return
        x = value.log()
        if x == NEG_INF:
            return
        if x <= self._max:
            self._acc += math.exp(x - self._max)
        else:
            self._acc = self._acc * math.exp(self._max - x) + 1.0
            self._max = x

    def add_log(self, x: float) -> None:
        self.add(NonNegValue.from_log(x))

    def total(self) -> NonNegValue:
        if self.backend is Backend.EXACT:
            return NonNegValue.exact(self._frac)
        if self._max == NEG_INF or self._acc == 0.0:
            return NonNegValue.from_log(NEG_INF)
        return NonNegValue.from_log(self._max + math.log(self._acc))


Factor = Tuple[NonNegValue, Fraction]


@dataclass(frozen=True)
class PowerProduct:
    """A product of factors ``value ** exponent`` with exponents > 0.

    This is the shape of every upper bound evaluated here: a product of
    complete-bipartite partition functions or homomorphism counts raised
    to rational powers.  Keeping the factored form lets EXACT-backend
    comparisons clear denominators once, and keeps serialized reports
    small even when the cleared-exponent integers would be enormous.
    """

    factors: Tuple[Factor, ...]

    def __post_init__(self):
        backends = {v.backend for v, _ in self.factors}
        if len(backends) > 1:
            raise TypeError("mixed backends in product")
        for _, e in self.factors:
            if e <= 0:
                raise ValueError("exponents must be positive")

    @property
    def backend(self) -> Backend:
        if not self.factors:
            return Backend.EXACT
        return self.factors[0][0].backend

    @property
    def is_zero(self) -> bool:
        return any(v.is_zero for v, _ in self.factors)

    def log(self) -> float:
        if self.is_zero:
            return NEG_INF
        return sum(float(e) * v.log() for v, e in self.factors)

    def scaled(self, extra: Fraction) -> "PowerProduct":
        """Multiply every exponent by a positive rational."""
        if extra <= 0:
            raise ValueError("scale must be positive")
        return PowerProduct(tuple((v, e * extra) for v, e in self.factors))


def product_of(values: Iterable[NonNegValue], exponent: Fraction) -> PowerProduct:
    return PowerProduct(tuple((v, exponent) for v in values))


# Absolute log-gap below which the float screen refuses to decide and the
# exact integer comparison runs instead.  math.log on big ints is within a
# few ulp, so accumulated error over <=buckets of factors stays orders of
# magnitude below this.
_SCREEN_MARGIN = 1e-6


def _screen(a_factors: Sequence[Factor], b_factors: Sequence[Factor]) -> int | None:
    la = sum(float(e) * v.log() for v, e in a_factors)
    lb = sum(float(e) * v.log() for v, e in b_factors)
    gap = lb - la
    margin = _SCREEN_MARGIN + 3e-13 * (abs(la) + abs(lb))
    if gap > margin:
        return -1
    if gap < -margin:
        return 1
    return None


def _cleared_ints(factors: Sequence[Factor], lcm_exp: int) -> tuple[int, int]:
    """(numerator, denominator) of product(f ** (e * lcm_exp)), exactly."""
    num = 1
    den = 1
    for v, e in factors:
        power = e * lcm_exp
        if power.denominator != 1:
            raise AssertionError("lcm did not clear exponent denominators")
        k = power.numerator
        frac = v.fraction
        num *= frac.numerator ** k
        den *= frac.denominator ** k
    return num, den


def compare_product(a_factors: Sequence[Factor], b_factors: Sequence[Factor]) -> int:
    """Exact three-way comparison of two products of rational powers.

    Both sides must be EXACT backend.  Returns -1, 0, or 1 for a < b,
    a == b, a > b.  Decides with a float screen when the log gap is wide,
    otherwise clears all exponent denominators via their lcm and compares
    arbitrary-precision integers.
    """
    a_zero = any(v.is_zero for v, _ in a_factors)
    b_zero = any(v.is_zero for v, _ in b_factors)
    if a_zero and b_zero:
        return 0
    if a_zero:
        return -1
    if b_zero:
        return 1

    screened = _screen(a_factors, b_factors)
    if screened is not None:
        return screened

    lcm_exp = 1
    for _, e in list(a_factors) + list(b_factors):
        lcm_exp = math.lcm(lcm_exp, e.denominator)
    a_num, a_den = _cleared_ints(a_factors, lcm_exp)
    b_num, b_den = _cleared_ints(b_factors, lcm_exp)
    left = a_num * b_den
    right = b_num * a_den
    if left < right:
        return -1
    if left > right:
        return 1
    return 0


def compare_value_vs_product(lhs: NonNegValue, rhs: PowerProduct) -> int:
    return compare_product(((lhs, Fraction(1)),), rhs.factors)
