"""Exact arithmetic backbone: Laurent polynomials and truncated power series.

Coefficients are :class:`fractions.Fraction` (or ints, which mix freely).
A :class:`TruncatedSeries` may also carry :class:`LaurentPoly` coefficients,
which is how the bivariate series B(x;t) is represented: a series in t whose
coefficients are Laurent polynomials in x.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import DomainError, UsageError

__all__ = [
    "LaurentPoly",
    "TruncatedSeries",
    "as_fraction",
    "series_mul",
    "series_log",
    "series_exp",
    "series_compose_scaled",
    "positive_x_part",
]


def as_fraction(value) -> Fraction:
    """Parse an int, Fraction or ``"p/q"`` string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise UsageError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(f"not a rational: {value!r}") from exc
    raise UsageError(f"not a rational: {value!r}")


class LaurentPoly:
    """Finite map exponent -> nonzero rational coefficient.

    Immutable. Zero coefficients are never stored, so equality is structural.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | Iterable[tuple[int, object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Fraction] = {}
        for e, c in items:
            if not isinstance(e, int) or isinstance(e, bool):
                raise UsageError(f"exponent must be an integer, got {e!r}")
            acc[e] = acc.get(e, Fraction(0)) + as_fraction(c)
        self._terms = {e: c for e, c in sorted(acc.items()) if c != 0}
        self._hash = None

    @classmethod
    def monomial(cls, exponent: int, coeff=1) -> "LaurentPoly":
        return cls({exponent: coeff})

    @classmethod
    def constant(cls, c) -> "LaurentPoly":
        return cls({0: c})

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "LaurentPoly":
        # trusted constructor: terms already nonzero
        obj = cls.__new__(cls)
        obj._terms = dict(sorted(terms.items()))
        obj._hash = None
        return obj

    @property
    def terms(self) -> dict[int, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def exponents(self) -> list[int]:
        return list(self._terms)

    def coefficient(self, e: int) -> Fraction:
        return self._terms.get(e, Fraction(0))

    __getitem__ = coefficient

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def min_exp(self) -> int:
        if not self._terms:
            raise UsageError("zero polynomial has no exponent range")
        return next(iter(self._terms))

    @property
    def max_exp(self) -> int:
        if not self._terms:
            raise UsageError("zero polynomial has no exponent range")
        return next(reversed(self._terms))

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self._terms
            return self._terms == {0: Fraction(other)}
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(tuple(self._terms.items()))
        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "LaurentPoly(0)"
        return "LaurentPoly(" + " + ".join(f"{c}*x^{e}" for e, c in self._terms.items()) + ")"

    def _coerce(self, other) -> "LaurentPoly | None":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return LaurentPoly({0: other})
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        acc = dict(self._terms)
        for e, c in o._terms.items():
            v = acc.get(e, 0) + c
            if v:
                acc[e] = v
            else:
                acc.pop(e, None)
        return LaurentPoly._raw(acc)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly._raw({e: -c for e, c in self._terms.items()})

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
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                return LaurentPoly._raw({})
            return LaurentPoly._raw({e: c * other for e, c in self._terms.items()})
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        acc: dict[int, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                acc[e1 + e2] = acc.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly({e: c for e, c in acc.items()})

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            if other == 0:
                raise ZeroDivisionError("division of LaurentPoly by zero")
            return LaurentPoly._raw({e: c / other for e, c in self._terms.items()})
        return NotImplemented

    def __pow__(self, n: int) -> "LaurentPoly":
        if n < 0:
            raise UsageError("negative powers of a Laurent polynomial are not supported")
        result = LaurentPoly._raw({0: Fraction(1)})
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def derivative(self, k: int = 1) -> "LaurentPoly":
        """k-th derivative, term by term."""
        terms = dict(self._terms)
        for _ in range(k):
            terms = {e - 1: c * e for e, c in terms.items() if e != 0}
        return LaurentPoly(terms)

    def reflect(self) -> "LaurentPoly":
        """p(x) -> p(1/x)."""
        return LaurentPoly._raw({-e: c for e, c in self._terms.items()})

    def shift(self, k: int) -> "LaurentPoly":
        """Multiply by x^k."""
        return LaurentPoly._raw({e + k: c for e, c in self._terms.items()})

    def restrict(self, predicate: Callable[[int], bool]) -> "LaurentPoly":
        return LaurentPoly._raw({e: c for e, c in self._terms.items() if predicate(e)})

    def evaluate(self, x):
        """Evaluate at x. Works for Fraction, float, mpmath and complex arguments."""
        total = 0
        for e, c in self._terms.items():
            total = total + _as_number(c, x) * x ** e
        return total

    __call__ = evaluate

    def total(self) -> Fraction:
        """Value at x = 1 (sum of coefficients)."""
        return sum(self._terms.values(), Fraction(0))


def _as_number(c: Fraction, like):
    # keep Fractions exact when evaluating at a rational point
    if isinstance(like, (int, Fraction)):
        return c
    try:
        import mpmath

        if isinstance(like, (mpmath.mpf, mpmath.mpc)):
            return mpmath.mpf(c.numerator) / c.denominator
    except ImportError:  # pragma: no cover
        pass
    return float(c) if not isinstance(like, complex) else complex(float(c))


def _ring_zero(sample):
    return LaurentPoly._raw({}) if isinstance(sample, LaurentPoly) else Fraction(0)


def _ring_one(sample):
    return LaurentPoly._raw({0: Fraction(1)}) if isinstance(sample, LaurentPoly) else Fraction(1)


def _is_zero(c) -> bool:
    return c.is_zero() if isinstance(c, LaurentPoly) else c == 0


def _is_one(c) -> bool:
    return c == 1


class TruncatedSeries:
    """Power series c_0 + c_1 t + ... + c_N t^N, exact modulo t^(N+1).

    The order N is explicit and never coerced: combining series of different
    orders is a :class:`UsageError`.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs: Sequence, order: int | None = None):
        cs = [c if isinstance(c, LaurentPoly) else as_fraction(c) for c in coeffs]
        if not cs:
            raise UsageError("a truncated series needs at least the constant coefficient")
        if order is not None:
            if order < 0:
                raise UsageError("order must be >= 0")
            if len(cs) > order + 1:
                raise UsageError(f"{len(cs)} coefficients given for order {order}")
            cs = cs + [_ring_zero(cs[0])] * (order + 1 - len(cs))
        kinds = {isinstance(c, LaurentPoly) for c in cs}
        if len(kinds) > 1:
            # promote rationals to constant Laurent polynomials
            cs = [c if isinstance(c, LaurentPoly) else LaurentPoly({0: c}) for c in cs]
        self._coeffs = tuple(cs)

    @classmethod
    def one(cls, order: int, laurent: bool = False) -> "TruncatedSeries":
        unit = LaurentPoly({0: 1}) if laurent else Fraction(1)
        return cls([unit], order=order)

    @classmethod
    def variable(cls, order: int) -> "TruncatedSeries":
        return cls([0, 1][: order + 1], order=order)

    @property
    def order(self) -> int:
        return len(self._coeffs) - 1

    @property
    def coeffs(self) -> tuple:
        return self._coeffs

    @property
    def is_laurent(self) -> bool:
        return isinstance(self._coeffs[0], LaurentPoly)

    def __getitem__(self, n):
        return self._coeffs[n]

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self):
        return iter(self._coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self._coeffs == other._coeffs

    def __hash__(self) -> int:
        return hash(self._coeffs)

    def __repr__(self) -> str:
        head = ", ".join(str(c) for c in self._coeffs[:6])
        more = ", ..." if len(self._coeffs) > 6 else ""
        return f"TruncatedSeries([{head}{more}], order={self.order})"

    def _check(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise UsageError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.order != self.order:
            raise UsageError(f"order mismatch: {self.order} vs {other.order}")
        if other.is_laurent != self.is_laurent:
            raise UsageError("coefficient ring mismatch (rational vs Laurent)")

    def __add__(self, other):
        self._check(other)
        return TruncatedSeries([a + b for a, b in zip(self._coeffs, other._coeffs)])

    def __sub__(self, other):
        self._check(other)
        return TruncatedSeries([a - b for a, b in zip(self._coeffs, other._coeffs)])

    def __neg__(self):
        return TruncatedSeries([-c for c in self._coeffs])

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return TruncatedSeries([c * other for c in self._coeffs])
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return TruncatedSeries([c * other for c in self._coeffs])
        return NotImplemented

    def map(self, fn: Callable) -> "TruncatedSeries":
        return TruncatedSeries([fn(c) for c in self._coeffs])

    def at_x_one(self) -> "TruncatedSeries":
        """Specialise Laurent coefficients at x = 1."""
        if not self.is_laurent:
            return self
        return self.map(LaurentPoly.total)

    def x_coefficient(self, i: int) -> "TruncatedSeries":
        """[x^i] of a series with Laurent coefficients."""
        if not self.is_laurent:
            raise UsageError("x_coefficient needs Laurent coefficients")
        return self.map(lambda c: c.coefficient(i))

    def evaluate(self, t):
        """Horner evaluation of the truncated polynomial (rational coefficients)."""
        if self.is_laurent:
            raise UsageError("evaluate needs rational coefficients")
        acc = 0
        for c in reversed(self._coeffs):
            acc = acc * t + _as_number(c, t)
        return acc


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common order."""
    a._check(b)
    n = a.order
    ac, bc = a.coeffs, b.coeffs
    zero = _ring_zero(ac[0])
    nz_a = [k for k in range(n + 1) if not _is_zero(ac[k])]
    nz_b = [k for k in range(n + 1) if not _is_zero(bc[k])]
    out = [zero] * (n + 1)
    for i in nz_a:
        for j in nz_b:
            if i + j > n:
                break
            out[i + j] = out[i + j] + ac[i] * bc[j]
    return TruncatedSeries(out)


def series_log(a: TruncatedSeries) -> TruncatedSeries:
    """log A for A with constant term 1, via n L_n = n A_n - sum_{k<n} k L_k A_{n-k}."""
    if not _is_one(a[0]):
        raise DomainError(f"series_log needs constant term 1, got {a[0]}")
    n_max = a.order
    ac = a.coeffs
    zero = _ring_zero(ac[0])
    nz = [k for k in range(1, n_max + 1) if not _is_zero(ac[k])]
    kl = [zero] * (n_max + 1)  # k * L_k
    for n in range(1, n_max + 1):
        acc = ac[n] * n
        for j in nz:
            if j >= n:
                break
            k = n - j
            if not _is_zero(kl[k]):
                acc = acc - kl[k] * ac[j]
        kl[n] = acc
    out = [zero] + [kl[n] / n for n in range(1, n_max + 1)]
    return TruncatedSeries(out)


def series_exp(a: TruncatedSeries) -> TruncatedSeries:
    """exp A for A with zero constant term, via n E_n = sum_{k=1}^n k A_k E_{n-k}."""
    if not _is_zero(a[0]):
        raise DomainError(f"series_exp needs constant term 0, got {a[0]}")
    n_max = a.order
    ac = a.coeffs
    zero = _ring_zero(ac[0])
    ka = [(k, ac[k] * k) for k in range(1, n_max + 1) if not _is_zero(ac[k])]
    e = [_ring_one(ac[0])] + [zero] * n_max
    for n in range(1, n_max + 1):
        acc = zero
        for k, kak in ka:
            if k > n:
                break
            if not _is_zero(e[n - k]):
                acc = acc + kak * e[n - k]
        e[n] = acc / n
    return TruncatedSeries(e)


def series_compose_scaled(f: TruncatedSeries, h: LaurentPoly) -> TruncatedSeries:
    """F(H(x) t): the coefficient of t^n becomes f_n * H(x)^n."""
    if f.is_laurent:
        raise UsageError("series_compose_scaled expects rational coefficients in F")
    out = []
    power = LaurentPoly({0: 1})
    for n, c in enumerate(f.coeffs):
        if n:
            power = power * h
        out.append(power * c)
    return TruncatedSeries(out)


def positive_x_part(a: TruncatedSeries) -> TruncatedSeries:
    """Keep only x-exponents >= 1 in every coefficient."""
    if not a.is_laurent:
        raise UsageError("positive_x_part needs Laurent coefficients")
    return a.map(lambda c: c.restrict(lambda e: e >= 1))
