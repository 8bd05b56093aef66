"""Exact sparse algebra of normal-ordered ladder-operator polynomials.

Operators act on ``d`` harmonic modes.  Every expression is stored as a
dictionary mapping normal-ordered monomials ``a1†^m1 .. ad†^md a1^n1 .. ad^nd``
to exact Gaussian-rational coefficients, together with an integer exponent of
the unit ``u = sqrt(hbar/2)``.  Using ``u`` rather than ``sqrt(hbar)`` keeps
the quantization of any polynomial in positions and momenta inside the
rationals: ``q_k = u (a_k† + a_k)`` and ``p_k = i u (a_k† - a_k)``, so odd
powers of ``u`` never produce a stray ``sqrt(2)``.  ``hbar`` itself is
``2 u^2``.

Coefficient arithmetic uses :mod:`gmpy2` rationals, which hash and compare
like :class:`fractions.Fraction` but are considerably faster.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, NamedTuple, Sequence, Union

from gmpy2 import mpq

__all__ = [
    "GaussianRational",
    "LadderMonomial",
    "OperatorExpression",
    "AlphaSeries",
    "DimensionMismatchError",
    "normal_order_product",
    "multiply",
    "commutator",
    "adjoint",
    "is_hermitian",
    "from_position_momentum",
    "hbar_power",
]

RationalLike = Union[int, Fraction, type(mpq(0))]


class DimensionMismatchError(ValueError):
    """Raised when operands live on different numbers of modes."""


def _as_mpq(x) -> mpq:
    if isinstance(x, (int, Fraction)) or type(x) is type(mpq(0)):
        return mpq(x)
    raise TypeError(f"expected a rational number, got {type(x).__name__}")


class GaussianRational:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: RationalLike = 0, im: RationalLike = 0):
        self.re = _as_mpq(re)
        self.im = _as_mpq(im)

    @classmethod
    def coerce(cls, value) -> "GaussianRational":
        """Convert an int, Fraction, mpq, or GaussianRational to this type."""
        if isinstance(value, GaussianRational):
            return value
        return cls(_as_mpq(value))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)) or type(other) is type(mpq(0)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def __add__(self, other) -> "GaussianRational":
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other) -> "GaussianRational":
        other = GaussianRational.coerce(other)
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "GaussianRational":
        return GaussianRational.coerce(other) - self

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other) -> "GaussianRational":
        if isinstance(other, GaussianRational):
            return GaussianRational(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        q = _as_mpq(other)
        return GaussianRational(self.re * q, self.im * q)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "GaussianRational":
        if isinstance(other, GaussianRational):
            n = other.re * other.re + other.im * other.im
            if not n:
                raise ZeroDivisionError("division by zero GaussianRational")
            return GaussianRational(
                (self.re * other.re + self.im * other.im) / n,
                (self.im * other.re - self.re * other.im) / n,
            )
        q = _as_mpq(other)
        if not q:
            raise ZeroDivisionError("division by zero")
        return GaussianRational(self.re / q, self.im / q)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __complex__(self) -> complex:
        return float(self.re) + 1j * float(self.im)

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)
GR_MINUS_I = GaussianRational(0, -1)


class LadderMonomial(NamedTuple):
    """A normal-ordered monomial ``s^e * prod_k a_k†^dagger[k] a_k^lower[k]``.

    ``sqrt_hbar`` is the exponent ``e`` of the unit ``u = sqrt(hbar/2)``.
    Tuple ordering of the fields gives the canonical term order.
    """

    dagger: tuple[int, ...]
    lower: tuple[int, ...]
    sqrt_hbar: int

    @property
    def modes(self) -> int:
        return len(self.dagger)

    @property
    def degree(self) -> int:
        return sum(self.dagger) + sum(self.lower)

    def conjugate_key(self) -> "LadderMonomial":
        """Monomial of the adjoint term: creation and annihilation swap."""
        return LadderMonomial(self.lower, self.dagger, self.sqrt_hbar)


def _validate_monomial(mono: LadderMonomial, d: int) -> None:
    if d < 1:
        raise ValueError("need at least one mode")
    if len(mono.dagger) != d or len(mono.lower) != d:
        raise DimensionMismatchError(
            f"monomial has {len(mono.dagger)}/{len(mono.lower)} mode entries, expected {d}"
        )
    if any(x < 0 for x in mono.dagger) or any(x < 0 for x in mono.lower):
        raise ValueError("ladder exponents must be nonnegative")


# j-fold contraction weights j! C(n,j) C(m,j) for a^n moving through a†^m,
# cached per exponent pair.
_CONTRACTIONS: dict[tuple[int, int], tuple[int, ...]] = {}


def _contraction_factors(n: int, m: int) -> tuple[int, ...]:
    key = (n, m)
    fac = _CONTRACTIONS.get(key)
    if fac is None:
        fac = tuple(
            math.comb(n, j) * math.comb(m, j) * math.factorial(j)
            for j in range(min(n, m) + 1)
        )
        _CONTRACTIONS[key] = fac
    return fac


# Per-mode contraction patterns for a pair (lower exponents of the left
# factor, dagger exponents of the right factor): tuples (jvec, weight).
_PAIR_COMBOS: dict[tuple[tuple[int, ...], tuple[int, ...]], tuple] = {}


def _pair_combos(na: tuple[int, ...], mb: tuple[int, ...]) -> tuple:
    key = (na, mb)
    combos = _PAIR_COMBOS.get(key)
    if combos is None:
        acc = [((), 1)]
        for k in range(len(na)):
            fac = _contraction_factors(na[k], mb[k])
            acc = [
                (jv + (j,), w * fj)
                for jv, w in acc
                for j, fj in enumerate(fac)
                if fj
            ]
        combos = tuple(acc)
        _PAIR_COMBOS[key] = combos
    return combos


def _accumulate_product(acc: dict, a_items, b_items, sign: int) -> None:
    """Add ``sign * A*B`` into ``acc`` (keys: monomial tuples, values: [re, im])."""
    for (ma, na, ha), ca in a_items:
        are = ca.re if sign > 0 else -ca.re
        aim = ca.im if sign > 0 else -ca.im
        for (mb, nb, hb), cb in b_items:
            cre = are * cb.re - aim * cb.im
            cim = are * cb.im + aim * cb.re
            h = ha + hb
            d = len(ma)
            msum = tuple(ma[k] + mb[k] for k in range(d))
            nsum = tuple(na[k] + nb[k] for k in range(d))
            for jv, w in _pair_combos(na, mb):
                key = (
                    tuple(msum[k] - jv[k] for k in range(d)),
                    tuple(nsum[k] - jv[k] for k in range(d)),
                    h,
                )
                entry = acc.get(key)
                if entry is None:
                    acc[key] = [cre * w, cim * w]
                else:
                    entry[0] += cre * w
                    entry[1] += cim * w


class OperatorExpression:
    """A finite sum of normal-ordered ladder monomials with exact coefficients.

    Immutable by convention.  Terms with zero coefficient are never stored,
    so two expressions are equal iff their term dictionaries are equal.
    """

    __slots__ = ("d", "_terms")

    def __init__(self, d: int, terms: Mapping | Iterable = ()):
        if d < 1:
            raise ValueError("need at least one mode")
        self.d = d
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[LadderMonomial, GaussianRational] = {}
        for mono, coeff in items:
            if not isinstance(mono, LadderMonomial):
                mono = LadderMonomial(tuple(mono[0]), tuple(mono[1]), mono[2])
            _validate_monomial(mono, d)
            c = GaussianRational.coerce(coeff)
            if not c:
                continue
            prev = acc.get(mono)
            c = c if prev is None else prev + c
            if c:
                acc[mono] = c
            elif prev is not None:
                del acc[mono]
        self._terms = acc

    @classmethod
    def _raw(cls, d: int, terms: dict) -> "OperatorExpression":
        """Internal constructor: trusted dict with no zero coefficients."""
        obj = object.__new__(cls)
        obj.d = d
        obj._terms = terms
        return obj

    # ---- builders -------------------------------------------------------

    @classmethod
    def zero(cls, d: int) -> "OperatorExpression":
        if d < 1:
            raise ValueError("need at least one mode")
        return cls._raw(d, {})

    @classmethod
    def scalar(cls, d: int, value, sqrt_hbar: int = 0) -> "OperatorExpression":
        c = GaussianRational.coerce(value)
        if not c:
            return cls.zero(d)
        zeros = (0,) * d
        return cls._raw(d, {LadderMonomial(zeros, zeros, sqrt_hbar): c})

    @classmethod
    def monomial(
        cls,
        d: int,
        dagger: Sequence[int],
        lower: Sequence[int],
        sqrt_hbar: int = 0,
        coeff=1,
    ) -> "OperatorExpression":
        mono = LadderMonomial(tuple(dagger), tuple(lower), sqrt_hbar)
        _validate_monomial(mono, d)
        c = GaussianRational.coerce(coeff)
        return cls._raw(d, {mono: c}) if c else cls.zero(d)

    @classmethod
    def creation(cls, d: int, mode: int) -> "OperatorExpression":
        e = tuple(1 if k == mode else 0 for k in range(d))
        return cls.monomial(d, e, (0,) * d)

    @classmethod
    def annihilation(cls, d: int, mode: int) -> "OperatorExpression":
        e = tuple(1 if k == mode else 0 for k in range(d))
        return cls.monomial(d, (0,) * d, e)

    # ---- inspection -----------------------------------------------------

    def items(self) -> Iterator[tuple[LadderMonomial, GaussianRational]]:
        return iter(self._terms.items())

    def terms(self) -> list[tuple[LadderMonomial, GaussianRational]]:
        """Terms in the canonical (sorted) order."""
        return sorted(self._terms.items(), key=lambda kv: kv[0])

    def coefficient(self, mono: LadderMonomial) -> GaussianRational:
        return self._terms.get(mono, GR_ZERO)

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def max_ladder_power(self) -> int:
        """Largest single-mode creation or annihilation exponent."""
        best = 0
        for mono in self._terms:
            for x in mono.dagger:
                if x > best:
                    best = x
            for x in mono.lower:
                if x > best:
                    best = x
        return best

    def _require_same_d(self, other: "OperatorExpression") -> None:
        if self.d != other.d:
            raise DimensionMismatchError(
                f"operands act on {self.d} and {other.d} modes"
            )

    # ---- linear structure -----------------------------------------------

    def __add__(self, other) -> "OperatorExpression":
        if not isinstance(other, OperatorExpression):
            return NotImplemented
        self._require_same_d(other)
        if not self._terms:
            return other
        if not other._terms:
            return self
        out = dict(self._terms)
        for mono, c in other._terms.items():
            prev = out.get(mono)
            s = c if prev is None else prev + c
            if s:
                out[mono] = s
            elif prev is not None:
                del out[mono]
        return OperatorExpression._raw(self.d, out)

    def __sub__(self, other) -> "OperatorExpression":
        if not isinstance(other, OperatorExpression):
            return NotImplemented
        return self + (-other)

    def __neg__(self) -> "OperatorExpression":
        return OperatorExpression._raw(
            self.d, {m: -c for m, c in self._terms.items()}
        )

    def scaled(self, factor) -> "OperatorExpression":
        c = GaussianRational.coerce(factor)
        if not c:
            return OperatorExpression.zero(self.d)
        return OperatorExpression._raw(
            self.d, {m: v * c for m, v in self._terms.items()}
        )

    def __mul__(self, other) -> "OperatorExpression":
        if isinstance(other, OperatorExpression):
            return multiply(self, other)
        try:
            return self.scaled(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other) -> "OperatorExpression":
        try:
            return self.scaled(other)
        except TypeError:
            return NotImplemented

    def __pow__(self, n: int) -> "OperatorExpression":
        if not isinstance(n, int) or n < 0:
            raise ValueError("operator powers must be nonnegative integers")
        result = OperatorExpression.scalar(self.d, 1)
        for _ in range(n):
            result = multiply(result, self)
        return result

    # ---- comparison / output ---------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, OperatorExpression):
            return NotImplemented
        return self.d == other.d and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.d, frozenset(self._terms.items())))

    def adjoint(self) -> "OperatorExpression":
        # a†^m a^n maps to a†^n a^m, which is again normal ordered.
        return OperatorExpression._raw(
            self.d,
            {m.conjugate_key(): c.conjugate() for m, c in self._terms.items()},
        )

    def is_hermitian(self) -> bool:
        for mono, c in self._terms.items():
            if self._terms.get(mono.conjugate_key(), GR_ZERO) != c.conjugate():
                return False
        return True

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.terms():
            factors = [str(c)]
            if mono.sqrt_hbar:
                factors.append(f"s^{mono.sqrt_hbar}")
            for k, e in enumerate(mono.dagger):
                if e:
                    factors.append(f"ad{k + 1}" + (f"^{e}" if e > 1 else ""))
            for k, e in enumerate(mono.lower):
                if e:
                    factors.append(f"a{k + 1}" + (f"^{e}" if e > 1 else ""))
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"<OperatorExpression d={self.d} terms={len(self._terms)}>"


# ---- products -------------------------------------------------------------


def normal_order_product(a: LadderMonomial, b: LadderMonomial) -> OperatorExpression:
    """Normal-ordered expansion of the product of two monomials.

    Commuting each annihilator of ``a`` through the creators of ``b``
    produces, per mode, the contraction sum with weights
    ``j! C(n, j) C(m, j)``.
    """
    if len(a.dagger) != len(b.dagger):
        raise DimensionMismatchError(
            f"monomials act on {len(a.dagger)} and {len(b.dagger)} modes"
        )
    d = len(a.dagger)
    acc: dict = {}
    _accumulate_product(acc, [(a, GR_ONE)], [(b, GR_ONE)], 1)
    return _from_accumulator(d, acc)


def _from_accumulator(d: int, acc: dict) -> OperatorExpression:
    out = {}
    for (dg, lw, h), (re, im) in acc.items():
        if re or im:
            out[LadderMonomial(dg, lw, h)] = GaussianRational(re, im)
    return OperatorExpression._raw(d, out)


def multiply(a: OperatorExpression, b: OperatorExpression) -> OperatorExpression:
    """Product of two expressions, normal ordered."""
    a._require_same_d(b)
    if a.is_zero or b.is_zero:
        return OperatorExpression.zero(a.d)
    acc: dict = {}
    _accumulate_product(acc, list(a._terms.items()), list(b._terms.items()), 1)
    return _from_accumulator(a.d, acc)


def commutator(a: OperatorExpression, b: OperatorExpression) -> OperatorExpression:
    """Commutator ``[a, b] = a b - b a``, normal ordered."""
    a._require_same_d(b)
    if a.is_zero or b.is_zero:
        return OperatorExpression.zero(a.d)
    acc: dict = {}
    a_items = list(a._terms.items())
    b_items = list(b._terms.items())
    _accumulate_product(acc, a_items, b_items, 1)
    _accumulate_product(acc, b_items, a_items, -1)
    return _from_accumulator(a.d, acc)


def adjoint(a: OperatorExpression) -> OperatorExpression:
    return a.adjoint()


def is_hermitian(a: OperatorExpression) -> bool:
    return a.is_hermitian()


def hbar_power(d: int, k: int) -> OperatorExpression:
    """The scalar ``hbar^k`` as an expression: ``hbar = 2 u^2``."""
    coeff = mpq(2) ** k
    return OperatorExpression.scalar(d, coeff, sqrt_hbar=2 * k)


def from_position_momentum(
    poly: Mapping[tuple[Sequence[int], Sequence[int]], object], d: int
) -> OperatorExpression:
    """Quantize a polynomial in positions and momenta.

    ``poly`` maps ``(q_exponents, p_exponents)`` to rational coefficients;
    the monomial is quantized with all ``q_k`` factors to the left of the
    ``p_k`` factors, via ``q_k = u (a_k† + a_k)``, ``p_k = i u (a_k† - a_k)``.
    """
    if d < 1:
        raise ValueError("need at least one mode")
    plus = {}
    minus = {}
    result = OperatorExpression.zero(d)
    for (qexp, pexp), coeff in poly.items():
        qexp = tuple(qexp)
        pexp = tuple(pexp)
        if len(qexp) != d or len(pexp) != d:
            raise DimensionMismatchError(
                f"monomial exponents have length {len(qexp)}/{len(pexp)}, expected {d}"
            )
        if any(e < 0 for e in qexp + pexp):
            raise ValueError("polynomial exponents must be nonnegative")
        c = GaussianRational.coerce(coeff)
        if not c:
            continue
        degree = sum(qexp) + sum(pexp)
        c = c * _gr_ipow(sum(pexp))
        term = OperatorExpression.scalar(d, c, sqrt_hbar=degree)
        for k in range(d):
            if qexp[k]:
                if k not in plus:
                    plus[k] = OperatorExpression.creation(d, k) + OperatorExpression.annihilation(d, k)
                term = multiply(term, plus[k] ** qexp[k])
            if pexp[k]:
                if k not in minus:
                    minus[k] = OperatorExpression.creation(d, k) - OperatorExpression.annihilation(d, k)
                term = multiply(term, minus[k] ** pexp[k])
        result = result + term
    return result


def _gr_ipow(n: int) -> GaussianRational:
    return (GR_ONE, GR_I, -GR_ONE, GR_MINUS_I)[n % 4]


class AlphaSeries:
    """A polynomial in the perturbation parameter with operator coefficients.

    ``coeffs[n]`` is the coefficient of ``alpha^n``; the represented object
    is known modulo ``alpha^(order+1)``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[OperatorExpression]):
        coeffs = tuple(coeffs)
        if not coeffs:
            raise ValueError("a series needs at least the alpha^0 coefficient")
        d = coeffs[0].d
        for c in coeffs:
            if c.d != d:
                raise DimensionMismatchError("series coefficients mix mode counts")
        self.coeffs = coeffs

    @property
    def d(self) -> int:
        return self.coeffs[0].d

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> OperatorExpression:
        return self.coeffs[n]

    def __iter__(self) -> Iterator[OperatorExpression]:
        return iter(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    @classmethod
    def zero(cls, d: int, order: int) -> "AlphaSeries":
        z = OperatorExpression.zero(d)
        return cls((z,) * (order + 1))

    @classmethod
    def constant(cls, op: OperatorExpression, order: int) -> "AlphaSeries":
        z = OperatorExpression.zero(op.d)
        return cls((op,) + (z,) * order)

    @classmethod
    def perturbed(
        cls, h0: OperatorExpression, parts: Mapping[int, OperatorExpression], order: int
    ) -> "AlphaSeries":
        """Series ``h0 + sum_k alpha^k parts[k]`` padded with zeros to ``order``."""
        coeffs = [OperatorExpression.zero(h0.d) for _ in range(order + 1)]
        coeffs[0] = h0
        for k, op in parts.items():
            if k < 1:
                raise ValueError("perturbation orders start at alpha^1")
            if k <= order:
                coeffs[k] = coeffs[k] + op
        return cls(coeffs)

    def _require_same_shape(self, other: "AlphaSeries") -> None:
        if self.d != other.d:
            raise DimensionMismatchError(
                f"series act on {self.d} and {other.d} modes"
            )
        if self.order != other.order:
            raise ValueError(
                f"series orders differ: {self.order} vs {other.order}"
            )

    def __add__(self, other) -> "AlphaSeries":
        if not isinstance(other, AlphaSeries):
            return NotImplemented
        self._require_same_shape(other)
        return AlphaSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other) -> "AlphaSeries":
        if not isinstance(other, AlphaSeries):
            return NotImplemented
        self._require_same_shape(other)
        return AlphaSeries(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "AlphaSeries":
        return AlphaSeries(tuple(-c for c in self.coeffs))

    def scaled(self, factor) -> "AlphaSeries":
        return AlphaSeries(tuple(c.scaled(factor) for c in self.coeffs))

    def truncated(self, order: int) -> "AlphaSeries":
        if order > self.order:
            raise ValueError(
                f"cannot extend a series known to order {self.order} to {order}"
            )
        return AlphaSeries(self.coeffs[: order + 1])

    def is_hermitian(self) -> bool:
        return all(c.is_hermitian() for c in self.coeffs)

    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coeffs)

    def term_counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AlphaSeries):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"<AlphaSeries d={self.d} order={self.order} terms={self.term_counts()}>"
