"""Averaging and integrating superoperators, and the resolvent expansion.

For an unperturbed Hamiltonian ``H0 = sum_k omega_k hbar (N_k + 1/2)`` every
normal-ordered monomial is an eigenvector of the Liouvillian
``L0 F = [H0, F]`` with eigenvalue ``hbar * w``, where the weight
``w = sum_k omega_k (dagger_k - lower_k)`` is an exact rational.  The
averaging superoperator ``P`` keeps the kernel (``w == 0``); the integrating
superoperator ``S`` divides the rest by ``hbar * w``.  They satisfy
``P^2 = P``, ``P S = S P = 0`` and ``L0 S = S L0 = 1 - P``.

The resolvent expansion of a perturbed system ``H0 + alpha H1`` produces the
perturbed analogues as ordered sums of compositions: at order ``alpha^n``,
place ``w`` copies of ``S`` into ``n + 1`` slots separated by ``n``
applications of ``L_H1 = [H1, .]``, where an empty slot contributes ``-P``.
The perturbed averaging superoperator has total weight ``w = n``, the
integrating one ``w = n + 1``, and the eigen-nilpotent ``w = n - 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .ladder_algebra import (
    GR_MINUS_I,
    AlphaSeries,
    DimensionMismatchError,
    GaussianRational,
    LadderMonomial,
    OperatorExpression,
    commutator,
)

__all__ = [
    "ModeSystem",
    "KatoKind",
    "weight",
    "project",
    "integrate",
    "liouville_h0",
    "kato_apply",
    "kato_series_apply",
    "composition_count",
    "kato_generator",
]


@dataclass(frozen=True)
class ModeSystem:
    """A collection of harmonic modes with positive rational frequencies."""

    omega: tuple

    def __init__(self, omega: Sequence):
        freqs = tuple(mpq(w) for w in omega)
        if not freqs:
            raise ValueError("need at least one mode")
        if any(w <= 0 for w in freqs):
            raise ValueError("frequencies must be positive rationals")
        object.__setattr__(self, "omega", freqs)

    @property
    def d(self) -> int:
        return len(self.omega)

    def h0(self) -> OperatorExpression:
        """``sum_k omega_k hbar (N_k + 1/2)`` with ``hbar = 2 u^2``."""
        d = self.d
        zeros = (0,) * d
        terms = {LadderMonomial(zeros, zeros, 2): GaussianRational(sum(self.omega))}
        for k in range(d):
            e = tuple(1 if j == k else 0 for j in range(d))
            terms[LadderMonomial(e, e, 2)] = GaussianRational(2 * self.omega[k])
        return OperatorExpression(d, terms)

    def monomial_weight(self, mono: LadderMonomial):
        w = mpq(0)
        for k in range(self.d):
            w += self.omega[k] * (mono.dagger[k] - mono.lower[k])
        return w

    def _check(self, f: OperatorExpression) -> None:
        if f.d != self.d:
            raise DimensionMismatchError(
                f"expression acts on {f.d} modes, system has {self.d}"
            )


def weight(mono: LadderMonomial, sys: ModeSystem):
    """Liouvillian eigenvalue of a monomial, in units of ``hbar``."""
    if len(mono.dagger) != sys.d:
        raise DimensionMismatchError(
            f"monomial acts on {len(mono.dagger)} modes, system has {sys.d}"
        )
    return sys.monomial_weight(mono)


def project(f: OperatorExpression, sys: ModeSystem) -> OperatorExpression:
    """Averaging superoperator: keep the resonant (zero-weight) terms."""
    sys._check(f)
    kept = {m: c for m, c in f.items() if not sys.monomial_weight(m)}
    return OperatorExpression._raw(f.d, kept)


def integrate(
    f: OperatorExpression, sys: ModeSystem, power: int = 1
) -> OperatorExpression:
    """Integrating superoperator ``S^power``: divide nonresonant terms by
    ``(hbar w)^power`` and drop resonant ones.

    With ``hbar = 2 u^2`` each application divides the coefficient by ``2 w``
    and lowers the ``u`` exponent by two.
    """
    sys._check(f)
    if power < 0:
        raise ValueError("power must be nonnegative")
    if power == 0:
        return f
    out = {}
    for mono, c in f.items():
        w = sys.monomial_weight(mono)
        if not w:
            continue
        scale = (2 * w) ** power
        out[
            LadderMonomial(mono.dagger, mono.lower, mono.sqrt_hbar - 2 * power)
        ] = c * mpq(1, 1) / scale
    return OperatorExpression._raw(f.d, out)


def liouville_h0(f: OperatorExpression, sys: ModeSystem) -> OperatorExpression:
    """``[H0, f]``: multiply each term by ``hbar w`` (diagonal action)."""
    sys._check(f)
    out = {}
    for mono, c in f.items():
        w = sys.monomial_weight(mono)
        if not w:
            continue
        out[
            LadderMonomial(mono.dagger, mono.lower, mono.sqrt_hbar + 2)
        ] = c * (2 * w)
    return OperatorExpression._raw(f.d, out)


class KatoKind(enum.Enum):
    """The three superoperators of the perturbed resolvent expansion."""

    PROJECTOR = "projector"
    INTEGRATOR = "integrator"
    EIGEN_NILPOTENT = "eigen_nilpotent"

    def s_weight(self, n: int) -> int:
        """Total number of ``S`` factors distributed over the slots."""
        if self is KatoKind.PROJECTOR:
            return n
        if self is KatoKind.INTEGRATOR:
            return n + 1
        return n - 1

    def sign(self, n: int) -> int:
        if self is KatoKind.INTEGRATOR:
            return -1 if n % 2 else 1
        return 1 if n % 2 else -1


def composition_count(kind: KatoKind, n: int) -> int:
    """Number of summands at order ``alpha^n``: compositions of the total
    ``S`` count into ``n + 1`` nonnegative slots."""
    if n < 0 or (kind is KatoKind.EIGEN_NILPOTENT and n < 1):
        raise ValueError(f"{kind.value} has no order-{n} term")
    return math.comb(kind.s_weight(n) + n, n)


def _validate_h1(h1: OperatorExpression, sys: ModeSystem) -> None:
    sys._check(h1)
    if not h1.is_hermitian():
        raise ValueError("the perturbation must be Hermitian")


def kato_apply(
    kind: KatoKind,
    n: int,
    f: OperatorExpression,
    sys: ModeSystem,
    h1: OperatorExpression,
) -> OperatorExpression:
    """Order-``alpha^n`` coefficient of a perturbed superoperator applied to ``f``.

    Sums over all compositions ``p_1 + ... + p_(n+1) = w`` the chains
    ``Shat^(p_(n+1)) L_h1 ... L_h1 Shat^(p_1) f`` with ``Shat^(0) = -P`` and
    ``Shat^(j) = S^j``, times the overall sign of the expansion.  Chains
    sharing a prefix share the computation.
    """
    if n < 0:
        raise ValueError("order must be nonnegative")
    if kind is KatoKind.EIGEN_NILPOTENT and n == 0:
        raise ValueError("the eigen-nilpotent expansion starts at order 1")
    sys._check(f)
    _validate_h1(h1, sys)
    total_w = kind.s_weight(n)

    def chains(slots: int, budget: int, x: OperatorExpression) -> OperatorExpression:
        # x is the operand after the already-consumed slots; distribute
        # `budget` S factors over the remaining `slots` slots.
        if x.is_zero:
            return x
        if slots == 1:
            return -project(x, sys) if budget == 0 else integrate(x, sys, budget)
        acc = OperatorExpression.zero(x.d)
        y = x
        for p in range(budget + 1):
            shat = -project(x, sys) if p == 0 else (y := integrate(y, sys))
            if shat.is_zero:
                continue
            acc = acc + chains(slots - 1, budget - p, commutator(h1, shat))
        return acc

    result = chains(n + 1, total_w, f)
    return result if kind.sign(n) > 0 else -result


def kato_series_apply(
    kind: KatoKind,
    operand: AlphaSeries,
    sys: ModeSystem,
    h1: OperatorExpression,
    order: int,
) -> AlphaSeries:
    """Apply a perturbed superoperator to an alpha series, truncated at ``order``."""
    _validate_h1(h1, sys)
    d = sys.d
    start = 1 if kind is KatoKind.EIGEN_NILPOTENT else 0
    out = []
    for m in range(order + 1):
        acc = OperatorExpression.zero(d)
        for n in range(start, m + 1):
            if not operand[m - n].is_zero:
                acc = acc + kato_apply(kind, n, operand[m - n], sys, h1)
        out.append(acc)
    return AlphaSeries(out)


def kato_generator(
    sys: ModeSystem, h1: OperatorExpression, order: int
) -> AlphaSeries:
    """Generator of the block-diagonalizing ordered exponential as an alpha
    series ``G_0 .. G_order``, computed through the composition table.

    The table row ``F_n`` holds the order-``alpha^n`` parts of
    ``Z_n^m applied to h1`` for column weights ``m``; rows are built by
    ``F_(n+1)^m = sum_k Z_0^(m-k) L_h1 F_n^k`` with ``Z_0^0 = P`` and
    ``Z_0^(j) = -S^j``.  The coefficient entering the generator at
    ``alpha^n`` is ``-i F_n^(n+1)``, an anti-Hermitian operator times ``-i``,
    hence Hermitian.
    """
    _validate_h1(h1, sys)
    if order < 0:
        raise ValueError("order must be nonnegative")
    ncols = order + 2
    # First row: F_0^0 = P h1, F_0^m = -S^m h1.
    row = [project(h1, sys)]
    y = h1
    for _ in range(order + 1):
        y = integrate(y, sys)
        row.append(-y)
    generators = [row[1].scaled(GR_MINUS_I)]
    for n in range(1, order + 1):
        # One commutator per table cell; its iterated integrals serve every
        # column of the next row.
        brackets = [commutator(h1, fk) for fk in row]
        spow = []
        for i, b in enumerate(brackets):
            ys = []
            y = b
            for _ in range(ncols - 1 - i):
                y = integrate(y, sys)
                ys.append(y)
            spow.append(ys)
        row = []
        for m in range(ncols):
            acc = project(brackets[m], sys)
            for j in range(1, m + 1):
                acc = acc - spow[m - j][j - 1]
            row.append(acc)
        generators.append(row[n + 1].scaled(GR_MINUS_I))
    return AlphaSeries(generators)
