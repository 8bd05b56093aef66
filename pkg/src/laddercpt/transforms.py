"""Ordered-exponential transforms and block-diagonalization drivers.

All three methods produce a Hermitian generator series and an exactly
block-diagonal effective Hamiltonian, but package the generator differently:

* ``ordered-exponential`` (kato): a single Dyson-ordered exponential whose
  generator function ``G(alpha) = sum_n alpha^n G_n`` comes from the
  resolvent expansion in closed form, without order-by-order elimination.
* ``van-vleck-chain``: a chain
  ``exp(-i alpha^N L_G(N-1)) .. exp(-i alpha L_G0)`` of plain exponentials,
  each chosen to clean one order.
* ``magnus-exponent``: one plain exponential with the polynomial exponent
  ``sum_n alpha^(n+1) G_n``.

In every role the stored coefficient ``G_n`` first acts on the Hamiltonian
at order ``alpha^(n+1)``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .ladder_algebra import (
    GR_I,
    GR_MINUS_I,
    AlphaSeries,
    GaussianRational,
    OperatorExpression,
    commutator,
)
from .superoperators import (
    KatoKind,
    ModeSystem,
    integrate,
    kato_apply,
    kato_generator,
    project,
)

__all__ = [
    "GeneratorSeries",
    "BlockDiagonalResult",
    "BlockDiagonalizationError",
    "RunStats",
    "ROLE_KATO",
    "ROLE_VAN_VLECK",
    "ROLE_MAGNUS",
    "deprit_inverse_apply",
    "deprit_forward_apply",
    "fast_inverse_transform",
    "kato_block_diagonalize",
    "van_vleck_block_diagonalize",
    "magnus_block_diagonalize",
    "kato_effective_direct",
    "DIRECT_MAX_ORDER",
]

ROLE_KATO = "ordered-exponential"
ROLE_VAN_VLECK = "van-vleck-chain"
ROLE_MAGNUS = "magnus-exponent"
_ROLES = (ROLE_KATO, ROLE_VAN_VLECK, ROLE_MAGNUS)


class BlockDiagonalizationError(RuntimeError):
    """An internal consistency check of a transform failed."""


@dataclass
class RunStats:
    """Lightweight instrumentation collected during a transform."""

    stages: list = field(default_factory=list)
    peak_terms: int = 0

    def observe(self, expr: OperatorExpression) -> None:
        n = len(expr)
        if n > self.peak_terms:
            self.peak_terms = n

    def observe_series(self, series: AlphaSeries) -> None:
        for c in series:
            self.observe(c)

    def stage(self, name: str, seconds: float) -> None:
        self.stages.append((name, seconds))


class GeneratorSeries:
    """Hermitian generator coefficients of a block-diagonalizing transform.

    ``coeffs[n]`` enters the unitary at order ``alpha^(n+1)``; the ``role``
    says how (see module docstring).
    """

    __slots__ = ("coeffs", "role")

    def __init__(self, coeffs: Sequence[OperatorExpression], role: str):
        if role not in _ROLES:
            raise ValueError(f"unknown generator role {role!r}")
        coeffs = tuple(coeffs)
        for c in coeffs:
            if c.d != coeffs[0].d:
                raise ValueError("generator coefficients mix mode counts")
            if not c.is_hermitian():
                raise BlockDiagonalizationError(
                    "generator coefficients must be Hermitian"
                )
        self.coeffs = coeffs
        self.role = role

    @property
    def order(self) -> int:
        """Highest alpha order the generator can clean."""
        return len(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> OperatorExpression:
        return self.coeffs[n]

    def __iter__(self):
        return iter(self.coeffs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeneratorSeries):
            return NotImplemented
        return self.role == other.role and self.coeffs == other.coeffs

    def __repr__(self) -> str:
        return f"<GeneratorSeries role={self.role} n={len(self.coeffs)}>"


@dataclass(frozen=True)
class BlockDiagonalResult:
    """Effective Hamiltonian plus the generator that produced it."""

    effective_hamiltonian: AlphaSeries
    generator: GeneratorSeries
    method: str
    order: int


def _generator_coeffs(generator) -> tuple[OperatorExpression, ...]:
    if isinstance(generator, GeneratorSeries):
        return generator.coeffs
    return tuple(generator)


def _fit_order(series: AlphaSeries, order: int | None) -> AlphaSeries:
    """Truncate or zero-pad a polynomial series to the requested order."""
    if order is None or order == series.order:
        return series
    if order < series.order:
        return series.truncated(order)
    pad = (OperatorExpression.zero(series.d),) * (order - series.order)
    return AlphaSeries(series.coeffs + pad)


# ---- ordered exponentials ---------------------------------------------------


def deprit_inverse_apply(
    generator, series: AlphaSeries, order: int | None = None
) -> AlphaSeries:
    """Apply ``exp_-(L_G)`` to a series via the raw recursion.

    The transform coefficients satisfy
    ``V_n = -(i/n) sum_k V_k L_G(n-k-1)``; this evaluates them by direct
    expansion, which is exponential in the order.  It is the reference
    implementation that :func:`fast_inverse_transform` is checked against.
    """
    gens = _generator_coeffs(generator)
    series = _fit_order(series, order)
    n_max = series.order
    if len(gens) < n_max:
        raise ValueError(
            f"need {n_max} generator coefficients for order {n_max}, got {len(gens)}"
        )
    d = series.d

    def apply_v(k: int, x: OperatorExpression) -> OperatorExpression:
        if k == 0 or x.is_zero:
            return x
        acc = OperatorExpression.zero(d)
        for j in range(k):
            g = gens[k - j - 1]
            if g.is_zero:
                continue
            acc = acc + apply_v(j, commutator(g, x))
        return acc.scaled(GaussianRational(0, mpq(-1, k)))

    out = []
    for n in range(n_max + 1):
        acc = OperatorExpression.zero(d)
        for a in range(n + 1):
            acc = acc + apply_v(a, series[n - a])
        out.append(acc)
    return AlphaSeries(out)


def deprit_forward_apply(
    generator, series: AlphaSeries, order: int | None = None
) -> AlphaSeries:
    """Apply ``exp_+(L_G)``, the inverse of :func:`deprit_inverse_apply`.

    Uses ``U_n = (i/n) sum_k L_G(n-k-1) U_k``; because the Liouvillian sits
    outside the recursion, the partial results for each input coefficient
    can be reused, giving quadratically many commutators.
    """
    gens = _generator_coeffs(generator)
    series = _fit_order(series, order)
    n_max = series.order
    if len(gens) < n_max:
        raise ValueError(
            f"need {n_max} generator coefficients for order {n_max}, got {len(gens)}"
        )
    d = series.d
    out = [OperatorExpression.zero(d) for _ in range(n_max + 1)]
    for b in range(n_max + 1):
        rows = [series[b]]
        out[b] = out[b] + rows[0]
        for a in range(1, n_max - b + 1):
            acc = OperatorExpression.zero(d)
            for k in range(a):
                g = gens[a - k - 1]
                if g.is_zero or rows[k].is_zero:
                    continue
                acc = acc + commutator(g, rows[k])
            ua = acc.scaled(GaussianRational(0, mpq(1, a)))
            rows.append(ua)
            out[a + b] = out[a + b] + ua
    return AlphaSeries(out)


def fast_inverse_transform(
    generator,
    series: AlphaSeries,
    order: int | None = None,
    stats: RunStats | None = None,
) -> AlphaSeries:
    """Apply ``exp_-(L_G)`` by back-substitution of the transform coefficients.

    Keeps one bucket ``F_k = alpha^k * (input shifted by k)`` per transform
    coefficient and repeatedly folds the highest bucket into the lower ones:
    for ``n = N-1 .. 0``,
    ``F_k -= i/(n+1) * [G_(n-k), F_(n+1)]`` for ``k = 0..n``.
    The result is the fully folded ``F_0``.
    """
    gens = _generator_coeffs(generator)
    series = _fit_order(series, order)
    n_max = series.order
    if len(gens) < n_max:
        raise ValueError(
            f"need {n_max} generator coefficients for order {n_max}, got {len(gens)}"
        )
    d = series.d
    zero = OperatorExpression.zero(d)
    # buckets[k][j]: coefficient of alpha^j in F_k; F_k starts as alpha^k * H.
    buckets = [
        [zero] * k + [series[j - k] for j in range(k, n_max + 1)]
        for k in range(n_max + 1)
    ]
    for n in range(n_max - 1, -1, -1):
        top = buckets[n + 1]
        top_nonzero = [(j, c) for j, c in enumerate(top) if not c.is_zero]
        for k in range(n + 1):
            g = gens[n - k]
            if g.is_zero:
                continue
            scale = GaussianRational(0, mpq(-1, n + 1))
            bucket = buckets[k]
            for j, c in top_nonzero:
                delta = commutator(g, c).scaled(scale)
                bucket[j] = bucket[j] + delta
                if stats is not None:
                    stats.observe(bucket[j])
    return AlphaSeries(buckets[0])


def _exp_apply(
    exponent: Sequence[tuple[int, OperatorExpression]],
    series: AlphaSeries,
    stats: RunStats | None = None,
) -> AlphaSeries:
    """Apply the plain exponential ``exp(-i L_K)`` with
    ``K = sum alpha^power * op`` to a series, truncated at its order."""
    n_max = series.order
    d = series.d
    terms = [(p, g) for p, g in exponent if p >= 1 and not g.is_zero]
    result = list(series.coeffs)
    current = list(series.coeffs)
    j = 0
    while any(not c.is_zero for c in current):
        j += 1
        scale = GaussianRational(0, mpq(-1, j))
        nxt = [OperatorExpression.zero(d) for _ in range(n_max + 1)]
        moved = False
        for p, g in terms:
            for m in range(n_max + 1 - p):
                c = current[m]
                if c.is_zero:
                    continue
                delta = commutator(g, c)
                if delta.is_zero:
                    continue
                nxt[m + p] = nxt[m + p] + delta
                moved = True
        if not moved:
            break
        current = [c.scaled(scale) for c in nxt]
        for m in range(n_max + 1):
            if not current[m].is_zero:
                result[m] = result[m] + current[m]
                if stats is not None:
                    stats.observe(result[m])
    return AlphaSeries(result)


# ---- block-diagonalization methods -----------------------------------------


def _require_h0(series: AlphaSeries, sys: ModeSystem) -> None:
    if series[0] != sys.h0():
        raise ValueError(
            "the alpha^0 coefficient must be the unperturbed Hamiltonian of the system"
        )


def _finalize(
    sys: ModeSystem,
    method: str,
    role: str,
    htilde: AlphaSeries,
    gens: Sequence[OperatorExpression],
    stats: RunStats | None,
) -> BlockDiagonalResult:
    for n, c in enumerate(htilde):
        if project(c, sys) != c:
            raise BlockDiagonalizationError(
                f"{method}: alpha^{n} coefficient is not block-diagonal"
            )
        if not c.is_hermitian():
            raise BlockDiagonalizationError(
                f"{method}: alpha^{n} coefficient is not Hermitian"
            )
    if stats is not None:
        stats.observe_series(htilde)
        for g in gens:
            stats.observe(g)
    return BlockDiagonalResult(
        effective_hamiltonian=htilde,
        generator=GeneratorSeries(gens, role),
        method=method,
        order=htilde.order,
    )


def kato_block_diagonalize(
    sys: ModeSystem,
    h1: OperatorExpression,
    order: int,
    shift: AlphaSeries | None = None,
    stats: RunStats | None = None,
) -> BlockDiagonalResult:
    """Block-diagonalize ``H0 + alpha h1`` through ``alpha^order`` using the
    closed-form generator of the resolvent expansion.

    ``shift`` is an optional Hermitian series ``F(alpha)``; the generator
    then becomes ``i S_H h1 + P_H F``, which changes the unitary but must
    leave the effective spectrum alone.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    t0 = time.perf_counter()
    # G_n first acts at alpha^(n+1), so order alpha^order needs G_0..G_(order-1).
    gens = [] if order == 0 else list(kato_generator(sys, h1, order - 1))
    if shift is not None:
        if shift.d != sys.d:
            raise ValueError("shift series acts on the wrong number of modes")
        if not shift.is_hermitian():
            raise ValueError("shift series must be Hermitian")
        for n in range(order):
            acc = gens[n]
            for a in range(n + 1):
                b = n - a
                if b <= shift.order and not shift[b].is_zero:
                    acc = acc + kato_apply(KatoKind.PROJECTOR, a, shift[b], sys, h1)
            gens[n] = acc
    if stats is not None:
        stats.stage("generator", time.perf_counter() - t0)
        for g in gens:
            stats.observe(g)
    t1 = time.perf_counter()
    h = AlphaSeries.perturbed(sys.h0(), {1: h1}, order)
    htilde = fast_inverse_transform(gens, h, stats=stats)
    if stats is not None:
        stats.stage("transform", time.perf_counter() - t1)
    return _finalize(sys, "kato", ROLE_KATO, htilde, gens, stats)


def van_vleck_block_diagonalize(
    sys: ModeSystem,
    hamiltonian: AlphaSeries,
    order: int | None = None,
    stats: RunStats | None = None,
) -> BlockDiagonalResult:
    """Block-diagonalize order by order with a chain of plain exponentials.

    At step ``n`` the chain factor ``exp(-i alpha^n L_G)`` with
    ``G = i S h_n`` removes the nonresonant part of the current
    ``alpha^n`` coefficient and leaves lower orders untouched.
    """
    if order is None:
        order = hamiltonian.order
    if order > hamiltonian.order:
        hamiltonian = AlphaSeries(
            hamiltonian.coeffs
            + (OperatorExpression.zero(hamiltonian.d),) * (order - hamiltonian.order)
        )
    else:
        hamiltonian = hamiltonian.truncated(order)
    _require_h0(hamiltonian, sys)
    if not hamiltonian.is_hermitian():
        raise ValueError("the Hamiltonian series must be Hermitian")
    current = hamiltonian
    gens = []
    for n in range(1, order + 1):
        t0 = time.perf_counter()
        g = integrate(current[n], sys).scaled(GR_I)
        gens.append(g)
        if not g.is_zero:
            current = _exp_apply([(n, g)], current, stats=stats)
        if stats is not None:
            stats.stage(f"order {n}", time.perf_counter() - t0)
    return _finalize(sys, "vanvleck", ROLE_VAN_VLECK, current, gens, stats)


def magnus_block_diagonalize(
    sys: ModeSystem,
    hamiltonian: AlphaSeries,
    order: int | None = None,
    stats: RunStats | None = None,
) -> BlockDiagonalResult:
    """Block-diagonalize with a single plain exponential.

    The polynomial exponent ``sum_n alpha^(n+1) G_n`` is grown one order at
    a time: each new coefficient cancels the residual nonresonant part at
    its order, and the full exponential is re-expanded.
    """
    if order is None:
        order = hamiltonian.order
    if order > hamiltonian.order:
        hamiltonian = AlphaSeries(
            hamiltonian.coeffs
            + (OperatorExpression.zero(hamiltonian.d),) * (order - hamiltonian.order)
        )
    else:
        hamiltonian = hamiltonian.truncated(order)
    _require_h0(hamiltonian, sys)
    if not hamiltonian.is_hermitian():
        raise ValueError("the Hamiltonian series must be Hermitian")
    exponent: list[tuple[int, OperatorExpression]] = []
    for n in range(1, order + 1):
        t0 = time.perf_counter()
        partial = _exp_apply(exponent, hamiltonian.truncated(n), stats=stats)
        g = integrate(partial[n], sys).scaled(GR_I)
        if not g.is_zero:
            exponent.append((n, g))
        if stats is not None:
            stats.stage(f"order {n}", time.perf_counter() - t0)
    t1 = time.perf_counter()
    htilde = _exp_apply(exponent, hamiltonian, stats=stats)
    if stats is not None:
        stats.stage("expand", time.perf_counter() - t1)
    gens = {p: g for p, g in exponent}
    zero = OperatorExpression.zero(sys.d)
    gen_list = [gens.get(n + 1, zero) for n in range(order)]
    return _finalize(sys, "magnus", ROLE_MAGNUS, htilde, gen_list, stats)


# Explicit effective-Hamiltonian chains through alpha^4, derived once from
# the resolvent expansion.  Each chain is read right to left: sigma_1 acts
# on h1 first, with one [h1, .] between consecutive slots; slot value 0
# means P, and j > 0 means S^j.
_DIRECT_CHAINS: dict[int, tuple[tuple[object, tuple[int, ...]], ...]] = {
    1: ((mpq(1), (0,)),),
    2: ((mpq(-1, 2), (1, 0)),),
    3: (
        (mpq(1, 3), (1, 1, 0)),
        (mpq(-1, 6), (0, 2, 0)),
    ),
    4: (
        (mpq(1, 6), (0, 2, 1, 0)),
        (mpq(-1, 4), (1, 1, 1, 0)),
        (mpq(1, 12), (0, 1, 2, 0)),
        (mpq(1, 8), (1, 0, 2, 0)),
        (mpq(1, 4), (1, 2, 0, 0)),
        (mpq(1, 4), (2, 1, 0, 0)),
        (mpq(-1, 6), (0, 3, 0, 0)),
        (mpq(-1, 4), (3, 0, 0, 0)),
    ),
}

DIRECT_MAX_ORDER = max(_DIRECT_CHAINS)


def kato_effective_direct(
    sys: ModeSystem, h1: OperatorExpression, order: int
) -> AlphaSeries:
    """Effective Hamiltonian through ``alpha^order`` (at most
    ``DIRECT_MAX_ORDER``) from the tabulated superoperator chains, without
    constructing a generator.

    This is an independent route to the same answer as
    :func:`kato_block_diagonalize` and exists to cross-check it.
    """
    if order < 0:
        raise ValueError("order must be nonnegative")
    if order > DIRECT_MAX_ORDER:
        raise ValueError(
            f"explicit chains are tabulated through alpha^{DIRECT_MAX_ORDER}"
        )
    if not h1.is_hermitian():
        raise ValueError("the perturbation must be Hermitian")
    coeffs = [sys.h0()]
    for n in range(1, order + 1):
        acc = OperatorExpression.zero(sys.d)
        for coeff, sigmas in _DIRECT_CHAINS[n]:
            x = h1
            for i, s in enumerate(sigmas):
                x = project(x, sys) if s == 0 else integrate(x, sys, s)
                if i + 1 < len(sigmas):
                    x = commutator(h1, x)
            acc = acc + x.scaled(coeff)
        coeffs.append(acc)
    return AlphaSeries(coeffs)
