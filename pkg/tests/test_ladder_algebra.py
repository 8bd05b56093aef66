import random

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_expression
from laddercpt import (
    AlphaSeries,
    DimensionMismatchError,
    GaussianRational,
    LadderMonomial,
    OperatorExpression,
    adjoint,
    commutator,
    from_position_momentum,
    hbar_power,
    is_hermitian,
    multiply,
    normal_order_product,
)
from oracles import expression_matrix, interior_close


def mono(d, dagger, lower, e=0, coeff=1):
    return OperatorExpression.monomial(d, dagger, lower, e, coeff)


AD = mono(1, (1,), (0,))
A = mono(1, (0,), (1,))
N = mono(1, (1,), (1,))
ONE = OperatorExpression.scalar(1, 1)
I = GaussianRational(0, 1)


# ---- normal ordering ---------------------------------------------------------


def test_normal_order_a_adagger():
    assert multiply(A, AD) == N + ONE


def test_normal_order_adagger_a_is_unchanged():
    assert multiply(AD, A) == N


def test_normal_order_a2_adagger2():
    expected = mono(1, (2,), (2,)) + mono(1, (1,), (1,), coeff=4) + OperatorExpression.scalar(1, 2)
    assert multiply(mono(1, (0,), (2,)), mono(1, (2,), (0,))) == expected


def test_normal_order_already_ordered_single_term():
    out = normal_order_product(
        LadderMonomial((2,), (0,), 1), LadderMonomial((0,), (3,), 2)
    )
    assert out == mono(1, (2,), (3,), 3)
    assert len(out) == 1


def test_multiply_by_zero_and_one():
    f = mono(1, (2,), (1,), 3, GaussianRational(mpq(2, 3), mpq(-1, 2)))
    assert multiply(OperatorExpression.zero(1), f).is_zero
    assert multiply(ONE, f) == f
    assert multiply(f, ONE) == f


def test_multiply_mixed_signs():
    # (a' + a)(a' - a) = a'^2 - a^2 + 1: the cross terms leave one
    # commutator behind; value pinned by the dense oracle.
    out = multiply(AD + A, AD - A)
    expected = mono(1, (2,), (0,)) - mono(1, (0,), (2,)) + ONE
    assert out == expected
    lhs = expression_matrix(out, 10)
    rhs = expression_matrix(AD + A, 10) @ expression_matrix(AD - A, 10)
    assert interior_close(lhs, rhs, 1, 10, 2)


# ---- commutators -------------------------------------------------------------


def test_commutator_number_with_adagger():
    assert commutator(N, AD) == AD


def test_commutator_self_is_zero():
    f = mono(1, (2,), (1,)) + mono(1, (0,), (3,), 2)
    assert commutator(f, f).is_zero


def test_commutator_ladder_weight_one():
    f = mono(1, (2,), (1,))
    assert commutator(N, f) == f


# ---- adjoint and hermiticity -------------------------------------------------


def test_adjoint_swaps_ladders():
    assert adjoint(AD) == A
    assert adjoint(N) == N
    assert adjoint(mono(1, (2,), (0,), coeff=I)) == mono(1, (0,), (2,), coeff=-I)


def test_is_hermitian_examples():
    assert is_hermitian(N)
    assert not is_hermitian(AD)
    assert is_hermitian((mono(1, (2,), (0,)) - mono(1, (0,), (2,))).scaled(I))


# ---- position/momentum substitution ------------------------------------------


def test_q_substitution():
    q = from_position_momentum({((1,), (0,)): mpq(1)}, 1)
    assert q == mono(1, (1,), (0,), 1) + mono(1, (0,), (1,), 1)


def test_p_substitution():
    p = from_position_momentum({((0,), (1,)): mpq(1)}, 1)
    assert p == (mono(1, (1,), (0,), 1) - mono(1, (0,), (1,), 1)).scaled(I)


def test_qp_canonical_order_and_commutator():
    q = from_position_momentum({((1,), (0,)): mpq(1)}, 1)
    p = from_position_momentum({((0,), (1,)): mpq(1)}, 1)
    qp = from_position_momentum({((1,), (1,)): mpq(1)}, 1)
    assert qp == multiply(q, p)
    # [q, p] = i hbar
    assert commutator(q, p) == OperatorExpression.scalar(1, I * 2, sqrt_hbar=2)


def test_quartic_substitution_matches_display(quartic_h1):
    binomials = {(4, 0): 1, (3, 1): 4, (2, 2): 6, (1, 3): 4, (0, 4): 1,
                 (2, 0): 6, (1, 1): 12, (0, 2): 6, (0, 0): 3}
    display = OperatorExpression.zero(1)
    for (m, n), c in binomials.items():
        display = display + mono(1, (m,), (n,), coeff=c)
    expected = multiply(display, hbar_power(1, 2)).scaled(mpq(1, 16))
    assert quartic_h1 == expected


def test_hbar_power_is_two_u_squared():
    assert hbar_power(1, 1) == OperatorExpression.scalar(1, 2, sqrt_hbar=2)
    assert hbar_power(2, 3) == OperatorExpression.scalar(2, 8, sqrt_hbar=6)


# ---- representation invariants -------------------------------------------------


def test_no_zero_coefficients_stored():
    f = mono(1, (2,), (1,)) - mono(1, (2,), (1,))
    assert f.is_zero and len(f) == 0


def test_zero_mode_count_rejected():
    with pytest.raises(ValueError):
        OperatorExpression.zero(0)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionMismatchError):
        multiply(AD, mono(2, (1, 0), (0, 0)))
    with pytest.raises(DimensionMismatchError):
        _ = AD + mono(2, (1, 0), (0, 0))


def test_term_order_deterministic():
    parts = [
        mono(1, (2,), (0,), 2, 3),
        mono(1, (0,), (1,), 0, GaussianRational(0, 1)),
        mono(1, (1,), (1,), 4, mpq(-1, 2)),
    ]
    left = parts[0] + parts[1] + parts[2]
    right = parts[2] + parts[0] + parts[1]
    assert left == right
    assert left.terms() == right.terms()
    assert str(left) == str(right)
    assert hash(left) == hash(right)


# ---- alpha series ------------------------------------------------------------


def test_alpha_series_shape_rules():
    s = AlphaSeries.perturbed(N, {1: AD}, 2)
    assert s.order == 2 and s[2].is_zero
    with pytest.raises(ValueError):
        _ = s + s.truncated(1)
    assert s.truncated(1).order == 1
    assert not s.is_hermitian()
    assert AlphaSeries.perturbed(N, {1: AD + adjoint(AD)}, 1).is_hermitian()


def test_alpha_series_arithmetic():
    s = AlphaSeries.perturbed(N, {1: AD + A, 2: N}, 2)
    assert (s - s).is_zero
    assert (s + s) == s.scaled(2)
    assert s.term_counts() == (1, 2, 1)


# ---- property-based checks ---------------------------------------------------


def expressions(d: int, max_terms: int = 3, max_power: int = 2):
    rational = st.builds(mpq, st.integers(-3, 3), st.integers(1, 3))
    coeff = st.builds(GaussianRational, rational, rational)
    term = st.tuples(
        st.tuples(*[st.integers(0, max_power)] * d),
        st.tuples(*[st.integers(0, max_power)] * d),
        st.integers(0, 3),
        coeff,
    )
    return st.lists(term, min_size=0, max_size=max_terms).map(
        lambda terms: sum(
            (OperatorExpression.monomial(d, dg, lw, e, c) for dg, lw, e, c in terms),
            OperatorExpression.zero(d),
        )
    )


@settings(max_examples=60, deadline=None)
@given(expressions(1), expressions(1), expressions(1))
def test_ring_axioms(f, g, h):
    assert multiply(multiply(f, g), h) == multiply(f, multiply(g, h))
    assert multiply(f, g + h) == multiply(f, g) + multiply(f, h)
    assert multiply(f + g, h) == multiply(f, h) + multiply(g, h)


@settings(max_examples=60, deadline=None)
@given(expressions(2, max_power=1), expressions(2, max_power=1))
def test_adjoint_antihomomorphism(f, g):
    assert adjoint(multiply(f, g)) == multiply(adjoint(g), adjoint(f))
    assert adjoint(adjoint(f)) == f


@settings(max_examples=40, deadline=None)
@given(expressions(1), expressions(1), expressions(1))
def test_commutator_jacobi_derivation(f, g, h):
    lhs = commutator(g, commutator(f, h))
    rhs = commutator(commutator(g, f), h) + commutator(f, commutator(g, h))
    assert lhs == rhs


@pytest.mark.parametrize("d", [1, 2])
def test_multiply_against_dense_oracle(d):
    rng = random.Random(1234 + d)
    n_max = 12 if d == 1 else 8
    for _ in range(12):
        f = random_expression(rng, d, max_terms=3, max_power=2)
        g = random_expression(rng, d, max_terms=3, max_power=2)
        margin = f.max_ladder_power() + g.max_ladder_power()
        if margin >= n_max:
            continue
        lhs = expression_matrix(multiply(f, g), n_max)
        rhs = expression_matrix(f, n_max) @ expression_matrix(g, n_max)
        assert interior_close(lhs, rhs, d, n_max, margin)
