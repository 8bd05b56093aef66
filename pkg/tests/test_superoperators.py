import random

import pytest
from gmpy2 import mpq

from conftest import random_expression
from laddercpt import (
    AlphaSeries,
    DimensionMismatchError,
    GaussianRational,
    KatoKind,
    LadderMonomial,
    ModeSystem,
    OperatorExpression,
    adjoint,
    commutator,
    composition_count,
    hbar_power,
    integrate,
    kato_apply,
    kato_generator,
    kato_series_apply,
    liouville_h0,
    multiply,
    project,
    weight,
)
from laddercpt.ladder_algebra import GR_I, GR_MINUS_I
from oracles import brute_force_compositions

I = GaussianRational(0, 1)


def mono(d, dagger, lower, e=0, coeff=1):
    return OperatorExpression.monomial(d, dagger, lower, e, coeff)


# ---- mode systems ------------------------------------------------------------


def test_mode_system_validation():
    with pytest.raises(ValueError):
        ModeSystem(())
    with pytest.raises(ValueError):
        ModeSystem((mpq(0),))
    with pytest.raises(ValueError):
        ModeSystem((mpq(-1), mpq(1)))


def test_h0_form(sys1, sys11):
    # H0 = sum_k omega_k hbar (N_k + 1/2) = sum_k omega_k (2 N_k + 1) u^2
    assert sys1.h0() == OperatorExpression.scalar(1, 1, sqrt_hbar=2) + mono(
        1, (1,), (1,), 2, 2
    )
    expected = OperatorExpression.scalar(2, 2, sqrt_hbar=2)
    expected = expected + mono(2, (1, 0), (1, 0), 2, 2)
    expected = expected + mono(2, (0, 1), (0, 1), 2, 2)
    assert sys11.h0() == expected


# ---- weight, project, integrate ------------------------------------------------


def test_weight_examples(sys1, sys11):
    assert weight(LadderMonomial((2,), (0,), 0), sys1) == 2
    assert weight(LadderMonomial((1,), (1,), 0), sys1) == 0
    assert weight(LadderMonomial((1, 0), (0, 1), 0), sys11) == 0
    with pytest.raises(DimensionMismatchError):
        weight(LadderMonomial((1,), (0,), 0), sys11)


def test_project_examples(sys1):
    f = mono(1, (1,), (1,)) + mono(1, (2,), (0,))
    assert project(f, sys1) == mono(1, (1,), (1,))
    assert project(project(f, sys1), sys1) == project(f, sys1)


def test_project_quartic_display(sys1, quartic_h1):
    display = (
        mono(1, (2,), (2,), coeff=6)
        + mono(1, (1,), (1,), coeff=12)
        + OperatorExpression.scalar(1, 3)
    )
    expected = multiply(display, hbar_power(1, 2)).scaled(mpq(1, 16))
    assert project(quartic_h1, sys1) == expected


def test_integrate_examples(sys1):
    ad2 = mono(1, (2,), (0,))
    # S a'^2 = a'^2 / (2 hbar): coefficient 1/2, u-exponent lowered by 2
    assert integrate(ad2, sys1) == mono(1, (2,), (0,), -2, mpq(1, 4))
    assert integrate(ad2, sys1) == multiply(
        ad2.scaled(mpq(1, 2)), hbar_power(1, -1)
    )
    assert integrate(mono(1, (1,), (1,)), sys1).is_zero
    # recovery: [H0, S a'^2] = a'^2
    assert commutator(sys1.h0(), integrate(ad2, sys1)) == ad2


def test_integrate_power(sys1):
    f = mono(1, (3,), (1,), 4) + mono(1, (1,), (1,), 4)
    assert integrate(f, sys1, 2) == integrate(integrate(f, sys1), sys1)


def test_hbar_negative_powers():
    assert hbar_power(1, -1) == OperatorExpression.scalar(
        1, mpq(1, 2), sqrt_hbar=-2
    )


@pytest.mark.parametrize("d,seed", [(1, 7), (2, 11)])
def test_superoperator_identities_random(d, seed):
    omega = (mpq(1),) if d == 1 else (mpq(2), mpq(3))
    sys_ = ModeSystem(omega)
    rng = random.Random(seed)
    for _ in range(25):
        f = random_expression(rng, d, max_terms=5, max_power=4)
        pf = project(f, sys_)
        sf = integrate(f, sys_)
        assert project(pf, sys_) == pf
        assert project(sf, sys_).is_zero
        assert integrate(pf, sys_).is_zero
        # S L0 = L0 S = 1 - P
        assert integrate(liouville_h0(f, sys_), sys_) == f - pf
        assert liouville_h0(sf, sys_) == f - pf
        # L0 agrees with an explicit commutator against H0
        assert liouville_h0(f, sys_) == commutator(sys_.h0(), f)


# ---- perturbed superoperators ---------------------------------------------------


def test_kato_apply_unperturbed_limits(sys1, quartic_h1):
    rng = random.Random(3)
    for _ in range(5):
        f = random_expression(rng, 1)
        assert kato_apply(KatoKind.PROJECTOR, 0, f, sys1, quartic_h1) == project(
            f, sys1
        )
        assert kato_apply(KatoKind.INTEGRATOR, 0, f, sys1, quartic_h1) == integrate(
            f, sys1
        )


def test_eigen_nilpotent_starts_at_order_one(sys1, quartic_h1):
    f = mono(1, (2,), (0,))
    with pytest.raises(ValueError):
        kato_apply(KatoKind.EIGEN_NILPOTENT, 0, f, sys1, quartic_h1)
    with pytest.raises(ValueError):
        composition_count(KatoKind.EIGEN_NILPOTENT, 0)
    kato_apply(KatoKind.EIGEN_NILPOTENT, 1, f, sys1, quartic_h1)


def test_non_hermitian_perturbation_rejected(sys1):
    with pytest.raises(ValueError):
        kato_apply(KatoKind.PROJECTOR, 1, mono(1, (1,), (1,)), sys1, mono(1, (2,), (0,)))
    with pytest.raises(ValueError):
        kato_generator(sys1, mono(1, (2,), (0,)), 2)


def test_composition_count_examples():
    assert composition_count(KatoKind.PROJECTOR, 1) == 2
    assert composition_count(KatoKind.PROJECTOR, 2) == 6
    assert composition_count(KatoKind.INTEGRATOR, 2) == 10


@pytest.mark.parametrize(
    "kind", [KatoKind.PROJECTOR, KatoKind.INTEGRATOR, KatoKind.EIGEN_NILPOTENT]
)
def test_composition_count_brute_force(kind):
    start = 1 if kind is KatoKind.EIGEN_NILPOTENT else 0
    for n in range(start, 7):
        enumerated = brute_force_compositions(kind.s_weight(n), n + 1)
        assert composition_count(kind, n) == len(enumerated)


def test_integrator_images_anti_hermitian(sys1, quartic_h1):
    rng = random.Random(17)
    for n in range(3):
        g = random_expression(rng, 1, hermitian=True)
        img = kato_apply(KatoKind.INTEGRATOR, n, g, sys1, quartic_h1)
        assert adjoint(img) == -img
        pimg = kato_apply(KatoKind.PROJECTOR, n, g, sys1, quartic_h1)
        assert adjoint(pimg) == pimg


# ---- generator ---------------------------------------------------------------


def test_generator_is_alpha_series(sys1, quartic_h1):
    g = kato_generator(sys1, quartic_h1, 3)
    assert isinstance(g, AlphaSeries)
    assert g.order == 3
    assert g.is_hermitian()


def test_generator_order_zero(sys1, quartic_h1):
    g = kato_generator(sys1, quartic_h1, 0)
    assert g.order == 0
    assert g[0] == integrate(quartic_h1, sys1).scaled(GR_I)


@pytest.mark.parametrize("fixture", ["quartic", "henon-heiles"])
def test_generator_first_orders_match_manual_chains(
    fixture, sys1, sys11, quartic_h1, henon_heiles_h1
):
    sys_, h1 = (
        (sys1, quartic_h1) if fixture == "quartic" else (sys11, henon_heiles_h1)
    )
    g = kato_generator(sys_, h1, 1)

    def S(x, k=1):
        return integrate(x, sys_, k)

    def P(x):
        return project(x, sys_)

    assert g[0] == S(h1).scaled(GR_I)
    chain = (
        S(commutator(h1, S(h1)))
        - S(commutator(h1, P(h1)), 2)
        - P(commutator(h1, S(h1, 2)))
    )
    assert g[1] == chain.scaled(GR_MINUS_I)


@pytest.mark.parametrize("fixture", ["quartic", "henon-heiles"])
def test_generator_equals_integrator_series(
    fixture, sys1, sys11, quartic_h1, henon_heiles_h1
):
    # G = i S_H H1: the table must reproduce the direct composition sums.
    sys_, h1 = (
        (sys1, quartic_h1) if fixture == "quartic" else (sys11, henon_heiles_h1)
    )
    g = kato_generator(sys_, h1, 3)
    for n in range(4):
        direct = kato_apply(KatoKind.INTEGRATOR, n, h1, sys_, h1).scaled(GR_I)
        assert g[n] == direct


def test_generator_resonant_perturbation(sys1):
    # H1 commuting with H0: S H1 = 0, so G_0 = 0 and every higher row
    # starts from brackets of H1 with itself, which vanish.
    h1 = mono(1, (2,), (2,), 0, 1) + mono(1, (1,), (1,), 0, mpq(1, 2))
    assert project(h1, sys1) == h1
    g = kato_generator(sys1, h1, 3)
    assert all(c.is_zero for c in g)
    # order-alpha^1 reduction: with S H1 = 0 the displayed chain loses its
    # S L S term and the remaining two vanish on [H1, P H1] = 0.
    assert commutator(h1, project(h1, sys1)).is_zero


# ---- truncated Kato identities -------------------------------------------------


def _series_of(f, order):
    zero = OperatorExpression.zero(f.d)
    return AlphaSeries((f,) + (zero,) * order)


@pytest.mark.parametrize("seed", [23, 29])
def test_kato_identities_order_three(sys1, quartic_h1, seed):
    h1 = quartic_h1
    order = 3
    rng = random.Random(seed)
    f = random_expression(rng, 1, max_terms=3, max_power=3, hermitian=True)
    fs = _series_of(f, order)

    def series(kind, operand):
        return kato_series_apply(kind, operand, sys1, h1, order)

    p_f = series(KatoKind.PROJECTOR, fs)
    s_f = series(KatoKind.INTEGRATOR, fs)
    d_f = series(KatoKind.EIGEN_NILPOTENT, fs)

    # P_H P_H = P_H
    assert series(KatoKind.PROJECTOR, p_f) == p_f

    # S_H L_H = 1 - P_H, with (L_H F)_n = [H0, F] at n=0 plus [H1, F] at n=1
    lhf = AlphaSeries(
        (
            commutator(sys1.h0(), f),
            commutator(h1, f),
        )
        + (OperatorExpression.zero(1),) * (order - 1)
    )
    assert series(KatoKind.INTEGRATOR, lhf) == fs - p_f

    # L_H P_H = P_H L_H = D_H
    def l_h(series_in):
        coeffs = []
        for n in range(order + 1):
            acc = commutator(sys1.h0(), series_in[n])
            if n >= 1:
                acc = acc + commutator(h1, series_in[n - 1])
            coeffs.append(acc)
        return AlphaSeries(coeffs)

    assert l_h(p_f) == series(KatoKind.PROJECTOR, l_h(fs))
    assert l_h(p_f) == d_f

    # S_H images of a Hermitian operand are anti-Hermitian
    for c in s_f:
        assert adjoint(c) == -c


def test_projector_fixes_hamiltonian(sys1, quartic_h1):
    order = 4
    h = AlphaSeries.perturbed(sys1.h0(), {1: quartic_h1}, order)
    assert kato_series_apply(KatoKind.PROJECTOR, h, sys1, quartic_h1, order) == h


@pytest.mark.parametrize("seed", [41, 43])
def test_projector_transforms_canonically(sys1, quartic_h1, seed):
    # d/dalpha P_H F = (P_H L_K - L_K P_H) F with K = S_H H1, coefficient-wise.
    h1 = quartic_h1
    order = 3
    rng = random.Random(seed)
    f = random_expression(rng, 1, max_terms=3, max_power=3, hermitian=True)
    fs = _series_of(f, order + 1)
    p_f = kato_series_apply(KatoKind.PROJECTOR, fs, sys1, h1, order + 1)
    s_h1 = [kato_apply(KatoKind.INTEGRATOR, b, h1, sys1, h1) for b in range(order + 1)]
    for n in range(order + 1):
        lhs = p_f[n + 1].scaled(n + 1)
        rhs = OperatorExpression.zero(1)
        for a in range(n + 1):
            b = n - a
            rhs = rhs + kato_apply(
                KatoKind.PROJECTOR, a, commutator(s_h1[b], f), sys1, h1
            )
            rhs = rhs - commutator(s_h1[b], p_f[a])
        assert lhs == rhs, f"canonical identity fails at alpha^{n}"
