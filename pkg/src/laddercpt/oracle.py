"""Dense Fock-space realizations for numerical cross-checks.

Symbolic results are exact; this module exists to catch conceptual errors
rather than arithmetic ones.  Operators are realized on the truncated
occupation basis ``|n_1 .. n_d>`` with ``0 <= n_k <= n_max`` and compared in
floating point, and effective spectra are validated against dense
diagonalization of the full Hamiltonian at small coupling.

Truncation is the dominant systematic: an operator moving more than
``n_max`` quanta loses matrix elements, and eigenvectors leaking into the
highest occupation states signal an unconverged reference spectrum.  Both
effects are surfaced as explicit flags instead of being absorbed into
tolerances.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .ladder_algebra import AlphaSeries, OperatorExpression
from .superoperators import ModeSystem

__all__ = [
    "FockMatrix",
    "EigenvalueReport",
    "fock_matrix",
    "series_matrix",
    "matrix_project",
    "matrix_integrate",
    "eigenvalue_check",
]


@dataclass(frozen=True)
class FockMatrix:
    """A dense operator on the truncated occupation basis.

    ``occupations[i]`` is the occupation tuple of basis state ``i``; states
    are ordered mode-major, the last mode varying fastest.  ``truncated``
    records whether the source expression moves more quanta than the basis
    holds, in which case matrix elements near the boundary are wrong.
    """

    matrix: np.ndarray
    n_max: int
    hbar: float
    occupations: tuple
    truncated: bool

    @property
    def d(self) -> int:
        return len(self.occupations[0])

    @property
    def dim(self) -> int:
        return len(self.occupations)


def _basis(d: int, n_max: int) -> tuple:
    return tuple(itertools.product(range(n_max + 1), repeat=d))


def fock_matrix(
    f: OperatorExpression, n_max: int, hbar: float = 1.0
) -> FockMatrix:
    """Realize a normal-ordered expression on the truncated Fock basis.

    Each monomial acts columnwise: the lowering part contributes the square
    root of a falling factorial of the occupations, the raising part the
    square root of a rising one, and the stored half-quantum exponent ``e``
    scales the entry by ``(hbar/2)^(e/2)``.  Rows pushed past ``n_max`` are
    dropped, which is the truncation error tracked by ``truncated``.
    """
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    d = f.d
    basis = _basis(d, n_max)
    index = {occ: i for i, occ in enumerate(basis)}
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    half = 0.5 * hbar
    for mono, coeff in f.items():
        scale = complex(coeff) * half ** (mono.sqrt_hbar / 2)
        dagger, lower = mono.dagger, mono.lower
        for j, occ in enumerate(basis):
            amp = 1
            out = []
            for k in range(d):
                n, lw, dg = occ[k], lower[k], dagger[k]
                if n < lw or n - lw + dg > n_max:
                    amp = 0
                    break
                for t in range(lw):
                    amp *= n - t
                for t in range(1, dg + 1):
                    amp *= n - lw + t
                out.append(n - lw + dg)
            if amp:
                m[index[tuple(out)], j] += scale * math.sqrt(amp)
    return FockMatrix(
        matrix=m,
        n_max=n_max,
        hbar=hbar,
        occupations=basis,
        truncated=f.max_ladder_power() > n_max,
    )


def series_matrix(
    series: AlphaSeries, alpha: float, n_max: int, hbar: float = 1.0
) -> FockMatrix:
    """Evaluate an alpha series numerically: ``sum_n alpha^n fock(H_n)``."""
    basis = _basis(series.d, n_max)
    m = np.zeros((len(basis), len(basis)), dtype=complex)
    truncated = False
    for n, c in enumerate(series):
        if c.is_zero:
            continue
        fm = fock_matrix(c, n_max, hbar)
        m += alpha**n * fm.matrix
        truncated = truncated or fm.truncated
    return FockMatrix(
        matrix=m, n_max=n_max, hbar=hbar, occupations=basis, truncated=truncated
    )


def _energy_blocks(fm: FockMatrix, sys: ModeSystem) -> list:
    """Basis indices grouped by the exact rational ``sum_k omega_k n_k``.

    Resonances must be decided exactly: comparing floating-point energies
    misclassifies states whenever frequencies are rationally related.
    """
    if len(sys.omega) != fm.d:
        raise ValueError("matrix and system mode counts differ")
    blocks: dict = {}
    for i, occ in enumerate(fm.occupations):
        e = sum(w * n for w, n in zip(sys.omega, occ))
        blocks.setdefault(e, []).append(i)
    return list(blocks.items())


def _with_matrix(fm: FockMatrix, m: np.ndarray) -> FockMatrix:
    return FockMatrix(
        matrix=m,
        n_max=fm.n_max,
        hbar=fm.hbar,
        occupations=fm.occupations,
        truncated=fm.truncated,
    )


def matrix_project(fm: FockMatrix, sys: ModeSystem) -> FockMatrix:
    """Keep the matrix elements between states of equal unperturbed energy."""
    m = np.zeros_like(fm.matrix)
    for _, idx in _energy_blocks(fm, sys):
        m[np.ix_(idx, idx)] = fm.matrix[np.ix_(idx, idx)]
    return _with_matrix(fm, m)


def matrix_integrate(fm: FockMatrix, sys: ModeSystem) -> FockMatrix:
    """Divide off-block elements by their Liouvillian eigenvalue.

    The element between states of unperturbed energies ``E_i`` and ``E_j``
    picks up ``1 / (hbar (E_i - E_j))``; equal-energy elements are zeroed,
    matching the symbolic integrating superoperator.
    """
    blocks = _energy_blocks(fm, sys)
    m = np.zeros_like(fm.matrix)
    for ei, rows in blocks:
        for ej, cols in blocks:
            if ei != ej:
                sub = np.ix_(rows, cols)
                m[sub] = fm.matrix[sub] / (fm.hbar * float(ei - ej))
    return _with_matrix(fm, m)


@dataclass(frozen=True)
class EigenvalueReport:
    """Comparison of an effective spectrum against dense diagonalization.

    ``ratio`` is the worst deviation divided by ``alpha^(N+1)``; for a
    correct order-``N`` effective Hamiltonian it stays bounded as ``alpha``
    shrinks.  ``boundary_weight`` is the largest probability any compared
    reference eigenvector puts on states with an occupation at ``n_max``;
    past ``boundary_tol`` the reference spectrum itself is unconverged and
    ``truncation_warning`` is set.
    """

    alpha: float
    hbar: float
    n_max: int
    k_lowest: int
    order: int
    reference_eigenvalues: tuple
    effective_eigenvalues: tuple
    deviations: tuple
    max_abs_deviation: float
    ratio: float
    boundary_weight: float
    truncation_warning: bool


def eigenvalue_check(
    htilde: AlphaSeries,
    hamiltonian: AlphaSeries,
    sys: ModeSystem,
    hbar: float = 1.0,
    alpha: float = 1e-3,
    n_max: int = 30,
    k_lowest: int = 5,
    boundary_tol: float = 1e-8,
) -> EigenvalueReport:
    """Compare the lowest eigenvalues of an effective Hamiltonian with the
    dense spectrum of the Hamiltonian it came from.

    The effective series is block-diagonal, so its eigenvalues must agree
    with the reference to the order of the truncation; the report carries
    the raw deviations and the ``alpha^(N+1)``-scaled ratio.
    """
    if htilde.d != hamiltonian.d or htilde.d != sys.d:
        raise ValueError("series and system mode counts differ")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    order = htilde.order
    ref = series_matrix(hamiltonian, alpha, n_max, hbar)
    eff = series_matrix(htilde, alpha, n_max, hbar)
    k = min(k_lowest, ref.dim)
    ref_vals, ref_vecs = np.linalg.eigh(ref.matrix)
    eff_vals = np.linalg.eigvalsh(eff.matrix)
    on_boundary = np.array(
        [max(occ) == n_max for occ in ref.occupations], dtype=bool
    )
    boundary_weight = 0.0
    for i in range(k):
        w = float(np.sum(np.abs(ref_vecs[on_boundary, i]) ** 2))
        boundary_weight = max(boundary_weight, w)
    deviations = tuple(float(x) for x in (eff_vals[:k] - ref_vals[:k]))
    max_dev = max((abs(x) for x in deviations), default=0.0)
    return EigenvalueReport(
        alpha=alpha,
        hbar=hbar,
        n_max=n_max,
        k_lowest=k,
        order=order,
        reference_eigenvalues=tuple(float(x) for x in ref_vals[:k]),
        effective_eigenvalues=tuple(float(x) for x in eff_vals[:k]),
        deviations=deviations,
        max_abs_deviation=max_dev,
        ratio=max_dev / alpha ** (order + 1),
        boundary_weight=boundary_weight,
        truncation_warning=boundary_weight > boundary_tol
        or ref.truncated
        or eff.truncated,
    )
