"""Command-line front end: problem files in, exact results and benchmarks out.

Problem files are line-oriented: ``modes <d>``, ``omega <r1> .. <rd>``,
``perturb <order> <polynomial>``, or the shortcut ``system <name>`` for a
built-in problem.  Polynomials use ``q1..qd``, ``p1..pd``, rational
literals ``p/q`` and ``+ - * ^ ( )``; they are read as classical
(commuting) expressions and quantized with ``q`` before ``p`` on each mode.

Results serialize exactly: every coefficient is a pair of rational strings
attached to a normal-ordered monomial and a power of ``u = sqrt(hbar/2)``,
so output bytes are deterministic for a fixed problem, method and order.
Timings go to stderr, never into the result payload.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys as _sys
import time
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from gmpy2 import mpq

from .ladder_algebra import (
    AlphaSeries,
    DimensionMismatchError,
    GaussianRational,
    LadderMonomial,
    OperatorExpression,
    from_position_momentum,
)
from .oracle import EigenvalueReport, eigenvalue_check
from .superoperators import ModeSystem
from .transforms import (
    BlockDiagonalizationError,
    BlockDiagonalResult,
    RunStats,
    kato_block_diagonalize,
    magnus_block_diagonalize,
    van_vleck_block_diagonalize,
)

__all__ = [
    "ParseError",
    "ProblemSpec",
    "RunReport",
    "BUILTIN_PROBLEMS",
    "BENCHMARK_RECORD_SCHEMA",
    "builtin_problem",
    "parse_problem",
    "serialize_problem",
    "series_records",
    "series_from_records",
    "result_to_json",
    "result_from_json",
    "run",
    "benchmark",
    "main",
]

METHODS = ("kato", "vanvleck", "magnus")
RESULT_FORMAT = "laddercpt-result-1"
UNITS_NOTE = (
    "sqrt_hbar is the exponent of u = sqrt(hbar/2); hbar = 2 u^2"
)


class ParseError(ValueError):
    """A problem-file error with its line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# ---- polynomial parsing ------------------------------------------------------

# A classical polynomial is a map (q exponents, p exponents) -> rational;
# quantization happens once, at the end, in canonical q-before-p order.


def _poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for k, v in b.items():
        s = out.get(k, 0) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)
    return out


def _poly_mul(a: dict, b: dict) -> dict:
    out: dict = {}
    for (qa, pa), va in a.items():
        for (qb, pb), vb in b.items():
            k = (
                tuple(x + y for x, y in zip(qa, qb)),
                tuple(x + y for x, y in zip(pa, pb)),
            )
            s = out.get(k, 0) + va * vb
            if s:
                out[k] = s
            else:
                out.pop(k, None)
    return out


def _poly_scale(a: dict, c) -> dict:
    return {k: c * v for k, v in a.items()} if c else {}


class _Token:
    __slots__ = ("kind", "text", "line", "column")

    def __init__(self, kind: str, text: str, line: int, column: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _tokenize(text: str, line: int, column0: int) -> list:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        col = column0 + i
        if ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, col))
            i = j
        elif ch in "qp":
            j = i + 1
            while j < len(text) and text[j].isdigit():
                j += 1
            if j == i + 1:
                raise ParseError(f"variable {ch!r} needs a mode index", line, col)
            tokens.append(_Token("var", text[i:j], line, col))
            i = j
        elif ch in "+-*/^()":
            tokens.append(_Token(ch, ch, line, col))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, column0 + len(text)))
    return tokens


class _PolyParser:
    """Recursive-descent parser for ``+ - * ^``-polynomials in q_k, p_k."""

    def __init__(self, tokens: list, d: int):
        self.tokens = tokens
        self.pos = 0
        self.d = d

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    def parse(self) -> dict:
        poly = self.expr()
        if self.peek().kind != "end":
            raise self.fail(f"unexpected {self.peek().text!r}")
        return poly

    def expr(self) -> dict:
        poly = self.signed_term()
        while self.peek().kind in "+-":
            op = self.take().kind
            term = self.signed_term()
            poly = _poly_add(poly, term if op == "+" else _poly_scale(term, -1))
        return poly

    def signed_term(self) -> dict:
        if self.peek().kind == "-":
            self.take()
            return _poly_scale(self.term(), -1)
        if self.peek().kind == "+":
            self.take()
        return self.term()

    def term(self) -> dict:
        poly = self.factor()
        while self.peek().kind == "*":
            self.take()
            poly = _poly_mul(poly, self.factor())
        return poly

    def factor(self) -> dict:
        poly = self.atom()
        if self.peek().kind == "^":
            self.take()
            if self.peek().kind != "int":
                raise self.fail("exponent must be a nonnegative integer")
            tok = self.take()
            out = {((0,) * self.d, (0,) * self.d): mpq(1)}
            for _ in range(int(tok.text)):
                out = _poly_mul(out, poly)
            poly = out
        return poly

    def atom(self) -> dict:
        tok = self.peek()
        if tok.kind == "int":
            self.take()
            num = int(tok.text)
            if self.peek().kind == "/":
                self.take()
                den_tok = self.peek()
                if den_tok.kind != "int":
                    raise self.fail("denominator must be an integer")
                self.take()
                if int(den_tok.text) == 0:
                    raise ParseError(
                        "division by zero", den_tok.line, den_tok.column
                    )
                value = mpq(num, int(den_tok.text))
            else:
                value = mpq(num)
            if not value:
                return {}
            return {((0,) * self.d, (0,) * self.d): value}
        if tok.kind == "var":
            self.take()
            index = int(tok.text[1:])
            if not 1 <= index <= self.d:
                raise ParseError(
                    f"mode index {index} outside 1..{self.d}", tok.line, tok.column
                )
            q = [0] * self.d
            p = [0] * self.d
            (q if tok.text[0] == "q" else p)[index - 1] = 1
            return {(tuple(q), tuple(p)): mpq(1)}
        if tok.kind == "(":
            self.take()
            poly = self.expr()
            if self.peek().kind != ")":
                raise self.fail("expected ')'")
            self.take()
            return poly
        raise self.fail(
            "expected a rational, a variable or '('"
            if tok.kind != "end"
            else "unexpected end of polynomial"
        )


def _format_polynomial(terms: Mapping, d: int) -> str:
    if not terms:
        return "0"
    parts = []
    for (qexp, pexp), coeff in sorted(terms.items()):
        factors = [
            f"{name}{k + 1}" + (f"^{e}" if e > 1 else "")
            for exps, name in ((qexp, "q"), (pexp, "p"))
            for k, e in enumerate(exps)
            if e
        ]
        mag = abs(coeff)
        if mag != 1 or not factors:
            factors.insert(0, str(mag))
        body = "*".join(factors)
        if not parts:
            parts.append(f"-{body}" if coeff < 0 else body)
        else:
            parts.append(f"{'-' if coeff < 0 else '+'} {body}")
    return " ".join(parts)


# ---- problem specifications --------------------------------------------------


@dataclass(frozen=True)
class ProblemSpec:
    """A validated problem: mode frequencies plus a perturbation polynomial
    per alpha order, stored in canonical form."""

    builtin: str
    d: int
    omega: tuple
    perturbation: tuple

    @property
    def name(self) -> str:
        return self.builtin

    def mode_system(self) -> ModeSystem:
        return ModeSystem(self.omega)

    def perturbation_polynomials(self) -> dict:
        return {order: dict(terms) for order, terms in self.perturbation}

    def perturbation_expressions(self) -> dict:
        return {
            order: from_position_momentum(dict(terms), self.d)
            for order, terms in self.perturbation
        }

    def hamiltonian_series(self, order: int) -> AlphaSeries:
        return AlphaSeries.perturbed(
            self.mode_system().h0(), self.perturbation_expressions(), order
        )

    def single_perturbation(self) -> OperatorExpression:
        """The alpha^1 polynomial, for methods that require exactly one."""
        orders = [order for order, _ in self.perturbation]
        if orders != [1]:
            raise ValueError(
                "this method needs the perturbation to sit at alpha^1 only; "
                f"got orders {orders}"
            )
        return self.perturbation_expressions()[1]


def _canonical_perturbation(parts: Mapping[int, Mapping]) -> tuple:
    return tuple(
        (order, tuple(sorted(parts[order].items())))
        for order in sorted(parts)
        if parts[order]
    )


_QUARTIC_POLY = {((4,), (0,)): mpq(1, 4)}
_HENON_HEILES_POLY = {
    ((2, 1), (0, 0)): mpq(1),
    ((0, 3), (0, 0)): mpq(-1, 3),
}

BUILTIN_PROBLEMS = ("quartic", "henon-heiles")


def builtin_problem(name: str) -> ProblemSpec:
    """The two reference problems: a quartic oscillator ``q^4/4`` and the
    Henon-Heiles potential ``q1^2 q2 - q2^3/3`` at unit frequencies."""
    if name == "quartic":
        return ProblemSpec(
            builtin="quartic",
            d=1,
            omega=(mpq(1),),
            perturbation=_canonical_perturbation({1: _QUARTIC_POLY}),
        )
    if name == "henon-heiles":
        return ProblemSpec(
            builtin="henon-heiles",
            d=2,
            omega=(mpq(1), mpq(1)),
            perturbation=_canonical_perturbation({1: _HENON_HEILES_POLY}),
        )
    raise ValueError(f"unknown builtin problem {name!r}")


def _parse_rational(word: str, line: int, column: int) -> mpq:
    num, slash, den = word.partition("/")
    if not num.isdigit() or (slash and not den.isdigit()):
        raise ParseError(f"expected a rational p/q, got {word!r}", line, column)
    if slash and int(den) == 0:
        raise ParseError("division by zero", line, column)
    return mpq(int(num), int(den)) if slash else mpq(int(num))


def parse_problem(text: str) -> ProblemSpec:
    """Parse and validate a problem file.

    Rejects missing or repeated sections, unknown directives, frequencies
    that are not positive rationals, out-of-range mode indices and
    non-Hermitian perturbations, each with the offending line and column.
    """
    d = None
    omega = None
    perturb: dict = {}
    system = None
    saw_custom = False
    for line_no, raw in enumerate(text.splitlines(), 1):
        content = raw.split("#", 1)[0]
        if not content.strip():
            continue
        directive = content.split()[0]
        col = content.index(directive) + 1
        rest = content[col - 1 + len(directive):]
        rest_col = col + len(directive) + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        if directive == "system":
            if system is not None:
                raise ParseError("repeated system line", line_no, col)
            if rest not in BUILTIN_PROBLEMS:
                raise ParseError(
                    f"unknown system {rest!r}; builtins: {', '.join(BUILTIN_PROBLEMS)}",
                    line_no,
                    rest_col,
                )
            system = rest
        elif directive == "modes":
            saw_custom = True
            if d is not None:
                raise ParseError("repeated modes line", line_no, col)
            if not rest.isdigit() or int(rest) < 1:
                raise ParseError(
                    "modes needs a positive integer", line_no, rest_col
                )
            d = int(rest)
        elif directive == "omega":
            saw_custom = True
            if omega is not None:
                raise ParseError("repeated omega line", line_no, col)
            if d is None:
                raise ParseError("omega before modes", line_no, col)
            words = rest.split()
            if len(words) != d:
                raise ParseError(
                    f"expected {d} frequencies, got {len(words)}", line_no, rest_col
                )
            freqs = []
            pos = col - 1 + len(directive)
            for word in words:
                wcol = content.index(word, pos) + 1
                pos = wcol - 1 + len(word)
                value = _parse_rational(word, line_no, wcol)
                if value <= 0:
                    raise ParseError(
                        "frequencies must be positive", line_no, wcol
                    )
                freqs.append(value)
            omega = tuple(freqs)
        elif directive == "perturb":
            saw_custom = True
            if d is None:
                raise ParseError("perturb before modes", line_no, col)
            words = rest.split(None, 1)
            if not words or not words[0].isdigit() or int(words[0]) < 1:
                raise ParseError(
                    "perturb needs a positive integer order", line_no, rest_col
                )
            order = int(words[0])
            if order in perturb:
                raise ParseError(
                    f"repeated perturb line for order {order}", line_no, col
                )
            if len(words) < 2:
                raise ParseError("perturb needs a polynomial", line_no, rest_col)
            poly_col = content.index(words[1], rest_col - 1 + len(words[0])) + 1
            tokens = _tokenize(words[1], line_no, poly_col)
            poly = _PolyParser(tokens, d).parse()
            expr = from_position_momentum(poly, d)
            if not expr.is_hermitian():
                raise ParseError(
                    "perturbation is not Hermitian (it mixes q and p on one mode)",
                    line_no,
                    poly_col,
                )
            perturb[order] = poly
        else:
            raise ParseError(f"unknown directive {directive!r}", line_no, col)
    if system is not None:
        if saw_custom:
            raise ParseError(
                "a system line cannot be combined with custom directives", 1, 1
            )
        return builtin_problem(system)
    if d is None:
        raise ParseError("missing modes line", 1, 1)
    if omega is None:
        raise ParseError("missing omega line", 1, 1)
    if not perturb:
        raise ParseError("missing perturb line", 1, 1)
    return ProblemSpec(
        builtin="custom",
        d=d,
        omega=omega,
        perturbation=_canonical_perturbation(perturb),
    )


def serialize_problem(spec: ProblemSpec) -> str:
    """Render a spec back to the file format; parsing the result gives an
    equal spec."""
    if spec.builtin != "custom":
        return f"system {spec.builtin}\n"
    lines = [
        f"modes {spec.d}",
        "omega " + " ".join(str(w) for w in spec.omega),
    ]
    for order, terms in spec.perturbation:
        lines.append(f"perturb {order} {_format_polynomial(dict(terms), spec.d)}")
    return "\n".join(lines) + "\n"


# ---- exact serialization -----------------------------------------------------


def series_records(series: AlphaSeries) -> list:
    """Flatten a series to sorted records, one per monomial.

    Each record is ``{alpha, dagger, lower, sqrt_hbar, re, im}`` with the
    rationals as strings; together with the mode count and order it
    reconstructs the series bit-exactly.
    """
    records = []
    for n, coeff in enumerate(series):
        for mono, value in coeff.terms():
            records.append(
                {
                    "alpha": n,
                    "dagger": list(mono.dagger),
                    "lower": list(mono.lower),
                    "sqrt_hbar": mono.sqrt_hbar,
                    "re": str(value.re),
                    "im": str(value.im),
                }
            )
    return records


def series_from_records(records: Sequence[Mapping], d: int, order: int) -> AlphaSeries:
    """Rebuild an alpha series from serialized records."""
    terms: list = [{} for _ in range(order + 1)]
    for rec in records:
        n = rec["alpha"]
        if not 0 <= n <= order:
            raise ValueError(f"record at alpha^{n} outside order {order}")
        mono = LadderMonomial(
            tuple(rec["dagger"]), tuple(rec["lower"]), rec["sqrt_hbar"]
        )
        if mono.modes != d:
            raise ValueError("record mode count differs from the problem")
        value = GaussianRational(mpq(rec["re"]), mpq(rec["im"]))
        terms[n][mono] = terms[n].get(mono, GaussianRational(0)) + value
    coeffs = []
    for bucket in terms:
        acc = OperatorExpression.zero(d)
        for mono, value in bucket.items():
            acc = acc + OperatorExpression.monomial(
                d, mono.dagger, mono.lower, mono.sqrt_hbar, value
            )
        coeffs.append(acc)
    return AlphaSeries(coeffs)


def result_to_json(spec: ProblemSpec, result: BlockDiagonalResult) -> str:
    """Serialize a block-diagonalization result to deterministic JSON."""
    gen_records = (
        series_records(AlphaSeries(result.generator.coeffs))
        if result.generator.coeffs
        else []
    )
    envelope = {
        "format": RESULT_FORMAT,
        "problem": {
            "name": spec.name,
            "modes": spec.d,
            "omega": [str(w) for w in spec.omega],
            "perturbation": {
                str(order): _format_polynomial(dict(terms), spec.d)
                for order, terms in spec.perturbation
            },
        },
        "method": result.method,
        "order": result.order,
        "units": UNITS_NOTE,
        "effective_hamiltonian": series_records(result.effective_hamiltonian),
        "generator": {
            "role": result.generator.role,
            "coefficients": gen_records,
        },
        "generator_count": len(result.generator),
    }
    return json.dumps(envelope, indent=2) + "\n"


def result_from_json(text: str):
    """Parse a result back into exact series.

    Returns ``(effective_hamiltonian, generator_coefficients, role)``; the
    round trip through :func:`result_to_json` is exact.
    """
    envelope = json.loads(text)
    if envelope.get("format") != RESULT_FORMAT:
        raise ValueError("not a recognized result payload")
    d = envelope["problem"]["modes"]
    order = envelope["order"]
    htilde = series_from_records(envelope["effective_hamiltonian"], d, order)
    count = envelope["generator_count"]
    role = envelope["generator"]["role"]
    gens: tuple
    if count == 0:
        gens = ()
    else:
        gseries = series_from_records(
            envelope["generator"]["coefficients"], d, count - 1
        )
        gens = gseries.coeffs
    return htilde, gens, role


# ---- running and benchmarking ------------------------------------------------


@dataclass(frozen=True)
class RunReport:
    """Instrumented outcome of one block-diagonalization run."""

    method: str
    order: int
    wall_time_s: float
    stages: tuple
    term_counts_effective: tuple
    term_counts_generator: tuple
    peak_terms: int
    result: BlockDiagonalResult


def run(
    spec: ProblemSpec,
    method: str,
    order: int,
    shift: AlphaSeries | None = None,
) -> RunReport:
    """Block-diagonalize a problem with one method and collect statistics."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    if order < 1:
        raise ValueError("order must be at least 1")
    if shift is not None and method != "kato":
        raise ValueError("--shift-file applies to the kato method only")
    system = spec.mode_system()
    stats = RunStats()
    t0 = time.perf_counter()
    if method == "kato":
        result = kato_block_diagonalize(
            system, spec.single_perturbation(), order, shift=shift, stats=stats
        )
    elif method == "vanvleck":
        result = van_vleck_block_diagonalize(
            system, spec.hamiltonian_series(order), order, stats=stats
        )
    else:
        result = magnus_block_diagonalize(
            system, spec.hamiltonian_series(order), order, stats=stats
        )
    wall = time.perf_counter() - t0
    return RunReport(
        method=method,
        order=order,
        wall_time_s=wall,
        stages=tuple(stats.stages),
        term_counts_effective=tuple(
            len(c) for c in result.effective_hamiltonian
        ),
        term_counts_generator=tuple(len(g) for g in result.generator),
        peak_terms=stats.peak_terms,
        result=result,
    )


BENCHMARK_RECORD_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "block-diagonalization benchmark record",
    "type": "object",
    "properties": {
        "system": {"type": "string"},
        "method": {"enum": list(METHODS)},
        "order": {"type": "integer", "minimum": 1},
        "reps": {"type": "integer", "minimum": 0},
        "min_s": {"type": ["number", "null"]},
        "median_s": {"type": ["number", "null"]},
        "timeout": {"type": "boolean"},
        "skipped": {"type": "boolean"},
        "term_counts_effective": {
            "type": ["array", "null"],
            "items": {"type": "integer", "minimum": 0},
        },
        "term_counts_generator": {
            "type": ["array", "null"],
            "items": {"type": "integer", "minimum": 0},
        },
        "peak_terms": {"type": ["integer", "null"], "minimum": 0},
    },
    "required": [
        "system",
        "method",
        "order",
        "reps",
        "min_s",
        "median_s",
        "timeout",
        "skipped",
        "term_counts_effective",
        "term_counts_generator",
        "peak_terms",
    ],
    "additionalProperties": False,
}


def benchmark(
    spec: ProblemSpec,
    methods: Sequence[str],
    max_order: int,
    reps: int = 1,
    timeout_s: float | None = None,
) -> Iterator[dict]:
    """Time every method at orders ``2 .. max_order``; one record each.

    Wall times are minima and medians over ``reps`` fresh runs.  A run
    past ``timeout_s`` sets the record's timeout flag and the method is
    skipped at higher orders (timings are reported, never asserted, and no
    record compares methods to each other).
    """
    if max_order < 2:
        raise ValueError("max_order must be at least 2")
    if reps < 1:
        raise ValueError("reps must be at least 1")
    timed_out = set()
    for order in range(2, max_order + 1):
        for method in methods:
            if method in timed_out:
                yield {
                    "system": spec.name,
                    "method": method,
                    "order": order,
                    "reps": 0,
                    "min_s": None,
                    "median_s": None,
                    "timeout": True,
                    "skipped": True,
                    "term_counts_effective": None,
                    "term_counts_generator": None,
                    "peak_terms": None,
                }
                continue
            times = []
            report = None
            hit_timeout = False
            for _ in range(reps):
                report = run(spec, method, order)
                times.append(report.wall_time_s)
                if timeout_s is not None and report.wall_time_s > timeout_s:
                    hit_timeout = True
                    timed_out.add(method)
                    break
            yield {
                "system": spec.name,
                "method": method,
                "order": order,
                "reps": len(times),
                "min_s": min(times),
                "median_s": statistics.median(times),
                "timeout": hit_timeout,
                "skipped": False,
                "term_counts_effective": list(report.term_counts_effective),
                "term_counts_generator": list(report.term_counts_generator),
                "peak_terms": report.peak_terms,
            }


# ---- output rendering --------------------------------------------------------


def _render_text(spec: ProblemSpec, report: RunReport) -> str:
    result = report.result
    lines = [
        f"problem: {spec.name}",
        f"method: {report.method}",
        f"order: {report.order}",
        f"units: {UNITS_NOTE}",
        "",
    ]
    for n, coeff in enumerate(result.effective_hamiltonian):
        lines.append(f"H~[alpha^{n}] = {coeff}")
    lines.append("")
    lines.append(f"generator role: {result.generator.role}")
    for n, g in enumerate(result.generator):
        lines.append(f"G[{n}] = {g}")
    return "\n".join(lines) + "\n"


def _render_oracle_text(report: EigenvalueReport) -> str:
    lines = [
        "oracle: dense diagonalization at "
        f"alpha={report.alpha:g}, hbar={report.hbar:g}, "
        f"n_max={report.n_max}, k={report.k_lowest}",
        f"max |deviation| = {report.max_abs_deviation:.6e}",
        f"deviation / alpha^{report.order + 1} = {report.ratio:.6e}"
        "  (bounded for a correct expansion; no universal constant)",
        f"boundary weight = {report.boundary_weight:.3e}"
        + ("  TRUNCATION WARNING" if report.truncation_warning else ""),
    ]
    return "\n".join(lines) + "\n"


def _load_shift(path: str, d: int) -> AlphaSeries:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return series_from_records(payload["terms"], d, payload["order"])


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="laddercpt",
        description=(
            "Block-diagonalize a perturbed oscillator Hamiltonian exactly, "
            "in ladder operators."
        ),
    )
    parser.add_argument(
        "problem", help="problem file ('-' reads standard input)"
    )
    parser.add_argument(
        "--method", choices=METHODS, default="kato", help="transform to use"
    )
    parser.add_argument(
        "--order", type=int, default=2, help="truncation order N >= 1"
    )
    parser.add_argument(
        "--output", choices=("text", "json"), default="text", help="result format"
    )
    parser.add_argument(
        "--shift-file",
        help="JSON series shifting the ordered-exponential generator (kato only)",
    )
    parser.add_argument(
        "--benchmark", action="store_true", help="emit JSON-lines timing records"
    )
    parser.add_argument(
        "--methods",
        default=",".join(METHODS),
        help="comma-separated methods for --benchmark",
    )
    parser.add_argument(
        "--max-order", type=int, default=8, help="highest benchmark order"
    )
    parser.add_argument(
        "--reps", type=int, default=1, help="benchmark repetitions per point"
    )
    parser.add_argument(
        "--timeout",
        type=float,
        default=None,
        help="per-run benchmark timeout in seconds",
    )
    parser.add_argument(
        "--oracle",
        action="store_true",
        help="validate the effective spectrum against dense diagonalization",
    )
    parser.add_argument("--hbar", type=float, default=1.0, help="oracle hbar")
    parser.add_argument("--alpha", type=float, default=1e-3, help="oracle coupling")
    parser.add_argument("--nmax", type=int, default=30, help="oracle basis cutoff")
    parser.add_argument("--k", type=int, default=5, help="oracle eigenvalue count")
    parser.add_argument(
        "--tol",
        type=float,
        default=None,
        help="fail (exit 4) if the oracle deviation exceeds this",
    )
    args = parser.parse_args(argv)
    if args.order < 1:
        parser.error("--order must be at least 1")

    try:
        if args.problem == "-":
            text = _sys.stdin.read()
        else:
            with open(args.problem, "r", encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        print(f"cannot read problem: {exc}", file=_sys.stderr)
        return 2

    try:
        spec = parse_problem(text)
    except ParseError as exc:
        print(f"parse error: {exc}", file=_sys.stderr)
        return 2

    if args.benchmark:
        methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
        try:
            for record in benchmark(
                spec, methods, args.max_order, args.reps, args.timeout
            ):
                print(json.dumps(record, sort_keys=True), flush=True)
        except (
            ValueError,
            DimensionMismatchError,
            BlockDiagonalizationError,
        ) as exc:
            print(f"computation error: {exc}", file=_sys.stderr)
            return 3
        return 0

    try:
        shift = None
        if args.shift_file is not None:
            shift = _load_shift(args.shift_file, spec.d)
        report = run(spec, args.method, args.order, shift=shift)
    except ParseError as exc:
        print(f"parse error: {exc}", file=_sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"cannot read shift series: {exc}", file=_sys.stderr)
        return 2
    except (ValueError, DimensionMismatchError, BlockDiagonalizationError) as exc:
        print(f"computation error: {exc}", file=_sys.stderr)
        return 3

    if args.output == "json":
        _sys.stdout.write(result_to_json(spec, report.result))
    else:
        _sys.stdout.write(_render_text(spec, report))
    stage_note = ", ".join(f"{name} {dt:.3f}s" for name, dt in report.stages)
    print(
        f"completed in {report.wall_time_s:.3f}s"
        + (f" ({stage_note})" if stage_note else ""),
        file=_sys.stderr,
    )

    if args.oracle:
        try:
            oracle_report = eigenvalue_check(
                report.result.effective_hamiltonian,
                spec.hamiltonian_series(args.order),
                spec.mode_system(),
                hbar=args.hbar,
                alpha=args.alpha,
                n_max=args.nmax,
                k_lowest=args.k,
            )
        except ValueError as exc:
            print(f"computation error: {exc}", file=_sys.stderr)
            return 3
        _sys.stderr.write(_render_oracle_text(oracle_report))
        if args.tol is not None and oracle_report.max_abs_deviation > args.tol:
            print(
                f"oracle deviation {oracle_report.max_abs_deviation:.6e} "
                f"exceeds tolerance {args.tol:g}",
                file=_sys.stderr,
            )
            return 4
    return 0


if __name__ == "__main__":
    _sys.exit(main())
