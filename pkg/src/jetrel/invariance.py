"""Absolute/relative invariance verdicts, multipliers, cocycles and weights.

A candidate R is an absolute invariant when every prolonged generator
annihilates it, and a relative invariant when L_X R = lambda(X) * R for a
multiplier lambda(X).  For polynomial R the test is exact divisibility
R | L_X R; a rational R = P/Q is processed through its numerator and
denominator separately, with lambda(R) = lambda(P) - lambda(Q).

Multipliers are 1-cocycles of the (modified) Chevalley-Eilenberg complex;
`cocycle_check` verifies d^1(lambda) = 0 against verified structure
constants, and `compatibility_check` verifies the cover condition
lambda_a(X) - lambda_b(X) = X(g_ab)/g_ab for multi-chart bundles.  Weight
vectors read off the constant values of lambda at designated grading
elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import linalg
from .algebra import (
    Polynomial,
    RationalFunction,
    VariableId,
    as_rational,
    exact_divide,
    poly_gcd,
    try_divide,
)
from .jets import JetContext, LieAlgebra, ProlongedField, VectorField, lie_derivative, prolong


@dataclass
class Verdict:
    """Outcome of an invariance-style check, with a witness on failure."""

    ok: bool
    detail: str = ""
    witness_generator: str | None = None
    witness_expression: RationalFunction | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class NotRelative:
    """Failure result of `relative_multiplier`, carrying the remainder witness."""

    generator: str
    remainder: Polynomial
    detail: str = ""


@dataclass
class MultiplierRecord:
    """Multiplier lambda: generator name -> rational function, for one chart."""

    algebra: LieAlgebra
    values: dict[str, RationalFunction]
    chart: str | None = None
    cocycle_verified: bool = False

    def value(self, name: str) -> RationalFunction:
        return self.values.get(name, RationalFunction.zero())

    def max_jet_order(self) -> int:
        return max((v.max_jet_order() for v in self.values.values()), default=0)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values.values())

    def __add__(self, other: "MultiplierRecord") -> "MultiplierRecord":
        vals = {n: self.value(n) + other.value(n) for n in set(self.values) | set(other.values)}
        return MultiplierRecord(self.algebra, vals, self.chart, False)

    def __sub__(self, other: "MultiplierRecord") -> "MultiplierRecord":
        vals = {n: self.value(n) - other.value(n) for n in set(self.values) | set(other.values)}
        return MultiplierRecord(self.algebra, vals, self.chart, False)

    def scale(self, c) -> "MultiplierRecord":
        c = Fraction(c)
        return MultiplierRecord(
            self.algebra, {n: v * c for n, v in self.values.items()}, self.chart, False
        )


@dataclass(frozen=True)
class WeightVector:
    """Constant multiplier values at the designated grading elements."""

    grading: tuple[str, ...]
    components: tuple[Fraction, ...]

    def __add__(self, other: "WeightVector") -> "WeightVector":
        if self.grading != other.grading:
            raise ValueError("weight vectors over different gradings")
        return WeightVector(
            self.grading, tuple(a + b for a, b in zip(self.components, other.components))
        )

    def scale(self, c) -> "WeightVector":
        c = Fraction(c)
        return WeightVector(self.grading, tuple(a * c for a in self.components))

    def __repr__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"


class NonConstantWeightError(Exception):
    """weight_vector hit a multiplier that is not constant at a grading element."""


# --------------------------------------------------------------------------
# Core verdicts
# --------------------------------------------------------------------------


def _prolonged(g: LieAlgebra, order: int) -> list[tuple[str, ProlongedField]]:
    return g.prolonged(order)


def is_absolute_invariant(g: LieAlgebra, f, k: int) -> Verdict:
    """True iff every prolonged generator annihilates f."""
    f = as_rational(f)
    order = max(k, f.max_jet_order())
    for name, xk in _prolonged(g, order):
        lv = lie_derivative(xk, f)
        if not lv.is_zero():
            return Verdict(False, f"L_{name} does not vanish", name, lv)
    return Verdict(True)


def relative_multiplier(g: LieAlgebra, r, k: int, *, chart: str | None = None):
    """Multiplier of a relative invariant, or a NotRelative witness.

    Polynomial candidates are decided by exact divisibility R | L_X R; a
    rational candidate is split into numerator and denominator, each of
    which must be relative on its own (the multipliers subtract).
    """
    r = as_rational(r)
    if r.is_zero():
        raise ValueError("zero is not a relative invariant candidate")
    order = max(k, r.max_jet_order())
    prolonged = _prolonged(g, order)

    def poly_multiplier(p: Polynomial):
        vals: dict[str, RationalFunction] = {}
        for name, xk in prolonged:
            lv = lie_derivative(xk, RationalFunction.from_polynomial(p))
            if lv.is_zero():
                vals[name] = RationalFunction.zero()
                continue
            if lv.is_polynomial():
                quot, rem = try_divide(lv.as_polynomial(), p)
                if quot is None:
                    return NotRelative(name, rem, "leading term not divisible")
                vals[name] = RationalFunction.from_polynomial(quot)
            else:
                # generator with rational coefficients: fall back to field division
                lam = lv / RationalFunction.from_polynomial(p)
                vals[name] = lam
        return vals

    num_vals = poly_multiplier(r.num)
    if isinstance(num_vals, NotRelative):
        return num_vals
    if r.is_polynomial():
        values = num_vals
    else:
        den_vals = poly_multiplier(r.den)
        if isinstance(den_vals, NotRelative):
            return den_vals
        values = {n: num_vals[n] - den_vals[n] for n in num_vals}

    record = MultiplierRecord(g, values, chart)
    if g.closed:
        record.cocycle_verified = bool(cocycle_check(g, record, order))
    return record


def cocycle_check(g: LieAlgebra, lam: MultiplierRecord, k: int) -> Verdict:
    """Verify d^1(lambda) = 0 over the verified structure constants."""
    names = g.names()
    missing = [n for n in names if n not in lam.values]
    if missing:
        return Verdict(False, f"multiplier not defined on generators {missing}")
    order = max(k, lam.max_jet_order())
    structure = g.structure_constants()
    prolonged = dict(_prolonged(g, order))
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            xi, xj = prolonged[names[i]], prolonged[names[j]]
            li, lj = lam.value(names[i]), lam.value(names[j])
            bracket_value = RationalFunction.zero()
            for m, c in enumerate(structure[(i, j)]):
                if c:
                    bracket_value = bracket_value + lam.value(names[m]) * c
            residual = lie_derivative(xi, lj) - lie_derivative(xj, li) - bracket_value
            if not residual.is_zero():
                return Verdict(
                    False,
                    f"d1(lambda)({names[i]},{names[j]}) != 0",
                    f"{names[i]},{names[j]}",
                    residual,
                )
    return Verdict(True)


def weight_vector(lam: MultiplierRecord, grading: list[str] | tuple[str, ...]) -> WeightVector:
    """Constant lambda values at the grading elements (error if non-constant)."""
    comps = []
    for name in grading:
        v = lam.value(name)
        if not v.is_constant():
            raise NonConstantWeightError(
                f"multiplier at grading element {name!r} is not constant: {v!r}"
            )
        comps.append(v.constant_value())
    return WeightVector(tuple(grading), tuple(comps))


# --------------------------------------------------------------------------
# Covers: compatibility and Cech conditions
# --------------------------------------------------------------------------


@dataclass
class Chart:
    """One trivializing chart: its own context, generator fields, multipliers."""

    label: str
    context: JetContext
    fields: dict[str, VectorField]
    multipliers: dict[str, dict[str, RationalFunction]] = field(default_factory=dict)
    # multipliers: bundle name -> (generator name -> lambda value in this chart)


@dataclass
class CoverData:
    """Charts plus transition functions for a collection of line bundles.

    Transition expressions are stored per coordinate system:
    transitions[(a, b)][chart_label] is g_ab written in chart_label's
    coordinates.  Pairwise compatibility is checked in the chart named by
    `overlap_chart[(a, b)]`; triple products need all three transitions in
    one common chart.
    """

    charts: dict[str, Chart]
    transitions: dict[tuple[str, str], dict[str, RationalFunction]]
    overlap_chart: dict[tuple[str, str], str]

    def transition_in(self, a: str, b: str, coords: str) -> RationalFunction:
        key = (a, b)
        if key in self.transitions and coords in self.transitions[key]:
            return self.transitions[key][coords]
        rev = (b, a)
        if rev in self.transitions and coords in self.transitions[rev]:
            return RationalFunction.const(1) / self.transitions[rev][coords]
        raise KeyError(f"missing overlap data: g_{a}{b} in {coords} coordinates")


def compatibility_check(
    cover: CoverData, bundle: str, generator: str | None = None
) -> Verdict:
    """lambda_a(X) - lambda_b(X) = X(g_ab)/g_ab on every declared overlap.

    Multiplier values must be usable in the overlap's coordinate system;
    constants always are, non-constant values must be supplied by the
    scenario in the overlap chart (otherwise the data is missing).
    """
    for (a, b), coords in cover.overlap_chart.items():
        chart = cover.charts[coords]
        g_ab = cover.transition_in(a, b, coords)
        gen_names = [generator] if generator else list(chart.fields)
        for name in gen_names:
            x = chart.fields[name]
            lam_a = _lambda_in_chart(cover, bundle, a, name, coords)
            lam_b = _lambda_in_chart(cover, bundle, b, name, coords)
            lhs = lam_a - lam_b
            rhs = x.apply(g_ab) / g_ab
            if lhs != rhs:
                return Verdict(
                    False,
                    f"compatibility fails on overlap ({a},{b}) for {name}",
                    name,
                    lhs - rhs,
                )
    return Verdict(True)


def _lambda_in_chart(
    cover: CoverData, bundle: str, chart_label: str, gen: str, coords: str
) -> RationalFunction:
    table = cover.charts[chart_label].multipliers
    if bundle not in table:
        raise KeyError(f"missing multiplier table for bundle {bundle!r} on chart {chart_label}")
    lam = table[bundle].get(gen, RationalFunction.zero())
    if chart_label == coords or lam.is_constant():
        return lam
    raise KeyError(
        f"missing overlap data: lambda_{chart_label}({gen}) is not constant and "
        f"no {coords}-coordinate expression was supplied"
    )


def cech_check(cover: CoverData, triple: tuple[str, str, str], coords: str) -> Verdict:
    """g_ac = g_ab * g_bc in the given common coordinate system."""
    a, b, c = triple
    g_ab = cover.transition_in(a, b, coords)
    g_bc = cover.transition_in(b, c, coords)
    g_ac = cover.transition_in(a, c, coords)
    if g_ac != g_ab * g_bc:
        return Verdict(False, f"Cech cocycle fails on ({a},{b},{c})", None, g_ac / (g_ab * g_bc))
    return Verdict(True)


# --------------------------------------------------------------------------
# Invariant derivations
# --------------------------------------------------------------------------


def is_invariant_derivation(g: LieAlgebra, coeffs: list, k: int) -> Verdict:
    """Does sum_i c_i D_i commute with every prolonged generator?

    The commutator, a derivation, is tested on all coordinate functions up
    to order k; vanishing there makes it vanish on everything they generate.
    """
    from .jets import total_derivative

    ctx = g.context
    coeffs = [as_rational(c) for c in coeffs]
    if len(coeffs) != ctx.n:
        raise ValueError("one derivation coefficient per independent variable")

    def nabla(f: RationalFunction) -> RationalFunction:
        out = RationalFunction.zero()
        for i, c in enumerate(coeffs):
            if not c.is_zero():
                out = out + c * total_derivative(f, i, ctx)
        return out

    coeff_order = max((c.max_jet_order() for c in coeffs), default=0)
    test_vars: list[VariableId] = ctx.variables_up_to(k)
    prolong_order = max(k + 1, coeff_order)
    for name, xk in _prolonged(g, prolong_order):
        for v in test_vars:
            fv = RationalFunction.variable(v)
            lhs = xk.apply(nabla(fv))
            rhs = nabla(xk.apply(fv))
            if lhs != rhs:
                return Verdict(
                    False,
                    f"[{name}, nabla] does not annihilate {v!r}",
                    name,
                    lhs - rhs,
                )
    return Verdict(True)


# --------------------------------------------------------------------------
# Multiplier lattices: exact rank and span membership
# --------------------------------------------------------------------------


def _records_coordinates(records: list[MultiplierRecord]):
    """Exact vector coordinates for multiplier records over one algebra.

    Per generator slot, all values are scaled to a least common denominator
    so each record becomes a finite vector of rational monomial coefficients.
    """
    gen_names = records[0].algebra.names()
    dens: dict[str, Polynomial] = {}
    for name in gen_names:
        den = Polynomial.const(1)
        for rec in records:
            v = rec.value(name)
            if v.is_zero():
                continue
            q = poly_gcd(den, v.den)
            den = exact_divide(den, q) * v.den
        dens[name] = den
    return gen_names, dens


def _record_vector(rec: MultiplierRecord, coords) -> dict:
    gen_names, dens = coords
    vec = {}
    for name in gen_names:
        v = rec.value(name)
        if v.is_zero():
            continue
        scaled = v.num * exact_divide(dens[name], v.den)
        for mono, c in scaled.terms.items():
            vec[(name, mono)] = c
    return vec


def multiplier_rank(records: list[MultiplierRecord]) -> int:
    """Rank over Q of the span of the records inside Hom(g, F)."""
    if not records:
        return 0
    coords = _records_coordinates(records)
    vecs = [_record_vector(r, coords) for r in records]
    keys = sorted({k for v in vecs for k in v}, key=lambda k: (k[0], k[1]))
    matrix = [[vec.get(k, Fraction(0)) for vec in vecs] for k in keys]
    return linalg.rank(matrix)


def multiplier_in_span(
    target: MultiplierRecord, basis: list[MultiplierRecord]
) -> list[Fraction] | None:
    """Exact coordinates of target in the span of basis records, if any."""
    coords = _records_coordinates(basis + [target])
    vecs = [_record_vector(r, coords) for r in basis]
    tvec = _record_vector(target, coords)
    keys = sorted({k for v in vecs for k in v} | set(tvec), key=lambda k: (k[0], k[1]))
    matrix = [[vec.get(k, Fraction(0)) for vec in vecs] for k in keys]
    rhs = [tvec.get(k, Fraction(0)) for k in keys]
    return linalg.solve(matrix, rhs)
