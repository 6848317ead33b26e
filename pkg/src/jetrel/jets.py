"""Jet coordinates, total derivatives, prolongation and Lie calculus.

A `JetContext` declares `n` independent and `m` dependent variables plus a
hard order cap; jet variables are created on demand through it, and asking
for a derivative beyond the cap raises `OrderCapError` rather than silently
growing (all computations here live on a finite truncation of the infinite
jet space).

`VectorField` is a derivation with named coefficients; a point field has
coefficients that depend on base variables only, and `prolong` lifts it to
jets by the usual recursion

    phi_{sigma+1_i} = D_i(phi_sigma) - sum_l D_i(xi^l) * u_{sigma+1_l},

the unique lift preserving the Cartan distribution.  `chart_transition`
implements the one-independent-variable chart swap (x <-> one dependent
variable) used for curves, driven by x_1 = 1/y_1 and D_old = (1/x_1) D_new.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import (
    KIND_DEP,
    KIND_INDEP,
    KIND_JET,
    AlgebraError,
    Polynomial,
    RationalFunction,
    VariableId,
    as_rational,
    dep_var,
    indep_var,
    jet_var,
)


class OrderCapError(AlgebraError):
    """A computation needed a jet variable above the context's order cap."""


class ChartSwapError(AlgebraError):
    """Chart transition requested outside its supported setting."""


class ClosureError(AlgebraError):
    """A Lie bracket fell outside the span of the declared generators."""


@dataclass(frozen=True)
class JetContext:
    """Named independent/dependent variables plus the jet order cap."""

    independent: tuple[str, ...]
    dependent: tuple[str, ...]
    order: int

    def __post_init__(self) -> None:
        names = list(self.independent) + list(self.dependent)
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        if self.order < 0:
            raise ValueError("negative jet order")

    @property
    def n(self) -> int:
        return len(self.independent)

    @property
    def m(self) -> int:
        return len(self.dependent)

    def with_order(self, order: int) -> "JetContext":
        return JetContext(self.independent, self.dependent, order)

    # -- variable construction ---------------------------------------------

    def indep(self, i: int) -> VariableId:
        if not 0 <= i < self.n:
            raise ValueError(f"independent index {i} out of range")
        return indep_var(i)

    def dep(self, j: int) -> VariableId:
        if not 0 <= j < self.m:
            raise ValueError(f"dependent index {j} out of range")
        return dep_var(j)

    def jet(self, j: int, multiindex) -> VariableId:
        mi = tuple(int(s) for s in multiindex)
        if len(mi) != self.n:
            raise ValueError(
                f"multiindex length {len(mi)} does not match {self.n} independent variables"
            )
        if sum(mi) > self.order:
            raise OrderCapError(
                f"jet order {sum(mi)} exceeds the context cap {self.order}"
            )
        if not 0 <= j < self.m:
            raise ValueError(f"dependent index {j} out of range")
        return jet_var(j, mi)

    def bump(self, v: VariableId, i: int) -> VariableId:
        """The jet variable with one more derivative in direction i."""
        if v.kind == KIND_DEP:
            mi = [0] * self.n
            mi[i] = 1
            return self.jet(v.owner, mi)
        if v.kind == KIND_JET:
            mi = list(v.multiindex)
            mi[i] += 1
            return self.jet(v.owner, mi)
        raise ValueError(f"cannot bump {v!r}")

    def base_variables(self) -> list[VariableId]:
        return [self.indep(i) for i in range(self.n)] + [self.dep(j) for j in range(self.m)]

    def jet_variables(self, max_order: int | None = None) -> list[VariableId]:
        """All jet variables of order 1..max_order (default: the cap)."""
        cap = self.order if max_order is None else max_order
        if cap > self.order:
            raise OrderCapError(f"requested order {cap} above cap {self.order}")
        out = []
        for j in range(self.m):
            for mi in _multiindices(self.n, 1, cap):
                out.append(jet_var(j, mi))
        return out

    def variables_up_to(self, max_order: int) -> list[VariableId]:
        return self.base_variables() + self.jet_variables(max_order)

    # -- naming --------------------------------------------------------------

    def name_of(self, v: VariableId) -> str:
        if v.kind == KIND_INDEP:
            return self.independent[v.owner]
        if v.kind == KIND_DEP:
            return self.dependent[v.owner]
        base = self.dependent[v.owner]
        if self.n == 1:
            return f"{base}{v.multiindex[0]}"
        return f"{base}[{','.join(str(k) for k in v.multiindex)}]"

    def var_by_name(self, name: str) -> VariableId:
        """Resolve a plain name: base variables, then `y3`-style jet names."""
        if name in self.independent:
            return self.indep(self.independent.index(name))
        if name in self.dependent:
            return self.dep(self.dependent.index(name))
        if self.n == 1:
            for j, dep in enumerate(self.dependent):
                if name.startswith(dep) and name[len(dep) :].isdigit():
                    k = int(name[len(dep) :])
                    if k == 0:
                        return self.dep(j)
                    return self.jet(j, (k,))
        raise KeyError(f"unknown variable {name!r}")

    def jet_by_name(self, dep_name: str, multiindex) -> VariableId:
        if dep_name not in self.dependent:
            raise KeyError(f"unknown dependent variable {dep_name!r}")
        return self.jet(self.dependent.index(dep_name), multiindex)


def _multiindices(n: int, lo: int, hi: int):
    """All multiindices of length n with lo <= |sigma| <= hi, graded order."""
    for total in range(lo, hi + 1):
        yield from _compositions(total, n)


def _compositions(total: int, n: int):
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, n - 1):
            yield (first,) + rest


# --------------------------------------------------------------------------
# Total derivative
# --------------------------------------------------------------------------


def total_derivative_poly(p: Polynomial, i: int, ctx: JetContext) -> Polynomial:
    """D_i on a polynomial: d/dx_i + sum u_{sigma+1_i} d/du_sigma."""
    out = p.partial(ctx.indep(i))
    for v in p.variables():
        if v.kind == KIND_INDEP:
            continue
        out = out + Polynomial.variable(ctx.bump(v, i)) * p.partial(v)
    return out


def total_derivative(f, i: int, ctx: JetContext) -> RationalFunction:
    """Total derivative D_i of a rational jet function (order bumps by one)."""
    f = as_rational(f)
    if f.is_polynomial():
        return RationalFunction.from_polynomial(total_derivative_poly(f.num, i, ctx))
    dn = total_derivative_poly(f.num, i, ctx)
    dd = total_derivative_poly(f.den, i, ctx)
    return RationalFunction(dn * f.den - f.num * dd, f.den * f.den)


def iterated_total_derivative(f, i: int, ctx: JetContext, times: int) -> RationalFunction:
    out = as_rational(f)
    for _ in range(times):
        out = total_derivative(out, i, ctx)
    return out


# --------------------------------------------------------------------------
# Vector fields
# --------------------------------------------------------------------------


@dataclass
class VectorField:
    """A derivation sum c_v d/dv with rational-function coefficients.

    Point fields carry coefficients only on base variables, with the
    coefficients themselves depending only on base variables; that is the
    precondition for prolongation.
    """

    context: JetContext
    coefficients: dict[VariableId, RationalFunction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.coefficients = {
            v: as_rational(c) for v, c in self.coefficients.items() if not as_rational(c).is_zero()
        }

    def coefficient(self, v: VariableId) -> RationalFunction:
        return self.coefficients.get(v, RationalFunction.zero())

    def is_point_field(self) -> bool:
        for v, c in self.coefficients.items():
            if v.kind == KIND_JET:
                return False
            if c.max_jet_order() > 0:
                return False
        return True

    def apply(self, f) -> RationalFunction:
        """Directional derivative of f along this field."""
        f = as_rational(f)
        out = RationalFunction.zero()
        fvars = f.variables()
        for v, c in self.coefficients.items():
            if v in fvars:
                out = out + c * f.partial(v)
        return out

    def __add__(self, other: "VectorField") -> "VectorField":
        coeffs = dict(self.coefficients)
        for v, c in other.coefficients.items():
            coeffs[v] = coeffs.get(v, RationalFunction.zero()) + c
        return VectorField(self.context, coeffs)

    def scale(self, c) -> "VectorField":
        c = as_rational(c)
        return VectorField(self.context, {v: c * k for v, k in self.coefficients.items()})

    def __neg__(self) -> "VectorField":
        return self.scale(-1)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    def is_zero(self) -> bool:
        return not self.coefficients

    def __repr__(self) -> str:
        if not self.coefficients:
            return "0"
        parts = [f"({c!r}) d/d{v!r}" for v, c in sorted(self.coefficients.items(), key=lambda t: t[0].sort_key)]
        return " + ".join(parts)


def bracket(x: VectorField, y: VectorField) -> VectorField:
    """Lie bracket [x, y] of two fields on the same context."""
    if x.context != y.context:
        raise ValueError("bracket of fields over different contexts")
    coeffs: dict[VariableId, RationalFunction] = {}
    for v in set(x.coefficients) | set(y.coefficients):
        c = x.apply(y.coefficient(v)) - y.apply(x.coefficient(v))
        if not c.is_zero():
            coeffs[v] = c
    return VectorField(x.context, coeffs)


@dataclass
class ProlongedField:
    """A point field together with its jet coefficients up to some order."""

    base: VectorField
    order: int
    jet_coefficients: dict[VariableId, RationalFunction]

    @property
    def context(self) -> JetContext:
        return self.base.context

    def coefficient(self, v: VariableId) -> RationalFunction:
        if v.kind == KIND_JET:
            return self.jet_coefficients.get(v, RationalFunction.zero())
        return self.base.coefficient(v)

    def apply(self, f) -> RationalFunction:
        f = as_rational(f)
        out = RationalFunction.zero()
        for v in sorted(f.variables(), key=lambda w: w.sort_key):
            c = self.coefficient(v)
            if not c.is_zero():
                out = out + c * f.partial(v)
        return out

    def as_vector_field(self) -> VectorField:
        coeffs = dict(self.base.coefficients)
        coeffs.update(self.jet_coefficients)
        return VectorField(self.context, coeffs)


def prolong(x: VectorField, order: int) -> ProlongedField:
    """Prolongation of a point field to the given jet order."""
    ctx = x.context
    if order > ctx.order:
        raise OrderCapError(f"prolongation order {order} above context cap {ctx.order}")
    if not x.is_point_field():
        raise ValueError("prolongation requires a point field (base-variable coefficients)")
    n, m = ctx.n, ctx.m
    xi = [x.coefficient(ctx.indep(i)) for i in range(n)]
    dxi = [[total_derivative(xi[l], i, ctx) for l in range(n)] for i in range(n)]

    phi: dict[VariableId, RationalFunction] = {}

    def phi_of(j: int, mi: tuple[int, ...]) -> RationalFunction:
        if sum(mi) == 0:
            return x.coefficient(ctx.dep(j))
        v = jet_var(j, mi)
        if v in phi:
            return phi[v]
        i = next(k for k, s in enumerate(mi) if s > 0)
        prev = list(mi)
        prev[i] -= 1
        prev_t = tuple(prev)
        val = total_derivative(phi_of(j, prev_t), i, ctx)
        for l in range(n):
            if dxi[i][l].is_zero():
                continue
            bumped = list(prev_t)
            bumped[l] += 1
            val = val - dxi[i][l] * RationalFunction.variable(ctx.jet(j, bumped))
        phi[v] = val
        return val

    for j in range(m):
        for mi in _multiindices(n, 1, order):
            phi_of(j, mi)
    return ProlongedField(x, order, phi)


def lie_derivative(xk: ProlongedField, f) -> RationalFunction:
    """L_X f for a prolonged field; f must not exceed the prolongation order."""
    f = as_rational(f)
    if f.max_jet_order() > xk.order:
        raise OrderCapError(
            f"expression order {f.max_jet_order()} exceeds prolongation order {xk.order}"
        )
    return xk.apply(f)


# --------------------------------------------------------------------------
# Lie algebras
# --------------------------------------------------------------------------


@dataclass
class LieAlgebra:
    """A named list of generator fields over a shared context.

    `closed=True` means brackets are expected to stay inside the rational
    span of the generators; this is verified (not assumed) the first time
    structure constants are requested.
    """

    context: JetContext
    generators: list[tuple[str, VectorField]]
    closed: bool = True
    _structure: dict[tuple[int, int], list[Fraction]] | None = None

    def names(self) -> list[str]:
        return [name for name, _ in self.generators]

    def fields(self) -> list[VectorField]:
        return [f for _, f in self.generators]

    def field(self, name: str) -> VectorField:
        for n, f in self.generators:
            if n == name:
                return f
        raise KeyError(f"unknown generator {name!r}")

    def __len__(self) -> int:
        return len(self.generators)

    def prolonged(self, order: int) -> list[tuple[str, ProlongedField]]:
        return [(name, prolong(f, order)) for name, f in self.generators]

    def structure_constants(self) -> dict[tuple[int, int], list[Fraction]]:
        """c^k_{ij} with [X_i, X_j] = sum_k c^k_{ij} X_k; raises ClosureError."""
        if self._structure is not None:
            return self._structure
        if not self.closed:
            raise ClosureError("algebra was declared without bracket closure")
        fields = self.fields()
        coords = _field_coordinates(fields)
        table: dict[tuple[int, int], list[Fraction]] = {}
        for i in range(len(fields)):
            for j in range(i + 1, len(fields)):
                br = bracket(fields[i], fields[j])
                sol = _solve_in_span(br, fields, coords)
                if sol is None:
                    raise ClosureError(
                        f"[X_{i}, X_{j}] is outside the generator span"
                    )
                table[(i, j)] = sol
        self._structure = table
        return table


def _field_coordinates(fields: list[VectorField]):
    """A common coordinate basis for expressing fields as exact vectors.

    Each field coefficient is a rational function; clearing to a common
    denominator per slot variable would be wasteful, so coordinates are the
    pairs (slot variable, monomial) of numerator polynomials after scaling
    by the least common denominator across fields per slot.
    """
    slots = sorted({v for f in fields for v in f.coefficients}, key=lambda v: v.sort_key)
    # common denominator per slot
    dens = {}
    for v in slots:
        den = Polynomial.const(1)
        for f in fields:
            c = f.coefficient(v)
            if not c.is_zero():
                from .algebra import exact_divide, poly_gcd

                g = poly_gcd(den, c.den)
                den = exact_divide(den, g) * c.den
        dens[v] = den
    return slots, dens


def _field_vector(f: VectorField, coords) -> dict[tuple[VariableId, tuple], Fraction]:
    slots, dens = coords
    from .algebra import exact_divide

    vec: dict[tuple[VariableId, tuple], Fraction] = {}
    for v in slots:
        c = f.coefficient(v)
        if c.is_zero():
            continue
        scaled = c.num * exact_divide(dens[v], c.den)
        for mono, coeff in scaled.terms.items():
            vec[(v, mono)] = coeff
    return vec


def _solve_in_span(target: VectorField, fields: list[VectorField], coords) -> list[Fraction] | None:
    from . import linalg

    vecs = [_field_vector(f, coords) for f in fields]
    tvec = _field_vector(target, coords)
    keys = sorted(
        {k for v in vecs for k in v} | set(tvec),
        key=lambda k: (k[0].sort_key, k[1]),
    )
    matrix = [[vec.get(k, Fraction(0)) for vec in vecs] for k in keys]
    rhs = [tvec.get(k, Fraction(0)) for k in keys]
    return linalg.solve(matrix, rhs)


# --------------------------------------------------------------------------
# Chart transitions (curves: one independent variable)
# --------------------------------------------------------------------------


def chart_transition(
    f, ctx: JetContext, new_independent: str
) -> tuple[RationalFunction, JetContext]:
    """Rewrite f in the chart where `new_independent` is the independent variable.

    Supported for one independent variable only.  Returns the transformed
    expression together with the new chart's context; the expression is
    rational in the new chart's jets (x_1 = 1/y_1 and friends).
    """
    if ctx.n != 1:
        raise ChartSwapError("chart transitions are supported only for one independent variable")
    if new_independent not in ctx.dependent:
        raise ChartSwapError(f"{new_independent!r} is not a dependent variable")
    f = as_rational(f)
    c = ctx.dependent.index(new_independent)
    new_dep = list(ctx.dependent)
    new_dep[c] = ctx.independent[0]
    new_ctx = JetContext((new_independent,), tuple(new_dep), ctx.order)

    k_max = f.max_jet_order()
    bindings: dict[VariableId, RationalFunction] = {}
    # base variables: the swapped pair changes identity, the rest persist
    bindings[ctx.indep(0)] = RationalFunction.variable(new_ctx.dep(c))
    bindings[ctx.dep(c)] = RationalFunction.variable(new_ctx.indep(0))

    if k_max >= 1:
        x1 = RationalFunction.variable(new_ctx.jet(c, (1,)))
        inv_x1 = RationalFunction.const(1) / x1
        exprs: dict[int, list[RationalFunction]] = {}
        for j in range(ctx.m):
            if j == c:
                first = inv_x1
            else:
                first = RationalFunction.variable(new_ctx.jet(j, (1,))) * inv_x1
            seq = [first]
            for _ in range(2, k_max + 1):
                seq.append(inv_x1 * total_derivative(seq[-1], 0, new_ctx))
            exprs[j] = seq
        for j in range(ctx.m):
            for k in range(1, k_max + 1):
                bindings[jet_var(j, (k,))] = exprs[j][k - 1]

    return f.substitute(bindings), new_ctx
