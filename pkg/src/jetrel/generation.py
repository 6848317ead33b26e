"""Constructive machinery on weighted relative invariants.

Four independent tools live here:

  * Tresse-style connections: from base invariants R_1..R_s and a direction
    in total derivatives, `tresse_apply` produces
    dir(R) - sum_i w_i (dir(R_i)/R_i) R, a relative invariant of shifted
    weight, and `RelativeDerivation`/`clear_denominators` package the same
    data with polynomial coefficients.

  * The special-affine Q-sequence: Q_4 = 3 y2 y4 - 5 y3^2 and
    Q_{2i} = (Delta^2(Q_{2(i-1)}) + (5i-7)(5i-3)/45 * Q_4 Q_{2(i-1)}) / y2,
    with exact division at every step; each entry is re-verified as a
    relative invariant of weight 5i-2 and order 2i with leading term
    3 y2^(i-1) y_{2i}.

  * Degree-bounded ideal membership by exact arithmetic: a division
    reduction fast path, then a bounded linear solve (optionally pruned
    modulo a random >= 2^61 prime) whose certificates are always re-verified
    exactly.  Failure is reported as indeterminate, never as a proof of
    non-membership.

  * Degree-bounded first Lie algebra cohomology with polynomial
    coefficients, computed blockwise after automatically detecting all
    gradings of the prolonged action (this keeps the exact linear algebra
    on small dense blocks).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import linalg
from .algebra import (
    Monomial,
    NotDivisibleError,
    Polynomial,
    RationalFunction,
    VariableId,
    as_rational,
    exact_divide,
    poly_gcd,
    reduce_by,
    try_divide,
)
from .invariance import (
    MultiplierRecord,
    NotRelative,
    Verdict,
    WeightVector,
    relative_multiplier,
    weight_vector,
)
from .jets import JetContext, LieAlgebra, VectorField, total_derivative, total_derivative_poly


class VerificationError(Exception):
    """A constructed invariant failed its re-verification."""


# --------------------------------------------------------------------------
# Tresse connection and relative invariant derivations
# --------------------------------------------------------------------------


def _apply_direction(direction: Sequence[RationalFunction], f, ctx: JetContext) -> RationalFunction:
    f = as_rational(f)
    out = RationalFunction.zero()
    for i, c in enumerate(direction):
        c = as_rational(c)
        if not c.is_zero():
            out = out + c * total_derivative(f, i, ctx)
    return out


def tresse_apply(
    basis: Sequence,
    direction: Sequence,
    w: Sequence,
    r,
    ctx: JetContext,
    *,
    algebra: LieAlgebra | None = None,
    order: int | None = None,
    grading: Sequence[str] | None = None,
    expected_weight: Sequence | None = None,
) -> RationalFunction:
    """dir(R) - sum_i w_i (dir(R_i)/R_i) R; re-verified when an algebra is given.

    `w` holds the exponents of R's weight in the weights of the basis
    invariants.  For w = 0 the log-derivative term vanishes and this is just
    the direction applied to an absolute invariant.
    """
    r = as_rational(r)
    direction = [as_rational(c) for c in direction]
    basis = [as_rational(b) for b in basis]
    w = [Fraction(x) for x in w]
    if len(w) != len(basis):
        raise ValueError("one weight exponent per basis invariant")
    out = _apply_direction(direction, r, ctx)
    for wi, ri in zip(w, basis):
        if wi:
            out = out - (_apply_direction(direction, ri, ctx) / ri) * r * wi
    if algebra is not None:
        k = order if order is not None else max(out.max_jet_order(), r.max_jet_order())
        rec = relative_multiplier(algebra, out, k) if not out.is_zero() else None
        if isinstance(rec, NotRelative):
            raise VerificationError(
                f"tresse_apply output is not a relative invariant (generator {rec.generator})"
            )
        if rec is not None and grading is not None and expected_weight is not None:
            got = weight_vector(rec, list(grading))
            want = tuple(Fraction(x) for x in expected_weight)
            if got.components != want:
                raise VerificationError(
                    f"tresse_apply output weight {got.components} != expected {want}"
                )
    return out


@dataclass
class RelativeDerivation:
    """A weight-indexed family of operators on relative invariants.

    Applied to a relative invariant of weight w (expressed through the
    exponents of the base invariants), the operator computes

        clearing * ( dir(R) - sum_i w_i (dir(R_i)/R_i) R ).

    `weight_shift` is the declared shift m (so the output has weight w + m);
    every application can be re-verified against an algebra.
    """

    context: JetContext
    direction: list[RationalFunction]
    basis: list[tuple[RationalFunction, WeightVector]]
    weight_shift: WeightVector
    clearing_factor: RationalFunction | None = None

    def apply(self, r, w_exponents: Sequence) -> RationalFunction:
        r = as_rational(r)
        w = [Fraction(x) for x in w_exponents]
        out = _apply_direction(self.direction, r, self.context)
        for wi, (ri, _) in zip(w, self.basis):
            if wi:
                out = out - (_apply_direction(self.direction, ri, self.context) / ri) * r * wi
        if self.clearing_factor is not None:
            out = out * self.clearing_factor
        return out

    def apply_verified(
        self,
        r,
        w_exponents: Sequence,
        algebra: LieAlgebra,
        grading: Sequence[str],
        input_weight: WeightVector,
    ) -> RationalFunction:
        out = self.apply(r, w_exponents)
        rec = relative_multiplier(algebra, out, out.max_jet_order())
        if isinstance(rec, NotRelative):
            raise VerificationError("derivation output failed the relative-invariance test")
        expected = input_weight + self.weight_shift
        got = weight_vector(rec, list(grading))
        if got.components != expected.components:
            raise VerificationError(
                f"derivation output weight {got.components} != expected {expected.components}"
            )
        return out

    def is_polynomial(self) -> bool:
        """Do the cleared coefficients stay polynomial on the nose?"""
        if any(not c.is_polynomial() for c in self.direction):
            return self.clearing_factor is not None
        return True


def clear_denominators(
    op: RelativeDerivation,
    *,
    algebra: LieAlgebra | None = None,
    order: int | None = None,
    grading: Sequence[str] | None = None,
    factor: RationalFunction | None = None,
) -> RelativeDerivation:
    """Multiply the operator by the common denominator of its coefficients.

    The factor must itself be a verified relative invariant (checked when an
    algebra is supplied); the declared weight shift grows by its weight.  An
    explicit `factor` overrides the computed least common denominator, which
    covers localized factors such as ratios of relative invariants.
    """
    if factor is None:
        den = Polynomial.const(1)
        pieces = [as_rational(c) for c in op.direction]
        for ri, _ in op.basis:
            pieces.append(_apply_direction(op.direction, ri, op.context) / ri)
        for c in pieces:
            if c.is_zero() or c.is_polynomial():
                continue
            g = poly_gcd(den, c.den)
            den = exact_divide(den, g) * c.den
        if den.is_constant():
            return op
        factor = RationalFunction.from_polynomial(den)

    shift = op.weight_shift
    if algebra is not None and grading is not None:
        k = order if order is not None else factor.max_jet_order()
        rec = relative_multiplier(algebra, factor, k)
        if isinstance(rec, NotRelative):
            raise VerificationError(
                "clearing factor is not a verified relative invariant"
            )
        shift = shift + weight_vector(rec, list(grading))
    new_clearing = factor if op.clearing_factor is None else op.clearing_factor * factor
    return RelativeDerivation(op.context, op.direction, op.basis, shift, new_clearing)


# --------------------------------------------------------------------------
# The special-affine Q-sequence
# --------------------------------------------------------------------------


def saff_context(order: int) -> JetContext:
    return JetContext(("x",), ("y",), order)


def saff_algebra(ctx: JetContext) -> LieAlgebra:
    x, y = ctx.indep(0), ctx.dep(0)
    one = RationalFunction.const(1)
    xv, yv = RationalFunction.variable(x), RationalFunction.variable(y)
    return LieAlgebra(
        ctx,
        [
            ("TX", VectorField(ctx, {x: one})),
            ("TY", VectorField(ctx, {y: one})),
            ("SH", VectorField(ctx, {y: xv})),
            ("SHT", VectorField(ctx, {x: yv})),
            ("XI", VectorField(ctx, {x: -xv, y: yv})),
        ],
    )


@dataclass
class DivisionCertificate:
    """A retained exact-division witness: dividend = divisor * quotient."""

    dividend: Polynomial
    divisor: Polynomial
    quotient: Polynomial

    def verify(self) -> bool:
        return self.dividend == self.divisor * self.quotient


@dataclass
class QEntry:
    i: int
    order: int
    weight: int
    polynomial: Polynomial
    certificate: DivisionCertificate | None
    multiplier: MultiplierRecord | None = None


def q_sequence(i_max: int, *, verify: bool = True) -> list[QEntry]:
    """The non-finitely-generated sequence Q_4, Q_6, ..., Q_{2 i_max}.

    Division by y2 must be exact at every step; a failure would falsify the
    construction and is raised as an error rather than reported.  With
    verify=True each entry is re-checked: relative invariance under the full
    special-affine algebra, weight 5i-2 on the grading element, order 2i,
    and leading term 3 y2^(i-1) y_{2i}.
    """
    if i_max < 2:
        raise ValueError("the sequence starts at i = 2")
    ctx = saff_context(2 * i_max + 2)
    alg = saff_algebra(ctx) if verify else None

    def yj(k: int) -> Polynomial:
        return Polynomial.variable(ctx.jet(0, (k,)))

    y2, y3 = yj(2), yj(3)

    def delta(f: Polynomial, w: Fraction) -> Polynomial:
        return y2 * total_derivative_poly(f, 0, ctx) - y3 * f * Fraction(w, 3)

    q4 = 3 * yj(2) * yj(4) - 5 * yj(3) ** 2
    entries = [QEntry(2, 4, 8, q4, None)]
    prev = q4
    w_prev = 8
    for i in range(3, i_max + 1):
        num = delta(delta(prev, Fraction(w_prev)), Fraction(w_prev + 4)) + q4 * prev * Fraction(
            (5 * i - 7) * (5 * i - 3), 45
        )
        try:
            q = exact_divide(num, y2)
        except NotDivisibleError as exc:  # pragma: no cover - would falsify the lemma
            raise VerificationError(
                f"Q_{2 * i} numerator is not divisible by y2; engine bug"
            ) from exc
        entries.append(QEntry(i, 2 * i, 5 * i - 2, q, DivisionCertificate(num, y2, q)))
        prev, w_prev = q, 5 * i - 2

    if verify:
        for e in entries:
            _verify_q_entry(e, ctx, alg)
    return entries


def _verify_q_entry(e: QEntry, ctx: JetContext, alg: LieAlgebra) -> None:
    if e.certificate is not None and not e.certificate.verify():
        raise VerificationError(f"Q_{2 * e.i}: division certificate failed")
    if e.polynomial.max_jet_order() != e.order:
        raise VerificationError(f"Q_{2 * e.i}: order {e.polynomial.max_jet_order()} != {e.order}")
    top = Polynomial.variable(ctx.jet(0, (e.order,)))
    lead = e.polynomial.partial(top.variables().pop())
    expected_lead = Polynomial.monomial({ctx.jet(0, (2,)): e.i - 1}, 3)
    if lead != expected_lead:
        raise VerificationError(f"Q_{2 * e.i}: leading term is not 3*y2^{e.i - 1}*y{e.order}")
    rec = relative_multiplier(alg, e.polynomial, e.order)
    if isinstance(rec, NotRelative):
        raise VerificationError(f"Q_{2 * e.i} is not a relative invariant")
    wv = weight_vector(rec, ["XI"])
    if wv.components != (Fraction(e.weight),):
        raise VerificationError(f"Q_{2 * e.i}: weight {wv.components} != {e.weight}")
    e.multiplier = rec


# --------------------------------------------------------------------------
# Degree-bounded ideal membership
# --------------------------------------------------------------------------


@dataclass
class MembershipConfig:
    """Knobs for the bounded membership solver (defaults are desk scale)."""

    degree_bound: int | None = None  # None: total degree of the target
    seed: int = 1729
    use_modular: bool = True
    max_dense_unknowns: int = 1500
    max_unknowns: int = 60000


@dataclass
class MembershipCertificate:
    target: Polynomial
    generators: list[Polynomial]
    cofactors: list[Polynomial]
    degree_bound: int

    def verify(self) -> bool:
        acc = Polynomial.zero()
        for c, g in zip(self.cofactors, self.generators):
            acc = acc + c * g
        return acc == self.target

    def max_cofactor_degree(self) -> int:
        return max((c.total_degree() for c in self.cofactors if not c.is_zero()), default=0)


@dataclass
class Indeterminate:
    """No certificate found at the bound; never a proof of non-membership."""

    reason: str
    degree_bound: int


def ideal_membership(
    f: Polynomial,
    gens: Sequence[Polynomial],
    degree_bound: int | None = None,
    config: MembershipConfig | None = None,
):
    """Find cofactors A_i with f = sum A_i g_i and deg A_i <= bound.

    A division reduction against the generator list is tried first (its
    cofactors automatically respect the graded bound); if a nonzero
    remainder is left, a bounded linear system on the remainder's cofactor
    coefficients is solved exactly.  Certificates are re-verified by exact
    arithmetic before being returned.
    """
    config = config or MembershipConfig()
    gens = [g for g in gens]
    if not gens or any(g.is_zero() for g in gens):
        raise ValueError("generators must be nonzero")
    d = degree_bound if degree_bound is not None else (
        config.degree_bound if config.degree_bound is not None else f.total_degree()
    )
    if f.is_zero():
        return MembershipCertificate(f, gens, [Polynomial.zero() for _ in gens], d)

    cof, rem = reduce_by(f, gens)
    if rem.is_zero():
        cert = MembershipCertificate(f, gens, cof, d)
        if not cert.verify():  # pragma: no cover - reduction is exact
            raise VerificationError("division certificate failed exact re-verification")
        if cert.max_cofactor_degree() <= d:
            return cert
        return Indeterminate(
            f"certificate exists but exceeds the degree bound {d}", d
        )

    tail = _bounded_linear_membership(rem, gens, d, config)
    if tail is None:
        return Indeterminate(f"no certificate found at degree bound {d}", d)
    cofactors = [a + b for a, b in zip(cof, tail)]
    cert = MembershipCertificate(f, gens, cofactors, d)
    if not cert.verify():
        raise VerificationError("membership certificate failed exact re-verification")
    if cert.max_cofactor_degree() > d:
        return Indeterminate(f"certificate exists but exceeds the degree bound {d}", d)
    return cert


def _monomials_up_to(variables: list[VariableId], degree: int) -> list[Monomial]:
    """All monomials of total degree <= degree in the given variables."""
    variables = sorted(variables, key=lambda v: v.sort_key)
    out: list[Monomial] = []

    def rec(idx: int, remaining: int, acc: list[tuple[VariableId, int]]) -> None:
        if idx == len(variables):
            out.append(tuple(acc))
            return
        v = variables[idx]
        for e in range(remaining + 1):
            if e:
                acc.append((v, e))
            rec(idx + 1, remaining - e, acc)
            if e:
                acc.pop()

    rec(0, degree, [])
    return out


def _bounded_linear_membership(
    rem: Polynomial, gens: list[Polynomial], d: int, config: MembershipConfig
) -> list[Polynomial] | None:
    from .algebra import _mono_mul  # shared monomial helper

    variables = sorted(
        set().union(rem.variables(), *(g.variables() for g in gens)),
        key=lambda v: v.sort_key,
    )
    columns: list[tuple[int, Monomial]] = []
    for i, g in enumerate(gens):
        cap = min(d, max(0, rem.total_degree() - _min_degree(g)))
        for m in _monomials_up_to(variables, cap):
            columns.append((i, m))
    if len(columns) > config.max_unknowns:
        return None

    rows: dict[Monomial, dict[int, Fraction]] = {}
    for col, (i, m) in enumerate(columns):
        for gm, gc in gens[i].terms.items():
            out = _mono_mul(gm, m)
            r = rows.setdefault(out, {})
            r[col] = r.get(col, Fraction(0)) + gc
    rhs_rows = dict(rem.terms)
    all_rows = sorted(set(rows) | set(rhs_rows), key=lambda m: (len(m), m and m[0][0].sort_key))

    if len(columns) <= config.max_dense_unknowns:
        matrix = [
            [rows.get(m, {}).get(c, Fraction(0)) for c in range(len(columns))] for m in all_rows
        ]
        rhs = [rhs_rows.get(m, Fraction(0)) for m in all_rows]
        sol = linalg.solve(matrix, rhs)
        if sol is None:
            return None
        return _collect_cofactors(sol, columns, len(gens))

    if not config.use_modular:
        return None
    # modular pruning pass: find a consistent pivot set mod a random large prime,
    # then re-solve those columns exactly over Q
    prime = _random_prime(config.seed)
    sparse_rows = []
    for m in all_rows:
        row = {c: int(v.numerator) * pow(int(v.denominator), -1, prime) % prime
               for c, v in rows.get(m, {}).items()}
        b = rhs_rows.get(m, Fraction(0))
        bint = int(b.numerator) * pow(int(b.denominator), -1, prime) % prime
        sparse_rows.append((row, bint))
    pivots = _modular_pivots(sparse_rows, len(columns), prime)
    if pivots is None:
        return None
    sub_cols = sorted(pivots)
    col_pos = {c: k for k, c in enumerate(sub_cols)}
    matrix = []
    rhs = []
    for m in all_rows:
        row = rows.get(m, {})
        matrix.append([row.get(c, Fraction(0)) for c in sub_cols])
        rhs.append(rhs_rows.get(m, Fraction(0)))
    sol_sub = linalg.solve(matrix, rhs)
    if sol_sub is None:
        return None
    sol = [Fraction(0)] * len(columns)
    for c, k in col_pos.items():
        sol[c] = sol_sub[k]
    return _collect_cofactors(sol, columns, len(gens))


def _min_degree(g: Polynomial) -> int:
    return min(sum(e for _, e in m) for m in g.terms)


def _collect_cofactors(sol, columns, n_gens) -> list[Polynomial]:
    out: list[dict[Monomial, Fraction]] = [{} for _ in range(n_gens)]
    for val, (i, m) in zip(sol, columns):
        if val:
            out[i][m] = val
    return [Polynomial(t) for t in out]


def _random_prime(seed: int) -> int:
    rng = random.Random(seed)
    while True:
        cand = rng.randrange(1 << 61, 1 << 62) | 1
        if _is_probable_prime(cand):
            return cand


def _is_probable_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _modular_pivots(sparse_rows, n_cols: int, p: int) -> set[int] | None:
    """Gaussian elimination mod p on sparse rows; returns pivot columns.

    Returns None if the system is inconsistent mod p (then no exact
    certificate is claimed either).
    """
    pivots: dict[int, tuple[dict[int, int], int]] = {}
    for row, b in sparse_rows:
        row = dict(row)
        while True:
            row = {c: v for c, v in row.items() if v % p}
            if not row:
                if b % p:
                    return None
                break
            c = min(row)
            if c in pivots:
                prow, pb = pivots[c]
                factor = row[c] * pow(prow[c], -1, p) % p
                for pc, pv in prow.items():
                    row[pc] = (row.get(pc, 0) - factor * pv) % p
                b = (b - factor * pb) % p
            else:
                pivots[c] = (row, b)
                break
    return set(pivots)


# --------------------------------------------------------------------------
# Degree-bounded H^1 of the prolonged action
# --------------------------------------------------------------------------


@dataclass
class H1Config:
    f_degree_margin: int = 1  # potentials may exceed the cocycle bound by this much
    max_monomials: int = 400000


def h1_dimension(g: LieAlgebra, k: int, d: int, config: H1Config | None = None) -> int:
    """dim of degree-<=d polynomial 1-cocycles modulo additive coboundaries.

    Cocycles take values in polynomials of total degree <= d in the order-k
    jet variables; coboundaries are lambda(X) = X^{(k)}(f) for polynomial f
    (of degree up to d+1, constrained so the coboundary itself stays within
    degree d).  The computation detects every grading of the prolonged
    action and decomposes the complex into finite blocks, each handled by
    exact dense elimination over Q.
    """
    config = config or H1Config()
    ctx = g.context
    structure = g.structure_constants()
    ops: list[list[tuple[VariableId, Polynomial]]] = []
    for name, xk in g.prolonged(k):
        vf = xk.as_vector_field()
        terms = []
        for v, c in vf.coefficients.items():
            if not c.is_polynomial():
                raise ValueError("h1_dimension requires polynomial prolonged coefficients")
            terms.append((v, c.as_polynomial()))
        ops.append(terms)

    variables = ctx.variables_up_to(k)
    var_index = {v: i for i, v in enumerate(variables)}
    gradings = _detect_gradings(ops, variables, var_index)
    n_gens = len(ops)

    f_degree = d + config.f_degree_margin
    monos = _monomials_up_to(variables, f_degree)
    if len(monos) * n_gens > config.max_monomials:
        raise ValueError("cochain space too large; lower the degree bound")
    multideg = {m: _multidegree(m, gradings) for m in monos}
    levels = [_op_level(i, gradings) for i in range(n_gens)]

    # lambda slots, bucketed by block key c = deg(m) - level(gen)
    slots: dict[tuple, list[tuple[int, Monomial]]] = {}
    for m in monos:
        dm = sum(e for _, e in m)
        if dm > d:
            continue
        for j in range(n_gens):
            c = tuple(a - b for a, b in zip(multideg[m], levels[j]))
            slots.setdefault(c, []).append((j, m))
    f_blocks: dict[tuple, list[Monomial]] = {}
    for m in monos:
        f_blocks.setdefault(multideg[m], []).append(m)

    op_cache: dict[tuple[int, Monomial], dict[Monomial, Fraction]] = {}

    def op_apply(i: int, m: Monomial) -> dict[Monomial, Fraction]:
        key = (i, m)
        r = op_cache.get(key)
        if r is None:
            r = _op_on_monomial(ops[i], m)
            op_cache[key] = r
        return r

    total = 0
    for c, block_slots in slots.items():
        nz = _block_cocycle_dim(block_slots, op_apply, structure, n_gens)
        nb = _block_coboundary_dim(f_blocks.get(c, []), block_slots, op_apply, n_gens)
        total += nz - nb
    return total


def _detect_gradings(ops, variables, var_index):
    """All weightings (variable weights, generator levels) respected by the action.

    Each grading is a pair (weights: {VariableId: Fraction}, levels: [Fraction]);
    every coefficient monomial of every prolonged generator must satisfy
    weight(monomial) - weight(slot variable) = level(generator).
    """
    n_vars, n_gens = len(variables), len(ops)
    rows = []
    for j, terms in enumerate(ops):
        for v, c in terms:
            for mono in c.terms:
                row = [Fraction(0)] * (n_vars + n_gens)
                for w, e in mono:
                    row[var_index[w]] += e
                row[var_index[v]] -= 1
                row[n_vars + j] -= 1
                rows.append(row)
    basis = linalg.nullspace(rows, cols=n_vars + n_gens)
    gradings = []
    for vec in basis:
        weights = {v: vec[i] for v, i in var_index.items()}
        gradings.append((weights, vec[n_vars:]))
    return gradings


def _multidegree(m: Monomial, gradings) -> tuple:
    out = []
    for weights, _ in gradings:
        total = Fraction(0)
        for v, e in m:
            total += weights[v] * e
        out.append(total)
    return tuple(out)


def _op_level(i: int, gradings) -> tuple:
    return tuple(levels[i] for _, levels in gradings)


def _block_cocycle_dim(block_slots, op_apply, structure, n_gens) -> int:
    col_index = {slot: idx for idx, slot in enumerate(block_slots)}
    rows: dict[tuple, dict[int, Fraction]] = {}

    def add(row_key, col, val):
        if val:
            row = rows.setdefault(row_key, {})
            row[col] = row.get(col, Fraction(0)) + val

    by_gen: dict[int, list[Monomial]] = {}
    for j, m in block_slots:
        by_gen.setdefault(j, []).append(m)

    for i in range(n_gens):
        for j in range(i + 1, n_gens):
            pair = (i, j)
            # X_i(lambda(X_j)) - X_j(lambda(X_i)) - sum_m c^m_ij lambda(X_m)
            for m in by_gen.get(j, []):
                col = col_index[(j, m)]
                for out_m, val in op_apply(i, m).items():
                    add((pair, out_m), col, val)
            for m in by_gen.get(i, []):
                col = col_index[(i, m)]
                for out_m, val in op_apply(j, m).items():
                    add((pair, out_m), col, -val)
            for g_idx, coeff in enumerate(structure[pair]):
                if coeff:
                    for m in by_gen.get(g_idx, []):
                        add((pair, m), col_index[(g_idx, m)], -coeff)

    return len(block_slots) - linalg.sparse_rank(list(rows.values()))


def _block_coboundary_dim(f_monos, block_slots, op_apply, n_gens) -> int:
    if not f_monos or not block_slots:
        return 0
    slot_set = {(j, m) for j, m in block_slots}
    col_index = {m: i for i, m in enumerate(f_monos)}
    bounded: dict[tuple, dict[int, Fraction]] = {}
    unbounded: dict[tuple, dict[int, Fraction]] = {}
    for m in f_monos:
        col = col_index[m]
        for j in range(n_gens):
            for out_m, val in op_apply(j, m).items():
                key = (j, out_m)
                target = bounded if key in slot_set else unbounded
                row = target.setdefault(key, {})
                row[col] = row.get(col, Fraction(0)) + val
    mat_u = list(unbounded.values())
    mat_bu = mat_u + list(bounded.values())
    return linalg.sparse_rank(mat_bu) - linalg.sparse_rank(mat_u)


def _op_on_monomial(op_terms, m: Monomial) -> dict[Monomial, Fraction]:
    """Apply a first-order operator sum c_v d/dv to a monomial."""
    from .algebra import _mono_mul

    out: dict[Monomial, Fraction] = {}
    for v, c in op_terms:
        for idx, (w, e) in enumerate(m):
            if w == v:
                if e == 1:
                    dm = m[:idx] + m[idx + 1 :]
                else:
                    dm = m[:idx] + ((w, e - 1),) + m[idx + 1 :]
                for cm, cc in c.terms.items():
                    mm = _mono_mul(cm, dm)
                    s = out.get(mm, Fraction(0)) + cc * e
                    if s:
                        out[mm] = s
                    else:
                        del out[mm]
                break
    return out
