"""Exact sparse multivariate polynomial and rational-function arithmetic over Q.

Everything downstream (total derivatives, prolongations, multipliers,
membership certificates) reduces to arithmetic in this module, so the
representation is chosen for exactness and canonical forms:

  * coefficients are `fractions.Fraction` (arbitrary-precision, exact);
    floating point never enters the core,
  * a monomial is a tuple of (VariableId, exponent) pairs, sorted by the
    canonical variable order, exponents > 0,
  * a Polynomial maps monomials to nonzero coefficients; equal polynomials
    have equal dicts,
  * a RationalFunction is a gcd-reduced pair numerator/denominator with the
    denominator monic in the graded-lex leading coefficient, so equal
    rational functions have equal representations.

Variables are self-describing (kind, owner, multiindex); human-readable
names live in jet contexts (see `jetrel.jets`) and in the DSL printer, not
here.  The variable order is (kind, owner, graded-lex multiindex), which
fixes all tie-breaking: independent variables first, then dependent ones,
then jet variables sorted by owner and derivative multiindex.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

F0 = Fraction(0)
F1 = Fraction(1)

KIND_INDEP = "indep"
KIND_DEP = "dep"
KIND_JET = "jet"

_KIND_RANK = {KIND_INDEP: 0, KIND_DEP: 1, KIND_JET: 2}


class AlgebraError(Exception):
    """Base class for exact-arithmetic errors."""


class DivisionByZeroError(AlgebraError):
    """Division of an expression by the zero polynomial."""


class PoleError(AlgebraError):
    """Evaluation or substitution hit a vanishing denominator."""


class NotDivisibleError(AlgebraError):
    """Strict exact division failed; carries the remainder witness."""

    def __init__(self, message: str, remainder: "Polynomial"):
        super().__init__(message)
        self.remainder = remainder


@dataclass(frozen=True)
class VariableId:
    """A coordinate on a jet space: base variable or jet variable.

    kind       -- "indep" (base independent), "dep" (base dependent), "jet"
    owner      -- index of the variable among its kind; for jets, the index
                  of the dependent variable being differentiated
    multiindex -- derivative counts per independent variable; empty for
                  base variables
    """

    kind: str
    owner: int
    multiindex: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in _KIND_RANK:
            raise ValueError(f"unknown variable kind {self.kind!r}")
        if self.kind != KIND_JET and self.multiindex:
            raise ValueError("base variables carry an empty multiindex")
        if self.kind == KIND_JET and sum(self.multiindex) == 0:
            raise ValueError("jet variables need a nonzero multiindex")
        key = (_KIND_RANK[self.kind], self.owner, sum(self.multiindex), self.multiindex)
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    @property
    def order(self) -> int:
        return sum(self.multiindex)

    @property
    def sort_key(self):
        return self._key  # type: ignore[attr-defined]

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]

    def __lt__(self, other: "VariableId") -> bool:
        return self.sort_key < other.sort_key

    def __repr__(self) -> str:
        if self.kind == KIND_INDEP:
            return f"x{self.owner}"
        if self.kind == KIND_DEP:
            return f"u{self.owner}"
        return f"u{self.owner}_" + ",".join(str(i) for i in self.multiindex)


def indep_var(i: int) -> VariableId:
    return VariableId(KIND_INDEP, i)


def dep_var(j: int) -> VariableId:
    return VariableId(KIND_DEP, j)


def jet_var(j: int, multiindex: Sequence[int]) -> VariableId:
    """Jet variable u^j_sigma; the zero multiindex collapses to the base variable."""
    mi = tuple(int(s) for s in multiindex)
    if any(s < 0 for s in mi):
        raise ValueError("negative derivative count in multiindex")
    if sum(mi) == 0:
        return dep_var(j)
    return VariableId(KIND_JET, j, mi)


# A monomial: ((var, exp), ...) sorted by variable order, all exps > 0.
Monomial = tuple[tuple[VariableId, int], ...]

_ONE: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out: list[tuple[VariableId, int]] = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        va, ea = a[i]
        vb, eb = b[j]
        ka, kb = va.sort_key, vb.sort_key
        if ka == kb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _mono_degree(m: Monomial) -> int:
    return sum(e for _, e in m)


def _mono_divides(a: Monomial, b: Monomial) -> bool:
    """True iff monomial a divides monomial b."""
    db = dict(b)
    return all(db.get(v, 0) >= e for v, e in a)


def _mono_div(b: Monomial, a: Monomial) -> Monomial:
    """b / a, assuming a divides b."""
    da = dict(a)
    out = []
    for v, e in b:
        r = e - da.get(v, 0)
        if r < 0:
            raise ValueError("monomial division underflow")
        if r > 0:
            out.append((v, r))
    return tuple(out)


def _mono_lt(a: Monomial, b: Monomial) -> bool:
    """Graded-lex: is a < b?"""
    da, db = _mono_degree(a), _mono_degree(b)
    if da != db:
        return da < db
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        va, ea = a[i]
        vb, eb = b[j]
        ka, kb = va.sort_key, vb.sort_key
        if ka == kb:
            if ea != eb:
                return ea < eb
            i += 1
            j += 1
        elif ka < kb:
            # a has the earlier variable with positive exponent, b has zero there
            return False
        else:
            return True
    if i < na:
        return False
    if j < nb:
        return True
    return False


def _mono_max(monos: Iterable[Monomial]) -> Monomial:
    best: Monomial | None = None
    for m in monos:
        if best is None or _mono_lt(best, m):
            best = m
    if best is None:
        raise ValueError("empty monomial collection")
    return best


class Polynomial:
    """Sparse multivariate polynomial over Q in canonical form.

    The term dict never stores zero coefficients, so `p == q` is exactly
    mathematical equality.  Instances are treated as immutable; all
    operations return new polynomials.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] | None = None, *, _raw: bool = False):
        if terms is None:
            self.terms: dict[Monomial, Fraction] = {}
        elif _raw:
            self.terms = dict(terms)
        else:
            self.terms = {m: Fraction(c) for m, c in terms.items() if c != 0}

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "Polynomial":
        return Polynomial()

    @staticmethod
    def const(c) -> "Polynomial":
        c = Fraction(c)
        if c == 0:
            return Polynomial()
        return Polynomial({_ONE: c}, _raw=True)

    @staticmethod
    def variable(v: VariableId) -> "Polynomial":
        return Polynomial({((v, 1),): F1}, _raw=True)

    @staticmethod
    def monomial(vars_exps: Mapping[VariableId, int], coeff=F1) -> "Polynomial":
        coeff = Fraction(coeff)
        if coeff == 0:
            return Polynomial()
        if any(e < 0 for e in vars_exps.values()):
            raise ValueError("negative exponent in monomial")
        mono = tuple(sorted(((v, e) for v, e in vars_exps.items() if e), key=lambda t: t[0].sort_key))
        return Polynomial({mono: coeff}, _raw=True)

    # -- basic structure ---------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ONE in self.terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (raises if non-constant)."""
        if not self.terms:
            return F0
        if self.is_constant():
            return self.terms[_ONE]
        raise AlgebraError("polynomial is not constant")

    def variables(self) -> set[VariableId]:
        out: set[VariableId] = set()
        for m in self.terms:
            for v, _ in m:
                out.add(v)
        return out

    def total_degree(self) -> int:
        if not self.terms:
            return 0
        return max(_mono_degree(m) for m in self.terms)

    def degree_in(self, v: VariableId) -> int:
        d = 0
        for m in self.terms:
            for var, e in m:
                if var == v and e > d:
                    d = e
        return d

    def max_jet_order(self) -> int:
        """Largest jet order among the variables (0 for base-only expressions)."""
        order = 0
        for v in self.variables():
            if v.order > order:
                order = v.order
        return order

    def leading(self) -> tuple[Monomial, Fraction]:
        """Leading (monomial, coefficient) in graded-lex order."""
        if not self.terms:
            raise AlgebraError("zero polynomial has no leading term")
        m = _mono_max(self.terms)
        return m, self.terms[m]

    def coefficient(self, mono: Monomial) -> Fraction:
        return self.terms.get(mono, F0)

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms sorted descending in graded-lex order (for printing)."""
        import functools

        def cmp(a, b):
            if a[0] == b[0]:
                return 0
            return -1 if _mono_lt(a[0], b[0]) else 1

        return sorted(self.terms.items(), key=functools.cmp_to_key(cmp), reverse=True)

    # -- ring operations ---------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    def __neg__(self) -> "Polynomial":
        return Polynomial({m: -c for m, c in self.terms.items()}, _raw=True)

    def __add__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, F0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return Polynomial(out, _raw=True)

    __radd__ = __add__

    def __sub__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                return Polynomial()
            return Polynomial({m: k * c for m, k in self.terms.items()}, _raw=True)
        other = _as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        if not self.terms or not other.terms:
            return Polynomial()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[Monomial, Fraction] = {}
        for mb, cb in b.items():
            for ma, ca in a.items():
                m = _mono_mul(ma, mb)
                s = out.get(m, F0) + ca * cb
                if s:
                    out[m] = s
                else:
                    del out[m]
        return Polynomial(out, _raw=True)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise AlgebraError("negative power of a polynomial; use RationalFunction")
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n > 1
            n >>= 1
            if base_needed and n:
                base = base * base
        return result

    def __truediv__(self, other) -> "RationalFunction":
        return RationalFunction(self, _as_poly_strict(other))

    def scale(self, c: Fraction) -> "Polynomial":
        return self * c

    # -- calculus ----------------------------------------------------------

    def partial(self, v: VariableId) -> "Polynomial":
        """Formal partial derivative with respect to v."""
        out: dict[Monomial, Fraction] = {}
        for m, c in self.terms.items():
            for idx, (var, e) in enumerate(m):
                if var == v:
                    if e == 1:
                        dm = m[:idx] + m[idx + 1 :]
                    else:
                        dm = m[:idx] + ((var, e - 1),) + m[idx + 1 :]
                    s = out.get(dm, F0) + c * e
                    if s:
                        out[dm] = s
                    else:
                        del out[dm]
                    break
        return Polynomial(out, _raw=True)

    def evaluate(self, point: Mapping[VariableId, Fraction]) -> Fraction:
        """Exact value at a rational point; every variable present must be bound."""
        total = F0
        for m, c in self.terms.items():
            term = c
            for v, e in m:
                try:
                    val = point[v]
                except KeyError:
                    raise AlgebraError(f"unbound variable {v!r} in evaluation") from None
                term *= Fraction(val) ** e
            total += term
        return total

    def substitute(self, bindings: Mapping[VariableId, "RationalFunction"]) -> "RationalFunction":
        """Simultaneous substitution; unbound variables stay themselves."""
        out = RationalFunction.zero()
        cache: dict[tuple[VariableId, int], RationalFunction] = {}
        for m, c in self.terms.items():
            unbound: dict[VariableId, int] = {}
            factor: RationalFunction | None = None
            for v, e in m:
                if v in bindings:
                    key = (v, e)
                    if key not in cache:
                        cache[key] = bindings[v] ** e
                    factor = cache[key] if factor is None else factor * cache[key]
                else:
                    unbound[v] = e
            term = RationalFunction.from_polynomial(Polynomial.monomial(unbound, c))
            if factor is not None:
                term = term * factor
            out = out + term
        return out

    # -- display -----------------------------------------------------------

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.sorted_terms():
            factors = [repr(v) if e == 1 else f"{v!r}^{e}" for v, e in m]
            if not factors:
                parts.append(str(c))
            elif c == 1:
                parts.append("*".join(factors))
            elif c == -1:
                parts.append("-" + "*".join(factors))
            else:
                parts.append(f"{c}*" + "*".join(factors))
        out = parts[0]
        for p in parts[1:]:
            out += " - " + p[1:] if p.startswith("-") else " + " + p
        return out


def _as_poly(x) -> "Polynomial":
    if isinstance(x, Polynomial):
        return x
    if isinstance(x, (int, Fraction)):
        return Polynomial.const(x)
    return NotImplemented


def _as_poly_strict(x) -> "Polynomial":
    p = _as_poly(x)
    if p is NotImplemented:
        raise TypeError(f"cannot coerce {type(x).__name__} to Polynomial")
    return p


# --------------------------------------------------------------------------
# Division and gcd
# --------------------------------------------------------------------------


def try_divide(p: Polynomial, q: Polynomial) -> tuple[Polynomial | None, Polynomial]:
    """Attempt exact division p / q.

    Returns (quotient, zero) on success or (None, witness) where the witness
    is the first remainder whose leading monomial is not divisible by the
    leading monomial of q.  Not-divisible is a normal outcome for the
    relative-invariance test, not an error.
    """
    if q.is_zero():
        raise DivisionByZeroError("division by the zero polynomial")
    if p.is_zero():
        return Polynomial.zero(), Polynomial.zero()
    if q.is_constant():
        inv = F1 / q.constant_value()
        return p * inv, Polynomial.zero()
    qm, qc = q.leading()
    rest = Polynomial({m: c for m, c in q.terms.items() if m != qm}, _raw=True)
    rem = p
    quot: dict[Monomial, Fraction] = {}
    while rem.terms:
        rm, rc = rem.leading()
        if not _mono_divides(qm, rm):
            return None, rem
        t_mono = _mono_div(rm, qm)
        t_coeff = rc / qc
        quot[t_mono] = quot.get(t_mono, F0) + t_coeff
        # rem -= t * q, with the leading term cancelled by construction
        new = dict(rem.terms)
        del new[rm]
        for m, c in rest.terms.items():
            mm = _mono_mul(m, t_mono)
            s = new.get(mm, F0) - c * t_coeff
            if s:
                new[mm] = s
            else:
                new.pop(mm, None)
        rem = Polynomial(new, _raw=True)
    return Polynomial(quot), Polynomial.zero()


def exact_divide(p: Polynomial, q: Polynomial) -> Polynomial:
    """Exact division; raises NotDivisibleError with the remainder witness."""
    quot, rem = try_divide(p, q)
    if quot is None:
        raise NotDivisibleError("polynomial division left a remainder", rem)
    return quot


def reduce_by(p: Polynomial, divisors: Sequence[Polynomial]) -> tuple[list[Polynomial], Polynomial]:
    """Multivariate division of p by a divisor list in graded-lex order.

    Returns (cofactors, remainder) with p = sum(cofactor_i * divisor_i) + r
    and no monomial of r divisible by any divisor's leading monomial.  The
    remainder depends on the divisor order; callers use this as a reduction,
    not a canonical normal form.
    """
    leads = []
    for g in divisors:
        if g.is_zero():
            raise DivisionByZeroError("zero divisor in reduction")
        leads.append(g.leading())
    cof: list[dict[Monomial, Fraction]] = [{} for _ in divisors]
    rem: dict[Monomial, Fraction] = {}
    work = dict(p.terms)
    while work:
        m = _mono_max(work)
        c = work.pop(m)
        for i, (g, (gm, gc)) in enumerate(zip(divisors, leads)):
            if _mono_divides(gm, m):
                t_mono = _mono_div(m, gm)
                t_coeff = c / gc
                cof[i][t_mono] = cof[i].get(t_mono, F0) + t_coeff
                for m2, c2 in g.terms.items():
                    if m2 == gm:
                        continue
                    mm = _mono_mul(m2, t_mono)
                    s = work.get(mm, F0) - c2 * t_coeff
                    if s:
                        work[mm] = s
                    else:
                        work.pop(mm, None)
                break
        else:
            rem[m] = rem.get(m, F0) + c
    return [Polynomial(d) for d in cof], Polynomial(rem)


def _monomial_content(p: Polynomial) -> Monomial:
    """The largest monomial dividing every term of p."""
    it = iter(p.terms)
    common = dict(next(it))
    for m in it:
        dm = dict(m)
        common = {v: min(e, dm.get(v, 0)) for v, e in common.items() if v in dm}
        common = {v: e for v, e in common.items() if e > 0}
        if not common:
            return _ONE
    return tuple(sorted(common.items(), key=lambda t: t[0].sort_key))


def _divide_out_monomial(p: Polynomial, mono: Monomial) -> Polynomial:
    if mono == _ONE:
        return p
    return Polynomial({_mono_div(m, mono): c for m, c in p.terms.items()}, _raw=True)


def monic(p: Polynomial) -> Polynomial:
    """Scale so the graded-lex leading coefficient is 1."""
    if p.is_zero():
        return p
    _, lc = p.leading()
    if lc == 1:
        return p
    return p * (F1 / lc)


def _to_univariate(p: Polynomial, v: VariableId) -> dict[int, Polynomial]:
    """View p in (Q[rest])[v] as a map degree -> coefficient polynomial."""
    out: dict[int, dict[Monomial, Fraction]] = {}
    for m, c in p.terms.items():
        deg = 0
        rest = []
        for var, e in m:
            if var == v:
                deg = e
            else:
                rest.append((var, e))
        out.setdefault(deg, {})[tuple(rest)] = c
    return {d: Polynomial(t, _raw=True) for d, t in out.items()}


def _from_univariate(coeffs: Mapping[int, Polynomial], v: VariableId) -> Polynomial:
    total = Polynomial.zero()
    vp = Polynomial.variable(v)
    for d, c in coeffs.items():
        total = total + c * vp**d
    return total


def _uni_degree(u: Mapping[int, Polynomial]) -> int:
    return max((d for d, c in u.items() if not c.is_zero()), default=-1)


def _uni_prem(f: dict[int, Polynomial], g: dict[int, Polynomial]) -> dict[int, Polynomial]:
    """Pseudo-remainder of f by g in the main variable."""
    df, dg = _uni_degree(f), _uni_degree(g)
    lg = g[dg]
    r = {d: c for d, c in f.items() if not c.is_zero()}
    dr = _uni_degree(r)
    while dr >= dg:
        lr = r[dr]
        new: dict[int, Polynomial] = {}
        for d, c in r.items():
            if d == dr:
                continue
            new[d] = c * lg
        for d, c in g.items():
            if d == dg:
                continue
            shift = d + dr - dg
            new[shift] = new.get(shift, Polynomial.zero()) - c * lr
        r = {d: c for d, c in new.items() if not c.is_zero()}
        dr = _uni_degree(r)
    return r


def poly_gcd(p: Polynomial, q: Polynomial) -> Polynomial:
    """Greatest common divisor, normalized monic; gcd(p, 0) = monic(p).

    Strategy: strip common monomial content, try a pair of cheap exact
    divisions (denominators in this engine are usually powers of a few
    irreducibles, which the trial catches), then content/primitive-part
    recursion with a subresultant pseudo-remainder sequence in the main
    variable.
    """
    if p.is_zero():
        return monic(q)
    if q.is_zero():
        return monic(p)
    if p.is_constant() or q.is_constant():
        return Polynomial.const(1)

    mc_p = _monomial_content(p)
    mc_q = _monomial_content(q)
    mc = dict(mc_p)
    mc = {v: min(e, dict(mc_q).get(v, 0)) for v, e in mc.items() if v in dict(mc_q)}
    mc_common = tuple(sorted(((v, e) for v, e in mc.items() if e > 0), key=lambda t: t[0].sort_key))
    pp = _divide_out_monomial(p, mc_p)
    qq = _divide_out_monomial(q, mc_q)
    core = _gcd_core(pp, qq)
    return monic(core * Polynomial.monomial(dict(mc_common)))


def _gcd_core(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.is_constant() or q.is_constant():
        return Polynomial.const(1)
    if p == q:
        return p
    # cheap trial divisions catch the frequent "power of an irreducible" case
    if p.total_degree() >= q.total_degree():
        quot, _ = try_divide(p, q)
        if quot is not None:
            return q
    else:
        quot, _ = try_divide(q, p)
        if quot is not None:
            return p

    shared = sorted(p.variables() & q.variables(), key=lambda v: v.sort_key)
    if not shared:
        return Polynomial.const(1)
    # main variable: smallest min-degree keeps the PRS short
    v = min(shared, key=lambda w: min(p.degree_in(w), q.degree_in(w)))

    fp = _to_univariate(p, v)
    fq = _to_univariate(q, v)
    cont_p = _coeff_gcd(list(fp.values()))
    cont_q = _coeff_gcd(list(fq.values()))
    if cont_p.is_constant() or cont_q.is_constant():
        cont = Polynomial.const(1)
    else:
        cont = poly_gcd(cont_p, cont_q)
    fp = {d: exact_divide(c, cont_p) for d, c in fp.items()}
    fq = {d: exact_divide(c, cont_q) for d, c in fq.items()}

    if _uni_degree(fp) < _uni_degree(fq):
        fp, fq = fq, fp

    g = Polynomial.const(1)
    h = Polynomial.const(1)
    while True:
        delta = _uni_degree(fp) - _uni_degree(fq)
        r = _uni_prem(fp, fq)
        if _uni_degree(r) < 0:
            break
        if _uni_degree(r) == 0:
            fq = {0: Polynomial.const(1)}
            break
        divisor = g * h**delta
        fp = fq
        fq = {d: exact_divide(c, divisor) for d, c in r.items()}
        g = fp[_uni_degree(fp)]
        if delta == 0:
            # h unchanged when delta = 0 per h <- h^(1-delta) g^delta
            h = h
        elif delta == 1:
            h = g
        else:
            h = exact_divide(g**delta, h ** (delta - 1))
    if _uni_degree(fq) == 0:
        return cont
    prim = _uni_primitive(fq)
    return cont * _from_univariate(prim, v)


def _uni_primitive(u: dict[int, Polynomial]) -> dict[int, Polynomial]:
    cont = _coeff_gcd([c for c in u.values() if not c.is_zero()])
    if cont.is_constant():
        return u
    return {d: exact_divide(c, cont) for d, c in u.items()}


def _coeff_gcd(coeffs: list[Polynomial]) -> Polynomial:
    g = Polynomial.zero()
    for c in sorted(coeffs, key=lambda c: (c.total_degree(), len(c.terms))):
        g = poly_gcd(g, c)
        if g.is_constant() and not g.is_zero():
            return Polynomial.const(1)
    return g


# --------------------------------------------------------------------------
# Rational functions
# --------------------------------------------------------------------------


class RationalFunction:
    """A reduced fraction of polynomials with canonical representation.

    gcd(num, den) is a unit and the denominator is monic in graded-lex
    order, so equality of values coincides with equality of (num, den).
    """

    __slots__ = ("num", "den")

    def __init__(
        self,
        num: Polynomial,
        den: Polynomial | None = None,
        *,
        _reduced: bool = False,
        _coprime: bool = False,
    ):
        if den is None:
            den = Polynomial.const(1)
        if den.is_zero():
            raise DivisionByZeroError(f"zero denominator under {num!r}")
        if num.is_zero():
            self.num = Polynomial.zero()
            self.den = Polynomial.const(1)
            return
        if not _reduced:
            if den.is_constant():
                inv = F1 / den.constant_value()
                num = num * inv
                den = Polynomial.const(1)
            else:
                if not _coprime:
                    g = poly_gcd(num, den)
                    if not g.is_constant():
                        num = exact_divide(num, g)
                        den = exact_divide(den, g)
                _, lc = den.leading()
                if lc != 1:
                    inv = F1 / lc
                    num = num * inv
                    den = den * inv
        self.num = num
        self.den = den

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero() -> "RationalFunction":
        return RationalFunction(Polynomial.zero())

    @staticmethod
    def const(c) -> "RationalFunction":
        return RationalFunction(Polynomial.const(c))

    @staticmethod
    def from_polynomial(p: Polynomial) -> "RationalFunction":
        return RationalFunction(p, Polynomial.const(1), _reduced=True)

    @staticmethod
    def variable(v: VariableId) -> "RationalFunction":
        return RationalFunction.from_polynomial(Polynomial.variable(v))

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        if not self.is_polynomial():
            raise AlgebraError(f"not a polynomial: denominator {self.den!r}")
        return self.num

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise AlgebraError("rational function is not constant")
        if self.num.is_zero():
            return F0
        return self.num.constant_value() / self.den.constant_value()

    def variables(self) -> set[VariableId]:
        return self.num.variables() | self.den.variables()

    def max_jet_order(self) -> int:
        return max(self.num.max_jet_order(), self.den.max_jet_order())

    def __eq__(self, other: object) -> bool:
        other_rf = _as_rf(other)
        if other_rf is NotImplemented:
            return NotImplemented
        return self.num == other_rf.num and self.den == other_rf.den

    def __hash__(self) -> int:
        return hash((self.num, self.den))

    # -- field operations ----------------------------------------------------

    def __neg__(self) -> "RationalFunction":
        return RationalFunction(-self.num, self.den, _reduced=True)

    def __add__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        g = poly_gcd(self.den, other.den)
        if g.is_constant():
            return RationalFunction(
                self.num * other.den + other.num * self.den, self.den * other.den
            )
        da = exact_divide(self.den, g)
        db = exact_divide(other.den, g)
        num = self.num * db + other.num * da
        return RationalFunction(num, da * other.den)

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return RationalFunction.zero()
        # cross-reduce before multiplying to keep gcd inputs small
        a_num, b_den = _cross_reduce(self.num, other.den)
        b_num, a_den = _cross_reduce(other.num, self.den)
        return RationalFunction(a_num * b_num, a_den * b_den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZeroError("division by the zero rational function")
        return self * RationalFunction(other.den, other.num)

    def __rtruediv__(self, other) -> "RationalFunction":
        other = _as_rf(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, n: int) -> "RationalFunction":
        if n == 0:
            return RationalFunction.const(1)
        if n < 0:
            if self.is_zero():
                raise DivisionByZeroError("negative power of zero")
            return RationalFunction(self.den**-n, self.num**-n, _coprime=True)
        return RationalFunction(self.num**n, self.den**n, _reduced=True)

    # -- calculus ------------------------------------------------------------

    def partial(self, v: VariableId) -> "RationalFunction":
        """Formal partial derivative (quotient rule)."""
        if self.is_polynomial():
            return RationalFunction.from_polynomial(self.num.partial(v))
        dn = self.num.partial(v)
        dd = self.den.partial(v)
        if dd.is_zero():
            return RationalFunction(dn, self.den)
        return RationalFunction(dn * self.den - self.num * dd, self.den * self.den)

    def evaluate(self, point: Mapping[VariableId, Fraction]) -> Fraction:
        d = self.den.evaluate(point)
        if d == 0:
            raise PoleError("denominator vanishes at the evaluation point")
        return self.num.evaluate(point) / d

    def substitute(self, bindings: Mapping[VariableId, "RationalFunction"]) -> "RationalFunction":
        den = self.den.substitute(bindings)
        if den.is_zero():
            raise PoleError("substitution produced a zero denominator")
        return self.num.substitute(bindings) / den

    def __repr__(self) -> str:
        if self.is_polynomial():
            return repr(self.num)
        return f"({self.num!r})/({self.den!r})"


def _cross_reduce(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    if den.is_constant() or num.is_zero():
        return num, den
    g = poly_gcd(num, den)
    if g.is_constant():
        return num, den
    return exact_divide(num, g), exact_divide(den, g)


def _as_rf(x) -> "RationalFunction":
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction.from_polynomial(x)
    if isinstance(x, (int, Fraction)):
        return RationalFunction.const(x)
    return NotImplemented


def as_rational(x) -> RationalFunction:
    rf = _as_rf(x)
    if rf is NotImplemented:
        raise TypeError(f"cannot coerce {type(x).__name__} to RationalFunction")
    return rf


# --------------------------------------------------------------------------
# Randomized evaluation oracle
# --------------------------------------------------------------------------


def random_point(
    variables: Iterable[VariableId], rng: random.Random, magnitude: int = 10**6
) -> dict[VariableId, Fraction]:
    """A random integer point with coordinates bounded by the magnitude."""
    point = {}
    for v in variables:
        val = 0
        while val == 0:
            val = rng.randint(-magnitude, magnitude)
        point[v] = Fraction(val)
    return point


def eval_equal(
    a: RationalFunction,
    b: RationalFunction,
    *,
    points: int = 10,
    seed: int = 0,
    magnitude: int = 10**6,
) -> bool:
    """Compare two rational functions by evaluation at seeded random points.

    This is the independent numeric oracle used to cross-check symbolic
    identities; poles are skipped by redrawing the point.
    """
    rng = random.Random(seed)
    vars_all = sorted(a.variables() | b.variables(), key=lambda v: v.sort_key)
    done = 0
    attempts = 0
    while done < points:
        attempts += 1
        if attempts > 100 * points:
            raise PoleError("could not find enough pole-free sample points")
        point = random_point(vars_all, rng, magnitude)
        try:
            va = a.evaluate(point)
            vb = b.evaluate(point)
        except PoleError:
            continue
        if va != vb:
            return False
        done += 1
    return True
