"""
The integrand language

    expr   := term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ('^' UINT)?
    atom   := RATIONAL | NAME | ev(UINT, expr) | Psi(UINT, ...) | push_ev(NAME) | '(' expr ')'
    RATIONAL := INT ('//' INT)?

Inside ev(i, ...) the expression is a cohomology class of X built from
D1..Dr, a_point, anticanonical and the job's own bindings.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

import pyparsing as pp

from localization.equivariant import FlagData, ev_factor, psi_factor, push_ev_factor
from toric.cycles import (
    CohomExpr, CurveClass, DivisorClass, anticanonical_divisor, pair, point_class, ray_divisor, wall_classes,
)
from toric.fan import Fan
from utils.errors import (
    InhomogeneousSum, IntegrandSyntaxError, MarkIndexOutOfRange, MultiplePsi, UngradedClass, UnknownSymbol,
)

logger = logging.getLogger(__name__)

pp.ParserElement.enable_packrat()


class SymbolTable:
    """Names usable in class expressions: D1..Dr, a_point, anticanonical and job bindings"""

    def __init__(self, fan: Fan):
        self.fan = fan
        self.classes: Dict[str, CohomExpr] = {}
        self.divisors: Dict[str, DivisorClass] = {}
        self.curves: Dict[str, CurveClass] = {}
        for j in range(fan.r):
            self.bind(f"D{j + 1}", ray_divisor(fan, j))
        self.bind("a_point", point_class(fan))
        self.bind("anticanonical", anticanonical_divisor(fan))

    @property
    def rank(self) -> int:
        return self.fan.r

    def bind(self, name: str, value: Union[CohomExpr, DivisorClass, CurveClass]) -> None:
        self.classes.pop(name, None)
        self.divisors.pop(name, None)
        self.curves.pop(name, None)
        if isinstance(value, CurveClass):
            self.curves[name] = value
        elif isinstance(value, DivisorClass):
            self.divisors[name] = value
            self.classes[name] = value.as_cohom()
        else:
            self.classes[name] = value

    def cohom(self, name: str, position: Optional[int] = None) -> CohomExpr:
        if name not in self.classes:
            raise UnknownSymbol(f"unknown class symbol {name!r}", position)
        return self.classes[name]

    def divisor(self, name: str, position: Optional[int] = None) -> DivisorClass:
        if name in self.divisors:
            return self.divisors[name]
        try:
            return self.cohom(name, position).as_divisor()
        except UngradedClass as e:
            raise IntegrandSyntaxError(f"push_ev needs a divisor class, {name!r}: {e}", position)


# raw syntax tree produced by the grammar

class _Raw(NamedTuple):
    kind: str
    loc: int
    items: tuple


def _collapse(kind: str):
    def action(s, loc, toks):
        if len(toks) == 1:
            return toks[0]
        return _Raw(kind, loc, tuple(toks))
    return action


def _sum_action(s, loc, toks):
    if len(toks) == 1:
        return toks[0]
    terms = [(1, toks[0])]
    for i in range(1, len(toks), 2):
        terms.append((1 if toks[i] == "+" else -1, toks[i + 1]))
    return _Raw("sum", loc, tuple(terms))


def _build_grammar() -> pp.ParserElement:
    lpar, rpar, comma = map(pp.Suppress, "(),")
    uint = pp.Regex(r"\d+")
    rational = pp.Regex(r"-?\d+(?://\d+)?")
    name = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*")

    expr = pp.Forward()
    ev_call = pp.Keyword("ev").suppress() + lpar + uint + comma + expr + rpar
    psi_call = pp.Keyword("Psi").suppress() + lpar + pp.DelimitedList(uint) + rpar
    push_call = pp.Keyword("push_ev").suppress() + lpar + pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*") + rpar
    group = lpar + expr + rpar

    ev_call.set_parse_action(lambda s, loc, t: _Raw("ev", loc, (int(t[0]), t[1])))
    psi_call.set_parse_action(lambda s, loc, t: _Raw("psi", loc, tuple(int(x) for x in t)))
    push_call.set_parse_action(lambda s, loc, t: _Raw("push", loc, (t[0],)))
    rational.set_parse_action(lambda s, loc, t: _Raw("scalar", loc, (t[0],)))
    name.set_parse_action(lambda s, loc, t: _Raw("name", loc, (t[0],)))
    group.set_parse_action(lambda s, loc, t: _Raw("group", loc, (t[0],)))

    atom = ev_call | psi_call | push_call | rational | name | group
    factor = atom + pp.Optional(pp.Suppress("^") + uint)
    factor.set_parse_action(lambda s, loc, t: t[0] if len(t) == 1 else _Raw("power", loc, (t[0], int(t[1]))))
    term = factor + pp.ZeroOrMore(pp.Suppress("*") + factor)
    term.set_parse_action(_collapse("product"))
    expr <<= term + pp.ZeroOrMore(pp.one_of("+ -") + term)
    expr.set_parse_action(_sum_action)
    return expr


_GRAMMAR = _build_grammar()


def _parse_raw(text: str) -> _Raw:
    try:
        return _GRAMMAR.parse_string(text, parse_all=True)[0]
    except pp.ParseException as e:
        raise IntegrandSyntaxError(f"cannot parse {text!r}: {e.msg}", e.loc)


def _render_raw(raw: _Raw) -> str:
    kind, _, items = raw
    if kind in ("scalar", "name"):
        return items[0]
    if kind == "group":
        return f"({_render_raw(items[0])})"
    if kind == "power":
        return f"{_render_raw(items[0])}^{items[1]}"
    if kind == "product":
        return "*".join(_render_raw(f) for f in items)
    if kind == "sum":
        head = _render_raw(items[0][1])
        return head + "".join(("+" if sign > 0 else "-") + _render_raw(t) for sign, t in items[1:])
    if kind == "ev":
        return f"ev({items[0]},{_render_raw(items[1])})"
    if kind == "psi":
        return f"Psi({','.join(str(a) for a in items)})"
    return f"push_ev({items[0]})"


def _rational(text: str, position: int) -> Fraction:
    numerator, _, denominator = text.partition("//")
    if denominator and int(denominator) == 0:
        raise IntegrandSyntaxError("zero denominator in rational", position)
    return Fraction(int(numerator), int(denominator) if denominator else 1)


def _to_class(raw: _Raw, symbols: SymbolTable) -> CohomExpr:
    kind, loc, items = raw
    if kind == "scalar":
        return CohomExpr.scalar(symbols.rank, _rational(items[0], loc))
    if kind == "name":
        return symbols.cohom(items[0], loc)
    if kind == "group":
        return _to_class(items[0], symbols)
    if kind == "power":
        return _to_class(items[0], symbols) ** items[1]
    if kind == "product":
        result = CohomExpr.scalar(symbols.rank, 1)
        for f in items:
            result = result * _to_class(f, symbols)
        return result
    if kind == "sum":
        try:
            result = CohomExpr(symbols.rank)
            for sign, t in items:
                value = _to_class(t, symbols)
                result = result + value if sign > 0 else result - value
            return result
        except InhomogeneousSum:
            raise InhomogeneousSum("cohomology class mixes codimensions", loc)
    raise IntegrandSyntaxError(f"{kind} cannot appear inside a cohomology class", loc)


def parse_class_expression(text: str, symbols: SymbolTable) -> CohomExpr:
    """Parse a polynomial in the class symbols, e.g. `4*D1` or `D3*D4`"""
    return _to_class(_parse_raw(text), symbols)


# typed integrand tree

@dataclass(frozen=True)
class Scalar:
    value: Fraction
    text: str


@dataclass(frozen=True)
class Ev:
    mark: int
    cls: CohomExpr
    text: str


@dataclass(frozen=True)
class PsiNode:
    exponents: Tuple[int, ...]


@dataclass(frozen=True)
class PushEv:
    divisor: DivisorClass
    name: str


@dataclass(frozen=True)
class Group:
    child: "IntegrandExpr"


@dataclass(frozen=True)
class Sum:
    terms: Tuple[Tuple[int, "IntegrandExpr"], ...]


@dataclass(frozen=True)
class Product:
    factors: Tuple["IntegrandExpr", ...]


@dataclass(frozen=True)
class Power:
    child: "IntegrandExpr"
    exponent: int


IntegrandExpr = Union[Scalar, Ev, PsiNode, PushEv, Group, Sum, Product, Power]

# codimension as const + (push divisor sum) . beta
Grade = Tuple[int, Tuple[int, ...]]


def _grade(expr: IntegrandExpr, rank: int) -> Grade:
    zero = (0,) * rank
    if isinstance(expr, Scalar):
        return 0, zero
    if isinstance(expr, Ev):
        return expr.cls.codim, zero
    if isinstance(expr, PsiNode):
        return sum(expr.exponents), zero
    if isinstance(expr, PushEv):
        return 1, expr.divisor.coeffs
    if isinstance(expr, Group):
        return _grade(expr.child, rank)
    if isinstance(expr, Power):
        const, push = _grade(expr.child, rank)
        return const * expr.exponent, tuple(x * expr.exponent for x in push)
    if isinstance(expr, Product):
        const, push = 0, zero
        for f in expr.factors:
            c, p = _grade(f, rank)
            const, push = const + c, tuple(a + b for a, b in zip(push, p))
        return const, push
    return _grade(expr.terms[0][1], rank)


def _grade_key(expr: IntegrandExpr, fan: Fan) -> Tuple[int, Tuple[int, ...]]:
    """Grade with the push divisor taken up to linear equivalence, via its wall pairings"""
    const, push = _grade(expr, fan.r)
    return const, tuple(pair(DivisorClass(push), c) for c in wall_classes(fan))


def has_psi(expr: IntegrandExpr) -> bool:
    if isinstance(expr, PsiNode):
        return True
    if isinstance(expr, (Group, Power)):
        return has_psi(expr.child)
    if isinstance(expr, Product):
        return any(has_psi(f) for f in expr.factors)
    if isinstance(expr, Sum):
        return any(has_psi(t) for _, t in expr.terms)
    return False


def _to_integrand(raw: _Raw, m: int, symbols: SymbolTable) -> IntegrandExpr:
    kind, loc, items = raw
    if kind == "scalar":
        return Scalar(_rational(items[0], loc), items[0])
    if kind == "name":
        symbols.cohom(items[0], loc)
        raise IntegrandSyntaxError(f"class {items[0]!r} must be wrapped in ev(i, ...)", loc)
    if kind == "ev":
        mark, inner = items
        if not 1 <= mark <= m:
            raise MarkIndexOutOfRange(f"ev mark {mark} is outside 1..{m}", loc)
        cls = _to_class(inner, symbols)
        if cls.is_zero():
            raise IntegrandSyntaxError("ev of the zero class has no codimension", loc)
        return Ev(mark, cls, _render_raw(inner))
    if kind == "psi":
        if len(items) != m:
            raise MarkIndexOutOfRange(f"Psi takes {m} exponents, got {len(items)}", loc)
        return PsiNode(tuple(items))
    if kind == "push":
        return PushEv(symbols.divisor(items[0], loc), items[0])
    if kind == "group":
        return Group(_to_integrand(items[0], m, symbols))
    if kind == "power":
        child = _to_integrand(items[0], m, symbols)
        if items[1] >= 2 and has_psi(child):
            raise MultiplePsi("a power of a psi class must go into the Psi exponents", loc)
        return Power(child, items[1])
    if kind == "product":
        factors = tuple(_to_integrand(f, m, symbols) for f in items)
        if sum(1 for f in factors if has_psi(f)) > 1:
            raise MultiplePsi("at most one Psi factor per product term", loc)
        return Product(factors)

    terms = tuple((sign, _to_integrand(t, m, symbols)) for sign, t in items)
    grades = {_grade_key(t, symbols.fan) for _, t in terms}
    if len(grades) > 1:
        raise InhomogeneousSum("summands have different codimensions", loc)
    return Sum(terms)


def parse_expression(text: str, m: int, symbols: SymbolTable) -> IntegrandExpr:
    """
    Parse and validate an integrand for M_{0,m}(X, beta)

    Raises:
        IntegrandSyntaxError, UnknownSymbol, MarkIndexOutOfRange,
        InhomogeneousSum, MultiplePsi
    """
    expr = _to_integrand(_parse_raw(text), m, symbols)
    logger.debug("Parsed integrand %s", render(expr))
    return expr


def render(expr: IntegrandExpr) -> str:
    """Source form of an integrand without whitespace"""
    if isinstance(expr, Scalar):
        return expr.text
    if isinstance(expr, Ev):
        return f"ev({expr.mark},{expr.text})"
    if isinstance(expr, PsiNode):
        return f"Psi({','.join(str(a) for a in expr.exponents)})"
    if isinstance(expr, PushEv):
        return f"push_ev({expr.name})"
    if isinstance(expr, Group):
        return f"({render(expr.child)})"
    if isinstance(expr, Power):
        return f"{render(expr.child)}^{expr.exponent}"
    if isinstance(expr, Product):
        return "*".join(render(f) for f in expr.factors)
    head = render(expr.terms[0][1])
    return head + "".join(("+" if sign > 0 else "-") + render(t) for sign, t in expr.terms[1:])


def codimension(expr: IntegrandExpr, fan: Fan, beta: CurveClass) -> int:
    """Degree of the integrand on M_{0,m}(X, beta)"""
    const, push = _grade(expr, fan.r)
    return const + pair(DivisorClass(push), beta)


def evaluate(expr: IntegrandExpr, fd: FlagData) -> Fraction:
    """Restriction of the integrand to the fixed locus of fd.graph"""
    if isinstance(expr, Scalar):
        return expr.value
    if isinstance(expr, Ev):
        return ev_factor(fd, expr.mark, expr.cls)
    if isinstance(expr, PsiNode):
        return fd.cached(("psi", expr.exponents), lambda: psi_factor(fd, expr.exponents))
    if isinstance(expr, PushEv):
        return fd.cached(("push", expr.divisor.coeffs), lambda: push_ev_factor(fd, expr.divisor))
    if isinstance(expr, Group):
        return evaluate(expr.child, fd)
    if isinstance(expr, Power):
        return evaluate(expr.child, fd) ** expr.exponent
    if isinstance(expr, Product):
        value = Fraction(1)
        for f in expr.factors:
            value *= evaluate(f, fd)
            if not value:
                break
        return value
    return sum((sign * evaluate(t, fd) for sign, t in expr.terms), Fraction(0))


def top_level_ev_factors(expr: IntegrandExpr) -> List[Ev]:
    """ev atoms that multiply the whole integrand; empty when the top is a sum"""
    if isinstance(expr, Ev):
        return [expr]
    if isinstance(expr, Group):
        return top_level_ev_factors(expr.child)
    if isinstance(expr, Power) and expr.exponent >= 1:
        return top_level_ev_factors(expr.child)
    if isinstance(expr, Product):
        return [ev for f in expr.factors for ev in top_level_ev_factors(f)]
    return []
