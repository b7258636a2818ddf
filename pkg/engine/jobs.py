"""Job files: validation, fan construction and symbol resolution"""

import json
import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Literal, NamedTuple, Optional, Union

import pyparsing as pp
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from localization.class_expr import IntegrandExpr, SymbolTable, parse_class_expression, parse_expression
from toric.cycles import CurveClass, moment_graph
from toric.fan import (
    Fan, blow_up_fixed_point, build_fan, construct_product, construct_proj_split, construct_projective_space,
)
from utils.errors import IntegrandSyntaxError, JobFileError, MalformedFan, MismatchedFan, UnknownSymbol

logger = logging.getLogger(__name__)


class FanSource(BaseModel):
    """Inline rays and 1-based maximal cones, or a named constructor with arguments"""

    model_config = ConfigDict(extra="forbid")

    rays: Optional[List[List[int]]] = None
    max_cones: Optional[List[List[int]]] = None
    construct: Optional[Literal["projective_space", "proj_split", "product", "blow_up"]] = None
    args: List[Any] = Field(default_factory=list)

    @model_validator(mode="after")
    def _one_form(self) -> "FanSource":
        inline = self.rays is not None or self.max_cones is not None
        if inline and self.construct is not None:
            raise ValueError("give either rays/max_cones or construct, not both")
        if not inline and self.construct is None:
            raise ValueError("fan needs rays/max_cones or construct")
        if inline and (self.rays is None or self.max_cones is None):
            raise ValueError("inline fans need both rays and max_cones")
        return self


class Job(BaseModel):
    """One integration request: (X, beta, m, integrands)"""

    model_config = ConfigDict(extra="forbid")

    fan: FanSource
    define: Dict[str, str] = Field(default_factory=dict)
    beta: Union[List[int], str]
    m: int = Field(ge=0)
    integrand: Union[str, List[str]]
    seed: Optional[int] = None
    verify: bool = False

    @property
    def integrands(self) -> List[str]:
        return [self.integrand] if isinstance(self.integrand, str) else list(self.integrand)


@dataclass
class ResolvedJob:
    """A job with its fan built and every expression parsed against it"""

    job: Job
    fan: Fan
    symbols: SymbolTable
    beta: CurveClass
    exprs: List[IntegrandExpr]

    @property
    def m(self) -> int:
        return self.job.m


def clean_json(text: str) -> str:
    """
    Strip '#' comment lines so job files can carry notes

    Args:
        text: Raw job file contents

    Returns:
        JSON text
    """
    lines = [line for line in text.splitlines() if not line.lstrip().startswith("#")]
    return "\n".join(lines).strip()


def load_job(path: Union[str, Path]) -> Job:
    """
    Read and validate a job file

    Raises:
        JobFileError: Unreadable file, invalid JSON, or fields that fail validation
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise JobFileError(f"cannot read {path}: {e.strerror or e}")

    try:
        data = json.loads(clean_json(text))
    except json.JSONDecodeError as e:
        raise JobFileError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}")

    try:
        job = Job.model_validate(data)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or '<root>'}: {err['msg']}" for err in e.errors()
        )
        raise JobFileError(f"{path}: {problems}")

    logger.info("Loaded job %s (m=%d, %d integrand(s))", path, job.m, len(job.integrands))
    return job


def _int_args(source: FanSource, count: int) -> List[int]:
    if len(source.args) != count or not all(isinstance(a, int) for a in source.args):
        raise JobFileError(f"construct {source.construct!r} takes {count} integer argument(s), got {source.args}")
    return list(source.args)


def _nested(arg: Any) -> FanSource:
    try:
        return FanSource.model_validate(arg)
    except ValidationError as e:
        raise JobFileError(f"nested fan is invalid: {e.errors()[0]['msg']}")


def build_fan_from_source(source: FanSource) -> Fan:
    """
    Build the fan a job describes; cone indices in job files are 1-based

    Raises:
        JobFileError: Wrong constructor arguments
        MalformedFan and the other fan validation errors
    """
    if source.construct is None:
        if not source.rays:
            raise MalformedFan("fan has no rays")
        cones = [[i - 1 for i in cone] for cone in source.max_cones]
        return build_fan(len(source.rays[0]), source.rays, cones)

    if source.construct == "projective_space":
        (n,) = _int_args(source, 1)
        return construct_projective_space(n)
    if source.construct == "proj_split":
        n, m = _int_args(source, 2)
        return construct_proj_split(n, m)
    if source.construct == "product":
        if len(source.args) != 2:
            raise JobFileError("construct 'product' takes two fans")
        return construct_product(*(build_fan_from_source(_nested(a)) for a in source.args))

    # blow_up
    if len(source.args) != 2 or not isinstance(source.args[1], int):
        raise JobFileError("construct 'blow_up' takes a fan and a 1-based maximal cone index")
    fan = build_fan_from_source(_nested(source.args[0]))
    cone = source.args[1]
    if not 1 <= cone <= fan.cone_count:
        raise JobFileError(f"blow_up cone {cone} is outside 1..{fan.cone_count}")
    return blow_up_fixed_point(fan, cone - 1)


# curve-class combinations: [INT*] (mg[i,j] | NAME) with +/- between terms

class _Atom(NamedTuple):
    kind: str
    loc: int
    value: Any


def _build_curve_grammar() -> pp.ParserElement:
    uint = pp.Regex(r"\d+")
    mg = pp.Keyword("mg").suppress() + pp.Suppress("[") + uint + pp.Suppress(",") + uint + pp.Suppress("]")
    mg.set_parse_action(lambda s, loc, t: _Atom("mg", loc, (int(t[0]), int(t[1]))))
    name = pp.Regex(r"[A-Za-z_][A-Za-z0-9_]*")
    name.set_parse_action(lambda s, loc, t: _Atom("name", loc, t[0]))
    coefficient = pp.Optional(uint + pp.Suppress("*"), default="1")
    first = pp.Group(pp.Optional(pp.one_of("+ -"), default="+") + coefficient + (mg | name))
    rest = pp.Group(pp.one_of("+ -") + coefficient + (mg | name))
    return first + pp.ZeroOrMore(rest)


_CURVE_GRAMMAR = _build_curve_grammar()


def parse_curve_class(text: str, fan: Fan, symbols: SymbolTable) -> CurveClass:
    """
    Evaluate an integer combination such as `mg[1,2] - 2*E`

    mg[i,j] is the curve class of the wall between maximal cones i and j
    (1-based, canonical cone order). Names refer to earlier curve bindings.
    """
    try:
        terms = _CURVE_GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseException as e:
        raise IntegrandSyntaxError(f"cannot parse curve class {text!r}: {e.msg}", e.loc)

    graph = moment_graph(fan)
    total = CurveClass.zero(fan.r)
    for sign, coefficient, atom in terms:
        k = int(coefficient) * (1 if sign == "+" else -1)
        if atom.kind == "mg":
            i, j = atom.value
            if not (1 <= i <= fan.cone_count and 1 <= j <= fan.cone_count):
                raise IntegrandSyntaxError(f"mg[{i},{j}] is outside 1..{fan.cone_count}", atom.loc)
            curve = graph.curve(i - 1, j - 1)
        else:
            if atom.value not in symbols.curves:
                raise UnknownSymbol(f"unknown curve class {atom.value!r}", atom.loc)
            curve = symbols.curves[atom.value]
        total = total + k * curve
    return total


_CURVE_MARKER = re.compile(r"\bmg\s*\[")


def resolve_job(job: Job) -> ResolvedJob:
    """
    Build the fan, bind `define`, resolve beta and parse every integrand

    Definitions are bound in file order; a value mentioning mg[i,j] binds a
    curve class, any other value a cohomology class.
    """
    fan = build_fan_from_source(job.fan)
    symbols = SymbolTable(fan)
    for name, text in job.define.items():
        if _CURVE_MARKER.search(text):
            symbols.bind(name, parse_curve_class(text, fan, symbols))
        else:
            symbols.bind(name, parse_class_expression(text, symbols))
        logger.debug("Bound %s = %s", name, text)

    if isinstance(job.beta, str):
        beta = parse_curve_class(job.beta, fan, symbols)
    else:
        if len(job.beta) != fan.r:
            raise MismatchedFan(f"beta has {len(job.beta)} pairings, the fan has {fan.r} rays")
        beta = CurveClass(tuple(job.beta))

    exprs = [parse_expression(text, job.m, symbols) for text in job.integrands]
    logger.info("Resolved job: r=%d, beta=%s", fan.r, list(beta.pairing))
    return ResolvedJob(job, fan, symbols, beta, exprs)
