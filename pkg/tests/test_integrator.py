from fractions import Fraction
from math import comb

import pytest

import engine.integrator as integrator
from engine.integrator import IntegrationResult, integrate_ab, integrate_many, verify_integration
from localization.class_expr import SymbolTable, parse_class_expression, parse_expression
from localization.equivariant import EdgeOrientation
from toric.cycles import CurveClass, DivisorClass, moment_graph, point_class
from toric.fan import construct_projective_space
from utils.errors import DegenerateWeights, DimensionMismatchWarning, VerifyMismatch, WeightExhaustion

CONICS = "ev(1,h^3)*ev(2,h^3)*ev(3,h^3)*ev(4,h^2)*ev(5,h^2)"
QUARTIC = "1//4*(ev(1,l)^3+3*ev(1,l)^2*Psi(1)+2*ev(1,l)*Psi(2))*ev(1,h)^2"


def _integrate(fan, beta, m, text, define=None, seed=0, **options):
    symbols = SymbolTable(fan)
    for name, value in (define or {}).items():
        symbols.bind(name, parse_class_expression(value, symbols) if isinstance(value, str) else value)
    return integrate_ab(fan, beta, m, parse_expression(text, m, symbols), seed, **options)


def _line(fan):
    return moment_graph(fan).curve(0, 1)


def test_conics_through_points_and_lines(p3):
    result = _integrate(p3, 2 * _line(p3), 5, CONICS, {"h": "D1"})
    assert result.value == 1
    assert result.formatted() == "RESULT 1/1"


def test_conics_with_another_hyperplane(p3):
    assert _integrate(p3, 2 * _line(p3), 5, CONICS, {"h": "D4"}).value == 1


def test_blow_up_line_through_a_point(blowup_p3):
    graph = moment_graph(blowup_p3)
    beta = graph.curve(0, 2) - graph.curve(1, 3)
    assert _integrate(blowup_p3, beta, 1, "ev(1,a_point)").value == 1


def test_quartic_tangency(p3):
    assert _integrate(p3, _line(p3), 1, QUARTIC, {"h": "D1", "l": "4*D1"}).value == 2


def test_threefold_invariants(threefold):
    graph = moment_graph(threefold)
    lambda1, lambda2 = graph.curve(0, 3), graph.curve(3, 4)
    assert _integrate(threefold, lambda2, 3, "ev(1,D3)*ev(2,D3)*ev(3,D4*D5)").value == -1
    assert _integrate(threefold, lambda1, 3, "ev(1,D1)*ev(2,D1)*ev(3,D2*D3*D4)").value == 1


def test_fourfold_quantum_product(fourfold):
    lambda1 = moment_graph(fourfold).curve(0, 1)
    assert _integrate(fourfold, lambda1, 3, "ev(1,D4)*ev(2,D5)*ev(3,a_point)").value == 1


def test_fourfold_twisted_invariants(fourfold):
    graph = moment_graph(fourfold)
    minus_k = {"M": DivisorClass((1,) * fourfold.r)}
    assert _integrate(fourfold, graph.curve(0, 1), 1, "Psi(1)*push_ev(M)", minus_k).value == -120
    assert _integrate(fourfold, graph.curve(3, 7), 0, "push_ev(M)", minus_k).value == 27


def test_line_has_one_degree_one_map(p1):
    result = _integrate(p1, CurveClass((1, 1)), 0, "1")
    assert result.value == 1
    assert result.graph_count == 1


def test_psi_on_the_line(p1):
    assert _integrate(p1, CurveClass((1, 1)), 1, "Psi(1)").value == -2


def test_push_sign_policy(p2):
    line = _line(p2)
    assert _integrate(p2, line, 0, "push_ev(D1)").value == 1
    assert _integrate(p2, line, 0, "push_ev(D1)", push_sign=-1).value == -1


def test_push_along_degree_zero_edges(p1xp1):
    # fibre class of the second factor: D1 has degree 0 on it
    assert _integrate(p1xp1, CurveClass((0, 0, 1, 1)), 0, "push_ev(D1)").value == 1


def test_lines_on_hypersurfaces():
    p4 = construct_projective_space(4)
    assert _integrate(p4, _line(p4), 0, "push_ev(F)", {"F": "5*D1"}).value == 2875
    p3 = construct_projective_space(3)
    assert _integrate(p3, _line(p3), 0, "push_ev(F)", {"F": "3*D1"}).value == 27
    p5 = construct_projective_space(5)
    assert _integrate(p5, _line(p5), 0, "push_ev(F)*push_ev(F)", {"F": "3*D1"}).value == 1053


def test_conics_on_the_quintic():
    p4 = construct_projective_space(4)
    result = _integrate(p4, 2 * _line(p4), 0, "push_ev(F)", {"F": "5*D1"})
    assert result.value == Fraction(4876875, 8)
    assert result.formatted() == "RESULT 4876875/8"


def _kontsevich(d: int) -> int:
    """Rational plane curves of degree d through 3d - 1 points, by the associativity recursion"""
    counts = {1: 1}
    for n in range(2, d + 1):
        counts[n] = sum(
            counts[a] * counts[n - a] * (a ** 2 * (n - a) ** 2 * comb(3 * n - 4, 3 * a - 2)
                                         - a ** 3 * (n - a) * comb(3 * n - 4, 3 * a - 1))
            for a in range(1, n)
        )
    return counts[d]


@pytest.mark.parametrize("d", [1, 2, 3])
def test_plane_curve_counts(p2, d):
    m = 3 * d - 1
    text = "*".join(f"ev({i},a_point)" for i in range(1, m + 1))
    value = _integrate(p2, d * _line(p2), m, text).value
    assert value == _kontsevich(d) == [1, 1, 12][d - 1]


ACCEPTANCE_CASES = {
    "conics": ("p3", lambda g: 2 * g.curve(0, 1), 5, CONICS, {"h": "D1"}, 1),
    "blow_up": ("blowup_p3", lambda g: g.curve(0, 2) - g.curve(1, 3), 1, "ev(1,a_point)", {}, 1),
    "tangency": ("p3", lambda g: g.curve(0, 1), 1, QUARTIC, {"h": "D1", "l": "4*D1"}, 2),
    "threefold_lambda1": ("threefold", lambda g: g.curve(0, 3), 3, "ev(1,D1)*ev(2,D1)*ev(3,D2*D3*D4)", {}, 1),
    "threefold_lambda2": ("threefold", lambda g: g.curve(3, 4), 3, "ev(1,D3)*ev(2,D3)*ev(3,D4*D5)", {}, -1),
    "quantum_product": ("fourfold", lambda g: g.curve(0, 1), 3, "ev(1,D4)*ev(2,D5)*ev(3,a_point)", {}, 1),
    "twisted_psi": ("fourfold", lambda g: g.curve(0, 1), 1, "Psi(1)*push_ev(anticanonical)", {}, -120),
    "twisted": ("fourfold", lambda g: g.curve(3, 7), 0, "push_ev(anticanonical)", {}, 27),
}


@pytest.mark.parametrize("case", sorted(ACCEPTANCE_CASES))
@pytest.mark.parametrize("options", [{"seed": 17}, {"orientation": EdgeOrientation.HIGHER_FIRST}, {"workers": 3}],
                         ids=["seed", "orientation", "workers"])
def test_seed_orientation_and_worker_independence(request, case, options):
    fixture, beta_of, m, text, define, expected = ACCEPTANCE_CASES[case]
    fan = request.getfixturevalue(fixture)
    beta = beta_of(moment_graph(fan))
    base = _integrate(fan, beta, m, text, define)
    other = _integrate(fan, beta, m, text, define, **options)
    assert other.value == base.value == expected
    assert other.graph_count == base.graph_count


def test_point_class_from_any_cone(blowup_p3):
    graph = moment_graph(blowup_p3)
    beta = graph.curve(0, 2) - graph.curve(1, 3)
    for cone in range(blowup_p3.cone_count):
        assert _integrate(blowup_p3, beta, 1, "ev(1,pt)", {"pt": point_class(blowup_p3, cone)}).value == 1


def test_integral_is_additive(p3):
    define = {"h": "D1", "l": "4*D1"}
    summands = ["1//4*ev(1,l)^3*ev(1,h)^2", "3//4*ev(1,l)^2*Psi(1)*ev(1,h)^2", "2//4*ev(1,l)*Psi(2)*ev(1,h)^2"]
    parts = [_integrate(p3, _line(p3), 1, text, define).value for text in summands]
    factored = "1//4*ev(1,l)*(ev(1,l)^2+3*ev(1,l)*Psi(1)+2*Psi(2))*ev(1,h)^2"
    assert sum(parts) == _integrate(p3, _line(p3), 1, factored, define).value == 2


def test_dimension_mismatch_gives_zero_with_warning(p3):
    with pytest.warns(DimensionMismatchWarning):
        result = _integrate(p3, _line(p3), 1, "ev(1,a_point)")
    assert result.value == 0
    assert result.warnings


def test_several_integrands_share_one_stream(p3):
    symbols = SymbolTable(p3)
    exprs = [parse_expression(text, 2, symbols) for text in ("ev(1,a_point)*ev(2,a_point)", "ev(1,D1)*ev(2,a_point)")]
    with pytest.warns(DimensionMismatchWarning):
        first, second = integrate_many(p3, _line(p3), 2, exprs)
    assert first.value == 1
    assert second.value == 0 and second.graph_count == 0


def test_degenerate_weights_are_resampled(p1, monkeypatch):
    calls = []
    original = integrator._localization_sum

    def flaky(*args, **kwargs):
        calls.append(args[5])
        if len(calls) == 1:
            raise DegenerateWeights("forced")
        return original(*args, **kwargs)

    monkeypatch.setattr(integrator, "_localization_sum", flaky)
    result = _integrate(p1, CurveClass((1, 1)), 0, "1", seed=5)
    assert result.value == 1
    assert result.retries == 1
    assert calls[0] != calls[1]


def test_weight_exhaustion(p1, monkeypatch):
    def always(*args, **kwargs):
        raise DegenerateWeights("forced")

    monkeypatch.setattr(integrator, "_localization_sum", always)
    with pytest.raises(WeightExhaustion):
        _integrate(p1, CurveClass((1, 1)), 0, "1", max_attempts=3)


def test_verify_detects_disagreement(p1, monkeypatch):
    def fake(fan, beta, m, exprs, seed=0, **options):
        return [IntegrationResult(Fraction(seed), 1, 0, 0.0, seed)]

    monkeypatch.setattr(integrator, "integrate_many", fake)
    with pytest.raises(VerifyMismatch):
        verify_integration(p1, CurveClass((1, 1)), 0, [None], seed=3)


def test_verify_agrees_on_a_real_job(p3):
    symbols = SymbolTable(p3)
    symbols.bind("h", parse_class_expression("D2", symbols))
    expr = parse_expression(CONICS, 5, symbols)
    (result,) = verify_integration(p3, 2 * _line(p3), 5, [expr], seed=1)
    assert result.value == 1
