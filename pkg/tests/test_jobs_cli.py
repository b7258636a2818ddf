import json

import pytest
from click.testing import CliRunner

from engine.jobs import build_fan_from_source, clean_json, load_job, parse_curve_class, resolve_job, FanSource
from engine.tools import ToricTools
from localization.class_expr import SymbolTable
from toricgw import cli
from utils.errors import (
    IntegrandSyntaxError, JobFileError, MismatchedFan, NonSmoothCone, NotAdjacent, UnknownSymbol,
)

LINE_IN_PLANE = {
    "fan": {"construct": "projective_space", "args": [2]},
    "beta": "mg[1,2]",
    "m": 0,
    "integrand": "push_ev(D1)",
}


def _write_job(tmp_path, payload, name="job.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


def test_comment_lines_are_stripped():
    assert clean_json("# note\n{\"m\": 1}\n  # trailing") == "{\"m\": 1}"


def test_load_sample_job(job_path):
    job = load_job(job_path("blowup_p3_point.json"))
    assert job.fan.construct == "blow_up"
    resolved = resolve_job(job)
    assert resolved.fan.r == 5
    assert resolved.beta.pairing == (0, 0, 0, 1, 1)
    assert resolved.symbols.curves["H"].pairing == (1, 1, 1, 1, 0)


def test_inline_fan_uses_one_based_cones(job_path):
    resolved = resolve_job(load_job(job_path("threefold_lambda2.json")))
    assert resolved.fan.max_cones[0] == (0, 2, 3)
    assert resolved.job.verify is True


def test_several_integrands(tmp_path):
    payload = dict(LINE_IN_PLANE, integrand=["push_ev(D1)", "push_ev(D2)"])
    resolved = resolve_job(load_job(_write_job(tmp_path, payload)))
    assert len(resolved.exprs) == 2


@pytest.mark.parametrize("payload", [
    dict(LINE_IN_PLANE, m=-1),
    dict(LINE_IN_PLANE, unexpected=True),
    {k: v for k, v in LINE_IN_PLANE.items() if k != "beta"},
    dict(LINE_IN_PLANE, fan={"construct": "projective_space", "args": [2], "rays": [[1, 0]]}),
    dict(LINE_IN_PLANE, fan={"construct": "grassmannian", "args": [2]}),
])
def test_invalid_jobs(tmp_path, payload):
    with pytest.raises(JobFileError):
        load_job(_write_job(tmp_path, payload))


def test_unreadable_and_malformed_files(tmp_path):
    with pytest.raises(JobFileError):
        load_job(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{\"m\": 1,", encoding="utf-8")
    with pytest.raises(JobFileError, match="line 1"):
        load_job(str(broken))


def test_constructor_arguments():
    with pytest.raises(JobFileError):
        build_fan_from_source(FanSource(construct="proj_split", args=[3]))
    with pytest.raises(JobFileError):
        build_fan_from_source(FanSource(construct="blow_up", args=[{"construct": "projective_space", "args": [2]}, 4]))
    fan = build_fan_from_source(FanSource(construct="product", args=[
        {"construct": "projective_space", "args": [1]}, {"construct": "projective_space", "args": [2]},
    ]))
    assert (fan.n, fan.r, fan.cone_count) == (3, 5, 6)


def test_curve_class_combinations(p3):
    symbols = SymbolTable(p3)
    assert parse_curve_class("2*mg[1,2]", p3, symbols).pairing == (2, 2, 2, 2)
    symbols.bind("L", parse_curve_class("mg[1,2]", p3, symbols))
    assert parse_curve_class("3*L - mg[3,4]", p3, symbols).pairing == (2, 2, 2, 2)
    assert parse_curve_class("-L + 2*L", p3, symbols).pairing == (1, 1, 1, 1)
    with pytest.raises(NotAdjacent):
        parse_curve_class("mg[1,1]", p3, symbols)
    with pytest.raises(IntegrandSyntaxError):
        parse_curve_class("mg[1,9]", p3, symbols)
    with pytest.raises(UnknownSymbol):
        parse_curve_class("mg[1,2] + E", p3, symbols)
    with pytest.raises(IntegrandSyntaxError):
        parse_curve_class("mg[1,2", p3, symbols)


def test_pairing_vector_must_fit_the_fan(tmp_path):
    job = load_job(_write_job(tmp_path, dict(LINE_IN_PLANE, beta=[1, 1])))
    with pytest.raises(MismatchedFan):
        resolve_job(job)


def test_tools_precedence(job_path):
    tools = ToricTools()
    (result,) = tools.run_job(job_path("plane_cubics.json"))
    assert result.seed == 7
    (result,) = tools.run_job(job_path("plane_cubics.json"), seed=2)
    assert result.seed == 2
    assert result.value == 12


@pytest.mark.parametrize("name, expected", [
    ("conics_p3.json", "RESULT 1/1"),
    ("blowup_p3_point.json", "RESULT 1/1"),
    ("quartic_tangency.json", "RESULT 2/1"),
    ("threefold_lambda2.json", "RESULT -1/1"),
    ("threefold_lambda1.json", "RESULT 1/1"),
    ("fourfold_quantum_product.json", "RESULT 1/1"),
    ("fourfold_twisted_lambda1.json", "RESULT -120/1"),
    ("fourfold_twisted_lambda2.json", "RESULT 27/1"),
    ("quintic_lines.json", "RESULT 2875/1"),
    ("cubic_surface_lines.json", "RESULT 27/1"),
])
def test_integrate_sample_jobs(job_path, name, expected):
    result = CliRunner().invoke(cli, ["integrate", "--job", job_path(name)])
    assert result.exit_code == 0, result.output
    assert result.output.strip().splitlines()[-1] == expected


def test_integrate_with_verify_and_workers(job_path):
    result = CliRunner().invoke(cli, ["integrate", "--job", job_path("conics_p3.json"), "--verify",
                                      "--workers", "2", "--orientation", "higher", "--seed", "11"])
    assert result.exit_code == 0, result.output
    assert "RESULT 1/1" in result.output


def test_dimension_mismatch_on_the_command_line(tmp_path):
    path = _write_job(tmp_path, dict(LINE_IN_PLANE, integrand="push_ev(D1)*push_ev(D1)"))
    result = CliRunner().invoke(cli, ["integrate", "--job", path])
    assert result.exit_code == 0
    assert "WARNING DimensionMismatchWarning" in result.output
    assert "RESULT 0/1" in result.output


def test_errors_exit_nonzero_with_their_code(tmp_path):
    payload = dict(LINE_IN_PLANE, fan={"rays": [[1, 0], [1, 2], [-1, -1]], "max_cones": [[1, 2], [2, 3], [1, 3]]})
    result = CliRunner().invoke(cli, ["integrate", "--job", _write_job(tmp_path, payload)])
    assert result.exit_code == 1
    assert f"ERROR {NonSmoothCone.code}:" in result.output

    payload = dict(LINE_IN_PLANE, beta="-1*mg[1,2]")
    result = CliRunner().invoke(cli, ["integrate", "--job", _write_job(tmp_path, payload, "negative.json")])
    assert result.exit_code == 1
    assert "ERROR NotEffective:" in result.output

    result = CliRunner().invoke(cli, ["integrate", "--job", str(tmp_path / "missing.json")])
    assert result.exit_code == 1
    assert "ERROR JobFileError:" in result.output


def test_graphs_verb(tmp_path):
    path = _write_job(tmp_path, LINE_IN_PLANE)
    result = CliRunner().invoke(cli, ["graphs", "--job", path, "--count"])
    assert result.exit_code == 0
    assert result.output.strip() == "3"
    listing = CliRunner().invoke(cli, ["graphs", "--job", path])
    assert len(listing.output.strip().splitlines()) == 3
    assert "aut_c=1" in listing.output


def test_moment_graph_and_nef_verbs(job_path):
    result = CliRunner().invoke(cli, ["moment-graph", "--job", job_path("fourfold_quantum_product.json")])
    assert result.exit_code == 0
    assert "mg[1,2]" in result.output and "[0, 0, 0, 1, 1, 0]" in result.output
    assert "mg[4,8]" in result.output and "[1, 1, 1, 0, -1, 1]" in result.output
    result = CliRunner().invoke(cli, ["nef", "--job", job_path("fourfold_quantum_product.json")])
    assert result.exit_code == 0
    assert "nef generator" in result.output


def test_bad_environment_is_a_usage_error(job_path, monkeypatch):
    monkeypatch.setenv("TORICGW_WORKERS", "zero")
    result = CliRunner().invoke(cli, ["nef", "--job", job_path("conics_p3.json")])
    assert result.exit_code == 2
    assert "TORICGW_WORKERS" in result.output


def test_tools_on_projective_spaces(tmp_path, job_path):
    tools = ToricTools()
    graph = tools.get_moment_graph(_write_job(tmp_path, LINE_IN_PLANE))
    assert len(graph["cones"]) == 3
    assert [e["pairing"] for e in graph["entries"]] == [[1, 1, 1]] * 3
    nef = tools.get_nef(job_path("conics_p3.json"))
    assert nef["nef"] == [[0, 0, 0, 1]]
    assert nef["pairings"] == [[1]]
