import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rymap import cli
from rymap.errors import ConfigError
from rymap.pde import io as pio

MINIMAL = """\
command = curvature

[flow]
kind = cigar

[eval]
t = 0
point = 0, 0
"""

POINCARE = """\
command = ry-eval
[flow]
kind = poincare
n = 2
[params]
alpha = 1
beta = 0
[eval]
t = 0
point = 0, 1.5
"""


def run(text, tmp_path, *overrides):
    cfg = cli.parse_config(text)
    cfg = cli.apply_override(cfg, f"output.dir={tmp_path}")
    for o in overrides:
        cfg = cli.apply_override(cfg, o)
    return cli.execute(cfg)


def test_minimal_config_parses():
    cfg = cli.parse_config(MINIMAL)
    assert cfg.command == "curvature"
    assert cfg.get("flow", "kind") == "cigar"
    assert tuple(cfg.get("eval", "point")) == (0.0, 0.0)
    # unset keys fall back to the schema default
    assert cfg.get("params", "alpha") == 1.0


def test_negative_dt_names_the_key():
    text = "command = flow-run\n[solver]\ndt = -1\nsteps = 3\n"
    with pytest.raises(ConfigError, match="dt"):
        cli.parse_config(text)


@pytest.mark.parametrize("text, fragment", [
    ("command = curvature\n[flow]\nkinds = cigar\n", "line 3"),
    ("command = curvature\n[nope]\n", "line 2"),
    ("command = curvature\n[flow]\nkind = cigar\nkind = cone\n", "line 4"),
    ("command = curvature\nthis is not a pair\n", "line 2"),
    ("command = dance\n", "line 1"),
])
def test_parse_errors_carry_line_numbers(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        cli.parse_config(text)


def test_command_is_required():
    with pytest.raises(ConfigError):
        cli.parse_config("[flow]\nkind = cigar\n")


def test_poincare_ry_eval_matches_printed_form(tmp_path):
    result = run(POINCARE, tmp_path)
    assert result.status == 0
    r = result.report["result"]
    np.testing.assert_allclose(r["ry"], r["printed_ry"], rtol=1e-6, atol=1e-9)
    np.testing.assert_allclose(r["printed_ry"], -math.log(1.5) * np.eye(2), rtol=1e-12)


def test_report_is_byte_identical_across_runs(tmp_path):
    a = run(POINCARE, tmp_path / "a")
    b = run(POINCARE, tmp_path / "b", )
    assert a.artifacts[-1].read_bytes().replace(str(tmp_path / "a").encode(), b"X") == \
        b.artifacts[-1].read_bytes().replace(str(tmp_path / "b").encode(), b"X")


def test_report_floats_round_trip():
    x = 0.1 + 0.2
    text = cli.dumps_report({"x": x, "v": [1 / 3, float("nan")]})
    assert "0.30000000000000004" in text
    assert json.loads(text)["v"][0] == 1 / 3


def test_classify_cigar_shrinking(tmp_path):
    text = """\
command = classify
[flow]
kind = cigar
potential = exp
rate = 2
[params]
alpha = 0.3
beta = 0.1
[classify]
times = 0, 0.5
points = 0, 0; 0.5, -0.3
"""
    result = run(text, tmp_path)
    assert result.status == 0
    assert result.report["result"]["character"] == "Shrinking"


def test_verify_on_steady_cigar_passes(tmp_path):
    text = """\
command = verify
[flow]
kind = cigar
[params]
alpha = 1
beta = 0
[verify]
points = 0.3, 0.4
"""
    result = run(text, tmp_path)
    assert result.status == 0
    rows = result.report["identities"]
    assert rows and all(r["verdict"] == "pass" for r in rows)
    assert {d["equation_id"] for d in result.report["discrepancies"]} >= {"eq2.5", "eq3.8"}


def test_verify_report_only_on_non_ry_flow(tmp_path):
    text = """\
command = verify
[flow]
kind = cigar
potential = constant
[verify]
points = 0.3, 0.4
strict = false
discrepancies = false
"""
    result = run(text, tmp_path)
    assert result.status == 0
    assert all(r["verdict"] == "report-only" for r in result.report["identities"])


FLOW = """\
command = flow-run
[grid]
n1 = 21
n2 = 21
[solver]
dt = 0.001
steps = 5
[probes]
points = 0, 0
"""


def test_flow_run_writes_probes(tmp_path):
    result = run(FLOW, tmp_path, "output.series=true")
    assert result.status == 0
    rows = pio.read_probes(tmp_path / "probes.csv")
    assert len(rows) == 6
    assert rows[-1]["t"] == pytest.approx(0.005)
    assert (tmp_path / "snapshots").is_dir()


def test_flow_run_cfl_refusal(tmp_path):
    result = run(FLOW, tmp_path, "solver.dt=0.5")
    assert result.status == 2
    assert 0 < result.report["suggested_dt"] < 0.5
    assert result.report["incomplete"]


def test_flow_run_blow_up_aborts(tmp_path):
    result = run(FLOW, tmp_path, "grid.bc=Periodic", "grid.initial=constant", "grid.amplitude=800",
                 "params.alpha=-1")
    assert result.status == 3


def test_residuals_command(tmp_path):
    result = run("command = residuals\n[residuals]\nfield = constant\nphi = 1\nf = 0\ng = 2\n", tmp_path)
    assert result.status == 0
    assert all(r["residual"] == 0.0 for r in result.report["result"]["residuals"])


def test_main_exit_codes(tmp_path, capsys):
    path = tmp_path / "run.cfg"
    path.write_text(POINCARE)
    assert cli.main([str(path), "--set", f"output.dir={tmp_path}"]) == 0
    assert cli.main([str(path), "--set", "eval.bogus=1"]) == 2
    assert cli.main([str(tmp_path / "missing.cfg")]) == 2
    assert cli.main([str(path), "--print-config"]) == 0
    assert "kind = poincare" in capsys.readouterr().out


finite = st.floats(-1e6, 1e6, allow_nan=False).filter(lambda x: x != 0.0)


@settings(max_examples=60, deadline=None)
@given(alpha=finite, beta=finite, t=st.floats(0, 10), n=st.integers(2, 5),
       kind=st.sampled_from(["cigar", "poincare", "cone"]),
       point=st.lists(st.floats(-10, 10), min_size=2, max_size=4),
       richardson=st.booleans())
def test_render_parse_round_trip(alpha, beta, t, n, kind, point, richardson):
    cfg = cli.parse_config("command = ry-eval\n")
    for assignment in (f"params.alpha={alpha!r}", f"params.beta={beta!r}", f"eval.t={t!r}", f"flow.n={n}",
                       f"flow.kind={kind}", "eval.point=" + ", ".join(repr(p) for p in point),
                       f"eval.richardson={str(richardson).lower()}"):
        cfg = cli.apply_override(cfg, assignment)
    assert cli.parse_config(cli.render_config(cfg)) == cfg
