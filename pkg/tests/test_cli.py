"""Command-line surface: parsing, emission formats, exit codes.

Every command writes either CSV with a %.17g float format (lossless
round trip) or JSON carrying the same values; exit codes are the
contract: 0 success, 1 numerical failure, 2 bad usage/data, 3 resource
limit.  Tests exercise the cheap paths; the heavy verification suite
and full figure grids belong to the acceptance run.
"""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gramseries import arith, cli, gram, muntz
from gramseries.errors import InvalidArgumentError


def test_parse_grid_arithmetic():
    g = cli.parse_grid("0.5:2:0.5")
    assert np.allclose(g, [0.5, 1.0, 1.5, 2.0])


def test_parse_grid_geometric_includes_endpoint():
    g = cli.parse_grid("100:1000:x3", integers=True)
    assert g.tolist() == [100, 300, 900, 1000]


def test_parse_grid_rejects_malformed():
    for bad in ("1:2", "1:2:0", "2:1:1", "1:2:x1", "a:b:c", "1:2:3:4"):
        with pytest.raises(InvalidArgumentError):
            cli.parse_grid(bad)


@settings(max_examples=40, deadline=None)
@given(a=st.floats(min_value=0.1, max_value=50.0),
       span=st.floats(min_value=0.1, max_value=50.0),
       step=st.floats(min_value=0.05, max_value=10.0))
def test_parse_grid_covers_both_endpoints(a, span, step):
    b = a + span
    g = cli.parse_grid(f"{a}:{b}:{step}")
    assert math.isclose(g[0], a)
    assert math.isclose(g[-1], b, rel_tol=1e-9)
    assert np.all(np.diff(g) > 0)


def _run(argv, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = cli.main(argv + ["--out", str(out)])
    return code, out


def test_constants_command(tmp_path):
    code, out = _run(["constants"], tmp_path)
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "name,computed,reference,delta"
    assert len(lines) == 18
    byname = {ln.split(",")[0]: ln.split(",") for ln in lines[1:]}
    # the exact-identity row must sit at rounding level
    assert abs(float(byname["K1_minus_K_minus_half"][1])) < 1e-14
    # printed reference values are matched to their stated precision
    for nm, ref, tol in (("S1(1)", 0.130331, 1e-6), ("G1_11", 1.260661, 1e-6),
                         ("G2_11", 3.270465, 1e-5), ("S2(1)", 0.000643, 5e-6)):
        assert abs(float(byname[nm][1]) - ref) < tol, nm


def test_constants_deterministic_bytes(tmp_path):
    _, out1 = _run(["constants"], tmp_path, "a.csv")
    _, out2 = _run(["constants"], tmp_path, "b.csv")
    assert out1.read_bytes() == out2.read_bytes()


def test_constants_json_round_trip(tmp_path):
    code, out = _run(["constants", "--format", "json"], tmp_path, "c.json")
    assert code == 0
    payload = json.loads(out.read_text())
    assert len(payload) == 17
    by = {row["name"]: row for row in payload}
    assert by["K1_minus_K_minus_half"]["reference"] == 0.0


def test_kernel_command_matches_gram(tmp_path):
    code, out = _run(["kernel", "--n-max", "4", "--q", "1",
                      "--tol", "1e-10"], tmp_path)
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "m,n,G1"
    assert len(lines) == 1 + 10  # upper triangle of a 4x4
    m, n, val = lines[1].split(",")
    assert (m, n) == ("1", "1")
    assert abs(float(val) - gram.g1(1.0, 1.0, 1e-10)) < 1e-9


def test_series_command(tmp_path):
    code, out = _run(["series", "--grid", "0.5:2:0.5"], tmp_path)
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "x,R1,S1,R2,S2"
    assert len(lines) == 5
    row1 = [float(v) for v in lines[2].split(",")]
    assert row1[0] == 1.0
    assert abs(row1[2] - muntz.s1(1.0, 1e-8).value) < 1e-10


def test_traces_command_csv_and_json(tmp_path):
    code, out = _run(["traces", "--grid", "100:1000:x10", "--coeffs", "nu"],
                     tmp_path)
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines[0].split(",")) == 25
    assert len(lines) == 3
    code, outj = _run(["traces", "--grid", "100:1000:x10", "--coeffs", "nu",
                       "--format", "json"], tmp_path, "t.json")
    assert code == 0
    payload = json.loads(outj.read_text())
    assert len(payload) == 2
    # JSON carries exactly the CSV values
    csv_row = [float(v) for v in lines[1].split(",")]
    assert payload[0]["N"] == csv_row[0]
    assert payload[0]["L0"] == csv_row[1]


def test_quadform_command(tmp_path):
    code, out = _run(["quadform", "--coeffs", "nu", "--n-max", "50",
                      "--q", "2", "--tol", "1e-9"], tmp_path)
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "kind,q,N,d_squared,mixed,Q_direct,Q_decomposed,E_term,P0,P1,P2,P_sum"
    fields = lines[1].split(",")
    assert fields[0] == "nu" and fields[1] == "2" and fields[2] == "50"
    assert float(fields[3]) >= 0.0


def test_figures_1_small_grid(tmp_path):
    code, out = _run(["figures", "1", "--grid", "0.5:2:0.25"], tmp_path)
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "x,R1,S1,R2,S2"
    assert len(lines) == 8


def test_figures_5_truncates_oversized_grid(tmp_path, capsys):
    out = tmp_path / "f5.csv"
    code = cli.main(["figures", "5", "--grid", "100:6000:5900",
                     "--out", str(out)])
    err = capsys.readouterr().err
    assert code == 0
    assert "truncating" in err
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "N,d1_lambda,d1_nu,d2_lambda,d2_nu"
    assert len(lines) == 2  # only N = 100 survives the clamp
    vals = [float(v) for v in lines[1].split(",")]
    assert vals[0] == 100 and all(v > 0 for v in vals[1:])


def test_exit_code_bad_grid(tmp_path, capsys):
    assert cli.main(["series", "--grid", "2:1:1"]) == 2
    assert "error" in capsys.readouterr().err


def test_exit_code_nonpositive_tol(capsys):
    assert cli.main(["constants", "--tol", "0"]) == 2
    capsys.readouterr()


def test_exit_code_resource_limit(capsys):
    big = str(4 * arith.SIEVE_CAP)
    assert cli.main(["traces", "--grid", f"{big}:{big}:1"]) == 3
    assert "resource limit" in capsys.readouterr().err


def test_exit_code_usage_errors(capsys):
    assert cli.main(["figures", "9"]) == 2
    assert cli.main(["not-a-command"]) == 2
    assert cli.main([]) == 2
    capsys.readouterr()


def test_console_entry_point_is_main():
    import importlib.metadata as md
    eps = md.entry_points()
    scripts = (eps.select(group="console_scripts")
               if hasattr(eps, "select") else eps["console_scripts"])
    ours = [e for e in scripts if e.name == "gramseries"]
    assert ours and ours[0].value == "gramseries.cli:main"
