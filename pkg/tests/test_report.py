import json
import math

from hypothesis import given, settings
from hypothesis import strategies as st

from cosyflat.report import ResidualReport, emit_report, emit_summary, format_number, summarize, to_json


def test_single_report_format():
    r = ResidualReport("compat", (0.0, 0.0, 1.0), 1e-13, 1e-8)
    assert r.to_jsonl() == '{"check":"compat","point":[0,0,1],"residual":1e-13,"tolerance":1e-8,"pass":true}'


def test_key_order():
    line = ResidualReport("cotton", (0.1, 0.2, 0.3), 2.0, 1e-8).to_jsonl()
    assert list(json.loads(line)) == ["check", "point", "residual", "tolerance", "pass"]


def test_empty():
    assert emit_report([], "jsonl") == ""
    assert emit_report([], "summary") == "0 checks\n"


def test_nan_never_passes():
    r = ResidualReport("cotton", (0, 0, 1), math.nan, 1.0)
    assert not r.passed
    assert json.loads(r.to_jsonl())["residual"] is None


@settings(max_examples=500)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_shortest_round_trip(v):
    text = format_number(v)
    assert float(text) == v
    assert len(text) <= len(repr(v))


def test_number_forms():
    assert format_number(1.0) == "1"
    assert format_number(-0.0) == "0"
    assert format_number(1e-8) == "1e-8"
    assert format_number(1.5e20) == "1.5e20"
    assert format_number(0.1) == "0.1"
    assert to_json({"a": [1.0, True, None, "s"]}) == '{"a":[1,true,null,"s"]}'


reports = st.lists(
    st.builds(
        ResidualReport,
        st.sampled_from(["compat", "cotton", "jacobi"]),
        st.tuples(*[st.floats(-1, 1)] * 3),
        st.floats(0, 1e-6),
        st.sampled_from([1e-9, 1e-8, 1e-7]),
    ),
    max_size=40,
)


@settings(max_examples=100)
@given(reports)
def test_summary_totals_match_jsonl(rs):
    lines = emit_report(rs, "jsonl").splitlines()
    s = summarize(rs)
    assert s.total == len(lines)
    assert s.failures == sum(1 for line in lines if not json.loads(line)["pass"])
    text = emit_summary(s)
    assert text.splitlines()[-1].startswith(f"{len(lines)} checks")
