"""Round-trip stability, parse diagnostics, and report formatting."""

import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from tarepair import BUNDLED_MODELS, bundled_model_path, load_bundled_model
from tarepair.model import indexed_constraints
from tarepair.modelio import (
    ModelFormatError,
    format_rational,
    parse_atom,
    parse_model,
    parse_property,
    parse_rational,
    parse_trace,
    property_text,
    serialize_model,
    serialize_trace,
    write_report,
)


def test_round_trip_all_corpus_files():
    for name in BUNDLED_MODELS:
        text = bundled_model_path(name).read_text(encoding="utf-8")
        net, prop = parse_model(text)
        out = serialize_model(net, prop)
        net2, prop2 = parse_model(out)
        assert serialize_model(net2, prop2) == out
        # modulo whitespace/formatting the documents agree
        assert json.loads(out)["property"] == json.loads(text)["property"]


def test_bundled_running_example_shape():
    net, prop = load_bundled_model()
    assert [a.name for a in net.automata] == ["client", "db"]
    assert set(net.clock_names) == {"x", "y", "z", "w"}
    assert property_text(prop, net) == "x <= 4 || !@client.serReceiving"


def test_malformed_operator_is_syntax_error():
    net, prop = load_bundled_model()
    doc = json.loads(serialize_model(net, prop))
    doc["automata"][1]["transitions"][1]["guard"] = ["w <== 2"]
    with pytest.raises(ModelFormatError, match="malformed constraint atom"):
        parse_model(json.dumps(doc))


def test_unknown_clock_in_atom():
    with pytest.raises(ModelFormatError, match="unknown clock"):
        parse_atom("q <= 2", ["x"], "here")


def test_property_parse_errors_carry_position():
    net, _ = load_bundled_model()
    with pytest.raises(ModelFormatError, match="property:1:"):
        parse_property("x <= 4 ||", net)
    with pytest.raises(ModelFormatError, match="unresolved location predicate"):
        parse_property("@client.nowhere", net)


def test_property_grammar_precedence():
    net, _ = load_bundled_model()
    p = parse_property("!@client.serReceiving && x <= 4 || y >= 1", net)
    # || binds weakest: (!L && x<=4) || (y>=1)
    assert p.kind.value == "or"
    assert p.children[0].kind.value == "and"
    assert property_text(parse_property(property_text(p, net), net), net) == property_text(p, net)


def test_rational_round_trip():
    assert parse_rational("3/2", "t") == Fraction(3, 2)
    assert format_rational(Fraction(3, 2)) == "3/2"
    assert format_rational(Fraction(4, 2)) == 2
    with pytest.raises(ModelFormatError):
        parse_rational("x", "t")


@given(st.fractions(min_value=0, max_value=1000))
def test_rational_round_trip_property(q):
    assert parse_rational(format_rational(q), "t") == q


def test_constraint_indexing_stable_across_round_trip():
    net, prop = load_bundled_model()
    net2, _ = parse_model(serialize_model(net, prop))
    a = [(r.index, r.kind, r.atom) for r in indexed_constraints(net)]
    b = [(r.index, r.kind, r.atom) for r in indexed_constraints(net2)]
    assert a == b


def test_trace_document_round_trip():
    from tarepair.checker import check
    from tarepair.modelio import TraceDocument, TraceStep

    net, prop = load_bundled_model()
    verdict = check(net, prop)
    doc = TraceDocument(
        tuple(TraceStep(m) for m in verdict.trace.steps),
        verdict.trace.locations[0],
        verdict.trace.locations[-1],
    )
    text = serialize_trace(doc, net)
    doc2 = parse_trace(text, net)
    assert doc2.steps == doc.steps
    assert doc2.initial_locations == doc.initial_locations
    assert doc2.final_locations == doc.final_locations


def test_trace_document_rejects_bad_transition_index():
    net, _ = load_bundled_model()
    bad = json.dumps({"steps": [{"fired": [{"automaton": "client", "transitionIndex": 9}]}]})
    with pytest.raises(ModelFormatError, match="out of range"):
        parse_trace(bad, net)


def test_trace_document_rejects_disconnected_step():
    net, _ = load_bundled_model()
    bad = json.dumps({"steps": [{"fired": [{"automaton": "client", "transitionIndex": 1}]}]})
    with pytest.raises(ModelFormatError, match="does not leave"):
        parse_trace(bad, net)


def test_report_empty_result_set(tmp_path):
    path = write_report([], tmp_path, model_name="m.json")
    text = Path(path).read_text()
    assert text.splitlines()[0] == "repair analysis report for m.json"
    assert "summary: 0 repairs, 0 admissible" in text


def test_report_rows(tmp_path):
    from tarepair.orchestrator import RepairKind, run

    net, prop = load_bundled_model()
    rr = run(net, prop, RepairKind.URGENT)
    rr.witness_files = ["witness_urgent_001.json", "witness_urgent_002.json"]
    path = write_report([rr], tmp_path)
    text = Path(path).read_text()
    assert "admissible=no" in text
    assert "witness=witness_urgent_001.json" in text
    assert "summary: 2 repairs, 0 admissible" in text


def test_bundle_validates_against_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads(Path("docs/model.schema.json").read_text())
    for name in BUNDLED_MODELS:
        doc = json.loads(bundled_model_path(name).read_text())
        jsonschema.validate(doc, schema)
