"""Zone-checker verdicts, shortest traces, and cross-module soundness."""

import pytest

from tarepair import load_bundled_model
from tarepair.checker import Exhausted, check, enabled_moves, stt_from_moves
from tarepair.encoder import encode, feasible, violating
from tarepair.modelio import parse_model, parse_property


def test_safe_single_location_model():
    net, prop = load_bundled_model("safe_idle")
    verdict = check(net, prop)
    assert verdict.safe


def test_property_true_needs_only_initial_state():
    net, _ = load_bundled_model("safe_idle")
    prop = parse_property("true", net)
    verdict = check(net, prop)
    assert verdict.safe and verdict.states_explored == 1


def test_running_example_trace_sequence():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    assert not verdict.safe
    trace = verdict.trace
    assert len(trace) == 3
    # req handshake, internal arrival, ser handshake
    assert trace.steps[0] == ((0, 0), (1, 0))
    assert trace.steps[1] == ((1, 1),)
    assert trace.steps[2] == ((0, 1), (1, 2))
    final = trace.locations[-1]
    assert net.automata[0].location_names[final[0]] == "serReceiving"
    assert net.automata[1].location_names[final[1]] == "reqAwaiting"


def test_urgent_location_forbids_delay():
    net, prop = load_bundled_model("urgent_hop")
    verdict = check(net, prop)
    assert not verdict.safe
    sys = encode(net, verdict.trace, prop)
    assert any(ta.block == "U" and ta.step == 1 for ta in sys.atoms)


def test_verdicts_sound_for_all_violating_corpus_models():
    # Every Violated verdict yields a feasible trace whose system
    # intersects the negated property.
    for name in ("client_db", "oneclock", "urgent_hop", "pair_sync"):
        net, prop = load_bundled_model(name)
        verdict = check(net, prop)
        assert not verdict.safe, name
        sys = encode(net, verdict.trace, prop)
        assert feasible(sys), name
        assert violating(sys), name


def _all_move_sequences(net, depth):
    """Every structurally valid move sequence up to the given length."""
    init = tuple(a.initial for a in net.automata)

    def walk(locvec, prefix):
        if prefix:
            yield prefix
        if len(prefix) >= depth:
            return
        for move in enabled_moves(net, locvec):
            vec = list(locvec)
            for ai, ti in move:
                vec[ai] = net.automata[ai].transitions[ti].target
            yield from walk(tuple(vec), prefix + (move,))

    yield from walk(init, ())


def test_minimality_against_exhaustive_bounded_search():
    # No feasible violating trace strictly shorter than the reported one
    # exists (exhaustive enumeration through the independent encoder path).
    for name in ("client_db", "oneclock", "urgent_hop", "pair_sync"):
        net, prop = load_bundled_model(name)
        verdict = check(net, prop)
        shortest = len(verdict.trace)
        assert shortest <= 6
        for moves in _all_move_sequences(net, min(shortest - 1, 6)):
            stt = stt_from_moves(net, list(moves))
            sys = encode(net, stt, prop)
            assert not (feasible(sys) and violating(sys)), (name, moves)


def test_deterministic_traces():
    net, prop = load_bundled_model()
    a = check(net, prop)
    b = check(net, prop)
    assert a.trace == b.trace


def test_state_budget_exhaustion():
    net, prop = load_bundled_model()
    with pytest.raises(Exhausted):
        check(net, prop, state_budget=1)


def test_invariant_bound_safe_model():
    # Single automaton, one location, invariant x <= 2, property x <= 5.
    text = """
    {"automata": [{"name": "p", "initial": "a", "clocks": ["x"],
      "locations": [{"name": "a", "invariant": ["x <= 2"]}],
      "transitions": []}],
     "channels": [], "property": "x <= 5"}
    """
    net, prop = parse_model(text)
    assert check(net, prop).safe
