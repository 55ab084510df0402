"""Variation encoders: zero-meaning contract, XOR branches, substitutions."""

from fractions import Fraction as F

from tarepair import load_bundled_model
from tarepair.checker import check
from tarepair.encoder import delta_var, encode, eliminate_clock_variables
from tarepair.lra import FAtom, LinearAtom, Rel, f_and, is_satisfiable
from tarepair.model import Op
from tarepair.variations import KINDS, vary, vary_bounds, vary_clock_refs, vary_operators, vary_resets, vary_urgency

VIOLATING = ("client_db", "oneclock", "urgent_hop", "pair_sync")


def corpus_systems():
    for name in VIOLATING:
        net, prop = load_bundled_model(name)
        verdict = check(net, prop)
        yield name, net, encode(net, verdict.trace, prop)


def test_zero_meaning_equisatisfiable_for_all_encoders_and_traces():
    for name, net, sys in corpus_systems():
        base = is_satisfiable(eliminate_clock_variables(sys).linear_atoms()).sat
        for kind in KINDS:
            vs = vary(sys, kind)
            inst = vs.instantiate(vs.zero_assignment())
            assert is_satisfiable(inst).sat == base, (name, kind)


def test_bound_variation_shares_variable_between_copies():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    vs = vary_bounds(encode(net, verdict.trace, prop))
    assert [v.name for v in vs.variables] == ["v0", "v2", "v3", "v4", "v5"]
    # the w <= 2 invariant contributes entry and exit atoms with the same v2
    w_atoms = [a for a in vs.free_atoms if "v2" in a.variables()]
    assert len(w_atoms) == 2
    # guard w + d >= 1 becomes w + d >= 1 + v4: normalized -d1 + v4 <= -1
    g = [a for a in vs.free_atoms if "v4" in a.variables()]
    assert len(g) == 1
    assert g[0] == LinearAtom.make({delta_var(1): F(-1), "v4": F(1)}, Rel.LE, -1)


def test_bound_variation_counts_one_variable_per_trace_constraint():
    for name, net, sys in corpus_systems():
        vs = vary_bounds(sys)
        trace_indices = {ta.constraint_index for ta in eliminate_clock_variables(sys).atoms if ta.block in ("I", "G")}
        assert len(vs.variables) == len(trace_indices), name


def test_operator_variation_branch_instantiation():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    vs = vary_operators(encode(net, verdict.trace, prop))
    group = next(g for g in vs.groups if g.var.name == "ov4")
    assert group.var.zero == Op.GE
    lt = group.atoms_for(Op.LT)
    assert [a.text() for a in lt] == ["d1 < 1"]
    ge = group.atoms_for(Op.GE)
    assert [a.text() for a in ge] == ["- d1 <= -1"]


def test_operator_xor_admits_exactly_one_branch():
    # Brute force over the five branches on a one-variable system: any
    # satisfying assignment fixes the selector to exactly one operator index.
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    vs = vary_operators(encode(net, verdict.trace, prop))
    group = next(g for g in vs.groups if g.var.name == "ov4")
    xor = vs.group_formula(group)
    for k in Op:
        pin = FAtom(LinearAtom.make({"ov4": F(1)}, Rel.EQ, int(k)))
        res = is_satisfiable(f_and([xor, pin]), want_model=True)
        assert res.sat  # every single branch is realizable in isolation
        satisfied = [
            kk
            for kk in Op
            if all(a.evaluate({delta_var(1): res.model[delta_var(1)]}) for a in group.atoms_for(kk))
            and res.model["ov4"] == int(kk)
        ]
        assert satisfied == [k]
    # two selector values at once are contradictory
    two = f_and(
        [
            xor,
            FAtom(LinearAtom.make({"ov4": F(1)}, Rel.EQ, 0)),
            FAtom(LinearAtom.make({"ov4": F(1)}, Rel.EQ, 1)),
        ]
    )
    assert not is_satisfiable(two).sat


def test_clock_ref_branches_substitute_delay_sums():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    sys = eliminate_clock_variables(encode(net, verdict.trace, prop))
    vs = vary_clock_refs(sys)
    # constraint #0 is z <= 2 on serReceiving (step 3, entry+exit copies)
    group = next(g for g in vs.groups if g.var.name == "cv0")
    assert group.var.zero == net.clock_index("z")
    assert len(group.branches) == 4  # clocks x, y, z, w of the owning automaton
    y = net.clock_index("y")
    y_atoms = group.atoms_for(y)
    # y's value at step 3 entry is d2: branch asserts d2 <= 2 and d2 + d3 <= 2
    assert {a.text() for a in y_atoms} == {"d2 <= 2", "d2 + d3 <= 2"}


def test_clock_ref_zero_branch_restores_base():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    vs = vary_clock_refs(encode(net, verdict.trace, prop))
    zero_inst = vs.instantiate(vs.zero_assignment())
    base = eliminate_clock_variables(encode(net, verdict.trace, prop)).linear_atoms()
    assert {a.text() for a in zero_inst} == {a.text() for a in base}


def test_reset_variation_flip_semantics():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    vs = vary_resets(encode(net, verdict.trace, prop))
    y = net.clock_index("y")
    group = next(g for g in vs.groups if g.var.anchor == (y, 1))
    keep = group.atoms_for(False)
    flip = group.atoms_for(True)
    # originally reset: keep pins y_2 = 0, flip lets the value flow
    assert len(keep) == 1 and len(flip) == 1
    assert set(keep[0].variables()) == {f"k{y}_2"}
    assert set(flip[0].variables()) == {f"k{y}_2", f"k{y}_1", delta_var(1)}
    # flips exist only for (clock, step) pairs with a transition
    assert len(vs.groups) == net.n_clocks * len(verdict.trace)


def test_reset_variation_requires_explicit_clocks():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    eli = eliminate_clock_variables(encode(net, verdict.trace, prop))
    vs = vary_resets(eli)  # transparently uses the pre-elimination source
    assert vs.base.eliminated is False


def test_urgency_variation_branches():
    net, prop = load_bundled_model("urgent_hop")
    verdict = check(net, prop)
    vs = vary_urgency(encode(net, verdict.trace, prop))
    hop = next(g for g in vs.groups if g.var.anchor == (0, 1))  # the urgent location
    assert hop.atoms_for(False) != () and hop.atoms_for(True) == ()
    rest = next(g for g in vs.groups if g.var.anchor == (0, 0))
    assert rest.atoms_for(False) == ()
    assert [a.text() for a in rest.atoms_for(True)] == ["d0 = 0"]


def test_urgency_revisited_location_shares_one_flip():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    vs = vary_urgency(encode(net, verdict.trace, prop))
    ra = next(g for g in vs.groups if g.var.name == "uv1_0")  # db.reqAwaiting
    flipped = ra.atoms_for(True)
    assert {a.text() for a in flipped} == {"d0 = 0", "d3 = 0"}


def test_encoders_leave_other_blocks_untouched():
    net, prop = load_bundled_model()
    verdict = check(net, prop)
    sys = encode(net, verdict.trace, prop)
    eli = eliminate_clock_variables(sys)
    base_texts = {a.text() for ta in eli.atoms if ta.block == "A" for a in eli.materialize(ta)}
    for kind in ("bound", "operator", "clockref", "urgent"):
        vs = vary(sys, kind)
        assert base_texts <= {a.text() for a in vs.base_atoms}, kind
