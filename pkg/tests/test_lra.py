"""Engine-level checks: satisfiability, projection, sampling, budgets."""

import random
from fractions import Fraction as F

import pytest

from tarepair.lra import (
    LinearAtom,
    QeBudgetExceeded,
    Rel,
    atom_eq,
    atom_ge,
    atom_gt,
    atom_le,
    atom_lt,
    conjunction,
    eliminate,
    f_and,
    f_or,
    FAtom,
    is_satisfiable,
    pick_value,
    to_smtlib,
)


def test_trivial_unsat_pair():
    assert not is_satisfiable([atom_ge({"d": F(1)}, 0), atom_lt({"d": F(1)}, 0)]).sat


def test_sat_with_model():
    res = is_satisfiable(
        [atom_le({"d0": F(1), "d1": F(1)}, 2), atom_ge({"d0": F(1)}, 1), atom_ge({"d1": F(1)}, 1)],
        want_model=True,
    )
    assert res.sat
    assert res.model["d0"] == 1 and res.model["d1"] == 1


def test_model_satisfies_all_atoms():
    atoms = [
        atom_le({"a": F(2), "b": F(-1)}, 3),
        atom_ge({"a": F(1), "b": F(1)}, 1),
        atom_lt({"b": F(1)}, 5),
        atom_eq({"a": F(1), "c": F(-2)}, 0),
    ]
    res = is_satisfiable(atoms, want_model=True)
    assert res.sat and all(a.evaluate(res.model) for a in atoms)


def test_eliminate_single_variable():
    out = eliminate([atom_ge({"d": F(1)}, 0), atom_le({"x": F(1), "d": F(1), "v": F(-1)}, 2)], ["d"])
    assert len(out) == 1
    assert out[0] == atom_le({"x": F(1), "v": F(-1)}, 2)


def test_eliminate_nothing_is_identity_modulo_normalization():
    atoms = [atom_le({"x": F(1)}, 2), atom_ge({"y": F(1)}, 1)]
    out = eliminate(atoms, [])
    assert set(out) == set(atoms)


def test_eliminate_derives_transitive_bound():
    # x - y <= 2 and y <= 3 give x <= 5 after eliminating y.
    out = eliminate([atom_le({"x": F(1), "y": F(-1)}, 2), atom_le({"y": F(1)}, 3)], ["y"])
    assert out == [atom_le({"x": F(1)}, 5)]


def test_equalities_substituted_before_inequalities():
    out = eliminate([atom_eq({"a": F(1), "b": F(-1)}, 0), atom_le({"a": F(1)}, 5)], ["a"])
    assert out == [atom_le({"b": F(1)}, 5)]


def test_eliminate_budget_exceeded():
    random.seed(5)
    atoms = []
    for i in range(14):
        coeffs = {f"x{j}": F(random.randint(-3, 3)) for j in range(6)}
        atoms.append(atom_le(coeffs, random.randint(-2, 8)))
    with pytest.raises(QeBudgetExceeded):
        eliminate(atoms, [f"x{j}" for j in range(6)], budget=20)


def test_projection_extension_oracle_small():
    # A quick instance of the criterion-7 agreement property.
    random.seed(11)
    for _ in range(20):
        n_vars = random.randint(2, 4)
        names = [f"x{i}" for i in range(n_vars)]
        atoms = []
        for _ in range(random.randint(2, 8)):
            coeffs = {v: F(random.randint(-2, 2)) for v in names}
            rel = random.choice([Rel.LE, Rel.LT])
            atoms.append(LinearAtom.make(coeffs, rel, F(random.randint(-4, 4))))
        kill = random.sample(names, random.randint(1, n_vars - 1))
        keep = [v for v in names if v not in kill]
        projected = eliminate(atoms, kill)
        for _ in range(50):
            point = {v: F(random.randint(-8, 8), random.choice([1, 2])) for v in keep}
            in_projection = all(a.substitute(point).evaluate({}) for a in projected)
            extendable = is_satisfiable([a.substitute(point) for a in atoms]).sat
            assert in_projection == extendable


def test_or_branching_and_negated_equality():
    f = f_and(
        [
            conjunction([atom_ge({"x": F(1)}, 0), atom_le({"x": F(1)}, 0)]),
            atom_eq({"x": F(1)}, 0).negated_formula(),
        ]
    )
    assert not is_satisfiable(f).sat
    g = f_or([FAtom(atom_lt({"x": F(1)}, 0)), FAtom(atom_gt({"x": F(1)}, 3))])
    assert is_satisfiable(f_and([g, FAtom(atom_ge({"x": F(1)}, 2))]), want_model=True).model["x"] == 4


def test_pick_value_rules():
    assert pick_value(F(-2), True, F(-1, 2), False) == -1
    assert pick_value(F(0), True, F(1), True) == F(1, 2)
    assert pick_value(F(3, 2), False, F(3, 2), False) == F(3, 2)
    assert pick_value(None, False, None, False) == 0
    assert pick_value(F(5), True, None, False) == 6
    assert pick_value(None, False, F(-3), True) == -4
    assert pick_value(F(2), False, F(1), False) is None


def _solve3(rows):
    """Exact solution of a 3x3 linear system, or None if singular."""
    a = [list(map(F, r[0])) + [F(r[1])] for r in rows]
    n = 3
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        a[col] = [x / a[col][col] for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [a[r][3] for r in range(n)]


def test_random_systems_against_vertex_enumeration_oracle():
    # Non-strict 3-variable systems: satisfiable iff some basic solution of
    # the box-extended system satisfies every constraint.
    import itertools

    rng = random.Random(424242)
    box = 1000
    names = ["x0", "x1", "x2"]
    for _ in range(40):
        atoms = []
        raw = []
        for _ in range(rng.randint(2, 6)):
            coeffs = [rng.randint(-2, 2) for _ in range(3)]
            const = rng.randint(-4, 4)
            rel = rng.choice([Rel.LE, Rel.EQ])
            raw.append((coeffs, const, rel))
            atoms.append(LinearAtom.make(dict(zip(names, map(F, coeffs))), rel, F(const)))
        rows = [(c, b) for c, b, _ in raw]
        for i in range(3):  # box hyperplanes guarantee vertices exist
            unit = [0, 0, 0]
            unit[i] = 1
            rows.append((unit, box))
            rows.append((unit, -box))
        feasible_vertex = False
        for combo in itertools.combinations(rows, 3):
            point = _solve3(combo)
            if point is None:
                continue
            valuation = dict(zip(names, point))
            if all(a.evaluate(valuation) for a in atoms):
                feasible_vertex = True
                break
        assert is_satisfiable(atoms).sat == feasible_vertex


def test_smtlib_dump_mentions_all_variables():
    text = to_smtlib(conjunction([atom_le({"x": F(1), "y": F(1, 2)}, 2)]))
    assert "(declare-const x Real)" in text and "(declare-const y Real)" in text
    assert "(check-sat)" in text
