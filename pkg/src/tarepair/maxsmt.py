"""Partial MaxSMT over variation variables.

The hard constraint says: some realization of the varied trace system
exists, and every realization satisfies the property. The soft constraints
pin each variation variable to its "no change" value; a repair is an
assignment satisfying the hard constraint while keeping as many soft pins
as possible (equivalently, modifying as few constraints as possible).

For the bound analysis the variation variables are free rationals, so the
hard constraint is materialized by quantifier elimination over the delay
variables. For the discrete analyses (operator, clock reference, resets,
urgency) the selectors are enumerated outside elimination: a candidate
assignment reduces both quantifiers to two exact satisfiability checks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .lra import (
    DEFAULT_QE_BUDGET,
    FAnd,
    FAtom,
    FOr,
    Formula,
    LinearAtom,
    Rel,
    conjunction,
    eliminate,
    f_and,
    f_or,
    is_satisfiable,
)
from .variations import VariedSystem


def formula_to_dnf(f: Formula) -> list[list[LinearAtom]]:
    if isinstance(f, FAtom):
        return [[f.atom]]
    if isinstance(f, FAnd):
        out: list[list[LinearAtom]] = [[]]
        for c in f.children:
            out = [d + cd for d in out for cd in formula_to_dnf(c)]
        return out
    out = []
    for c in f.children:
        out.extend(formula_to_dnf(c))
    return out


class HardConstraint:
    """(exists delays. T^var) and (forall delays. T^var => Phi), checkable
    either per concrete assignment or, for the bound kind, as a formula
    over the free variation variables."""

    def __init__(self, vs: VariedSystem, qe_budget: int = DEFAULT_QE_BUDGET):
        self.vs = vs
        self.qe_budget = qe_budget
        self.neg_phi = vs.base.property_formula(negated=True)
        self.formula: Formula | None = None
        if vs.kind == "bound":
            self.formula = self._bound_formula()

    def _bound_formula(self) -> Formula:
        vs = self.vs
        quantified = vs.base.delta_vars() + vs.base.clock_vars()
        atoms = list(vs.base_atoms) + list(vs.free_atoms)
        existential = eliminate(atoms, quantified, self.qe_budget)
        parts: list[Formula] = [conjunction(existential)]
        for disjunct in formula_to_dnf(self.neg_phi):
            projected = eliminate(atoms + disjunct, quantified, self.qe_budget)
            parts.append(f_and([f_or([a.negated_formula() for a in projected])]))
        return f_and(parts)

    def check(self, assignment: dict[str, object]) -> bool:
        """Is this full assignment a repair (feasible, no violating realization)?"""
        atoms = self.vs.instantiate(assignment)
        if not is_satisfiable(atoms, self.qe_budget).sat:
            return False
        bad = f_and([conjunction(atoms), self.neg_phi])
        return not is_satisfiable(bad, self.qe_budget).sat

    def check_with_zeros(self, zeros: frozenset[str]) -> bool:
        """Bound kind: is the hard formula satisfiable with these variables pinned to 0?"""
        pins = conjunction(
            LinearAtom.make({v: Fraction(1)}, Rel.EQ, 0) for v in sorted(zeros)
        )
        return is_satisfiable(f_and([self.formula, pins]), self.qe_budget).sat


@dataclass(frozen=True)
class MaxSmtProblem:
    hard: HardConstraint
    soft: tuple[str, ...]  # variable names pinned to their zero meaning
    blocked: frozenset[str] = frozenset()  # variables hard-asserted to zero


@dataclass(frozen=True)
class Solution:
    assignment: tuple[tuple[str, object], ...]  # full assignment, all variables
    modified: tuple[str, ...]
    kept: frozenset[str]

    def as_dict(self) -> dict[str, object]:
        return dict(self.assignment)


@dataclass
class SearchState:
    """Unsat-memo carried across max_sat calls of one enumeration loop."""

    failed_kept: list[frozenset[str]] = field(default_factory=list)

    def known_unsat(self, kept: frozenset[str]) -> bool:
        return any(f <= kept for f in self.failed_kept)

    def record_unsat(self, kept: frozenset[str]) -> None:
        self.failed_kept.append(kept)


def nonzero_values(var) -> list[object]:
    """Domain of one variable without its zero meaning, in deterministic order."""
    assert var.domain is not None
    return [v for v in var.domain if v != var.zero]


def repairing_assignments(
    hard: HardConstraint, modified: tuple[str, ...], limit: int | None = None
):
    """All repairing value combinations on exactly the given modified set.

    Discrete kinds only; values run over each variable's non-zero domain in
    lexicographic order, so enumeration is deterministic.
    """
    vs = hard.vs
    zeros = {v.name: v.zero for v in vs.variables if v.name not in modified}
    mvars = [vs.variable_named(name) for name in modified]
    found = []
    for combo in itertools.product(*(nonzero_values(v) for v in mvars)):
        assignment = dict(zeros)
        assignment.update({v.name: val for v, val in zip(mvars, combo)})
        if hard.check(assignment):
            found.append(assignment)
            if limit is not None and len(found) >= limit:
                break
    return found


def sample_repair_values(
    hard: HardConstraint, modified: tuple[str, ...], scan_limit: int = 64
) -> dict[str, Fraction] | None:
    """Concrete rational values for the modified bound variables.

    Each variable is fixed in turn to the integer of minimal absolute value
    that keeps the pinned hard formula satisfiable (positive before
    negative); when no integer fits within the scan limit, a rational
    interior point from an exact model is used instead. The final full
    assignment is re-verified.
    """
    vs = hard.vs
    zeros = {v.name: Fraction(0) for v in vs.variables if v.name not in modified}
    pinned: dict[str, Fraction] = dict(zeros)

    def pinned_formula() -> Formula:
        pins = [
            FAtom(LinearAtom.make({v: Fraction(1)}, Rel.EQ, c)) for v, c in sorted(pinned.items())
        ]
        return f_and([hard.formula] + pins)

    for name in modified:
        chosen = None
        for magnitude in range(1, scan_limit + 1):
            for val in (Fraction(magnitude), Fraction(-magnitude)):
                trial = f_and(
                    [pinned_formula(), FAtom(LinearAtom.make({name: Fraction(1)}, Rel.EQ, val))]
                )
                if is_satisfiable(trial, hard.qe_budget).sat:
                    chosen = val
                    break
            if chosen is not None:
                break
        if chosen is None:
            res = is_satisfiable(pinned_formula(), hard.qe_budget, want_model=True)
            if not res.sat:
                return None
            chosen = res.model.get(name, Fraction(0))
        pinned[name] = chosen
    values = {name: pinned[name] for name in modified}
    full = dict(zeros)
    full.update(values)
    if not hard.check(full):
        return None
    return values


def max_sat(
    problem: MaxSmtProblem,
    state: SearchState | None = None,
    min_modifications: int = 0,
) -> Solution | None:
    """Assignment maximizing the number of unmodified variation variables.

    Searches modification counts in ascending order (subsets in
    lexicographic order), so the first satisfiable subset is optimal and
    deterministic. Kept-sets known unsatisfiable prune their supersets.
    Returns None when the hard constraint admits no repair.
    """
    state = state or SearchState()
    hard = problem.hard
    vs = hard.vs
    names = [v.name for v in vs.variables if v.name not in problem.blocked]
    all_names = [v.name for v in vs.variables]
    for m in range(min_modifications, len(names) + 1):
        for combo in itertools.combinations(names, m):
            kept = frozenset(all_names) - set(combo)
            if state.known_unsat(kept):
                continue
            if vs.kind == "bound":
                if hard.check_with_zeros(kept):
                    values = sample_repair_values(hard, combo)
                    if values is None:
                        state.record_unsat(kept)
                        continue
                    assignment = {n: Fraction(0) for n in all_names}
                    assignment.update(values)
                    return Solution(
                        tuple(sorted(assignment.items())), combo, kept
                    )
                state.record_unsat(kept)
            else:
                found = repairing_assignments(hard, combo, limit=1)
                if found:
                    return Solution(tuple(sorted(found[0].items())), combo, kept)
                state.record_unsat(kept)
    return None
