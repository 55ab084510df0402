"""Domain types for networks of timed automata and timed safety properties.

Clocks, locations, automata and channels are referred to by dense integer
ids scoped to their container; display names live in the owning container.
All types are immutable after construction, so networks can be shared
freely between concurrent analyses.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterator


class Op(enum.IntEnum):
    """Comparison operators of atomic clock constraints, in canonical order."""

    LT = 0
    LE = 1
    EQ = 2
    GE = 3
    GT = 4


OP_TEXT = {Op.LT: "<", Op.LE: "<=", Op.EQ: "=", Op.GE: ">=", Op.GT: ">"}
TEXT_OP = {"<": Op.LT, "<=": Op.LE, "=": Op.EQ, "==": Op.EQ, ">=": Op.GE, ">": Op.GT}


def op_holds(op: Op, lhs: Fraction, rhs: Fraction) -> bool:
    if op == Op.LT:
        return lhs < rhs
    if op == Op.LE:
        return lhs <= rhs
    if op == Op.EQ:
        return lhs == rhs
    if op == Op.GE:
        return lhs >= rhs
    return lhs > rhs


@dataclass(frozen=True)
class AtomicClockConstraint:
    """One atom ``clock op bound``; guards and invariants are conjunctions of these."""

    clock: int
    op: Op
    bound: Fraction

    def __post_init__(self):
        object.__setattr__(self, "bound", Fraction(self.bound))
        if self.bound < 0:
            raise ValueError("clock bounds must be nonnegative")

    def text(self, clock_names: list[str]) -> str:
        bound = self.bound
        btxt = str(bound.numerator) if bound.denominator == 1 else f"{bound.numerator}/{bound.denominator}"
        return f"{clock_names[self.clock]} {OP_TEXT[self.op]} {btxt}"


class SyncKind(enum.Enum):
    SEND = "!"
    RECEIVE = "?"
    INTERNAL = ""


@dataclass(frozen=True)
class Transition:
    source: int
    target: int
    guard: tuple[AtomicClockConstraint, ...]
    channel: int | None  # None for internal transitions
    sync: SyncKind
    resets: frozenset[int]


@dataclass(frozen=True)
class TimedAutomaton:
    name: str
    location_names: tuple[str, ...]
    initial: int
    invariants: tuple[tuple[AtomicClockConstraint, ...], ...]  # per location
    urgent: frozenset[int]
    transitions: tuple[Transition, ...]
    clocks: frozenset[int]  # ids into the network clock table

    @property
    def n_locations(self) -> int:
        return len(self.location_names)


@dataclass(frozen=True)
class TimedAutomatonNetwork:
    """Parallel composition of timed automata over a shared clock namespace.

    Channel synchronization is a binary handshake: one ``c!`` transition
    pairs with one ``c?`` transition of another automaton and both move in
    the same instant.
    """

    automata: tuple[TimedAutomaton, ...]
    clock_names: tuple[str, ...]
    channel_names: tuple[str, ...]

    def automaton_index(self, name: str) -> int:
        for i, a in enumerate(self.automata):
            if a.name == name:
                return i
        raise KeyError(name)

    def clock_index(self, name: str) -> int:
        return self.clock_names.index(name)

    @property
    def n_clocks(self) -> int:
        return len(self.clock_names)


class PropKind(enum.Enum):
    ATOM = "atom"
    LOC = "loc"
    AND = "and"
    OR = "or"
    NOT = "not"
    TRUE = "true"
    FALSE = "false"


@dataclass(frozen=True)
class PropertyExpr:
    """Boolean combination of clock atoms and location predicates ``@A.l``."""

    kind: PropKind
    atom: AtomicClockConstraint | None = None
    automaton: int | None = None
    location: int | None = None
    children: tuple["PropertyExpr", ...] = ()

    @staticmethod
    def of_atom(atom: AtomicClockConstraint) -> "PropertyExpr":
        return PropertyExpr(PropKind.ATOM, atom=atom)

    @staticmethod
    def of_location(automaton: int, location: int) -> "PropertyExpr":
        return PropertyExpr(PropKind.LOC, automaton=automaton, location=location)

    @staticmethod
    def conj(*children: "PropertyExpr") -> "PropertyExpr":
        return PropertyExpr(PropKind.AND, children=tuple(children))

    @staticmethod
    def disj(*children: "PropertyExpr") -> "PropertyExpr":
        return PropertyExpr(PropKind.OR, children=tuple(children))

    def negate(self) -> "PropertyExpr":
        return PropertyExpr(PropKind.NOT, children=(self,))

    def iter_atoms(self) -> Iterator[AtomicClockConstraint]:
        if self.kind == PropKind.ATOM:
            yield self.atom
        for c in self.children:
            yield from c.iter_atoms()


# A safety property is checked as an invariant: the model satisfies the
# property iff every reachable state does.
SafetyProperty = PropertyExpr


@dataclass(frozen=True)
class ConstraintRef:
    """Position of one indexed constraint atom in the model.

    Constraints are identified by their index in document traversal order
    (per automaton: location invariants first, then transition guards),
    which is stable across parse/serialize cycles.
    """

    index: int
    automaton: int
    kind: str  # "invariant" | "guard"
    location: int | None
    transition: int | None
    atom_pos: int
    atom: AtomicClockConstraint


def indexed_constraints(network: TimedAutomatonNetwork) -> list[ConstraintRef]:
    """All constraint atoms of the network in global index order."""
    out: list[ConstraintRef] = []
    for ai, auto in enumerate(network.automata):
        for li, inv in enumerate(auto.invariants):
            for pi, atom in enumerate(inv):
                out.append(ConstraintRef(len(out), ai, "invariant", li, None, pi, atom))
        for ti, trans in enumerate(auto.transitions):
            for pi, atom in enumerate(trans.guard):
                out.append(ConstraintRef(len(out), ai, "guard", None, ti, pi, atom))
    return out


def max_constant(network: TimedAutomatonNetwork, prop: SafetyProperty | None = None) -> int:
    """Maximal constant over the model (and optionally the property).

    Used as the zone extrapolation constant; a model without constraints
    still gets k = 1 so extrapolation is well defined.
    """
    best = Fraction(0)
    for ref in indexed_constraints(network):
        best = max(best, ref.atom.bound)
    if prop is not None:
        for atom in prop.iter_atoms():
            best = max(best, atom.bound)
    import math

    return max(1, math.ceil(best))


def validate(network: TimedAutomatonNetwork, prop: SafetyProperty | None = None) -> list[str]:
    """Structural diagnostics; empty list iff the network and property are well formed.

    Pure and idempotent; diagnostics are returned, never raised. A send
    label with no matching receiver is a warning-level diagnostic prefixed
    with ``warning:``.
    """
    diags: list[str] = []
    n_clocks = network.n_clocks
    n_channels = len(network.channel_names)
    if len(set(network.clock_names)) != n_clocks:
        diags.append("duplicate clock names")
    if len(set(network.channel_names)) != n_channels:
        diags.append("duplicate channel names")
    names = [a.name for a in network.automata]
    if len(set(names)) != len(names):
        diags.append("duplicate automaton names")

    seen_syncs: set[tuple[int, SyncKind]] = set()
    for ai, auto in enumerate(network.automata):
        path = f"automata[{ai}]({auto.name})"
        nloc = auto.n_locations
        if len(set(auto.location_names)) != nloc:
            diags.append(f"{path}: duplicate location names")
        if not (0 <= auto.initial < nloc):
            diags.append(f"{path}: initial location id {auto.initial} out of range")
        if len(auto.invariants) != nloc:
            diags.append(f"{path}: invariant table size mismatch")
        for li in auto.urgent:
            if not (0 <= li < nloc):
                diags.append(f"{path}: urgent location id {li} out of range")
        for c in auto.clocks:
            if not (0 <= c < n_clocks):
                diags.append(f"{path}: clock id {c} out of range")
        for li, inv in enumerate(auto.invariants):
            for atom in inv:
                if atom.clock not in auto.clocks:
                    diags.append(f"{path}.locations[{li}]: invariant uses clock not declared by automaton")
        for ti, t in enumerate(auto.transitions):
            tpath = f"{path}.transitions[{ti}]"
            if not (0 <= t.source < nloc):
                diags.append(f"{tpath}: unknown source location id {t.source}")
            if not (0 <= t.target < nloc):
                diags.append(f"{tpath}: unknown target location id {t.target}")
            if t.channel is None and t.sync != SyncKind.INTERNAL:
                diags.append(f"{tpath}: sync kind without channel")
            if t.channel is not None:
                if t.sync == SyncKind.INTERNAL:
                    diags.append(f"{tpath}: channel without sync direction")
                elif not (0 <= t.channel < n_channels):
                    diags.append(f"{tpath}: unknown channel id {t.channel}")
                else:
                    seen_syncs.add((t.channel, t.sync))
            for atom in t.guard:
                if atom.clock not in auto.clocks:
                    diags.append(f"{tpath}: guard uses clock not declared by automaton")
            for c in t.resets:
                if c not in auto.clocks:
                    diags.append(f"{tpath}: reset of clock not declared by automaton")
    for ch, kind in sorted(seen_syncs, key=lambda s: (s[0], s[1].value)):
        other = SyncKind.RECEIVE if kind == SyncKind.SEND else SyncKind.SEND
        if (ch, other) not in seen_syncs:
            diags.append(
                f"warning: channel {network.channel_names[ch]} has {kind.name.lower()} "
                f"transitions but no matching {other.name.lower()}"
            )

    if prop is not None:
        diags.extend(_validate_property(network, prop))
    return diags


def _validate_property(network: TimedAutomatonNetwork, prop: PropertyExpr) -> list[str]:
    diags: list[str] = []

    def walk(e: PropertyExpr) -> None:
        if e.kind == PropKind.ATOM:
            if not (0 <= e.atom.clock < network.n_clocks):
                diags.append(f"property: unresolved clock id {e.atom.clock}")
        elif e.kind == PropKind.LOC:
            if not (0 <= (e.automaton or 0) < len(network.automata)):
                diags.append("property: unresolved location predicate (unknown automaton)")
            elif not (0 <= (e.location or 0) < network.automata[e.automaton].n_locations):
                diags.append("property: unresolved location predicate")
        for c in e.children:
            walk(c)

    walk(prop)
    return diags


def negate_atom(atom: AtomicClockConstraint) -> PropertyExpr:
    """Complement of one atom as a property expression (an EQ splits in two)."""
    comp = {Op.LT: Op.GE, Op.LE: Op.GT, Op.GE: Op.LT, Op.GT: Op.LE}
    if atom.op == Op.EQ:
        return PropertyExpr.disj(
            PropertyExpr.of_atom(AtomicClockConstraint(atom.clock, Op.LT, atom.bound)),
            PropertyExpr.of_atom(AtomicClockConstraint(atom.clock, Op.GT, atom.bound)),
        )
    return PropertyExpr.of_atom(AtomicClockConstraint(atom.clock, comp[atom.op], atom.bound))


def prop_nnf(e: PropertyExpr, negated: bool = False) -> PropertyExpr:
    """Negation normal form; NOT survives only directly on location predicates."""
    if e.kind == PropKind.TRUE:
        return PropertyExpr(PropKind.FALSE) if negated else e
    if e.kind == PropKind.FALSE:
        return PropertyExpr(PropKind.TRUE) if negated else e
    if e.kind == PropKind.ATOM:
        return negate_atom(e.atom) if negated else e
    if e.kind == PropKind.LOC:
        return e.negate() if negated else e
    if e.kind == PropKind.NOT:
        return prop_nnf(e.children[0], not negated)
    kids = tuple(prop_nnf(c, negated) for c in e.children)
    kind = e.kind
    if negated:
        kind = PropKind.OR if kind == PropKind.AND else PropKind.AND
    return PropertyExpr(kind, children=kids)


@dataclass(frozen=True)
class DnfLiteral:
    """One literal of a DNF disjunct: a clock atom or a (possibly negated) location predicate."""

    atom: AtomicClockConstraint | None = None
    automaton: int | None = None
    location: int | None = None
    positive: bool = True


def prop_to_dnf(e: PropertyExpr) -> list[list[DnfLiteral]]:
    """Disjunctive normal form of an NNF property; [] means false, [[]] true."""
    e = prop_nnf(e)

    def go(x: PropertyExpr) -> list[list[DnfLiteral]]:
        if x.kind == PropKind.TRUE:
            return [[]]
        if x.kind == PropKind.FALSE:
            return []
        if x.kind == PropKind.ATOM:
            return [[DnfLiteral(atom=x.atom)]]
        if x.kind == PropKind.LOC:
            return [[DnfLiteral(automaton=x.automaton, location=x.location)]]
        if x.kind == PropKind.NOT:
            inner = x.children[0]
            return [[DnfLiteral(automaton=inner.automaton, location=inner.location, positive=False)]]
        if x.kind == PropKind.OR:
            out: list[list[DnfLiteral]] = []
            for c in x.children:
                out.extend(go(c))
            return out
        disjuncts: list[list[DnfLiteral]] = [[]]
        for c in x.children:
            child = go(c)
            disjuncts = [d + cd for d in disjuncts for cd in child]
        return disjuncts

    return go(e)


def desugar_urgency(network: TimedAutomatonNetwork) -> TimedAutomatonNetwork:
    """Remove urgent flags by the standard encoding.

    Every automaton with urgent locations gets a fresh clock p that is
    reset on each transition entering an urgent location, and each urgent
    location gets the invariant p = 0. An urgent initial location needs no
    extra reset: the fresh clock starts at 0.
    """
    if all(not a.urgent for a in network.automata):
        return network
    clock_names = list(network.clock_names)
    new_automata = []
    for auto in network.automata:
        if not auto.urgent:
            new_automata.append(auto)
            continue
        p = len(clock_names)
        base = f"_p_{auto.name}"
        name = base
        k = 0
        while name in clock_names:
            k += 1
            name = f"{base}{k}"
        clock_names.append(name)
        zero = AtomicClockConstraint(p, Op.EQ, Fraction(0))
        invariants = tuple(
            inv + (zero,) if li in auto.urgent else inv for li, inv in enumerate(auto.invariants)
        )
        transitions = tuple(
            replace(t, resets=t.resets | {p}) if t.target in auto.urgent else t
            for t in auto.transitions
        )
        new_automata.append(
            replace(
                auto,
                invariants=invariants,
                transitions=transitions,
                urgent=frozenset(),
                clocks=auto.clocks | {p},
            )
        )
    return TimedAutomatonNetwork(tuple(new_automata), tuple(clock_names), network.channel_names)
