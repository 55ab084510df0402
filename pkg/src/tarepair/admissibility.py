"""Untimed-language equivalence of networks (the admissibility test).

A repair is admissible iff the repaired network has the same untimed
language as the network it was computed for. The language is the
prefix-closed set of channel-action sequences observable in runs: every
state accepts, internal transitions are silent and removed by
epsilon-closure. Both automata are built with one shared extrapolation
constant so their abstractions are comparable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .checker import Exhausted, enabled_moves, initial_state, move_label, successor
from .model import TimedAutomatonNetwork, max_constant

SILENT = None  # edge label of internal moves


@dataclass(frozen=True)
class UntimedAutomaton:
    """Finite automaton over action labels; all states accepting."""

    n_states: int
    initial: int
    alphabet: tuple[str, ...]
    edges: tuple[tuple[tuple[str | None, int], ...], ...]  # per state: (label, target)

    def successors(self, state: int, label: str | None) -> list[int]:
        return [t for lab, t in self.edges[state] if lab == label]


DEFAULT_UNTIMED_BUDGET = 5_000


def build_untimed(
    network: TimedAutomatonNetwork,
    k: int | None = None,
    visible_internal: bool = False,
    state_budget: int = DEFAULT_UNTIMED_BUDGET,
) -> UntimedAutomaton:
    """Full zone graph with k-extrapolation, edges labeled by channel.

    ``visible_internal`` names internal moves "auto.tN" instead of silencing
    them; the language oracles use this to compare transition structure.
    """
    if k is None:
        k = max_constant(network)
    init = initial_state(network, k)
    ids = {init: 0}
    order = [init]
    edges: list[list[tuple[str | None, int]]] = [[]]
    queue = deque([init])
    while queue:
        state = queue.popleft()
        sid = ids[state]
        locvec, zone = state
        for move in enabled_moves(network, locvec):
            nxt = successor(network, locvec, zone, move, k)
            if nxt is None:
                continue
            if nxt not in ids:
                if len(ids) >= state_budget:
                    raise Exhausted(f"untimed automaton exceeded {state_budget} states")
                ids[nxt] = len(order)
                order.append(nxt)
                edges.append([])
                queue.append(nxt)
            label = move_label(network, move)
            if label is None and visible_internal:
                ai, ti = move[0]
                label = f"{network.automata[ai].name}.t{ti}"
            edges[sid].append((label, ids[nxt]))
    alphabet = sorted({lab for out in edges for lab, _ in out if lab is not None})
    return UntimedAutomaton(len(order), 0, tuple(alphabet), tuple(tuple(e) for e in edges))


def _closure(ua: UntimedAutomaton, states: frozenset[int]) -> frozenset[int]:
    seen = set(states)
    stack = list(states)
    while stack:
        s = stack.pop()
        for t in ua.successors(s, SILENT):
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return frozenset(seen)


def _post(ua: UntimedAutomaton, states: frozenset[int], label: str) -> frozenset[int]:
    out = set()
    for s in states:
        out.update(ua.successors(s, label))
    return _closure(ua, frozenset(out))


def accepts(ua: UntimedAutomaton, word) -> bool:
    """Is the label sequence a prefix of some run (subset simulation)?"""
    cur = _closure(ua, frozenset([ua.initial]))
    for label in word:
        cur = _post(ua, cur, label)
        if not cur:
            return False
    return True


@dataclass(frozen=True)
class Equivalence:
    equal: bool
    witness: tuple[str, ...] | None = None  # accepted by exactly one side


DEFAULT_PAIR_BUDGET = 200_000


def equivalent(
    a: UntimedAutomaton, b: UntimedAutomaton, pair_budget: int = DEFAULT_PAIR_BUDGET
) -> Equivalence:
    """Language equality via on-the-fly determinization and pairwise search.

    Both languages are prefix closed with every state accepting, so the
    languages differ exactly when some word is extendable in one automaton
    and dead in the other; breadth-first pairing returns a shortest such
    word as the witness.
    """
    alphabet = sorted(set(a.alphabet) | set(b.alphabet))
    start = (_closure(a, frozenset([a.initial])), _closure(b, frozenset([b.initial])))
    seen = {start}
    queue: deque = deque([(start, ())])
    visited = 0
    while queue:
        (pa, pb), word = queue.popleft()
        visited += 1
        if visited > pair_budget:
            raise Exhausted(f"equivalence check exceeded {pair_budget} state pairs")
        for label in alphabet:
            na, nb = _post(a, pa, label), _post(b, pb, label)
            if bool(na) != bool(nb):
                return Equivalence(False, word + (label,))
            if not na:
                continue
            pair = (na, nb)
            if pair not in seen:
                seen.add(pair)
                queue.append((pair, word + (label,)))
    return Equivalence(True)


def check_admissible(
    original: TimedAutomatonNetwork,
    repaired: TimedAutomatonNetwork,
    state_budget: int = DEFAULT_UNTIMED_BUDGET,
    original_cache: dict[int, UntimedAutomaton] | None = None,
) -> Equivalence:
    """Shared-constant admissibility check of a repaired network.

    ``original_cache`` memoizes the original's automaton per extrapolation
    constant across the candidates of one repair run.
    """
    k = max(max_constant(original), max_constant(repaired))
    if original_cache is not None and k in original_cache:
        ua = original_cache[k]
    else:
        ua = build_untimed(original, k, state_budget=state_budget)
        if original_cache is not None:
            original_cache[k] = ua
    ub = build_untimed(repaired, k, state_budget=state_budget)
    return equivalent(ua, ub)
