"""Shared generators for randomized oracles (deterministic seeds only)."""

import json
import random

from tarepair.modelio import parse_model


def random_single_ta(rng: random.Random, max_clocks=3, max_const=3, max_locs=4):
    """Random one-automaton network with integral constants.

    Internal transitions only; language oracles run with visible internal
    labels so every transition contributes to the untimed language.
    """
    n_clocks = rng.randint(1, max_clocks)
    n_locs = rng.randint(2, max_locs)
    clocks = [f"c{i}" for i in range(n_clocks)]
    locations = []
    for li in range(n_locs):
        inv = []
        if rng.random() < 0.4:
            inv.append(f"{rng.choice(clocks)} <= {rng.randint(1, max_const)}")
        locations.append({"name": f"l{li}", "invariant": inv})
    transitions = []
    for _ in range(rng.randint(1, 2 * n_locs)):
        src, tgt = rng.randrange(n_locs), rng.randrange(n_locs)
        guard = []
        if rng.random() < 0.6:
            op = rng.choice(["<=", ">=", "<", ">", "="])
            guard.append(f"{rng.choice(clocks)} {op} {rng.randint(0, max_const)}")
        transitions.append(
            {
                "source": f"l{src}",
                "target": f"l{tgt}",
                "guard": guard,
                "resets": [c for c in clocks if rng.random() < 0.25],
            }
        )
    doc = {
        "automata": [
            {
                "name": "p",
                "initial": "l0",
                "clocks": clocks,
                "locations": locations,
                "transitions": transitions,
            }
        ],
        "channels": [],
        "property": f"{clocks[0]} <= {rng.randint(0, max_const)}",
    }
    return parse_model(json.dumps(doc))
