"""Model checking and minimal syntactic repair of networks of timed automata."""

from importlib import resources
from pathlib import Path

__version__ = "0.1.0"

BUNDLED_MODELS = ("client_db", "oneclock", "urgent_hop", "pair_sync", "safe_idle")


def bundled_model_path(name: str = "client_db") -> Path:
    """Filesystem path of a bundled example model."""
    if name not in BUNDLED_MODELS:
        raise KeyError(f"no bundled model named {name!r}")
    return Path(resources.files("tarepair").joinpath(f"data/{name}.json"))


def load_bundled_model(name: str = "client_db"):
    """Parse a bundled example model into (network, property)."""
    from .modelio import load_model

    return load_model(bundled_model_path(name))
