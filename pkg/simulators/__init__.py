from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

from pointprocess import EventStream
from pointprocess.errors import ConfigError, PointProcessError


class Simulator(ABC):
    key: str
    name: str

    @abstractmethod
    def parse_params(self, spec: dict[str, Any]) -> Any:
        """Build the model parameters from a JSON model spec.

        This is the ``model`` object of an experiment config, minus its
        ``type`` field. Raise a PointProcessError on bad parameters.
        """
        raise NotImplementedError

    @abstractmethod
    def simulate(self, params: Any, horizon: float, seed: int) -> EventStream:
        """Draw one stream on [0, horizon)."""
        raise NotImplementedError

    def validate(self, spec: dict[str, Any]) -> list[str]:
        """Return list of validation errors, empty if valid."""
        try:
            self.parse_params(spec)
        except PointProcessError as e:
            return [e.message]
        return []


_SIMULATORS: dict[str, Simulator] = {}


def register(cls):
    instance = cls()
    if not getattr(instance, "key", None):
        raise ValueError(f"Simulator {cls.__name__} missing key")
    _SIMULATORS[instance.key] = instance
    return cls


def get_simulator(key: str) -> Simulator:
    try:
        return _SIMULATORS[key]
    except KeyError:
        raise ConfigError(f"Unknown model type: {key}", known=sorted(_SIMULATORS)) from None


def all_simulators() -> list[Simulator]:
    return list(_SIMULATORS.values())


def split_model_spec(model: dict[str, Any]) -> tuple[Simulator, Any]:
    """Resolve ``{"type": ..., **params}`` into a simulator and its parameters."""
    if not isinstance(model, dict) or "type" not in model:
        raise ConfigError("model spec must be an object with a 'type' field")
    simulator = get_simulator(model["type"])
    params = simulator.parse_params({k: v for k, v in model.items() if k != "type"})
    return simulator, params


from simulators import hawkes, neyman_scott, poisson  # noqa: E402,F401
