from __future__ import annotations

from typing import Any

from pointprocess.errors import ConfigError, InvalidParameter

from .base import BaseKernel


KERNEL_TYPES: dict[str, type[BaseKernel]] = {}


def register_kernel_type(kernel_type: type[BaseKernel]) -> type[BaseKernel]:
    KERNEL_TYPES[kernel_type.key] = kernel_type
    return kernel_type


def get_kernel_type(key: str) -> type[BaseKernel]:
    try:
        return KERNEL_TYPES[key]
    except KeyError:
        raise ConfigError(
            f"Unknown kernel type: {key}", known=sorted(KERNEL_TYPES)
        ) from None


def build_kernel(spec: dict[str, Any] | BaseKernel) -> BaseKernel:
    """Build a kernel from its JSON spec, e.g. {"type": "exponential", ...}."""
    if isinstance(spec, BaseKernel):
        return spec
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("kernel spec must be an object with a 'type' field")
    params = {k: v for k, v in spec.items() if k != "type"}
    kernel_type = get_kernel_type(spec["type"])
    try:
        return kernel_type.from_params(params)
    except (TypeError, KeyError) as e:
        raise ConfigError(f"Bad parameters for {spec['type']} kernel: {e}") from e
    except InvalidParameter as e:
        raise ConfigError(f"{spec['type']} kernel: {e.message}", **e.details) from e
