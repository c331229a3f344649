from __future__ import annotations

from abc import ABC, abstractmethod

from pointprocess import KernelGrid
from pointprocess.errors import ConfigError

from .bellman_krein import BKSolution, integrate_bellman_krein
from .diagnostics import (
    gamma_cutoff_ratio,
    gamma_sequence,
    kernel_diagnostics,
    loewner_gaps,
    solver_report,
    wh_residual,
)
from .direct import solve_direct
from .problem import DiscretisedWH
from .whittle import WhittleSolution, solve_whittle, whittle_recursion


class Solver(ABC):
    key: str
    name: str

    @abstractmethod
    def solve(self, problem: DiscretisedWH) -> KernelGrid:
        """Prediction kernel on the problem's grid."""
        raise NotImplementedError

    def report(self, problem: DiscretisedWH, kernel: KernelGrid) -> dict:
        return solver_report(problem, kernel)


_SOLVERS: dict[str, Solver] = {}


def register(cls):
    instance = cls()
    if not getattr(instance, "key", None):
        raise ValueError(f"Solver {cls.__name__} missing key")
    _SOLVERS[instance.key] = instance
    return cls


def get_solver(key: str) -> Solver:
    try:
        return _SOLVERS[key]
    except KeyError:
        raise ConfigError(f"Unknown solver: {key}", known=sorted(_SOLVERS)) from None


def all_solvers() -> list[Solver]:
    return list(_SOLVERS.values())


@register
class DirectSolver(Solver):
    key = "direct"
    name = "Dense block-Toeplitz solve"

    def solve(self, problem: DiscretisedWH) -> KernelGrid:
        return solve_direct(problem)


@register
class WhittleSolver(Solver):
    key = "whittle"
    name = "Whittle recursions"

    def solve(self, problem: DiscretisedWH) -> KernelGrid:
        return solve_whittle(problem).kernel()

    def report(self, problem: DiscretisedWH, kernel: KernelGrid) -> dict:
        return solver_report(problem, kernel, whittle=solve_whittle(problem))


@register
class BellmanKreinSolver(Solver):
    key = "bellman_krein"
    name = "Bellman-Krein Euler march"

    def solve(self, problem: DiscretisedWH) -> KernelGrid:
        return integrate_bellman_krein(problem, keep_path=False).kernel()

    def report(self, problem: DiscretisedWH, kernel: KernelGrid) -> dict:
        bk = integrate_bellman_krein(problem, keep_path=False)
        return solver_report(problem, kernel, bk=bk)


__all__ = [
    "BKSolution",
    "DiscretisedWH",
    "Solver",
    "WhittleSolution",
    "all_solvers",
    "gamma_cutoff_ratio",
    "gamma_sequence",
    "get_solver",
    "integrate_bellman_krein",
    "kernel_diagnostics",
    "loewner_gaps",
    "solve_direct",
    "solve_whittle",
    "solver_report",
    "wh_residual",
    "whittle_recursion",
]
