"""Hierarchical GUI agent planner with a mixture of grounding experts."""

from __future__ import annotations

import json
from os import PathLike
from typing import Any, Callable, Optional, Sequence

from . import _mogplan
from ._mogplan import Error

__all__ = [
    "Error",
    "canonical_call",
    "format_a1",
    "load_suite",
    "parse_a1",
    "parse_action",
    "parse_plan",
    "report_from_logs",
    "route",
    "routing_table",
    "run_suite",
    "run_task",
    "validate_suite",
]

__version__ = _mogplan.version()

Completion = Callable[[str, str, str], str]


def parse_action(text: str) -> dict[str, Any]:
    """Parses the last action call in a model reply into ``{"name", "args", "call"}``."""
    action = json.loads(_mogplan.parse_action(text))
    if action["name"] == "set_cell_values":
        action["args"]["cell_values"] = dict(action["args"]["cell_values"])
    return action


def canonical_call(text: str) -> str:
    """Rewrites the last action call in ``text`` with every argument in keyword form."""
    return _mogplan.canonical_call(text)


def parse_plan(text: str) -> list[str]:
    """Extracts the first numbered or bulleted list from a manager reply."""
    return _mogplan.parse_plan(text)


def routing_table() -> dict[str, Any]:
    return json.loads(_mogplan.routing_table())


def route(call: str) -> str:
    """Name of the expert ("visual", "textual", "structural" or "none") for an action call."""
    return _mogplan.route(call)


def parse_a1(text: str) -> tuple[Optional[str], int, int]:
    return _mogplan.parse_a1(text)


def format_a1(column: int, row: int, sheet: Optional[str] = None) -> str:
    return _mogplan.format_a1(sheet, column, row)


def load_suite(path: str | PathLike[str]) -> dict[str, Any]:
    return json.loads(_mogplan.load_suite(str(path)))


def validate_suite(path: str | PathLike[str]) -> list[str]:
    return list(_mogplan.validate_suite(str(path)))


def run_suite(
    suite: str | PathLike[str],
    *,
    mode: str = "proactive",
    budgets: Sequence[int] | int = (15,),
    mog: bool = True,
    backend: str = "scripted",
    manager_backend: Optional[str] = None,
    worker_backend: Optional[str] = None,
    grounder: str = "mock",
    parallelism: int = 1,
    seed: int = 0,
    shuffle: bool = False,
    distractors: bool = False,
    out_dir: Optional[str | PathLike[str]] = None,
    tag_overrides: Optional[str | PathLike[str]] = None,
) -> dict[str, Any]:
    """Runs every task of a suite; returns ``{"report", "report_text", "episodes"}``."""
    if isinstance(budgets, int):
        budgets = [budgets]
    config = {
        "suite": str(suite),
        "mode": mode,
        "budgets": list(budgets),
        "mog": mog,
        "manager_backend": manager_backend or backend,
        "worker_backend": worker_backend or backend,
        "grounder": grounder,
        "parallelism": parallelism,
        "seed": seed,
        "shuffle": shuffle,
        "distractors": distractors,
        "out_dir": None if out_dir is None else str(out_dir),
        "tag_overrides": None if tag_overrides is None else str(tag_overrides),
    }
    return json.loads(_mogplan.run_suite(json.dumps(config)))


def run_task(
    task_path: str | PathLike[str],
    complete: Completion,
    *,
    mode: str = "proactive",
    budget: int = 15,
    mog: bool = True,
) -> dict[str, Any]:
    """Runs one task file, asking ``complete(role, prompt, context_id)`` for every model reply."""
    return json.loads(_mogplan.run_task(str(task_path), complete, mode, budget, mog))


def report_from_logs(log_dir: str | PathLike[str]) -> dict[str, Any]:
    return json.loads(_mogplan.report_from_logs(str(log_dir)))
