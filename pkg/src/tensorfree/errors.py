"""Shared exceptions and budget caps.

Caps can be raised or lowered through environment variables so batch runs
can bound their work:

    TENSORFREE_CAP_N         canonicalization degree cap (default 8)
    TENSORFREE_CAP_ENUM      max raw tuples visited by class enumeration
    TENSORFREE_CAP_CONTRACT  max index-grid entries in a tensor contraction
"""
from __future__ import annotations

import os


class BudgetExceededError(RuntimeError):
    """A configured size cap would be exceeded (CLI exit code 3)."""


class MissingEntryError(KeyError):
    """A transform needed a table entry that is not present."""

    def __str__(self) -> str:  # KeyError quotes its payload; keep it readable
        return self.args[0] if self.args else ""


class NotMelonicError(ValueError):
    """An operation defined only for melonic input got a non-melonic one."""


def _env_int(name: str, default: int) -> int:
    raw = os.environ.get(name)
    return int(raw) if raw else default


def cap_n() -> int:
    return _env_int("TENSORFREE_CAP_N", 8)


def cap_enum() -> int:
    return _env_int("TENSORFREE_CAP_ENUM", 2_000_000)


def cap_contract() -> int:
    return _env_int("TENSORFREE_CAP_CONTRACT", 10_000_000)


def check(kind: str, size: int, cap: int) -> None:
    if size > cap:
        raise BudgetExceededError(f"{kind} size {size} exceeds cap {cap}")
