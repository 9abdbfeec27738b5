"""Result records shared by the entropy algorithms."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class Method(enum.Enum):
    SHORTCUT = "shortcut"
    PREIMAGE_ORACLE = "oracle"
    KNEADING_BISECTION = "kneading"


class Status(enum.Enum):
    CONVERGED = "converged"
    MAX_DEPTH = "max_depth"
    FAILED = "failed"


@dataclass(frozen=True)
class EntropyEstimate:
    """Entropy in natural-log units with an error bound.

    ``depth`` is the last completed preimage level (oracle) or the number of
    completed bisection steps (kneading). Failed estimates carry ``nan``.
    ``discrepancy`` is filled only in cross-check mode.
    """

    value: float
    error_bound: float
    method: Method
    depth: int
    status: Status
    discrepancy: float | None = None

    @classmethod
    def failed(cls, method: Method, depth: int = 0) -> "EntropyEstimate":
        return cls(math.nan, math.inf, method, depth, Status.FAILED)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED
