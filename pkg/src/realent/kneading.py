"""Kneading sequences and entropy by bisection against tent maps.

Symbols are written in the hill convention: the map is reflected, if needed,
so the turning point is a maximum. Each designated unimodal interval in this
library has its turning point at a minimum with critical value -1, so a raw
itinerary ``L``/``R`` is swapped. Comparison uses the parity-signed
lexicographic order with ``L < C < R``; the order reverses after every ``R``.

Bisection runs in log-slope space ``h = log s`` on ``[0, log 2]``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .exceptions import UnsupportedModalityError
from .qmap import LOG2, ParameterPoint, f_eval
from .regions import unimodal_domain
from .results import EntropyEstimate, Method, Status

C_TOL = 1e-13
_UNDECIDED = 2
_SYMBOLS = {-1: "L", 0: "C", 1: "R"}


@dataclass(frozen=True)
class KneadingSequence:
    """Itinerary of the critical value; a ``C`` ends the informative prefix."""

    symbols: str

    @property
    def length(self) -> int:
        return len(self.symbols)


def map_itineraries(mu, t, turning, start, length: int) -> np.ndarray:
    """Hill-convention itineraries (-1, 0, +1) of ``start`` for a batch of valley maps.

    Entries after the first ``C`` are zero.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    c = np.broadcast_to(np.asarray(turning, dtype=float), mu.shape)
    x = np.broadcast_to(np.asarray(start, dtype=float), mu.shape).copy()
    out = np.zeros((mu.size, length), dtype=np.int8)
    alive = np.ones(mu.size, dtype=bool)
    with np.errstate(invalid="ignore"):
        for k in range(length):
            d = x - c
            hit = np.abs(d) <= C_TOL
            sym = np.where(hit, 0, np.where(d > 0, -1, 1))
            out[:, k] = np.where(alive, sym, 0)
            alive &= ~hit
            x = f_eval(mu, t, x)
    return out


def tent_itineraries(s: np.ndarray, length: int) -> np.ndarray:
    """Itineraries of the critical value s/2 of T_s(x) = s min(x, 1-x); exact C test."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    x = s / 2.0
    out = np.zeros((s.size, length), dtype=np.int8)
    alive = np.ones(s.size, dtype=bool)
    for k in range(length):
        hit = x == 0.5
        sym = np.where(hit, 0, np.where(x > 0.5, 1, -1))
        out[:, k] = np.where(alive, sym, 0)
        alive &= ~hit
        x = s * np.minimum(x, 1.0 - x)
    return out


def compare_itineraries(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise order of ``a`` against ``b``: -1, 0, +1, or 2 when undecided."""
    a = np.asarray(a, dtype=np.int8)
    b = np.asarray(b, dtype=np.int8)
    stop = (a != b) | ((a == 0) & (b == 0))
    has = stop.any(axis=1)
    first = np.argmax(stop, axis=1)
    rows = np.arange(a.shape[0])
    # parity of R symbols strictly before the first stop
    r_before = np.cumsum(a == 1, axis=1) - (a == 1)
    flips = r_before[rows, first] % 2
    sign = np.sign(a[rows, first].astype(int) - b[rows, first].astype(int))
    res = np.where(flips == 1, -sign, sign)
    return np.where(has, res, _UNDECIDED)


def kneading_bisect(
    itins: np.ndarray,
    bisect_steps: int,
    extend: Callable[[np.ndarray, int], np.ndarray] | None = None,
    max_len: int | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bracket ``[lo, hi]`` of log-slopes whose tent kneading matches each row of ``itins``.

    Rows whose comparison is undecided over the available symbols pause. If
    ``extend(rows, length)`` is given they resume as a group with itineraries
    four times longer, up to ``max_len``; rows still undecided stop early.
    Returns ``(lo, hi, steps_done)``.
    """
    n, length = itins.shape
    lo = np.zeros(n)
    hi = np.full(n, LOG2)
    steps = np.zeros(n, dtype=int)
    rows = np.arange(n)
    cur = itins
    while True:
        active = np.ones(rows.size, dtype=bool)
        stuck = np.zeros(rows.size, dtype=bool)
        active &= steps[rows] < bisect_steps
        while active.any():
            k = np.nonzero(active)[0]
            idx = rows[k]
            mid = 0.5 * (lo[idx] + hi[idx])
            r = compare_itineraries(tent_itineraries(np.exp(mid), cur.shape[1]), cur[k])
            und = r == _UNDECIDED
            up = (r <= 0) & ~und
            down = r == 1
            lo[idx[up]] = mid[up]
            hi[idx[down]] = mid[down]
            steps[idx[~und]] += 1
            stuck[k[und]] = True
            active[k[und]] = False
            active &= steps[rows] < bisect_steps
        if extend is None or max_len is None or length >= max_len or not stuck.any():
            break
        length = min(4 * length, max_len)
        rows = rows[stuck]
        cur = extend(rows, length)
    return lo, hi, steps


def kneading_sequence(p: ParameterPoint, start: float | None = None, length: int = 64) -> KneadingSequence:
    """Itinerary of the critical value relative to the turning point of the designated interval."""
    dom = unimodal_domain(p)
    if dom is None:
        raise UnsupportedModalityError(f"{p} has no designated unimodal interval")
    x0 = -1.0 if start is None else float(start)
    row = map_itineraries(p.mu, p.t, dom.turning_point, x0, length)[0]
    syms = []
    for v in row:
        syms.append(_SYMBOLS[int(v)])
        if v == 0:
            break
    return KneadingSequence("".join(syms))


def kneading_entropy_batch(
    mu: np.ndarray,
    t: np.ndarray,
    turning: np.ndarray,
    seq_len: int = 64,
    bisect_steps: int = 40,
    max_seq_len: int = 4096,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised kneading entropy: ``(value, error_bound, steps)`` for valley maps with critical value -1.

    Comparisons start with ``seq_len`` symbols and are extended up to
    ``max_seq_len`` only for rows that stay undecided.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    turning = np.broadcast_to(np.asarray(turning, dtype=float), mu.shape)
    itins = map_itineraries(mu, t, turning, -1.0, seq_len)

    def extend(rows: np.ndarray, length: int) -> np.ndarray:
        return map_itineraries(mu[rows], t[rows], turning[rows], -1.0, length)

    lo, hi, steps = kneading_bisect(itins, bisect_steps, extend, max(max_seq_len, seq_len))
    return 0.5 * (lo + hi), hi - lo, steps


def kneading_entropy_unimodal(
    p: ParameterPoint,
    seq_len: int = 64,
    bisect_steps: int = 40,
    tol: float = 2e-3,
    max_seq_len: int = 4096,
) -> EntropyEstimate:
    dom = unimodal_domain(p)
    if dom is None:
        raise UnsupportedModalityError(f"{p} has no designated unimodal interval")
    v, e, s = kneading_entropy_batch(
        np.array([p.mu]), np.array([p.t]), np.array([dom.turning_point]), seq_len, bisect_steps, max_seq_len
    )
    err = float(e[0])
    status = Status.CONVERGED if err <= tol else Status.MAX_DEPTH
    return EntropyEstimate(float(v[0]), err, Method.KNEADING_BISECTION, int(s[0]), status)
