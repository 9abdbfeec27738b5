"""Entropy dispatcher over the parameter plane.

Every cell is routed to one of three evaluators:

* an exact shortcut (0 on monotone maps, log 2 above t = 2 and on the
  third-quadrant (+-+) part outside the parabola),
* kneading bisection on the designated unimodal interval,
* the preimage oracle on [-1, 1].

Third-quadrant (-+-) maps are replaced by a conjugate fiber sibling when one
falls in a unimodal or shortcut region. The batch entry point is vectorised
so sweeps pay the Python overhead once per row, not once per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ConfigurationError, DegenerateMapError, DomainError
from .kneading import kneading_entropy_batch
from .preimages import DEFAULT_MAX_POINTS, DEFAULT_N_MAX, default_panel, fpnf_oracle_batch, oracle_batch
from .qmap import LOG2, ModuliPoint, ParameterPoint, moduli_fiber, project
from .regions import REGION_CODES, Region, classify_codes
from .results import EntropyEstimate, Method, Status

METHODS = ("auto", "oracle", "kneading", "both")

# entropy of the covering family (1/mu)(x - 1/x) + b, constant on the whole family
COVERING_FAMILY_ENTROPY = LOG2

_M_SHORTCUT, _M_ORACLE, _M_KNEAD = 0, 1, 2
METHOD_OF_CODE = (Method.SHORTCUT, Method.PREIMAGE_ORACLE, Method.KNEADING_BISECTION)
_S_CONV, _S_MAX, _S_FAIL = 0, 1, 2
STATUS_OF_CODE = (Status.CONVERGED, Status.MAX_DEPTH, Status.FAILED)


@dataclass(frozen=True)
class EntropyConfig:
    method: str = "auto"
    tol: float = 2e-3
    n_max: int = DEFAULT_N_MAX
    max_points: int = DEFAULT_MAX_POINTS
    seq_len: int = 64
    bisect_steps: int = 40
    max_seq_len: int = 4096
    shortcuts: bool = True
    boundary_tol: float = 1e-9
    y_panel: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        if self.method not in METHODS:
            raise ConfigurationError(f"unknown method {self.method!r}")
        if self.n_max < 4:
            raise ConfigurationError("n_max must be at least 4")
        if self.tol <= 0:
            raise ConfigurationError("tol must be positive")
        if self.seq_len < 1 or self.bisect_steps < 1 or self.max_points < 1:
            raise ConfigurationError("budgets must be positive")
        if self.y_panel is not None:
            if not self.y_panel or any(not -1.0 < y < 1.0 or y == 0.0 for y in self.y_panel):
                raise ConfigurationError("probe values must lie in (-1, 1) and differ from 0")
            object.__setattr__(self, "y_panel", tuple(float(y) for y in self.y_panel))

    def with_(self, **kw) -> "EntropyConfig":
        return replace(self, **kw)


@dataclass
class EntropyBatch:
    """Column arrays of a batch of estimates (codes index METHOD_OF_CODE / STATUS_OF_CODE)."""

    value: np.ndarray
    error: np.ndarray
    method: np.ndarray
    depth: np.ndarray
    status: np.ndarray
    discrepancy: np.ndarray

    def estimate(self, i: int) -> EntropyEstimate:
        disc = float(self.discrepancy[i])
        return EntropyEstimate(
            float(self.value[i]),
            float(self.error[i]),
            METHOD_OF_CODE[self.method[i]],
            int(self.depth[i]),
            STATUS_OF_CODE[self.status[i]],
            None if math.isnan(disc) else disc,
        )


def _shortcut_values(mu: np.ndarray, t: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Trivial entropy per cell, nan where none applies."""
    out = np.full(mu.shape, np.nan)
    monotone = np.isin(codes, [REGION_CODES.index(Region.MONOTONE_INCREASING), REGION_CODES.index(Region.MONOTONE_DECREASING)])
    out[monotone] = 0.0
    pmp = codes == REGION_CODES.index(Region.BIMODAL_PMP)
    outside = mu >= 1.0 - t * t / 4.0
    out[(mu < 0) & (t < 0) & pmp & outside] = LOG2
    out[(mu > 0) & (t >= 2.0) & (mu + t > 2.0)] = LOG2
    return out


def _unimodal_mask(mu: np.ndarray, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cells with a designated unimodal interval and, among them, those on [-1, 0]."""
    u1 = (mu > 0) & (t >= 0) & (t < 2.0) & (mu + t >= 2.0)
    u2 = (mu < 0) & (t <= 0) & (mu - t >= -2.0) & (mu - t <= 2.0) & (mu + t <= -2.0)
    return u1 | u2, u1


def _sibling(mu: float, t: float, shortcuts: bool, tol: float) -> tuple[float, float] | None:
    """A fiber sibling with a unimodal interval or (if allowed) an exact shortcut."""
    s1, s2 = project(mu, t)
    sibs = [q for q in moduli_fiber(ModuliPoint(float(s1), float(s2))) if abs(q.mu - mu) > 1e-9 * (1 + abs(mu))]
    for q in sibs:
        m, tt = np.array([q.mu]), np.array([q.t])
        if _unimodal_mask(m, tt)[0][0]:
            return q.mu, q.t
        if shortcuts and not math.isnan(_shortcut_values(m, tt, classify_codes(m, tt, tol))[0]):
            return q.mu, q.t
    return None


def entropy_batch(mu, t, config: EntropyConfig = EntropyConfig()) -> EntropyBatch:
    """Entropy for arrays of parameters; invalid cells come back Failed."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float)).ravel().copy()
    t = np.atleast_1d(np.asarray(t, dtype=float)).ravel().copy()
    n = mu.size
    value = np.full(n, np.nan)
    error = np.full(n, np.inf)
    meth = np.full(n, _M_ORACLE, dtype=np.int8)
    depth = np.zeros(n, dtype=np.int64)
    status = np.full(n, _S_FAIL, dtype=np.int8)
    disc = np.full(n, np.nan)
    valid = np.isfinite(mu) & np.isfinite(t) & (mu != 0) & (mu * t >= 0)
    todo = valid.copy()

    # effective parameters: fiber siblings replace third-quadrant (-+-) cells
    emu, et = mu.copy(), t.copy()
    codes = np.zeros(n, dtype=np.int64)
    codes[valid] = classify_codes(mu[valid], t[valid], config.boundary_tol)
    mpm3 = valid & (mu < 0) & (codes == REGION_CODES.index(Region.BIMODAL_MPM))
    if config.method != "oracle":
        for i in np.nonzero(mpm3)[0]:
            sib = _sibling(mu[i], t[i], config.shortcuts, config.boundary_tol)
            if sib is not None:
                emu[i], et[i] = sib
        changed = (emu != mu) | (et != t)
        if changed.any():
            codes[changed] = classify_codes(emu[changed], et[changed], config.boundary_tol)

    if config.shortcuts:
        sc = np.full(n, np.nan)
        sc[valid] = _shortcut_values(emu[valid], et[valid], codes[valid])
        hit = valid & ~np.isnan(sc)
        value[hit], error[hit], meth[hit], status[hit] = sc[hit], 0.0, _M_SHORTCUT, _S_CONV
        todo &= ~hit

    uni, on_half = _unimodal_mask(emu, et)
    knead = todo & uni if config.method != "oracle" else np.zeros(n, dtype=bool)
    if knead.any():
        idx = np.nonzero(knead)[0]
        v, e, s = kneading_entropy_batch(emu[idx], et[idx], -2.0 / (emu[idx] + et[idx]), config.seq_len, config.bisect_steps, config.max_seq_len)
        value[idx], error[idx], depth[idx], meth[idx] = v, e, s, _M_KNEAD
        status[idx] = np.where(e <= config.tol, _S_CONV, _S_MAX)
        todo &= ~knead

    run_oracle = todo.copy()
    if config.method == "kneading":
        run_oracle[:] = False  # non-unimodal cells stay Failed
    cross = np.zeros(n, dtype=bool)
    if config.method == "both":
        cross = knead.copy()
    need = run_oracle | cross
    if need.any():
        idx = np.nonzero(need)[0]
        half = uni[idx] & on_half[idx]
        lo = np.full(idx.size, -1.0)
        hi = np.where(half, 0.0, 1.0)
        panel = None if config.y_panel is None else default_panel(lo, hi, config.y_panel)
        v, e, d = oracle_batch(emu[idx], et[idx], lo, hi, config.n_max, config.max_points, panel)
        prim = run_oracle[idx]
        j = idx[prim]
        value[j], error[j], depth[j], meth[j] = v[prim], e[prim], d[prim], _M_ORACLE
        status[j] = np.where(e[prim] <= config.tol, _S_CONV, _S_MAX)
        k = idx[~prim]
        disc[k] = np.abs(v[~prim] - value[k])
    return EntropyBatch(value, error, meth, depth, status, disc)


def entropy(p: ParameterPoint, config: EntropyConfig = EntropyConfig()) -> EntropyEstimate:
    """Entropy of one parameter point; never raises on valid input."""
    return entropy_batch(np.array([p.mu]), np.array([p.t]), config).estimate(0)


def entropy_fpnf(
    lam: float,
    mu: float,
    n_max: int = DEFAULT_N_MAX,
    tol: float = 2e-3,
    max_points: int = DEFAULT_MAX_POINTS,
) -> EntropyEstimate:
    """Preimage-growth entropy of (x^2 + mu x)/(lam x + 1) on the whole real circle."""
    if not -1.0 < lam < 1.0:
        raise DomainError("lambda must lie in (-1, 1)")
    if lam * mu == 1.0:
        raise DegenerateMapError("lambda*mu == 1 gives a degree-one map")
    if n_max < 4:
        raise ConfigurationError("n_max must be at least 4")
    v, e, d = fpnf_oracle_batch(np.array([lam]), np.array([mu]), n_max, max_points)
    err = float(e[0])
    return EntropyEstimate(
        float(v[0]), err, Method.PREIMAGE_ORACLE, int(d[0]), Status.CONVERGED if err <= tol else Status.MAX_DEPTH
    )
