"""Attracting-cycle periods of the critical orbits, cell by cell."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .qmap import ParameterPoint

_TAIL = 4


@dataclass(frozen=True)
class BifurcationConfig:
    burn_in: int = 5000
    window: int = 2000
    max_period: int = 64
    tol: float = 1e-7
    multiplier_tol: float = 1e-3
    chunk: int = 4096

    def __post_init__(self) -> None:
        if self.burn_in < 0 or self.window < 2 or self.max_period < 1 or self.chunk < 1:
            raise ConfigurationError("invalid bifurcation budgets")
        if 2 * self.max_period > self.window:
            raise ConfigurationError("window must hold at least two copies of max_period")


@dataclass(frozen=True)
class CycleDetection:
    period: int
    multiplier: float | None
    overflow: bool = False


@dataclass(frozen=True)
class BifurcationSample:
    period_from_plus: int
    period_from_minus: int
    multiplier_plus: float | None = None
    multiplier_minus: float | None = None

    @property
    def multiplier_estimate(self) -> float | None:
        return self.multiplier_plus if self.multiplier_plus is not None else self.multiplier_minus


def _step(mu, t, x):
    u = t * x + 2.0
    return 2.0 * mu * x * u / (mu * mu * x * x + u * u)


def _abs_deriv(mu, t, x):
    u = t * x + 2.0
    d = mu * mu * x * x + u * u
    return np.abs(4.0 * mu * (u * u - mu * mu * x * x) / (d * d))


def detect_cycles(mu: np.ndarray, t: np.ndarray, start: float, cfg: BifurcationConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised detection: ``(period, |multiplier|, overflow)`` per cell; period 0 means none."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    m = mu.size
    x = np.full(m, float(start))
    with np.errstate(all="ignore"):
        for _ in range(cfg.burn_in):
            x = _step(mu, t, x)
        orbit = np.empty((cfg.window, m))
        for k in range(cfg.window):
            orbit[k] = x
            x = _step(mu, t, x)
    overflow = ~np.all(np.isfinite(orbit), axis=0)
    period = np.zeros(m, dtype=np.int64)
    mult = np.full(m, np.nan)
    open_ = ~overflow
    tail = orbit[-(cfg.max_period * _TAIL + cfg.max_period) :] if cfg.window > cfg.max_period * (_TAIL + 1) else orbit
    for q in range(1, cfg.max_period + 1):
        idx = np.flatnonzero(open_)
        if idx.size == 0:
            break
        # quick screen on the tail, then the full window for survivors
        quick = np.max(np.abs(tail[q:, idx] - tail[:-q, idx]), axis=0) <= cfg.tol
        cand = idx[quick]
        if cand.size == 0:
            continue
        full = np.max(np.abs(orbit[q:, cand] - orbit[:-q, cand]), axis=0) <= cfg.tol
        hit = cand[full]
        if hit.size == 0:
            continue
        seg = orbit[-q:, hit]
        with np.errstate(all="ignore"):
            lam = np.prod(_abs_deriv(mu[hit], t[hit], seg), axis=0)
        period[hit] = np.where(lam < 1.0 + cfg.multiplier_tol, q, 0)
        mult[hit] = lam
        open_[hit] = False
    return period, mult, overflow


def detect_attracting_cycle(
    p: ParameterPoint,
    start: float,
    burn_in: int = 5000,
    window: int = 2000,
    max_period: int = 64,
    tol: float = 1e-7,
) -> CycleDetection:
    """Least period of a cycle attracting the orbit of ``start`` (a critical value, +1 or -1)."""
    if start not in (1.0, -1.0):
        raise ConfigurationError("start must be a critical value, +1 or -1")
    cfg = BifurcationConfig(burn_in=burn_in, window=window, max_period=max_period, tol=tol)
    per, lam, ovf = detect_cycles(np.array([p.mu]), np.array([p.t]), start, cfg)
    q = int(per[0])
    return CycleDetection(q, float(lam[0]) if q > 0 else None, bool(ovf[0]))


def sample(p: ParameterPoint, cfg: BifurcationConfig = BifurcationConfig()) -> BifurcationSample:
    a = detect_cycles(np.array([p.mu]), np.array([p.t]), 1.0, cfg)
    b = detect_cycles(np.array([p.mu]), np.array([p.t]), -1.0, cfg)
    pa, pb = int(a[0][0]), int(b[0][0])
    return BifurcationSample(pa, pb, float(a[1][0]) if pa else None, float(b[1][0]) if pb else None)


@dataclass
class BifurcationGrid:
    """Periods and multipliers on a ``height x width`` grid of cell centres (row j is t, column i is mu)."""

    window: tuple[float, float, float, float]
    width: int
    height: int
    mu: np.ndarray
    t: np.ndarray
    period_plus: np.ndarray
    period_minus: np.ndarray
    multiplier_plus: np.ndarray
    multiplier_minus: np.ndarray
    overflow: np.ndarray

    def sample_at(self, j: int, i: int) -> BifurcationSample:
        pp, pm = int(self.period_plus[j, i]), int(self.period_minus[j, i])
        mp, mm = self.multiplier_plus[j, i], self.multiplier_minus[j, i]
        return BifurcationSample(pp, pm, float(mp) if pp else None, float(mm) if pm else None)


def cell_centres(window: tuple[float, float, float, float], width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    mu0, mu1, t0, t1 = window
    mus = mu0 + (np.arange(width) + 0.5) * (mu1 - mu0) / width
    ts = t0 + (np.arange(height) + 0.5) * (t1 - t0) / height
    tg, mg = np.meshgrid(ts, mus, indexing="ij")
    return mg, tg


def bifurcation_sweep(
    window: tuple[float, float, float, float],
    width: int,
    height: int,
    cfg: BifurcationConfig = BifurcationConfig(),
    threads: int = 1,
) -> BifurcationGrid:
    """Run detection from both critical values in every cell; chunks merge in a fixed order."""
    if width < 1 or height < 1:
        raise ConfigurationError("grid must be non-empty")
    mg, tg = cell_centres(window, width, height)
    mu = mg.ravel()
    t = tg.ravel()
    n = mu.size
    out = {k: np.zeros(n, dtype=np.int64) for k in ("pp", "pm")}
    out.update({k: np.full(n, np.nan) for k in ("mp", "mm")})
    ovf = np.zeros(n, dtype=bool)
    valid = (mu != 0) & (mu * t >= 0)
    chunks = [np.arange(a, min(a + cfg.chunk, n)) for a in range(0, n, cfg.chunk)]

    def work(idx: np.ndarray) -> None:
        idx = idx[valid[idx]]
        if idx.size == 0:
            return
        pa, la, oa = detect_cycles(mu[idx], t[idx], 1.0, cfg)
        pb, lb, ob = detect_cycles(mu[idx], t[idx], -1.0, cfg)
        out["pp"][idx], out["mp"][idx] = pa, la
        out["pm"][idx], out["mm"][idx] = pb, lb
        ovf[idx] = oa | ob

    if threads <= 1:
        for c in chunks:
            work(c)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(work, chunks))
    shape = (height, width)
    return BifurcationGrid(
        tuple(window), width, height, mg, tg,
        out["pp"].reshape(shape), out["pm"].reshape(shape),
        out["mp"].reshape(shape), out["mm"].reshape(shape), ovf.reshape(shape),
    )

