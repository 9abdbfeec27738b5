"""Bones: parameter curves on which the turning point is periodic.

The raw residual ``g_n = f^n(c1) - c1`` also vanishes on every bone of period
``d | n``. Contours are traced on the primitive residual

    Phi_n = prod_{d | n} g_d ** moebius(n / d),

which vanishes only on period-exactly-n bones. The quotient is regular on a
lower-period bone: there ``c1`` is critical and periodic, so
``g_{kd} = g_d + O(g_d^2)`` and the ratio tends to 1. This removes lower-period
components without masking any cells. A residual threshold on ``|g_d|`` is still
applied to vertices as a safety net.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from skimage.measure import find_contours

from .exceptions import ConfigurationError, DomainError
from .qmap import ParameterPoint, f_eval
from .regions import unimodal_domain

POLY_LINE = "PolyLine"
CRIT_LINE = "CritLine"
DOMAIN_EDGE = "domain-edge"
CLOSED_LOOP = "closed-loop"

DEFAULT_WINDOWS = {
    "U2": (-7.0, -0.05, -7.0, -0.05),
    "U1": (0.05, 7.0, 0.05, 1.95),
}


def moebius(n: int) -> int:
    if n < 1:
        raise ValueError("n must be positive")
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    return -result if m > 1 else result


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def critical_orbit_residual(p: ParameterPoint, n: int) -> float:
    """``f^n(c1) - c1`` for the turning point of the designated unimodal interval."""
    if n < 1:
        raise ConfigurationError("n must be at least 1")
    if unimodal_domain(p) is None:
        raise DomainError(f"{p} has no designated turning point")
    return float(orbit_residuals(np.array([p.mu]), np.array([p.t]), n)[n - 1][0])


def orbit_residuals(mu: np.ndarray, t: np.ndarray, n_max: int) -> list[np.ndarray]:
    """``[g_1, ..., g_{n_max}]`` with ``c1 = -2/(mu + t)``, evaluated elementwise."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    c = -2.0 / (mu + t)
    x = -np.ones(np.broadcast(mu, t).shape)  # f(c1) = -1
    out = []
    for _ in range(n_max):
        out.append(x - c)
        x = f_eval(mu, t, x)
    return out


def primitive_residual(residuals: list[np.ndarray], n: int) -> np.ndarray:
    """Moebius product over divisors; ``residuals[d - 1]`` must hold ``g_d``."""
    out = np.ones_like(residuals[0])
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for d in divisors(n):
            e = moebius(n // d)
            if e == 1:
                out = out * residuals[d - 1]
            elif e == -1:
                out = out / residuals[d - 1]
    return out


@dataclass
class BoneCurve:
    period: int
    polylines: list[np.ndarray] = field(default_factory=list)
    endpoints_on: list[tuple[str, str]] = field(default_factory=list)
    cell: float = math.nan

    def __len__(self) -> int:
        return len(self.polylines)


def _constraints(family: str, mu: np.ndarray, t: np.ndarray) -> list[tuple[np.ndarray, str]]:
    """Signed slacks (>= 0 inside) of the closed family domain, with edge labels."""
    d = mu - t
    s = mu + t
    if family == "U2":
        return [(2.0 - d, POLY_LINE), (d + 2.0, CRIT_LINE), (-2.0 - s, DOMAIN_EDGE)]
    if family == "U1":
        return [(s - 2.0, POLY_LINE), (2.0 - t, DOMAIN_EDGE)]
    raise ConfigurationError(f"unknown family {family!r}")


def _clip(poly: np.ndarray, family: str, eps: float) -> list[tuple[np.ndarray, str, str]]:
    """Split a chain into maximal runs inside the family domain; ends get interpolated edge points."""
    slack = _constraints(family, poly[:, 0], poly[:, 1])
    inside = np.ones(len(poly), dtype=bool)
    for h, _ in slack:
        inside &= h >= -eps
    out = []
    edges = np.flatnonzero(np.diff(np.concatenate([[0], inside.astype(np.int8), [0]])))
    for a, b in zip(edges[::2], edges[1::2]):
        run = poly[a:b]
        start_label = end_label = DOMAIN_EDGE
        if a > 0:
            pt, start_label = _cross(poly[a], poly[a - 1], family)
            run = np.vstack([pt, run])
        if b < len(poly):
            pt, end_label = _cross(poly[b - 1], poly[b], family)
            run = np.vstack([run, pt])
        if len(run) >= 2:
            out.append((run, start_label, end_label))
    return out


def _cross(p_in: np.ndarray, p_out: np.ndarray, family: str) -> tuple[np.ndarray, str]:
    """First point where the segment from an inside to an outside vertex leaves the domain."""
    best_s, best_label = 1.0, DOMAIN_EDGE
    hi = _constraints(family, p_in[:1], p_in[1:])
    ho = _constraints(family, p_out[:1], p_out[1:])
    for (a, lab), (b, _) in zip(hi, ho):
        a, b = float(a[0]), float(b[0])
        if b < 0.0 <= a or (b < 0.0 and a < 0.0):
            s = a / (a - b) if a != b else 0.0
            s = min(max(s, 0.0), 1.0)
            if s < best_s:
                best_s, best_label = s, lab
    return p_in + best_s * (p_out - p_in), best_label


def _label_point(pt: np.ndarray, family: str, tol: float) -> str:
    for h, lab in _constraints(family, pt[:1], pt[1:]):
        if abs(float(h[0])) <= tol:
            return lab
    return DOMAIN_EDGE


def _refine(poly: np.ndarray, n: int, window: tuple[float, float, float, float], shape: tuple[int, int], steps: int) -> np.ndarray:
    """Newton steps on the primitive residual along the grid edge carrying each vertex."""
    mu0, mu1, t0, t1 = window
    w, h = shape
    dmu = (mu1 - mu0) / (w - 1)
    dt = (t1 - t0) / (h - 1)
    gi = (poly[:, 0] - mu0) / dmu
    gj = (poly[:, 1] - t0) / dt
    along_mu = np.abs(gj - np.round(gj)) < np.abs(gi - np.round(gi))
    lo = np.where(along_mu, mu0 + np.floor(gi) * dmu, t0 + np.floor(gj) * dt)
    hi = lo + np.where(along_mu, dmu, dt)
    var = np.where(along_mu, poly[:, 0], poly[:, 1]).copy()
    fixed = np.where(along_mu, poly[:, 1], poly[:, 0])

    def phi(v):
        m = np.where(along_mu, v, fixed)
        tt = np.where(along_mu, fixed, v)
        return primitive_residual(orbit_residuals(m, tt, n), n)

    cur = phi(var)
    for _ in range(steps):
        step = 1e-7 * np.maximum(np.abs(var), 1.0)
        deriv = (phi(var + step) - phi(var - step)) / (2.0 * step)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = var - cur / deriv
        ok = np.isfinite(cand) & (cand >= lo) & (cand <= hi)
        new = phi(np.where(ok, cand, var))
        better = ok & np.isfinite(new) & (np.abs(new) < np.abs(cur))
        var = np.where(better, cand, var)
        cur = np.where(better, new, cur)
    out = poly.copy()
    out[:, 0] = np.where(along_mu, var, poly[:, 0])
    out[:, 1] = np.where(along_mu, poly[:, 1], var)
    return out


def _split_filtered(poly: np.ndarray, n: int, filter_tol: float) -> list[np.ndarray]:
    """Drop vertices where a proper-divisor residual is within ``filter_tol`` of zero."""
    proper = [d for d in divisors(n) if d < n]
    if not proper:
        return [poly]
    res = orbit_residuals(poly[:, 0], poly[:, 1], max(proper))
    bad = np.zeros(len(poly), dtype=bool)
    for d in proper:
        bad |= np.abs(res[d - 1]) <= filter_tol
    if not bad.any():
        return [poly]
    good = ~bad
    edges = np.flatnonzero(np.diff(np.concatenate([[0], good.astype(np.int8), [0]])))
    return [poly[a:b] for a, b in zip(edges[::2], edges[1::2]) if b - a >= 2]


def trace_bones(
    n: int,
    window: tuple[float, float, float, float] | None = None,
    grid: tuple[int, int] = (800, 800),
    refine: bool = True,
    family: str = "U2",
    filter_tol: float = 1e-6,
    newton_steps: int = 5,
) -> BoneCurve:
    """Trace the period-n bones in ``window = (mu0, mu1, t0, t1)`` clipped to the family domain.

    Grid vertices sit on ``linspace`` over the closed window. Chains leaving the
    domain are cut at the crossing; ends are labelled by the edge they meet.
    """
    if not 1 <= n <= 16:
        raise ConfigurationError("n must lie in [1, 16]")
    if family not in DEFAULT_WINDOWS:
        raise ConfigurationError(f"unknown family {family!r}")
    window = DEFAULT_WINDOWS[family] if window is None else tuple(float(v) for v in window)
    mu0, mu1, t0, t1 = window
    w, h = grid
    if w < 2 or h < 2 or not (mu0 < mu1 and t0 < t1):
        raise ConfigurationError("invalid window or grid")
    mus = np.linspace(mu0, mu1, w)
    ts = np.linspace(t0, t1, h)
    mg, tg = np.meshgrid(mus, ts, indexing="ij")
    phi = primitive_residual(orbit_residuals(mg, tg, n), n)
    phi = np.where(np.isfinite(phi), phi, np.nan)
    dmu = (mu1 - mu0) / (w - 1)
    dt = (t1 - t0) / (h - 1)
    cell = max(dmu, dt)
    curve = BoneCurve(period=n, cell=cell)
    for c in find_contours(phi, 0.0):
        poly = np.column_stack([mu0 + c[:, 0] * dmu, t0 + c[:, 1] * dt])
        closed = len(poly) > 2 and np.array_equal(poly[0], poly[-1])
        if refine:
            poly = _refine(poly, n, window, (w, h), newton_steps)
        for piece in _split_filtered(poly, n, filter_tol):
            for run, a, b in _clip(piece, family, 1e-12):
                if closed and len(run) == len(poly):
                    a = b = CLOSED_LOOP
                else:
                    a = a if a != DOMAIN_EDGE else _label_point(run[0], family, 1e-9)
                    b = b if b != DOMAIN_EDGE else _label_point(run[-1], family, 1e-9)
                curve.polylines.append(run)
                curve.endpoints_on.append((a, b))
    return curve


def trace_bones_many(
    periods: list[int],
    threads: int = 1,
    **kw,
) -> list[BoneCurve]:
    """Trace several periods; results come back in the order of ``periods`` for any thread count."""
    if threads <= 1:
        return [trace_bones(n, **kw) for n in periods]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda n: trace_bones(n, **kw), periods))
