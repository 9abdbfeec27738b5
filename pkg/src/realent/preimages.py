"""Entropy from growth of preimage counts.

For generic y, ``N_n(y) = #{x : f^n(x) = y}`` grows like the lap number of
``f^n``. Levels are built backwards: every point z of level n-1 contributes the
real roots of the preimage quadratic lying in the domain. All trees of a batch
(cells times probe values) share flat arrays, tagged by an owner index.

The growth rate is the least-squares slope of ``log N_k`` over the last third
of completed levels; the error bound is its distance to the slope over the
middle third. Plain ``log N_n / n`` is biased by the prefactor and converges
too slowly to be useful as an error estimate.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence

import numpy as np

from .exceptions import ConfigurationError
from .qmap import LOG2, ParameterPoint, f_eval
from .regions import unimodal_domain
from .results import EntropyEstimate, Method, Status

Y_PANEL = (0.1234567, -0.6543219, 0.3141593)
DEDUP_TOL = 1e-12
DEGENERATE_TOL = 1e-14
DEFAULT_N_MAX = 2048
DEFAULT_MAX_POINTS = 1 << 21
# position of the extra probe inside each core [v, f(v)]
CORE_FRACTION = math.sqrt(2.0) - 1.0
# live points held at once across all trees of a batch
TOTAL_POINTS = 1 << 22
MIN_LEVELS = 6

CoeffFn = Callable[[np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


def _real_roots(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Real roots of a x^2 + b x + c, returned as (r1, ok1, r2, ok2) with validity masks."""
    lin = np.abs(a) <= DEGENERATE_TOL
    disc = b * b - 4.0 * a * c
    quad_ok = ~lin & (disc >= 0.0)
    sd = np.sqrt(np.where(quad_ok, disc, 0.0))
    q = -0.5 * (b + np.copysign(sd, b))
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(lin, -c / b, q / a)
        r2 = c / q
        ok1 = np.where(lin, np.abs(b) > 0.0, quad_ok) & np.isfinite(r1)
        ok2 = quad_ok & (q != 0.0) & np.isfinite(r2) & (np.abs(r2 - r1) > DEDUP_TOL)
    # q == 0 only when b == 0 and disc == 0, i.e. the double root 0
    zero_double = quad_ok & (q == 0.0)
    r1 = np.where(zero_double, 0.0, r1)
    ok1 |= zero_double
    return r1, ok1, r2, ok2


def count_preimages(
    coeffs: CoeffFn,
    y: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    n_max: int,
    max_points: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Level counts for a batch of preimage trees.

    Returns ``(counts, depth)`` where ``counts[i, k]`` is N_k for tree i (valid
    for ``k <= depth[i]``). A tree stops when it dies, exceeds ``max_points``,
    or reaches ``n_max``.
    """
    y = np.asarray(y, dtype=float)
    n_trees = y.size
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n_trees,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n_trees,))
    counts = np.zeros((n_trees, n_max + 1), dtype=np.int64)
    counts[:, 0] = 1
    depth = np.zeros(n_trees, dtype=np.int64)
    z = y.copy()
    owner = np.arange(n_trees)
    active = np.ones(n_trees, dtype=bool)
    for n in range(1, n_max + 1):
        if z.size == 0:
            break
        a, b, c = coeffs(z, owner)
        r1, ok1, r2, ok2 = _real_roots(a, b, c)
        lo_o, hi_o = lo[owner], hi[owner]
        ok1 &= (r1 >= lo_o) & (r1 < hi_o)
        ok2 &= (r2 >= lo_o) & (r2 < hi_o)
        z = np.concatenate([r1[ok1], r2[ok2]])
        owner = np.concatenate([owner[ok1], owner[ok2]])
        depth[active] = n
        counts[:, n] = np.bincount(owner, minlength=n_trees)
        done = active & ((counts[:, n] == 0) | (counts[:, n] > max_points))
        if done.any():
            active &= ~done
            keep = active[owner]
            z, owner = z[keep], owner[keep]
    return counts, depth


def count_preimages_budgeted(
    coeffs: CoeffFn,
    y: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    n_max: int,
    max_points: int,
    total_points: int = TOTAL_POINTS,
) -> tuple[np.ndarray, np.ndarray]:
    """``count_preimages`` with at most about ``total_points`` live points at once.

    All trees first run together under a shared cap; trees stopped by that cap
    are recounted in small groups with the full ``max_points`` each. The
    result equals an unbudgeted run.
    """
    y = np.asarray(y, dtype=float)
    n_trees = y.size
    lo = np.broadcast_to(np.asarray(lo, dtype=float), (n_trees,))
    hi = np.broadcast_to(np.asarray(hi, dtype=float), (n_trees,))
    cap = min(max_points, max(total_points // max(n_trees, 1), 1))
    counts, depth = count_preimages(coeffs, y, lo, hi, n_max, cap)
    if cap >= max_points:
        return counts, depth
    capped = np.flatnonzero(counts[np.arange(n_trees), depth] > cap)
    group = max(total_points // max_points, 1)
    for start in range(0, capped.size, group):
        sel = capped[start : start + group]

        def sub(z, owner, sel=sel):
            return coeffs(z, sel[owner])

        c, d = count_preimages(sub, y[sel], lo[sel], hi[sel], n_max, max_points)
        counts[sel], depth[sel] = c, d
    return counts, depth


def _ls_slope(y: np.ndarray, a: int, b: int) -> float:
    k = np.arange(a, b + 1, dtype=float)
    v = y[a : b + 1]
    kc = k - k.mean()
    return float(np.dot(kc, v - v.mean()) / np.dot(kc, kc))


def growth_rate(counts: np.ndarray, depth: int) -> tuple[float, float]:
    """Growth rate and error bound of one tree's level counts."""
    n = int(depth)
    if counts[n] == 0:
        return 0.0, 0.0
    if n < MIN_LEVELS:
        return max(math.log(counts[n]) / max(n, 1), 0.0), math.inf
    logn = np.log(counts[: n + 1].astype(float))
    m, q = (2 * n) // 3, n // 3
    h_late = _ls_slope(logn, m, n)
    h_mid = _ls_slope(logn, q, m)
    return min(max(h_late, 0.0), LOG2), abs(h_late - h_mid)


def normal_form_coeffs(mu: np.ndarray, t: np.ndarray) -> CoeffFn:
    k = mu * mu + t * t

    def coeffs(z, owner):
        m, tt = mu[owner], t[owner]
        return z * k[owner] - 2.0 * m * tt, 4.0 * tt * z - 4.0 * m, 4.0 * z

    return coeffs


def fpnf_coeffs(lam: np.ndarray, mu: np.ndarray) -> CoeffFn:
    def coeffs(z, owner):
        return np.ones_like(z), mu[owner] - lam[owner] * z, -z

    return coeffs


def panel_entropy(
    coeffs_for: Callable[[np.ndarray], CoeffFn],
    n_cells: int,
    y_panel: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    n_max: int,
    max_points: int,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run every probe y for every cell; keep the probe with the largest rate.

    ``y_panel`` has shape (n_cells, n_probes). ``coeffs_for(cell_index)`` returns
    the coefficient function over trees whose owners index cells.
    """
    n_probe = y_panel.shape[1]
    cell_of_tree = np.repeat(np.arange(n_cells), n_probe)
    base = coeffs_for(cell_of_tree)
    counts, depth = count_preimages_budgeted(
        base,
        y_panel.reshape(-1),
        np.repeat(np.broadcast_to(lo, (n_cells,)), n_probe),
        np.repeat(np.broadcast_to(hi, (n_cells,)), n_probe),
        n_max,
        max_points,
    )
    values = np.empty(n_cells)
    errors = np.empty(n_cells)
    depths = np.empty(n_cells, dtype=np.int64)
    for i in range(n_cells):
        best = None
        for j in range(n_probe):
            tr = i * n_probe + j
            h, e = growth_rate(counts[tr], depth[tr])
            if best is None or h > best[0]:
                best = (h, e, int(depth[tr]))
        values[i], errors[i], depths[i] = best
    return values, errors, depths


def default_panel(lo: np.ndarray, hi: np.ndarray, base: Sequence[float] = Y_PANEL) -> np.ndarray:
    """Probe values: ``base`` on [-1, 1], scaled by (y - 1)/2 for [-1, 0]."""
    lo = np.atleast_1d(lo)
    hi = np.atleast_1d(hi)
    base = np.asarray(base, dtype=float)
    half = (lo == -1.0) & (hi == 0.0)
    return np.where(half[:, None], (base[None, :] - 1.0) / 2.0, base[None, :])


def oracle_batch(
    mu: np.ndarray,
    t: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    n_max: int = DEFAULT_N_MAX,
    max_points: int = DEFAULT_MAX_POINTS,
    y_panel: np.ndarray | None = None,
    core: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised oracle for normal-form maps: ``(values, errors, depths)``.

    ``core`` appends one probe per critical core to the panel.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    t = np.atleast_1d(np.asarray(t, dtype=float))
    lo = np.broadcast_to(np.asarray(lo, dtype=float), mu.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=float), mu.shape)
    panel = default_panel(lo, hi) if y_panel is None else np.broadcast_to(y_panel, (mu.size, np.shape(y_panel)[-1]))
    if core:
        panel = np.hstack([panel, normal_form_core_probes(mu, t, lo, hi)])

    def coeffs_for(cell):
        return normal_form_coeffs(mu[cell], t[cell])

    return panel_entropy(coeffs_for, mu.size, np.asarray(panel, dtype=float), lo, hi, n_max, max_points)


def core_probes(v: np.ndarray, fv: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """One probe inside the core between a critical value ``v`` and its image; nan where unusable.

    Preimage trees rooted outside the core only see the wandering part of
    the interval, so the fixed panel alone can miss the entropy when the core
    is small.
    """
    with np.errstate(invalid="ignore"):
        y = v + CORE_FRACTION * (fv - v)
        ok = np.isfinite(y) & (np.abs(fv - v) > 1e-9) & (y >= lo) & (y < hi)
    return np.where(ok, y, np.nan)


def normal_form_core_probes(mu: np.ndarray, t: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Core probes for the critical values -1 and +1 whose critical points lie in ``[lo, hi)``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        c_minus = -2.0 / (mu + t)
        c_plus = np.where(mu == t, np.inf, 2.0 / (mu - t))
    cols = []
    for c, v in ((c_minus, -1.0), (c_plus, 1.0)):
        vv = np.full(mu.shape, v)
        y = core_probes(vv, f_eval(mu, t, vv), lo, hi)
        inside = np.isfinite(c) & (c >= lo) & (c < hi)
        cols.append(np.where(inside, y, np.nan))
    return np.column_stack(cols)


def _fpnf(lam: np.ndarray, mu: np.ndarray, x: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return (x * x + mu * x) / (lam * x + 1.0)


def fpnf_core_probes(lam: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Core probes for both real critical points of (x^2 + mu x)/(lam x + 1)."""
    inf = np.full(mu.shape, np.inf)
    disc = 1.0 - lam * mu
    sq = np.sqrt(np.where(disc >= 0.0, disc, np.nan))
    safe = np.where(lam == 0.0, 1.0, lam)
    cols = []
    for sign in (1.0, -1.0):
        c = np.where(lam == 0.0, -mu / 2.0 if sign > 0 else np.nan, (-1.0 + sign * sq) / safe)
        v = _fpnf(lam, mu, c)
        cols.append(core_probes(v, _fpnf(lam, mu, v), -inf, inf))
    return np.column_stack(cols)


def random_panel(seed: int, size: int = len(Y_PANEL)) -> tuple[float, ...]:
    """Seeded probe values in (-1, 1), kept away from 0 and the endpoints."""
    rng = np.random.default_rng(seed)
    vals = rng.uniform(0.05, 0.95, size) * rng.choice([-1.0, 1.0], size)
    return tuple(float(v) for v in vals)


def _check_panel(y_samples: Sequence[float], n_max: int) -> None:
    if n_max < 4:
        raise ConfigurationError("n_max must be at least 4")
    for y in y_samples:
        if y in (-1.0, 0.0, 1.0):
            raise ConfigurationError(f"probe value {y} is a critical value or the fixed point 0")


def preimage_count_entropy(
    p: ParameterPoint,
    domain: tuple[float, float] | str | None = None,
    y_samples: Sequence[float] | None = None,
    n_max: int = DEFAULT_N_MAX,
    tol: float = 2e-3,
    max_points: int = DEFAULT_MAX_POINTS,
) -> EntropyEstimate:
    """Preimage-growth entropy of the normal-form map on an interval or the whole circle.

    ``domain`` defaults to the designated unimodal interval when one exists and
    to [-1, 1] otherwise; ``"circle"`` counts preimages on the whole real line.
    """
    if domain is None:
        dom = unimodal_domain(p)
        lo, hi = (dom.lo, dom.hi) if dom is not None else (-1.0, 1.0)
    elif domain == "circle":
        lo, hi = -math.inf, math.inf
    else:
        lo, hi = (float(v) for v in domain)
    if y_samples is None:
        panel = default_panel(np.array([lo]), np.array([hi]))
    else:
        panel = np.array([list(y_samples)], dtype=float)
    _check_panel(panel[0], n_max)
    # explicit samples are used as given; the default panel gains the core probes
    v, e, d = oracle_batch(np.array([p.mu]), np.array([p.t]), lo, hi, n_max, max_points, panel, core=y_samples is None)
    err = float(e[0])
    status = Status.CONVERGED if err <= tol else Status.MAX_DEPTH
    return EntropyEstimate(float(v[0]), err, Method.PREIMAGE_ORACLE, int(d[0]), status)


def fpnf_oracle_batch(
    lam: np.ndarray,
    mu: np.ndarray,
    n_max: int = DEFAULT_N_MAX,
    max_points: int = DEFAULT_MAX_POINTS,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    panel = np.hstack([np.broadcast_to(np.array(Y_PANEL), (mu.size, len(Y_PANEL))), fpnf_core_probes(lam, mu)])

    def coeffs_for(cell):
        return fpnf_coeffs(lam[cell], mu[cell])

    return panel_entropy(coeffs_for, mu.size, panel, -math.inf, math.inf, n_max, max_points)
