"""Exact algebra of the normal-form map.

The map is

    f(x) = 2 mu x (t x + 2) / (mu^2 x^2 + (t x + 2)^2)

with ``mu != 0`` and ``mu * t >= 0``. It sends the real circle to ``[-1, 1]``,
fixes 0 with multiplier ``mu`` and has critical points ``2/(mu - t) -> +1``
and ``-2/(mu + t) -> -1``.

The point at infinity is represented by ``math.inf``; ``-inf`` is accepted as
the same (unsigned) point. Functions prefixed with ``f_`` are vectorised over
numpy arrays and skip parameter validation; they are the workhorses for sweeps.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import ConfigurationError, DegenerateMapError, DomainError, SingularInputError

INFINITY = math.inf
LOG2 = math.log(2.0)
_EPS = sys.float_info.epsilon


def is_infinite(x: float) -> bool:
    return math.isinf(x)


@dataclass(frozen=True)
class ParameterPoint:
    """A point (mu, t) of the parameter plane."""

    mu: float
    t: float

    def __post_init__(self) -> None:
        mu, t = float(self.mu), float(self.t)
        if not (math.isfinite(mu) and math.isfinite(t)):
            raise ConfigurationError(f"parameters must be finite, got ({mu}, {t})")
        if mu == 0.0:
            raise ConfigurationError("mu must be nonzero")
        if mu * t < 0.0:
            raise ConfigurationError(f"mu*t must be >= 0, got ({mu}, {t})")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class ModuliPoint:
    """Conjugacy-class coordinates (sigma1, sigma2); sigma3 is always sigma1 - 2."""

    sigma1: float
    sigma2: float

    @property
    def sigma3(self) -> float:
        return self.sigma1 - 2.0


@dataclass(frozen=True)
class CriticalData:
    c_plus: float
    c_minus: float
    value_at_c_plus: float = 1.0
    value_at_c_minus: float = -1.0


@dataclass(frozen=True)
class FixedPointSet:
    """Multipliers of the three fixed points and the real fixed points.

    ``real_fixed_points`` holds ``(x, multiplier)`` pairs sorted by ``x``.
    ``degenerate`` is set when two fixed points collide (parabola or mu == 1).
    """

    multipliers: tuple[complex, complex, complex]
    real_fixed_points: tuple[tuple[float, float], ...]
    degenerate: bool

    def formula_residual(self) -> float:
        """|sum 1/(1 - m_i) - 1|; only meaningful when no multiplier equals 1."""
        return abs(sum(1.0 / (1.0 - m) for m in self.multipliers) - 1.0)

    def symmetric_functions(self) -> tuple[float, float, float]:
        m1, m2, m3 = self.multipliers
        s1 = m1 + m2 + m3
        s2 = m1 * m2 + m1 * m3 + m2 * m3
        s3 = m1 * m2 * m3
        return float(s1.real), float(s2.real), float(s3.real)


# ---------------------------------------------------------------------------
# vectorised kernels


def f_eval(mu, t, x):
    """Evaluate the map; ``mu``, ``t`` and ``x`` broadcast. Infinite x is allowed."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    big = np.abs(x) > 1.0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # |x| <= 1: direct formula
        u = t * x + 2.0
        near = 2.0 * mu * x * u / (mu * mu * x * x + u * u)
        # |x| > 1: divide through by x^2 (also covers x = inf)
        w = t + 2.0 / x
        far = 2.0 * mu * w / (mu * mu + w * w)
    out = np.where(big, far, near)
    return out[()] if out.ndim == 0 else out


def f_deriv(mu, t, x):
    """Closed-form derivative 4 mu ((tx+2)^2 - mu^2 x^2) / D^2 for finite x."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    x = np.asarray(x)
    u = t * x + 2.0
    d = mu * mu * x * x + u * u
    out = 4.0 * mu * (u * u - mu * mu * x * x) / (d * d)
    return out[()] if np.ndim(out) == 0 else out


def project(mu, t):
    """Vectorised moduli projection returning ``(sigma1, sigma2)``."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    s1 = mu - 2.0 + 4.0 / mu - t * t / mu
    s2 = (mu + 1.0 / mu) * s1 - (mu * mu + 2.0 / mu)
    return s1, s2


# ---------------------------------------------------------------------------
# the map object


@dataclass(frozen=True)
class NormalFormMap:
    params: ParameterPoint

    @classmethod
    def from_params(cls, mu: float, t: float) -> "NormalFormMap":
        return cls(ParameterPoint(mu, t))

    @property
    def mu(self) -> float:
        return self.params.mu

    @property
    def t(self) -> float:
        return self.params.t

    def __call__(self, x):
        if np.ndim(x) == 0:
            x = float(x)
            if x == 0.0:
                return 0.0
            return float(f_eval(self.mu, self.t, x))
        return f_eval(self.mu, self.t, x)

    def derivative(self, x):
        if np.ndim(x) == 0:
            x = float(x)
            if not math.isfinite(x):
                raise DomainError("derivative requires a finite x")
            if x == 0.0:
                return self.mu
            return float(f_deriv(self.mu, self.t, x))
        return f_deriv(self.mu, self.t, x)

    def _derivative_polys(self) -> tuple[Polynomial, Polynomial, Polynomial, Polynomial]:
        mu, t = self.mu, self.t
        d = Polynomial([4.0, 4.0 * t, mu * mu + t * t])
        p = 4.0 * mu * Polynomial([4.0, 4.0 * t, t * t - mu * mu])
        dd = d.deriv()
        q = p.deriv() * d - 2.0 * p * dd  # f'' = q / d^3
        r = q.deriv() * d - 3.0 * q * dd  # f''' = r / d^4
        return d, p, q, r

    def schwarzian(self, x: float, tol: float = 1e-12) -> float:
        """Schwarzian derivative f'''/f' - 3/2 (f''/f')^2 at a finite, non-critical x."""
        x = float(x)
        if not math.isfinite(x):
            raise DomainError("schwarzian requires a finite x")
        d, p, q, r = self._derivative_polys()
        dv, pv, qv, rv = d(x), p(x), q(x), r(x)
        fp = pv / dv**2
        if abs(fp) <= tol:
            raise SingularInputError(f"x={x} is (numerically) a critical point")
        # f''/f' = q/(p d), f'''/f' = r/(p d^2)
        a = qv / (pv * dv)
        return float(rv / (pv * dv * dv) - 1.5 * a * a)

    def critical_points(self) -> CriticalData:
        mu, t = self.mu, self.t
        c_plus = INFINITY if mu == t else 2.0 / (mu - t)
        return CriticalData(c_plus=c_plus, c_minus=-2.0 / (mu + t))

    def fixed_points(self, tol: float = 1e-9) -> FixedPointSet:
        mu, t = self.mu, self.t
        a = mu * mu + t * t
        b = 4.0 * t - 2.0 * mu * t
        c = 4.0 * (1.0 - mu)
        disc_reduced = t * t / 4.0 + mu - 1.0  # discriminant = 16 mu^2 * this
        roots = np.roots([a, b, c]).astype(complex)
        mults = [complex(mu)] + [complex(f_deriv(mu, t, r)) for r in roots]
        degenerate = abs(disc_reduced) <= tol or abs(1.0 - mu) <= tol
        real = [(0.0, mu)]
        if disc_reduced >= -tol:
            # vieta-stable real roots
            sq = math.sqrt(max(b * b - 4.0 * a * c, 0.0))
            qq = -0.5 * (b + math.copysign(sq, b))
            cand = []
            if qq != 0.0:
                cand = [qq / a, c / qq]
            else:
                cand = [0.0, 0.0]
            for r in cand:
                if all(abs(r - x0) > 1e-12 for x0, _ in real):
                    real.append((r, float(f_deriv(mu, t, r))))
        real.sort()
        return FixedPointSet(
            multipliers=(mults[0], mults[1], mults[2]),
            real_fixed_points=tuple(real),
            degenerate=degenerate,
        )

    def moduli(self) -> ModuliPoint:
        return moduli_project(self.params)


def eval_map(p: ParameterPoint, x: float) -> float:
    return NormalFormMap(p)(x)


# ---------------------------------------------------------------------------
# moduli space


def moduli_project(p: ParameterPoint) -> ModuliPoint:
    """Projection (mu, t) -> (sigma1, sigma2).

    Ill-conditioned as mu -> 0 where sigma2 blows up; no mitigation is applied.
    """
    s1, s2 = project(p.mu, p.t)
    return ModuliPoint(float(s1), float(s2))


def moduli_from_mixed(mu: float, a: float) -> ModuliPoint:
    """Coordinates of the mixed normal form with multiplier mu at infinity and shape a."""
    if mu == 0:
        raise ConfigurationError("mu must be nonzero")
    s1 = mu * (1.0 - a * a) - 2.0 + 4.0 / mu
    s2 = (mu + 1.0 / mu) * s1 - (mu * mu + 2.0 / mu)
    return ModuliPoint(s1, s2)


def solve_cubic(a2: float, a1: float, a0: float) -> list[complex]:
    """Roots of x^3 + a2 x^2 + a1 x + a0 by the closed form, each polished once by Newton."""
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    half_q = q / 2.0
    third_p = p / 3.0
    disc = half_q * half_q + third_p**3
    scale = max(half_q * half_q, abs(third_p) ** 3, 1e-300)
    if abs(disc) <= 1e-14 * scale:
        # repeated root
        u = np.cbrt(-half_q)
        ys: list[complex] = [complex(2.0 * u), complex(-u), complex(-u)]
    elif disc < 0.0:
        r = 2.0 * math.sqrt(-third_p)
        arg = 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)
        phi = math.acos(max(-1.0, min(1.0, arg))) / 3.0
        ys = [complex(r * math.cos(phi - 2.0 * math.pi * k / 3.0)) for k in range(3)]
    else:
        sd = math.sqrt(disc)
        u = float(np.cbrt(-half_q + sd))
        v = float(np.cbrt(-half_q - sd))
        re = -(u + v) / 2.0
        im = math.sqrt(3.0) * (u - v) / 2.0
        ys = [complex(u + v), complex(re, im), complex(re, -im)]

    def poly(x: complex) -> complex:
        return ((x + a2) * x + a1) * x + a0

    def dpoly(x: complex) -> complex:
        return (3.0 * x + 2.0 * a2) * x + a1

    roots = []
    for y in ys:
        x = y - shift
        dx = dpoly(x)
        if dx != 0:
            # near a double root dx ~ 0 and the step can jump away, so keep it only if it helps
            xn = x - poly(x) / dx
            if abs(poly(xn)) < abs(poly(x)):
                x = xn
        roots.append(x)
    return roots


def _root_error(x: float, s1: float, s2: float) -> float:
    """Rounding-level error bound for a root x of x^3 - s1 x^2 + s2 x - (s1 - 2).

    Near a root of multiplicity k the error scales like eps^(1/k); take the
    smallest of the three Taylor bounds.
    """
    ax = abs(x)
    e = 8.0 * _EPS * (ax**3 + abs(s1) * ax * ax + abs(s2) * ax + abs(s1 - 2.0) + 2.0)
    d1 = abs(3.0 * x * x - 2.0 * s1 * x + s2)
    d2 = abs(6.0 * x - 2.0 * s1)
    bounds = [e ** (1.0 / 3.0)]
    if d1 > 0.0:
        bounds.append(e / d1)
    if d2 > 0.0:
        bounds.append(math.sqrt(2.0 * e / d2))
    return min(bounds)


def moduli_fiber(m: ModuliPoint) -> list[ParameterPoint]:
    """All parameter points projecting to ``m``, sorted by decreasing mu (at most three)."""
    s1, s2 = m.sigma1, m.sigma2
    roots = solve_cubic(-s1, s2, -(s1 - 2.0))
    # clustered roots are only resolved to eps^(1/2) or eps^(1/3): a real double
    # root may come back as a complex pair, and t^2 may come out slightly negative
    reals: list[tuple[float, float]] = []
    for r in roots:
        err = _root_error(r.real, s1, s2)
        if abs(r.imag) <= err + 1e-12 * (1.0 + abs(r.real)):
            x = r.real
            if abs(x) <= 1e-12:
                continue
            if all(abs(x - y) > max(err, ey) + 1e-12 * (1.0 + abs(y)) for y, ey in reals):
                reals.append((x, err))
    out = []
    for mu, err in sorted(reals, reverse=True):
        t2 = mu * mu - (2.0 + s1) * mu + 4.0
        slack = abs(2.0 * mu - 2.0 - s1) * err + 1e-12 * (mu * mu + abs(2.0 + s1) * abs(mu) + 4.0)
        if t2 < -slack:
            continue
        if t2 < 0.0:
            # snap onto t = 0, where mu solves mu^2 - (2 + s1) mu + 4 = 0 exactly
            disc = (2.0 + s1) ** 2 - 16.0
            if disc >= 0.0:
                cands = [(2.0 + s1 + sg * math.sqrt(disc)) / 2.0 for sg in (1.0, -1.0)]
                mu = min(cands, key=lambda c: abs(c - mu))
            t2 = 0.0
        t = math.copysign(math.sqrt(t2), mu)
        out.append(ParameterPoint(mu, t))
    return out


def per1_plus1(m: ModuliPoint) -> float:
    """Signed residual of the line of parabolic fixed points, 2 s1 - s2 - 3."""
    return 2.0 * m.sigma1 - m.sigma2 - 3.0


def per2_1(m: ModuliPoint) -> float:
    return 2.0 * m.sigma1 + m.sigma2 - 1.0


def escape_boundary(m: ModuliPoint) -> float:
    s1, s2 = m.sigma1, m.sigma2
    return (s1 + 2.0) * (2.0 * s1 + s2 + 4.0) - (s1 - 2.0)


def symmetry_locus_point(k: float) -> ModuliPoint:
    if k == 0:
        raise DomainError("k must be nonzero")
    return ModuliPoint(4.0 * k - 2.0 + 1.0 / k, 4.0 * k * k - 4.0 * k + 5.0 - 2.0 / k)


# ---------------------------------------------------------------------------
# fixed-point normal form and the polynomial line


def fpnf_eval(lam: float, mu: float, x: float) -> float:
    """Evaluate (x^2 + mu x)/(lam x + 1) on the real circle; the pole maps to infinity."""
    if not -1.0 < lam < 1.0:
        raise DomainError("lambda must lie in (-1, 1)")
    if lam * mu == 1.0:
        raise DegenerateMapError("lambda*mu == 1 gives a degree-one map")
    if math.isinf(x):
        return INFINITY
    den = lam * x + 1.0
    if den == 0.0:
        return INFINITY
    return (x * x + mu * x) / den


def poly_param_to_c(mu: float) -> float:
    """Parameter c with z^2 + mu z affinely conjugate to z^2 + c."""
    return mu / 2.0 - mu * mu / 4.0
