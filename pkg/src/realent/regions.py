"""Dynamical regions of the parameter plane and the trivial-entropy shortcuts."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError
from .qmap import LOG2, ParameterPoint

DEFAULT_TOL = 1e-9


class Region(enum.Enum):
    MONOTONE_INCREASING = "monotone_increasing"
    MONOTONE_DECREASING = "monotone_decreasing"
    UNIMODAL = "unimodal"
    BIMODAL_PMP = "bimodal_pmp"
    BIMODAL_MPM = "bimodal_mpm"
    BOUNDARY = "boundary"

    @property
    def is_monotone(self) -> bool:
        return self in (Region.MONOTONE_INCREASING, Region.MONOTONE_DECREASING)


@dataclass(frozen=True)
class RegionLabel:
    """Region of a parameter point. ``adjacent`` lists both neighbours for BOUNDARY."""

    kind: Region
    adjacent: tuple[Region, ...] = ()

    @property
    def token(self) -> str:
        return self.kind.value


class FamilyDomain(enum.Enum):
    U1 = "U1"
    U2 = "U2"
    U3 = "U3"
    NONE = "none"


def _label_from_inside(mu: float, c_plus: float, c_minus: float, in_plus: bool, in_minus: bool) -> Region:
    count = int(in_plus) + int(in_minus)
    if count == 0:
        return Region.MONOTONE_INCREASING if mu > 0 else Region.MONOTONE_DECREASING
    if count == 1:
        return Region.UNIMODAL
    # shape by ordering of the minimum (c_minus) and the maximum (c_plus)
    return Region.BIMODAL_MPM if c_minus < c_plus else Region.BIMODAL_PMP


def classify(p: ParameterPoint, tol: float = DEFAULT_TOL) -> RegionLabel:
    """Count critical points strictly inside (-1, 1); BOUNDARY when one sits within tol of +-1.

    The bimodal shape is read off the order of the two turning points, so the
    (-+-) pattern can also occur for mu < 0 (third quadrant with mu - t > 2).
    """
    mu, t = p.mu, p.t
    c_plus = math.inf if mu == t else 2.0 / (mu - t)
    c_minus = -2.0 / (mu + t)
    near_plus = math.isfinite(c_plus) and abs(abs(c_plus) - 1.0) <= tol
    near_minus = abs(abs(c_minus) - 1.0) <= tol
    in_plus = math.isfinite(c_plus) and abs(c_plus) < 1.0
    in_minus = abs(c_minus) < 1.0
    if near_plus or near_minus:
        lo_plus = in_plus and not near_plus
        lo_minus = in_minus and not near_minus
        hi_plus = in_plus or near_plus
        hi_minus = in_minus or near_minus
        a = _label_from_inside(mu, c_plus, c_minus, lo_plus, lo_minus)
        b = _label_from_inside(mu, c_plus, c_minus, hi_plus, hi_minus)
        if a != b:
            return RegionLabel(Region.BOUNDARY, (a, b))
        return RegionLabel(a)
    return RegionLabel(_label_from_inside(mu, c_plus, c_minus, in_plus, in_minus))


def open_region(label: RegionLabel) -> Region:
    """Region used for method choice: on a boundary the endpoint counts as outside."""
    if label.kind is Region.BOUNDARY:
        return label.adjacent[0]
    return label.kind


def inside_parabola(p: ParameterPoint) -> bool:
    return p.mu < 1.0 - p.t * p.t / 4.0


def family_domain(p: ParameterPoint) -> FamilyDomain:
    """Membership in U1, U2 (closed along mu - t = 2) or U3."""
    mu, t = p.mu, p.t
    if mu > 0 and t > 0 and 2.0 - mu < t < 2.0:
        return FamilyDomain.U1
    if mu < 0 and t < 0:
        if -2.0 < mu - t <= 2.0 and mu + t < -2.0:
            return FamilyDomain.U2
        if mu < min(t - 2.0, 1.0 - t * t / 4.0):
            return FamilyDomain.U3
    return FamilyDomain.NONE


def trivial_entropy(p: ParameterPoint, tol: float = DEFAULT_TOL) -> float | None:
    """log 2 above t = 2 and on the third-quadrant (+-+) part outside the parabola; 0 if monotone."""
    mu, t = p.mu, p.t
    if mu > 0 and t >= 2.0 and mu + t > 2.0:
        return LOG2
    label = classify(p, tol)
    if label.kind.is_monotone:
        return 0.0
    if mu < 0 and t < 0 and label.kind is Region.BIMODAL_PMP and not inside_parabola(p):
        return LOG2
    return None


@dataclass(frozen=True)
class UnimodalRestriction:
    """Invariant interval of a U1 map together with data of its positive fixed point.

    The positive fixed point exists only for mu > 1; it attracts on [0, 1],
    which therefore contributes no entropy.
    """

    lo: float
    hi: float
    turning_point: float
    positive_fixed_point: float | None
    positive_fixed_multiplier: float | None


def positive_fixed_point(mu: float, t: float) -> float | None:
    if mu <= 1.0:
        return None
    a = mu * mu + t * t
    b = 4.0 * t - 2.0 * mu * t
    c = 4.0 * (1.0 - mu)
    return (-b + math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)


def unimodal_restriction(p: ParameterPoint) -> UnimodalRestriction:
    if family_domain(p) is not FamilyDomain.U1:
        raise DomainError(f"{p} is not in U1")
    mu, t = p.mu, p.t
    c = positive_fixed_point(mu, t)
    mult = None if c is None else 2.0 / mu - 2.0 / (t * c + 2.0)
    return UnimodalRestriction(-1.0, 0.0, -2.0 / (mu + t), c, mult)


@dataclass(frozen=True)
class UnimodalDomain:
    """Interval on which a map is unimodal, with its turning point (always a minimum here)."""

    lo: float
    hi: float
    turning_point: float
    family: FamilyDomain


def unimodal_domain(p: ParameterPoint) -> UnimodalDomain | None:
    """Designated unimodal interval: [-1, 0] on the closure of U1, [-1, 1] on the closure of U2."""
    mu, t = p.mu, p.t
    c1 = -2.0 / (mu + t)
    if mu > 0 and 0.0 <= t < 2.0 and mu + t >= 2.0:
        return UnimodalDomain(-1.0, 0.0, c1, FamilyDomain.U1)
    if mu < 0 and t <= 0 and -2.0 <= mu - t <= 2.0 and mu + t <= -2.0:
        return UnimodalDomain(-1.0, 1.0, c1, FamilyDomain.U2)
    return None


# ---------------------------------------------------------------------------
# vectorised helpers for sweeps

REGION_CODES = (
    Region.MONOTONE_INCREASING,
    Region.MONOTONE_DECREASING,
    Region.UNIMODAL,
    Region.BIMODAL_PMP,
    Region.BIMODAL_MPM,
    Region.BOUNDARY,
)


def classify_codes(mu: np.ndarray, t: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Index into REGION_CODES for each (mu, t); matches ``classify`` elementwise."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore"):
        c_plus = np.where(mu == t, np.inf, 2.0 / (mu - t))
    c_minus = -2.0 / (mu + t)
    fin = np.isfinite(c_plus)
    near = (fin & (np.abs(np.abs(c_plus) - 1.0) <= tol)) | (np.abs(np.abs(c_minus) - 1.0) <= tol)
    in_plus = fin & (np.abs(c_plus) < 1.0)
    in_minus = np.abs(c_minus) < 1.0
    count = in_plus.astype(int) + in_minus.astype(int)
    codes = np.where(mu > 0, 0, 1)
    codes = np.where(count == 1, 2, codes)
    codes = np.where(count == 2, np.where(c_minus < c_plus, 4, 3), codes)
    if near.any():
        # defer to the scalar rule so both paths agree exactly
        for idx in zip(*np.nonzero(near)):
            lab = classify(ParameterPoint(float(mu[idx]), float(t[idx])), tol)
            codes[idx] = REGION_CODES.index(lab.kind)
    return codes


def family_masks(mu: np.ndarray, t: np.ndarray) -> dict[FamilyDomain, np.ndarray]:
    """Vectorised ``family_domain``: one boolean mask per domain."""
    mu = np.asarray(mu, dtype=float)
    t = np.asarray(t, dtype=float)
    q1 = (mu > 0) & (t > 0)
    q3 = (mu < 0) & (t < 0)
    u1 = q1 & (2.0 - mu < t) & (t < 2.0)
    u2 = q3 & (mu - t > -2.0) & (mu - t <= 2.0) & (mu + t < -2.0)
    u3 = q3 & ~u2 & (mu < np.minimum(t - 2.0, 1.0 - t * t / 4.0))
    return {FamilyDomain.U1: u1, FamilyDomain.U2: u2, FamilyDomain.U3: u3}
