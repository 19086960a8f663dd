"""Closed-form eigenvalue bounds, sector reverse isoperimetric functions and
the perimeter/area inequalities used on the hexagon family."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .geometry import ShapeMetrics, hex_Ha, metrics

PI = math.pi
SQRT3 = math.sqrt(3.0)
# first positive zero of J1' and of J0 (standard tables, 12 digits)
J1P_11 = 1.841183781341
J0_1 = 2.404825557695
J1P_11_SQ = J1P_11**2
TARGET = 16 * PI**2


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class BoundSet:
    pw_lower: float  # pi^2 / D^2
    sw_upper: float  # pi j'^2 / A
    cheng_upper: float  # 4 j0^2 / D^2
    width_upper: float  # pi^2 w^2 / A^2
    perimeter: float
    fem_mu1: float | None = None
    scale_invariant_target: float = TARGET
    j1p_11_sq: float = J1P_11_SQ
    j0_1: float = J0_1

    @property
    def best_upper(self) -> float:
        return min(self.sw_upper, self.cheng_upper, self.width_upper)

    def scaled(self) -> dict:
        """Each bound multiplied by P^2, next to the target 16 pi^2."""
        p2 = self.perimeter**2
        out = {
            "P2_pw_lower": p2 * self.pw_lower,
            "P2_sw_upper": p2 * self.sw_upper,
            "P2_cheng_upper": p2 * self.cheng_upper,
            "P2_width_upper": p2 * self.width_upper,
            "target": self.scale_invariant_target,
        }
        if self.fem_mu1 is not None:
            out["P2_fem_mu1"] = p2 * self.fem_mu1
        return out

    def as_dict(self) -> dict:
        d = asdict(self)
        d["scaled"] = self.scaled()
        return d


def bound_set(m: ShapeMetrics, fem_mu1: float | None = None) -> BoundSet:
    bs = BoundSet(
        pw_lower=PI**2 / m.diameter**2,
        sw_upper=PI * J1P_11_SQ / m.area,
        cheng_upper=4 * J0_1**2 / m.diameter**2,
        width_upper=PI**2 * m.min_width**2 / m.area**2,
        perimeter=m.perimeter,
        fem_mu1=fem_mu1,
    )
    if bs.pw_lower > min(bs.sw_upper, bs.cheng_upper) * (1 + 1e-9):
        raise BoundsError("lower bound exceeds an upper bound; the input is not a convex shape")
    return bs


# ------------------------------------------------------- sector functions


def sector_g(alpha, theta):
    """sin^2(alpha + theta/2) / (sin(alpha + theta) sin alpha), written without the products."""
    alpha = np.asarray(alpha, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any((theta <= 0) | (theta >= PI / 2)):
        raise BoundsError("theta must lie in (0, pi/2)")
    lo = PI / 2 - theta
    if np.any((alpha < lo - 1e-15) | (alpha > PI / 2 + 1e-15)):
        raise BoundsError("alpha must lie in [pi/2 - theta, pi/2]")
    s = 2 * alpha + theta
    return (1 - np.cos(s)) / (np.cos(theta) - np.cos(s))


def sector_h(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 2):
        raise BoundsError("h is defined for t >= 2")
    return 4 * t * np.tan(PI / t)


# --------------------------------------------------- reverse isoperimetry


def _check_a(a, lo=0.0, hi=0.5):
    if not (lo <= a <= hi):
        raise BoundsError(f"a={a} outside [{lo}, {hi}]")


def reverse_iso_p(t, a):
    """Half perimeter of the hexagon obtained by moving the cut point by t."""
    _check_a(a)
    t = np.asarray(t, dtype=float)
    if np.any((t < -1e-15) | (t > a / 2 + 1e-15)):
        raise BoundsError("t must lie in [0, a/2]")
    return t + np.sqrt((0.25 - t) ** 2 + 0.75 * (0.5 - a) ** 2)


def reverse_iso_area(t, a):
    return (2 - 3 * a) + 6 * (1 - 2 * a) * np.asarray(t, dtype=float)


def reverse_iso_ratio(t, a):
    return reverse_iso_p(t, a) ** 2 / reverse_iso_area(t, a)


def reverse_iso_endpoint_gap(a):
    """Closed form of ratio(0) - ratio(a/2)."""
    return a * (1 - 2 * a) * (1 - 3 * a) ** 2 / (8 * (1 - 3 * a * a) * (2 - 3 * a))


def triangle_swap_perimeters(y, a):
    """Perimeter terms of the two equal-area triangles swapped at parameter y."""
    if not (0 < a < 0.5):
        raise BoundsError("a must lie in (0, 1/2)")
    y = np.asarray(y, dtype=float)
    if np.any((y < 0) | (y > 1)):
        raise BoundsError("y must lie in [0, 1]")
    t = a * y / 2
    s = y * (1 - 2 * a) / 2
    p1 = t + np.sqrt((0.25 - t) ** 2 + 0.75 * (0.5 - a) ** 2)
    p2 = s + np.sqrt((0.25 - s / 2) ** 2 + 0.75 * (s - 0.5 + a) ** 2)
    return p1, p2


# ----------------------------------------------------------- midrange


@dataclass(frozen=True)
class MidrangeCertificate:
    p2_over_area: float
    exact_p2_over_area: float
    bound: float
    fifty_pi: float
    target: float
    ratio_at_quarter: float
    ratio_at_third: float
    ratio_decreasing: bool
    verdict: bool

    def as_dict(self) -> dict:
        return asdict(self)


def hexagon_ratio(x):
    """(1 - 3x + 3x^2)/(2 - 3x), proportional to P^2/A of the midpoint hexagon."""
    x = np.asarray(x, dtype=float)
    return (1 - 3 * x + 3 * x * x) / (2 - 3 * x)


def midrange_certificate(samples: int = 10_001) -> MidrangeCertificate:
    """Upper bound on P^2 mu_1 for a in [1/4, 1/3] through the area bound on the midpoint hexagon."""
    m = metrics(hex_Ha(0.25))
    ratio = m.perimeter**2 / m.area
    exact = 42 * SQRT3 / 5
    bound = PI * J1P_11_SQ * exact
    xs = np.linspace(0.25, 1 / 3, samples)
    r = hexagon_ratio(xs)
    # derivative numerator 3(3x^2 - 4x + 1) = 3(3x - 1)(x - 1) <= 0 on [1/4, 1/3]
    decreasing = bool(np.all(np.diff(r) <= 0) and r[0] > r[-1])
    verdict = bool(bound < 50 * PI < TARGET and abs(ratio - exact) <= 1e-12 * exact and decreasing)
    return MidrangeCertificate(ratio, exact, bound, 50 * PI, TARGET, float(r[0]), float(r[-1]), decreasing, verdict)
