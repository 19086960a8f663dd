"""Grid certification of F <= 0 on the three parameter zones, plus the small-a regime.

The sweep evaluates F on a grid, takes the maximum and adds the Lipschitz
budget  L_a * delta_a / 2 + L_c * delta_c / 2.  The grid is cut into
fixed-size blocks that do not depend on the worker count, so every point is
evaluated inside an identical array layout whatever the pool size; the
reduction is a plain max with ties broken by the smallest (a, c).
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from mpmath import iv

from . import closed_form as cf
from .bounds import midrange_certificate
from .trig_eigen import U_at_A, U_at_B

PI = math.pi
SQRT3 = math.sqrt(3.0)
BLOCK = 16384
DEFAULT_SLACK = 1e-9

# Lipschitz constants (|dF/da|, |dF/dc|) as published for each zone
REFERENCE_LIPSCHITZ = {
    "I": (819.6011, 84.4817),
    "II": (1048.9639, 170.9884),
    "III": (1353.8951, 352.1112),
}

LIP_SOURCES = ("reference", "computed")


class NonFiniteError(ArithmeticError):
    def __init__(self, zone, a, c, value):
        super().__init__(f"zone {zone}: F({a!r}, {c!r}) = {value!r} is not finite")
        self.zone, self.a, self.c, self.value = zone, a, c, value


@dataclass(frozen=True)
class Zone:
    name: str
    k: float
    a_min: float
    a_max: float
    c_min: float
    c_max: float
    n_a: int
    n_c: int
    lip_a: float | None = None
    lip_c: float | None = None
    diagonal_cut: bool = False  # keep only c >= max(a, c_min)

    @property
    def delta_a(self) -> float:
        return (self.a_max - self.a_min) / self.n_a

    @property
    def delta_c(self) -> float:
        return (self.c_max - self.c_min) / self.n_c

    def c_lower(self, a):
        return np.maximum(a, self.c_min) if self.diagonal_cut else np.full_like(np.asarray(a, float), self.c_min)

    def contains(self, a, c):
        a, c = np.asarray(a), np.asarray(c)
        return (a >= self.a_min) & (a <= self.a_max) & (c >= self.c_lower(a)) & (c <= self.c_max)


def zones() -> list[Zone]:
    return [
        Zone("I", 0.0, 1 / 60, 0.06, 0.16, 0.5, 155, 150),
        Zone("II", 0.06, 0.06, 0.12, 0.16, 0.5, 160, 155),
        Zone("III", 0.12, 0.12, 0.25, 0.16, 0.5, 730, 735, diagonal_cut=True),
    ]


def get_zone(name: str) -> Zone:
    for z in zones():
        if z.name == name:
            return z
    raise KeyError(f"unknown zone {name!r}; expected one of I, II, III")


# ------------------------------------------------------------------ grids


def build_grid(z: Zone) -> tuple[np.ndarray, np.ndarray]:
    """Grid points of a zone, sorted lexicographically in (a, c)."""
    i = np.arange(z.n_a + 1)
    j = np.arange(z.n_c + 1)
    av = z.a_min + (z.a_max - z.a_min) * i / z.n_a
    cv = z.c_min + (z.c_max - z.c_min) * j / z.n_c
    A, Cc = np.meshgrid(av, cv, indexing="ij")
    a, c = A.ravel(), Cc.ravel()
    if z.diagonal_cut:
        # cells strictly crossed by c = a get the 4 edge midpoints and the center
        a0, c0 = np.meshgrid(av[:-1], cv[:-1], indexing="ij")
        a1, c1 = np.meshgrid(av[1:], cv[1:], indexing="ij")
        cross = (c0 < a1) & (c1 > a0)
        a0, a1, c0, c1 = a0[cross], a1[cross], c0[cross], c1[cross]
        am, cm = (a0 + a1) / 2, (c0 + c1) / 2
        extra_a = np.concatenate([am, am, a0, a1, am])
        extra_c = np.concatenate([c0, c1, cm, cm, cm])
        a = np.concatenate([a, extra_a])
        c = np.concatenate([c, extra_c])
        keep = c >= np.maximum(a, z.c_min)
        a, c = a[keep], c[keep]
        pts = np.unique(np.column_stack([a, c]), axis=0)  # sorted, duplicates dropped
        a, c = pts[:, 0], pts[:, 1]
    return np.ascontiguousarray(a), np.ascontiguousarray(c)


# -------------------------------------------------------- Lipschitz bounds


def _I(lo, hi=None):
    hi = lo if hi is None else hi
    lo, hi = float(lo), float(hi)
    return iv.mpf([min(lo, hi), max(lo, hi)])


def _ends(x):
    return float(x.a), float(x.b)


def dP_da(a, c):
    r = float(cf.perimeter_root(a))
    return -3 * (2 * r - 1) / (r * (1 - 2 * a) ** 2) * (r * (1 - 2 * a) + c - a)


def dP_dc(a):
    r = float(cf.perimeter_root(a))
    return -6 / (1 - 2 * a) * (1 - a - r)


@dataclass(frozen=True)
class LipschitzReport:
    zone: str
    lip_a: float
    lip_c: float
    da_interval: tuple[float, float]
    dc_interval: tuple[float, float]
    terms: dict = field(default_factory=dict)


def lipschitz_bounds(z: Zone) -> LipschitzReport:
    """Interval assembly of |dF/da| and |dF/dc| from the term-by-term bounds."""
    k, amin, amax, cmin, cmax = z.k, z.a_min, z.a_max, z.c_min, z.c_max
    K = (1 + k) ** 2
    P = _I(3 * float(cf.perimeter_root(amax)), 3 * (1 - amin))
    Pa = _I(dP_da(amin, cmax), dP_da(amax, cmin))
    Pc = _I(dP_dc(amax), dP_dc(amin))
    Nh = _I(
        (k * k * (5 * PI**2 - 28) + k * (24 - 2 * PI**2) + PI**2 + 4) / (2 * SQRT3),
        2 * PI**2 / SQRT3 * (5 * k * k - 2 * k + 1),
    )
    Nhp = _I(cf.N_hat_prime(k, amax), cf.N_hat_prime(k, amin))
    Dhp = _I(cf.D_hat_prime(k, amax), cf.D_hat_prime(k, amin))
    IN = _I(0.0, SQRT3 * PI**2 * K * amax * (1 - 2 * amax))
    H1 = _I(-4 * SQRT3 * PI**2 * K * amax, 0.0)
    H2 = _I(0.0, 4 * SQRT3 * PI**2 * K * (cmax - amin) ** 2 / (1 - 2 * amin) ** 2)
    H3 = _I(0.0, 4 * SQRT3 * PI**2 * K * amax)
    J1 = _I(-SQRT3 / 4 * amax * float(U_at_A(k, amax)), -SQRT3 / 4 * amin * float(U_at_B(k, amin)))
    J2 = _I(0.0, 27 * SQRT3 / 16 * cmax)
    J3 = _I(0.0, 27 * SQRT3 / 16 * amax)
    P2 = P * P
    pi2 = iv.mpf(PI) ** 2
    terms_a = {
        "-4 I_N P dP/da": -4 * IN * P * Pa,
        "-2 P^2 H1": -2 * P2 * H1,
        "-16 pi^2 D'": -16 * pi2 * Dhp,
        "32 pi^2 J2": 32 * pi2 * J2,
        "2 N P dP/da": 2 * Nh * P * Pa,
        "P^2 N'": P2 * Nhp,
        "-2 P^2 H2": -2 * P2 * H2,
        "32 pi^2 J1": 32 * pi2 * J1,
    }
    terms_c = {
        "-4 I_N P dP/dc": -4 * IN * P * Pc,
        "32 pi^2 J3": 32 * pi2 * J3,
        "2 N P dP/dc": 2 * Nh * P * Pc,
        "-2 P^2 H3": -2 * P2 * H3,
    }
    tot_a = sum(terms_a.values(), iv.mpf(0))
    tot_c = sum(terms_c.values(), iv.mpf(0))
    la = max(abs(v) for v in _ends(tot_a))
    lc = max(abs(v) for v in _ends(tot_c))
    terms = {name: _ends(v) for name, v in {**terms_a, **terms_c}.items()}
    terms.update({
        "P": _ends(P), "dP/da": _ends(Pa), "dP/dc": _ends(Pc), "N_hat": _ends(Nh),
        "N_hat'": _ends(Nhp), "D_hat'": _ends(Dhp),
    })
    return LipschitzReport(z.name, la, lc, _ends(tot_a), _ends(tot_c), terms)


def with_lipschitz(z: Zone, lip_source: str = "reference") -> Zone:
    if lip_source == "reference":
        la, lc = REFERENCE_LIPSCHITZ[z.name]
    elif lip_source == "computed":
        rep = lipschitz_bounds(z)
        la, lc = rep.lip_a, rep.lip_c
    else:
        raise ValueError(f"lip_source must be one of {LIP_SOURCES}, got {lip_source!r}")
    return replace(z, lip_a=la, lip_c=lc)


# ------------------------------------------------------------------ sweep


@dataclass(frozen=True)
class GridReport:
    zone: str
    k: float
    points_evaluated: int
    max_F: float
    argmax: tuple[float, float]
    delta_a: float
    delta_c: float
    lip_a: float
    lip_c: float
    lip_source: str
    error_budget: float
    fp_slack: float
    certified_upper: float
    verdict: bool
    wall_time: float
    workers: int

    def as_dict(self) -> dict:
        d = asdict(self)
        d["argmax"] = list(self.argmax)
        return d


def _eval_block(args):
    k, a, c = args
    with np.errstate(all="ignore"):
        return cf.F(k, a, c)


def default_workers() -> int:
    env = os.environ.get("NEUMANN_CERT_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValueError(f"NEUMANN_CERT_WORKERS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ValueError("NEUMANN_CERT_WORKERS must be >= 1")
        return n
    return 1


def evaluate_grid(k: float, a: np.ndarray, c: np.ndarray, workers: int = 1) -> np.ndarray:
    """F at every grid point; blocks are fixed-size so the result ignores `workers`."""
    jobs = [(k, a[s:s + BLOCK], c[s:s + BLOCK]) for s in range(0, len(a), BLOCK)]
    if workers <= 1 or len(jobs) == 1:
        parts = [_eval_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_eval_block, jobs))
    return np.concatenate(parts) if parts else np.empty(0)


def sweep(
    z: Zone,
    lip_source: str = "reference",
    workers: int | None = None,
    slack: float = DEFAULT_SLACK,
    lip_override: tuple[float, float] | None = None,
    return_values: bool = False,
):
    """Certified sweep of one zone. Returns a GridReport (and the grid values on request)."""
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    t0 = time.perf_counter()
    if lip_override is not None:
        zl = replace(z, lip_a=float(lip_override[0]), lip_c=float(lip_override[1]))
        source = "override"
    else:
        zl = with_lipschitz(z, lip_source)
        source = lip_source
    a, c = build_grid(zl)
    F = evaluate_grid(zl.k, a, c, workers)
    bad = ~np.isfinite(F)
    if bad.any():
        i = int(np.argmax(bad))
        raise NonFiniteError(z.name, float(a[i]), float(c[i]), float(F[i]))
    i = int(np.argmax(F))  # first maximum; the grid is lexicographically sorted
    max_F = float(F[i])
    budget = zl.lip_a * zl.delta_a / 2 + zl.lip_c * zl.delta_c / 2
    upper = max_F + budget + slack
    rep = GridReport(
        zone=z.name, k=z.k, points_evaluated=int(F.size), max_F=max_F, argmax=(float(a[i]), float(c[i])),
        delta_a=zl.delta_a, delta_c=zl.delta_c, lip_a=zl.lip_a, lip_c=zl.lip_c, lip_source=source,
        error_budget=budget, fp_slack=slack, certified_upper=upper, verdict=bool(upper < 0),
        wall_time=time.perf_counter() - t0, workers=workers,
    )
    if return_values:
        return rep, (a, c, F)
    return rep


def finite_difference_audit(z: Zone, n: int = 10_000, h: float = 1e-7, seed: int = 0) -> dict:
    """Max central-difference |dF/da|, |dF/dc| at random interior points of the zone."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(z.a_min + h, z.a_max - h, 4 * n)
    c = rng.uniform(z.c_min + h, z.c_max - h, 4 * n)
    ok = z.contains(a - h, c - h) & z.contains(a + h, c + h) & (c - h > a + h)
    a, c = a[ok][:n], c[ok][:n]
    da = (cf.F(z.k, a + h, c) - cf.F(z.k, a - h, c)) / (2 * h)
    dc = (cf.F(z.k, a, c + h) - cf.F(z.k, a, c - h)) / (2 * h)
    return {"zone": z.name, "points": int(a.size), "max_abs_dF_da": float(np.max(np.abs(da))),
            "max_abs_dF_dc": float(np.max(np.abs(dc)))}


# ---------------------------------------------------- small-a certificate

C0_SWITCH = (118 - math.sqrt(3422)) / 178
# 1 - cos u <= sum alpha_i u^i on [2 pi/3, pi]
ALPHA = (0.7280333, -1.46638984, 1.67079499, -0.45379449, 0.03551166)


def _poly_small_c(a0):
    """Polynomial P with f1 + a0 f2 <= pi^2 P(c) on [0, c0], from 1 - cos u <= u^2/2 - 0.03 u^4."""
    Pn = np.polynomial.Polynomial
    c = Pn([0, 1])
    u = 2 * PI * c
    B = u**2 / 2 - 0.03 * u**4
    B_over_c = Pn(B.coef[1:])
    K = (3 - 4 * a0) / ((1 - a0) * (1 - 2 * a0))
    M = (1 - a0 - c) ** 2 / ((1 - a0) * (1 - 2 * a0))
    total = 2 * B + 2 * B_over_c - PI**2 * (4 * c**2 - 3 * c + 2) + a0 * (
        -2 * PI * math.sin(2 * PI * a0) / a0 + B * (K - 4 * (1 + c))
        + PI**2 * (5 + 12 * c + 9 * c**2 + 8 * c**3 + 2 * M)
    )
    return total / PI**2


def _poly_large_c(a0):
    """Polynomial P with f1 + a0 f2 <= pi^2 P(c) / c on [c0, 1/2], from the quartic cosine bound."""
    Pn = np.polynomial.Polynomial
    c = Pn([0, 1])
    u = 2 * PI * c
    B = sum(al * u**i for i, al in enumerate(ALPHA))
    K = (3 - 4 * a0) / ((1 - a0) * (1 - 2 * a0))
    M = (1 - c) ** 2
    total = 2 * (c + 1) * B - c * PI**2 * (4 * c**2 - 3 * c + 2) + a0 * c * (
        -2 * PI * math.sin(2 * PI * a0) / a0 + B * (K - 4 * (1 + c))
        + PI**2 * (5 + 12 * c + 9 * c**2 + 8 * c**3 + 2 * M)
    )
    return total / PI**2


def _poly_a016():
    """(pi^2/425) (18228/21 c^2 + 3391 c - 342 - (850/pi) sin(8 pi/25)) as a polynomial over pi^2."""
    return np.polynomial.Polynomial(
        [(-342 - 850 / PI * math.sin(8 * PI / 25)) / 425, 3391 / 425, 18228 / 21 / 425]
    )


def _poly_max(p, lo, hi):
    crit = [r.real for r in p.deriv().roots() if abs(r.imag) < 1e-12 and lo <= r.real <= hi]
    xs = np.array([lo, hi] + crit)
    return float(np.max(p(xs)))


def _sampled_check(fun, lo, hi, n):
    """Max of fun on an n-point grid plus a Lipschitz-style continuity allowance."""
    x = np.linspace(lo, hi, n)
    y = fun(x)
    h = x[1] - x[0]
    slope = float(np.max(np.abs(np.diff(y)))) / h
    mx = float(np.max(y))
    return {"interval": [lo, hi], "samples": n, "max": mx, "argmax": float(x[int(np.argmax(y))]),
            "slope_estimate": slope, "max_with_continuity": mx + slope * h}  # twice the half-step allowance


@dataclass
class SmallACertificate:
    verdict: bool
    checks: dict

    def as_dict(self):
        return {"verdict": self.verdict, "checks": self.checks}


def small_a_certificate(samples: int = 100_000) -> SmallACertificate:
    eps = 1e-9  # open end at c = 0
    checks = {}
    checks["f1<0 on (0,1/2]"] = _sampled_check(cf.f1, eps, 0.5, samples)
    checks["f1+f2/60<=0 on (0,1/2]"] = _sampled_check(lambda c: cf.f1(c) + cf.f2(1 / 60, c) / 60, eps, 0.5, samples)
    checks["f1+4f2/25<=0 on (0,0.16]"] = _sampled_check(
        lambda c: cf.f1(c) + 0.16 * cf.f2(0.16, c), eps, 0.16, samples
    )
    ok = all(v["max_with_continuity"] < 0 for v in checks.values())

    # polynomial route: bound by polynomials, then locate their maxima exactly
    u = np.linspace(0, PI, samples)
    u2 = np.linspace(2 * PI / 3, PI, samples)
    cos_small = float(np.min(u**2 / 2 - 0.03 * u**4 - cf.omc(u)))
    cos_large = float(np.min(sum(al * u2**i for i, al in enumerate(ALPHA)) - cf.omc(u2)))
    polys = {}
    for name, p, lo, hi, scale in [
        ("P5 (a0=1/60, c<=c0)", _poly_small_c(1 / 60), 0.0, C0_SWITCH, lambda c: 1.0),
        ("P6 (a0=1/60, c>=c0)", _poly_large_c(1 / 60), C0_SWITCH, 0.5, lambda c: 1 / c),
        ("Q (a0=4/25, c<=0.16)", _poly_a016(), 0.0, 0.16, lambda c: 1.0),
    ]:
        a0 = 1 / 60 if "1/60" in name else 0.16
        cs = np.linspace(max(lo, eps), hi, 20_001)
        gap = PI**2 * p(cs) * scale(cs) - (cf.f1(cs) + a0 * cf.f2(a0, cs))
        polys[name] = {
            "coefficients": [float(x) for x in p.coef[::-1]],
            "interval": [lo, hi],
            "max_on_interval": _poly_max(p, lo, hi),
            "min_domination_gap": float(np.min(gap)),
        }
    poly_ok = (
        cos_small >= 0 and cos_large >= -1e-12
        and all(v["max_on_interval"] < 0 and v["min_domination_gap"] >= -1e-9 for v in polys.values())
    )
    checks["polynomial_bounds"] = polys
    checks["cosine_bounds_min_gap"] = {"u^2/2-0.03u^4 on [0,pi]": cos_small, "quartic on [2pi/3,pi]": cos_large}
    checks["c0"] = C0_SWITCH
    return SmallACertificate(bool(ok and poly_ok), checks)


# ----------------------------------------------------------------- verdict


def full_verdict(lip_source: str = "reference", workers: int | None = None, zone_names=None,
                 slack: float = DEFAULT_SLACK, on_zone=None) -> dict:
    """Small-a certificate, zone sweeps and midrange certificate. on_zone(report, (a, c, F)) sees each grid."""
    small = small_a_certificate()
    reports = []
    for z in zones():
        if zone_names and z.name not in zone_names:
            continue
        if on_zone is None:
            reports.append(sweep(z, lip_source=lip_source, workers=workers, slack=slack))
        else:
            rep, values = sweep(z, lip_source=lip_source, workers=workers, slack=slack, return_values=True)
            on_zone(rep, values)
            reports.append(rep)
    mid = midrange_certificate()
    overall = small.verdict and all(r.verdict for r in reports) and mid.verdict
    return {
        "overall_verdict": bool(overall),
        "small_a": small.as_dict(),
        "zones": [r.as_dict() for r in reports],
        "midrange": mid.as_dict(),
        "zone_selection": [r.zone for r in reports],
        "lip_source": lip_source,
    }
