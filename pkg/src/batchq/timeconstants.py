"""Analytic and semi-analytic percolation time constants.

The general principle: with service-distributed weights, the time
constant is the Legendre transform of the stationary mean queue length
seen as a function of the arrival intensity,

    f(x) = sup over 0 < lam < mu of ( lam * x - h(lam) ),

where h(lam) is the stationary mean of a queue on the one-parameter
family with arrival intensity lam.  Plugging in the family gives
variational formulas parameterized by p or alpha, and closed forms in
the Bernoulli, geometric and exponential weight limits.  Every supremum
here is of a concave (after monotone reparameterization) objective on an
open interval, computed by a coarse scan plus golden-section refinement;
values are clamped at zero, which realizes the flat region exactly.

Continuous-time variants (one lattice direction replaced by time) are
prefixed ``ftilde``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

from .queue_core import solve_arrival

__all__ = [
    "golden_max",
    "scan_is_unimodal",
    "h_of_lambda",
    "f_bergeom",
    "f_bergeom_alpha",
    "f_bernoulli",
    "f_geometric",
    "f_exponential",
    "f_berexp",
    "ftilde_geom",
    "ftilde_exp",
    "ftilde_exp_sup",
    "ftilde_poisson",
    "f_legendre",
    "CurvePoint",
    "CurveResult",
    "curve",
    "VARIANTS",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(fn: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-12, scan: int = 129) -> tuple[float, float]:
    """Maximize a unimodal function on (lo, hi); returns (argmax, value).

    A coarse scan brackets the maximum (robust for nearly flat
    objectives), then golden-section search shrinks the bracket to
    ``tol``.
    """
    if not hi > lo:
        raise ValueError("need hi > lo")
    step = (hi - lo) / (scan + 1)
    xs = [lo + step * (i + 1) for i in range(scan)]
    vals = [fn(x) for x in xs]
    idx = max(range(scan), key=vals.__getitem__)
    a = xs[idx - 1] if idx > 0 else lo
    b = xs[idx + 1] if idx < scan - 1 else hi
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = fn(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = fn(x1)
    xm = 0.5 * (a + b)
    candidates = [(xs[idx], vals[idx]), (x1, f1), (x2, f2), (xm, fn(xm))]
    return max(candidates, key=lambda c: c[1])


def scan_is_unimodal(fn: Callable[[float], float], lo: float, hi: float,
                     n: int = 1000, tol: float = 1e-12) -> bool:
    """No interior dip on an n-point scan (three-point unimodality check)."""
    step = (hi - lo) / (n + 1)
    vals = [fn(lo + step * (i + 1)) for i in range(n)]
    scale = max(1.0, max(abs(v) for v in vals))
    for i in range(1, n - 1):
        if vals[i] < vals[i - 1] - tol * scale and vals[i] < vals[i + 1] - tol * scale:
            return False
    return True


def h_of_lambda(q: float, b: float, lam: float) -> float:
    """Stationary mean queue length at arrival intensity lam, service (q, b).

    Evaluated through the fixed-point arrival parameters in two
    algebraically equivalent ways, which must agree to 1e-10:

        h = b*(1-a) / (a*(a-b))
        h = [p/(1-p)] * [(1-q)/q] * [p*(1-q)/(b*(q-p)) + 1]
    """
    p, a = solve_arrival(q, b, lam)
    h1 = b * (1.0 - a) / (a * (a - b))
    h2 = p / (1.0 - p) * (1.0 - q) / q * (p * (1.0 - q) / (b * (q - p)) + 1.0)
    if abs(h1 - h2) > 1e-10 * max(1.0, abs(h1), abs(h2)):
        raise ArithmeticError(f"mean-queue-length forms disagree: {h1} vs {h2}")
    return h1


def _sup_bergeom_p(q: float, b: float, x: float) -> tuple[float, float]:
    def objective(p: float) -> float:
        return (p * (p * (1.0 - q) + (q - p) * b) / (1.0 - p)
                * (x - (1.0 - q) / (q - p)) / (b * q))

    return golden_max(objective, 0.0, q)


def f_bergeom(q: float, b: float, x: float) -> float:
    """Time constant for BerGeom(q, b) weights (variational, p form)."""
    _check_qb(q, b)
    if x <= 0:
        raise ValueError("abscissa must be positive")
    xm, val = _sup_bergeom_p(q, b, x)
    return max(0.0, val)


def _sup_bergeom_alpha(q: float, b: float, x: float) -> tuple[float, float]:
    def objective(a: float) -> float:
        return (b * (1.0 - a) / a
                * (q * x / (a * (1.0 - b - q) + b * q) - 1.0 / (a - b)))

    return golden_max(objective, b, 1.0)


def f_bergeom_alpha(q: float, b: float, x: float) -> float:
    """Same time constant through the alpha parameterization."""
    _check_qb(q, b)
    if x <= 0:
        raise ValueError("abscissa must be positive")
    xm, val = _sup_bergeom_alpha(q, b, x)
    return max(0.0, val)


def _check_qb(q: float, b: float) -> None:
    if not (0.0 < q < 1.0 and 0.0 < b < 1.0):
        raise ValueError("parameters must lie strictly in (0, 1)")


def f_bernoulli(q: float, x: float) -> float:
    """Closed form for Bernoulli(q) weights; flat for x <= (1-q)/q."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly in (0, 1)")
    if x <= 0:
        raise ValueError("abscissa must be positive")
    if x <= (1.0 - q) / q:
        return 0.0
    return (math.sqrt(q * x) - math.sqrt(1.0 - q)) ** 2


def f_geometric(b: float, x: float) -> float:
    """Closed form for Geom0(b) weights; flat for x <= b/(1-b)."""
    if not 0.0 < b < 1.0:
        raise ValueError("b must lie strictly in (0, 1)")
    if x <= 0:
        raise ValueError("abscissa must be positive")
    if x <= b / (1.0 - b):
        return 0.0
    return (math.sqrt(1.0 - b) * math.sqrt(1.0 + x) - 1.0) ** 2 / b


def f_exponential(x: float) -> float:
    """Closed form for Exp(1) weights: (sqrt(1+x) - 1)**2."""
    if x <= 0:
        raise ValueError("abscissa must be positive")
    return (math.sqrt(1.0 + x) - 1.0) ** 2


def _sup_berexp(q: float, x: float) -> tuple[float, float]:
    def objective(r: float) -> float:
        return r * r * (q * x / (1.0 - q + r * q) - 1.0 / (1.0 - r))

    return golden_max(objective, 0.0, 1.0)


def f_berexp(q: float, x: float) -> float:
    """Time constant for BerExp(q, 1) weights (variational)."""
    if not 0.0 < q < 1.0:
        raise ValueError("q must lie strictly in (0, 1)")
    if x <= 0:
        raise ValueError("abscissa must be positive")
    xm, val = _sup_berexp(q, x)
    return max(0.0, val)


def _sup_tilde_geom(b: float, y: float) -> tuple[float, float]:
    def objective(a: float) -> float:
        return b * (1.0 - a) / a * (y / (a * (1.0 - b)) - 1.0 / (a - b))

    return golden_max(objective, b, 1.0)


def ftilde_geom(b: float, y: float) -> float:
    """Continuous-time variant with Geom+(b) jump weights (variational)."""
    if not 0.0 < b < 1.0:
        raise ValueError("b must lie strictly in (0, 1)")
    if y <= 0:
        raise ValueError("abscissa must be positive")
    xm, val = _sup_tilde_geom(b, y)
    return max(0.0, val)


def _sup_tilde_exp(y: float) -> tuple[float, float]:
    def objective(r: float) -> float:
        return r * r * (y - 1.0 / (1.0 - r))

    return golden_max(objective, 0.0, 1.0)


def ftilde_exp_sup(y: float) -> float:
    """Continuous-time, Exp(1) jump weights: the variational form."""
    if y <= 0:
        raise ValueError("abscissa must be positive")
    xm, val = _sup_tilde_exp(y)
    return max(0.0, val)


def ftilde_exp(y: float) -> float:
    """Closed form of :func:`ftilde_exp_sup` via the stationarity quadratic.

    The maximizing r satisfies 2*y*s**2 - s - 1 = 0 with s = 1 - r, so
    s = (1 + sqrt(8y + 1)) / (4y) and f = (1-s)**2 * (y - 1/s), clamped
    at zero (the value vanishes for y <= 1).
    """
    if y <= 0:
        raise ValueError("abscissa must be positive")
    s = (1.0 + math.sqrt(8.0 * y + 1.0)) / (4.0 * y)
    val = (1.0 - s) ** 2 * (y - 1.0 / s)
    return max(0.0, val)


def ftilde_poisson(y: float) -> float:
    """Unit jump weights at Poisson times: ([sqrt(y) - 1]_+)**2."""
    if y <= 0:
        raise ValueError("abscissa must be positive")
    return max(0.0, math.sqrt(y) - 1.0) ** 2


def _sup_legendre(q: float, b: float, x: float) -> tuple[float, float]:
    mu = q / b

    def objective(lam: float) -> float:
        return lam * x - h_of_lambda(q, b, lam)

    return golden_max(objective, mu * 1e-9, mu * (1.0 - 1e-9))


def f_legendre(q: float, b: float, x: float) -> float:
    """Time constant as the Legendre transform of the mean queue length.

    Must agree with :func:`f_bergeom` everywhere; the two routes share no
    code beyond the golden-section helper.
    """
    _check_qb(q, b)
    if x <= 0:
        raise ValueError("abscissa must be positive")
    lam, val = _sup_legendre(q, b, x)
    return max(0.0, val)


# --- curve tabulation -------------------------------------------------------

VARIANTS = ("ber", "geom", "exp", "ber_geom", "ber_exp",
            "cont_geom", "cont_exp", "cont_poisson", "legendre")

_NEEDS = {
    "ber": ("q",),
    "geom": ("beta",),
    "exp": (),
    "ber_geom": ("q", "beta"),
    "ber_exp": ("q",),
    "cont_geom": ("beta",),
    "cont_exp": (),
    "cont_poisson": (),
    "legendre": ("q", "beta"),
}


@dataclass(frozen=True)
class CurvePoint:
    x: float
    f: float
    maximizer: float | None


@dataclass(frozen=True)
class CurveResult:
    variant: str
    params: dict
    points: list[CurvePoint]

    def csv_rows(self) -> list[str]:
        ptxt = ";".join(f"{k}={v:.17g}" for k, v in sorted(self.params.items())) or "-"
        rows = []
        for pt in self.points:
            m = "" if pt.maximizer is None else f"{pt.maximizer:.17g}"
            rows.append(f"{self.variant},{ptxt},{pt.x:.17g},{pt.f:.17g},{m}")
        return rows


def _point(variant: str, params: dict, x: float) -> CurvePoint:
    if variant == "ber":
        return CurvePoint(x, f_bernoulli(params["q"], x), None)
    if variant == "geom":
        return CurvePoint(x, f_geometric(params["beta"], x), None)
    if variant == "exp":
        return CurvePoint(x, f_exponential(x), None)
    if variant == "ber_geom":
        xm, val = _sup_bergeom_p(params["q"], params["beta"], x)
        return CurvePoint(x, max(0.0, val), xm)
    if variant == "ber_exp":
        xm, val = _sup_berexp(params["q"], x)
        return CurvePoint(x, max(0.0, val), xm)
    if variant == "cont_geom":
        xm, val = _sup_tilde_geom(params["beta"], x)
        return CurvePoint(x, max(0.0, val), xm)
    if variant == "cont_exp":
        xm, val = _sup_tilde_exp(x)
        return CurvePoint(x, max(0.0, val), xm)
    if variant == "cont_poisson":
        return CurvePoint(x, ftilde_poisson(x), None)
    if variant == "legendre":
        xm, val = _sup_legendre(params["q"], params["beta"], x)
        return CurvePoint(x, max(0.0, val), xm)
    raise ValueError(f"unknown variant {variant!r}")


def curve(variant: str, params: dict, xs: Sequence[float]) -> CurveResult:
    """Tabulate (x, f(x), maximizer) for one model variant on a grid."""
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    missing = [k for k in _NEEDS[variant] if k not in params]
    if missing:
        raise ValueError(f"variant {variant} needs parameters {missing}")
    xs = list(xs)
    if not xs:
        raise ValueError("empty abscissa grid")
    pts = [_point(variant, params, float(x)) for x in xs]
    return CurveResult(variant=variant, params={k: params[k] for k in _NEEDS[variant]}, points=pts)
