"""Arrival and service batch distributions.

Geometric conventions are fixed once for the whole package and are used
everywhere by name, never as an unqualified "geometric":

* ``Geom+(a)``: support {1, 2, ...} with pmf ``a * (1-a)**(k-1)``.
* ``Geom0(a)``: ``Geom+(a) - 1``, support {0, 1, ...}.
* ``BerGeom(p, a)``: product of an independent Ber(p) and Geom+(a);
  mass ``1-p`` at zero and ``p * a * (1-a)**(k-1)`` at ``k >= 1``.
  Conditioned on being nonzero it is exactly Geom+(a), and its mean is
  ``p / a``.
* ``BerExp(p, rate)``: continuous analogue with tail
  ``P(X >= x) = p * exp(-rate * x)`` for ``x > 0``.

Samplers are inverse-transform based (geometric draws cost O(1) regardless
of the value) and consume a fixed number of uniforms per draw, so a seeded
:class:`~batchq.streams.RandomStream` reproduces sequences bit-exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .streams import RandomStream

__all__ = [
    "DistSpec",
    "bernoulli",
    "geom_plus",
    "geom_zero",
    "ber_geom",
    "exponential",
    "ber_exp",
    "deterministic",
    "pmf",
    "pmf_vector",
    "sf",
    "cdf",
    "mean",
    "variance",
    "pgf",
    "sample",
    "sample_n",
    "sample_compound",
    "sample_compound_n",
    "tail_cutoff",
]

_KINDS = ("bernoulli", "geom_plus", "geom_zero", "ber_geom", "exp", "ber_exp", "deterministic")
_CONTINUOUS = ("exp", "ber_exp")

# JSON field names per kind; fixed, see README.
_FIELDS = {
    "bernoulli": ("p",),
    "geom_plus": ("alpha",),
    "geom_zero": ("alpha",),
    "ber_geom": ("p", "alpha"),
    "exp": ("rate",),
    "ber_exp": ("p", "rate"),
    "deterministic": ("value",),
}


def _check_prob(name: str, v: float) -> float:
    v = float(v)
    if not 0.0 < v < 1.0:
        raise ValueError(f"{name} must lie strictly in (0, 1), got {v}")
    return v


@dataclass(frozen=True)
class DistSpec:
    """Tagged description of a batch distribution.

    Use the factory functions (:func:`ber_geom`, :func:`geom_plus`, ...)
    rather than the constructor; they validate parameters per variant.
    """

    kind: str
    p: float | None = None
    alpha: float | None = None
    rate: float | None = None
    value: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        want = _FIELDS[self.kind]
        for f in ("p", "alpha", "rate", "value"):
            present = getattr(self, f) is not None
            if present != (f in want):
                raise ValueError(f"{self.kind} takes exactly the fields {want}")
        if self.p is not None:
            _check_prob("p", self.p)
        if self.alpha is not None:
            _check_prob("alpha", self.alpha)
        if self.rate is not None and not self.rate > 0:
            raise ValueError(f"rate must be positive, got {self.rate}")
        if self.value is not None and self.value < 0:
            raise ValueError(f"deterministic value must be >= 0, got {self.value}")

    @property
    def is_continuous(self) -> bool:
        return self.kind in _CONTINUOUS

    @property
    def is_discrete(self) -> bool:
        """True when pmf/pgf make sense (integer-valued support)."""
        if self.is_continuous:
            return False
        if self.kind == "deterministic":
            return float(self.value).is_integer()
        return True

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        for f in _FIELDS[self.kind]:
            d[f] = float(getattr(self, f))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @staticmethod
    def from_dict(d: dict) -> "DistSpec":
        kind = d.get("kind")
        if kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {kind!r}")
        extra = set(d) - {"kind", *_FIELDS[kind]}
        if extra:
            raise ValueError(f"unexpected fields for {kind}: {sorted(extra)}")
        kw = {f: d[f] for f in _FIELDS[kind]}
        return DistSpec(kind=kind, **kw)

    @staticmethod
    def from_json(s: str) -> "DistSpec":
        return DistSpec.from_dict(json.loads(s))


def bernoulli(p: float) -> DistSpec:
    return DistSpec("bernoulli", p=p)


def geom_plus(alpha: float) -> DistSpec:
    return DistSpec("geom_plus", alpha=alpha)


def geom_zero(alpha: float) -> DistSpec:
    return DistSpec("geom_zero", alpha=alpha)


def ber_geom(p: float, alpha: float) -> DistSpec:
    return DistSpec("ber_geom", p=p, alpha=alpha)


def exponential(rate: float) -> DistSpec:
    return DistSpec("exp", rate=rate)


def ber_exp(p: float, rate: float) -> DistSpec:
    return DistSpec("ber_exp", p=p, rate=rate)


def deterministic(value: float) -> DistSpec:
    return DistSpec("deterministic", value=value)


def _require_discrete(spec: DistSpec, op: str) -> None:
    if not spec.is_discrete:
        detail = f"{spec.kind}(value={spec.value})" if spec.kind == "deterministic" else spec.kind
        raise ValueError(f"discrete-only operation: {op} is undefined for {detail}")


def pmf(spec: DistSpec, k: int) -> float:
    """P(X = k) for a discrete spec; raises for continuous variants."""
    _require_discrete(spec, "pmf")
    if k < 0 or k != int(k):
        raise ValueError(f"pmf defined on nonnegative integers, got {k}")
    k = int(k)
    if spec.kind == "bernoulli":
        return 1.0 - spec.p if k == 0 else (spec.p if k == 1 else 0.0)
    if spec.kind == "geom_plus":
        return 0.0 if k == 0 else spec.alpha * (1.0 - spec.alpha) ** (k - 1)
    if spec.kind == "geom_zero":
        return spec.alpha * (1.0 - spec.alpha) ** k
    if spec.kind == "ber_geom":
        if k == 0:
            return 1.0 - spec.p
        return spec.p * spec.alpha * (1.0 - spec.alpha) ** (k - 1)
    # deterministic with integral value
    return 1.0 if k == int(spec.value) else 0.0


def pmf_vector(spec: DistSpec, kmax: int) -> np.ndarray:
    """pmf evaluated on 0..kmax as a vector (convenience for kernels)."""
    return np.array([pmf(spec, k) for k in range(kmax + 1)], dtype=float)


def sf(spec: DistSpec, x: float) -> float:
    """Survival function P(X >= x); valid for every variant.

    For the discrete variants the useful arguments are integers; the tail
    formulas extend the geometric pattern analytically, e.g. for BerGeom
    ``P(X >= k) = p * (1-a)**(k-1)`` for ``k >= 1``.
    """
    if x <= 0:
        return 1.0
    if spec.kind == "exp":
        return math.exp(-spec.rate * x)
    if spec.kind == "ber_exp":
        return spec.p * math.exp(-spec.rate * x)
    if spec.kind == "deterministic":
        return 1.0 if spec.value >= x else 0.0
    k = math.ceil(x)
    if spec.kind == "bernoulli":
        return spec.p if k == 1 else 0.0
    if spec.kind == "geom_plus":
        return (1.0 - spec.alpha) ** (k - 1)
    if spec.kind == "geom_zero":
        return (1.0 - spec.alpha) ** k
    # ber_geom
    return spec.p * (1.0 - spec.alpha) ** (k - 1)


def cdf(spec: DistSpec, x: float) -> float:
    """P(X <= x)."""
    if x < 0:
        return 0.0
    if spec.kind == "exp":
        return -math.expm1(-spec.rate * x)
    if spec.kind == "ber_exp":
        # atom of mass 1-p at zero, exponential tail above
        return 1.0 - spec.p * math.exp(-spec.rate * x)
    return 1.0 - sf(spec, math.floor(x) + 1)


def mean(spec: DistSpec) -> float:
    """Exact expectation."""
    if spec.kind == "bernoulli":
        return spec.p
    if spec.kind == "geom_plus":
        return 1.0 / spec.alpha
    if spec.kind == "geom_zero":
        return 1.0 / spec.alpha - 1.0
    if spec.kind == "ber_geom":
        return spec.p / spec.alpha
    if spec.kind == "exp":
        return 1.0 / spec.rate
    if spec.kind == "ber_exp":
        return spec.p / spec.rate
    return float(spec.value)


def variance(spec: DistSpec) -> float:
    """Exact variance."""
    if spec.kind == "bernoulli":
        return spec.p * (1.0 - spec.p)
    if spec.kind in ("geom_plus", "geom_zero"):
        return (1.0 - spec.alpha) / spec.alpha**2
    if spec.kind == "ber_geom":
        p, a = spec.p, spec.alpha
        return p * (2.0 - a) / a**2 - (p / a) ** 2
    if spec.kind == "exp":
        return 1.0 / spec.rate**2
    if spec.kind == "ber_exp":
        p, r = spec.p, spec.rate
        return 2.0 * p / r**2 - (p / r) ** 2
    return 0.0


def pgf(spec: DistSpec, z: float) -> float:
    """Probability generating function E[z**X] for a discrete spec.

    ``z`` normally lies in [0, 1]; values up to 1 + 1e-3 are accepted so
    that the mean can be cross-checked by a central finite difference of
    the pgf at z = 1.
    """
    _require_discrete(spec, "pgf")
    if not (0.0 <= z <= 1.0 + 1e-3):
        raise ValueError(f"pgf argument must lie in [0, 1], got {z}")
    if spec.kind == "bernoulli":
        return 1.0 - spec.p + spec.p * z
    if spec.kind == "geom_plus":
        a = spec.alpha
        return a * z / (1.0 - (1.0 - a) * z)
    if spec.kind == "geom_zero":
        a = spec.alpha
        return a / (1.0 - (1.0 - a) * z)
    if spec.kind == "ber_geom":
        p, a = spec.p, spec.alpha
        return ((1.0 - p) - (1.0 - p - a) * z) / (1.0 - (1.0 - a) * z)
    return z ** int(spec.value)


def _geom_plus_draws(alpha: float, stream: RandomStream, n: int) -> np.ndarray:
    """n inverse-transform Geom+ draws; alpha may be 1 (degenerate at 1)."""
    if alpha >= 1.0:
        return np.ones(n, dtype=np.int64)
    u = stream.uniforms(n)
    k = 1 + np.floor(np.log1p(-u) / math.log1p(-alpha))
    return k.astype(np.int64)


def sample_n(spec: DistSpec, stream: RandomStream, n: int) -> np.ndarray:
    """n independent draws; int64 for discrete kinds, float64 for continuous.

    Draw budget per value is fixed (two uniforms for the Bernoulli-mixed
    kinds, one for the plain ones, none for deterministic), which keeps
    replica substreams aligned regardless of the sampled values.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if spec.kind == "deterministic":
        v = spec.value
        if float(v).is_integer():
            return np.full(n, int(v), dtype=np.int64)
        return np.full(n, float(v), dtype=float)
    if spec.kind == "bernoulli":
        return (stream.uniforms(n) < spec.p).astype(np.int64)
    if spec.kind == "geom_plus":
        return _geom_plus_draws(spec.alpha, stream, n)
    if spec.kind == "geom_zero":
        return _geom_plus_draws(spec.alpha, stream, n) - 1
    if spec.kind == "ber_geom":
        b = stream.uniforms(n) < spec.p
        g = _geom_plus_draws(spec.alpha, stream, n)
        return np.where(b, g, 0).astype(np.int64)
    if spec.kind == "exp":
        return -np.log1p(-stream.uniforms(n)) / spec.rate
    # ber_exp
    b = stream.uniforms(n) < spec.p
    e = -np.log1p(-stream.uniforms(n)) / spec.rate
    return np.where(b, e, 0.0)


def sample(spec: DistSpec, stream: RandomStream):
    """One draw; python int for discrete kinds, float otherwise."""
    v = sample_n(spec, stream, 1)[0]
    return int(v) if spec.is_discrete else float(v)


def sample_compound_n(p: float, alpha: float, stream: RandomStream, n: int) -> np.ndarray:
    """n draws of a geometric number of independent Geom+ summands.

    Draws V with P(V = k) = (1-p) * p**k for k >= 0, then V i.i.d.
    Geom+(alpha / (1-p)) summands; the sum is distributed BerGeom(p, alpha).
    The representation needs the summand parameter alpha / (1-p) <= 1,
    i.e. alpha <= 1 - p.
    """
    _check_prob("p", p)
    _check_prob("alpha", alpha)
    if alpha - (1.0 - p) > 1e-12:
        raise ValueError("compound representation unavailable: requires alpha <= 1 - p")
    # V = Geom+(1-p) - 1 counts the summands
    v = _geom_plus_draws(1.0 - p, stream, n) - 1
    total = int(v.sum())
    w = _geom_plus_draws(min(alpha / (1.0 - p), 1.0), stream, total)
    out = np.zeros(n, dtype=np.int64)
    ends = np.cumsum(v)
    starts = ends - v
    nonzero = v > 0
    if total:
        csum = np.concatenate(([0], np.cumsum(w)))
        out[nonzero] = csum[ends[nonzero]] - csum[starts[nonzero]]
    return out


def sample_compound(p: float, alpha: float, stream: RandomStream) -> int:
    return int(sample_compound_n(p, alpha, stream, 1)[0])


def tail_cutoff(spec: DistSpec, tol: float = 1e-12) -> int:
    """Smallest K with P(X > K) <= tol (discrete variants only)."""
    _require_discrete(spec, "tail_cutoff")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if spec.kind == "bernoulli":
        return 1
    if spec.kind == "deterministic":
        return int(spec.value)
    a = spec.alpha
    scale = spec.p if spec.kind == "ber_geom" else 1.0
    # P(X > K) = scale * (1-a)**K for the geometric-tailed kinds
    if scale <= tol:
        return 1
    k = math.ceil(math.log(tol / scale) / math.log1p(-a))
    k = max(k, 1)
    while sf(spec, k + 1) > tol:
        k += 1
    return k
