"""Single-queue slot dynamics, stationary laws, and exact numeric checks.

A slot processes an arrival batch A and an offered service S:

    Y = X + A            queue length after the arrival
    D = min(Y, S)        departures
    U = S - D            unused service
    X' = Y - D           queue length at the start of the next slot
    T = U + A            unused service plus the same slot's arrival
    I = U + A'           unused service plus the next slot's arrival

For Bernoulli-geometric arrivals BerGeom(p, alpha) and services
BerGeom(q, beta), the queue is reversible in equilibrium exactly when

    [alpha/(1-alpha)] * [p/(1-p)] == [beta/(1-beta)] * [q/(1-q)],

in which case departures are distributed like arrivals (a Burke-type
theorem), the queue length is independent of past departures, and the
stationary law of X is BerGeom(c, gamma) with

    c = [beta/(1-beta)] * [(1-alpha)/alpha],   gamma = (alpha-beta)/(1-beta).

This module provides the simulator, the one-parameter-family solver, a
detailed-balance residual check, busy-period likelihoods, and an
independent truncated-Markov-chain oracle for stationary laws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import DistSpec, ber_geom, mean, pmf, sf, tail_cutoff, sample_n
from .streams import RandomStream

__all__ = [
    "QueueParams",
    "StationaryLaw",
    "SlotRecord",
    "Trace",
    "step",
    "simulate",
    "path_max_X",
    "check_condition",
    "check_continuous_condition",
    "match_arrival_bernoulli",
    "solve_arrival",
    "stationary_law",
    "verify_detailed_balance",
    "excursion_loglik",
    "markov_oracle",
    "suggested_burn_in",
]


@dataclass(frozen=True)
class QueueParams:
    """The four-parameter BerGeom queue: arrivals (p, alpha), services (q, beta)."""

    p: float
    alpha: float
    q: float
    beta: float

    def __post_init__(self):
        for name in ("p", "alpha", "q", "beta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie strictly in (0, 1), got {v}")

    @property
    def arrival_spec(self) -> DistSpec:
        return ber_geom(self.p, self.alpha)

    @property
    def service_spec(self) -> DistSpec:
        return ber_geom(self.q, self.beta)

    @property
    def arrival_rate(self) -> float:
        return self.p / self.alpha

    @property
    def service_rate(self) -> float:
        return self.q / self.beta

    @property
    def is_stable(self) -> bool:
        """Mean service exceeds mean arrival: p*beta < q*alpha."""
        return self.p * self.beta < self.q * self.alpha


@dataclass(frozen=True)
class StationaryLaw:
    """Stationary X ~ BerGeom(c, gamma); Y ~ BerGeom(p + c - p*c, gamma)."""

    c: float
    gamma: float
    y_bernoulli: float

    @property
    def mean_x(self) -> float:
        return self.c / self.gamma

    @property
    def mean_y(self) -> float:
        return self.y_bernoulli / self.gamma

    @property
    def x_spec(self) -> DistSpec:
        return ber_geom(self.c, self.gamma)

    @property
    def y_spec(self) -> DistSpec:
        return ber_geom(self.y_bernoulli, self.gamma)

    def x_pmf(self, k: int) -> float:
        return pmf(self.x_spec, k)

    def y_pmf(self, k: int) -> float:
        return pmf(self.y_spec, k)

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "gamma": self.gamma,
            "y_bernoulli": self.y_bernoulli,
            "mean_x": self.mean_x,
            "mean_y": self.mean_y,
        }


@dataclass(frozen=True)
class SlotRecord:
    """One slot of a trace; ``i`` is None on the final slot (needs A')."""

    n: int
    a: float
    s: float
    x: float
    y: float
    d: float
    u: float
    t: float
    i: float | None


def step(x, a, s):
    """One slot update: returns (x_next, departures, unused service)."""
    if x < 0 or a < 0 or s < 0:
        raise ValueError("queue length, arrival and service must be nonnegative")
    y = x + a
    d = min(y, s)
    return y - d, d, s - d


def _lindley(a: np.ndarray, s: np.ndarray, init_x) -> np.ndarray:
    """Queue lengths X_0..X_n for driving sequences of length n.

    Uses the running-minimum form of the recursion so the whole path is
    computed with vector operations:
    X_k = C_k + max(init_x, -min_{1<=m<=k} C_m) with C_k the prefix sums
    of A - S.
    """
    diffs = a - s
    c = np.concatenate((np.zeros(1, dtype=diffs.dtype), np.cumsum(diffs)))
    runmin = np.minimum.accumulate(c[1:])
    x = np.empty(len(a) + 1, dtype=diffs.dtype)
    x[0] = init_x
    x[1:] = c[1:] + np.maximum(init_x, -runmin)
    return x


@dataclass
class Trace:
    """A simulated queue path: driving sequences plus derived per-slot data.

    ``x`` holds X_n at the start of each slot; ``final_x`` is the queue
    length after the last slot.  ``i[n] = u[n] + a[n+1]`` exists for all
    but the final slot.
    """

    arrival: DistSpec
    service: DistSpec
    seed: int | None
    init_x: float
    a: np.ndarray
    s: np.ndarray
    x_full: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return self.x_full[:-1]

    @property
    def final_x(self):
        return self.x_full[-1]

    @property
    def y(self) -> np.ndarray:
        return self.x + self.a

    @property
    def d(self) -> np.ndarray:
        return np.minimum(self.y, self.s)

    @property
    def u(self) -> np.ndarray:
        return self.s - self.d

    @property
    def t(self) -> np.ndarray:
        return self.u + self.a

    @property
    def i(self) -> np.ndarray:
        """Unused service plus next arrival; one entry shorter than the trace."""
        return self.u[:-1] + self.a[1:]

    def __len__(self) -> int:
        return len(self.a)

    def slot(self, n: int) -> SlotRecord:
        if not 0 <= n < len(self):
            raise IndexError(n)
        i_val = None if n == len(self) - 1 else self.u[n] + self.a[n + 1]
        return SlotRecord(n=n, a=self.a[n], s=self.s[n], x=self.x[n], y=self.y[n],
                          d=self.d[n], u=self.u[n], t=self.t[n], i=i_val)

    def check_invariants(self, atol: float = 1e-12) -> None:
        """Raise if any slot violates the transition identities."""
        y, d, u = self.y, self.d, self.u
        checks = [
            ("Y = X + A", y, self.x + self.a),
            ("D = min(Y, S)", d, np.minimum(y, self.s)),
            ("D + U = S", d + u, self.s),
            ("X' = Y - D", self.x_full[1:], y - d),
            ("X' - X = A - D", self.x_full[1:] - self.x, self.a - d),
            ("T = U + A", self.t, u + self.a),
        ]
        if len(self) > 1:
            checks.append(("I = U + A'", self.i, u[:-1] + self.a[1:]))
        for label, lhs, rhs in checks:
            err = np.abs(np.asarray(lhs, dtype=float) - np.asarray(rhs, dtype=float)).max()
            if err > atol:
                raise ValueError(f"trace invariant violated: {label} (max error {err})")

    def to_csv(self, path) -> None:
        """Write the per-slot table with header n,A,S,X,Y,D,U,I,T."""
        y, d, u, t = self.y, self.d, self.u, self.t
        is_int = np.issubdtype(self.a.dtype, np.integer) and np.issubdtype(self.s.dtype, np.integer)

        def fmt(v):
            return str(int(v)) if is_int else f"{float(v):.17g}"

        with open(path, "w") as fh:
            fh.write("n,A,S,X,Y,D,U,I,T\n")
            last = len(self) - 1
            for n in range(len(self)):
                i_txt = "" if n == last else fmt(u[n] + self.a[n + 1])
                fh.write(",".join([str(n), fmt(self.a[n]), fmt(self.s[n]), fmt(self.x[n]),
                                   fmt(y[n]), fmt(d[n]), fmt(u[n]), i_txt, fmt(t[n])]) + "\n")


def simulate(arrival: DistSpec, service: DistSpec, n_slots: int,
             init_x=0, stream: RandomStream | None = None,
             seed: int | None = None) -> Trace:
    """Simulate ``n_slots`` slots; arrivals are drawn first, then services.

    Unstable parameter choices are allowed (the queue may grow without
    bound); no stationarity is assumed here.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    if init_x < 0:
        raise ValueError("init_x must be nonnegative")
    if stream is None:
        if seed is None:
            raise ValueError("pass a RandomStream or a seed")
        stream = RandomStream(seed)
        used_seed = seed
    else:
        used_seed = stream.seed
    a = sample_n(arrival, stream, n_slots)
    s = sample_n(service, stream, n_slots)
    if a.dtype != s.dtype:
        a = a.astype(float)
        s = s.astype(float)
    x_full = _lindley(a, s, init_x if a.dtype == np.int64 else float(init_x))
    return Trace(arrival=arrival, service=service, seed=used_seed,
                 init_x=init_x, a=a, s=s, x_full=x_full)


def path_max_X(arrivals: Sequence[float], services: Sequence[float]):
    """Queue length after the window, from the window-maximum formula.

    For aligned driving sequences over slots m..n-1 this returns
    max over m <= k <= n of sum_{r=k}^{n-1} (A_r - S_r) (empty sum = 0),
    which equals X_n obtained by iterating :func:`step` from X_m = 0.
    """
    a = np.asarray(arrivals)
    s = np.asarray(services)
    if a.shape != s.shape or a.ndim != 1:
        raise ValueError("arrivals and services must be aligned 1-d sequences")
    if len(a) == 0:
        return 0
    diffs = a - s
    prefix = np.concatenate((np.zeros(1, dtype=diffs.dtype), np.cumsum(diffs)))
    best = (prefix[-1] - prefix.min())
    return best.item()


def check_condition(params: QueueParams) -> float:
    """Residual of the reversibility condition; zero iff it holds.

    Returns [a/(1-a)][p/(1-p)] - [b/(1-b)][q/(1-q)].
    """
    lhs = params.alpha / (1.0 - params.alpha) * params.p / (1.0 - params.p)
    rhs = params.beta / (1.0 - params.beta) * params.q / (1.0 - params.q)
    return lhs - rhs


def _condition_holds(params: QueueParams, rtol: float = 1e-6) -> bool:
    # relative tolerance: near-degenerate parameters (alpha or beta close
    # to 1) cannot represent the curve more tightly than 1 - alpha allows
    lhs = params.alpha / (1.0 - params.alpha) * params.p / (1.0 - params.p)
    rhs = params.beta / (1.0 - params.beta) * params.q / (1.0 - params.q)
    return abs(lhs - rhs) <= rtol * max(1.0, abs(lhs), abs(rhs))


def check_continuous_condition(p: float, a_rate: float, q: float, b_rate: float) -> float:
    """Residual of the BerExp analogue: a*p/(1-p) - b*q/(1-q)."""
    if not (0 < p < 1 and 0 < q < 1):
        raise ValueError("p and q must lie strictly in (0, 1)")
    if a_rate <= 0 or b_rate <= 0:
        raise ValueError("rates must be positive")
    return a_rate * p / (1.0 - p) - b_rate * q / (1.0 - q)


def match_arrival_bernoulli(alpha: float, q: float, beta: float) -> float:
    """The unique p placing (p, alpha) on the service's one-parameter family."""
    t = beta / (1.0 - beta) * q / (1.0 - q) * (1.0 - alpha) / alpha
    return t / (1.0 + t)


def solve_arrival(q: float, b: float, lam: float) -> tuple[float, float]:
    """Arrival parameters (p, alpha) with intensity lam on the family of (q, b).

    Solves the quadratic in alpha implied by the intensity identity
    lam = (1-alpha)*b*q / (alpha^2*(1-b-q) + alpha*b*q) and keeps the root
    in (b, 1); the fixed point is unique for 0 < lam < q/b.
    """
    if not (0 < q < 1 and 0 < b < 1):
        raise ValueError("q and b must lie strictly in (0, 1)")
    if lam <= 0:
        raise ValueError(f"arrival intensity must be positive, got {lam}")
    mu = q / b
    if lam >= mu:
        raise ValueError(f"unstable intensity: lam={lam} >= service intensity mu={mu}")
    # lam*(1-b-q)*alpha^2 + b*q*(lam+1)*alpha - b*q = 0
    ca = lam * (1.0 - b - q)
    cb = b * q * (lam + 1.0)
    cc = -b * q
    if ca == 0.0:
        roots = [-cc / cb]
    else:
        disc = cb * cb - 4.0 * ca * cc
        if disc < 0:
            raise ValueError("no real solution; parameters out of range")
        sq = math.sqrt(disc)
        # numerically stable pair of roots
        qq = -0.5 * (cb + math.copysign(sq, cb))
        roots = [qq / ca, cc / qq]
    valid = [r for r in roots if b < r < 1.0]
    if not valid:
        raise ValueError("no admissible alpha in (beta, 1); check parameters")
    alpha = min(valid)  # uniqueness makes this a single element
    p = lam * alpha
    if not 0.0 < p < 1.0:
        raise ValueError("derived p outside (0, 1); check parameters")
    return p, alpha


def stationary_law(params: QueueParams) -> StationaryLaw:
    """Stationary BerGeom law of the queue under the reversibility condition.

    Raises when the condition fails: the stationary law is then not
    Bernoulli-geometric in general; use :func:`markov_oracle` instead.
    """
    if not params.is_stable:
        raise ValueError("unstable parameters: need p*beta < q*alpha")
    if not _condition_holds(params):
        raise ValueError(
            "reversibility condition violated (residual "
            f"{check_condition(params):.3g}); the stationary law is not "
            "Bernoulli-geometric in general, use markov_oracle")
    c = params.beta / (1.0 - params.beta) * (1.0 - params.alpha) / params.alpha
    gamma = (params.alpha - params.beta) / (1.0 - params.beta)
    y_b = params.p + c - params.p * c
    return StationaryLaw(c=c, gamma=gamma, y_bernoulli=y_b)


def verify_detailed_balance(params: QueueParams, K: int = 30) -> float:
    """Max residual of the detailed-balance identity on states up to K.

    Checks, for all 0 <= k, r <= m <= K,

        pi(k) P(Y=m|X=k) P(X'=r|Y=m) == pi(r) P(Y=m|X=r) P(X'=k|Y=m)

    with pi the BerGeom(c, gamma) formula law.  Under the reversibility
    condition the residual is at rounding level; when the condition fails
    the identity genuinely breaks and the residual is macroscopic.
    """
    c = params.beta / (1.0 - params.beta) * (1.0 - params.alpha) / params.alpha
    gamma = (params.alpha - params.beta) / (1.0 - params.beta)
    if not (0 < c < 1 and 0 < gamma < 1):
        raise ValueError("formula law undefined for these parameters (need beta < alpha)")
    ks = np.arange(K + 1)
    pi = np.where(ks == 0, 1.0 - c, c * gamma * (1.0 - gamma) ** np.maximum(ks - 1, 0))
    a_spec = params.arrival_spec
    s_spec = params.service_spec
    # arr[k, m] = P(A = m - k) for m >= k
    diff = ks[None, :] - ks[:, None]
    a_pmf = np.array([pmf(a_spec, j) for j in range(K + 1)])
    arr = np.where(diff >= 0, a_pmf[np.clip(diff, 0, K)], 0.0)
    # srv[m, r] = P(X' = r | Y = m): pmf of S at m - r for r >= 1, tail at r = 0
    s_pmf = np.array([pmf(s_spec, j) for j in range(K + 1)])
    s_sf = np.array([sf(s_spec, j) for j in range(K + 1)])
    srv = np.where(diff.T >= 0, s_pmf[np.clip(diff.T, 0, K)], 0.0)
    srv[:, 0] = s_sf
    # term[k, m, r] = pi(k) P(Y=m|X=k) P(X'=r|Y=m)
    term = pi[:, None, None] * arr[:, :, None] * srv[None, :, :]
    return float(np.abs(term - term.transpose(2, 1, 0)).max())


def _log_pmf_bergeom(p: float, a: float, k: int) -> float:
    if k == 0:
        return math.log1p(-p)
    return math.log(p) + math.log(a) + (k - 1) * math.log1p(-a)


def _log_sf_bergeom(p: float, a: float, k: int) -> float:
    # log P(X >= k) for k >= 1
    return math.log(p) + (k - 1) * math.log1p(-a)


def excursion_loglik(params: QueueParams, a_seq: Sequence[int], d_seq: Sequence[int]) -> float:
    """Log-likelihood of a busy-period excursion of the BerGeom queue.

    The excursion starts from an empty queue; arrivals a_1..a_n and
    departures d_1..d_n must satisfy sum(a) == sum(d) with all strict
    partial-sum inequalities, so the queue stays positive in between.
    The value is log P(A=a_seq, S_1..S_{n-1}=d_1..d_{n-1}, S_n >= d_n)
    given the empty start; the final service only needs to cover d_n, so
    its term is a tail probability.
    """
    a = np.asarray(a_seq, dtype=np.int64)
    d = np.asarray(d_seq, dtype=np.int64)
    n = len(a)
    if n == 0 or len(d) != n:
        raise ValueError("invalid excursion shape: need aligned nonempty sequences")
    if np.any(a < 0) or np.any(d < 0):
        raise ValueError("invalid excursion shape: negative entries")
    if a[0] == 0 or d[-1] == 0:
        raise ValueError("invalid excursion shape: need a_1 > 0 and d_n > 0")
    ca, cd = np.cumsum(a), np.cumsum(d)
    if ca[-1] != cd[-1]:
        raise ValueError("invalid excursion shape: total arrivals must equal departures")
    if n > 1 and not np.all(ca[:-1] > cd[:-1]):
        raise ValueError("invalid excursion shape: queue must stay positive before the end")
    ll = sum(_log_pmf_bergeom(params.p, params.alpha, int(k)) for k in a)
    ll += sum(_log_pmf_bergeom(params.q, params.beta, int(k)) for k in d[:-1])
    ll += _log_sf_bergeom(params.q, params.beta, int(d[-1]))
    return ll


def _service_pmf_vector(service, tol: float) -> np.ndarray:
    if isinstance(service, DistSpec):
        if not service.is_discrete:
            raise ValueError("markov_oracle needs discrete specs")
        return np.array([pmf(service, k) for k in range(tail_cutoff(service, tol) + 1)])
    v = np.asarray(service, dtype=float)
    if v.ndim != 1 or np.any(v < 0) or abs(v.sum() - 1.0) > 1e-12:
        raise ValueError("explicit service pmf must be a nonnegative vector summing to 1")
    return v


def markov_oracle(arrival: DistSpec, service, K: int = 200,
                  tol: float = 1e-13) -> np.ndarray:
    """Stationary pmf of the queue-length chain on {0..K}, brute force.

    Builds the exact one-slot kernel from pmfs and tails (``service`` may
    be a DistSpec or an explicit finite pmf vector), then solves pi P = pi
    by the power method: repeated squaring to wash out transients followed
    by vector iterations until the residual is below ``tol``.  Arrival
    batches are truncated where their tail drops below 1e-14 and the lost
    kernel mass is left unreflected, so the result is honest about
    truncation; if the computed law leaves more than 1e-12 mass near the
    truncation boundary the call fails asking for a larger K.
    """
    if not arrival.is_discrete:
        raise ValueError("markov_oracle needs discrete specs")
    a_pmf = np.array([pmf(arrival, k) for k in range(tail_cutoff(arrival, 1e-14) + 1)])
    s_pmf = _service_pmf_vector(service, 1e-14)
    service_mean = float(np.arange(len(s_pmf)) @ s_pmf)
    if mean(arrival) >= service_mean:
        raise ValueError("unstable queue: oracle needs mean service > mean arrival")
    a_max = len(a_pmf) - 1
    m_max = K + a_max
    # service kernel: srv[m, r] = P(X' = r | Y = m) for r in 0..K
    s_sf = np.concatenate((np.cumsum(s_pmf[::-1])[::-1], np.zeros(m_max + 1)))
    srv = np.zeros((m_max + 1, K + 1))
    for m in range(m_max + 1):
        hi = min(m, K)
        js = m - np.arange(1, hi + 1)
        vals = np.where(js < len(s_pmf), s_pmf[np.clip(js, 0, len(s_pmf) - 1)], 0.0)
        srv[m, 1:hi + 1] = vals
        srv[m, 0] = s_sf[m] if m < len(s_sf) else 0.0
    kernel = np.zeros((K + 1, K + 1))
    for a, w in enumerate(a_pmf):
        kernel += w * srv[a:a + K + 1, :]
    # power method: square until the rows agree, then refine with the raw
    # kernel; refinement stops at the tolerance or at the double-precision
    # plateau (slowly mixing chains bottom out slightly above 1e-13)
    q_mat = kernel / kernel.sum(axis=1, keepdims=True)
    for _ in range(60):
        q_mat = q_mat @ q_mat
        q_mat /= q_mat.sum(axis=1, keepdims=True)
        if np.abs(q_mat[0] - q_mat[-1]).max() < 1e-16:
            break
    pi = q_mat[0] / q_mat[0].sum()

    def _residual(v: np.ndarray) -> float:
        nxt = v @ kernel
        return float(np.abs(nxt / nxt.sum() - v).max())

    residual = _residual(pi)
    prev = math.inf
    for _ in range(25):
        if residual <= tol or residual >= prev * 0.9:
            break
        prev = residual
        for _ in range(200):
            pi = pi @ kernel
            pi /= pi.sum()
        residual = _residual(pi)
    if residual > 100 * tol:
        raise RuntimeError(f"power iteration stalled at residual {residual:.3g} "
                           f"(target {tol}); increase K or check stability")
    if pi[-5:].sum() > 1e-12:
        raise RuntimeError(
            f"increase K: mass {pi[-5:].sum():.3g} sits near the truncation boundary")
    return pi


def suggested_burn_in(arrival_rate: float, service_rate: float) -> int:
    """Burn-in long enough for geometric mixing with a crude safety factor."""
    if service_rate <= arrival_rate:
        raise ValueError("burn-in heuristic needs a stable queue")
    return max(10_000, math.ceil(100.0 / (service_rate - arrival_rate)))
