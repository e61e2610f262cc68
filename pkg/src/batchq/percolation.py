"""Directed first-passage percolation on the lattice and its continuous twin.

A directed path visits one site per column, with weakly increasing row
indices; the first-passage value is the minimum total site weight.  Two
endpoint conventions are supported:

* pinned (the default): the path starts at the query's start row and ends
  at its end row, matching the corner-to-corner first-passage time;
* free: the path may enter and leave at any rows inside [start row,
  end row].

The free variant is what the tandem identity uses: for queues started
empty at slot ``-window`` and driven by shared draws,

    sum_r X_r(0)  ==  max over -window <= m <= 0 of
                      ( sum_{n=m}^{-1} A_n  -  G(m) ),

where G(m) is the free-endpoint first passage over service weights
S[r][n] on columns m..-1 and rows 1..R (the m = 0 term is empty and
contributes 0).  This identity is exact pathwise, which is what
:func:`tandem_identity_check` verifies; with pinned endpoints it fails
for R >= 2 on finite windows, because the optimal service path may skip
the first or last stages entirely.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from .distributions import DistSpec, sample_n
from .queue_core import _lindley
from .streams import RandomStream

__all__ = [
    "WeightField",
    "PathQuery",
    "JumpField",
    "TimeConstantEstimate",
    "IdentityCheck",
    "enumerate_first_passage",
    "first_passage",
    "estimate_time_constant",
    "sample_jump_field",
    "continuous_first_passage",
    "tandem_identity_check",
]


@dataclass
class WeightField:
    """Site weights ``weights[r, n]`` for row r (queue) and column n (slot)."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = np.asarray(self.weights)
        if self.weights.ndim != 2 or self.weights.size == 0:
            raise ValueError("weights must be a nonempty 2-d matrix")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")

    @property
    def rows(self) -> int:
        return self.weights.shape[0]

    @property
    def columns(self) -> int:
        return self.weights.shape[1]

    def to_csv(self, path) -> None:
        np.savetxt(path, self.weights, delimiter=",", fmt="%.17g")

    @staticmethod
    def from_csv(path) -> "WeightField":
        return WeightField(np.atleast_2d(np.loadtxt(path, delimiter=",")))


@dataclass(frozen=True)
class PathQuery:
    """Endpoints (column, row) -> (column, row) of a directed-path family."""

    start: tuple[int, int]
    end: tuple[int, int]
    pinned: bool = True

    def __post_init__(self):
        i, j = self.start
        k, l = self.end
        if i > k or j > l:
            raise ValueError("need start column <= end column and start row <= end row")

    def validate(self, field: WeightField) -> None:
        i, j = self.start
        k, l = self.end
        if not (0 <= i and k < field.columns and 0 <= j and l < field.rows):
            raise ValueError("query endpoints outside the field")


def _sweep(columns, first_col: np.ndarray, pinned: bool, n_rows: int):
    """Column-sweep DP shared by the matrix and streamed entry points."""
    if pinned:
        dp = np.full(n_rows, np.inf)
        dp[0] = first_col[0]
    else:
        dp = first_col.astype(float, copy=True)
    for col in columns:
        dp = col + np.minimum.accumulate(dp)
    return dp


def first_passage(field: WeightField, query: PathQuery) -> float:
    """Minimum path weight via a column sweep with prefix minima.

    Runs in O(columns x rows) time; agrees with the brute-force
    enumeration everywhere the latter is feasible.
    """
    query.validate(field)
    i, j = query.start
    k, l = query.end
    sub = field.weights[j:l + 1, i:k + 1]
    if query.pinned and i == k and j != l:
        raise ValueError("no pinned path: a single column cannot span two rows")
    dp = _sweep((sub[:, c] for c in range(1, sub.shape[1])), sub[:, 0],
                query.pinned, sub.shape[0])
    out = dp[-1] if query.pinned else dp.min()
    return float(out)


def enumerate_first_passage(field: WeightField, query: PathQuery,
                            max_paths: int = 1_000_000) -> float:
    """Brute-force oracle: enumerate every monotone row sequence.

    Row sequences are weakly increasing, one per column; refuses when the
    binomial path count exceeds ``max_paths``.
    """
    query.validate(field)
    i, j = query.start
    k, l = query.end
    n_cols = k - i + 1
    span = l - j + 1
    if math.comb(n_cols + span - 1, span - 1) > max_paths:
        raise ValueError("too many paths for brute-force enumeration")
    if query.pinned and i == k and j != l:
        raise ValueError("no pinned path: a single column cannot span two rows")
    best = np.inf
    cols = np.arange(i, k + 1)
    for rows in combinations_with_replacement(range(j, l + 1), n_cols):
        if query.pinned and (rows[0] != j or rows[-1] != l):
            continue
        w = field.weights[list(rows), cols].sum()
        if w < best:
            best = w
    if not np.isfinite(best):
        raise ValueError("empty path set")
    return float(best)


@dataclass(frozen=True)
class TimeConstantEstimate:
    """Replica mean of F((0,0),(floor(x N), N)) / N with a 95% CI."""

    x: float
    n: int
    mean: float
    ci_lo: float
    ci_hi: float
    replicas: int

    def to_dict(self) -> dict:
        return {"x": self.x, "N": self.n, "mean": self.mean,
                "ci_lo": self.ci_lo, "ci_hi": self.ci_hi, "replicas": self.replicas}


def _replica_value(weight_spec: DistSpec, x: float, n: int, stream: RandomStream) -> float:
    """One field's F((0,0),(floor(xN), N)) / N, generating columns on the fly.

    Weights are drawn column by column (row-major within a column) from
    the replica stream, so fields are reproducible without being stored.
    """
    n_cols = int(math.floor(x * n)) + 1
    n_rows = n + 1
    first = sample_n(weight_spec, stream, n_rows).astype(float)
    cols = (sample_n(weight_spec, stream, n_rows).astype(float) for _ in range(n_cols - 1))
    dp = _sweep(cols, first, pinned=True, n_rows=n_rows)
    return float(dp[-1]) / n


def estimate_time_constant(weight_spec: DistSpec, x: float, n: int, replicas: int,
                           stream: RandomStream, threads: int | None = None) -> TimeConstantEstimate:
    """Monte Carlo estimate of the time constant at aspect ratio ``x``.

    Each replica uses ``stream.substream(r)``, so results do not depend on
    the number of worker threads.
    """
    if x <= 0:
        raise ValueError("aspect ratio must be positive")
    if n < 10:
        raise ValueError("N must be at least 10")
    if replicas < 2:
        raise ValueError("need at least 2 replicas for a confidence interval")
    substreams = [stream.substream(r) for r in range(replicas)]
    if threads is not None and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda st: _replica_value(weight_spec, x, n, st), substreams))
    else:
        values = [_replica_value(weight_spec, x, n, st) for st in substreams]
    vals = np.array(values)
    m = float(vals.mean())
    half = 1.96 * float(vals.std(ddof=1)) / math.sqrt(replicas)
    return TimeConstantEstimate(x=x, n=n, mean=m, ci_lo=m - half, ci_hi=m + half,
                                replicas=replicas)


@dataclass
class JumpField:
    """Per-row jump processes: sorted event times in (0, horizon] with weights."""

    times: list[np.ndarray]
    weights: list[np.ndarray]
    horizon: float

    def __post_init__(self):
        if len(self.times) != len(self.weights) or not self.times:
            raise ValueError("need aligned nonempty times/weights lists")
        for t, w in zip(self.times, self.weights):
            if len(t) != len(w):
                raise ValueError("each row needs aligned times and weights")
            if len(t) and (np.any(np.diff(t) <= 0)):
                raise ValueError("event times must be strictly increasing per row")
            if len(t) and (t[0] <= 0 or t[-1] > self.horizon):
                raise ValueError("event times must lie in (0, horizon]")
            if np.any(np.asarray(w) <= 0):
                raise ValueError("event weights must be positive")

    @property
    def rows(self) -> int:
        return len(self.times)


def sample_jump_field(n_rows: int, horizon: float, weight_spec: DistSpec,
                      stream: RandomStream, rate: float = 1.0) -> JumpField:
    """Rows of rate-``rate`` Poisson event times carrying i.i.d. weights."""
    if n_rows < 1 or horizon <= 0 or rate <= 0:
        raise ValueError("need n_rows >= 1, horizon > 0, rate > 0")
    times, weights = [], []
    for _ in range(n_rows):
        # exponential gaps, drawn in blocks until the horizon is passed
        t, acc = [], 0.0
        while True:
            gaps = -np.log1p(-stream.uniforms(64)) / rate
            for g in gaps:
                acc += g
                if acc > horizon:
                    break
                t.append(acc)
            if acc > horizon:
                break
        t = np.array(t)
        w = sample_n(weight_spec, stream, len(t)).astype(float)
        if np.any(w <= 0):
            raise ValueError("weight spec must produce strictly positive weights")
        times.append(t)
        weights.append(w)
    return JumpField(times=times, weights=weights, horizon=horizon)


def continuous_first_passage(field: JumpField, s: float, t: float, j: int, l: int) -> float:
    """Infimum path cost when the column direction is continuous time.

    The path occupies row j just after time ``s``, switches upward at
    freely chosen increasing times, and occupies row ``l`` through time
    ``t``; it pays each event landing on its occupied row.  The infimum is
    attained with switch times in the open gaps between events, so a
    dynamic program over the merged, time-ordered event list suffices:
    advancing rows is free between events, and each event charges its
    weight to paths currently on its row.
    """
    if not 0 <= s < t <= field.horizon:
        raise ValueError("need 0 <= s < t <= horizon")
    if not 0 <= j <= l < field.rows:
        raise ValueError("row range out of bounds")
    events = []
    for r in range(j, l + 1):
        tt, ww = field.times[r], field.weights[r]
        mask = (tt > s) & (tt <= t)
        for e_t, e_w in zip(tt[mask], ww[mask]):
            events.append((float(e_t), r - j, float(e_w)))
    events.sort(key=lambda e: e[0])
    n_rows = l - j + 1
    dp = np.zeros(n_rows)
    idx = 0
    while idx < len(events):
        # group simultaneous events: the occupied row at that instant is single
        t0 = events[idx][0]
        dp = np.minimum.accumulate(dp)
        while idx < len(events) and events[idx][0] == t0:
            dp[events[idx][1]] += events[idx][2]
            idx += 1
    return float(np.minimum.accumulate(dp).min())


@dataclass(frozen=True)
class IdentityCheck:
    """Result of one pathwise tandem-versus-percolation comparison."""

    lhs: float
    rhs: float
    equal: bool
    best_m: int

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "equal": self.equal, "best_m": self.best_m}


def tandem_identity_check(arrival: DistSpec, services: Sequence[DistSpec],
                          window: int, stream: RandomStream) -> IdentityCheck:
    """Drive a tandem and the percolation DP with shared draws and compare.

    Queues start empty ``window`` slots before time 0.  The left side is
    the total queue length at time 0 summed over stages; the right side is
    the max over window starts m of (arrivals in [m, 0) minus the
    free-endpoint first passage of the service weights on columns m..-1).
    Equality is exact (integer arithmetic for discrete specs).
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    a = sample_n(arrival, stream, window)
    svc = [sample_n(sv, stream, window) for sv in services]
    # tandem side
    total = 0
    arr = a
    for s in svc:
        x_full = _lindley(arr, s, 0)
        y = x_full[:-1] + arr
        d = np.minimum(y, s)
        total = total + x_full[-1]
        arr = d
    # percolation side
    w = np.stack(svc)
    best = None
    best_m = window
    for m in range(window, -1, -1):
        if m == window:
            val = a[:0].sum()  # empty window: zero of the right dtype
        else:
            dp = _sweep((w[:, c] for c in range(m + 1, window)), w[:, m],
                        pinned=False, n_rows=w.shape[0])
            val = a[m:].sum() - dp.min()
        if best is None or val > best:
            best = val
            best_m = m - window  # report m relative to time 0
    discrete = np.issubdtype(w.dtype, np.integer)
    lhs, rhs = total, best
    equal = (lhs == rhs) if discrete else bool(abs(float(lhs) - float(rhs)) <= 1e-9)
    return IdentityCheck(lhs=float(lhs), rhs=float(rhs), equal=bool(equal), best_m=best_m)
